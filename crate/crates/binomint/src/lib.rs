//! Series evaluation of definite integrals from Taylor coefficients.
//!
//! Given f(x) = sum a_k x^k, the integral over [0, lambda] can be rewritten
//! as a series in rho = lambda/(lambda+1) whose coefficients are binomial
//! transforms of the a_k:
//!
//!   integral_0^lambda f = sum_{n>=0} rho^(n+1) * W_n,
//!   W_n = sum_{k<=n} C(n,k) a_k / (k+1) = s_n / (n+1),
//!
//! where s_n accumulates the transformed sequence b_n = sum_k C(n,k) a_k.
//! For lambda = 1 this gives a geometric 2^-(n+1) series; lambda -> infinity
//! gives rho = 1 and the slowly convergent sum of the W_n themselves.
//!
//! The crate provides:
//! - exact rational / extended-precision float arithmetic ([`numeric`])
//! - coefficient sources and harmonic-number tables ([`sequences`])
//! - the binomial transform and an exact identity suite ([`transform`])
//! - the series engine with tail correction and divergence checks ([`engine`])
//! - dilogarithm/trilogarithm and high-precision constants ([`specfun`])
//! - an independent adaptive quadrature oracle ([`quad`])
//! - the worked example corpus wiring everything together ([`corpus`])

pub mod numeric;

pub mod corpus;
pub mod engine;
pub mod quad;
pub mod sequences;
pub mod specfun;
pub mod transform;

pub mod cli;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
