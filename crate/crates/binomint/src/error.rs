use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("harmonic table capped at n = {cap}, requested n = {n}")]
    HarmonicCap { n: usize, cap: usize },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("unknown corpus id `{0}`")]
    UnknownCorpusId(String),

    #[error("malformed rational `{0}`")]
    MalformedRational(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("exact coefficients unavailable: {0}")]
    ExactUnavailable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("bad input: {0}")]
    BadInput(String),
}
