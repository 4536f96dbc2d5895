//! Command-line front end: series evaluation, the exact identity suite,
//! convergence tables, and quadrature cross-checks.
//!
//! Exit codes: 0 success; 1 a requested assertion or comparison failed
//! (identity failure, --assert-tol violation, engine/oracle disagreement);
//! 2 the series diverged or the oracle did not converge; 3 bad input.

use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{self, CorpusEntry};
use crate::engine::{self, EngineOptions, Lambda, Mode, TailCorrection};
use crate::error::Error;
use crate::numeric::{BigFloat, Rational};
use crate::quad;
use crate::sequences::{make_source, parse_coefficient_json, CoefficientSource, IntegrandFn};
use crate::transform;
use crate::Result;

const EXIT_OK: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_NO_CONVERGENCE: i32 = 2;
const EXIT_BAD_INPUT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "binomint",
    version,
    about = "Evaluates integrals from Taylor coefficients via binomial-transform series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the integral for a coefficient source
    Eval(EvalArgs),
    /// Run the exact-arithmetic identity suite
    Identities(IdentitiesArgs),
    /// Print a term-by-term convergence table
    Table(TableArgs),
    /// Compare the series engine against adaptive quadrature
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    GenericExact,
    GenericFloat,
    ClosedForm,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::GenericExact => Mode::GenericExact,
            ModeArg::GenericFloat => Mode::GenericFloat,
            ModeArg::ClosedForm => Mode::ClosedForm,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum TailArg {
    None,
    P2,
}

impl From<TailArg> for TailCorrection {
    fn from(t: TailArg) -> TailCorrection {
        match t {
            TailArg::None => TailCorrection::None,
            TailArg::P2 => TailCorrection::PSeries,
        }
    }
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum FormatArg {
    Human,
    Csv,
    Json,
}

#[derive(Args)]
struct SourceArgs {
    /// Worked-example id: ex1 .. ex5
    #[arg(long)]
    example: Option<String>,
    /// Parameter for ex4 (q >= 1)
    #[arg(long)]
    q: Option<u64>,
    /// Path to a coefficient JSON file
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Upper integration limit: a positive rational or "inf"
    #[arg(long)]
    lambda: String,
    /// Number of series terms
    #[arg(long, default_value_t = 256)]
    terms: usize,
    /// Requested precision in bits
    #[arg(long, default_value_t = 128)]
    precision_bits: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::GenericExact)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = TailArg::None)]
    tail: TailArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    /// Exit 1 unless |value - reference| stays within this bound
    #[arg(long)]
    assert_tol: Option<f64>,
}

#[derive(Args)]
struct IdentitiesArgs {
    /// Largest row index checked
    #[arg(long, default_value_t = 100)]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Upper integration limit: a positive rational or "inf"
    #[arg(long)]
    lambda: String,
    /// Number of table rows
    #[arg(long, default_value_t = 10)]
    rows: usize,
    /// Requested precision in bits
    #[arg(long, default_value_t = 128)]
    precision_bits: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::GenericExact)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = TailArg::None)]
    tail: TailArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Upper integration limit: a positive rational or "inf"
    #[arg(long)]
    lambda: String,
    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Series terms (default 256, or 200000 on the half line)
    #[arg(long)]
    terms: Option<usize>,
    /// Requested precision in bits
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Engine mode (default closed-form when available)
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Tail correction (default p2 on the half line)
    #[arg(long, value_enum)]
    tail: Option<TailArg>,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
}

/// Parses arguments from the process environment, dispatches, and returns
/// the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if help { EXIT_OK } else { EXIT_BAD_INPUT };
        }
    };
    let outcome = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Identities(a) => cmd_identities(a),
        Command::Table(a) => cmd_table(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_BAD_INPUT
        }
    }
}

/// Builds the coefficient source; `--example` also yields the registered
/// corpus entry (reference value, scale, integration limit).
fn resolve_source(args: &SourceArgs) -> Result<(CoefficientSource, Option<CorpusEntry>)> {
    match (&args.example, &args.coeffs) {
        (Some(_), Some(_)) => {
            Err(Error::BadInput("--example and --coeffs are mutually exclusive".into()))
        }
        (Some(id), None) => {
            let entry = corpus::get(id, args.q)?;
            Ok((entry.source.clone(), Some(entry)))
        }
        (None, Some(path)) => {
            if args.q.is_some() {
                return Err(Error::BadInput("--q applies only to --example".into()));
            }
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::BadInput(format!("cannot read {}: {e}", path.display()))
            })?;
            let spec = parse_coefficient_json(&text)?;
            Ok((make_source(&spec)?, None))
        }
        (None, None) => Err(Error::BadInput("one of --example or --coeffs is required".into())),
    }
}

fn value_digits(prec: u32) -> usize {
    (((prec as f64) * std::f64::consts::LOG10_2).floor() as usize).clamp(6, 200)
}

/// Drops trailing fractional zeros from plain decimal notation, so exact
/// dyadic values print as "0.5" rather than "0.5000...".
fn trim_plain(s: String) -> String {
    if s.contains('e') || !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn print_value(v: &BigFloat, prec: u32) -> String {
    trim_plain(v.to_decimal_string(value_digits(prec)))
}

fn print_estimate(v: &BigFloat) -> String {
    if v.is_zero() {
        "0".to_string()
    } else {
        v.to_sci_string(3)
    }
}

fn check_positive_tol(tol: f64, flag: &str) -> Result<()> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::BadInput(format!("{flag} must be a positive finite number")));
    }
    Ok(())
}

/// The registered reference applies only when the run's limit matches the
/// entry's registered limit.
fn reference_value(entry: &Option<CorpusEntry>, lambda: &Lambda, prec: u32) -> Option<BigFloat> {
    entry.as_ref().filter(|e| &e.lambda == lambda).map(|e| e.reference.eval(prec))
}

fn cmd_eval(a: EvalArgs) -> Result<i32> {
    let (source, entry) = resolve_source(&a.source)?;
    let lambda = Lambda::from_str(&a.lambda)?;
    if let Some(tol) = a.assert_tol {
        check_positive_tol(tol, "--assert-tol")?;
    }
    let mut opts = EngineOptions::new(lambda.clone());
    opts.max_terms = a.terms;
    opts.precision_bits = a.precision_bits;
    opts.mode = a.mode.into();
    opts.tail_correction = a.tail.into();
    let r = engine::integrate(&source, &opts)?;
    let reference = reference_value(&entry, &lambda, a.precision_bits);
    let ref_diff = reference.as_ref().map(|v| (&r.value - v).abs());

    let value = print_value(&r.value, a.precision_bits);
    let estimate = print_estimate(&r.error_estimate);
    let diff_str = ref_diff.as_ref().map(print_estimate);
    match a.format {
        FormatArg::Human => {
            println!("value            {value}");
            println!("terms used       {}", r.terms_used);
            println!("error estimate   {estimate}");
            println!("diverged         {}", if r.diverged { "yes" } else { "no" });
            println!("tail corrected   {}", if r.tail_corrected { "yes" } else { "no" });
            if let Some(d) = &diff_str {
                println!("reference diff   {d}");
            }
        }
        FormatArg::Csv => {
            println!("value,terms_used,error_estimate,diverged,tail_corrected,reference_diff");
            println!(
                "{value},{},{estimate},{},{},{}",
                r.terms_used,
                r.diverged,
                r.tail_corrected,
                diff_str.as_deref().unwrap_or("")
            );
        }
        FormatArg::Json => {
            let diff_json = match &diff_str {
                Some(d) => format!("\"{d}\""),
                None => "null".to_string(),
            };
            println!("{{");
            println!("  \"value\": \"{value}\",");
            println!("  \"terms_used\": {},", r.terms_used);
            println!("  \"error_estimate\": \"{estimate}\",");
            println!("  \"diverged\": {},", r.diverged);
            println!("  \"tail_corrected\": {},", r.tail_corrected);
            println!("  \"tail_model_verified\": {},", r.tail_model_verified);
            println!("  \"reference_diff\": {diff_json}");
            println!("}}");
        }
    }
    if r.diverged {
        return Ok(EXIT_NO_CONVERGENCE);
    }
    if let Some(tol) = a.assert_tol {
        let Some(diff) = &ref_diff else {
            return Err(Error::BadInput(
                "--assert-tol needs a registered reference at the given lambda".into(),
            ));
        };
        if *diff > BigFloat::from_f64(tol, 64) {
            return Ok(EXIT_FAIL);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_identities(a: IdentitiesArgs) -> Result<i32> {
    let reports = transform::run_identity_suite(a.max_n)?;
    let all_pass = reports.iter().all(|r| r.pass);
    match a.format {
        FormatArg::Human => {
            for r in &reports {
                println!(
                    "{:<14} n={:<4} {} {}  lhs={} rhs={}",
                    r.id,
                    r.n,
                    if r.pass { "ok " } else { "FAIL" },
                    if r.lhs == r.rhs { "=" } else { "!" },
                    r.lhs,
                    r.rhs
                );
            }
            let passed = reports.iter().filter(|r| r.pass).count();
            println!("identity checks: {passed}/{} passed", reports.len());
        }
        FormatArg::Csv => {
            println!("identity,n,lhs,rhs,pass");
            for r in &reports {
                println!("{},{},{},{},{}", r.id, r.n, r.lhs, r.rhs, r.pass);
            }
        }
        FormatArg::Json => {
            println!("[");
            for (i, r) in reports.iter().enumerate() {
                let comma = if i + 1 < reports.len() { "," } else { "" };
                println!(
                    "  {{\"identity\": \"{}\", \"n\": {}, \"lhs\": \"{}\", \"rhs\": \"{}\", \"pass\": {}}}{comma}",
                    r.id, r.n, r.lhs, r.rhs, r.pass
                );
            }
            println!("]");
        }
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_table(a: TableArgs) -> Result<i32> {
    let (source, entry) = resolve_source(&a.source)?;
    let lambda = Lambda::from_str(&a.lambda)?;
    let mut opts = EngineOptions::new(lambda.clone());
    opts.precision_bits = a.precision_bits;
    opts.mode = a.mode.into();
    opts.tail_correction = a.tail.into();
    let reference = reference_value(&entry, &lambda, a.precision_bits);
    let rows = engine::convergence_table(&source, &opts, reference.as_ref(), a.rows)?;
    let p = a.precision_bits;
    let with_err = reference.is_some();
    match a.format {
        FormatArg::Human => {
            let width = value_digits(p) + 4;
            if with_err {
                println!("{:>6}  {:<width$}  {:<width$}  abs_err", "n", "term", "partial_sum");
            } else {
                println!("{:>6}  {:<width$}  partial_sum", "n", "term");
            }
            for row in &rows {
                let term = print_value(&row.term, p);
                let partial = print_value(&row.partial, p);
                match &row.abs_err {
                    Some(e) => println!(
                        "{:>6}  {:<width$}  {:<width$}  {}",
                        row.n,
                        term,
                        partial,
                        print_estimate(e)
                    ),
                    None => println!("{:>6}  {:<width$}  {partial}", row.n, term),
                }
            }
        }
        FormatArg::Csv => {
            if with_err {
                println!("n,term,partial_sum,abs_err");
            } else {
                println!("n,term,partial_sum");
            }
            for row in &rows {
                let term = print_value(&row.term, p);
                let partial = print_value(&row.partial, p);
                match &row.abs_err {
                    Some(e) => println!("{},{term},{partial},{}", row.n, print_estimate(e)),
                    None => println!("{},{term},{partial}", row.n),
                }
            }
        }
        FormatArg::Json => {
            println!("[");
            for (i, row) in rows.iter().enumerate() {
                let comma = if i + 1 < rows.len() { "," } else { "" };
                let err_json = match &row.abs_err {
                    Some(e) => format!(", \"abs_err\": \"{}\"", print_estimate(e)),
                    None => String::new(),
                };
                println!(
                    "  {{\"n\": {}, \"term\": \"{}\", \"partial_sum\": \"{}\"{err_json}}}{comma}",
                    row.n,
                    print_value(&row.term, p),
                    print_value(&row.partial, p)
                );
            }
            println!("]");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs) -> Result<i32> {
    let (source, entry) = resolve_source(&a.source)?;
    let lambda = Lambda::from_str(&a.lambda)?;
    check_positive_tol(a.tol, "--tol")?;
    let integrand: IntegrandFn = source
        .integrand()
        .cloned()
        .ok_or_else(|| Error::BadInput("source has no registered integrand to integrate".into()))?;

    let prec = a.precision_bits.unwrap_or(quad::DEFAULT_ORACLE_PRECISION);
    let infinite = lambda.is_infinite();
    let mut opts = EngineOptions::new(lambda.clone());
    opts.precision_bits = prec;
    opts.mode = match a.mode {
        Some(m) => m.into(),
        None if source.closed_weighted_sum().is_some() => Mode::ClosedForm,
        None => Mode::GenericExact,
    };
    opts.max_terms = a.terms.unwrap_or(if infinite { 200_000 } else { 256 });
    opts.tail_correction = match a.tail {
        Some(t) => t.into(),
        None if infinite => TailCorrection::PSeries,
        None => TailCorrection::None,
    };
    let r = engine::integrate(&source, &opts)?;
    if r.diverged {
        eprintln!("series diverged after {} terms; no comparison possible", r.terms_used);
        return Ok(EXIT_NO_CONVERGENCE);
    }

    let tol_bf = BigFloat::from_f64(a.tol, 64);
    let oracle = match &lambda {
        Lambda::Infinite => quad::integrate_halfline(&integrand, &tol_bf, prec)?,
        Lambda::Finite(l) => quad::integrate_finite(
            &integrand,
            &BigFloat::zero(prec),
            &BigFloat::from_rational(l, prec + 16),
            &tol_bf,
            prec,
        )?,
    };

    // The oracle integrand may be a fixed multiple of the series integrand;
    // the comparison scales the engine value accordingly.
    let scale = entry.as_ref().map(|e| e.scale.clone()).unwrap_or_else(Rational::one);
    let w = prec + 16;
    let scaled = &r.value.with_precision(w) * &BigFloat::from_rational(&scale, w);
    let diff = (&scaled - &oracle.value).abs();
    let threshold = &BigFloat::from_u64(10, w)
        * &(&tol_bf.with_precision(w) + &r.error_estimate.with_precision(w));
    let within = diff <= threshold;

    let engine_str = print_value(&scaled, prec);
    let oracle_str = print_value(&oracle.value, prec);
    let diff_str = print_estimate(&diff);
    let threshold_str = print_estimate(&threshold);
    match a.format {
        FormatArg::Human => {
            println!("engine value     {engine_str}");
            println!("oracle value     {oracle_str}");
            println!("abs difference   {diff_str}");
            println!("threshold        {threshold_str}");
            println!("engine terms     {}", r.terms_used);
            println!("oracle panels    {}", oracle.subdivisions);
            println!(
                "oracle converged {}",
                if oracle.converged { "yes" } else { "no" }
            );
            println!("agreement        {}", if within { "yes" } else { "no" });
        }
        FormatArg::Csv => {
            println!(
                "engine_value,oracle_value,abs_difference,threshold,oracle_converged,within_threshold"
            );
            println!(
                "{engine_str},{oracle_str},{diff_str},{threshold_str},{},{within}",
                oracle.converged
            );
        }
        FormatArg::Json => {
            println!("{{");
            println!("  \"engine_value\": \"{engine_str}\",");
            println!("  \"oracle_value\": \"{oracle_str}\",");
            println!("  \"abs_difference\": \"{diff_str}\",");
            println!("  \"threshold\": \"{threshold_str}\",");
            println!("  \"engine_terms\": {},", r.terms_used);
            println!("  \"oracle_subdivisions\": {},", oracle.subdivisions);
            println!("  \"oracle_converged\": {},", oracle.converged);
            println!("  \"within_threshold\": {within}");
            println!("}}");
        }
    }
    if !oracle.converged {
        return Ok(EXIT_NO_CONVERGENCE);
    }
    Ok(if within { EXIT_OK } else { EXIT_FAIL })
}
