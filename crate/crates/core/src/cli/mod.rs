//! Command-line front end.
//!
//! Exit codes: `0` success, `1` mathematical rejection (not an automorphism,
//! invalid factors, residuals above tolerance), `2` malformed input or
//! invocation. Reports are `key: value` lines on standard output (or the
//! `--output` file); diagnostics go to standard error.

pub mod format;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::automorphism::{
    check_automorphism, compose_canonical_with_tol, compose_compact_with_tol, factor_canonical,
    factor_compact, property_report, sample_automorphism, AutCheckResult,
};
use crate::matrix::DenseMatrix;
use crate::DEFAULT_TOL;
use format::{
    fmt_f64, parse_factorization, parse_matrix, write_factorization, write_matrix, Factorization,
    FactorizationFile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lorentz-aut", version, about = "Lorentz cone automorphisms: check, factor, compose, sample, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print nothing; only the exit code reports the outcome.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Canonical,
    Compact,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether a matrix is a cone automorphism.
    Check {
        /// Matrix file, or `-` for standard input.
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Factor an automorphism into canonical or compact form.
    Factor {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Form::Canonical)]
        form: Form,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Multiply a factorization file back into a matrix.
    Compose {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Draw random automorphisms.
    ///
    /// Without --output the matrix documents are written back to back on
    /// standard output; with --output they go to `<dir>/sample_00000.json`, ...
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 10.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 1.0)]
        nu_min: f64,
        #[arg(long, default_value_t = 1.0)]
        nu_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Report the block-identity residuals and sampled cone behaviour.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Failure carrying its exit code and a diagnostic.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn malformed(message: impl Into<String>) -> Self {
        Self { code: EXIT_MALFORMED, message: message.into() }
    }

    fn rejected(message: impl Into<String>) -> Self {
        Self { code: EXIT_REJECTED, message: message.into() }
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let quiet = match &cli.command {
        Command::Check { out, .. }
        | Command::Factor { out, .. }
        | Command::Compose { out, .. }
        | Command::Sample { out, .. }
        | Command::Verify { out, .. } => out.quiet,
    };
    let result = match cli.command {
        Command::Check { input, tol, out } => cmd_check(&input, tol, &out),
        Command::Factor { input, form, tol, out } => cmd_factor(&input, form, tol, &out),
        Command::Compose { input, out } => cmd_compose(&input, &out),
        Command::Sample { n, count, alpha_max, nu_min, nu_max, seed, tol, out } => {
            cmd_sample(n, count, alpha_max, (nu_min, nu_max), seed, tol, &out)
        }
        Command::Verify { input, samples, tol, seed, out } => {
            cmd_verify(&input, samples, tol, seed, &out)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            if !quiet {
                eprintln!("lorentz-aut: {}", f.message);
            }
            f.code
        }
    }
}

fn cmd_check(input: &Path, tol: f64, out: &OutputArgs) -> Result<i32, Failure> {
    check_tol(tol)?;
    let s = read_matrix(input)?;
    let check = check_or_malformed(&s, tol)?;
    let mut report = Report::default();
    report.check(&check, tol);
    emit(out, &report.0)?;
    Ok(if check.is_automorphism { EXIT_OK } else { EXIT_REJECTED })
}

fn cmd_factor(input: &Path, form: Form, tol: f64, out: &OutputArgs) -> Result<i32, Failure> {
    check_tol(tol)?;
    let s = read_matrix(input)?;
    check_or_malformed(&s, tol)?;
    let scale = s.frobenius_norm().max(1.0);
    let (factorization, rebuilt) = match form {
        Form::Canonical => {
            let f = factor_canonical(&s, tol).map_err(|e| Failure::rejected(e.to_string()))?;
            let rebuilt = compose_canonical_with_tol(&f, tol);
            (Factorization::Canonical(f), rebuilt)
        }
        Form::Compact => {
            let f = factor_compact(&s, tol).map_err(|e| Failure::rejected(e.to_string()))?;
            let rebuilt = compose_compact_with_tol(&f, tol);
            (Factorization::Compact(f), rebuilt)
        }
    };
    let rebuilt = rebuilt.map_err(|e| Failure::rejected(e.to_string()))?;
    let residual = rebuilt.distance(&s).map_err(|e| Failure::malformed(e.to_string()))? / scale;
    let file = FactorizationFile { factorization, tol, residual: Some(residual) };
    emit(out, &write_factorization(&file))?;
    Ok(EXIT_OK)
}

fn cmd_compose(input: &Path, out: &OutputArgs) -> Result<i32, Failure> {
    let text = read_input(input)?;
    let file = parse_factorization(&text).map_err(|e| Failure::malformed(e.to_string()))?;
    let tol = file.tol;
    let s = match &file.factorization {
        Factorization::Canonical(f) => compose_canonical_with_tol(f, tol),
        Factorization::Compact(f) => compose_compact_with_tol(f, tol),
    }
    .map_err(|e| Failure::rejected(format!("invalid factorization: {e}")))?;
    let check = check_or_malformed(&s, tol)?;
    if let Some(reason) = check.rejection_reason(tol) {
        return Err(Failure::rejected(format!("composed matrix fails the check: {reason}")));
    }
    emit(out, &write_matrix(&s))?;
    Ok(EXIT_OK)
}

fn cmd_sample(
    n: usize,
    count: usize,
    alpha_max: f64,
    nu_range: (f64, f64),
    seed: u64,
    tol: f64,
    out: &OutputArgs,
) -> Result<i32, Failure> {
    check_tol(tol)?;
    // Validate ranges up front so bad flags never produce partial output.
    sample_automorphism(n, alpha_max, nu_range, seed).map_err(|e| Failure::malformed(e.to_string()))?;
    if let Some(dir) = &out.output {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::malformed(format!("{}: {e}", dir.display())))?;
    }
    let mut stdout = String::new();
    for index in 0..count {
        let sample_seed = seed.wrapping_add(index as u64);
        let s = sample_automorphism(n, alpha_max, nu_range, sample_seed)
            .map_err(|e| Failure::malformed(e.to_string()))?;
        let check = check_or_malformed(&s, tol)?;
        if let Some(reason) = check.rejection_reason(tol) {
            return Err(Failure::rejected(format!("sample {index} fails the check: {reason}")));
        }
        let text = write_matrix(&s);
        match &out.output {
            Some(dir) => {
                let path = dir.join(format!("sample_{index:05}.json"));
                fs::write(&path, text)
                    .map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))?;
            }
            None => stdout.push_str(&text),
        }
    }
    if out.output.is_none() && !out.quiet {
        write_stdout(&stdout)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(
    input: &Path,
    samples: usize,
    tol: f64,
    seed: u64,
    out: &OutputArgs,
) -> Result<i32, Failure> {
    check_tol(tol)?;
    let s = read_matrix(input)?;
    let check = check_or_malformed(&s, tol)?;
    let mut report = Report::default();
    report.check(&check, tol);
    // A cone-reversing or degenerate matrix cannot be normalized; stop here.
    if !check.cone_forward || !(check.mu > tol) {
        emit(out, &report.0)?;
        return Ok(EXIT_REJECTED);
    }
    let props = match property_report(&s, samples, tol, seed) {
        Ok(p) => p,
        Err(e) => {
            emit(out, &report.0)?;
            return Err(Failure::rejected(e.to_string()));
        }
    };
    report.line("samples", samples);
    for (name, value) in props.identity_residuals() {
        report.num(name, value);
    }
    report.num("cone_violation_max", props.cone_violation_max);
    report.num("boundary_drift_max", props.boundary_drift_max);
    let ok = check.is_automorphism && props.within(tol);
    report.line("within_tol", ok);
    emit(out, &report.0)?;
    Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
}

#[derive(Default)]
struct Report(String);

impl Report {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        self.0.push_str(&format!("{key}: {value}\n"));
    }

    fn num(&mut self, key: &str, value: f64) {
        self.line(key, fmt_f64(value));
    }

    fn check(&mut self, check: &AutCheckResult, tol: f64) {
        self.line("is_automorphism", check.is_automorphism);
        self.num("mu", check.mu);
        self.num("residual_congruence", check.residual_congruence);
        self.line("cone_forward", check.cone_forward);
        if let Some(reason) = check.rejection_reason(tol) {
            self.line("reason", reason);
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::malformed(format!("--tol must be finite and non-negative, got {tol}")))
    }
}

fn check_or_malformed(s: &DenseMatrix, tol: f64) -> Result<AutCheckResult, Failure> {
    check_automorphism(s, tol).map_err(|e| Failure::malformed(e.to_string()))
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::malformed(format!("stdin: {e}")))?;
    } else {
        text = fs::read_to_string(path)
            .map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn read_matrix(path: &Path) -> Result<DenseMatrix, Failure> {
    let text = read_input(path)?;
    parse_matrix(&text).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::malformed(format!("{}: {e}", path.display()))),
        None if out.quiet => Ok(()),
        None => write_stdout(text),
    }
}

fn write_stdout(text: &str) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Failure::malformed(format!("stdout: {e}")))
}
