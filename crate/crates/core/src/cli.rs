//! Command-line front end. Machine-readable JSON goes to standard output (or
//! `--output`); human-readable diagnostics go to standard error.
//!
//! Exit codes: 0 success or similar, 1 not similar or check failed, 2 usage
//! or I/O error, 3 mathematical precondition violated.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::io::{
    parse_matrix, parse_result, serialize_decomposition, serialize_result, DecompositionDocument,
    ResultDocument, KIND_PAIR, KIND_UNITARY,
};
use crate::linalg::inverse;
use crate::numerics::{ComplexMatrix, ToleranceConfig};
use crate::oracles::{random_similarity, random_unitary};
use crate::pair::{canonicalize_pair, compare_pairs, is_g_canonical_pair, same_canonical_pair, CONDITION_WARNING};
use crate::unitary::{canonicalize_unitary, compare_canonical, decompose, is_g_canonical, same_canonical_form};

/// Environment variable holding default tolerances, e.g.
/// `tol_eig=1e-6,tol_zero=1e-12`. Command-line flags take precedence.
pub const TOLERANCE_ENV: &str = "CANONFORM_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "canonform",
    version,
    about = "Canonical forms under unitary similarity (nonderogatory matrices) and under similarity (pairs with distinct eigenvalues)"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Distance below which eigenvalues count as equal, relative to the
    /// max-abs entry
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    /// Merge radius for the computed eigenvalues of one Jordan block
    /// (unitary commands only), relative to the max-abs entry
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    /// Zero-test threshold, relative to the max-abs entry
    #[arg(long, global = true)]
    tol_zero: Option<f64>,
    /// Allowed backward error per dimension, relative to the max-abs entry
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// Run a randomized self-check: canonicalize a random conjugate of the
    /// input drawn with this seed and compare
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON result to this file instead of standard output
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Suppress diagnostics and verdict reports; only the exit code and
    /// canonical documents are produced
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unitary canonical form of a nonderogatory matrix, with its forest
    Canon { matrix: PathBuf },
    /// Canonical form of a pair (M, N) where M has distinct eigenvalues
    CanonPair { m: PathBuf, n: PathBuf },
    /// Exit 0 if the two matrices are unitarily similar, 1 if not
    Similar { a: PathBuf, b: PathBuf },
    /// Exit 0 if the pairs (M1, N1) and (M2, N2) are similar, 1 if not
    SimilarPair {
        m1: PathBuf,
        n1: PathBuf,
        m2: PathBuf,
        n2: PathBuf,
    },
    /// Split the unitary canonical form into indecomposable summands
    Decompose { matrix: PathBuf },
    /// Re-verify a stored canonical result; exit 0 if canonical, 1 if not
    Check { result: PathBuf },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_precondition() {
                EXIT_PRECONDITION
            } else {
                EXIT_USAGE
            },
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

/// Parses `key=value` pairs separated by commas into a tolerance profile.
pub fn parse_tolerance_profile(text: &str, base: ToleranceConfig) -> Result<ToleranceConfig, String> {
    let mut tol = base;
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found {item:?}"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("{key}: {value:?} is not a number"))?;
        match key.trim() {
            "tol_eig" => tol.tol_eig = value,
            "tol_cluster" => tol.tol_cluster = value,
            "tol_zero" => tol.tol_zero = value,
            "tol_residual" => tol.tol_residual = value,
            other => return Err(format!("unknown tolerance {other:?}")),
        }
    }
    Ok(tol)
}

struct Context {
    tol: ToleranceConfig,
    /// True when any tolerance came from a flag or the environment.
    tol_overridden: bool,
    seed: Option<u64>,
    output: Option<PathBuf>,
    quiet: bool,
}

impl Context {
    fn note(&self, message: &str) {
        if !self.quiet {
            eprintln!("canonform: {message}");
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.output {
            Some(path) => fs::write(path, text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn report<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        if self.quiet && self.output.is_none() {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.emit(&text)
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| Failure {
        message: format!("{}: {e}", path.display()),
        ..Failure::from(e)
    })
}

fn conjugate_by_unitary(m: &ComplexMatrix, seed: u64) -> ComplexMatrix {
    let u = random_unitary(m.rows(), seed);
    &(&u.adjoint() * m) * &u
}

fn canon(ctx: &Context, path: &Path) -> Result<i32, Failure> {
    let m = read_matrix(path)?;
    let r = canonicalize_unitary(&m, &ctx.tol)?;
    let mut doc = ResultDocument::from_unitary(&r, &ctx.tol);
    let mut code = EXIT_OK;
    if let Some(seed) = ctx.seed {
        let other = canonicalize_unitary(&conjugate_by_unitary(&m, seed), &ctx.tol)?;
        if !same_canonical_form(&r, &other, &ctx.tol) {
            let d = compare_canonical(&r, &other);
            let msg = format!(
                "self-check failed: random unitary conjugate (seed {seed}) gives a different canonical form (same structure: {}, max entry difference {:e})",
                d.same_structure, d.max_entry_diff
            );
            ctx.note(&msg);
            if let Some(diag) = doc.diagnostics.as_mut() {
                diag.warnings.push(msg);
            }
            code = EXIT_NEGATIVE;
        }
    }
    ctx.emit(&serialize_result(&doc))?;
    Ok(code)
}

fn canon_pair(ctx: &Context, m_path: &Path, n_path: &Path) -> Result<i32, Failure> {
    let (m, n) = (read_matrix(m_path)?, read_matrix(n_path)?);
    let r = canonicalize_pair(&m, &n, &ctx.tol)?;
    if r.condition > CONDITION_WARNING {
        ctx.note(&format!(
            "eigenvector matrix is ill-conditioned (estimate {:e}); canonical decisions may be unreliable",
            r.condition
        ));
    }
    let mut doc = ResultDocument::from_pair(&r, &ctx.tol);
    let mut code = EXIT_OK;
    if let Some(seed) = ctx.seed {
        let s = random_similarity(m.rows(), 1e3, seed);
        let si = inverse(&s)?;
        let other = canonicalize_pair(&(&(&si * &m) * &s), &(&(&si * &n) * &s), &ctx.tol)?;
        if !same_canonical_pair(&r, &other, &ctx.tol) {
            let d = compare_pairs(&r, &other);
            let msg = format!(
                "self-check failed: random similarity (seed {seed}) gives a different canonical form (same structure: {}, max entry difference {:e})",
                d.same_structure, d.max_entry_diff
            );
            ctx.note(&msg);
            if let Some(diag) = doc.diagnostics.as_mut() {
                diag.warnings.push(msg);
            }
            code = EXIT_NEGATIVE;
        }
    }
    ctx.emit(&serialize_result(&doc))?;
    Ok(code)
}

#[derive(Serialize)]
struct SimilarityReport {
    similar: bool,
    same_structure: bool,
    max_entry_diff: f64,
}

fn similar(ctx: &Context, a: &Path, b: &Path) -> Result<i32, Failure> {
    let ra = canonicalize_unitary(&read_matrix(a)?, &ctx.tol)?;
    let rb = canonicalize_unitary(&read_matrix(b)?, &ctx.tol)?;
    let d = compare_canonical(&ra, &rb);
    let similar = same_canonical_form(&ra, &rb, &ctx.tol);
    ctx.report(&SimilarityReport {
        similar,
        same_structure: d.same_structure,
        max_entry_diff: d.max_entry_diff,
    })?;
    Ok(if similar { EXIT_OK } else { EXIT_NEGATIVE })
}

fn similar_pair(ctx: &Context, paths: [&Path; 4]) -> Result<i32, Failure> {
    let [m1, n1, m2, n2] = paths.map(read_matrix);
    let ra = canonicalize_pair(&m1?, &n1?, &ctx.tol)?;
    let rb = canonicalize_pair(&m2?, &n2?, &ctx.tol)?;
    let d = compare_pairs(&ra, &rb);
    let similar = same_canonical_pair(&ra, &rb, &ctx.tol);
    ctx.report(&SimilarityReport {
        similar,
        same_structure: d.same_structure,
        max_entry_diff: d.max_entry_diff,
    })?;
    Ok(if similar { EXIT_OK } else { EXIT_NEGATIVE })
}

fn decompose_cmd(ctx: &Context, path: &Path) -> Result<i32, Failure> {
    let r = canonicalize_unitary(&read_matrix(path)?, &ctx.tol)?;
    let d = decompose(&r)?;
    ctx.emit(&serialize_decomposition(&DecompositionDocument::from_decomposition(&r, &d)))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckReport {
    kind: String,
    canonical: bool,
}

fn missing(name: &str) -> Failure {
    usage(format!("result document has no {name} matrix"))
}

fn check(ctx: &Context, path: &Path) -> Result<i32, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let doc = parse_result(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let tol = match (&doc.diagnostics, ctx.tol_overridden) {
        (Some(diag), false) => diag.tolerances(),
        _ => ctx.tol,
    };
    let invalid = |e: Error| usage(format!("{}: {e}", path.display()));
    let canonical = match doc.kind.as_str() {
        KIND_UNITARY => {
            let m = doc.matrices.m_can.as_ref().ok_or_else(|| missing("m_can"))?;
            let m = m.to_matrix().map_err(invalid)?;
            let partition = doc
                .partition
                .as_ref()
                .ok_or_else(|| usage("unitary result has no partition".into()))?
                .to_partition()
                .map_err(invalid)?;
            let g = doc.graph.to_forest().map_err(invalid)?;
            is_g_canonical(&m, &partition, &g, &tol)
        }
        KIND_PAIR => {
            let lambda = doc.matrices.lambda.as_ref().ok_or_else(|| missing("lambda"))?;
            let lambda = lambda.to_vector().map_err(invalid)?;
            let b = doc.matrices.b_can.as_ref().ok_or_else(|| missing("b_can"))?;
            let b = b.to_matrix().map_err(invalid)?;
            let g = doc.graph.to_diforest().map_err(invalid)?;
            is_g_canonical_pair(&lambda, &b, &g, &tol)
        }
        other => return Err(usage(format!("unknown result kind {other:?}"))),
    };
    ctx.report(&CheckReport {
        kind: doc.kind.clone(),
        canonical,
    })?;
    if !canonical {
        ctx.note("the stored matrix is not in canonical form for its graph");
    }
    Ok(if canonical { EXIT_OK } else { EXIT_NEGATIVE })
}

fn build_context(opts: GlobalOpts, env: Option<String>) -> Result<Context, Failure> {
    let mut tol = ToleranceConfig::default();
    let mut tol_overridden = false;
    if let Some(profile) = env {
        tol = parse_tolerance_profile(&profile, tol)
            .map_err(|e| usage(format!("{TOLERANCE_ENV}: {e}")))?;
        tol_overridden = true;
    }
    for (flag, slot) in [
        (opts.tol_eig, &mut tol.tol_eig),
        (opts.tol_cluster, &mut tol.tol_cluster),
        (opts.tol_zero, &mut tol.tol_zero),
        (opts.tol_residual, &mut tol.tol_residual),
    ] {
        if let Some(v) = flag {
            *slot = v;
            tol_overridden = true;
        }
    }
    tol.validate().map_err(|e| usage(e.to_string()))?;
    Ok(Context {
        tol,
        tol_overridden,
        seed: opts.seed,
        output: opts.output,
        quiet: opts.quiet,
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let ctx = match build_context(cli.opts, std::env::var(TOLERANCE_ENV).ok()) {
        Ok(ctx) => ctx,
        Err(f) => {
            eprintln!("canonform: {}", f.message);
            return f.code;
        }
    };
    let outcome = match &cli.command {
        Command::Canon { matrix } => canon(&ctx, matrix),
        Command::CanonPair { m, n } => canon_pair(&ctx, m, n),
        Command::Similar { a, b } => similar(&ctx, a, b),
        Command::SimilarPair { m1, n1, m2, n2 } => similar_pair(&ctx, [m1, n1, m2, n2]),
        Command::Decompose { matrix } => decompose_cmd(&ctx, matrix),
        Command::Check { result } => check(&ctx, result),
    };
    outcome.unwrap_or_else(|f| {
        eprintln!("canonform: {}", f.message);
        f.code
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_profile_parsing() {
        let t = parse_tolerance_profile("tol_eig=1e-6, tol_zero=1e-12", ToleranceConfig::default()).unwrap();
        assert_eq!(t.tol_eig, 1e-6);
        assert_eq!(t.tol_zero, 1e-12);
        assert_eq!(t.tol_residual, ToleranceConfig::default().tol_residual);
        assert!(parse_tolerance_profile("tol_eig", ToleranceConfig::default()).is_err());
        assert!(parse_tolerance_profile("tol_x=1", ToleranceConfig::default()).is_err());
        assert!(parse_tolerance_profile("tol_eig=abc", ToleranceConfig::default()).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["canonform"]), EXIT_USAGE);
        assert_eq!(run(["canonform", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["canonform", "canon", "/nonexistent/matrix.json"]), EXIT_USAGE);
        assert_eq!(
            run(["canonform", "--tol-zero=-1", "canon", "/nonexistent/matrix.json"]),
            EXIT_USAGE
        );
    }
}
