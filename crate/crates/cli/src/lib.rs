//! Command-line front end for `blochsep`.
//!
//! Exit codes: 0 separable, 1 entangled, 2 inconclusive, 64 bad input or
//! usage, 70 numerical failure, 74 output could not be written. With
//! several input files the largest code wins.

pub mod formats;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use blochsep::bipartite::{compose_state, decompose_state, normal_form};
use blochsep::criteria::{analyze_with, Status, Tolerances, Verdict};
use blochsep::decompose::{werner_decompose, Construction};
use blochsep::horn;
use blochsep::states::{self, WernerParams};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use thiserror::Error;

use formats::{emit_decomposition, FormatError, StateFile};

pub const EXIT_SEPARABLE: i32 = 0;
pub const EXIT_ENTANGLED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 64;
pub const EXIT_NUMERIC: i32 = 70;
pub const EXIT_OUTPUT: i32 = 74;

/// Environment variable that overrides the default decision tolerance.
pub const TOL_ENV: &str = "SEP_HORN_TOL";

#[derive(Debug, Parser)]
#[command(name = "blochsep", version, about = "Separability of bipartite states via Bloch correlation matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide separability of one or more state files.
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Decision tolerance (bound slack and PPT positivity); defaults to
        /// $SEP_HORN_TOL or 1e-9.
        #[arg(long)]
        tol: Option<f64>,
        /// Iteration budget for normal-form filtering.
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Seed for randomized constructions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReportKind::Text)]
        report: ReportKind,
        /// Number of files analyzed in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the Horn triple set T_r^n, one `r I:{..} J:{..} K:{..}` line
    /// per triple (n <= 16).
    HornTriples {
        n: usize,
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a Werner state file and optionally its separable decomposition.
    Werner {
        #[arg(value_name = "N")]
        n: usize,
        #[arg(allow_negative_numbers = true)]
        phi: f64,
        #[arg(long)]
        decompose: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// State file path; the decomposition goes next to it with the
        /// `.decomp` extension. Without it both are printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter a full-rank state to its normal form.
    NormalForm {
        path: PathBuf,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(#[from] blochsep::Error),
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Format { .. } | CliError::Usage(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Write { .. } => EXIT_OUTPUT,
        }
    }
}

pub fn status_code(s: Status) -> i32 {
    match s {
        Status::Separable => EXIT_SEPARABLE,
        Status::Entangled => EXIT_ENTANGLED,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.display().to_string(), source })
}

pub fn read_state(path: &Path) -> Result<StateFile, CliError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: display.clone(), source })?;
    StateFile::parse(&text).map_err(|source| CliError::Format { path: display, source })
}

/// Decision tolerance: explicit flag, then the environment, then the default.
pub fn resolve_tol(flag: Option<f64>) -> Result<Option<f64>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{TOL_ENV}={v:?} is not a non-negative number"))),
        Err(_) => Ok(None),
    }
}

/// Result of analyzing one file.
pub struct FileOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn decomposition_path(state: &Path) -> PathBuf {
    state.with_extension("decomp")
}

pub fn analyze_file(path: &Path, tol: &Tolerances, kind: ReportKind) -> FileOutcome {
    match analyze_file_inner(path, tol, kind) {
        Ok((code, stdout)) => FileOutcome { code, stdout, stderr: String::new() },
        Err(e) => FileOutcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn analyze_file_inner(path: &Path, tol: &Tolerances, kind: ReportKind) -> Result<(i32, String), CliError> {
    let file = read_state(path)?;
    let display = path.display().to_string();
    let (rho, n, m) = file.density().map_err(|source| CliError::Format { path: display.clone(), source })?;
    let verdict: Verdict = analyze_with(&rho, n, m, tol)?;
    let code = status_code(verdict.status);
    let mut written = None;
    if let Some(dec) = verdict.decomposition() {
        let target = decomposition_path(path);
        write_file(&target, &emit_decomposition(dec))?;
        written = Some(target.display().to_string());
    }
    let out = match kind {
        ReportKind::Text => report::text(&display, (n, m), &verdict, written.as_deref()),
        ReportKind::Structured => {
            let json = report::structured(&display, (n, m), &verdict, code, written);
            format!("{}\n", serde_json::to_string(&json).expect("report serializes"))
        }
    };
    Ok((code, out))
}

fn run_analyze(
    paths: &[PathBuf],
    tol: Option<f64>,
    max_iter: usize,
    seed: u64,
    kind: ReportKind,
    jobs: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut tolerances = Tolerances { max_iter, seed, ..Tolerances::default() };
    if let Some(t) = resolve_tol(tol)? {
        tolerances = tolerances.with_decision_tol(t);
    }
    let jobs = jobs.clamp(1, paths.len().max(1));
    let mut results: Vec<Option<FileOutcome>> = (0..paths.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = paths.len().div_ceil(jobs);
        let handles: Vec<_> = paths
            .chunks(chunk.max(1))
            .enumerate()
            .map(|(c, group)| {
                let tolerances = &tolerances;
                let h = scope.spawn(move || group.iter().map(|p| analyze_file(p, tolerances, kind)).collect::<Vec<_>>());
                (c * chunk.max(1), h)
            })
            .collect();
        for (start, h) in handles {
            for (k, r) in h.join().expect("analysis thread panicked").into_iter().enumerate() {
                results[start + k] = Some(r);
            }
        }
    });
    let mut code = 0;
    for r in results.into_iter().flatten() {
        let _ = out.write_all(r.stdout.as_bytes());
        let _ = err.write_all(r.stderr.as_bytes());
        code = code.max(r.code);
    }
    Ok(code)
}

fn run_horn(n: usize, r: usize, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let set = horn::triple_set(n, r).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = set.to_text();
    match path {
        Some(p) => write_file(p, &text)?,
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "stdout".into(), source })?,
    }
    Ok(0)
}

fn run_werner(
    n: usize,
    phi: f64,
    decompose: bool,
    seed: u64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("N must be at least 2, got {n}")));
    }
    let state = states::werner(&WernerParams { n, phi }).map_err(|e| match e {
        blochsep::Error::NotPsd(_) => CliError::Usage(format!("phi = {phi} is outside the positivity range [-1, 1]")),
        other => CliError::Numeric(other),
    })?;
    let json = StateFile::from_matrix(compose_state(&state).matrix(), n, n).to_json();
    let built = werner_decompose(n, phi, seed)?;
    let code = match &built {
        Construction::Separable(_) => EXIT_SEPARABLE,
        Construction::Entangled => EXIT_ENTANGLED,
        Construction::NotDecomposedHere => EXIT_INCONCLUSIVE,
    };
    let decomposition = match (&built, decompose) {
        (Construction::Separable(d), true) => Some(emit_decomposition(d)),
        _ => None,
    };
    let mut stdout = String::new();
    match path {
        Some(p) => {
            write_file(p, &format!("{json}\n"))?;
            if let Some(text) = &decomposition {
                let target = decomposition_path(p);
                write_file(&target, text)?;
                stdout.push_str(&format!("decomposition written to {}\n", target.display()));
            }
        }
        None => {
            stdout.push_str(&json);
            stdout.push('\n');
            if let Some(text) = &decomposition {
                stdout.push_str(text);
            }
        }
    }
    let label = match built {
        Construction::Separable(d) => format!("separable, {} components", d.len()),
        Construction::Entangled => "entangled".to_string(),
        Construction::NotDecomposedHere => "no construction".to_string(),
    };
    if path.is_some() {
        stdout.push_str(&format!("werner N={n} phi={phi}: {label}\n"));
    }
    out.write_all(stdout.as_bytes()).map_err(|source| CliError::Write { path: "stdout".into(), source })?;
    Ok(code)
}

fn bell_fidelities(rho: &blochsep::DensityMatrix) -> [(&'static str, f64); 4] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [
        ("phi+", rho.fidelity_with_pure(&[h, z, z, h])),
        ("phi-", rho.fidelity_with_pure(&[h, z, z, -h])),
        ("psi+", rho.fidelity_with_pure(&[z, h, h, z])),
        ("psi-", rho.fidelity_with_pure(&[z, h, -h, z])),
    ]
}

fn run_normal_form(path: &Path, max_iter: usize, target: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let file = read_state(path)?;
    let display = path.display().to_string();
    let (rho, n, m) = file.density().map_err(|source| CliError::Format { path: display.clone(), source })?;
    let d = decompose_state(&rho, n, m)?;
    let nf = normal_form(&d, max_iter, blochsep::bipartite::NORMAL_FORM_TOL)?;
    let filtered = compose_state(&nf.state);
    let mut text = format!(
        "{display}: {} after {} iterations\n  marginal norms |a| = {:.6e}, |b| = {:.6e}\n",
        if nf.converged { "converged" } else { "not converged" },
        nf.iterations,
        nf.state.a.norm(),
        nf.state.b.norm()
    );
    if (n, m) == (2, 2) {
        for (name, f) in bell_fidelities(&filtered) {
            text.push_str(&format!("  fidelity to {name}: {f:.12}\n"));
        }
    }
    if let Some(p) = target {
        write_file(p, &format!("{}\n", StateFile::from_matrix(filtered.matrix(), n, m).to_json()))?;
        text.push_str(&format!("  filtered state written to {}\n", p.display()));
    }
    out.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "stdout".into(), source })?;
    Ok(0)
}

/// Runs a parsed command, writing reports to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Analyze { paths, tol, max_iter, seed, report, jobs } => {
            run_analyze(&paths, tol, max_iter, seed, report, jobs, out, err)
        }
        Command::HornTriples { n, r, out: path } => run_horn(n, r, path.as_deref(), out),
        Command::Werner { n, phi, decompose, seed, out: path } => run_werner(n, phi, decompose, seed, path.as_deref(), out),
        Command::NormalForm { path, max_iter, out: target } => run_normal_form(&path, max_iter, target.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` and runs; usage errors map to exit code 64.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            code
        }
    }
}
