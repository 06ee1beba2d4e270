//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on I/O or runtime failure, 2 on usage errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::geometry::MinimalProblemKind;
use crate::matching::SolverVariant;
use crate::polynomials::{normalized_resultant, Polynomial, ResultantBackend};
use crate::sim::{corrupt, default_samples_max, default_schedule, run_experiment, CellResult, ExperimentConfig, SimError};
use crate::tensor::{affinity_from_resultant, edge_polynomials, edge_resultant, Correspondence, EdgeTuple, DEFAULT_RHO};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CSV_HEADER: [&str; 11] = [
    "problem",
    "solver",
    "sigma",
    "outliers",
    "baseline",
    "motions",
    "samples",
    "mean_accuracy",
    "std_accuracy",
    "instances",
    "seed",
];

#[derive(Debug, Parser)]
#[command(name = "geomatch", about = "Feature-free geometric matching with resultant affinities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    P3p,
    #[value(name = "3p1")]
    ThreePlusOne,
    Up2p,
}

impl From<Problem> for MinimalProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::P3p => Self::P3P,
            Problem::ThreePlusOne => Self::ThreePlusOne,
            Problem::Up2p => Self::Up2p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Sparse,
    Dense,
    Both,
}

impl SolverChoice {
    fn variants(self) -> Vec<SolverVariant> {
        match self {
            Self::Sparse => vec![SolverVariant::Sparse],
            Self::Dense => vec![SolverVariant::Dense],
            Self::Both => vec![SolverVariant::Sparse, SolverVariant::Dense],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Qr,
    Svd,
}

impl From<Backend> for ResultantBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Qr => Self::Qr,
            Backend::Svd => Self::Svd,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct InstanceArgs {
    #[arg(long, value_enum)]
    pub problem: Problem,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// 3P1 stereo baseline (world units).
    #[arg(long, default_value_t = 1.0)]
    pub baseline: f64,
    /// Number of rigid motions (up2p only).
    #[arg(long, default_value_t = 1)]
    pub motions: usize,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the accuracy-versus-samples experiment and write CSV.
    Run {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Noise levels in pixels, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        sigma: Vec<f64>,
        /// Outlier counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        outliers: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Largest sample size; defaults to 20000 (p3p, 3p1) or 5000 (up2p).
        #[arg(long)]
        samples_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = SolverChoice::Sparse)]
        solver: SolverChoice,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print one generated instance and a correct and an incorrect hyper-edge.
    Inspect {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        outliers: usize,
    },
    /// Resultant magnitude of two normalized polynomials.
    Resultant {
        /// Coefficients, highest degree first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        q: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Backend::Qr)]
        backend: Backend,
    },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) => Self::Usage(e.to_string()),
            other => Self::Io(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            instance,
            sigma,
            outliers,
            instances,
            samples_max,
            solver,
            threads,
            out,
        } => run_command(&instance, sigma, outliers, instances, samples_max, solver, threads, out, stdout),
        Command::Inspect {
            instance,
            sigma,
            outliers,
        } => inspect_command(&instance, sigma, outliers, stdout),
        Command::Resultant { p, q, backend } => resultant_command(&p, &q, backend.into(), stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_IO
        }
    }
}

fn base_config(args: &InstanceArgs) -> ExperimentConfig {
    let kind = MinimalProblemKind::from(args.problem);
    let mut cfg = ExperimentConfig::new(kind);
    cfg.n = args.n;
    cfg.baseline = args.baseline;
    cfg.motions = args.motions;
    cfg.rho = args.rho;
    cfg.seed = args.seed;
    cfg
}

#[allow(clippy::too_many_arguments)]
fn run_command(
    args: &InstanceArgs,
    sigmas: Vec<f64>,
    outliers: Vec<usize>,
    instances: usize,
    samples_max: Option<usize>,
    solver: SolverChoice,
    threads: Option<usize>,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut cfg = base_config(args);
    cfg.sigmas = sigmas;
    cfg.outliers = outliers;
    cfg.instances = instances;
    let max = samples_max.unwrap_or_else(|| default_samples_max(cfg.kind));
    if max == 0 {
        return Err(Failure::Usage("samples-max must be positive".into()));
    }
    cfg.schedule = default_schedule(max);
    cfg.solvers = solver.variants();
    cfg.threads = threads;
    cfg.validate()?;

    let cells = run_experiment(&cfg)?;
    match out {
        Some(path) => {
            let file = File::create(&path)
                .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))?;
            write_csv(file, &cfg, &cells)?;
        }
        None => write_csv(stdout, &cfg, &cells)?,
    }
    Ok(())
}

/// Writes one CSV row per (cell, sample size).
pub fn write_csv<W: Write>(writer: W, cfg: &ExperimentConfig, cells: &[CellResult]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for cell in cells {
        for row in &cell.curve.rows {
            w.write_record([
                cfg.kind.name().to_string(),
                cell.solver.name().to_string(),
                cell.sigma.to_string(),
                cell.outliers.to_string(),
                cfg.baseline.to_string(),
                cfg.motions.to_string(),
                row.samples.to_string(),
                row.mean_accuracy.to_string(),
                row.std_accuracy.to_string(),
                cfg.instances.to_string(),
                cfg.seed.to_string(),
            ])?;
        }
    }
    w.flush()
}

fn fmt_coeffs(p: &Polynomial) -> String {
    let parts: Vec<String> = p.coeffs().iter().map(|c| format!("{c:+.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn inspect_command(
    args: &InstanceArgs,
    sigma: f64,
    outliers: usize,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut cfg = base_config(args);
    cfg.sigmas = vec![sigma];
    cfg.outliers = vec![outliers];
    cfg.validate()?;
    let clean = cfg.instance(0)?;
    let mut rng = cfg.instance_rng(0, 1);
    let inst = corrupt(&clean, sigma, outliers, &mut rng);

    writeln!(out, "problem: {}  seed: {}  sigma: {sigma}  outliers: {outliers}", cfg.kind, cfg.seed)?;
    for (k, cam) in inst.cameras.iter().enumerate() {
        let i = &cam.intrinsics;
        writeln!(out, "camera {k}: f=({}, {}) c=({}, {})", i.fu, i.fv, i.cu, i.cv)?;
        writeln!(
            out,
            "  center: [{:.6}, {:.6}, {:.6}]",
            cam.center.x, cam.center.y, cam.center.z
        )?;
        for r in 0..3 {
            let row = cam.rotation.row(r);
            writeln!(out, "  R[{r}]: [{:+.6}, {:+.6}, {:+.6}]", row[0], row[1], row[2])?;
        }
    }
    writeln!(out, "3d points:")?;
    for (i, p) in inst.points3d.iter().enumerate() {
        writeln!(out, "  {i}: [{:.6}, {:.6}, {:.6}]", p.x, p.y, p.z)?;
    }
    for (k, list) in inst.observations.iter().enumerate() {
        writeln!(out, "image {k} points:")?;
        for (i, u) in list.iter().enumerate() {
            writeln!(out, "  {i}: [{:.4}, {:.4}]", u.x, u.y)?;
        }
    }
    writeln!(out, "ground truth (row -> column): {:?}", inst.ground_truth)?;
    if let Some(labels) = &inst.motion_labels {
        writeln!(out, "motion labels: {labels:?}")?;
    }

    let order = cfg.kind.edge_order();
    let correct: Vec<Correspondence> = (0..order)
        .map(|r| Correspondence::new(r, inst.ground_truth[r]))
        .collect();
    let mut wrong = correct.clone();
    wrong[order - 1].col = inst.ground_truth[order];
    for (label, items) in [("correct", correct), ("incorrect", wrong)] {
        let edge = EdgeTuple::new(&items);
        writeln!(out, "{label} hyper-edge: {:?}", items.iter().map(|c| (c.row, c.col)).collect::<Vec<_>>())?;
        match edge_polynomials(&inst, &edge) {
            Ok((p, q)) => {
                writeln!(out, "  q_S  = {}  |q_S| = {:.12}", fmt_coeffs(&p), p.norm())?;
                writeln!(out, "  q_S' = {}  |q_S'| = {:.12}", fmt_coeffs(&q), q.norm())?;
                let unit = (p.norm() - 1.0).abs() < 1e-12 && (q.norm() - 1.0).abs() < 1e-12;
                writeln!(out, "  unit-norm check: {}", if unit { "ok" } else { "FAILED" })?;
                match edge_resultant(&inst, &edge, ResultantBackend::Qr) {
                    Some(r) => writeln!(
                        out,
                        "  resultant: {r:.6e}  affinity: {:.6}",
                        affinity_from_resultant(r, cfg.rho)
                    )?,
                    None => writeln!(out, "  degenerate polynomial: affinity 0")?,
                }
            }
            Err(e) => writeln!(out, "  {e}: affinity 0")?,
        }
    }
    Ok(())
}

fn resultant_command(
    p: &[f64],
    q: &[f64],
    backend: ResultantBackend,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if p.len() != q.len() {
        return Err(Failure::Usage(format!(
            "--p and --q must have equal degree (got {} and {})",
            p.len().saturating_sub(1),
            q.len().saturating_sub(1)
        )));
    }
    let usage = |e: crate::polynomials::PolynomialError| Failure::Usage(e.to_string());
    let p = Polynomial::new(p.to_vec()).map_err(usage)?;
    let q = Polynomial::new(q.to_vec()).map_err(usage)?;
    let r = normalized_resultant(&p, &q, backend).map_err(usage)?;
    writeln!(out, "{r:e}")?;
    Ok(())
}
