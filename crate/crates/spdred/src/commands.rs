//! Subcommand implementations. Each returns an [`Outcome`] or a [`CliError`];
//! `main` maps them to exit codes 0, 2 and 1.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spdred_core::baselines::{
    balanced_truncation, bt_initial_point, bt_stiefel_basis, compare_methods, qr_orthonormalize,
    reduce_trust_region, reduce_trust_region_gradient, stiefel_descent, summarize, CompareOptions,
    Method, ReductionReport, StiefelConfig, GRADIENT_SYSTEM_TOLERANCE,
};
use spdred_core::lti::LtiSystem;
use spdred_core::manifold::ProductPoint;
use spdred_core::matlib::spd_eig;
use spdred_core::objective::{stiefel_point, ORTHONORMALITY_TOLERANCE};
use spdred_core::optimizer::{Termination, TrustRegionConfig};
use spdred_core::Matrix;

use crate::generate::random_system_file;
use crate::io::{write_trace, InitData, InitFile, IoError, ReportFile, SystemFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),

    #[error(transparent)]
    Core(#[from] spdred_core::Error),

    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    /// Iteration cap, radius collapse or a stalled line search; results were still written.
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Converged => 0,
            Outcome::NotConverged => 2,
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        1
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_name(s)
        .ok_or_else(|| format!("unknown method {s:?} (expected tr, tr-gradient, bt or stiefel)"))
}

/// Where an iterative method starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitChoice {
    /// Balanced truncation: its basis for Stiefel, its `A_r` projected onto SPD for the trust region.
    Bt,
    /// The Stiefel descent result (trust-region methods only).
    Stiefel,
    /// A seeded random orthonormal basis.
    Random,
    /// A JSON file with `U` or `A_r`, `B_r`, `C_r`.
    File(PathBuf),
}

impl FromStr for InitChoice {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "bt" => InitChoice::Bt,
            "stiefel" => InitChoice::Stiefel,
            "random" => InitChoice::Random,
            path => InitChoice::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReduceArgs {
    /// System file (JSON with "A", "B", "C").
    #[arg(long)]
    pub input: PathBuf,
    /// Reduced order, 1 <= r < n.
    #[arg(long)]
    pub r: usize,
    /// tr, tr-gradient, bt or stiefel.
    #[arg(long, value_parser = parse_method, default_value = "tr")]
    pub method: Method,
    /// bt, stiefel, random or a JSON file. Defaults to bt.
    #[arg(long)]
    pub init: Option<InitChoice>,
    /// Seed for `--init random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gradient-norm tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Report file (JSON).
    #[arg(long)]
    pub output: PathBuf,
    /// Per-iteration trace (CSV, trust-region methods).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated reduced orders.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<usize>,
    /// Table of relative H2 errors (CSV).
    #[arg(long)]
    pub output: PathBuf,
    /// Start the Stiefel method from a seeded random basis instead of the
    /// balanced-truncation basis.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Ignored with --gradient.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long)]
    pub seed: u64,
    /// Emit a gradient system (C = B^T).
    #[arg(long)]
    pub gradient: bool,
    #[arg(long)]
    pub output: PathBuf,
}

fn load(path: &std::path::Path) -> Result<LtiSystem, CliError> {
    Ok(SystemFile::read(path)?.to_system()?)
}

fn check_order(n: usize, r: usize) -> Result<(), CliError> {
    if r == 0 {
        return Err(CliError::Usage("r must be positive".into()));
    }
    if r >= n {
        return Err(CliError::Usage(format!(
            "r must be less than n (got r = {r}, n = {n})"
        )));
    }
    Ok(())
}

/// `n×r` basis with orthonormal columns from a ChaCha8 stream.
pub fn random_basis(n: usize, r: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * r).map(|_| rng.sample(StandardNormal)).collect();
    qr_orthonormalize(&Matrix::from_row_slice(n, r, &data))
}

fn file_basis(full: &LtiSystem, r: usize, u: Matrix) -> Result<Matrix, CliError> {
    if u.shape() != (full.n(), r) {
        return Err(CliError::Usage(format!(
            "init basis U must be {}x{r}, got {}x{}",
            full.n(),
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = (u.transpose() * &u - Matrix::identity(r, r)).norm();
    if defect > ORTHONORMALITY_TOLERANCE {
        eprintln!("warning: init basis is not orthonormal (defect {defect:.3e}); orthonormalizing");
        return Ok(qr_orthonormalize(&u));
    }
    Ok(u)
}

fn initial_basis(
    full: &LtiSystem,
    r: usize,
    init: &Option<InitChoice>,
    seed: u64,
) -> Result<Matrix, CliError> {
    match init {
        None | Some(InitChoice::Bt) => Ok(bt_stiefel_basis(full, r)?),
        Some(InitChoice::Random) => Ok(random_basis(full.n(), r, seed)),
        Some(InitChoice::Stiefel) => Err(CliError::Usage(
            "--init stiefel needs a trust-region method".into(),
        )),
        Some(InitChoice::File(path)) => match InitFile::read(path)?.data()? {
            InitData::Basis(u) => file_basis(full, r, u),
            InitData::Triple { .. } => Err(CliError::Usage(
                "the stiefel method needs an init file with a basis \"U\"".into(),
            )),
        },
    }
}

fn initial_point(
    full: &LtiSystem,
    r: usize,
    init: &Option<InitChoice>,
    seed: u64,
    stiefel: &StiefelConfig,
) -> Result<ProductPoint, CliError> {
    match init {
        None | Some(InitChoice::Bt) => Ok(bt_initial_point(full, r)?),
        Some(InitChoice::Stiefel) => {
            let res = stiefel_descent(full, &bt_stiefel_basis(full, r)?, stiefel)?;
            Ok(res.point(full)?)
        }
        Some(InitChoice::Random) => Ok(stiefel_point(full, &random_basis(full.n(), r, seed))?),
        Some(InitChoice::File(path)) => match InitFile::read(path)?.data()? {
            InitData::Basis(u) => Ok(stiefel_point(full, &file_basis(full, r, u)?)?),
            InitData::Triple { a_r, b_r, c_r } => {
                let c_shape = c_r.as_ref().map_or((full.p(), r), Matrix::shape);
                if a_r.shape() != (r, r) || b_r.shape() != (r, full.m()) || c_shape != (full.p(), r)
                {
                    return Err(CliError::Usage(format!(
                        "init triple must have shapes A_r {r}x{r}, B_r {r}x{}, C_r {}x{r}",
                        full.m(),
                        full.p()
                    )));
                }
                Ok(match c_r {
                    Some(c_r) => ProductPoint::new(a_r, b_r, c_r)?,
                    None => ProductPoint::new_gradient(a_r, b_r)?,
                })
            }
        },
    }
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max_iterations",
        Termination::RadiusCollapse => "radius_collapse",
    }
}

pub fn run_reduce(args: &ReduceArgs) -> Result<Outcome, CliError> {
    let full = load(&args.input)?;
    let r = args.r;
    check_order(full.n(), r)?;
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {tol}"
            )));
        }
    }
    let mut stiefel = StiefelConfig::default();
    if let Some(tol) = args.tol {
        stiefel.grad_tol = tol;
    }
    if let Some(iters) = args.max_iters {
        stiefel.max_iters = iters;
    }

    let start = Instant::now();
    let (mut report, termination, history) = match args.method {
        Method::BalancedTruncation => {
            if args.init.is_some() {
                eprintln!("warning: --init is ignored by bt");
            }
            let bt = balanced_truncation(&full, r)?;
            if let Some(w) = &bt.warning {
                eprintln!("warning: {w}");
            }
            (
                ReductionReport::from_model(&full, Method::BalancedTruncation, bt.model)?,
                None,
                None,
            )
        }
        Method::Stiefel => {
            let u0 = initial_basis(&full, r, &args.init, args.seed)?;
            let res = stiefel_descent(&full, &u0, &stiefel)?;
            let term = if res.converged {
                "converged"
            } else if res.stalled {
                "stalled"
            } else {
                "max_iterations"
            };
            (res.report(&full)?, Some(term), None)
        }
        Method::TrustRegion | Method::TrustRegionGradient => {
            let gradient = args.method == Method::TrustRegionGradient;
            if gradient && full.as_gradient_system(GRADIENT_SYSTEM_TOLERANCE).is_none() {
                return Err(CliError::Usage(
                    "tr-gradient requires a gradient-system input (C = B^T)".into(),
                ));
            }
            let init = initial_point(&full, r, &args.init, args.seed, &stiefel)?;
            let cfg = TrustRegionConfig {
                grad_tol: args.tol,
                max_outer_iters: args
                    .max_iters
                    .unwrap_or(TrustRegionConfig::default().max_outer_iters),
                ..TrustRegionConfig::default()
            };
            let (report, state) = if gradient {
                reduce_trust_region_gradient(&full, init, &cfg)?
            } else {
                reduce_trust_region(&full, init, &cfg)?
            };
            (
                report,
                Some(termination_name(state.termination)),
                Some(state.history),
            )
        }
    };
    report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);

    ReportFile::from_report(&report, termination).write(&args.output)?;
    if let Some(path) = &args.trace {
        match &history {
            Some(records) => write_trace(path, records)?,
            None => eprintln!("warning: --trace is only written by trust-region methods"),
        }
    }
    println!("{}", summarize(&report));
    if let Some(t) = termination.filter(|&t| t != "converged") {
        eprintln!("warning: stopped without converging ({t})");
    }
    Ok(if report.converged.unwrap_or(true) {
        Outcome::Converged
    } else {
        Outcome::NotConverged
    })
}

/// Column order of the comparison table.
pub fn compare_columns(full: &LtiSystem) -> Vec<Method> {
    let mut cols = vec![
        Method::BalancedTruncation,
        Method::Stiefel,
        Method::TrustRegion,
    ];
    if full.as_gradient_system(GRADIENT_SYSTEM_TOLERANCE).is_some() {
        cols.push(Method::TrustRegionGradient);
    }
    cols
}

pub fn run_compare(args: &CompareArgs) -> Result<Outcome, CliError> {
    let full = load(&args.input)?;
    for &r in &args.r {
        check_order(full.n(), r)?;
    }
    let columns = compare_columns(&full);
    let results: Vec<Result<Vec<ReductionReport>, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .r
            .iter()
            .map(|&r| {
                let full = &full;
                s.spawn(move || {
                    let opts = CompareOptions {
                        stiefel_init: args.seed.map(|seed| random_basis(full.n(), r, seed)),
                        ..CompareOptions::default()
                    };
                    let clock = Instant::now();
                    let elapsed = move || clock.elapsed().as_secs_f64() * 1e3;
                    Ok(compare_methods(full, r, &opts, Some(&elapsed))?)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("comparison thread panicked"))
            .collect()
    });

    let mut w = csv::Writer::from_path(&args.output).map_err(IoError::from)?;
    let mut header = vec!["r".to_owned()];
    header.extend(columns.iter().map(|m| m.name().to_owned()));
    w.write_record(&header).map_err(IoError::from)?;
    for (&r, reports) in args.r.iter().zip(results) {
        let reports = reports?;
        let mut row = vec![r.to_string()];
        for method in &columns {
            let rep = reports
                .iter()
                .find(|rep| rep.method == *method)
                .expect("every column is computed");
            if rep.converged == Some(false) {
                eprintln!("warning: {} did not converge at r = {r}", method.name());
            }
            row.push(format!("{:e}", rep.relative_h2_error));
        }
        w.write_record(&row).map_err(IoError::from)?;
        println!("r = {r}");
        for rep in &reports {
            println!("  {}", summarize(rep));
        }
    }
    w.flush().map_err(|source| IoError::Write {
        path: args.output.clone(),
        source,
    })?;
    Ok(Outcome::Converged)
}

/// Human-readable description of a system, as printed by `validate`.
pub fn describe(full: &LtiSystem) -> Result<String, CliError> {
    let eig = spd_eig("A", full.a())?;
    let mut out = String::new();
    let _ = writeln!(out, "n = {}, m = {}, p = {}", full.n(), full.m(), full.p());
    let _ = writeln!(
        out,
        "SPD: yes (λ_min={:.6e}, λ_max={:.6e})",
        eig.min(),
        eig.max()
    );
    let _ = writeln!(
        out,
        "stable: yes (poles of -A lie in [{:.6e}, {:.6e}])",
        -eig.max(),
        -eig.min()
    );
    let _ = writeln!(out, "H2 norm: {:.6e}", full.h2_norm());
    match full.gradient_defect() {
        None => {
            let _ = writeln!(out, "gradient system: no (C and B^T differ in shape)");
        }
        Some(defect) => {
            let verdict = if full.as_gradient_system(GRADIENT_SYSTEM_TOLERANCE).is_some() {
                "yes"
            } else {
                "no"
            };
            let _ = writeln!(out, "gradient system: {verdict} (‖C - B^T‖_F={defect:.3e})");
        }
    }
    Ok(out)
}

pub fn run_validate(args: &ValidateArgs) -> Result<Outcome, CliError> {
    let full = load(&args.input)?;
    print!("{}", describe(&full)?);
    Ok(Outcome::Converged)
}

pub fn run_gen(args: &GenArgs) -> Result<Outcome, CliError> {
    if args.n == 0 || args.m == 0 || (!args.gradient && args.p == 0) {
        return Err(CliError::Usage("n, m and p must be positive".into()));
    }
    random_system_file(args.n, args.m, args.p, args.seed, args.gradient)?.write(&args.output)?;
    Ok(Outcome::Converged)
}
