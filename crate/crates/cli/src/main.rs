//! `grob`: robustness bounds for Gaussian states from the command line.
//!
//! Subcommands: `classify` a covariance matrix, `robustness` for one
//! parameterized state, `sweep` for CSV/JSON parameter scans, and
//! `verify-witness` for the brute-force Fock-space extremality check.
//! Exit codes: 0 success, 2 bad input, 3 unsupported request.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gauss_robustness::bounds::{robustness, Method, Resource, StateFamily};
use gauss_robustness::criteria::is_classical;
use gauss_robustness::fock::{
    max_product_mean, presqueeze_for_spec, presqueezed_witness_beta, witness_fock, MAX_FOCK_DIM,
};
use gauss_robustness::symplectic::{is_physical, CmFile, CovarianceMatrix};
use gauss_robustness::{GaussError, SymmetricSpec, TwoModeStandardForm};

#[derive(Parser)]
#[command(name = "grob", version, about = "Gaussian-state robustness bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Physicality, classicality, and separability of a CM file.
    Classify(ClassifyArgs),
    /// Robustness bounds for one state.
    Robustness(RobustnessArgs),
    /// Parameter sweep emitting one row of bounds per grid point.
    Sweep(SweepArgs),
    /// Brute-force witness extremality check in truncated Fock space.
    VerifyWitness(VerifyWitnessArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// CM JSON file: {"n": .., "ordering": "xxpp", "matrix": [[..]]}.
    #[arg(long)]
    cm: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResourceArg {
    Nonclassicality,
    Entanglement,
}

impl From<ResourceArg> for Resource {
    fn from(r: ResourceArg) -> Self {
        match r {
            ResourceArg::Nonclassicality => Resource::Nonclassicality,
            ResourceArg::Entanglement => Resource::Entanglement,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Analytic,
    Numeric,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Analytic => Method::Analytic,
            MethodArg::Numeric => Method::Numeric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    SingleMode,
    TwoModeStandard,
    Symmetric,
    Ghz,
}

#[derive(Args)]
struct FamilyParams {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
}

impl FamilyParams {
    fn build(&self) -> Result<StateFamily, GaussError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| GaussError::InvalidArgument(format!("missing --{name}")))
        };
        let family = self
            .family
            .ok_or_else(|| GaussError::InvalidArgument("missing --family".into()))?;
        match family {
            FamilyArg::SingleMode => Ok(StateFamily::SingleMode {
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
                c: self.c.unwrap_or(0.0),
            }),
            FamilyArg::TwoModeStandard => Ok(StateFamily::TwoModeStandard(TwoModeStandardForm {
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
                c1: need(self.c1, "c1")?,
                c2: need(self.c2, "c2")?,
            })),
            FamilyArg::Symmetric => Ok(StateFamily::Symmetric(SymmetricSpec {
                n: self
                    .n
                    .ok_or_else(|| GaussError::InvalidArgument("missing --n".into()))?,
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
                c1: need(self.c1, "c1")?,
                c2: need(self.c2, "c2")?,
            })),
            FamilyArg::Ghz => Ok(StateFamily::Ghz {
                n: self
                    .n
                    .ok_or_else(|| GaussError::InvalidArgument("missing --n".into()))?,
                r: need(self.r, "r")?,
                eta: self.eta,
            }),
        }
    }
}

#[derive(Args)]
struct RobustnessArgs {
    #[arg(long, value_enum)]
    resource: ResourceArg,
    #[command(flatten)]
    params: FamilyParams,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Baked-in Fig.-1-style sweep: a=2.4, b=2, c1 in {1.2..1.8}, c2 swept.
    /// fig1a is nonclassicality, fig1b entanglement.
    #[arg(long, conflicts_with_all = ["sweep", "range", "resource"])]
    preset: Option<String>,
    #[arg(long, value_enum)]
    resource: Option<ResourceArg>,
    #[command(flatten)]
    params: FamilyParams,
    /// Name of the swept parameter (family-dependent: a, b, c, c1, c2, r, eta).
    #[arg(long)]
    sweep: Option<String>,
    /// Grid as start:stop:step (inclusive of stop up to rounding).
    #[arg(long)]
    range: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct VerifyWitnessArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    cutoff: usize,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    c1: f64,
    #[arg(long)]
    c2: f64,
    /// Random starts for the alternating maximization (plus the vacuum).
    #[arg(long, default_value_t = 4)]
    starts: usize,
}

#[derive(Serialize)]
struct ClassifyReport {
    n: usize,
    physical: bool,
    min_eigenvalue: f64,
    classical: Option<bool>,
    classicality_margin: Option<f64>,
    separable: Option<bool>,
}

#[derive(Serialize)]
struct ResultRow {
    swept: f64,
    lower: f64,
    upper: f64,
    log_lower: f64,
    log_upper: f64,
    gap: f64,
    lower_method: String,
    upper_method: String,
    converged: bool,
}

#[derive(Serialize)]
struct WitnessReport {
    n: usize,
    cutoff: usize,
    y: f64,
    m0: f64,
    vacuum_overlap: f64,
    converged: bool,
    maximizer: String,
    wall_time_ms: u128,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Classify(args) => cmd_classify(&args),
        Command::Robustness(args) => cmd_robustness(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::VerifyWitness(args) => cmd_verify_witness(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                GaussError::Unsupported(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("GRES_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), GaussError> {
    let text = std::fs::read_to_string(&args.cm)
        .map_err(|e| GaussError::InvalidArgument(format!("cannot read {}: {e}", args.cm)))?;
    let file: CmFile = serde_json::from_str(&text)
        .map_err(|e| GaussError::InvalidArgument(format!("malformed CM JSON: {e}")))?;
    let cm = CovarianceMatrix::from_file_schema(&file)?;
    let phys = is_physical(&cm);
    let mut report = ClassifyReport {
        n: cm.n(),
        physical: phys.physical,
        min_eigenvalue: phys.min_eigenvalue,
        classical: None,
        classicality_margin: None,
        separable: None,
    };
    if phys.physical {
        let cl = is_classical(&cm)?;
        report.classical = Some(cl.classical);
        report.classicality_margin = Some(cl.margin);
        if cm.n() == 2 {
            report.separable = Some(gauss_robustness::fock::ppt_partial_transpose_check(&cm)?);
        }
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn cmd_robustness(args: &RobustnessArgs) -> Result<(), GaussError> {
    let family = args.params.build()?;
    let bounds = robustness(&family, args.resource.into(), args.method.into())?;
    println!("{}", serde_json::to_string_pretty(&bounds).unwrap());
    Ok(())
}

fn parse_range(spec: &str) -> Result<Vec<f64>, GaussError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(GaussError::InvalidArgument(
            "range must be start:stop:step".into(),
        ));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| GaussError::InvalidArgument(format!("bad number {p:?} in range")))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 {
        return Err(GaussError::InvalidArgument("range step must be > 0".into()));
    }
    let count = ((stop - start) / step + 1.5).floor() as i64;
    if count < 1 {
        return Err(GaussError::InvalidArgument("empty range".into()));
    }
    Ok((0..count)
        .map(|k| start + step * k as f64)
        .filter(|&v| v <= stop + 1e-12 * step)
        .collect())
}

/// (resource, family-with-substitution) pairs for one sweep.
fn sweep_points(
    args: &SweepArgs,
) -> Result<(Resource, Vec<(f64, StateFamily)>), GaussError> {
    if let Some(preset) = &args.preset {
        let resource = match preset.as_str() {
            "fig1a" => Resource::Nonclassicality,
            "fig1b" => Resource::Entanglement,
            other => {
                return Err(GaussError::InvalidArgument(format!(
                    "unknown preset {other:?}; expected fig1a or fig1b"
                )))
            }
        };
        let (a, b) = (2.4, 2.0);
        let mut points = Vec::new();
        for &c1 in &[1.8, 1.6, 1.4, 1.2] {
            for k in 1..=20 {
                let c2 = c1 * k as f64 / 20.0;
                let f = TwoModeStandardForm { a, b, c1, c2 };
                // Small c2 at large c1 violates the uncertainty relation;
                // keep only the physical part of the grid.
                if f.expand().map(|g| is_physical(&g).physical).unwrap_or(false) {
                    points.push((c2, StateFamily::TwoModeStandard(f)));
                }
            }
        }
        return Ok((resource, points));
    }
    let resource: Resource = args
        .resource
        .ok_or_else(|| GaussError::InvalidArgument("missing --resource".into()))?
        .into();
    let params = &args.params;
    let sweep = args
        .sweep
        .as_ref()
        .ok_or_else(|| GaussError::InvalidArgument("missing --sweep".into()))?;
    let range = args
        .range
        .as_ref()
        .ok_or_else(|| GaussError::InvalidArgument("missing --range".into()))?;
    let grid = parse_range(range)?;
    let points = grid
        .into_iter()
        .map(|v| substituted_family(params, sweep, v).map(|f| (v, f)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((resource, points))
}

fn substituted_family(
    params: &FamilyParams,
    sweep: &str,
    value: f64,
) -> Result<StateFamily, GaussError> {
    let mut family = params.build().or_else(|e| {
        // The swept parameter may be the missing one; retry with it filled.
        let mut filled = FamilyParams {
            family: params.family,
            a: params.a,
            b: params.b,
            c: params.c,
            c1: params.c1,
            c2: params.c2,
            n: params.n,
            r: params.r,
            eta: params.eta,
        };
        match sweep {
            "a" => filled.a = Some(value),
            "b" => filled.b = Some(value),
            "c" => filled.c = Some(value),
            "c1" => filled.c1 = Some(value),
            "c2" => filled.c2 = Some(value),
            "r" => filled.r = Some(value),
            _ => return Err(e),
        }
        filled.build()
    })?;
    let bad = || {
        GaussError::InvalidArgument(format!(
            "swept parameter {sweep:?} is not valid for this family"
        ))
    };
    match &mut family {
        StateFamily::SingleMode { a, b, c } => match sweep {
            "a" => *a = value,
            "b" => *b = value,
            "c" => *c = value,
            _ => return Err(bad()),
        },
        StateFamily::TwoModeStandard(f) => match sweep {
            "a" => f.a = value,
            "b" => f.b = value,
            "c1" => f.c1 = value,
            "c2" => f.c2 = value,
            _ => return Err(bad()),
        },
        StateFamily::Symmetric(s) => match sweep {
            "a" => s.a = value,
            "b" => s.b = value,
            "c1" => s.c1 = value,
            "c2" => s.c2 = value,
            _ => return Err(bad()),
        },
        StateFamily::Ghz { r, eta, .. } => match sweep {
            "r" => *r = value,
            "eta" => *eta = value,
            _ => return Err(bad()),
        },
    }
    Ok(family)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), GaussError> {
    use rayon::prelude::*;
    let (resource, points) = sweep_points(args)?;
    let rows: Vec<Result<ResultRow, GaussError>> = points
        .par_iter()
        .map(|(swept, family)| {
            let b = robustness(family, resource, Method::Auto)?;
            Ok(ResultRow {
                swept: *swept,
                lower: b.lower,
                upper: b.upper,
                log_lower: b.lower.ln(),
                log_upper: b.upper.ln(),
                gap: b.gap,
                lower_method: b.lower_method,
                upper_method: b.upper_method,
                converged: b.converged,
            })
        })
        .collect();
    let rows: Vec<ResultRow> = rows.into_iter().collect::<Result<_, _>>()?;
    let warnings = rows.iter().filter(|r| !r.converged).count();
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows).unwrap(),
        Format::Csv => {
            let mut out = String::from(
                "swept,lower,upper,log_lower,log_upper,gap,lower_method,upper_method,converged\n",
            );
            for r in &rows {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                    r.swept,
                    r.lower,
                    r.upper,
                    r.log_lower,
                    r.log_upper,
                    r.gap,
                    r.lower_method,
                    r.upper_method,
                    r.converged
                )
                .unwrap();
            }
            out
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| GaussError::InvalidArgument(format!("cannot write {path}: {e}")))?,
        None => print!("{text}"),
    }
    if warnings > 0 {
        eprintln!("warning: {warnings} grid point(s) did not converge");
    }
    Ok(())
}

fn cmd_verify_witness(args: &VerifyWitnessArgs) -> Result<(), GaussError> {
    let dim = (args.cutoff as u64).checked_pow(args.n as u32);
    if dim.is_none() || dim.unwrap() > MAX_FOCK_DIM as u64 {
        return Err(GaussError::Unsupported(format!(
            "Fock dimension {}^{} exceeds the {MAX_FOCK_DIM} guard; lower --cutoff",
            args.cutoff, args.n
        )));
    }
    let spec = SymmetricSpec {
        n: args.n,
        a: args.a,
        b: args.b,
        c1: args.c1,
        c2: args.c2,
    };
    let started = Instant::now();
    let y = presqueeze_for_spec(&spec)?;
    let beta = presqueezed_witness_beta(&spec, y)?;
    let w = witness_fock(&beta, args.cutoff)?;
    let r = max_product_mean(&w, args.starts)?;
    let m0 = r.value / w.elements[(0, 0)].re;
    let overlap = r.state.vacuum_overlap();
    let report = WitnessReport {
        n: args.n,
        cutoff: args.cutoff,
        y,
        m0,
        vacuum_overlap: overlap,
        converged: r.converged,
        maximizer: if overlap > 1.0 - 1e-6 {
            "vacuum".into()
        } else {
            "non-vacuum product state".into()
        },
        wall_time_ms: started.elapsed().as_millis(),
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}
