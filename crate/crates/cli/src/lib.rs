//! Command implementations for the `ph-witness` binary.
//!
//! Single results go to stdout as JSON; sweeps write CSV to `--out` and print
//! a JSON summary. Failures map to exit codes 2 (parse), 3 (invariant) and
//! 4 (I/O).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ph_witness::optimize::{classify, maximize_i_ph, OptimizerConfig};
use ph_witness::sampler::{estimate_i_ph_with, sample_shots, DEFAULT_BOOTSTRAP_RESAMPLES};
use ph_witness::states::{self, MemsParams, WernerParams};
use ph_witness::sweep::{self, AlphaGrid, Ensemble, GridAxis, SweepRow, SweepSpec};
use ph_witness::unitaries::{Group, GroupParams, LocalUnitaryPair, Su2Params};
use ph_witness::witness::{joint_probabilities, WitnessReport};
use ph_witness::{BipartiteDims, DensityMatrix, Error};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Parse(_)) | CliError::Usage(_) => EXIT_PARSE,
            CliError::Core(Error::Io(_)) | CliError::Output(_) => EXIT_IO,
            CliError::Core(_) => EXIT_INVARIANT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ph-witness", version, about = "Quadratic Bell-type entanglement witness toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the witness at fixed local settings (no optimization).
    Eval(EvalArgs),
    /// Maximize the witness over local unitaries and classify the state.
    Maximize(MaximizeArgs),
    /// Sweep the Werner or MEMS family and write a CSV table.
    Sweep(SweepArgs),
    /// Compare the witness sign with the partial-transpose criterion on a
    /// random ensemble.
    Audit(AuditArgs),
    /// Simulate a finite-shot experiment and estimate the witness.
    Sample(SampleArgs),
    /// Write a density-matrix JSON file.
    MakeState(MakeStateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Optimizer config JSON; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl OptimizerArgs {
    pub fn resolve(&self) -> CliResult<OptimizerConfig> {
        let mut cfg = match &self.config {
            Some(path) => OptimizerConfig::read_json(path)?,
            None => OptimizerConfig::default(),
        };
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// SU(2) Euler angles `phi,theta,psi` for subsystem A.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Angles for subsystem B: 3 (SU(2)) or 8 (SU(3)) comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
}

#[derive(Debug, Args)]
pub struct MaximizeArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[command(flatten)]
    pub opt: OptimizerArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Werner,
    Mems,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// `start:end`, `start:end:steps` or a single value.
    #[arg(long, default_value = "0:3.141592653589793")]
    pub theta_range: String,
    /// As `--theta-range`, or `boundary` for α = 1/(1 + 2|sin 2θ|).
    #[arg(long, default_value = "0:1")]
    pub alpha_range: String,
    #[arg(long, default_value = "0:1")]
    pub gamma_range: String,
    /// Points per swept axis unless the range gives its own count.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opt: OptimizerArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditKind {
    Random,
    Separable,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// `2x2` or `2x3`.
    #[arg(long, default_value = "2x2")]
    pub dims: String,
    #[arg(long, default_value_t = 100)]
    pub n_states: usize,
    #[arg(long, value_enum, default_value_t = AuditKind::Random)]
    pub kind: AuditKind,
    /// Separable mixtures cycle through 1..=terms product terms.
    #[arg(long, default_value_t = 6)]
    pub terms: usize,
    /// Also write the full report (all records) to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub opt: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Use the optimizer's best settings instead of `--u/--v`.
    #[arg(long, conflicts_with_all = ["u", "v"])]
    pub optimize: bool,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the counts as CSV (`i,j,count`, 1-based).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_RESAMPLES)]
    pub resamples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Werner,
    Mems,
    Bell,
    Mixed,
    Random,
    Separable,
}

#[derive(Debug, Args)]
pub struct MakeStateArgs {
    #[arg(long, value_enum)]
    pub kind: StateKind,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value = "2x2")]
    pub dims: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub terms: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `2x2` / `2x3`.
pub fn parse_dims(s: &str) -> CliResult<BipartiteDims> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::Usage(format!("dims must look like 2x3, got {s:?}")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("bad dimension {t:?}")))
    };
    Ok(BipartiteDims::new(parse(a)?, parse(b)?)?)
}

fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            f64::from_str(t.trim()).map_err(|_| CliError::Usage(format!("not a number: {t:?}")))
        })
        .collect()
}

/// Builds the local settings from optional angle lists; absent lists mean
/// the identity.
pub fn parse_settings(dims: BipartiteDims, u: Option<&str>, v: Option<&str>) -> CliResult<LocalUnitaryPair> {
    let mut pair = LocalUnitaryPair::identity(dims);
    if let Some(u) = u {
        let x = parse_floats(u)?;
        if x.len() != 3 {
            return Err(CliError::Usage(format!("--u needs 3 angles, got {}", x.len())));
        }
        pair.u = Su2Params::new(x[0], x[1], x[2]);
    }
    if let Some(v) = v {
        let x = parse_floats(v)?;
        let group = Group::for_dim(dims.dim_b())?;
        if x.len() != group.param_count() {
            return Err(CliError::Usage(format!(
                "--v needs {} angles for this state, got {}",
                group.param_count(),
                x.len()
            )));
        }
        pair.v = GroupParams::from_slice(group, &x)?;
    }
    Ok(pair)
}

/// Parses a range argument into a grid axis.
pub fn parse_axis(s: &str, default_steps: usize) -> CliResult<GridAxis> {
    let parts = parse_floats(&s.replace(':', ","))?;
    let axis = match parts.as_slice() {
        [x] => GridAxis::point(*x),
        [a, b] => GridAxis::new(*a, *b, default_steps)?,
        [a, b, n] if *n >= 0.0 && n.fract() == 0.0 => GridAxis::new(*a, *b, *n as usize)?,
        _ => return Err(CliError::Usage(format!("range must be start:end[:steps], got {s:?}"))),
    };
    Ok(axis)
}

fn print_json<T: Serialize, W: Write>(value: &T, out: &mut W) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::other)?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Core(Error::Io(e)))
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub family: &'static str,
    pub rows: usize,
    pub out: PathBuf,
    pub max_abs_diff: f64,
    /// Grid points where the numeric maximum exceeds the closed form by
    /// more than 1e-3.
    pub formula_exceedances: Vec<SweepRow>,
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> CliResult<()> {
    match cli.command {
        Command::Eval(a) => {
            let rho = DensityMatrix::read_json(&a.state)?;
            let pair = parse_settings(rho.dims(), a.u.as_deref(), a.v.as_deref())?;
            print_json(&WitnessReport::at_settings(&rho, &pair)?, out)
        }
        Command::Maximize(a) => {
            let rho = DensityMatrix::read_json(&a.state)?;
            let cfg = a.opt.resolve()?;
            print_json(&classify(&rho, &cfg).report, out)
        }
        Command::Sweep(a) => {
            let cfg = a.opt.resolve()?;
            let spec = match a.family {
                Family::Werner => SweepSpec::Werner {
                    theta: parse_axis(&a.theta_range, a.steps)?,
                    alpha: if a.alpha_range.trim().eq_ignore_ascii_case("boundary") {
                        AlphaGrid::Boundary
                    } else {
                        AlphaGrid::Axis(parse_axis(&a.alpha_range, a.steps)?)
                    },
                },
                Family::Mems => SweepSpec::Mems {
                    gamma: parse_axis(&a.gamma_range, a.steps)?,
                },
            };
            let rows = sweep::run_sweep(&spec, &cfg)?;
            let mut file = create(&a.out)?;
            sweep::write_sweep_csv(&rows, &mut file)?;
            file.flush().map_err(|e| CliError::Core(Error::Io(e)))?;
            let summary = SweepSummary {
                family: match a.family {
                    Family::Werner => "werner",
                    Family::Mems => "mems",
                },
                rows: rows.len(),
                out: a.out,
                max_abs_diff: rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max),
                formula_exceedances: rows.iter().filter(|r| r.exceeds_formula()).cloned().collect(),
            };
            print_json(&summary, out)
        }
        Command::Audit(a) => {
            let dims = parse_dims(&a.dims)?;
            let cfg = a.opt.resolve()?;
            let ensemble = match a.kind {
                AuditKind::Random => Ensemble::Random,
                AuditKind::Separable => Ensemble::Separable { max_terms: a.terms },
            };
            let report = sweep::run_audit(dims, ensemble, a.n_states, cfg.seed, &cfg)?;
            if let Some(path) = &a.out {
                let mut file = create(path)?;
                print_json(&report, &mut file)?;
            }
            print_json(&report.summary, out)
        }
        Command::Sample(a) => {
            let rho = DensityMatrix::read_json(&a.state)?;
            let pair = if a.optimize {
                let cfg = OptimizerConfig::default().with_seed(a.seed);
                maximize_i_ph(&rho, &cfg).best_settings(rho.dims())
            } else {
                parse_settings(rho.dims(), a.u.as_deref(), a.v.as_deref())?
            };
            let (u, v) = pair.matrices();
            let table = joint_probabilities(&rho, &u, &v)?;
            let record = sample_shots(&table, a.shots, a.seed)?;
            if let Some(path) = &a.out {
                let mut file = create(path)?;
                record.write_csv(&mut file)?;
            }
            print_json(&estimate_i_ph_with(&record, a.resamples, a.seed)?, out)
        }
        Command::MakeState(a) => {
            let rho = match a.kind {
                StateKind::Werner => states::werner(WernerParams::new(a.theta, a.alpha)?)?,
                StateKind::Mems => states::mems(MemsParams::new(a.gamma)?)?,
                StateKind::Bell => DensityMatrix::bell_phi_plus(),
                StateKind::Mixed => DensityMatrix::maximally_mixed(parse_dims(&a.dims)?),
                StateKind::Random => states::random_state(parse_dims(&a.dims)?, a.seed),
                StateKind::Separable => states::random_separable(parse_dims(&a.dims)?, a.terms, a.seed)?,
            };
            rho.write_json(&a.out)?;
            #[derive(Serialize)]
            struct Written<'a> {
                out: &'a Path,
                dims: BipartiteDims,
            }
            print_json(&Written { out: &a.out, dims: rho.dims() }, out)
        }
    }
}
