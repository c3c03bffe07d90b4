//! Command line surface and the serialisable experiment description it
//! resolves to.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cnls_core::params::{Dim, Exponent, ModelParams};
use cnls_core::solvers::Branch;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "cnls",
    version,
    about = "Normalized ground states and dynamics for NLS with combined powers"
)]
pub struct Cli {
    /// Print the JSON result envelope instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the envelope (`.json`) or the command's table (`.csv`) here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Experiment config (full, or just the parameter object); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Best GN constant and soliton data for `(N, p)`.
    Gn {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: GnOpts,
    },
    /// Regime, threshold condition and radii.
    Criteria {
        #[command(flatten)]
        params: ParamsSpec,
    },
    /// Critical points of the fiber map of a triple.
    Fiber {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: FiberOpts,
    },
    /// Normalized solution on one branch; table is the profile `(r, u)`.
    GroundState {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: GroundStateOpts,
    },
    /// Mass of the positive solution along a `λ` grid.
    MassCurve {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: MassCurveOpts,
    },
    /// Time evolution; table is the observable trace.
    Evolve {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: EvolveOpts,
    },
    /// Predicted fate of a datum, optionally checked by evolution.
    Classify {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: ClassifyOpts,
    },
    /// Orbital stability of a ground state under random perturbations.
    Stability {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: StabilityOpts,
    },
    /// One parameter varied over a grid; one table row per value.
    Sweep {
        #[command(flatten)]
        params: ParamsSpec,
        #[command(flatten)]
        opts: SweepOpts,
    },
}

impl CliCommand {
    pub fn split(self) -> (ParamsSpec, Command) {
        match self {
            CliCommand::Gn { params, opts } => (params, Command::Gn(opts)),
            CliCommand::Criteria { params } => (params, Command::Criteria),
            CliCommand::Fiber { params, opts } => (params, Command::Fiber(opts)),
            CliCommand::GroundState { params, opts } => (params, Command::GroundState(opts)),
            CliCommand::MassCurve { params, opts } => (params, Command::MassCurve(opts)),
            CliCommand::Evolve { params, opts } => (params, Command::Evolve(opts)),
            CliCommand::Classify { params, opts } => (params, Command::Classify(opts)),
            CliCommand::Stability { params, opts } => (params, Command::Stability(opts)),
            CliCommand::Sweep { params, opts } => (params, Command::Sweep(opts)),
        }
    }
}

/// Exponents accept JSON numbers or strings such as `"10/3"`.
fn exponent_text<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(serde_json::Number),
        Str(String),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|r| match r {
        Raw::Num(n) => n.to_string(),
        Raw::Str(s) => s,
    }))
}

/// Possibly partial `(N, p, q, a, μ)`; the JSON field names follow the
/// parameter object `{"N", "p", "q", "a", "mu"}`.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
pub struct ParamsSpec {
    #[arg(long = "dim")]
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Leading exponent, e.g. `8` or `10/3`.
    #[arg(long)]
    #[serde(default, deserialize_with = "exponent_text", skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[arg(long)]
    #[serde(default, deserialize_with = "exponent_text", skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

impl ParamsSpec {
    /// Fields of `self`, falling back to `base`.
    pub fn over(self, base: &ParamsSpec) -> ParamsSpec {
        ParamsSpec {
            n: self.n.or(base.n),
            p: self.p.or_else(|| base.p.clone()),
            q: self.q.or_else(|| base.q.clone()),
            a: self.a.or(base.a),
            mu: self.mu.or(base.mu),
        }
    }

    fn missing(flag: &str) -> CliError {
        CliError::Usage(format!("missing parameter --{flag}"))
    }

    pub fn dim(&self) -> Result<Dim> {
        Ok(Dim::new(self.n.ok_or_else(|| Self::missing("dim"))?)?)
    }

    pub fn exponent(text: &str) -> Result<Exponent<f64>> {
        Ok(text.parse()?)
    }

    pub fn p(&self) -> Result<Exponent<f64>> {
        Self::exponent(self.p.as_deref().ok_or_else(|| Self::missing("p"))?)
    }

    pub fn model(&self) -> Result<ModelParams<f64>> {
        let q = Self::exponent(self.q.as_deref().ok_or_else(|| Self::missing("q"))?)?;
        let a = self.a.ok_or_else(|| Self::missing("a"))?;
        let mu = self.mu.ok_or_else(|| Self::missing("mu"))?;
        Ok(ModelParams::new(self.dim()?, self.p()?, q, a, mu)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GnOpts {
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FiberOpts {
    /// `|∇u|², |u|_q^q, |u|_p^p, |u|²`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub triple: Vec<f64>,
    /// Write the sampled curve `(s, psi, psi_prime)` here.
    #[arg(long)]
    pub plot_psi: Option<PathBuf>,
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
}

impl Default for FiberOpts {
    fn default() -> Self {
        FiberOpts {
            triple: Vec::new(),
            plot_psi: None,
            samples: 401,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchArg {
    #[value(name = "localmin", alias = "local-min")]
    LocalMin,
    #[value(name = "mountainpass", alias = "mountain-pass")]
    MountainPass,
    Unique,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::LocalMin => Branch::LocalMin,
            BranchArg::MountainPass => Branch::MountainPass,
            BranchArg::Unique => Branch::Unique,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GroundStateOpts {
    #[arg(long, value_enum)]
    pub branch: BranchArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MassCurveOpts {
    /// First `λ` (negative); the grid is logarithmic in `|λ|`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_to: f64,
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
}

/// Grid and time stepping shared by the dynamics commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOpts {
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub t_end: f64,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// Grid points (power of two in 1D).
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Half box length in 1D, outer radius otherwise.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Keep `dt` fixed instead of shrinking it as the gradient grows.
    #[arg(long)]
    pub fixed_step: bool,
}

impl Default for RunOpts {
    fn default() -> Self {
        RunOpts {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 10,
            grid_points: None,
            extent: None,
            fixed_step: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvolveOpts {
    /// `gaussian[:width]`, `sech[:width]`, `ground-state:<branch>[:s]`
    /// (dilated by `s`) or a CSV file with columns `x, re[, im]`.
    #[arg(long, default_value = "gaussian")]
    pub init: String,
    /// Write the trace `(t, mass2, energy, grad2, virial, pohozaev)` here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunOpts,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassifyOpts {
    #[arg(long, default_value = "gaussian")]
    pub init: String,
    /// Also evolve the datum and compare.
    #[arg(long)]
    #[serde(default)]
    pub verify: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunOpts,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StabilityOpts {
    /// Default: localmin in the mixed regime, unique otherwise.
    #[arg(long, value_enum)]
    #[serde(default)]
    pub branch: Option<BranchArg>,
    /// Perturbation size relative to the ground state's H¹ norm.
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Threshold condition, radii and blow-up bound per value.
    Criteria,
    /// Branch levels and norms along `μ → 0` or `q → p̄`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VaryArg {
    Mu,
    A,
    Q,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepOpts {
    #[arg(long, value_enum, default_value = "criteria")]
    pub kind: SweepKind,
    #[arg(long, value_enum)]
    pub vary: VaryArg,
    /// Range for criteria sweeps; `μ` and `a` are spaced logarithmically.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Even spacing for `μ` and `a` as well.
    #[arg(long)]
    #[serde(default)]
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "options", rename_all = "kebab-case")]
pub enum Command {
    Gn(GnOpts),
    Criteria,
    Fiber(FiberOpts),
    GroundState(GroundStateOpts),
    MassCurve(MassCurveOpts),
    Evolve(EvolveOpts),
    Classify(ClassifyOpts),
    Stability(StabilityOpts),
    Sweep(SweepOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gn(_) => "gn",
            Command::Criteria => "criteria",
            Command::Fiber(_) => "fiber",
            Command::GroundState(_) => "ground-state",
            Command::MassCurve(_) => "mass-curve",
            Command::Evolve(_) => "evolve",
            Command::Classify(_) => "classify",
            Command::Stability(_) => "stability",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    pub fn for_path(path: Option<PathBuf>) -> Self {
        let csv = path
            .as_deref()
            .and_then(Path::extension)
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        Output {
            path,
            format: if csv { Format::Csv } else { Format::Json },
        }
    }
}

/// Everything needed to rerun an experiment; echoed in every envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ParamsSpec,
    pub command: Command,
    pub output: Output,
    #[serde(default)]
    pub seed: u64,
}

/// Contents of a `--config` file.
enum ConfigFile {
    Full(ExperimentConfig),
    Params(ParamsSpec),
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("command").is_some() {
        Ok(ConfigFile::Full(serde_json::from_value(value)?))
    } else {
        Ok(ConfigFile::Params(serde_json::from_value(value)?))
    }
}

impl Cli {
    /// Merge flags over the config file.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let file = self.config.as_deref().map(read_config).transpose()?;
        let (base_params, base) = match file {
            Some(ConfigFile::Full(c)) => (c.params.clone(), Some(c)),
            Some(ConfigFile::Params(p)) => (p, None),
            None => (ParamsSpec::default(), None),
        };
        let (params, command) = match (self.command, &base) {
            (Some(c), _) => {
                let (p, c) = c.split();
                (p.over(&base_params), c)
            }
            (None, Some(b)) => (base_params, b.command.clone()),
            (None, None) => return Err(CliError::Usage("no subcommand given (see --help)".into())),
        };
        let out = self.out.or_else(|| base.as_ref().and_then(|b| b.output.path.clone()));
        let seed = self.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0);
        Ok(ExperimentConfig {
            params,
            command,
            output: Output::for_path(out),
            seed,
        })
    }
}
