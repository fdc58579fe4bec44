//! Run configuration: a JSON file overlaid by command-line flags.
//!
//! Config keys are the flag names, so each subcommand's `--help` doubles as
//! the list of keys its section accepts.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thermorisk_core::pathrisk::Payoff;

use crate::error::{CliError, Result};

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TiltArgs {
    /// Loss sample CSV with header `loss,prob`
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// Lagrange multiplier
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepArgs {
    /// Loss sample CSV with header `loss,prob`
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// First multiplier of the grid [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_min: Option<f64>,
    /// Last multiplier of the grid
    #[arg(long, allow_hyphen_values = true)]
    pub theta_max: Option<f64>,
    /// Number of equally spaced grid points [default: 101]
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct QuasistaticArgs {
    /// Loss sample CSV with header `loss,prob`
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// End of the multiplier grid, which starts at 0
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Number of grid points [default: 10000]
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct IdealGasArgs {
    /// Dimension n of the power-law density ℓ^{n/2−1}
    #[arg(long)]
    pub dimension: Option<u32>,
    /// Upper end of the loss spectrum [default: 1]
    #[arg(long)]
    pub l_max: Option<f64>,
    /// Gauss–Legendre nodes per grid point [default: 4096]
    #[arg(long)]
    pub quadrature_points: Option<usize>,
    /// Smallest |θ| of the negative multiplier grid [default: 30]
    #[arg(long)]
    pub abs_theta_min: Option<f64>,
    /// Largest |θ| of the negative multiplier grid [default: 3000]
    #[arg(long)]
    pub abs_theta_max: Option<f64>,
    /// Number of log-spaced grid points [default: 60]
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ThermalizeArgs {
    /// Nonnegative loss sample CSV with header `loss,prob`
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// Target total risk V, fixing the total energy −V
    #[arg(long)]
    pub v_target: Option<f64>,
    /// Number of rungs on the energy ladder [default: 50]
    #[arg(long)]
    pub levels: Option<usize>,
    /// Step size in (0, 1] [default: 0.1]
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Iteration cap [default: 20000000]
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// Relative change of the mean particle energy per 1000 steps that
    /// counts as settled [default: 1e-7]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Trace CSV path [default: next to --out with a `.trace.csv` suffix]
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Terminal payoff as written in config files.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PayoffSpec {
    Zero,
    Linear { slope: f64, intercept: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64 },
    Call { strike: f64 },
    Put { strike: f64 },
    Table { xs: Vec<f64>, values: Vec<f64> },
}

impl FromStr for PayoffSpec {
    type Err = String;

    /// JSON (`{"kind":"call","strike":0.1}`) or `kind[:a,b,...]` shorthand.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim_start().starts_with('{') {
            return serde_json::from_str(s).map_err(|e| e.to_string());
        }
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = rest
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        match (kind, nums.as_slice()) {
            ("zero", []) => Ok(PayoffSpec::Zero),
            ("linear", &[slope, intercept]) => Ok(PayoffSpec::Linear { slope, intercept }),
            ("gaussian", &[amplitude, center, width]) => Ok(PayoffSpec::Gaussian { amplitude, center, width }),
            ("call", &[strike]) => Ok(PayoffSpec::Call { strike }),
            ("put", &[strike]) => Ok(PayoffSpec::Put { strike }),
            _ => Err(format!(
                "unknown payoff {s:?}; use zero, linear:SLOPE,INTERCEPT, gaussian:AMP,CENTER,WIDTH, call:K, put:K or JSON"
            )),
        }
    }
}

impl From<PayoffSpec> for Payoff {
    fn from(p: PayoffSpec) -> Self {
        match p {
            PayoffSpec::Zero => Payoff::Zero,
            PayoffSpec::Linear { slope, intercept } => Payoff::Linear { slope, intercept },
            PayoffSpec::Gaussian { amplitude, center, width } => Payoff::Gaussian { amplitude, center, width },
            PayoffSpec::Call { strike } => Payoff::Call { strike },
            PayoffSpec::Put { strike } => Payoff::Put { strike },
            PayoffSpec::Table { xs, values } => Payoff::Table { xs, values },
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PdeArgs {
    /// Nominal volatility σ
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Lagrange multiplier θ ≥ 0
    #[arg(long)]
    pub theta: Option<f64>,
    /// Knots of h(t), from 0 to the horizon T (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub h_knots: Option<Vec<f64>>,
    /// Values of h on each knot interval (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub h_values: Option<Vec<f64>>,
    /// Terminal payoff g, e.g. `call:0.1` or JSON [default: zero]
    #[arg(long)]
    pub payoff: Option<PayoffSpec>,
    /// Left end of the space grid
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Right end of the space grid
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Space nodes [default: 401]
    #[arg(long)]
    pub nx: Option<usize>,
    /// Time steps [default: 400]
    #[arg(long)]
    pub nt: Option<usize>,
    /// Report V(0, x0) on stderr
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Also estimate V(0, x0) by Monte Carlo with this many paths
    #[arg(long)]
    pub mc_paths: Option<usize>,
    /// Monte Carlo time steps [default: 100]
    #[arg(long)]
    pub mc_steps: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct InfoflowArgs {
    /// Loss sample CSV with header `loss,prob`
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// Knots of the information rate I(t), from 0 to T_max (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub rate_knots: Option<Vec<f64>>,
    /// Rates I(t) ≥ 0 in nats per unit time on each interval (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    /// Horizons to report (comma separated) [default: 21 points on [0, T_max]]
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Joint pmf CSV with header `x,y1,...,yn,prob`; prints its chain-rule decomposition
    #[arg(long)]
    pub joint: Option<PathBuf>,
    /// CSV for the chain-rule decomposition (`quantity,value`)
    #[arg(long)]
    pub chain_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Worst-case measure figures at one multiplier
    Tilt(TiltArgs),
    /// Worst-case curve over a multiplier grid
    Sweep(SweepArgs),
    /// Budget recovered by integrating θ dV along the worst-case curve
    Quasistatic(QuasistaticArgs),
    /// Power-law spectrum benchmark and its budget slope
    Idealgas(IdealGasArgs),
    /// Simulated thermalization on an energy ladder
    Thermalize(ThermalizeArgs),
    /// Worst-case risk PDE for ∫h dx + g(x_T)
    Pde(PdeArgs),
    /// Budgets and worst-case risk from an information-arrival schedule
    Infoflow(InfoflowArgs),
}

impl Command {
    pub fn key(&self) -> &'static str {
        match self {
            Command::Tilt(_) => "tilt",
            Command::Sweep(_) => "sweep",
            Command::Quasistatic(_) => "quasistatic",
            Command::Idealgas(_) => "idealgas",
            Command::Thermalize(_) => "thermalize",
            Command::Pde(_) => "pde",
            Command::Infoflow(_) => "infoflow",
        }
    }

    fn flags(&self) -> Value {
        let v = match self {
            Command::Tilt(a) => serde_json::to_value(a),
            Command::Sweep(a) => serde_json::to_value(a),
            Command::Quasistatic(a) => serde_json::to_value(a),
            Command::Idealgas(a) => serde_json::to_value(a),
            Command::Thermalize(a) => serde_json::to_value(a),
            Command::Pde(a) => serde_json::to_value(a),
            Command::Infoflow(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }
}

/// One run: global settings plus the sections of any subcommands. Only the
/// section of the invoked subcommand is used.
#[derive(Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilt: Option<TiltArgs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepArgs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quasistatic: Option<QuasistaticArgs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idealgas: Option<IdealGasArgs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermalize: Option<ThermalizeArgs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pde: Option<PdeArgs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infoflow: Option<InfoflowArgs>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::input(path, e.to_string()))
    }

    /// Overlays the flags that were given on top of this configuration and
    /// drops the sections of other subcommands.
    pub fn merged(self, out: Option<PathBuf>, seed: Option<u64>, command: &Command) -> Result<Self> {
        let mut doc = serde_json::to_value(&self).expect("config serializes");
        let root = doc.as_object_mut().expect("config is an object");
        let key = command.key();
        let mut section = match root.remove(key) {
            Some(Value::Object(m)) => m,
            _ => Map::new(),
        };
        if let Value::Object(flags) = command.flags() {
            section.extend(flags.into_iter().filter(|(_, v)| !v.is_null()));
        }
        let mut merged = Map::new();
        merged.insert("out".into(), serde_json::to_value(out.or(self.out)).expect("path serializes"));
        merged.insert("seed".into(), serde_json::to_value(seed.or(self.seed)).expect("seed serializes"));
        merged.insert(key.into(), Value::Object(section));
        serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
