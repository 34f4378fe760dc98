use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fragsim::chain::{make_model, BathSide, Model, ModelKind, ModelParams};
use fragsim::dynamics::{Mode, Observable, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sectors,
    Graph,
    Simulate,
    Conductance,
    Spectrum,
    FiguresData,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Power,
    LogLinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub kind: FitKind,
    pub lo: f64,
    pub hi: f64,
}

/// Everything needed to rerun one experiment. Flags and `--config` files
/// both fill this; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,

    /// Model name: breakdown, tjz, pairflip, dipole3, dipole4, east.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,

    /// Chain length.
    #[arg(long = "L")]
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,

    /// Several chain lengths, run one after another.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,

    /// East region size; sets L = 2 N0.
    #[arg(long = "N0")]
    #[serde(default, rename = "N0", skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,

    /// Bath side: none, left, right, both. Defaults to the model's own.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<String>,

    /// Local dimension of the pair-flip model.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u8>,

    /// East range.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,

    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,

    /// Dynamics: local, sector-uniform, krylov-walk.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,

    /// Brickwork sweeps per step in local mode.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,

    /// Time horizon in steps. Accepts forms such as 1e6 or 10^6.
    #[arg(long, value_parser = parse_count)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,

    /// Number of trajectories.
    #[arg(long, value_parser = parse_count)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traj: Option<u64>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Relaxation threshold; adds relaxation times to the summary.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,

    /// Observables: Q, m, N, x, QA:<start>:<len>, trace_dist.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs: Option<Vec<String>>,

    /// Recording times: every:K, log:P, or a comma list.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,

    /// Initial configuration in model symbols.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,

    /// Evolve distributions exactly instead of sampling.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,

    /// Fit window as kind:lo:hi, e.g. power:1e3:1e5 or log-linear:100:1e5.
    #[arg(long, value_parser = parse_fit)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSpec>,

    /// Conductance convention: probabilistic or combinatorial.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,

    /// Cut search: auto, exhaustive, cones, line-prefixes, east-half-planes.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,

    /// Node packing for graph output: identity, east-nx, group-element.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pack: Option<String>,

    /// Smaller sizes and fewer samples for figures-data.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quick: Option<bool>,

    /// Output file, or directory for figures-data. Standard output if absent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Some((base, exp)) = s.split_once('^') {
        let b: u64 = base.parse().map_err(|e| format!("{e}"))?;
        let e: u32 = exp.parse().map_err(|e| format!("{e}"))?;
        return b.checked_pow(e).ok_or_else(|| "count overflows".into());
    }
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if f < 0.0 || f.fract() != 0.0 || f > u64::MAX as f64 {
        return Err(format!("`{s}` is not a count"));
    }
    Ok(f as u64)
}

fn parse_fit(s: &str) -> std::result::Result<FitSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [kind, lo, hi] = parts[..] else {
        return Err("expected kind:lo:hi".into());
    };
    let kind = match kind {
        "power" => FitKind::Power,
        "log-linear" => FitKind::LogLinear,
        _ => return Err(format!("unknown fit kind `{kind}`")),
    };
    let num = |v: &str| v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    Ok(FitSpec {
        kind,
        lo: num(lo)?,
        hi: num(hi)?,
    })
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ExperimentSpec) -> Self {
        overlay!(
            self, top, command, model, len, sizes, n0, bath, q, r, params, mode, k, steps, traj, seed, gamma, obs,
            schedule, init, exact, fit, convention, strategy, pack, quick, out
        );
        self
    }

    /// Lowercase hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn model_params(&self) -> ModelParams {
        let mut p = self.params.unwrap_or_default();
        if self.q.is_some() {
            p.q = self.q;
        }
        if self.r.is_some() {
            p.r = self.r;
        }
        p
    }

    pub fn model_name(&self) -> Result<&str> {
        match &self.model {
            Some(m) => Ok(m),
            None => bail!(UsageError("--model is required".into())),
        }
    }

    /// Chain lengths to run: `sizes`, else `L`, else `2 N0`.
    pub fn lengths(&self) -> Result<Vec<usize>> {
        if let Some(s) = &self.sizes {
            if s.is_empty() {
                bail!(UsageError("--sizes is empty".into()));
            }
            return Ok(s.clone());
        }
        match (self.len, self.n0) {
            (Some(l), None) => Ok(vec![l]),
            (None, Some(n0)) => Ok(vec![2 * n0]),
            (Some(l), Some(n0)) if l == 2 * n0 => Ok(vec![l]),
            (Some(_), Some(_)) => bail!(UsageError("--L and --N0 disagree".into())),
            (None, None) => bail!(UsageError("--L is required".into())),
        }
    }

    pub fn build_model(&self, len: usize) -> Result<Model> {
        let model = make_model(self.model_name()?, len, &self.model_params())?;
        Ok(match &self.bath {
            Some(side) => model.with_bath_side(side.parse::<BathSide>()?)?,
            None => model,
        })
    }

    pub fn mode(&self) -> Result<Mode> {
        let name = self.mode.as_deref().unwrap_or("local");
        Ok(Mode::parse(name, self.k.unwrap_or(1))?)
    }

    pub fn observables(&self, model: &Model) -> Result<Vec<Observable>> {
        let list: Vec<Observable> = match &self.obs {
            Some(v) => v.iter().map(|s| s.parse()).collect::<fragsim::Result<_>>()?,
            None => vec![default_observable(model.kind())],
        };
        for o in &list {
            o.check(model)?;
        }
        Ok(list)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Ok(match &self.schedule {
            Some(s) => s.parse()?,
            None => Schedule::default(),
        })
    }

    pub fn initial(&self, model: &Model) -> Result<fragsim::chain::Configuration> {
        let text = match &self.init {
            Some(s) => s.clone(),
            None => default_initial(model),
        };
        let config = model.parse_config(&text)?;
        model.validate(&config)?;
        Ok(config)
    }
}

/// Misuse of the command line, reported with its own error kind.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn default_observable(kind: ModelKind) -> Observable {
    match kind {
        ModelKind::Tjz => Observable::Magnetization,
        ModelKind::East | ModelKind::Dipole4 => Observable::Particles,
        ModelKind::PairFlip { .. } => Observable::TraceDistance,
        _ => Observable::Charge,
    }
}

fn default_initial(model: &Model) -> String {
    let len = model.len();
    match model.kind() {
        ModelKind::Tjz => "u".repeat(len),
        ModelKind::Dipole3 | ModelKind::Dipole4 => "-".repeat(len),
        ModelKind::East => format!("1{}", "0".repeat(len - 1)),
        _ => "0".repeat(len),
    }
}
