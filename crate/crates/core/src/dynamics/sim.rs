use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::observable::Observable;
use crate::chain::{decode_into, Configuration, Model};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::krylov::{KrylovDecomposition, KrylovGraph};

/// Trajectories per reduction chunk.
pub const CHUNK: usize = 64;

/// What happens between two bath kicks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Mode {
    /// `sweeps` brickwork sweeps of local gates.
    Local { sweeps: u32 },
    /// Uniform resampling inside the current sector.
    SectorUniform,
    /// Random walk on the sector graph.
    KrylovWalk,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Local { .. } => "local",
            Mode::SectorUniform => "sector-uniform",
            Mode::KrylovWalk => "krylov-walk",
        }
    }

    /// Sweeps per step as printed in output metadata; `inf` for the nonlocal modes.
    pub fn k_label(&self) -> String {
        match self {
            Mode::Local { sweeps } => sweeps.to_string(),
            _ => "inf".into(),
        }
    }

    pub fn parse(name: &str, sweeps: u32) -> Result<Self> {
        match name {
            "local" => Ok(Mode::Local { sweeps }),
            "sector-uniform" => Ok(Mode::SectorUniform),
            "krylov-walk" => Ok(Mode::KrylovWalk),
            _ => Err(Error::InvalidParams(format!("unknown mode `{name}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which time steps are recorded. Step 0 is always included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Every(u64),
    /// Roughly log-spaced, `per_decade` points per factor of ten.
    Log(u32),
    Times(Vec<u64>),
}

impl Schedule {
    pub fn times(&self, steps: u64) -> Vec<u64> {
        let mut t: Vec<u64> = match self {
            Schedule::Every(k) => (0..=steps).step_by((*k).max(1) as usize).collect(),
            Schedule::Log(per) => {
                let per = (*per).max(1) as f64;
                let mut v = vec![0u64];
                let mut k = 0.0;
                loop {
                    let x = 10f64.powf(k / per).round() as u64;
                    if x > steps {
                        break;
                    }
                    v.push(x);
                    k += 1.0;
                }
                v
            }
            Schedule::Times(ts) => std::iter::once(0).chain(ts.iter().copied()).collect(),
        };
        t.retain(|&x| x <= steps);
        if !matches!(self, Schedule::Times(_)) {
            t.push(steps);
        }
        t.sort_unstable();
        t.dedup();
        t
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Log(20)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(flatten)]
    pub mode: Mode,
    pub steps: u64,
    pub trajectories: u64,
    pub seed: u64,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub schedule: Schedule,
}

/// Mean and standard error of one observable at each recorded time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub observable: Observable,
    pub t: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_traj: u64,
}

impl ObservableSeries {
    pub fn from_moments(observable: Observable, t: Vec<u64>, sum: &[f64], sum_sq: &[f64], n: u64) -> Self {
        let nf = n as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let stderr = sum_sq
            .iter()
            .zip(&mean)
            .map(|(sq, m)| {
                if n < 2 {
                    0.0
                } else {
                    ((sq - nf * m * m).max(0.0) / (nf - 1.0) / nf).sqrt()
                }
            })
            .collect();
        Self {
            observable,
            t,
            mean,
            stderr,
            n_traj: n,
        }
    }

    /// Deterministic series, for exact evolution.
    pub fn exact(observable: Observable, t: Vec<u64>, values: Vec<f64>) -> Self {
        let stderr = vec![0.0; values.len()];
        Self {
            observable,
            t,
            mean: values,
            stderr,
            n_traj: 0,
        }
    }
}

/// Samples trajectories of a model under a chosen mode.
pub struct Simulator<'a> {
    model: &'a Model,
    config: SimulationConfig,
    decomp: Option<&'a KrylovDecomposition>,
    walk: Option<WalkTable>,
    means: Vec<Vec<f64>>,
}

/// Cumulative integer fluxes for exact sampling of graph steps.
struct WalkTable {
    offsets: Vec<usize>,
    dst: Vec<u32>,
    cumulative: Vec<u128>,
}

impl WalkTable {
    fn new(graph: &KrylovGraph) -> Result<Self> {
        let mut offsets = vec![0];
        let mut dst = Vec::new();
        let mut cumulative = Vec::new();
        for a in 0..graph.node_count() {
            let mut acc = 0u128;
            for e in graph.out_edges(a) {
                acc += e.flux;
                dst.push(e.dst);
                cumulative.push(acc);
            }
            if acc == 0 {
                return Err(Error::NoOutgoingMass(a));
            }
            offsets.push(dst.len());
        }
        Ok(Self {
            offsets,
            dst,
            cumulative,
        })
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, node: u32, rng: &mut R) -> u32 {
        let (lo, hi) = (self.offsets[node as usize], self.offsets[node as usize + 1]);
        let cum = &self.cumulative[lo..hi];
        let u = rng.gen_range(0..*cum.last().unwrap());
        let k = cum.partition_point(|&c| c <= u);
        self.dst[lo + k]
    }
}

/// One sampled graph step from `node`.
pub fn krylov_walk_step<R: Rng + ?Sized>(graph: &KrylovGraph, node: usize, rng: &mut R) -> Result<usize> {
    let out = graph.out_edges(node);
    let total: u128 = out.iter().map(|e| e.flux).sum();
    if total == 0 {
        return Err(Error::NoOutgoingMass(node));
    }
    let mut u = rng.gen_range(0..total);
    for e in out {
        if u < e.flux {
            return Ok(e.dst as usize);
        }
        u -= e.flux;
    }
    unreachable!("flux sampling ran past the last edge")
}

/// Applies `sweeps` brickwork sweeps of the model's gates in place.
///
/// A sweep runs the layers with window offsets `0, 1, .., w-1` in turn.
pub fn local_sweeps<R: Rng + ?Sized>(model: &Model, letters: &mut [u8], sweeps: u32, rng: &mut R) {
    let w = model.window();
    let len = letters.len();
    if len < w {
        return;
    }
    let gates = model.gates();
    for _ in 0..sweeps {
        for offset in 0..w {
            let mut start = offset;
            while start + w <= len {
                gates.apply(letters, start, rng);
                start += w;
            }
        }
    }
}

/// One time unit of the local or sector-uniform dynamics on a configuration.
pub fn step<R: Rng + ?Sized>(
    model: &Model,
    mode: Mode,
    decomp: Option<&KrylovDecomposition>,
    letters: &mut [u8],
    rng: &mut R,
) -> Result<()> {
    model.bath().apply(letters, model.d(), rng);
    match mode {
        Mode::Local { sweeps } => local_sweeps(model, letters, sweeps, rng),
        Mode::SectorUniform => {
            let decomp = decomp.ok_or(Error::MissingDecomposition)?;
            resample_in_sector(decomp, letters, rng);
        }
        Mode::KrylovWalk => {
            return Err(Error::InvalidSimulation(
                "krylov-walk acts on sectors, not configurations".into(),
            ))
        }
    }
    Ok(())
}

fn resample_in_sector<R: Rng + ?Sized>(decomp: &KrylovDecomposition, letters: &mut [u8], rng: &mut R) {
    let d = decomp.d() as u64;
    let idx = crate::chain::encode(letters, d);
    let members = decomp.members(decomp.sector_of_index(idx));
    let pick = members[rng.gen_range(0..members.len())];
    decode_into(pick as u64, d, letters);
}

impl<'a> Simulator<'a> {
    /// `decomp` is required for sector-uniform and krylov-walk modes,
    /// `graph` for krylov-walk.
    pub fn new(
        model: &'a Model,
        config: SimulationConfig,
        decomp: Option<&'a KrylovDecomposition>,
        graph: Option<&'a KrylovGraph>,
    ) -> Result<Self> {
        if config.steps == 0 || config.trajectories == 0 {
            return Err(Error::InvalidSimulation(
                "steps and trajectories must be at least 1".into(),
            ));
        }
        if config.observables.is_empty() {
            return Err(Error::InvalidSimulation("no observables requested".into()));
        }
        for o in &config.observables {
            o.check(model)?;
            if !o.is_pointwise() {
                return Err(Error::InvalidSimulation(format!(
                    "`{o}` is only available from exact evolution"
                )));
            }
        }
        let mut walk = None;
        let mut means = Vec::new();
        match config.mode {
            Mode::Local { .. } => {}
            Mode::SectorUniform => {
                decomp.ok_or(Error::MissingDecomposition)?;
            }
            Mode::KrylovWalk => {
                let d = decomp.ok_or(Error::MissingDecomposition)?;
                let g = graph.ok_or_else(|| Error::InvalidSimulation("krylov-walk needs a graph".into()))?;
                if g.node_count() != d.num_sectors() {
                    return Err(Error::InvalidSimulation(
                        "graph does not match the decomposition".into(),
                    ));
                }
                walk = Some(WalkTable::new(g)?);
                means = config.observables.iter().map(|o| o.sector_means(model, d)).collect();
            }
        }
        Ok(Self {
            model,
            config,
            decomp,
            walk,
            means,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn record_times(&self) -> Vec<u64> {
        self.config.schedule.times(self.config.steps)
    }

    fn trajectory_rng(&self, traj: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(traj);
        rng
    }

    /// Runs all trajectories from `initial` and reduces them to series.
    pub fn run(&self, initial: &Configuration, exec: Executor) -> Result<Vec<ObservableSeries>> {
        self.model.validate(initial)?;
        let times = self.record_times();
        let n_obs = self.config.observables.len();
        let width = n_obs * times.len();
        let chunks = exec.map_chunks(self.config.trajectories as usize, CHUNK, |range| {
            let mut sum = vec![0.0; width];
            let mut sq = vec![0.0; width];
            let mut row = vec![0.0; width];
            for traj in range {
                self.trajectory(initial, traj as u64, &times, &mut row);
                for i in 0..width {
                    sum[i] += row[i];
                    sq[i] += row[i] * row[i];
                }
            }
            (sum, sq)
        });
        let mut sum = vec![0.0; width];
        let mut sq = vec![0.0; width];
        for (s, q) in chunks {
            for i in 0..width {
                sum[i] += s[i];
                sq[i] += q[i];
            }
        }
        Ok(self
            .config
            .observables
            .iter()
            .enumerate()
            .map(|(k, &o)| {
                let r = k * times.len()..(k + 1) * times.len();
                ObservableSeries::from_moments(o, times.clone(), &sum[r.clone()], &sq[r], self.config.trajectories)
            })
            .collect())
    }

    /// Fills `out[k * times.len() + j]` with observable `k` at `times[j]`.
    fn trajectory(&self, initial: &Configuration, traj: u64, times: &[u64], out: &mut [f64]) {
        let mut rng = self.trajectory_rng(traj);
        let nt = times.len();
        let obs = &self.config.observables;
        if let Some(walk) = &self.walk {
            let decomp = self.decomp.expect("checked in new");
            let mut node = decomp.sector_of(initial) as u32;
            let mut t = 0u64;
            for (j, &target) in times.iter().enumerate() {
                while t < target {
                    node = walk.step(node, &mut rng);
                    t += 1;
                }
                for k in 0..obs.len() {
                    out[k * nt + j] = self.means[k][node as usize];
                }
            }
            return;
        }
        let mut letters = initial.letters().to_vec();
        let mut t = 0u64;
        for (j, &target) in times.iter().enumerate() {
            while t < target {
                step(self.model, self.config.mode, self.decomp, &mut letters, &mut rng).expect("mode validated in new");
                t += 1;
            }
            for (k, o) in obs.iter().enumerate() {
                out[k * nt + j] = o.evaluate(self.model, &letters);
            }
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    /// `every:K`, `log:P` or a comma-separated list of times.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("bad schedule `{s}`"));
        if let Some(k) = s.strip_prefix("every:") {
            return k.parse().map(Schedule::Every).map_err(|_| bad());
        }
        if let Some(p) = s.strip_prefix("log:") {
            return p.parse().map(Schedule::Log).map_err(|_| bad());
        }
        s.split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()
            .map(Schedule::Times)
    }
}
