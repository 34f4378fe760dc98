use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

use super::observable::Observable;
use super::sim::{Mode, ObservableSeries};
use crate::chain::{BathKernel, Configuration, Model, SectorLabel};
use crate::error::{Error, Result};
use crate::krylov::{KrylovDecomposition, KrylovGraph};

/// Largest full configuration space evolved exactly.
pub const EXACT_CAP: u64 = 300_000;

/// Number types the exact evolution can run in.
pub trait Scalar: Num + Clone + FromPrimitive + Signed + Send + Sync {}

impl<T: Num + Clone + FromPrimitive + Signed + Send + Sync> Scalar for T {}

fn lit<T: Scalar>(v: u64) -> T {
    T::from_u64(v).expect("small integer literal")
}

/// The exact one-step map on the full configuration space.
pub struct FullSpaceChain<'a> {
    model: &'a Model,
    kernel: BathKernel,
    mode: Mode,
    decomp: Option<&'a KrylovDecomposition>,
    n: u64,
}

impl<'a> FullSpaceChain<'a> {
    /// `mode` must be local or sector-uniform; the latter needs `decomp`.
    pub fn new(model: &'a Model, mode: Mode, decomp: Option<&'a KrylovDecomposition>) -> Result<Self> {
        let states = model.state_count();
        if states > EXACT_CAP as u128 {
            return Err(Error::StateSpaceTooLarge { states, cap: EXACT_CAP });
        }
        match mode {
            Mode::SectorUniform if decomp.is_none() => return Err(Error::MissingDecomposition),
            Mode::KrylovWalk => {
                return Err(Error::InvalidSimulation(
                    "full-space evolution runs the local or sector-uniform chain".into(),
                ))
            }
            _ => {}
        }
        let kernel = model.bath().kernel(model.len(), model.d())?;
        Ok(Self {
            model,
            kernel,
            mode,
            decomp,
            n: states as u64,
        })
    }

    pub fn size(&self) -> usize {
        self.n as usize
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn bath<T: Scalar>(&self, p: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); p.len()];
        let denom: T = lit(self.kernel.denominator());
        for (i, pi) in p.iter().enumerate() {
            if pi.is_zero() {
                continue;
            }
            self.kernel.for_each_outcome(i as u64, |j, w| {
                out[j as usize] = out[j as usize].clone() + pi.clone() * lit::<T>(w) / denom.clone();
            });
        }
        out
    }

    /// Averages each class of the gate at 0-indexed `start`, in place.
    pub fn gate<T: Scalar>(&self, p: &mut [T], start: usize) {
        let gates = self.model.gates();
        let pw = (self.model.d() as u64).pow(start as u32);
        let span = gates.span();
        for i in 0..self.n {
            let local = (i / pw) % span;
            let class = gates.class(local);
            if class.len() < 2 || class[0] as u64 != local {
                continue;
            }
            let base = i - local * pw;
            let mut sum = T::zero();
            for &m in class {
                sum = sum + p[(base + m as u64 * pw) as usize].clone();
            }
            let avg = sum / lit(class.len() as u64);
            for &m in class {
                p[(base + m as u64 * pw) as usize] = avg.clone();
            }
        }
    }

    pub fn sweeps<T: Scalar>(&self, p: &mut [T], sweeps: u32) {
        let w = self.model.window();
        let len = self.model.len();
        if len < w {
            return;
        }
        for _ in 0..sweeps {
            for offset in 0..w {
                let mut start = offset;
                while start + w <= len {
                    self.gate(p, start);
                    start += w;
                }
            }
        }
    }

    pub fn project<T: Scalar>(&self, p: &mut [T]) {
        let decomp = self.decomp.expect("checked in new");
        for s in 0..decomp.num_sectors() {
            let members = decomp.members(s);
            let sum = members.iter().fold(T::zero(), |acc, &m| acc + p[m as usize].clone());
            let avg = sum / lit(members.len() as u64);
            for &m in members {
                p[m as usize] = avg.clone();
            }
        }
    }

    /// One time unit: bath, then the bulk dynamics.
    pub fn step<T: Scalar>(&self, p: &[T]) -> Vec<T> {
        let mut q = self.bath(p);
        match self.mode {
            Mode::Local { sweeps } => self.sweeps(&mut q, sweeps),
            _ => self.project(&mut q),
        }
        q
    }

    /// Rows of the exact transition matrix in rational arithmetic.
    pub fn exact_rows(&self) -> Vec<Vec<(usize, BigRational)>> {
        (0..self.size())
            .map(|i| {
                let mut e = vec![BigRational::from_integer(0.into()); self.size()];
                e[i] = BigRational::from_integer(1.into());
                self.step(&e)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| !num_traits::Zero::is_zero(v))
                    .collect()
            })
            .collect()
    }

    /// The chain as a graph with one node per configuration.
    pub fn configuration_graph(&self) -> Result<KrylovGraph> {
        let labels = (0..self.n)
            .map(|i| SectorLabel::State {
                letters: Configuration::from_index(i, self.model.d(), self.model.len()).into_letters(),
            })
            .collect();
        KrylovGraph::from_rational_rows(vec![1; self.size()], labels, &self.exact_rows())
    }

    pub fn point_mass(&self, config: &Configuration) -> Vec<f64> {
        let mut p = vec![0.0; self.size()];
        p[config.index(self.model.d()) as usize] = 1.0;
        p
    }

    /// Observable series of the exact evolution from `p0` at the given times.
    pub fn measure(&self, p0: &[f64], times: &[u64], observables: &[Observable]) -> Result<Vec<ObservableSeries>> {
        for o in observables {
            o.check(self.model)?;
        }
        let values: Vec<Vec<f64>> = observables
            .iter()
            .map(|o| {
                if !o.is_pointwise() {
                    return Vec::new();
                }
                (0..self.n)
                    .map(|i| {
                        o.evaluate(
                            self.model,
                            Configuration::from_index(i, self.model.d(), self.model.len()).letters(),
                        )
                    })
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new(); observables.len()];
        let mut p = p0.to_vec();
        let mut t = 0u64;
        let uniform = 1.0 / self.n as f64;
        for &target in times {
            while t < target {
                p = self.step(&p);
                t += 1;
            }
            for (k, o) in observables.iter().enumerate() {
                let v = if o.is_pointwise() {
                    p.iter().zip(&values[k]).map(|(a, b)| a * b).sum()
                } else {
                    0.5 * p.iter().map(|x| (x - uniform).abs()).sum::<f64>()
                };
                out[k].push(v);
            }
        }
        Ok(observables
            .iter()
            .zip(out)
            .map(|(o, v)| ObservableSeries::exact(*o, times.to_vec(), v))
            .collect())
    }
}

/// `p(t)` from `p0` under a full-space chain.
pub fn evolve_distribution<T: Scalar>(chain: &FullSpaceChain, p0: &[T], t: u64) -> Vec<T> {
    let mut p = p0.to_vec();
    for _ in 0..t {
        p = chain.step(&p);
    }
    p
}

/// One step of the sector-level chain.
pub fn graph_step(graph: &KrylovGraph, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for e in graph.edges() {
        let w = p[e.src as usize];
        if w != 0.0 {
            out[e.dst as usize] += w * graph.prob(e);
        }
    }
    out
}

/// `p(t)` from `p0` under the sector-level chain.
pub fn evolve_graph(graph: &KrylovGraph, p0: &[f64], t: u64) -> Vec<f64> {
    let mut p = p0.to_vec();
    for _ in 0..t {
        p = graph_step(graph, &p);
    }
    p
}

/// L1 distance to uniform of a distribution that is uniform inside each node.
pub fn graph_l1_to_uniform(graph: &KrylovGraph, p: &[f64]) -> f64 {
    let total = graph.total() as f64;
    p.iter()
        .enumerate()
        .map(|(a, &q)| (q - graph.mass(a) as f64 / total).abs())
        .sum()
}

pub fn l1_to_uniform<T: Scalar>(p: &[T]) -> T {
    let n = lit::<T>(p.len() as u64);
    p.iter()
        .fold(T::zero(), |acc, x| acc + (x.clone() - T::one() / n.clone()).abs())
}

/// Outcome of a first-passage search with a finite horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "t")]
pub enum Passage {
    Reached(u64),
    Censored { horizon: u64 },
}

impl Passage {
    pub fn value(&self) -> Option<u64> {
        match self {
            Passage::Reached(t) => Some(*t),
            Passage::Censored { .. } => None,
        }
    }
}

/// Distance threshold below which a distribution counts as thermal: the L1
/// distance to uniform must drop below one half.
pub const THERMAL_L1: f64 = 0.5;

/// Thermalization time of the sector-uniform dynamics.
///
/// Maximized over basis states. Each one is pushed through one exact step
/// and then evolved on `graph`.
pub fn thermalization_time_nonlocal(
    model: &Model,
    decomp: &KrylovDecomposition,
    graph: &KrylovGraph,
    horizon: u64,
) -> Result<Passage> {
    let kernel = model.bath().kernel(model.len(), model.d())?;
    let denom = kernel.denominator() as f64;
    let n = decomp.total();
    // Initial point masses are never thermal unless the space is tiny.
    let point_l1 = 2.0 * (1.0 - 1.0 / n as f64);
    let mut worst = if point_l1 < THERMAL_L1 { 0 } else { 1 };
    let mut seen: HashMap<Vec<(u32, u64)>, ()> = HashMap::new();
    for i in 0..n {
        let mut acc: Vec<(u32, u64)> = Vec::new();
        kernel.for_each_outcome(i, |j, w| acc.push((decomp.sector_of_index(j) as u32, w)));
        acc.sort_unstable();
        let mut merged: Vec<(u32, u64)> = Vec::new();
        for (s, w) in acc {
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 += w,
                _ => merged.push((s, w)),
            }
        }
        if seen.insert(merged.clone(), ()).is_some() {
            continue;
        }
        let mut p = vec![0.0; graph.node_count()];
        for (s, w) in &merged {
            p[*s as usize] = *w as f64 / denom;
        }
        let mut t = 1;
        while graph_l1_to_uniform(graph, &p) >= THERMAL_L1 {
            if t >= horizon {
                return Ok(Passage::Censored { horizon });
            }
            p = graph_step(graph, &p);
            t += 1;
        }
        worst = worst.max(t);
    }
    Ok(Passage::Reached(worst))
}

/// Thermalization time of a full-space chain, maximized over basis states.
pub fn thermalization_time_full(chain: &FullSpaceChain, horizon: u64) -> Passage {
    let mut worst = 0;
    for i in 0..chain.size() {
        let mut p = vec![0.0; chain.size()];
        p[i] = 1.0;
        let mut t = 0;
        while l1_to_uniform(&p) >= THERMAL_L1 {
            if t >= horizon {
                return Passage::Censored { horizon };
            }
            p = chain.step(&p);
            t += 1;
        }
        worst = worst.max(t);
    }
    Passage::Reached(worst)
}

/// Sector-level relaxation of an observable from a point mass.
///
/// Returns the expectation at each requested time under the sector-uniform
/// dynamics, with the first step taken exactly from the basis state.
pub fn graph_observable_series(
    model: &Model,
    decomp: &KrylovDecomposition,
    graph: &KrylovGraph,
    initial: &Configuration,
    observable: Observable,
    times: &[u64],
) -> Result<ObservableSeries> {
    observable.check(model)?;
    if !observable.is_pointwise() {
        return Err(Error::InvalidSimulation(
            "use the full-space chain for trace distance".into(),
        ));
    }
    let means = observable.sector_means(model, decomp);
    let kernel = model.bath().kernel(model.len(), model.d())?;
    let denom = kernel.denominator() as f64;
    let v0 = observable.evaluate(model, initial.letters());
    let mut p = vec![0.0; graph.node_count()];
    kernel.for_each_outcome(initial.index(model.d()), |j, w| {
        p[decomp.sector_of_index(j)] += w as f64 / denom;
    });
    let mut t = 1u64;
    let mut values = Vec::with_capacity(times.len());
    for &target in times {
        if target == 0 {
            values.push(v0);
            continue;
        }
        while t < target {
            p = graph_step(graph, &p);
            t += 1;
        }
        values.push(p.iter().zip(&means).map(|(a, b)| a * b).sum());
    }
    Ok(ObservableSeries::exact(observable, times.to_vec(), values))
}

/// First time an exactly evolved observable satisfies `|value - target| <= gamma`.
pub fn graph_first_passage(
    model: &Model,
    decomp: &KrylovDecomposition,
    graph: &KrylovGraph,
    initial: &Configuration,
    observable: Observable,
    target: f64,
    gamma: f64,
    horizon: u64,
) -> Result<Passage> {
    observable.check(model)?;
    let means = observable.sector_means(model, decomp);
    if (observable.evaluate(model, initial.letters()) - target).abs() <= gamma {
        return Ok(Passage::Reached(0));
    }
    let kernel = model.bath().kernel(model.len(), model.d())?;
    let denom = kernel.denominator() as f64;
    let mut p = vec![0.0; graph.node_count()];
    kernel.for_each_outcome(initial.index(model.d()), |j, w| {
        p[decomp.sector_of_index(j)] += w as f64 / denom;
    });
    let mut t = 1u64;
    loop {
        let v: f64 = p.iter().zip(&means).map(|(a, b)| a * b).sum();
        if (v - target).abs() <= gamma {
            return Ok(Passage::Reached(t));
        }
        if t >= horizon {
            return Ok(Passage::Censored { horizon });
        }
        p = graph_step(graph, &p);
        t += 1;
    }
}

/// Converts an exact value to `f64` for reporting.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
