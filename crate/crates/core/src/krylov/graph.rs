use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::KrylovDecomposition;
use crate::chain::{BathSpec, SectorLabel};
use crate::error::{Error, Result};
use crate::exec::Executor;

/// How edge weights are read when computing conductances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeConvention {
    /// Stationary probability flux, `mu(a) p(a -> b)`.
    #[default]
    Probabilistic,
    /// Raw count of configuration pairs joined by a nonzero transition.
    Combinatorial,
}

impl std::str::FromStr for EdgeConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probabilistic" => Ok(EdgeConvention::Probabilistic),
            "combinatorial" => Ok(EdgeConvention::Combinatorial),
            _ => Err(Error::InvalidParams(format!("unknown edge convention `{s}`"))),
        }
    }
}

impl std::fmt::Display for EdgeConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EdgeConvention::Probabilistic => "probabilistic",
            EdgeConvention::Combinatorial => "combinatorial",
        })
    }
}

/// A directed, weighted edge. Self-loops are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    /// `|K_src| p(src -> dst)` in units of `1 / denominator`.
    pub flux: u128,
    /// Configuration pairs `(psi, psi')` with a nonzero transition.
    pub pairs: u64,
}

/// Coarse-grained chain over sectors (or any node partition).
///
/// Node `a` has integer mass `m_a` with `sum m_a = total`, so `mu(a) = m_a / total`.
/// The transition probability along an edge is `flux / (denominator * m_src)`.
#[derive(Clone, Debug)]
pub struct KrylovGraph {
    masses: Vec<u64>,
    total: u64,
    denominator: u128,
    labels: Vec<SectorLabel>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
}

/// Aggregates the bath transitions between sectors.
pub fn build_krylov_graph(decomp: &KrylovDecomposition, bath: &BathSpec) -> Result<KrylovGraph> {
    build_krylov_graph_with(decomp, bath, Executor::default())
}

pub fn build_krylov_graph_with(decomp: &KrylovDecomposition, bath: &BathSpec, exec: Executor) -> Result<KrylovGraph> {
    let kernel = bath.kernel(decomp.len(), decomp.d())?;
    let map = decomp.sector_map();
    let rows = exec.map_indices(decomp.num_sectors(), |a| {
        let mut acc: BTreeMap<u32, (u128, u64)> = BTreeMap::new();
        for &psi in decomp.members(a) {
            kernel.for_each_outcome(psi as u64, |target, w| {
                let e = acc.entry(map[target as usize]).or_insert((0, 0));
                e.0 += w as u128;
                e.1 += 1;
            });
        }
        acc.into_iter()
            .map(|(dst, (flux, pairs))| Edge {
                src: a as u32,
                dst,
                flux,
                pairs,
            })
            .collect::<Vec<_>>()
    });
    Ok(KrylovGraph::from_edges(
        decomp.sizes().to_vec(),
        decomp.labels().to_vec(),
        kernel.denominator() as u128,
        rows.into_iter().flatten().collect(),
    ))
}

impl KrylovGraph {
    /// Assembles a graph from raw edges; they are sorted by `(src, dst)`.
    pub fn from_edges(masses: Vec<u64>, labels: Vec<SectorLabel>, denominator: u128, mut edges: Vec<Edge>) -> Self {
        assert_eq!(masses.len(), labels.len());
        edges.sort_by_key(|e| (e.src, e.dst));
        let n = masses.len();
        let mut offsets = vec![0usize; n + 1];
        for e in &edges {
            offsets[e.src as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let total = masses.iter().sum();
        Self {
            masses,
            total,
            denominator,
            labels,
            edges,
            offsets,
        }
    }

    /// Builds a graph from exact transition rows `P[a][b]`.
    ///
    /// Fluxes are `m_a P[a][b]` brought to a common denominator; each nonzero
    /// entry counts as one pair.
    pub fn from_rational_rows(
        masses: Vec<u64>,
        labels: Vec<SectorLabel>,
        rows: &[Vec<(usize, BigRational)>],
    ) -> Result<Self> {
        let mut lcm = BigInt::one();
        for row in rows {
            for (_, p) in row {
                lcm = lcm.lcm(p.denom());
            }
        }
        let denominator = lcm
            .to_u128()
            .ok_or_else(|| Error::InvalidParams("transition denominators overflow".into()))?;
        let mut edges = Vec::new();
        for (a, row) in rows.iter().enumerate() {
            for (b, p) in row {
                if p.is_zero() {
                    continue;
                }
                let scaled = p * BigRational::from_integer(lcm.clone()) * BigRational::from_integer(masses[a].into());
                let flux = scaled
                    .to_integer()
                    .to_u128()
                    .ok_or_else(|| Error::InvalidParams("negative or oversized flux".into()))?;
                edges.push(Edge {
                    src: a as u32,
                    dst: *b as u32,
                    flux,
                    pairs: 1,
                });
            }
        }
        Ok(Self::from_edges(masses, labels, denominator, edges))
    }

    pub fn node_count(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[u64] {
        &self.masses
    }

    pub fn mass(&self, node: usize) -> u64 {
        self.masses[node]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    pub fn labels(&self) -> &[SectorLabel] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &SectorLabel {
        &self.labels[node]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, node: usize) -> &[Edge] {
        &self.edges[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn mu(&self, node: usize) -> f64 {
        self.masses[node] as f64 / self.total as f64
    }

    pub fn prob(&self, e: &Edge) -> f64 {
        e.flux as f64 / (self.denominator as f64 * self.masses[e.src as usize] as f64)
    }

    pub fn prob_exact(&self, e: &Edge) -> Ratio<u128> {
        Ratio::new(e.flux, self.denominator * self.masses[e.src as usize] as u128)
    }

    /// Flux of the edge `a -> b`, zero when absent.
    pub fn flux(&self, a: usize, b: usize) -> u128 {
        let out = self.out_edges(a);
        out.binary_search_by_key(&(b as u32), |e| e.dst)
            .map(|i| out[i].flux)
            .unwrap_or(0)
    }

    /// Every row sums to one, checked in integer arithmetic.
    pub fn is_stochastic(&self) -> bool {
        (0..self.node_count()).all(|a| {
            let s: u128 = self.out_edges(a).iter().map(|e| e.flux).sum();
            s == self.denominator * self.masses[a] as u128
        })
    }

    /// `mu(a) p(a -> b) = mu(b) p(b -> a)` for every pair.
    pub fn is_reversible(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.flux(e.dst as usize, e.src as usize) == e.flux)
    }

    /// `mu` is stationary: incoming flux equals `denominator * m_b` at every node.
    pub fn mu_is_stationary(&self) -> bool {
        let mut inflow = vec![0u128; self.node_count()];
        for e in &self.edges {
            inflow[e.dst as usize] += e.flux;
        }
        inflow
            .iter()
            .zip(&self.masses)
            .all(|(&f, &m)| f == self.denominator * m as u128)
    }

    /// Dense row-stochastic matrix, for small graphs.
    pub fn dense_transition(&self) -> Vec<Vec<f64>> {
        let n = self.node_count();
        let mut m = vec![vec![0.0; n]; n];
        for e in &self.edges {
            m[e.src as usize][e.dst as usize] += self.prob(e);
        }
        m
    }

    /// Renumbers nodes by `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.node_count();
        let mut masses = vec![0; n];
        let mut labels = vec![SectorLabel::State { letters: vec![] }; n];
        for old in 0..n {
            masses[perm[old]] = self.masses[old];
            labels[perm[old]] = self.labels[old].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                src: perm[e.src as usize] as u32,
                dst: perm[e.dst as usize] as u32,
                ..*e
            })
            .collect();
        Self::from_edges(masses, labels, self.denominator, edges)
    }

    /// Writes `src,dst,prob,mu_src` rows.
    pub fn write_edge_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "src,dst,prob,mu_src")?;
        for e in &self.edges {
            writeln!(
                out,
                "{},{},{:.17e},{:.17e}",
                e.src,
                e.dst,
                self.prob(e),
                self.mu(e.src as usize)
            )?;
        }
        Ok(())
    }
}

/// Exact probability as a big rational, for symbolic checks.
pub fn big_ratio(r: Ratio<u128>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_model, BathSide, ModelParams};
    use crate::krylov::enumerate_sectors;

    fn graph(name: &str, len: usize, side: Option<BathSide>) -> (KrylovDecomposition, KrylovGraph) {
        let mut m = make_model(name, len, &ModelParams::default()).unwrap();
        if let Some(s) = side {
            m = m.with_bath_side(s).unwrap();
        }
        let d = enumerate_sectors(&m).unwrap();
        let g = build_krylov_graph(&d, m.bath()).unwrap();
        (d, g)
    }

    #[test]
    fn graphs_are_stochastic_and_reversible() {
        for (name, len) in [
            ("breakdown", 5),
            ("tjz", 5),
            ("dipole3", 5),
            ("dipole4", 5),
            ("east", 6),
            ("pairflip", 6),
        ] {
            for side in [BathSide::Left, BathSide::Both, BathSide::None] {
                if name == "east" && side == BathSide::Both {
                    continue;
                }
                let (_, g) = graph(name, len, Some(side));
                assert!(g.is_stochastic(), "{name} {side:?}");
                assert!(g.is_reversible(), "{name} {side:?}");
                assert!(g.mu_is_stationary(), "{name} {side:?}");
            }
        }
    }

    #[test]
    fn breakdown_charge_neighbours() {
        let (_, g) = graph("breakdown", 4, None);
        for a in 0..g.node_count() {
            let q = match g.label(a) {
                SectorLabel::BreakdownCharge { charge } => *charge as i64,
                _ => unreachable!(),
            };
            for e in g.out_edges(a) {
                let r = match g.label(e.dst as usize) {
                    SectorLabel::BreakdownCharge { charge } => *charge as i64,
                    _ => unreachable!(),
                };
                let allowed: &[i64] = if q % 2 == 1 { &[-1, 0, 1] } else { &[-2, -1, 0, 1, 2] };
                assert!(allowed.contains(&(r - q)), "Q={q} -> {r}");
            }
        }
    }

    #[test]
    fn no_bath_means_no_inter_sector_edges() {
        let (_, g) = graph("tjz", 4, Some(BathSide::None));
        assert!(g.edges().iter().all(|e| e.src == e.dst));
    }

    #[test]
    fn edge_csv_has_header() {
        let (_, g) = graph("tjz", 2, None);
        let mut buf = Vec::new();
        g.write_edge_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("src,dst,prob,mu_src\n"));
    }

    #[test]
    fn rational_rows_round_trip() {
        use num_bigint::BigInt;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let rows = vec![
            vec![(0, half.clone()), (1, half.clone())],
            vec![(0, half.clone()), (1, half)],
        ];
        let labels = vec![
            SectorLabel::State { letters: vec![0] },
            SectorLabel::State { letters: vec![1] },
        ];
        let g = KrylovGraph::from_rational_rows(vec![1, 1], labels, &rows).unwrap();
        assert_eq!(g.denominator(), 2);
        assert!(g.is_stochastic() && g.is_reversible());
    }
}
