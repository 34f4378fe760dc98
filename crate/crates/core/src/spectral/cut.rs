use std::cmp::Ordering;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::chain::SectorLabel;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::krylov::{EdgeConvention, KrylovGraph};

/// Largest node count searched exhaustively.
pub const EXHAUSTIVE_CAP: usize = 22;

/// A node subset with at most half the stationary mass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cut {
    nodes: Vec<usize>,
    mass: u64,
    complemented: bool,
}

impl Cut {
    /// Builds the cut, replacing `nodes` by its complement when it holds more
    /// than half the mass.
    pub fn new(graph: &KrylovGraph, nodes: &[usize]) -> Result<Self> {
        let n = graph.node_count();
        let mut inside = vec![false; n];
        for &a in nodes {
            if a >= n {
                return Err(Error::OutOfRange(format!("node {a} of {n}")));
            }
            inside[a] = true;
        }
        let mass: u64 = (0..n).filter(|&a| inside[a]).map(|a| graph.mass(a)).sum();
        if mass == 0 {
            return Err(Error::EmptyCut);
        }
        let complemented = 2 * mass > graph.total();
        if complemented {
            inside.iter_mut().for_each(|b| *b = !*b);
        }
        let nodes: Vec<usize> = (0..n).filter(|&a| inside[a]).collect();
        let mass = nodes.iter().map(|&a| graph.mass(a)).sum();
        if mass == 0 {
            return Err(Error::EmptyCut);
        }
        Ok(Self {
            nodes,
            mass,
            complemented,
        })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Unnormalized mass; `mu(R) = mass / total`.
    pub fn mass(&self) -> u64 {
        self.mass
    }

    pub fn complemented(&self) -> bool {
        self.complemented
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

fn membership(graph: &KrylovGraph, cut: &Cut) -> Vec<bool> {
    let mut inside = vec![false; graph.node_count()];
    for &a in cut.nodes() {
        inside[a] = true;
    }
    inside
}

/// Exact conductance of a cut.
pub fn cut_conductance(graph: &KrylovGraph, cut: &Cut, convention: EdgeConvention) -> Ratio<u128> {
    let inside = membership(graph, cut);
    let (mut flux, mut pairs) = (0u128, 0u128);
    for &a in cut.nodes() {
        for e in graph.out_edges(a) {
            if !inside[e.dst as usize] {
                flux += e.flux;
                pairs += e.pairs as u128;
            }
        }
    }
    match convention {
        EdgeConvention::Probabilistic => Ratio::new(flux, graph.denominator() * cut.mass() as u128),
        EdgeConvention::Combinatorial => Ratio::new(pairs, cut.mass() as u128),
    }
}

pub fn ratio_f64(r: &Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `ln 2 / (2 phi) - 1`, infinite for a disconnected chain.
pub fn cheeger_bound(phi: f64) -> f64 {
    if phi <= 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::LN_2 / (2.0 * phi) - 1.0
    }
}

/// Structured cut families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutFamily {
    /// Nodes whose label sequence starts with a fixed prefix (tJz spin
    /// patterns, pair-flip words, dipole defect patterns).
    Cones,
    /// Breakdown charges `Q <= k`.
    LinePrefixes,
    /// East half-planes in particle number and reach, plus the region
    /// `{1 <= N <= N0, x <= 2 N0 - 1}` with `N0 = L / 2`.
    EastHalfPlanes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Exhaustive,
    Family(CutFamily),
}

fn label_sequence(label: &SectorLabel) -> Option<Vec<u8>> {
    match label {
        SectorLabel::SpinPattern { spins } => Some(spins.iter().map(|s| *s as u8).collect()),
        SectorLabel::ReducedWord { word } => Some(word.clone()),
        SectorLabel::Dipole { defects, .. } => Some(defects.iter().map(|&d| (d + 1) as u8).collect()),
        _ => None,
    }
}

fn east_coords(label: &SectorLabel) -> Option<(usize, usize)> {
    match label {
        SectorLabel::East { regions } => Some((
            regions.iter().map(|r| r.particles).sum(),
            regions.last().map_or(0, |r| r.right),
        )),
        SectorLabel::EastPacked { particles, reach } => Some((*particles, *reach)),
        _ => None,
    }
}

/// Named node sets of a family, in a fixed order. Empty sets are dropped.
pub fn cut_family(graph: &KrylovGraph, family: CutFamily) -> Result<Vec<(String, Vec<usize>)>> {
    let n = graph.node_count();
    let incompatible = || Error::IncompatibleScheme {
        scheme: format!("{family:?}"),
        model: graph.labels().first().map_or(String::new(), |l| l.to_string()),
    };
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    match family {
        CutFamily::Cones => {
            let seqs = graph
                .labels()
                .iter()
                .map(label_sequence)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(incompatible)?;
            let mut prefixes: Vec<Vec<u8>> = seqs
                .iter()
                .flat_map(|s| (1..=s.len()).map(move |k| s[..k].to_vec()))
                .collect();
            prefixes.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            prefixes.dedup();
            for p in prefixes {
                let nodes: Vec<usize> = (0..n).filter(|&a| seqs[a].starts_with(&p)).collect();
                let id = format!("cone:{}", p.iter().map(|c| c.to_string()).collect::<String>());
                out.push((id, nodes));
            }
        }
        CutFamily::LinePrefixes => {
            let mut q: Vec<(u64, usize)> = graph
                .labels()
                .iter()
                .enumerate()
                .map(|(a, l)| match l {
                    SectorLabel::BreakdownCharge { charge } => Some((*charge, a)),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(incompatible)?;
            q.sort_unstable();
            for k in 1..q.len() {
                out.push((
                    format!("prefix:Q<={}", q[k - 1].0),
                    q[..k].iter().map(|x| x.1).collect(),
                ));
                out.push((format!("suffix:Q>={}", q[k].0), q[k..].iter().map(|x| x.1).collect()));
            }
        }
        CutFamily::EastHalfPlanes => {
            let c = graph
                .labels()
                .iter()
                .map(east_coords)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(incompatible)?;
            let max_n = c.iter().map(|x| x.0).max().unwrap_or(0);
            let max_x = c.iter().map(|x| x.1).max().unwrap_or(0);
            let len = max_x;
            let n0 = len / 2;
            if n0 >= 1 {
                let region = (0..n)
                    .filter(|&a| c[a].0 >= 1 && c[a].0 <= n0 && c[a].1 < 2 * n0)
                    .collect();
                out.push((format!("region:N0={n0}"), region));
            }
            for k in 0..max_n {
                out.push((format!("N<={k}"), (0..n).filter(|&a| c[a].0 <= k).collect()));
            }
            for k in 0..max_x {
                out.push((format!("x<={k}"), (0..n).filter(|&a| c[a].1 <= k).collect()));
            }
        }
    }
    out.retain(|(_, s)| !s.is_empty() && s.len() < n);
    Ok(out)
}

/// Smallest conductance found and where.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinCut {
    pub cut_id: String,
    #[serde(skip)]
    pub phi: Ratio<u128>,
    pub phi_f64: f64,
    pub cut: Cut,
    pub convention: EdgeConvention,
}

fn less(a: &Ratio<u128>, b: &Ratio<u128>) -> bool {
    a.cmp(b) == Ordering::Less
}

/// Minimum conductance over all subsets (small graphs) or over a cut family.
pub fn min_conductance(graph: &KrylovGraph, strategy: Strategy, convention: EdgeConvention) -> Result<MinCut> {
    min_conductance_with(graph, strategy, convention, Executor::default())
}

pub fn min_conductance_with(
    graph: &KrylovGraph,
    strategy: Strategy,
    convention: EdgeConvention,
    exec: Executor,
) -> Result<MinCut> {
    match strategy {
        Strategy::Family(family) => {
            let mut best: Option<MinCut> = None;
            for (id, nodes) in cut_family(graph, family)? {
                let cut = Cut::new(graph, &nodes)?;
                let phi = cut_conductance(graph, &cut, convention);
                if best.as_ref().is_none_or(|b| less(&phi, &b.phi)) {
                    best = Some(MinCut {
                        cut_id: id,
                        phi_f64: ratio_f64(&phi),
                        phi,
                        cut,
                        convention,
                    });
                }
            }
            best.ok_or(Error::EmptyCut)
        }
        Strategy::Exhaustive => exhaustive(graph, convention, exec),
    }
}

fn exhaustive(graph: &KrylovGraph, convention: EdgeConvention, exec: Executor) -> Result<MinCut> {
    let n = graph.node_count();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::ExhaustiveTooLarge {
            nodes: n,
            cap: EXHAUSTIVE_CAP,
        });
    }
    if n < 2 {
        return Err(Error::EmptyCut);
    }
    let total = graph.total();
    let edges: Vec<(u32, u32, u128, u128)> = graph
        .edges()
        .iter()
        .filter(|e| e.src != e.dst)
        .map(|e| (e.src, e.dst, e.flux, e.pairs as u128))
        .collect();
    let masks = 1usize << n;
    let eval = |mask: usize| -> Option<Ratio<u128>> {
        let mass: u64 = (0..n).filter(|&a| mask >> a & 1 == 1).map(|a| graph.mass(a)).sum();
        if mass == 0 || 2 * mass > total {
            return None;
        }
        let mut num = 0u128;
        for &(s, d, f, p) in &edges {
            if mask >> s & 1 == 1 && mask >> d & 1 == 0 {
                num += match convention {
                    EdgeConvention::Probabilistic => f,
                    EdgeConvention::Combinatorial => p,
                };
            }
        }
        Some(match convention {
            EdgeConvention::Probabilistic => Ratio::new(num, graph.denominator() * mass as u128),
            EdgeConvention::Combinatorial => Ratio::new(num, mass as u128),
        })
    };
    let parts = exec.map_chunks(masks, 1 << 14, |range| {
        let mut best: Option<(Ratio<u128>, usize)> = None;
        for mask in range {
            if let Some(phi) = eval(mask) {
                if best.as_ref().is_none_or(|b| less(&phi, &b.0)) {
                    best = Some((phi, mask));
                }
            }
        }
        best
    });
    let mut best: Option<(Ratio<u128>, usize)> = None;
    for (phi, mask) in parts.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| less(&phi, &b.0)) {
            best = Some((phi, mask));
        }
    }
    let (phi, mask) = best.ok_or(Error::EmptyCut)?;
    let nodes: Vec<usize> = (0..n).filter(|&a| mask >> a & 1 == 1).collect();
    Ok(MinCut {
        cut_id: format!("mask:{mask:#x}"),
        phi_f64: ratio_f64(&phi),
        phi,
        cut: Cut::new(graph, &nodes)?,
        convention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_model, ModelParams};
    use crate::krylov::{build_krylov_graph, enumerate_sectors, Edge};

    fn two_node(p_num: u128, denom: u128) -> KrylovGraph {
        let labels = vec![
            SectorLabel::State { letters: vec![0] },
            SectorLabel::State { letters: vec![1] },
        ];
        let edges = vec![
            Edge {
                src: 0,
                dst: 0,
                flux: denom - p_num,
                pairs: 1,
            },
            Edge {
                src: 0,
                dst: 1,
                flux: p_num,
                pairs: 1,
            },
            Edge {
                src: 1,
                dst: 0,
                flux: p_num,
                pairs: 1,
            },
            Edge {
                src: 1,
                dst: 1,
                flux: denom - p_num,
                pairs: 1,
            },
        ];
        KrylovGraph::from_edges(vec![1, 1], labels, denom, edges)
    }

    #[test]
    fn two_nodes_give_p() {
        let g = two_node(3, 10);
        let m = min_conductance(&g, Strategy::Exhaustive, EdgeConvention::Probabilistic).unwrap();
        assert_eq!(m.phi, Ratio::new(3, 10));
        assert_eq!(m.cut.nodes(), &[0]);
    }

    #[test]
    fn complement_and_empty() {
        let g = two_node(3, 10);
        assert!(matches!(Cut::new(&g, &[]), Err(Error::EmptyCut)));
        assert!(matches!(Cut::new(&g, &[0, 1]), Err(Error::EmptyCut)));
    }

    #[test]
    fn disconnected_cut_is_zero() {
        let m = make_model("tjz", 3, &ModelParams::default())
            .unwrap()
            .with_bath_side(crate::chain::BathSide::None)
            .unwrap();
        let g = build_krylov_graph(&enumerate_sectors(&m).unwrap(), m.bath()).unwrap();
        let cut = Cut::new(&g, &[1]).unwrap();
        assert_eq!(
            cut_conductance(&g, &cut, EdgeConvention::Probabilistic),
            Ratio::new(0, 1)
        );
        assert_eq!(cheeger_bound(0.0), f64::INFINITY);
    }

    #[test]
    fn cheeger_examples() {
        assert!(cheeger_bound(std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        assert!((cheeger_bound(1.0 / 60.0) - (30.0 * std::f64::consts::LN_2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn tjz_l4_cone_family_minimizer() {
        let m = make_model("tjz", 4, &ModelParams::default()).unwrap();
        let g = build_krylov_graph(&enumerate_sectors(&m).unwrap(), m.bath()).unwrap();
        let best = min_conductance(&g, Strategy::Family(CutFamily::Cones), EdgeConvention::Probabilistic).unwrap();
        assert_eq!(best.phi, Ratio::new(1, 60));
        assert!(best.cut_id == "cone:0" || best.cut_id == "cone:1", "{}", best.cut_id);
    }

    #[test]
    fn executors_agree() {
        let m = make_model("breakdown", 3, &ModelParams::default()).unwrap();
        let g = build_krylov_graph(&enumerate_sectors(&m).unwrap(), m.bath()).unwrap();
        let a = min_conductance_with(
            &g,
            Strategy::Exhaustive,
            EdgeConvention::Probabilistic,
            Executor::Sequential,
        )
        .unwrap();
        let b = min_conductance_with(
            &g,
            Strategy::Exhaustive,
            EdgeConvention::Probabilistic,
            Executor::Parallel,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
