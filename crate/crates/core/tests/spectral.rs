use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fragsim::chain::*;
use fragsim::dynamics::{thermalization_time_full, thermalization_time_nonlocal, FullSpaceChain, Mode};
use fragsim::krylov::*;
use fragsim::spectral::*;

fn model(name: &str, len: usize) -> Model {
    make_model(name, len, &ModelParams::default()).unwrap()
}

fn graph(m: &Model) -> (KrylovDecomposition, KrylovGraph) {
    let d = enumerate_sectors(m).unwrap();
    let g = build_krylov_graph(&d, m.bath()).unwrap();
    (d, g)
}

fn complete(n: usize) -> KrylovGraph {
    let labels = (0..n).map(|i| SectorLabel::State { letters: vec![i as u8] }).collect();
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            edges.push(Edge {
                src: a,
                dst: b,
                flux: 1,
                pairs: 1,
            });
        }
    }
    KrylovGraph::from_edges(vec![1; n], labels, n as u128, edges)
}

/// Two `n`-cliques of lazy uniform moves joined by one edge of weight `eps / denom`.
fn cliques(n: usize, eps: u128) -> KrylovGraph {
    let denom = 1_000_000u128;
    let labels = (0..2 * n)
        .map(|i| SectorLabel::State { letters: vec![i as u8] })
        .collect();
    let mut edges = Vec::new();
    for a in 0..2 * n {
        let side = a / n;
        let mut stay = denom;
        for b in 0..2 * n {
            if b != a && b / n == side {
                edges.push(Edge {
                    src: a as u32,
                    dst: b as u32,
                    flux: denom / (2 * n as u128),
                    pairs: 1,
                });
                stay -= denom / (2 * n as u128);
            }
        }
        if a == n - 1 || a == n {
            let other = if a == n - 1 { n } else { n - 1 };
            edges.push(Edge {
                src: a as u32,
                dst: other as u32,
                flux: eps,
                pairs: 1,
            });
            stay -= eps;
        }
        edges.push(Edge {
            src: a as u32,
            dst: a as u32,
            flux: stay,
            pairs: 1,
        });
    }
    KrylovGraph::from_edges(vec![1; 2 * n], labels, denom, edges)
}

#[test]
fn uniform_resampling_has_zero_lambda2() {
    let r = spectral_gap(&complete(6)).unwrap();
    assert!(r.lambda2.abs() < 1e-12);
}

#[test]
fn weakly_joined_cliques_approach_lambda2_one() {
    let mut last = 0.0;
    for eps in [10_000u128, 1000, 100, 10, 1] {
        let g = cliques(8, eps);
        assert!(g.is_stochastic() && g.is_reversible());
        let r = spectral_gap(&g).unwrap();
        assert!(r.lambda2 > last);
        last = r.lambda2;
        let cut = Cut::new(&g, &(0..8).collect::<Vec<_>>()).unwrap();
        assert!(r.consistent_with(ratio_f64(&cut_conductance(&g, &cut, EdgeConvention::Probabilistic))));
    }
    assert!(1.0 - last < 1e-5);
}

#[test]
fn tjz_gap_respects_the_cone_cut() {
    let (_, g) = graph(&model("tjz", 4));
    let best = min_conductance(&g, Strategy::Family(CutFamily::Cones), EdgeConvention::Probabilistic).unwrap();
    assert_eq!(best.phi, Ratio::new(1, 60));
    let r = spectral_gap(&g).unwrap();
    assert!(r.relaxation_time >= 1.0 / (2.0 * best.phi_f64));
}

#[test]
fn conductance_is_invariant_under_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, len) in [("tjz", 4), ("breakdown", 3), ("dipole3", 4), ("east", 6)] {
        let (_, g) = graph(&model(name, len));
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut rng);
        let h = g.permuted(&perm);
        assert!(h.is_stochastic() && h.is_reversible());
        for size in 1..g.node_count() / 2 {
            let nodes: Vec<usize> = (0..size).map(|i| (i * 7) % g.node_count()).collect();
            let moved: Vec<usize> = nodes.iter().map(|&a| perm[a]).collect();
            for conv in [EdgeConvention::Probabilistic, EdgeConvention::Combinatorial] {
                let a = cut_conductance(&g, &Cut::new(&g, &nodes).unwrap(), conv);
                let b = cut_conductance(&h, &Cut::new(&h, &moved).unwrap(), conv);
                assert_eq!(a, b);
            }
        }
        if g.node_count() <= EXHAUSTIVE_CAP {
            let a = min_conductance(&g, Strategy::Exhaustive, EdgeConvention::Probabilistic).unwrap();
            let b = min_conductance(&h, Strategy::Exhaustive, EdgeConvention::Probabilistic).unwrap();
            assert_eq!(a.phi, b.phi);
        }
        let a = spectral_gap(&g).unwrap().lambda2;
        let b = spectral_gap(&h).unwrap().lambda2;
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn configuration_graph_is_no_better_connected() {
    for (name, len) in [
        ("breakdown", 2),
        ("tjz", 2),
        ("pairflip", 3),
        ("pairflip", 4),
        ("east", 3),
        ("east", 4),
    ] {
        let m = model(name, len);
        let (d, g) = graph(&m);
        let sector = min_conductance(&g, Strategy::Exhaustive, EdgeConvention::Probabilistic).unwrap();
        for mode in [Mode::SectorUniform, Mode::Local { sweeps: 1 }] {
            let h = FullSpaceChain::new(&m, mode, Some(&d))
                .unwrap()
                .configuration_graph()
                .unwrap();
            let full = min_conductance(&h, Strategy::Exhaustive, EdgeConvention::Probabilistic).unwrap();
            assert!(full.phi <= sector.phi, "{name} L={len} {mode:?}");
        }
    }
}

#[test]
fn line_prefixes_bound_the_exhaustive_minimum() {
    let (_, g) = graph(&model("breakdown", 3));
    let prefix = min_conductance(
        &g,
        Strategy::Family(CutFamily::LinePrefixes),
        EdgeConvention::Probabilistic,
    )
    .unwrap();
    let all = min_conductance(&g, Strategy::Exhaustive, EdgeConvention::Probabilistic).unwrap();
    assert!(prefix.phi >= all.phi);
    assert!(2 * all.cut.mass() <= g.total());
    let (_, g4) = graph(&model("breakdown", 4));
    assert!(matches!(
        min_conductance(&g4, Strategy::Exhaustive, EdgeConvention::Probabilistic),
        Err(fragsim::Error::ExhaustiveTooLarge { .. })
    ));
    let p4 = min_conductance(
        &g4,
        Strategy::Family(CutFamily::LinePrefixes),
        EdgeConvention::Probabilistic,
    )
    .unwrap();
    assert!(p4.phi > Ratio::new(0, 1));
}

fn best_known_phi(g: &KrylovGraph) -> f64 {
    let mut best = f64::INFINITY;
    if g.node_count() <= EXHAUSTIVE_CAP {
        best = min_conductance(g, Strategy::Exhaustive, EdgeConvention::Probabilistic)
            .unwrap()
            .phi_f64;
    }
    for family in [CutFamily::Cones, CutFamily::LinePrefixes, CutFamily::EastHalfPlanes] {
        if let Ok(m) = min_conductance(g, Strategy::Family(family), EdgeConvention::Probabilistic) {
            best = best.min(m.phi_f64);
        }
    }
    for a in 0..g.node_count() {
        if let Ok(cut) = Cut::new(g, &[a]) {
            best = best.min(ratio_f64(&cut_conductance(g, &cut, EdgeConvention::Probabilistic)));
        }
    }
    best
}

#[test]
fn cheeger_bound_holds_for_all_models() {
    for name in ["breakdown", "tjz", "pairflip", "dipole3", "dipole4", "east"] {
        for len in 2..=5 {
            let Ok(base) = make_model(name, len, &ModelParams::default()) else {
                continue;
            };
            for side in [BathSide::Left, BathSide::Right, BathSide::Both] {
                let Ok(m) = base.clone().with_bath_side(side) else {
                    continue;
                };
                let (d, g) = graph(&m);
                let bound = cheeger_bound(best_known_phi(&g));
                let nonlocal = thermalization_time_nonlocal(&m, &d, &g, 1_000_000).unwrap();
                // non-ergodic chains never thermalize, which satisfies any bound
                let Some(t) = nonlocal.value() else { continue };
                let t = t as f64;
                assert!(bound <= t, "{name} L={len} {side:?}: {bound} > {t}");
                if m.state_count() <= 243 {
                    let chain = FullSpaceChain::new(&m, Mode::Local { sweeps: 1 }, None).unwrap();
                    let local = thermalization_time_full(&chain, 1_000_000).value().unwrap() as f64;
                    assert!(local >= t, "{name} L={len} {side:?}: local {local} < nonlocal {t}");
                }
            }
        }
    }
}
