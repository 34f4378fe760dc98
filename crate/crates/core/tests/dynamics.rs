use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fragsim::chain::*;
use fragsim::dynamics::*;
use fragsim::krylov::*;
use fragsim::Executor;

fn model(name: &str, len: usize, side: BathSide) -> Model {
    make_model(name, len, &ModelParams::default())
        .unwrap()
        .with_bath_side(side)
        .unwrap()
}

fn config(mode: Mode, observables: Vec<Observable>, times: Vec<u64>, traj: u64, seed: u64) -> SimulationConfig {
    SimulationConfig {
        mode,
        steps: *times.last().unwrap(),
        trajectories: traj,
        seed,
        observables,
        schedule: Schedule::Times(times),
    }
}

fn within_sigma(sim: &ObservableSeries, exact: &ObservableSeries, k: f64) {
    assert_eq!(sim.t, exact.t);
    for i in 0..sim.t.len() {
        let dev = (sim.mean[i] - exact.mean[i]).abs();
        assert!(
            dev <= k * sim.stderr[i] + 1e-9,
            "{} at t={}: {} vs {} (se {})",
            sim.observable,
            sim.t[i],
            sim.mean[i],
            exact.mean[i],
            sim.stderr[i]
        );
    }
}

#[test]
fn local_trajectories_match_exact_evolution() {
    let times = vec![1, 2, 5, 10, 20, 50];
    for (name, len, side, init, obs) in [
        (
            "tjz",
            5,
            BathSide::Both,
            "uuuuu",
            vec![Observable::Magnetization, Observable::Particles],
        ),
        ("breakdown", 4, BathSide::Left, "0000", vec![Observable::Charge]),
        (
            "east",
            6,
            BathSide::Left,
            "100000",
            vec![Observable::Particles, Observable::Reach],
        ),
        ("dipole3", 5, BathSide::Left, "-----", vec![Observable::Charge]),
    ] {
        let m = model(name, len, side);
        let init = m.parse_config(init).unwrap();
        let mode = Mode::Local { sweeps: 1 };
        let sim = Simulator::new(&m, config(mode, obs.clone(), times.clone(), 4000, 21), None, None)
            .unwrap()
            .run(&init, Executor::Parallel)
            .unwrap();
        let chain = FullSpaceChain::new(&m, mode, None).unwrap();
        let mut exact_times = vec![0];
        exact_times.extend(&times);
        let exact = chain.measure(&chain.point_mass(&init), &exact_times, &obs).unwrap();
        for (s, e) in sim.iter().zip(&exact) {
            within_sigma(s, e, 3.0);
        }
    }
}

#[test]
fn sector_modes_agree_with_each_other_and_with_the_graph() {
    let m = model("breakdown", 6, BathSide::Left);
    let d = enumerate_sectors(&m).unwrap();
    let g = build_krylov_graph(&d, m.bath()).unwrap();
    let init = m.parse_config("000000").unwrap();
    let times = vec![1, 3, 10, 30, 100, 300];
    let mut exact_times = vec![0];
    exact_times.extend(&times);
    let exact = graph_observable_series(&m, &d, &g, &init, Observable::Charge, &exact_times).unwrap();
    for mode in [Mode::SectorUniform, Mode::KrylovWalk] {
        let sim = Simulator::new(
            &m,
            config(mode, vec![Observable::Charge], times.clone(), 4000, 5),
            Some(&d),
            Some(&g),
        )
        .unwrap()
        .run(&init, Executor::Parallel)
        .unwrap();
        within_sigma(&sim[0], &exact, 3.0);
    }
    let chain = FullSpaceChain::new(&m, Mode::SectorUniform, Some(&d)).unwrap();
    let full = chain
        .measure(&chain.point_mass(&init), &exact_times, &[Observable::Charge])
        .unwrap();
    for (a, b) in full[0].mean.iter().zip(&exact.mean) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn nonlocal_mode_without_bath_stays_in_its_sector() {
    for name in ["tjz", "dipole3", "east", "breakdown"] {
        let m = model(name, 7, BathSide::None);
        let d = enumerate_sectors(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for start in (0..d.total()).step_by(97) {
            let mut letters = d.configuration(start).into_letters();
            let s = d.sector_of_index(start);
            let mut visited = std::collections::HashSet::new();
            for _ in 0..50 {
                step(&m, Mode::SectorUniform, Some(&d), &mut letters, &mut rng).unwrap();
                assert_eq!(d.sector_of(&Configuration::new(letters.clone())), s);
                visited.insert(letters.clone());
            }
            assert!(visited.len() as u64 <= d.size(s));
        }
    }
}

#[test]
fn runs_are_reproducible_and_executor_independent() {
    let m = model("tjz", 10, BathSide::Both);
    let init = m.parse_config(&"u".repeat(10)).unwrap();
    let cfg = |seed| SimulationConfig {
        mode: Mode::Local { sweeps: 2 },
        steps: 500,
        trajectories: 300,
        seed,
        observables: vec![Observable::Magnetization],
        schedule: Schedule::Log(10),
    };
    let run = |seed, exec| {
        Simulator::new(&m, cfg(seed), None, None)
            .unwrap()
            .run(&init, exec)
            .unwrap()
    };
    let a = run(4, Executor::Parallel);
    assert_eq!(a, run(4, Executor::Parallel));
    assert_eq!(a, run(4, Executor::Sequential));
    assert_ne!(a, run(5, Executor::Parallel));
}

#[test]
fn exact_evolution_conserves_mass_and_contracts() {
    for (name, len) in [("tjz", 3), ("breakdown", 3), ("dipole3", 3), ("pairflip", 4)] {
        let m = model(name, len, BathSide::Left);
        let d = enumerate_sectors(&m).unwrap();
        for mode in [Mode::Local { sweeps: 1 }, Mode::SectorUniform] {
            let chain = FullSpaceChain::new(&m, mode, Some(&d)).unwrap();
            let mut p = vec![BigRational::zero(); chain.size()];
            p[1] = BigRational::one();
            let mut last = l1_to_uniform(&p);
            for _ in 0..10 {
                p = evolve_distribution(&chain, &p, 1);
                assert!(p.iter().fold(BigRational::zero(), |a, x| a + x).is_one());
                let now = l1_to_uniform(&p);
                assert!(now <= last);
                last = now;
            }
        }
    }
}

#[test]
fn short_horizons_are_censored() {
    let m = model("tjz", 8, BathSide::Right);
    let d = enumerate_sectors(&m).unwrap();
    let g = build_krylov_graph(&d, m.bath()).unwrap();
    let init = m.parse_config(&"u".repeat(8)).unwrap();
    let p = graph_first_passage(&m, &d, &g, &init, Observable::Magnetization, 0.0, 0.1, 100).unwrap();
    assert_eq!(p, Passage::Censored { horizon: 100 });
    assert_eq!(p.value(), None);
}
