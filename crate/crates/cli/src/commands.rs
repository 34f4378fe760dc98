use std::io::Write;

use anyhow::{bail, Result};
use serde_json::{json, Value};

use fragsim::chain::{Model, SectorLabel};
use fragsim::dynamics::{
    graph_observable_series, relaxation_time, FullSpaceChain, Mode, ObservableSeries, Passage, SimulationConfig,
    Simulator, Threshold,
};
use fragsim::fit::{log_linear_fit, power_law_fit, Fit};
use fragsim::krylov::{
    build_krylov_graph_with, enumerate_sectors, pack_sectors, EdgeConvention, KrylovDecomposition, KrylovGraph,
    PackingScheme,
};
use fragsim::spectral::{
    cheeger_bound, cut_conductance, cut_family, min_conductance_with, ratio_f64, spectral_gap, Cut, CutFamily, MinCut,
    Strategy, EXHAUSTIVE_CAP,
};
use fragsim::Executor;

use crate::output;
use crate::spec::{ExperimentSpec, FitKind, FitSpec, UsageError};

pub const SERIES_COLUMNS: &str = "t,observable,mean,stderr,n_traj,model,L,mode,k,seed";

pub fn sectors(spec: &ExperimentSpec) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    writeln!(out, "{}", json!({ "meta": output::meta_json(spec) }))?;
    for len in spec.lengths()? {
        let model = spec.build_model(len)?;
        enumerate_sectors(&model)?.write_jsonl(&mut out)?;
    }
    output::emit(spec.out.as_deref(), &out)?;
    Ok(())
}

fn sector_graph(model: &Model, spec: &ExperimentSpec, exec: Executor) -> Result<(KrylovDecomposition, KrylovGraph)> {
    let decomp = enumerate_sectors(model)?;
    let graph = build_krylov_graph_with(&decomp, model.bath(), exec)?;
    let graph = match &spec.pack {
        Some(s) => pack_sectors(&graph, s.parse::<PackingScheme>()?)?,
        None => graph,
    };
    Ok((decomp, graph))
}

fn single_length(spec: &ExperimentSpec) -> Result<usize> {
    match spec.lengths()?[..] {
        [len] => Ok(len),
        _ => bail!(UsageError("this command takes a single chain length".into())),
    }
}

pub fn graph(spec: &ExperimentSpec, exec: Executor) -> Result<()> {
    let model = spec.build_model(single_length(spec)?)?;
    let (_, graph) = sector_graph(&model, spec, exec)?;
    let mut out: Vec<u8> = Vec::new();
    writeln!(out, "{}", output::header_line(spec))?;
    graph.write_edge_csv(&mut out)?;
    output::emit(spec.out.as_deref(), &out)?;
    Ok(())
}

fn series_for(model: &Model, spec: &ExperimentSpec, exec: Executor) -> Result<Vec<ObservableSeries>> {
    let mode = spec.mode()?;
    let observables = spec.observables(model)?;
    let initial = spec.initial(model)?;
    let steps = spec.steps.unwrap_or(1000);
    let needs_sectors = !matches!(mode, Mode::Local { .. });
    let decomp = if needs_sectors {
        Some(enumerate_sectors(model)?)
    } else {
        None
    };
    let graph = match (&decomp, mode) {
        (Some(d), Mode::KrylovWalk) => Some(build_krylov_graph_with(d, model.bath(), exec)?),
        _ => None,
    };
    if spec.exact.unwrap_or(false) {
        let times = spec.schedule()?.times(steps);
        if let (Some(d), Some(g)) = (&decomp, &graph) {
            return observables
                .iter()
                .map(|&o| Ok(graph_observable_series(model, d, g, &initial, o, &times)?))
                .collect();
        }
        let chain = FullSpaceChain::new(model, mode, decomp.as_ref())?;
        return Ok(chain.measure(&chain.point_mass(&initial), &times, &observables)?);
    }
    let config = SimulationConfig {
        mode,
        steps,
        trajectories: spec.traj.unwrap_or(100),
        seed: spec.seed(),
        observables,
        schedule: spec.schedule()?,
    };
    let sim = Simulator::new(model, config, decomp.as_ref(), graph.as_ref())?;
    Ok(sim.run(&initial, exec)?)
}

fn write_series(out: &mut dyn Write, model: &Model, mode: Mode, seed: u64, series: &[ObservableSeries]) -> Result<()> {
    for s in series {
        for (j, t) in s.t.iter().enumerate() {
            writeln!(
                out,
                "{t},{},{},{},{},{},{},{},{},{seed}",
                s.observable,
                s.mean[j],
                s.stderr[j],
                s.n_traj,
                model.name(),
                model.len(),
                mode.name(),
                mode.k_label(),
            )?;
        }
    }
    Ok(())
}

pub fn apply_fit(fit: &FitSpec, x: &[f64], y: &[f64]) -> Result<Fit> {
    Ok(match fit.kind {
        FitKind::Power => power_law_fit(x, y, fit.lo, fit.hi)?,
        FitKind::LogLinear => log_linear_fit(x, y, fit.lo, fit.hi)?,
    })
}

fn passage_json(p: Passage) -> Value {
    match p {
        Passage::Reached(t) => json!({ "t": t, "censored": false }),
        Passage::Censored { horizon } => json!({ "t": horizon, "censored": true }),
    }
}

/// Runs every requested length, writing the series CSV body to `out`, and
/// returns the summary.
pub fn simulate_into(spec: &ExperimentSpec, exec: Executor, out: &mut dyn Write) -> Result<Value> {
    let lengths = spec.lengths()?;
    let mode = spec.mode()?;
    writeln!(out, "{SERIES_COLUMNS}")?;
    let fit_over_sizes = spec.gamma.is_some() && lengths.len() > 1;
    let mut runs = Vec::new();
    let mut tm = Vec::new();
    for &len in &lengths {
        let model = spec.build_model(len)?;
        let series = series_for(&model, spec, exec)?;
        write_series(out, &model, mode, spec.seed(), &series)?;
        let mut entry = json!({ "L": len });
        if let Some(gamma) = spec.gamma {
            let mut times = serde_json::Map::new();
            for (k, s) in series.iter().enumerate() {
                let eq = s.observable.equilibrium(&model)?;
                let p = relaxation_time(s, eq, Threshold::Absolute(gamma))?;
                if k == 0 {
                    tm.push((len, p));
                }
                times.insert(s.observable.to_string(), passage_json(p));
            }
            entry["relaxation"] = Value::Object(times);
        }
        if let (Some(fit), false) = (&spec.fit, fit_over_sizes) {
            let mut fits = serde_json::Map::new();
            for s in &series {
                let t: Vec<f64> = s.t.iter().map(|&v| v as f64).collect();
                fits.insert(
                    s.observable.to_string(),
                    serde_json::to_value(apply_fit(fit, &t, &s.mean)?)?,
                );
            }
            entry["fit"] = Value::Object(fits);
        }
        runs.push(entry);
    }
    let mut summary = json!({ "runs": runs });
    if let (Some(fit), true) = (&spec.fit, fit_over_sizes) {
        if let Some((len, _)) = tm.iter().find(|(_, p)| p.value().is_none()) {
            bail!("relaxation time censored at L={len}; raise --steps");
        }
        let x: Vec<f64> = tm.iter().map(|(l, _)| *l as f64).collect();
        let y: Vec<f64> = tm.iter().map(|(_, p)| p.value().unwrap_or(0) as f64).collect();
        summary["size_fit"] = serde_json::to_value(apply_fit(fit, &x, &y)?)?;
    }
    Ok(summary)
}

pub fn simulate(spec: &ExperimentSpec, exec: Executor) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    writeln!(out, "{}", output::header_line(spec))?;
    let summary = simulate_into(spec, exec, &mut out)?;
    output::emit(spec.out.as_deref(), &out)?;
    if spec.gamma.is_some() || spec.fit.is_some() {
        output::summary(spec, &summary)?;
    }
    Ok(())
}

fn default_family(graph: &KrylovGraph) -> Option<CutFamily> {
    match graph.labels().first()? {
        SectorLabel::BreakdownCharge { .. } => Some(CutFamily::LinePrefixes),
        SectorLabel::SpinPattern { .. } | SectorLabel::ReducedWord { .. } | SectorLabel::Dipole { .. } => {
            Some(CutFamily::Cones)
        }
        SectorLabel::East { .. } | SectorLabel::EastPacked { .. } => Some(CutFamily::EastHalfPlanes),
        _ => None,
    }
}

fn region_cut(graph: &KrylovGraph, convention: EdgeConvention) -> Result<MinCut> {
    let family = cut_family(graph, CutFamily::EastHalfPlanes)?;
    let Some((id, nodes)) = family.into_iter().find(|(id, _)| id.starts_with("region")) else {
        bail!(UsageError("no east region cut for this length".into()));
    };
    let cut = Cut::new(graph, &nodes)?;
    let phi = cut_conductance(graph, &cut, convention);
    Ok(MinCut {
        cut_id: id,
        phi_f64: ratio_f64(&phi),
        phi,
        cut,
        convention,
    })
}

/// The cut a conductance query reports, according to `--strategy`.
pub fn chosen_cut(
    spec: &ExperimentSpec,
    graph: &KrylovGraph,
    convention: EdgeConvention,
    exec: Executor,
) -> Result<MinCut> {
    let family = |name: &str| -> Result<CutFamily> {
        Ok(serde_json::from_value(Value::String(name.into()))
            .map_err(|_| UsageError(format!("unknown strategy `{name}`")))?)
    };
    let strategy = match spec.strategy.as_deref().unwrap_or("auto") {
        "auto" => {
            if spec.n0.is_some()
                && matches!(
                    graph.labels().first(),
                    Some(SectorLabel::East { .. } | SectorLabel::EastPacked { .. })
                )
            {
                return region_cut(graph, convention);
            }
            if graph.node_count() <= EXHAUSTIVE_CAP {
                Strategy::Exhaustive
            } else {
                match default_family(graph) {
                    Some(f) => Strategy::Family(f),
                    None => Strategy::Exhaustive,
                }
            }
        }
        "region" => return region_cut(graph, convention),
        "exhaustive" => Strategy::Exhaustive,
        other => Strategy::Family(family(other)?),
    };
    Ok(min_conductance_with(graph, strategy, convention, exec)?)
}

fn convention(spec: &ExperimentSpec) -> Result<EdgeConvention> {
    Ok(match &spec.convention {
        Some(c) => c.parse()?,
        None => EdgeConvention::default(),
    })
}

pub fn conductance(spec: &ExperimentSpec, exec: Executor) -> Result<()> {
    let convention = convention(spec)?;
    let mut out: Vec<u8> = Vec::new();
    writeln!(out, "{}", output::header_line(spec))?;
    writeln!(out, "model,L,convention,cut_id,phi,cheeger_bound")?;
    for len in spec.lengths()? {
        let model = spec.build_model(len)?;
        let (_, graph) = sector_graph(&model, spec, exec)?;
        let best = chosen_cut(spec, &graph, convention, exec)?;
        writeln!(
            out,
            "{},{len},{convention},{},{},{}",
            model.name(),
            best.cut_id,
            best.phi_f64,
            cheeger_bound(best.phi_f64)
        )?;
    }
    output::emit(spec.out.as_deref(), &out)?;
    Ok(())
}

pub fn spectrum(spec: &ExperimentSpec, exec: Executor) -> Result<()> {
    let mut reports = Vec::new();
    for len in spec.lengths()? {
        let model = spec.build_model(len)?;
        let (_, graph) = sector_graph(&model, spec, exec)?;
        let gap = spectral_gap(&graph)?;
        let cut = chosen_cut(spec, &graph, EdgeConvention::Probabilistic, exec)?;
        reports.push(json!({
            "model": model.name(),
            "L": len,
            "nodes": graph.node_count(),
            "lambda2": gap.lambda2,
            "gap": gap.gap,
            "relaxation_time": gap.relaxation_time,
            "method": gap.method,
            "iterations": gap.iterations,
            "cut_id": cut.cut_id,
            "phi": cut.phi_f64,
            "cheeger_bound": cheeger_bound(cut.phi_f64),
            "gap_within_2phi": gap.consistent_with(cut.phi_f64),
        }));
    }
    let mut out: Vec<u8> = Vec::new();
    let doc = json!({ "meta": output::meta_json(spec), "spectra": reports });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    output::emit(spec.out.as_deref(), &out)?;
    Ok(())
}
