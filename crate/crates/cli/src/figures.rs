use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use fragsim::dynamics::{graph_first_passage, Observable, Passage};
use fragsim::fit::power_law_fit;
use fragsim::krylov::{build_krylov_graph_with, enumerate_sectors};
use fragsim::Executor;

use crate::commands::{self, simulate_into};
use crate::output;
use crate::spec::{Command, ExperimentSpec, FitKind, FitSpec};

const TM_GAMMA: f64 = 0.1;
const ONE_BATH_HORIZON: u64 = 100_000_000;

struct Series {
    file: &'static str,
    spec: ExperimentSpec,
}

fn fit(kind: FitKind, lo: f64, hi: f64) -> Option<FitSpec> {
    Some(FitSpec { kind, lo, hi })
}

fn series_spec(model: &str, len: usize, mode: &str, obs: &[&str], steps: u64, traj: u64, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        command: Some(Command::Simulate),
        model: Some(model.into()),
        len: Some(len),
        mode: Some(mode.into()),
        k: Some(1),
        steps: Some(steps),
        traj: Some(traj),
        seed: Some(seed),
        obs: Some(obs.iter().map(|s| s.to_string()).collect()),
        schedule: Some("log:20".into()),
        ..Default::default()
    }
}

fn series_plan(quick: bool) -> Vec<Series> {
    let (long, short) = if quick { (10_000, 1_000) } else { (1_000_000, 100_000) };
    let scale = |traj: u64| if quick { (traj / 8).max(8) } else { traj };
    let hi = short as f64;
    let mut breakdown = series_spec("breakdown", 12, "krylov-walk", &["Q"], long, scale(256), 1);
    breakdown.fit = fit(FitKind::Power, if quick { 1e1 } else { 1e3 }, long as f64 / 10.0);
    let dipole3 = |bath: &str| {
        let mut s = series_spec(
            "dipole3",
            if quick { 12 } else { 24 },
            "local",
            &["Q"],
            short,
            scale(128),
            3,
        );
        s.bath = Some(bath.into());
        s.fit = fit(FitKind::LogLinear, if quick { 1e1 } else { 1e2 }, hi);
        s
    };
    let mut east = series_spec(
        "east",
        if quick { 16 } else { 64 },
        "local",
        &["N", "x"],
        short,
        scale(256),
        5,
    );
    east.fit = fit(FitKind::Power, 1e1, hi);
    let mut dipole4 = series_spec(
        "dipole4",
        if quick { 16 } else { 48 },
        "local",
        &["N"],
        short,
        scale(256),
        5,
    );
    dipole4.fit = fit(FitKind::Power, 1e1, hi);
    vec![
        Series {
            file: "breakdown_Q.csv",
            spec: breakdown,
        },
        Series {
            file: "dipole3_Q_left.csv",
            spec: dipole3("left"),
        },
        Series {
            file: "dipole3_Q_both.csv",
            spec: dipole3("both"),
        },
        Series {
            file: "east_Nx.csv",
            spec: east,
        },
        Series {
            file: "dipole4_N.csv",
            spec: dipole4,
        },
    ]
}

fn tjz_tm(dir: &Path, parent: &ExperimentSpec, quick: bool, exec: Executor) -> Result<Value> {
    let mut out = output::open_in(dir, "tjz_tm.csv")?;
    writeln!(out, "{}", output::header_line(parent))?;
    writeln!(out, "model,L,bath,gamma,t_m,censored,method")?;
    let row = |out: &mut dyn Write, len: usize, bath: &str, p: Passage, method: &str| -> Result<()> {
        let (t, censored) = match p {
            Passage::Reached(t) => (t, false),
            Passage::Censored { horizon } => (horizon, true),
        };
        writeln!(out, "tjz,{len},{bath},{TM_GAMMA},{t},{censored},{method}")?;
        Ok(())
    };
    let sizes: Vec<usize> = if quick {
        vec![8, 10, 12]
    } else {
        (8..=20).step_by(2).collect()
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &len in &sizes {
        let mut spec = series_spec(
            "tjz",
            len,
            "local",
            &["m"],
            2 * (len as u64).pow(3),
            if quick { 256 } else { 2048 },
            7,
        );
        spec.bath = Some("both".into());
        spec.schedule = Some("every:1".into());
        spec.gamma = Some(TM_GAMMA);
        let summary = simulate_into(&spec, exec, &mut std::io::sink())?;
        let rel = &summary["runs"][0]["relaxation"]["m"];
        let t = rel["t"].as_u64().context("missing relaxation time")?;
        let p = if rel["censored"].as_bool() == Some(true) {
            Passage::Censored { horizon: t }
        } else {
            Passage::Reached(t)
        };
        if let Passage::Reached(t) = p {
            xs.push(len as f64);
            ys.push(t as f64);
        }
        row(&mut out, len, "both", p, "trajectories")?;
    }
    let one_bath: &[usize] = if quick { &[6, 8] } else { &[6, 8, 10] };
    for &len in one_bath {
        let spec = ExperimentSpec {
            model: Some("tjz".into()),
            ..Default::default()
        };
        let model = spec.build_model(len)?;
        let decomp = enumerate_sectors(&model)?;
        let graph = build_krylov_graph_with(&decomp, model.bath(), exec)?;
        let init = model.parse_config(&"u".repeat(len))?;
        let p = graph_first_passage(
            &model,
            &decomp,
            &graph,
            &init,
            Observable::Magnetization,
            0.0,
            TM_GAMMA,
            ONE_BATH_HORIZON,
        )?;
        row(&mut out, len, &model.bath().side.to_string(), p, "sector-graph")?;
    }
    out.flush()?;
    let lo = sizes[0] as f64;
    let hi = sizes[sizes.len() - 1] as f64;
    let two_bath_fit = power_law_fit(&xs, &ys, lo, hi).ok();
    Ok(json!({
        "file": "tjz_tm.csv",
        "gamma": TM_GAMMA,
        "fit": { "kind": "power", "lo": lo, "hi": hi, "x": "L", "y": "t_m", "bath": "both" },
        "result": two_bath_fit,
    }))
}

fn sector_sizes(dir: &Path, parent: &ExperimentSpec, quick: bool) -> Result<Value> {
    let len = if quick { 6 } else { 10 };
    let models: [(&str, Option<u8>); 6] = [
        ("breakdown", None),
        ("tjz", None),
        ("pairflip", Some(3)),
        ("dipole3", None),
        ("dipole4", None),
        ("east", None),
    ];
    let mut out = output::open_in(dir, "sector_sizes.csv")?;
    writeln!(out, "{}", output::header_line(parent))?;
    writeln!(out, "model,L,sector_id,size")?;
    for (name, q) in models {
        let spec = ExperimentSpec {
            model: Some(name.into()),
            q,
            ..Default::default()
        };
        let model = spec.build_model(len)?;
        let decomp = enumerate_sectors(&model)?;
        for (i, size) in decomp.sizes().iter().enumerate() {
            writeln!(out, "{name},{len},{i},{size}")?;
        }
    }
    out.flush()?;
    Ok(json!({ "file": "sector_sizes.csv", "L": len }))
}

pub fn figures_data(spec: &ExperimentSpec, exec: Executor) -> Result<()> {
    let dir = PathBuf::from(spec.out.as_deref().unwrap_or("figures-data"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let quick = spec.quick.unwrap_or(false);
    let mut entries = Vec::new();
    for s in series_plan(quick) {
        let mut out = output::open_in(&dir, s.file)?;
        writeln!(out, "{}", output::header_line(&s.spec))?;
        let summary = simulate_into(&s.spec, exec, &mut out)?;
        out.flush()?;
        entries.push(json!({ "file": s.file, "spec": s.spec, "fit": s.spec.fit, "result": summary["runs"][0]["fit"] }));
    }
    entries.push(tjz_tm(&dir, spec, quick, exec)?);
    entries.push(sector_sizes(&dir, spec, quick)?);
    let manifest = json!({
        "meta": output::meta_json(spec),
        "columns": commands::SERIES_COLUMNS,
        "files": entries,
    });
    let mut out = output::open_in(&dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut out, &manifest)?;
    writeln!(out)?;
    out.flush()?;
    output::summary(
        spec,
        &json!({ "out": dir.display().to_string(), "files": manifest["files"].as_array().map_or(0, |a| a.len()) }),
    )?;
    Ok(())
}
