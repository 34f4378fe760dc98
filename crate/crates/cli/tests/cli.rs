use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fragsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragsim"))
        .args(args)
        .env_remove("FRAGSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn body(csv: &str) -> String {
    csv.lines().skip(1).collect::<Vec<_>>().join("\n")
}

fn experiments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

#[test]
fn tjz_four_site_sectors() {
    let text = stdout(&fragsim(&["sectors", "--model", "tjz", "--L", "4"]));
    let mut lines = text.lines();
    let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(meta["meta"]["spec"].as_str().unwrap().len(), 64);
    let sizes: Vec<u64> = lines
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["size"]
                .as_u64()
                .unwrap()
        })
        .collect();
    assert_eq!(sizes.len(), 31);
    assert_eq!(sizes.iter().sum::<u64>(), 81);
}

#[test]
fn east_region_conductance() {
    let text = stdout(&fragsim(&[
        "conductance",
        "--model",
        "east",
        "--N0",
        "2",
        "--convention",
        "combinatorial",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# fragsim "));
    assert_eq!(lines[1], "model,L,convention,cut_id,phi,cheeger_bound");
    let row: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(row[..4], ["east", "4", "combinatorial", "region:N0=2"]);
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.2);
}

#[test]
fn same_seed_same_body() {
    let args = [
        "simulate",
        "--model",
        "breakdown",
        "--L",
        "8",
        "--mode",
        "krylov-walk",
        "--steps",
        "10^3",
        "--traj",
        "40",
        "--seed",
        "9",
    ];
    let a = stdout(&fragsim(&args));
    let b = stdout(&fragsim(&args));
    let c = Command::new(env!("CARGO_BIN_EXE_fragsim"))
        .args(args)
        .env("FRAGSIM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(body(&a), body(&b));
    assert_eq!(body(&a), body(&stdout(&c)));
    assert!(a.lines().next().unwrap().contains("seed=9"));
    assert_eq!(
        a.lines().nth(1).unwrap(),
        "t,observable,mean,stderr,n_traj,model,L,mode,k,seed"
    );
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "10";
    assert_ne!(body(&a), body(&stdout(&fragsim(&other))));
}

#[test]
fn stored_spec_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &spec,
        format!(
            r#"{{"command":"simulate","model":"dipole3","L":8,"steps":200,"traj":16,"seed":4,"obs":["Q","N"],"out":{:?}}}"#,
            out.display().to_string()
        ),
    )
    .unwrap();
    let cfg = spec.to_str().unwrap();
    stdout(&fragsim(&["--config", cfg]));
    let first = std::fs::read_to_string(&out).unwrap();
    stdout(&fragsim(&["--config", cfg]));
    let second = std::fs::read_to_string(&out).unwrap();
    assert_eq!(body(&first), body(&second));
    assert!(first.lines().any(|l| l.contains(",N,")));
    stdout(&fragsim(&["--config", cfg, "simulate", "--seed", "5"]));
    let third = std::fs::read_to_string(&out).unwrap();
    assert_ne!(body(&first), body(&third));
    assert!(third.starts_with("# fragsim") && third.lines().next().unwrap().contains("seed=5"));
}

#[test]
fn errors_are_json() {
    let cases: [(&[&str], &str); 4] = [
        (&["sectors", "--model", "nope", "--L", "4"], "unknown_model"),
        (
            &["sectors", "--model", "breakdown", "--L", "40"],
            "state_space_too_large",
        ),
        (
            &[
                "conductance",
                "--model",
                "breakdown",
                "--L",
                "8",
                "--strategy",
                "exhaustive",
            ],
            "exhaustive_too_large",
        ),
        (&["sectors", "--model", "tjz", "--L", "4", "--bogus"], "usage"),
    ];
    for (args, kind) in cases {
        let out = fragsim(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"], kind, "{args:?}");
        assert!(err["message"].is_string());
    }
}

#[test]
fn exact_series_matches_graph_passage() {
    let text = stdout(&fragsim(&[
        "simulate",
        "--model",
        "tjz",
        "--L",
        "6",
        "--mode",
        "krylov-walk",
        "--exact",
        "--steps",
        "400",
        "--schedule",
        "every:1",
        "--gamma",
        "0.1",
    ]));
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 401);
    let first = rows.iter().find(|r| r[2].parse::<f64>().unwrap().abs() <= 0.1).unwrap();
    assert_eq!(first[0], "283");
}

#[test]
fn spectrum_reports_consistent_gap() {
    let text = stdout(&fragsim(&["spectrum", "--model", "tjz", "--L", "4"]));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let s = &doc["spectra"][0];
    assert_eq!(s["nodes"], 31);
    assert_eq!(s["gap_within_2phi"], true);
    assert!(s["gap"].as_f64().unwrap() > 0.0);
    assert!((s["phi"].as_f64().unwrap() - 1.0 / 60.0).abs() < 1e-15);
}

#[test]
fn graph_edges_are_stochastic() {
    let text = stdout(&fragsim(&["graph", "--model", "breakdown", "--L", "4"]));
    let mut out_mass = std::collections::BTreeMap::<u32, f64>::new();
    for line in text.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        *out_mass.entry(f[0].parse().unwrap()).or_default() += f[2].parse::<f64>().unwrap();
    }
    assert_eq!(out_mass.len(), 31);
    assert!(out_mass.values().all(|&p| (p - 1.0).abs() < 1e-12));
}

#[test]
fn figures_data_quick() {
    let dir = tempfile::tempdir().unwrap();
    let out = fragsim(&["figures-data", "--quick", "--out", dir.path().to_str().unwrap()]);
    stdout(&out);
    for name in [
        "breakdown_Q.csv",
        "tjz_tm.csv",
        "dipole3_Q_left.csv",
        "dipole3_Q_both.csv",
        "east_Nx.csv",
        "dipole4_N.csv",
        "sector_sizes.csv",
        "manifest.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let tm = std::fs::read_to_string(dir.path().join("tjz_tm.csv")).unwrap();
    assert_eq!(tm.lines().nth(1).unwrap(), "model,L,bath,gamma,t_m,censored,method");
    assert!(tm.lines().any(|l| l == "tjz,6,right,0.1,283,false,sector-graph"));
    let east = std::fs::read_to_string(dir.path().join("east_Nx.csv")).unwrap();
    assert!(east.lines().any(|l| l.contains(",x,")));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"].as_array().unwrap().len(), 7);
}

#[test]
fn checked_in_specs_load() {
    let mut n = 0;
    for entry in std::fs::read_dir(experiments()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["command"].is_string(), "{}", path.display());
        n += 1;
    }
    assert!(n >= 10);
}
