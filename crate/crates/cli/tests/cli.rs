use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use toda_cli::{ExperimentConfig, Preset};

fn toda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toda"))
        .args(args)
        .output()
        .unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn identities_pass_and_write_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = toda(&["run", "identities", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&dir.path().join("report.csv"));
    assert!(csv.starts_with("config_hash,eps,metric,value,tolerance,pass\n"));
    // A, B, C for N = 2..8 plus G2, three checks each
    assert_eq!(csv.matches("alpha_identity[").count(), 22);
    assert!(!csv.contains(",false\n"));
    let json: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("report.json"))).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(
        json["rows"].as_array().unwrap().len(),
        csv.lines().count() - 1
    );
}

#[test]
fn solve_at_one_eps_lands_near_the_limit_masses() {
    let dir = tempfile::tempdir().unwrap();
    let out = toda(&[
        "run",
        "solve",
        "--eps",
        "1e-3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("report.json"))).unwrap();
    let rows = json["rows"].as_array().unwrap();
    let value = |m: &str| {
        rows.iter().find(|r| r["metric"] == m).unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    let pi = std::f64::consts::PI;
    assert!((value("mass[1]") / (4.0 * pi) - 1.0).abs() < 0.05);
    assert!((value("mass[2]") / (8.0 * pi) - 1.0).abs() < 0.05);
    assert!(value("final_residual") < 1e-8);
}

#[test]
fn malformed_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("bad.toml");
    for text in [
        "[problem]\npreset = \"solve\"\n",
        &ExperimentConfig::preset(Preset::Solve)
            .to_toml()
            .replace("[surface]\n", "[surface]\ncolour = \"red\"\n"),
        &ExperimentConfig::preset(Preset::Solve)
            .to_toml()
            .replace("k = 3", "k = 1"),
    ] {
        std::fs::write(&cfg, text).unwrap();
        let out = toda(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2));
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"].is_string());
        assert!(!out_dir.exists());
    }
}

#[test]
fn failing_checks_exit_nonzero_with_a_failure_list() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(Preset::Kernel);
    // impossible order requirement
    cfg.problem
        .tolerances
        .insert("kernel_residual_order".into(), 10.0);
    let path = dir.path().join("k.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let out = toda(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    let failures = err["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["metric"]
        .as_str()
        .unwrap()
        .starts_with("kernel_residual_order")));
}

#[test]
fn reports_are_byte_identical_across_runs_and_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path, jobs: &'static str| {
        vec![
            "run".to_string(),
            "solve".into(),
            "--eps".into(),
            "1e-2,1e-3".into(),
            "--jobs".into(),
            jobs.into(),
            "--out".into(),
            d.to_str().unwrap().into(),
        ]
    };
    for (d, j) in [(a.path(), "1"), (b.path(), "4")] {
        let v = args(d, j);
        let out = toda(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["report.csv", "report.json"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)));
    }
}

#[test]
fn printed_config_reproduces_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = toda(&["config", "green"]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("green.toml");
    std::fs::write(&path, &out.stdout).unwrap();
    let cfg = ExperimentConfig::from_toml(&read(&path)).unwrap();
    assert_eq!(cfg, ExperimentConfig::preset(Preset::Green));
    let d1 = dir.path().join("a");
    let d2 = dir.path().join("b");
    toda(&["run", "green", "--out", d1.to_str().unwrap()]);
    toda(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        d2.to_str().unwrap(),
    ]);
    assert_eq!(read(&d1.join("report.csv")), read(&d2.join("report.csv")));
}

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(vec![
        Preset::Identities,
        Preset::Green,
        Preset::Project,
        Preset::ResidualRates,
        Preset::Kernel,
        Preset::Invnorm,
        Preset::Solve,
        Preset::Theta,
    ])
}

proptest! {
    #[test]
    fn config_text_round_trips(
        p in preset(),
        eps in prop::collection::vec(1e-8..0.9f64, 0..5),
        tol in prop::option::of(1e-12..10.0f64),
        degree in 2usize..14,
        r0 in prop::option::of(0.01..0.3f64),
        ball in 0.1..5.0f64,
    ) {
        let mut c = ExperimentConfig::preset(p);
        c.problem.eps = eps;
        if let Some(t) = tol {
            c.problem.tolerances.insert("mass_deviation".into(), t);
        }
        c.grid.degree = degree;
        c.surface.r0 = r0;
        c.solver.ball_radius = ball;
        let text = c.to_toml();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_toml(), text);
        prop_assert_eq!(back.hash(), c.hash());
    }
}
