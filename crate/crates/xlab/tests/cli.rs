use std::path::Path;
use std::process::{Command, Output};

use xlab::{
    run_config, sweep_exit_code, Command as Cmd, ExperimentConfig, Grid, EXIT_OK, EXIT_USAGE,
    EXIT_VIOLATION,
};

fn xlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xlab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_owned())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const TWO_POINT: &str = r#"{"n":2,"d":1,"matrices":[{"d":1,"re":[[1.0]],"im":[[0.0]]},{"d":1,"re":[[-1.0]],"im":[[0.0]]}]}"#;

#[test]
fn tail_exact_two_point_instance() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", TWO_POINT);
    let o = xlab(&[
        "tail-exact",
        "--graph",
        "complete:2",
        "--fn",
        &f,
        "--k",
        "2",
        "--eps",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let csv = stdout(&o);
    assert_eq!(column(&csv, "p_hat"), vec!["2.5000000000000000e-1"]);
    assert_eq!(column(&csv, "passed"), vec!["true"]);
}

#[test]
fn gt_verify_without_matrices_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "empty.json", r#"{"matrices": []}"#);
    let o = xlab(&["gt-verify", "--fn", &f]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(stdout(&o).is_empty());
    assert_eq!(xlab(&["gt-verify"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn graph_info_margulis() {
    let o = xlab(&["graph-info", "--graph", "margulis:4"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let csv = stdout(&o);
    assert_eq!(column(&csv, "n"), vec!["16"]);
    assert_eq!(column(&csv, "degree"), vec!["8"]);
    let lambda: f64 = column(&csv, "lambda")[0].parse().unwrap();
    assert!((lambda - 0.683012701892).abs() < 1e-12);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("lambda = 0.683012701892"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(xlab(&["bogus"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(
        xlab(&["tail", "--graph", "cycle:9", "--k", "3"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        xlab(&[
            "tail-exact",
            "--graph",
            "cycle:9",
            "--gen",
            "0:8:2",
            "--k",
            "3",
            "--eps",
            "0.5"
        ])
        .status
        .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        xlab(&["graph-info", "--graph", "nothing:3"]).status.code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        xlab(&["mgf", "--graph", "cycle:8", "--gen", "0:8:1", "--k", "3", "--t", "0.01"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        xlab(&["graph-info", "--config", "/nonexistent/cfg.json"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_xlab"))
        .args(["graph-info", "--graph", "cycle:5"])
        .env("XLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert_eq!(xlab(&["--help"]).status.code(), Some(EXIT_OK));
}

#[test]
fn flags_override_config_and_reports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"command": "tail", "graph": "margulis:3", "gen": "4:9:2", "k": 6, "epsilon": 0.9, "trials": 4000, "seed": 1}"#,
    );
    let prefix = dir.path().join("run");
    let o = xlab(&[
        "tail",
        "--config",
        &cfg,
        "--eps",
        "0.4",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    assert_eq!(column(&csv, "epsilon"), vec!["4.0000000000000002e-1"]);
    assert_eq!(column(&csv, "trials"), vec!["4000"]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(prefix.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["epsilon"], 0.4);
    assert_eq!(report["config"]["k"], 6);
    assert_eq!(report["exit_code"], 0);
    assert!(report["runtime_ms"].is_number());
}

#[test]
fn config_round_trips() {
    let cfg = ExperimentConfig {
        command: Some(Cmd::Mgf),
        graph: Some("cycle:9".into()),
        gen: Some("3:9:2".parse().unwrap()),
        k: Some(4),
        t: Some(0.1 + 0.2),
        gamma: Some(0.6),
        b: Some(-0.8),
        grid: Some(Grid {
            t: Some(vec![0.005, 1.0 / 3.0]),
            seed: Some(vec![]),
            ..Grid::default()
        }),
        ..ExperimentConfig::default()
    };
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(
        serde_json::from_str::<ExperimentConfig>(&text).unwrap(),
        cfg
    );
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"kk": 3}"#).is_err());
}

#[test]
fn runs_are_byte_identical() {
    let args = [
        "tail",
        "--graph",
        "margulis:3",
        "--gen",
        "2:9:2",
        "--k",
        "7",
        "--eps",
        "0.3",
        "--trials",
        "3000",
        "--seed",
        "5",
    ];
    let a = xlab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_xlab"))
        .args(args)
        .env("XLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(EXIT_OK));
    assert_eq!(a.stdout, b.stdout);
    let c = xlab(&[
        "healy", "--graph", "cycle:9", "--gen", "1:9:3", "--t", "0.4", "--b", "0.5", "--trials",
        "300", "--seed", "2",
    ]);
    let d = xlab(&[
        "healy", "--graph", "cycle:9", "--gen", "1:9:3", "--t", "0.4", "--b", "0.5", "--trials",
        "300", "--seed", "2",
    ]);
    assert_eq!(c.stdout, d.stdout);
}

fn sweep(cfg: ExperimentConfig) -> xlab::RunOutput {
    run_config(&cfg, true).unwrap()
}

#[test]
fn epsilon_sweep_is_monotone() {
    let out = sweep(ExperimentConfig {
        command: Some(Cmd::TailExact),
        graph: Some("margulis:2".into()),
        gen: Some("7:4:2".parse().unwrap()),
        k: Some(6),
        grid: Some(Grid {
            epsilon: Some(vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9]),
            ..Grid::default()
        }),
        ..ExperimentConfig::default()
    });
    assert_eq!(out.exit_code, EXIT_OK);
    let p: Vec<f64> = column(&out.csv, "p_hat")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(p.len(), 7);
    assert!(p.windows(2).all(|w| w[1] <= w[0]), "{p:?}");
    assert_eq!(
        column(&out.csv, "cell"),
        (0..7).map(|i| i.to_string()).collect::<Vec<_>>()
    );
}

#[test]
fn mgf_grid_is_satisfied_and_errors_are_recorded() {
    let out = sweep(ExperimentConfig {
        command: Some(Cmd::Mgf),
        graph: Some("margulis:3".into()),
        gen: Some("3:9:2".parse().unwrap()),
        grid: Some(Grid {
            k: Some(vec![1, 4, 8]),
            t: Some(vec![0.01, 0.05]),
            gamma: Some(vec![0.0, 0.6, 1.0]),
            b: Some(vec![-0.8, 0.0, 0.8]),
            ..Grid::default()
        }),
        ..ExperimentConfig::default()
    });
    let status = column(&out.csv, "status");
    assert_eq!(status.len(), 54);
    assert!(status.iter().all(|s| s == "pass"), "{status:?}");
    assert_eq!(out.exit_code, EXIT_OK);

    // t = 2 breaks t²(γ²+b²) ≤ 1: those cells error, the rest still run.
    let out = sweep(ExperimentConfig {
        command: Some(Cmd::Mgf),
        graph: Some("complete:4".into()),
        gen: Some("3:4:2".parse().unwrap()),
        k: Some(3),
        grid: Some(Grid {
            t: Some(vec![0.5, 2.0]),
            ..Grid::default()
        }),
        ..ExperimentConfig::default()
    });
    assert_eq!(column(&out.csv, "status"), vec!["pass", "error"]);
    assert!(!column(&out.csv, "error")[1].is_empty());
    assert_eq!(out.exit_code, EXIT_USAGE);
}

#[test]
fn empty_and_oversized_grids() {
    let base = ExperimentConfig {
        command: Some(Cmd::TailExact),
        graph: Some("cycle:5".into()),
        gen: Some("1:5:1".parse().unwrap()),
        k: Some(3),
        epsilon: Some(0.5),
        ..ExperimentConfig::default()
    };
    let out = sweep(ExperimentConfig {
        grid: Some(Grid {
            seed: Some(vec![]),
            ..Grid::default()
        }),
        ..base.clone()
    });
    assert_eq!(out.exit_code, EXIT_OK);
    assert_eq!(out.csv.lines().count(), 1);
    assert!(out.csv.starts_with("cell,k,epsilon,p_hat"));

    let big = ExperimentConfig {
        grid: Some(Grid {
            k: Some((1..=101).collect()),
            epsilon: Some(vec![0.5; 100]),
            ..Grid::default()
        }),
        ..base
    };
    assert!(matches!(
        run_config(&big, true),
        Err(xlab::CliError::Usage(_))
    ));
}

#[test]
fn sweep_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "grid.json",
        r#"{"command": "graph-info", "graph": "cycle:7", "grid": {"seed": [1, 2, 3]}}"#,
    );
    let o = xlab(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(stdout(&o).lines().count(), 4);
    let missing = write(dir.path(), "nocmd.json", r#"{"graph": "cycle:7"}"#);
    assert_eq!(
        xlab(&["sweep", "--config", &missing]).status.code(),
        Some(EXIT_USAGE)
    );
}

#[test]
fn exit_code_precedence() {
    assert_eq!(sweep_exit_code(false, false), EXIT_OK);
    assert_eq!(sweep_exit_code(false, true), EXIT_USAGE);
    assert_eq!(sweep_exit_code(true, true), EXIT_VIOLATION);
}

#[test]
fn sample_uses_seed_bits_on_power_of_two_graphs() {
    let o = xlab(&["sample", "--graph", "margulis:4", "--k", "3", "--seed", "0"]);
    let csv = stdout(&o);
    assert_eq!(column(&csv, "mode"), vec!["seeded"]);
    assert_eq!(column(&csv, "seed_bits"), vec!["10"]);
    assert_eq!(column(&csv, "walk")[0].split(' ').count(), 3);
    let o = xlab(&["sample", "--graph", "cycle:9", "--k", "3", "--seed", "0"]);
    assert_eq!(column(&stdout(&o), "mode"), vec!["prng"]);
}
