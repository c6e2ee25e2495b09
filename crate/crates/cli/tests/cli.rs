use std::fs;
use std::path::Path;
use std::process::Command;

use opint_cli::{emit_plot_data, RunManifest, MANIFEST};
use opint_core::lab::{lipschitz_experiment, p_above_2_scan, ExperimentConfig, ExperimentReport};

fn opint(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_opint"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const IDENTITY: &str = r#"{"dims":[4,8],"trials":4,"seed":1,"mode":"identity",
    "functions":["sum(plane_wave:1,0, mode:0,2,0.5,0)","plane_wave:-1,3"]}"#;

const LIPSCHITZ: &str = r#"{"p":[1,2],"dims":[4,8],"trials":10,"seed":3,"mode":"lipschitz",
    "functions":["plane_wave:1,1","sum(mode:2,0,0.5,0, mode:0,-1,0,0.5)"]}"#;

#[test]
fn verify_identity_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "id.json", IDENTITY);
    for out in ["r1", "r2"] {
        let o = opint(
            &[
                "verify-identity",
                "--config",
                &cfg,
                "--seed",
                "7",
                "--out",
                out,
            ],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["identity.csv", "identity.json"] {
        assert_eq!(
            fs::read(tmp.path().join("r1").join(f)).unwrap(),
            fs::read(tmp.path().join("r2").join(f)).unwrap()
        );
    }
    let manifest: RunManifest =
        serde_json::from_slice(&fs::read(tmp.path().join("r1").join(MANIFEST)).unwrap()).unwrap();
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.overrides, vec!["seed=7".to_string()]);
    assert!(manifest.mismatches(&tmp.path().join("r1")).is_empty());
    assert_eq!(manifest.files.len(), 2);
}

#[test]
fn besov_reports_weighted_block_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = opint(
        &[
            "besov",
            "--function",
            "plane_wave:2,0",
            "--out",
            "b",
            "--format",
            "csv",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let text = fs::read_to_string(tmp.path().join("b/besov.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let rec = rows.records().next().unwrap().unwrap();
    assert_eq!((&rec[1], &rec[2], &rec[3]), ("1", "2.0", "2.0"));
    assert!(!tmp.path().join("b/besov.json").exists());
}

#[test]
fn fab_with_commuting_diagonals_is_diagonal() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(
        tmp.path(),
        "a.json",
        r#"{"dim":3,"entries":[[1,0],[0,0],[0,0],[0,0],[-2,0],[0,0],[0,0],[0,0],[0.5,0]]}"#,
    );
    let b = write(
        tmp.path(),
        "b.json",
        r#"{"dim":3,"entries":[[0,0],[0,0],[0,0],[0,0],[3,0],[0,0],[0,0],[0,0],[-1,0]]}"#,
    );
    for sharp in [false, true] {
        let mut args = vec![
            "fab",
            "--A",
            &a,
            "--B",
            &b,
            "--f",
            "sum(plane_wave:1,0, plane_wave:0,1)",
            "--out",
            "f",
        ];
        if sharp {
            args.push("--sharp");
        }
        let o = opint(&args, tmp.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let doc: serde_json::Value =
            serde_json::from_slice(&fs::read(tmp.path().join("f/fab.json")).unwrap()).unwrap();
        let entries = doc["value"]["entries"].as_array().unwrap();
        let (xs, ys) = ([1.0f64, -2.0, 0.5], [0.0f64, 3.0, -1.0]);
        for r in 0..3 {
            for c in 0..3 {
                let e = &entries[r * 3 + c];
                let (re, im) = (e[0].as_f64().unwrap(), e[1].as_f64().unwrap());
                let (er, ei) = if r == c {
                    (xs[r].cos() + ys[r].cos(), xs[r].sin() + ys[r].sin())
                } else {
                    (0.0, 0.0)
                };
                assert!(
                    (re - er).abs() < 1e-12 && (im - ei).abs() < 1e-12,
                    "({r},{c}) sharp={sharp}"
                );
            }
        }
    }
}

#[test]
fn validation_errors_exit_2_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(
        tmp.path(),
        "bad.json",
        r#"{"dims":[4],"trials":0,"mode":"lipschitz","functions":["x"]}"#,
    );
    let o = opint(&["lipschitz", "--config", &bad, "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
    let o = opint(&["lipschitz", "--config", "missing.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let toml = write(
        tmp.path(),
        "p.toml",
        "dims = [4]\ntrials = 1\nmode = \"lipschitz\"\np = 0.5\nfunctions = [\"x\"]\n",
    );
    let o = opint(&["lipschitz", "--config", &toml], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let big_p = write(
        tmp.path(),
        "p3.json",
        r#"{"p":3,"dims":[4],"trials":1,"mode":"lipschitz","functions":["x"]}"#,
    );
    let o = opint(&["lipschitz", "--config", &big_p, "--out", "y"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p:"));
    let o = opint(
        &["lipschitz", "--config", &big_p, "--threads", "0"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_capability_errors_map_to_exit_3() {
    let e: opint_cli::CliError = opint_core::Error::Capability("no partials".into()).into();
    assert_eq!(e.exit_code(), 3);
    assert!(e.to_string().starts_with("[function-model]"));
    let e: opint_cli::CliError = opint_core::Error::Convergence {
        dim: 3,
        iterations: 600,
    }
    .into();
    assert_eq!(e.exit_code(), 3);
    let e: opint_cli::CliError = opint_core::Error::Validation("dims".into()).into();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn lipschitz_artifacts_round_trip_and_thread_env() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "l.json", LIPSCHITZ);
    let run = |out: &str, threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_opint"))
            .args(["lipschitz", "--config", &cfg, "--out", out])
            .env("OPINT_THREADS", threads)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a", "1");
    run("b", "4");
    for f in ["report.json", "trials.csv", "series.csv", "summary.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let manifest: RunManifest =
        serde_json::from_slice(&fs::read(tmp.path().join("a").join(MANIFEST)).unwrap()).unwrap();
    assert_eq!(manifest.threads, Some(1));
    assert!(manifest.mismatches(&tmp.path().join("a")).is_empty());

    let report: ExperimentReport =
        serde_json::from_slice(&fs::read(tmp.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(
        report.recompute_empirical_constant().to_bits(),
        report.empirical_constant.to_bits()
    );
    let fresh = lipschitz_experiment(&ExperimentConfig::from_json(LIPSCHITZ).unwrap()).unwrap();
    assert_eq!(report, fresh);
    let trials = fs::read_to_string(tmp.path().join("a/trials.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(trials.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        &header[..9],
        [
            "trial",
            "seed",
            "dim",
            "p",
            "sigma",
            "function",
            "diff_norm",
            "pert_norm",
            "ratio"
        ]
    );
    for (row, t) in reader.records().zip(&report.trials) {
        let row = row.unwrap();
        assert_eq!(row[8].parse::<f64>().unwrap(), t.ratio);
        assert_eq!(row[6].parse::<f64>().unwrap(), t.diff_norm);
    }

    // tampering is detected
    fs::write(tmp.path().join("a/series.csv"), "tampered").unwrap();
    assert_eq!(
        manifest.mismatches(&tmp.path().join("a")),
        vec!["series.csv".to_string()]
    );
}

fn rows(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes)
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn plot_data_row_counts() {
    let single = ExperimentConfig::from_json(
        r#"{"dims":[4],"trials":1,"mode":"lipschitz","functions":["plane_wave:1,0"]}"#,
    )
    .unwrap();
    let plot = emit_plot_data(&lipschitz_experiment(&single).unwrap()).unwrap();
    assert_eq!(
        (rows(&plot.series).len(), rows(&plot.summary).len()),
        (1, 1)
    );

    let many = ExperimentConfig::from_json(
        r#"{"dims":[4],"trials":200,"mode":"lipschitz","functions":["plane_wave:1,0"]}"#,
    )
    .unwrap();
    let report = lipschitz_experiment(&many).unwrap();
    assert_eq!(
        rows(&emit_plot_data(&report).unwrap().series).len(),
        report.trials.len()
    );

    let mut empty = report.clone();
    empty.trials.clear();
    empty.summary.iter_mut().for_each(|s| s.trials = 0);
    let plot = emit_plot_data(&empty).unwrap();
    assert_eq!(
        String::from_utf8(plot.series).unwrap(),
        "p,dim,trial_index,ratio,normalized_ratio\n"
    );
    assert_eq!(
        String::from_utf8(plot.summary).unwrap(),
        "index,p,dim,max_ratio,max_normalized_ratio\n"
    );

    let scan = ExperimentConfig::from_json(
        r#"{"p":[2,"inf"],"dims":[4,8,16],"trials":3,"mode":"scan","functions":["plane_wave:1,1"],
            "scan":{"greedy_steps":2,"step":0.3}}"#,
    )
    .unwrap();
    let plot = emit_plot_data(&p_above_2_scan(&scan).unwrap()).unwrap();
    let summary = rows(&plot.summary);
    assert_eq!(summary.len(), 6);
    for (i, r) in summary.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
    }
}
