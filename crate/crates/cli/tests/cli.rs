use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fbhebb_cli::grid::run_matrix;
use fbhebb_cli::report::{evaluate, RunIndex};
use fbhebb_cli::runner::{snapshot_path, SUMMARY_FILE, TRAJECTORY_FILE};
use fbhebb_cli::{ExperimentMatrix, RunConfig, RunSummary, ACCEPTANCE_SEEDS};
use fbhebb_core::{Architecture, Direction, MatrixId, Regime, RuleVariant};
use proptest::prelude::*;
use tempfile::TempDir;

fn fbhebb(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbhebb"))
        .args(args)
        .env("FBHEBB_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_summary(dir: &Path) -> RunSummary {
    serde_json::from_str(&fs::read_to_string(dir.join(SUMMARY_FILE)).unwrap()).unwrap()
}

#[test]
fn default_run_reports_standard_retention() {
    let tmp = TempDir::new().unwrap();
    let o = fbhebb(&["run"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("peak |w|"));
    let dir = tmp.path().join("2ff2fb_full_sequential_s1");
    let s = read_summary(&dir);
    for site in [5, 6, 8, 9] {
        let r = s
            .retention_at(MatrixId::forward(2), Direction::Output, site)
            .unwrap();
        assert_eq!(r.epochs, [0, 10, 20]);
    }
    for site in [8, 9] {
        assert!(s
            .retention_at(MatrixId::feedback(2), Direction::Input, site)
            .is_some());
    }
    for e in [0, 10, 20] {
        assert!(snapshot_path(&dir, e).is_file());
    }
    let cfg = RunConfig::load(&dir.join("config.toml")).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn zero_epochs_gives_baseline_only() {
    let tmp = TempDir::new().unwrap();
    let o = fbhebb(&["run", "--epochs", "0", "--seed", "4"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("2ff2fb_full_sequential_s4");
    let csv = fs::read_to_string(dir.join(TRAJECTORY_FILE)).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("0,")));
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 10);
    let snaps: Vec<_> = fs::read_dir(dir.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 1);
    assert_eq!(read_summary(&dir).final_epoch, 0);
}

#[test]
fn same_seed_gives_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [
        "run",
        "--seed",
        "3",
        "--regime",
        "interleaved",
        "--arch",
        "3ff3fb",
    ];
    assert!(fbhebb(&args, a.path()).status.success());
    assert!(fbhebb(&args, b.path()).status.success());
    let name = "3ff3fb_full_interleaved_s3";
    for f in [
        "config.toml",
        TRAJECTORY_FILE,
        SUMMARY_FILE,
        "snapshots/epoch_0010.json",
    ] {
        let x = fs::read(a.path().join(name).join(f)).unwrap();
        let y = fs::read(b.path().join(name).join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(
        &cfg,
        "seed = 9\nvariant = \"no-decay\"\nepochs = 1\n[params]\nlr = 0.002\n",
    )
    .unwrap();
    let o = fbhebb(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "2",
            "--granularity",
            "epoch-mean",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = read_summary(&tmp.path().join("2ff2fb_no-decay_sequential_s2"));
    assert_eq!(s.config.seed, 2);
    assert_eq!(s.config.epochs, 1);
    assert_eq!(s.config.params.lr, 0.002);
    assert_eq!(s.config.params.alpha, 0.01);
}

#[test]
fn invalid_config_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[params]\nbeta = -1.0\n").unwrap();
    let o = fbhebb(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("params.beta"), "{}", stderr(&o));
    fs::write(&cfg, "speed = 3\n").unwrap();
    let o = fbhebb(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("speed"), "{}", stderr(&o));
}

#[test]
fn probe_subcommand() {
    let tmp = TempDir::new().unwrap();
    assert!(fbhebb(&["run"], tmp.path()).status.success());
    assert!(fbhebb(&["run", "--arch", "2ff"], tmp.path())
        .status
        .success());
    let snap = |name: &str, e: usize| {
        snapshot_path(&tmp.path().join(name), e)
            .display()
            .to_string()
    };

    let trained = snap("2ff2fb_full_sequential_s1", 10);
    let o = fbhebb(
        &[
            "probe",
            "--snapshot",
            &trained,
            "--probe",
            "predict",
            "--pair",
            "A",
            "--json",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["selective"], true);
    assert_eq!(v["activity"].as_array().unwrap().len(), 10);

    let untrained = snap("2ff2fb_full_sequential_s1", 0);
    let o = fbhebb(
        &["probe", "--snapshot", &untrained, "--pair", "A"],
        tmp.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("not selective"));

    let shallow = snap("2ff_full_sequential_s1", 20);
    let o = fbhebb(
        &[
            "probe",
            "--snapshot",
            &shallow,
            "--probe",
            "regenerate",
            "--pair",
            "B",
        ],
        tmp.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no feedback pathway"), "{}", stderr(&o));
}

#[test]
fn report_on_empty_directory_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let empty = tmp.path().join("nothing");
    fs::create_dir(&empty).unwrap();
    let o = fbhebb(&["report", empty.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no artifacts"), "{}", stderr(&o));
}

#[test]
fn unknown_matrix_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let o = fbhebb(&["matrix", "everything"], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown experiment matrix"));
}

#[test]
fn matrix_and_report_subcommands() {
    let tmp = TempDir::new().unwrap();
    let o = fbhebb(
        &["matrix", "controls", "--seeds", "1,2", "--workers", "2"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("unsupported"));
    assert!(tmp.path().join("grid-report-controls.json").is_file());
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 6 * 2 + 1);

    let o = fbhebb(&["report", "--seeds", "1,2"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for id in 1..=10 {
        assert!(
            text.contains(&format!("] C{id} ")),
            "C{id} missing from report"
        );
    }
    // ablation runs were never made
    assert!(text.contains("missing: run 2ff2fb_no-cov_sequential_s1"));
    assert!(tmp.path().join("acceptance-report.json").is_file());
    let o = fbhebb(&["report", "--seeds", "1,2", "--strict"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

fn acceptance_runs(out: &Path) {
    let report = run_matrix(
        &ExperimentMatrix::acceptance(),
        &RunConfig::default(),
        &ACCEPTANCE_SEEDS,
        out,
        4,
    )
    .unwrap();
    assert!(report
        .cells
        .iter()
        .flat_map(|c| &c.runs)
        .all(|r| r.error.is_none()));
}

fn tamper(path: &Path, f: impl Fn(&str) -> String) {
    let text = fs::read_to_string(path).unwrap();
    fs::write(path, f(&text)).unwrap();
}

#[test]
fn tampered_csv_only_moves_its_criteria() {
    let tmp = TempDir::new().unwrap();
    acceptance_runs(tmp.path());
    let clean = evaluate(
        &RunIndex::load(&[tmp.path().to_path_buf()]).unwrap(),
        &ACCEPTANCE_SEEDS,
    );
    assert!(
        clean.criterion(3).unwrap().passed,
        "{}",
        clean.criterion(3).unwrap().detail
    );

    // push the final pair-A output connectivity up so R8 turns positive
    for seed in ACCEPTANCE_SEEDS {
        let csv = tmp
            .path()
            .join(format!("2ff2fb_full_sequential_s{seed}"))
            .join(TRAJECTORY_FILE);
        tamper(&csv, |text| {
            text.lines()
                .map(|l| {
                    if l.starts_with("20,forward,2,output,8,") {
                        "20,forward,2,output,8,5e0".to_string()
                    } else {
                        l.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join("\n")
                + "\n"
        });
    }
    let tampered = evaluate(
        &RunIndex::load(&[tmp.path().to_path_buf()]).unwrap(),
        &ACCEPTANCE_SEEDS,
    );
    assert!(!tampered.criterion(3).unwrap().passed);
    for id in [1, 2, 4, 5, 6, 7, 8, 9, 10] {
        assert_eq!(clean.criterion(id), tampered.criterion(id), "C{id} changed");
    }

    // an unparseable CSV only disables the connectivity criteria of that run
    let csv = tmp
        .path()
        .join("2ff2fb_full_sequential_s1")
        .join(TRAJECTORY_FILE);
    tamper(&csv, |text| {
        text.replace("20,feedback,2,input,8,", "20,feedback,2,input,8,banana")
    });
    let broken = evaluate(
        &RunIndex::load(&[tmp.path().to_path_buf()]).unwrap(),
        &ACCEPTANCE_SEEDS,
    );
    let c4 = broken.criterion(4).unwrap();
    assert!(!c4.passed);
    assert!(
        c4.missing.iter().any(|m| m.contains(TRAJECTORY_FILE)),
        "{:?}",
        c4.missing
    );
    for id in [1, 2, 5, 6, 7, 8, 9, 10] {
        assert_eq!(clean.criterion(id), broken.criterion(id), "C{id} changed");
    }
}

#[test]
fn missing_snapshot_is_listed() {
    let tmp = TempDir::new().unwrap();
    acceptance_runs(tmp.path());
    let dir = tmp.path().join("2ff2fb_full_sequential_s2");
    fs::remove_file(snapshot_path(&dir, 10)).unwrap();
    let r = evaluate(
        &RunIndex::load(&[tmp.path().to_path_buf()]).unwrap(),
        &ACCEPTANCE_SEEDS,
    );
    let c1 = r.criterion(1).unwrap();
    assert!(!c1.passed);
    assert!(c1
        .missing
        .iter()
        .any(|m| m.contains("2ff2fb_full_sequential_s2") && m.contains("epoch 10")));
    assert!(r.criterion(3).unwrap().missing.is_empty());
}

#[test]
fn non_default_runs_are_not_indexed() {
    let tmp = TempDir::new().unwrap();
    assert!(fbhebb(&["run", "--injection", "preactivation"], tmp.path())
        .status
        .success());
    let index = RunIndex::load(&[tmp.path().to_path_buf()]).unwrap();
    assert!(index.runs.is_empty());
    assert_eq!(index.ignored.len(), 1);
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        any::<u64>(),
        prop::sample::select(Architecture::ALL.to_vec()),
        prop::sample::select(RuleVariant::ALL.to_vec()),
        prop::sample::select(Regime::ALL.to_vec()),
        0usize..50,
        any::<bool>(),
        0.0..1.0f64,
        (1e-6..1.0f64, 0.0..5.0f64, 1e-4..1.0f64),
    )
        .prop_map(
            |(seed, arch, variant, regime, epochs, snapshots, input_noise, (lr, beta, alpha))| {
                RunConfig {
                    seed,
                    arch,
                    variant,
                    regime,
                    epochs,
                    snapshots,
                    input_noise,
                    params: fbhebb_core::RuleParams { lr, beta, alpha },
                    ..RunConfig::default()
                }
            },
        )
}

proptest! {
    #[test]
    fn config_round_trip(cfg in config_strategy()) {
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml(), text);
    }
}
