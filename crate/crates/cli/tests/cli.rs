use std::path::PathBuf;
use std::process::{Command, Output};

fn extba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extba"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("extba-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const MIXED: &[&str] = &[
    "run",
    "--n",
    "7",
    "--L",
    "64",
    "--faults",
    "byz:equivocate:3@1,byz:garbage:4@1",
    "--proposals",
    "distinct",
    "--seed",
    "11",
];

const SWEEP: &[&str] = &[
    "sweep",
    "--n",
    "4,7",
    "--L",
    "64,128",
    "--trials",
    "2",
    "--faults",
    "byz:impostor@1",
    "--proposals",
    "random",
    "--valid",
    "even-parity",
    "--seed",
    "5",
];

#[test]
fn run_matches_golden_output() {
    let a = extba(MIXED);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), include_str!("golden/run_n7_mixed.txt"));
    let b = extba(MIXED);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_matches_golden_output() {
    let a = extba(SWEEP);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), include_str!("golden/sweep_small.txt"));
}

#[test]
fn unanimous_four_takes_sixty_rounds() {
    let o = extba(&[
        "run",
        "--n",
        "4",
        "--L",
        "1024",
        "--proposals",
        "unanimous",
        "--faults",
        "none",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("rounds=60 "), "{text}");
    assert!(text.contains("agreement=ok"), "{text}");
}

#[test]
fn single_process_decides_immediately() {
    let o = extba(&["run", "--n", "1", "--L", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("at round 0"));
}

#[test]
fn two_equivocators_among_seven() {
    let o = extba(&["run", "--n", "7", "--faults", "byz:equivocate@2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("agreement=ok termination=ok validity=ok"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["run", "--n", "4", "--t", "2"][..],
        &["run", "--n", "4", "--faults", "byz:teleport@1"],
        &["run", "--n", "4,8"],
        &["run", "--n", "0"],
        &["run", "--valid", "prime"],
        &["sweep", "--n", ""],
        &["teleport"],
    ] {
        let o = extba(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn out_of_contract_run_is_flagged_not_failed() {
    let o = extba(&["run", "--n", "4", "--faults", "byz:silent@2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().ends_with(",true"), "{text}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch_dir("config");
    let cfg = dir.join("run.json");
    let csv = dir.join("row.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"n": 4, "L": 512, "faults": "byz:crash:9@1", "seed": 3, "out": {:?}}}"#,
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = extba(&["run", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(
        text.starts_with("n=4 t=1 L=512 faults=byz:crash:9@1"),
        "{text}"
    );
    assert!(!text.contains("run_id"), "CSV goes to the file");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 2);
    assert!(rows
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0,4,1,512,crash:9@1,4,60,"));

    std::fs::write(&cfg, "{\n  \"n\": 4,\n  \"L\": true\n}").unwrap();
    let o = extba(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn oracle_suites_pass() {
    for suite in ["rs", "bgc", "cool"] {
        let o = extba(&["oracle", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let text = stdout(&o);
        assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    }
}
