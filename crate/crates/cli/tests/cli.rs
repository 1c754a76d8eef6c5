use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use voter_cli::config::{ExperimentConfig, ExperimentKind, SweepAxis};
use voter_cli::emit::{parse_json, Format};
use voter_cli::presets::FIGURES;
use voter_cli::runner::{run_experiment, ComparisonTable};
use voter_core::ode::StrategyDiffReport;
use voter_core::BehaviorKind;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/configs").join(name)
}

fn voter(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voter"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr holds one JSON error")
}

/// (figure, M, T, b, kind, p, q, p~, q~, fixed mix, swept axis), as printed
/// under each figure.
type CaptionRow = (u8, u32, usize, f64, BehaviorKind, f64, f64, f64, f64, Option<f64>, Option<SweepAxis>);

const CAPTIONS: [CaptionRow; 5] = [
    (1, 100, 10_000, 0.4, BehaviorKind::HybridSC, 0.8, 0.4, 0.1, 0.9, Some(0.5), None),
    (2, 10_000, 10_000, 0.4, BehaviorKind::HybridSC, 0.5, 0.5, 0.1, 0.9, None, Some(SweepAxis::Lambda)),
    (3, 1000, 1000, 0.4, BehaviorKind::HybridSC, 0.8, 0.4, 0.1, 0.9, None, Some(SweepAxis::Lambda)),
    (4, 1000, 100_000, 0.4, BehaviorKind::HybridSC, 0.4, 0.8, 0.1, 0.9, None, Some(SweepAxis::Lambda)),
    (5, 1000, 1000, 0.4, BehaviorKind::HybridCR, 0.2, 0.9, 0.1, 0.9, None, Some(SweepAxis::Mu)),
];

#[test]
fn presets_match_captions() {
    for (row, f) in CAPTIONS.iter().zip(FIGURES.iter()) {
        let got = (
            f.figure,
            f.population,
            f.horizon,
            f.budget_fraction,
            f.kind,
            f.p,
            f.q,
            f.p_tilde,
            f.q_tilde,
            f.mix,
            f.axis,
        );
        assert_eq!(&got, row);
    }
}

#[test]
fn decreasing_grid_is_a_config_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = voter(&["compare", "--config", config("decreasing_grid.json").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "config_invalid");
    assert!(out.stdout.is_empty());
    assert!(!dir.path().join("should_not_exist.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = voter(&["ode"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let absent = voter(&["ode", "--config", "nope.json"], dir.path());
    assert_eq!(absent.status.code(), Some(4));
    assert_eq!(error_json(&absent)["exit_code"], 4);

    let brute = config("bruteforce_pq.json");
    let capped = voter(&["bruteforce", "--config", brute.to_str().unwrap(), "--cap-schedules", "10"], dir.path());
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(error_json(&capped)["error"], "search_space_too_large");

    let states = voter(&["bruteforce", "--config", brute.to_str().unwrap(), "--cap-states", "10"], dir.path());
    assert_eq!(states.status.code(), Some(3));

    let wrong = voter(&["compare", "--config", brute.to_str().unwrap()], dir.path());
    assert_eq!(wrong.status.code(), Some(2));

    let unwritable = voter(
        &["bruteforce", "--config", brute.to_str().unwrap(), "--out", "no/such/dir/x.csv"],
        dir.path(),
    );
    assert_eq!(unwritable.status.code(), Some(4));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("simulate_small.json")).unwrap().replacen('{', "{\"typo\": 1,", 1);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let out = voter(&["simulate", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("simulate_small.json");
    for (file, extra) in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "50"), ("d.csv", "50")] {
        let out = voter(
            &["simulate", "--config", cfg.to_str().unwrap(), "--reps", extra, "--out", file],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("c.csv"), read("d.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));

    let text = String::from_utf8(read("a.csv")).unwrap();
    let cfg = ExperimentConfig::from_path(&cfg).unwrap();
    assert_eq!(text.lines().next(), Some("t,delta_N"));
    assert_eq!(text.lines().count(), cfg.horizon + 2);
}

#[test]
fn seed_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("simulate_small.json");
    let run = |seed: &str| voter(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", seed], dir.path()).stdout;
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn comparison_round_trips_through_json() {
    let cfg = ExperimentConfig::from_path(&config("fig4_sweep.json")).unwrap();
    let artifact = run_experiment(ExperimentKind::Compare, &cfg).unwrap();
    let back = parse_json::<ComparisonTable>(&artifact.render(Format::Json)).unwrap();
    assert_eq!(back.kind, "comparison");
    let direct: ComparisonTable = serde_json::from_value(artifact.json.clone()).unwrap();
    assert_eq!(back.data, direct);
    assert_eq!(back.data.rows.len(), 21);

    for row in &back.data.rows {
        let text = serde_json::to_string(&row.report).unwrap();
        let again: StrategyDiffReport = serde_json::from_str(&text).unwrap();
        assert_eq!(again, row.report);
    }
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_sign_change_brackets_the_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = voter(&["compare", "--config", config("fig4_sweep.json").to_str().unwrap()], dir.path());
    assert!(sweep.status.success());
    let rows = csv_rows(&String::from_utf8(sweep.stdout).unwrap());
    let winners: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    let switch = winners.windows(2).position(|w| w[0] != w[1]).expect("winner changes");
    assert_eq!(winners.windows(2).filter(|w| w[0] != w[1]).count(), 1);
    let lo: f64 = rows[switch][0].parse().unwrap();
    let hi: f64 = rows[switch + 1][0].parse().unwrap();

    let cross = voter(&["crossover", "--config", config("fig4_crossover.json").to_str().unwrap()], dir.path());
    let rows = csv_rows(&String::from_utf8(cross.stdout).unwrap());
    assert_eq!(rows[0][1], "crossover");
    let star: f64 = rows[0][0].parse().unwrap();
    let step = hi - lo;
    assert!(star > lo - step && star < hi + step, "{star} vs [{lo}, {hi}]");
    assert!(star > lo && star < hi);
}

#[test]
fn concentration_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = voter(
        &["concentration", "--config", config("concentration_pq.json").to_str().unwrap(), "--reps", "500"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("epsilon,empirical_tail,analytic_bound,pass"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn figure_output_goes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = voter(&["reproduce-fig", "3", "--reps", "5", "--seed", "1", "--out", "f.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("lambda,mean_yes_SL,mean_yes_SF,ode_yes_SL,ode_yes_SF"));
    assert_eq!(text.lines().count(), 22);

    let bad = voter(&["reproduce-fig", "6"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
