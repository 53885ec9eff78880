use std::path::Path;
use std::process::{Command, Output};

use chainvalue_cli::{Manifest, StageName};
use chainvalue_testkit::corpus::{write_corpus, CorpusSpec};

fn chainvalue(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainvalue"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("error json on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn chains_before_ingest_names_the_producer() {
    let dir = tempfile::tempdir().unwrap();
    let out = chainvalue(&["chains"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = error_json(&out);
    assert_eq!(
        err["error"]["message"],
        "run ingest first: events.jsonl missing"
    );
    assert_eq!(err["error"]["run_first"], "ingest");
}

#[test]
fn config_errors_are_listed_together() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "sead = 1\ntest_fraction = 0.3\n[window]\nbegin = \"2021-06-11\"\n[grids.random_forest]\ntrees = [1.0]\n",
    )
    .unwrap();
    let out = chainvalue(&["--config", "bad.toml", "ingest"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    let problems: Vec<String> = err["error"]["problems"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_str().unwrap().to_string())
        .collect();
    for key in ["sead", "window.begin", "grids.random_forest.trees"] {
        assert!(
            problems.iter().any(|p| p.contains(key)),
            "{key} missing from {problems:?}"
        );
    }

    std::fs::write(
        dir.path().join("values.toml"),
        "test_fraction = 1.5\nmin_games = 0\n",
    )
    .unwrap();
    let out = chainvalue(&["--config", "values.toml", "ingest"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let problems = error_json(&out)["error"]["problems"]
        .as_array()
        .unwrap()
        .len();
    assert!(problems >= 2);
}

#[test]
fn report_all_on_a_synthetic_tournament() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&dir.path().join("corpus"), &CorpusSpec::default()).unwrap();
    let names: Vec<String> = corpus
        .players
        .iter()
        .step_by(41)
        .take(3)
        .map(|p| format!("{:?}", p.name))
        .collect();
    let config = format!(
        "report_players = [{}, \"Not A Player\"]\n[data]\nopen_data = {:?}\nmarket = {:?}\n",
        names.join(", "),
        corpus.data_root,
        corpus.market_dir
    );
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    let out = chainvalue(
        &["--config", "run.toml", "--out-dir", "out", "report-all"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out_dir = dir.path().join("out");
    for f in [
        "player_report.csv",
        "player_report.json",
        "symbolic_team.json",
        "symbolic_team.md",
        "player_scores.csv",
    ] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    let report = std::fs::read_to_string(out_dir.join("player_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.contains("not_in_roster"));

    for stage in StageName::ALL {
        let m = Manifest::read(&out_dir, stage.command()).unwrap();
        assert_eq!(m.stage, stage.command());
        assert!(!m.outputs.is_empty());
        assert!(m.outputs.iter().all(|o| o.sha256.len() == 64));
    }

    // Re-running one stage reproduces its manifest.
    let before = std::fs::read(out_dir.join("manifests/train-xg.json")).unwrap();
    let again = chainvalue(
        &["--config", "run.toml", "--out-dir", "out", "train-xg"],
        dir.path(),
    );
    assert!(again.status.success());
    assert_eq!(
        std::fs::read(out_dir.join("manifests/train-xg.json")).unwrap(),
        before
    );
}
