use chainvalue_core::ingest::{load_events, load_lineups, load_matches};
use chainvalue_core::{extract_chains, reference_chains};
use chainvalue_testkit::corpus::{write_corpus, CorpusSpec, COMPETITION_ID, SEASON_ID};

#[test]
fn synthetic_tournament_round_trips_through_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let summary = write_corpus(dir.path(), &CorpusSpec::default()).unwrap();
    assert_eq!(summary.match_ids.len(), 31);
    assert_eq!(summary.quarter_finalists.len(), 8);

    let matches = load_matches(&summary.data_root, &[(COMPETITION_ID, SEASON_ID)]).unwrap();
    assert_eq!(matches.len(), 31);

    let (mut shots, mut chains, mut goals, mut skipped) = (0, 0, 0, 0);
    for m in &matches {
        let parsed = load_events(&summary.data_root, m.match_id).unwrap();
        let lineups = load_lineups(&summary.data_root, m.match_id).unwrap();
        assert_eq!(lineups.len(), 2);
        skipped += parsed.skipped.len();
        let forward = extract_chains(m.match_id, &parsed.events);
        assert_eq!(forward, reference_chains(m.match_id, &parsed.events));
        assert_eq!(
            forward.chains.len(),
            forward.shot_events - forward.dropped.len()
        );
        shots += forward.shot_events;
        chains += forward.chains.len();
        goals += forward.chains.iter().filter(|c| c.ends_in_goal).count();
    }
    assert_eq!(skipped, 0);
    eprintln!("shots {shots} chains {chains} goals {goals}");
    assert!(chains > 400, "{chains}");
    let rate = goals as f64 / chains as f64;
    assert!((0.05..0.25).contains(&rate), "{rate}");
}

#[test]
fn corpus_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = CorpusSpec {
        minutes_scale: 0.2,
        ..CorpusSpec::default()
    };
    let sa = write_corpus(a.path(), &spec).unwrap();
    let sb = write_corpus(b.path(), &spec).unwrap();
    for id in &sa.match_ids {
        let path = |root: &std::path::Path| root.join("events").join(format!("{id}.json"));
        assert_eq!(
            std::fs::read(path(&sa.data_root)).unwrap(),
            std::fs::read(path(&sb.data_root)).unwrap()
        );
    }
    assert_eq!(
        std::fs::read(sa.market_dir.join("player_valuations.csv")).unwrap(),
        std::fs::read(sb.market_dir.join("player_valuations.csv")).unwrap()
    );
}
