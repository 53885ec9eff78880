use std::collections::BTreeMap;

use chainvalue_core::applications::{
    player_report, player_report_csv, select_symbolic_team, ReportStatus,
};
use chainvalue_core::market::{PlayerDirectory, PlayerMeta, ValuationRecord, Valuations};
use chainvalue_core::transfer::{
    age_on, build_transfer_dataset, predict_fee_change, whole_months, ExclusionReason,
    TransferWindow,
};
use chainvalue_core::valuation::PlayerScore;
use chainvalue_core::{PositionGroup, RosterEntry};
use chainvalue_ml::{fit_regressor, Algorithm, Hyperparameters, ModelArtifact};
use chrono::NaiveDate;

fn d(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn entry(id: u64, name: &str, group: PositionGroup, games: u32) -> RosterEntry {
    RosterEntry {
        player_id: id,
        name: name.into(),
        nickname: None,
        team: if id % 2 == 0 {
            "Italy".into()
        } else {
            "Denmark".into()
        },
        position: Some(format!("{group} position")),
        position_group: Some(group),
        games,
        match_ids: (0..u64::from(games)).collect(),
    }
}

fn score(id: u64, normalized: f64, games: u32) -> PlayerScore {
    PlayerScore {
        player_id: id,
        games_played: games,
        chains_participated: 1,
        per_chain: Vec::new(),
        total: normalized * f64::from(games),
        normalized,
    }
}

fn valuation(id: u64, date: &str, eur: u64) -> ValuationRecord {
    ValuationRecord {
        player_id: id,
        date: d(date),
        market_value_eur: eur,
    }
}

fn meta(id: u64, birth: Option<&str>) -> PlayerMeta {
    PlayerMeta {
        player_id: id,
        name: format!("m{id}"),
        birth_date: birth.map(d),
        position_group: Some(PositionGroup::Midfielder),
        raw_position: "Midfield".into(),
    }
}

#[test]
fn calendar_arithmetic() {
    assert_eq!(whole_months(d("2021-05-01"), d("2021-09-01")), 4);
    assert_eq!(whole_months(d("2021-05-15"), d("2021-09-01")), 3);
    assert_eq!(age_on(d("1993-12-20"), d("2021-07-11")), Some(27));
    assert!(TransferWindow::new(d("2021-07-11"), d("2021-06-11")).is_err());
}

#[test]
fn dataset_brackets_the_window() {
    let roster: BTreeMap<u64, RosterEntry> = (1..=4)
        .map(|i| {
            (
                i,
                entry(i, &format!("Player {i}"), PositionGroup::Midfielder, 4),
            )
        })
        .collect();
    let scores: Vec<PlayerScore> = (1..=4).map(|i| score(i, 0.1 * i as f64, 4)).collect();
    let links = BTreeMap::from([(1, 101), (2, 102), (3, 103)]);
    let mut series = BTreeMap::new();
    series.insert(
        101,
        vec![
            valuation(101, "2021-01-01", 3_000_000),
            valuation(101, "2021-05-01", 5_000_000),
            valuation(101, "2021-09-01", 12_000_000),
        ],
    );
    series.insert(102, vec![valuation(102, "2021-05-01", 5_000_000)]);
    series.insert(
        103,
        vec![
            valuation(103, "2021-05-01", 5_000_000),
            valuation(103, "2021-08-01", 4_000_000),
        ],
    );
    let valuations = Valuations {
        series,
        warnings: 0,
    };
    let directory = PlayerDirectory {
        players: [
            meta(101, Some("1993-12-20")),
            meta(102, Some("1990-01-01")),
            meta(103, None),
        ]
        .into_iter()
        .map(|m| (m.player_id, m))
        .collect(),
        warnings: 0,
    };
    let window = TransferWindow::new(d("2021-06-11"), d("2021-07-11")).unwrap();
    let t =
        build_transfer_dataset(&scores, &roster, &links, &valuations, &directory, window).unwrap();

    assert_eq!(t.rows.len(), 1);
    let row = &t.rows[0];
    assert_eq!(row.target, 7.0);
    assert_eq!(row.time_lag, 4);
    assert_eq!((row.age, row.age_squared), (27, 729));
    assert_eq!(row.evaluation_time, 4);
    let reason = |id| {
        t.excluded
            .iter()
            .find(|e| e.player_id == id)
            .map(|e| e.reason)
    };
    assert_eq!(reason(2), Some(ExclusionReason::NoValuationAfter));
    assert_eq!(reason(3), Some(ExclusionReason::NoBirthDate));
    assert_eq!(reason(4), Some(ExclusionReason::Unlinked));
}

#[test]
fn symbolic_team_rules() {
    let mut roster = BTreeMap::new();
    let mut scores = Vec::new();
    let mut add = |id: u64, group: PositionGroup, s: f64, games: u32| {
        roster.insert(id, entry(id, &format!("Player {id:02}"), group, games));
        scores.push(score(id, s, games));
    };
    for (i, s) in [3.0, 2.0, 1.0, 0.0, -1.0].into_iter().enumerate() {
        add(i as u64, PositionGroup::Defender, s, 3);
    }
    add(10, PositionGroup::Defender, 9.0, 2);
    for i in 0..3 {
        add(20 + i, PositionGroup::Midfielder, 1.0, 3);
    }
    add(30, PositionGroup::Striker, 1.58, 3);
    add(31, PositionGroup::Striker, 1.58, 5);
    add(32, PositionGroup::Striker, 2.0, 3);
    add(33, PositionGroup::Striker, 0.5, 3);

    let team = select_symbolic_team(&scores, &roster, 3, None).unwrap();
    let ids: Vec<u64> = team.members.iter().map(|m| m.player_id).collect();
    assert_eq!(ids, [0, 1, 2, 3, 20, 21, 22, 32, 31, 30]);

    // Tie at 1.58 goes to the player with more games when only one slot is left.
    scores.retain(|s| s.player_id != 33);
    let without_top = |id| {
        scores
            .iter()
            .filter(|s| s.player_id != id)
            .cloned()
            .collect::<Vec<_>>()
    };
    let mut fewer = without_top(32);
    fewer.push(score(34, -5.0, 3));
    roster.insert(34, entry(34, "Player 34", PositionGroup::Striker, 3));
    let t = select_symbolic_team(&fewer, &roster, 3, None).unwrap();
    let strikers: Vec<u64> = t.members[7..].iter().map(|m| m.player_id).collect();
    assert_eq!(strikers, [31, 30, 34]);

    let italy = ["Italy".to_string()].into_iter().collect();
    let err = select_symbolic_team(&scores, &roster, 3, Some(&italy)).unwrap_err();
    assert!(
        err.to_string().contains("efender")
            || err.to_string().contains("idfielder")
            || err.to_string().contains("triker")
    );
}

#[test]
fn player_report_rows() {
    let roster = BTreeMap::from([
        (
            1,
            entry(1, "Jorge Luiz Frello Filho", PositionGroup::Midfielder, 4),
        ),
        (2, entry(2, "Unlinked Player", PositionGroup::Defender, 4)),
    ]);
    let scores = vec![score(1, 1.51, 4), score(2, 0.3, 4)];
    let mut roster = roster;
    roster.get_mut(&1).unwrap().nickname = Some("Jorginho".into());
    let links = BTreeMap::from([(1, 101)]);
    let valuations = Valuations {
        series: BTreeMap::from([(
            101,
            vec![
                valuation(101, "2021-05-01", 45_000_000),
                valuation(101, "2021-09-01", 50_000_000),
            ],
        )]),
        warnings: 0,
    };
    let directory = PlayerDirectory {
        players: BTreeMap::from([(101, meta(101, Some("1991-12-20")))]),
        warnings: 0,
    };
    let window = TransferWindow::new(d("2021-06-11"), d("2021-07-11")).unwrap();
    let transfers =
        build_transfer_dataset(&scores, &roster, &links, &valuations, &directory, window).unwrap();
    let data = transfers.to_dataset().unwrap();
    let model: ModelArtifact = fit_regressor(
        Algorithm::DecisionTree,
        &data,
        &Hyperparameters::from([("max_depth".to_string(), 0.0)]),
        1,
    )
    .unwrap();
    assert_eq!(predict_fee_change(&model, &transfers.rows[0]).unwrap(), 5.0);

    let queries = vec![
        "Jorginho".to_string(),
        "Unlinked Player".to_string(),
        "Someone Else".to_string(),
    ];
    let rows = player_report(&queries, &roster, &scores, &model, &transfers).unwrap();
    assert_eq!(rows[0].name, "Jorginho");
    assert_eq!(rows[0].team, "Denmark");
    assert_eq!(rows[0].score, Some(1.51));
    assert_eq!(rows[0].realized_change, Some(5.0));
    assert_eq!(rows[0].status, ReportStatus::Ok);
    assert_eq!(rows[1].status, ReportStatus::Unlinked);
    assert_eq!(rows[2].status, ReportStatus::NotInRoster);
    assert!(player_report(&[], &roster, &scores, &model, &transfers)
        .unwrap()
        .is_empty());
    let csv = player_report_csv(&rows);
    assert_eq!(csv.lines().count(), 4);
}
