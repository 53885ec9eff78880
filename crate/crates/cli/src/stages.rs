//! Pipeline stages. Each reads its upstream files from the output
//! directory, writes its own files and a manifest, and touches nothing else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chainvalue_core::applications::{
    player_report, player_report_csv, select_symbolic_team, SymbolicTeam,
};
use chainvalue_core::chains::{extract_chains, DroppedShot, PossessionChain};
use chainvalue_core::ingest::{
    events_path, lineups_path, load_events, load_lineups, load_matches, MatchInfo, SkippedRecord,
};
use chainvalue_core::jsonl::{read_jsonl, to_jsonl};
use chainvalue_core::linking::{link_players, parse_overrides, LinkCandidate, LinkReport};
use chainvalue_core::market::{load_player_meta, load_valuations};
use chainvalue_core::roster::{appearances, build_roster, roles, MatchSheet, RosterEntry};
use chainvalue_core::scorer::{build_scorer_dataset, ScorerOptions};
use chainvalue_core::transfer::{
    build_transfer_dataset, summarize_target, TargetSummary, TransferDataset, TransferModelReport,
    TransferWindow,
};
use chainvalue_core::valuation::{
    aggregate_scores, chain_probabilities, credit_chain, ValuationOptions,
};
use chainvalue_core::xg::{build_xg_dataset, XgOptions};
use chainvalue_core::{DistanceFormula, Event, PitchSpec, PlayerScore};
use chainvalue_ml::rng::derive_seed;
use chainvalue_ml::{
    evaluate_classifier, evaluate_regressor, shuffle_split, stratified_split, train_classifier,
    train_regressor, Algorithm, ClassWeights, ClassificationReport, Dataset, Hyperparameters,
    ModelArtifact, TrainOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::manifest::{digest, sha256_bytes, FileDigest, Manifest};

pub const EVENTS: &str = "events.jsonl";
pub const PLAYERS: &str = "players.jsonl";
pub const MATCHES: &str = "matches.json";
pub const LINK_REPORT: &str = "link_report.json";
pub const INGEST_REPORT: &str = "ingest_report.json";
pub const CHAINS: &str = "chains.jsonl";
pub const CHAINS_REPORT: &str = "chains_report.json";
pub const XG_DATASET: &str = "xg_dataset.jsonl";
pub const XG_MODEL: &str = "xg_model.json";
pub const XG_REPORT: &str = "xg_report.json";
pub const XG_PR_CURVE: &str = "xg_pr_curve.csv";
pub const SCORER_DATASET: &str = "scorer_dataset.jsonl";
pub const SCORER_MODEL: &str = "scorer_model.json";
pub const SCORER_REPORT: &str = "scorer_report.json";
pub const SCORER_PR_CURVE: &str = "scorer_pr_curve.csv";
pub const CREDITS: &str = "credits.jsonl";
pub const PLAYER_SCORES: &str = "player_scores.jsonl";
pub const PLAYER_SCORES_CSV: &str = "player_scores.csv";
pub const TRANSFER_DATASET: &str = "transfer_dataset.json";
pub const TRANSFER_DATASET_CSV: &str = "transfer_dataset.csv";
pub const TRANSFER_MODEL: &str = "transfer_model.json";
pub const TRANSFER_REPORT: &str = "transfer_report.json";
pub const PLAYER_REPORT: &str = "player_report.csv";
pub const PLAYER_REPORT_JSON: &str = "player_report.json";
pub const SYMBOLIC_TEAM: &str = "symbolic_team.json";
pub const SYMBOLIC_TEAM_MD: &str = "symbolic_team.md";

pub const PLAYERS_CSV: &str = "players.csv";
pub const VALUATIONS_CSV: &str = "player_valuations.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StageName {
    Ingest,
    Chains,
    TrainXg,
    TrainScorer,
    ScorePlayers,
    TrainTransfer,
    Predict,
    Team,
}

impl StageName {
    pub const ALL: [StageName; 8] = [
        StageName::Ingest,
        StageName::Chains,
        StageName::TrainXg,
        StageName::TrainScorer,
        StageName::ScorePlayers,
        StageName::TrainTransfer,
        StageName::Predict,
        StageName::Team,
    ];

    pub fn command(self) -> &'static str {
        match self {
            StageName::Ingest => "ingest",
            StageName::Chains => "chains",
            StageName::TrainXg => "train-xg",
            StageName::TrainScorer => "train-scorer",
            StageName::ScorePlayers => "score-players",
            StageName::TrainTransfer => "train-transfer",
            StageName::Predict => "predict",
            StageName::Team => "team",
        }
    }
}

/// Command that writes `file`.
fn producer_of(file: &str) -> &'static str {
    match file {
        EVENTS | PLAYERS | MATCHES | LINK_REPORT | INGEST_REPORT => "ingest",
        CHAINS | CHAINS_REPORT => "chains",
        XG_DATASET | XG_MODEL | XG_REPORT | XG_PR_CURVE => "train-xg",
        SCORER_DATASET | SCORER_MODEL | SCORER_REPORT | SCORER_PR_CURVE => "train-scorer",
        CREDITS | PLAYER_SCORES | PLAYER_SCORES_CSV => "score-players",
        TRANSFER_DATASET | TRANSFER_DATASET_CSV | TRANSFER_MODEL | TRANSFER_REPORT => {
            "train-transfer"
        }
        _ => "report-all",
    }
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
}

struct StageRun<'a> {
    name: StageName,
    pipeline: &'a Pipeline,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl<'a> StageRun<'a> {
    fn new(pipeline: &'a Pipeline, name: StageName) -> Self {
        info!(stage = name.command(), "starting");
        StageRun {
            name,
            pipeline,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Path of an upstream output, recorded as an input.
    fn upstream(&mut self, file: &str) -> Result<PathBuf> {
        let path = self.pipeline.out_dir.join(file);
        if !path.is_file() {
            return Err(CliError::MissingInput {
                producer: producer_of(file),
                name: file.to_string(),
            });
        }
        self.inputs.push(digest(file, &path)?);
        Ok(path)
    }

    fn read_upstream<T: serde::de::DeserializeOwned>(&mut self, file: &str) -> Result<T> {
        let path = self.upstream(file)?;
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path,
            message: e.to_string(),
        })
    }

    fn read_upstream_lines<T: serde::de::DeserializeOwned>(
        &mut self,
        file: &str,
    ) -> Result<Vec<T>> {
        let path = self.upstream(file)?;
        Ok(read_jsonl(&path)?)
    }

    fn read_model(&mut self, file: &str) -> Result<ModelArtifact> {
        let path = self.upstream(file)?;
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(ModelArtifact::from_json(&text)?)
    }

    fn external(&mut self, label: String, path: &Path) -> Result<()> {
        self.inputs.push(digest(label, path)?);
        Ok(())
    }

    fn write(&mut self, file: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.pipeline.out_dir.join(file);
        std::fs::write(&path, bytes.as_ref()).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(FileDigest {
            name: file.to_string(),
            sha256: sha256_bytes(bytes.as_ref()),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(file, text)
    }

    fn finish(self) -> Result<Manifest> {
        let manifest = Manifest {
            stage: self.name.command().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: self.pipeline.config.fingerprint(),
            seed: self.pipeline.config.seed,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        manifest.write(&self.pipeline.out_dir)?;
        info!(stage = self.name.command(), "done");
        Ok(manifest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub matches: usize,
    pub events: usize,
    pub raw_shot_rows: usize,
    pub parsed_shots: usize,
    pub skipped_shots: usize,
    pub skipped_records: Vec<SkippedRecord>,
    pub matches_without_lineups: Vec<u64>,
    pub roster_players: usize,
    pub linked_players: usize,
    pub unmatched_players: usize,
    pub valuation_rows_dropped: usize,
    pub player_rows_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainsReport {
    pub matches: usize,
    pub shot_events: usize,
    pub chains: usize,
    pub goal_chains: usize,
    pub actions: usize,
    pub dropped: Vec<DroppedShot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSummary {
    pub algorithm: Algorithm,
    pub hyperparameters: Hyperparameters,
    pub grid: Vec<chainvalue_ml::artifact::GridCellScore>,
    pub f1_weighted: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub auc: Option<f64>,
    pub support: [usize; 2],
    pub confusion: chainvalue_ml::metrics::Confusion,
    pub feature_importances: Vec<chainvalue_ml::FeatureImportance>,
}

impl ClassifierSummary {
    fn new(m: &ModelArtifact, r: &ClassificationReport) -> Self {
        ClassifierSummary {
            algorithm: m.algorithm,
            hyperparameters: m.hyperparameters.clone(),
            grid: m.training.grid.clone(),
            f1_weighted: r.f1_weighted,
            precision_weighted: r.precision_weighted,
            recall_weighted: r.recall_weighted,
            auc: r.auc,
            support: r.support,
            confusion: r.confusion,
            feature_importances: m.feature_importances.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub rows: usize,
    pub positives: usize,
    pub prevalence: Option<f64>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub class_weights: ClassWeights,
    pub selected: Algorithm,
    pub models: Vec<ClassifierSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XgReport {
    pub distance_feature: String,
    pub skipped_without_detail: usize,
    pub excluded_penalties: usize,
    #[serde(flatten)]
    pub classifiers: ClassifierReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerReport {
    pub chain_remainder_feature: bool,
    #[serde(flatten)]
    pub classifiers: ClassifierReport,
    /// The selected algorithm trained with the chain-remainder feature
    /// toggled the other way, on the same split.
    pub counterpart: ClassifierSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub window: TransferWindow,
    pub rows: usize,
    pub excluded: BTreeMap<String, usize>,
    pub target: Option<TargetSummary>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub selected: Algorithm,
    pub models: Vec<TransferModelEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferModelEntry {
    pub hyperparameters: Hyperparameters,
    pub grid: Vec<chainvalue_ml::artifact::GridCellScore>,
    #[serde(flatten)]
    pub report: TransferModelReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamOutput {
    /// Teams whose players were eligible; `None` means every team.
    pub team_filter: Option<Vec<String>>,
    #[serde(flatten)]
    pub team: SymbolicTeam,
}

fn stage_seed(seed: u64, label: &str) -> u64 {
    derive_seed(seed, label)
}

fn pr_curve_csv(rows: &[(Algorithm, &ClassificationReport)]) -> String {
    let mut out = String::from("algorithm,threshold,precision,recall\n");
    for (alg, r) in rows {
        for p in &r.pr_curve {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                alg.name(),
                p.threshold,
                p.precision,
                p.recall
            );
        }
    }
    out
}

struct TrainedClassifiers {
    train: Dataset,
    test: Dataset,
    weights: ClassWeights,
    models: Vec<(ModelArtifact, ClassificationReport)>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, out_dir: impl Into<PathBuf>) -> Result<Self> {
        let out_dir = out_dir.into();
        std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
        Ok(Pipeline { config, out_dir })
    }

    fn xg_options(&self) -> XgOptions {
        XgOptions {
            pitch: PitchSpec::default(),
            distance: if self.config.flags.paper_distance_formula {
                DistanceFormula::Literal
            } else {
                DistanceFormula::GoalCenter
            },
            exclude_penalties: self.config.flags.exclude_penalties,
        }
    }

    fn scorer_options(&self) -> ScorerOptions {
        ScorerOptions {
            ablate_chain_remainder: self.config.flags.ablate_leakage_feature,
        }
    }

    pub fn run(&self, stage: StageName) -> Result<Manifest> {
        match stage {
            StageName::Ingest => self.ingest(),
            StageName::Chains => self.chains(),
            StageName::TrainXg => self.train_xg(),
            StageName::TrainScorer => self.train_scorer(),
            StageName::ScorePlayers => self.score_players(),
            StageName::TrainTransfer => self.train_transfer(),
            StageName::Predict => self.predict(),
            StageName::Team => self.team(),
        }
    }

    pub fn run_all(&self) -> Result<Vec<Manifest>> {
        StageName::ALL.iter().map(|&s| self.run(s)).collect()
    }

    pub fn ingest(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::Ingest);
        let root = &self.config.data.open_data;
        let matches = load_matches(root, &self.config.competitions)?;
        for (c, s) in &self.config.competitions {
            let index = root
                .join("matches")
                .join(c.to_string())
                .join(format!("{s}.json"));
            run.external(format!("open-data/matches/{c}/{s}.json"), &index)?;
        }

        let loaded: Vec<_> = matches
            .par_iter()
            .map(|m| -> Result<_> {
                let events = load_events(root, m.match_id)?;
                let lineups = if lineups_path(root, m.match_id).is_file() {
                    Some(load_lineups(root, m.match_id)?)
                } else {
                    None
                };
                Ok((events, lineups))
            })
            .collect::<Result<_>>()?;
        for m in &matches {
            run.external(
                format!("open-data/events/{}.json", m.match_id),
                &events_path(root, m.match_id),
            )?;
            let lp = lineups_path(root, m.match_id);
            if lp.is_file() {
                run.external(format!("open-data/lineups/{}.json", m.match_id), &lp)?;
            }
        }

        let sheets: Vec<MatchSheet<'_>> = loaded
            .iter()
            .map(|(events, lineups)| MatchSheet {
                events,
                lineups: lineups.as_deref(),
            })
            .collect();
        let roster = build_roster(&sheets);

        let market = &self.config.data.market;
        let players_csv = market.join(PLAYERS_CSV);
        let valuations_csv = market.join(VALUATIONS_CSV);
        let directory = load_player_meta(&players_csv)?;
        let valuations = load_valuations(&valuations_csv)?;
        run.external(format!("market/{PLAYERS_CSV}"), &players_csv)?;
        run.external(format!("market/{VALUATIONS_CSV}"), &valuations_csv)?;
        let overrides = match &self.config.data.link_overrides {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                run.external("link_overrides".to_string(), path)?;
                parse_overrides(&text)?
            }
            None => BTreeMap::new(),
        };
        let candidates: Vec<LinkCandidate> = roster
            .values()
            .map(|e| LinkCandidate {
                player_id: e.player_id,
                name: e.name.clone(),
                nickname: e.nickname.clone(),
            })
            .collect();
        let links = link_players(&candidates, &directory, &overrides);

        let events: Vec<&Event> = loaded.iter().flat_map(|(m, _)| &m.events).collect();
        let report = IngestReport {
            matches: matches.len(),
            events: events.len(),
            raw_shot_rows: loaded.iter().map(|(m, _)| m.raw_shot_rows).sum(),
            parsed_shots: loaded.iter().map(|(m, _)| m.parsed_shots()).sum(),
            skipped_shots: loaded.iter().map(|(m, _)| m.skipped_shots()).sum(),
            skipped_records: loaded.iter().flat_map(|(m, _)| m.skipped.clone()).collect(),
            matches_without_lineups: loaded
                .iter()
                .filter(|(_, l)| l.is_none())
                .map(|(m, _)| m.match_id)
                .collect(),
            roster_players: roster.len(),
            linked_players: links.links.len(),
            unmatched_players: links.unmatched.len(),
            valuation_rows_dropped: valuations.warnings,
            player_rows_dropped: directory.warnings,
        };
        let roster: Vec<&RosterEntry> = roster.values().collect();
        run.write(EVENTS, to_jsonl(&events))?;
        run.write(PLAYERS, to_jsonl(&roster))?;
        run.write_json(MATCHES, &matches)?;
        run.write_json(LINK_REPORT, &links)?;
        run.write_json(INGEST_REPORT, &report)?;
        run.finish()
    }

    pub fn chains(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::Chains);
        let events: Vec<Event> = run.read_upstream_lines(EVENTS)?;
        let mut by_match: BTreeMap<u64, Vec<Event>> = BTreeMap::new();
        for e in events {
            by_match.entry(e.match_id).or_default().push(e);
        }
        let extractions: Vec<_> = by_match
            .par_iter()
            .map(|(id, events)| extract_chains(*id, events))
            .collect();
        let chains: Vec<&PossessionChain> = extractions.iter().flat_map(|x| &x.chains).collect();
        let report = ChainsReport {
            matches: by_match.len(),
            shot_events: extractions.iter().map(|x| x.shot_events).sum(),
            chains: chains.len(),
            goal_chains: chains.iter().filter(|c| c.ends_in_goal).count(),
            actions: chains.iter().map(|c| c.len()).sum(),
            dropped: extractions.iter().flat_map(|x| x.dropped.clone()).collect(),
        };
        run.write(CHAINS, to_jsonl(&chains))?;
        run.write_json(CHAINS_REPORT, &report)?;
        run.finish()
    }

    fn train_classifiers(
        &self,
        dataset: &Dataset,
        label: &str,
        negative: Option<f64>,
    ) -> Result<TrainedClassifiers> {
        let seed = self.config.seed;
        let (train, test) = stratified_split(
            dataset,
            self.config.test_fraction,
            stage_seed(seed, &format!("{label}-split")),
        )?;
        let weights = match negative {
            Some(w) => ClassWeights {
                negative: w,
                positive: 1.0,
            },
            None => ClassWeights::from_prevalence(&train),
        };
        let opts = TrainOptions {
            selection: self.config.models.selection_metric,
        };
        let mut models = Vec::new();
        for &alg in &self.config.models.classifiers {
            info!(
                model = label,
                algorithm = alg.name(),
                rows = train.len(),
                "training"
            );
            let m = train_classifier(
                alg,
                &train,
                weights,
                &self.config.grid(alg),
                stage_seed(seed, &format!("{label}-train")),
                opts,
            )?;
            let r = evaluate_classifier(&m, &test)?;
            models.push((m, r));
        }
        Ok(TrainedClassifiers {
            train,
            test,
            weights,
            models,
        })
    }

    fn classifier_report(
        &self,
        dataset: &Dataset,
        trained: &TrainedClassifiers,
    ) -> ClassifierReport {
        ClassifierReport {
            rows: dataset.len(),
            positives: dataset.target().iter().filter(|&&y| y == 1.0).count(),
            prevalence: dataset.prevalence(),
            train_rows: trained.train.len(),
            test_rows: trained.test.len(),
            class_weights: trained.weights,
            selected: self.config.models.valuation_algorithm,
            models: trained
                .models
                .iter()
                .map(|(m, r)| ClassifierSummary::new(m, r))
                .collect(),
        }
    }

    fn selected<'t>(&self, trained: &'t TrainedClassifiers) -> &'t ModelArtifact {
        &trained
            .models
            .iter()
            .find(|(m, _)| m.algorithm == self.config.models.valuation_algorithm)
            .expect("validated: valuation algorithm is trained")
            .0
    }

    pub fn train_xg(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::TrainXg);
        let chains: Vec<PossessionChain> = run.read_upstream_lines(CHAINS)?;
        let opts = self.xg_options();
        let xg = build_xg_dataset(&chains, &opts)?;
        let trained =
            self.train_classifiers(&xg.dataset, "xg", self.config.class_weights.xg_negative)?;
        let report = XgReport {
            distance_feature: chainvalue_core::xg::xg_schema(&opts).features()[5]
                .name
                .clone(),
            skipped_without_detail: xg.skipped_without_detail,
            excluded_penalties: xg.excluded_penalties,
            classifiers: self.classifier_report(&xg.dataset, &trained),
        };
        let curves: Vec<_> = trained
            .models
            .iter()
            .map(|(m, r)| (m.algorithm, r))
            .collect();
        run.write(XG_DATASET, xg.dataset.to_jsonl()?)?;
        run.write(XG_MODEL, self.selected(&trained).to_json()?)?;
        run.write_json(XG_REPORT, &report)?;
        run.write(XG_PR_CURVE, pr_curve_csv(&curves))?;
        run.finish()
    }

    pub fn train_scorer(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::TrainScorer);
        let chains: Vec<PossessionChain> = run.read_upstream_lines(CHAINS)?;
        let opts = self.scorer_options();
        let data = build_scorer_dataset(&chains, &opts)?;
        let trained = self.train_classifiers(
            &data.dataset,
            "scorer",
            self.config.class_weights.scorer_negative,
        )?;

        // Same rows and targets, so the same seed gives the same partition.
        let other = ScorerOptions {
            ablate_chain_remainder: !opts.ablate_chain_remainder,
        };
        let other_data = build_scorer_dataset(&chains, &other)?;
        let (other_train, other_test) = stratified_split(
            &other_data.dataset,
            self.config.test_fraction,
            stage_seed(self.config.seed, "scorer-split"),
        )?;
        let alg = self.config.models.valuation_algorithm;
        let counterpart = train_classifier(
            alg,
            &other_train,
            trained.weights,
            &self.config.grid(alg),
            stage_seed(self.config.seed, "scorer-train"),
            TrainOptions {
                selection: self.config.models.selection_metric,
            },
        )?;
        let counterpart_report = evaluate_classifier(&counterpart, &other_test)?;

        let report = ScorerReport {
            chain_remainder_feature: !opts.ablate_chain_remainder,
            classifiers: self.classifier_report(&data.dataset, &trained),
            counterpart: ClassifierSummary::new(&counterpart, &counterpart_report),
        };
        let curves: Vec<_> = trained
            .models
            .iter()
            .map(|(m, r)| (m.algorithm, r))
            .collect();
        run.write(SCORER_DATASET, data.dataset.to_jsonl()?)?;
        run.write(SCORER_MODEL, self.selected(&trained).to_json()?)?;
        run.write_json(SCORER_REPORT, &report)?;
        run.write(SCORER_PR_CURVE, pr_curve_csv(&curves))?;
        run.finish()
    }

    pub fn score_players(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::ScorePlayers);
        let chains: Vec<PossessionChain> = run.read_upstream_lines(CHAINS)?;
        let roster: Vec<RosterEntry> = run.read_upstream_lines(PLAYERS)?;
        let xg = run.read_model(XG_MODEL)?;
        let scorer = run.read_model(SCORER_MODEL)?;
        let roster: BTreeMap<u64, RosterEntry> =
            roster.into_iter().map(|e| (e.player_id, e)).collect();
        let (xg_opts, scorer_opts) = (self.xg_options(), self.scorer_options());

        let probabilities: Vec<Vec<f64>> = chains
            .par_iter()
            .map(|c| chain_probabilities(c, &scorer, &scorer_opts, &xg, &xg_opts))
            .collect::<Result<_, _>>()?;
        let role_map = roles(&roster);
        let games = appearances(&roster);
        let score = |suppress: bool| -> Result<(Vec<_>, Vec<PlayerScore>)> {
            let opts = ValuationOptions {
                suppress_shooter_delta: suppress,
                ..ValuationOptions::default()
            };
            let mut credits = Vec::new();
            for (c, p) in chains.iter().zip(&probabilities) {
                credits.extend(credit_chain(c, p, &role_map, &opts)?);
            }
            let scores = aggregate_scores(&credits, &games)?;
            Ok((credits, scores))
        };
        let suppress = self.config.flags.suppress_shooter_delta;
        let (credits, scores) = score(suppress)?;
        let (_, alternative) = score(!suppress)?;
        let alt: BTreeMap<u64, f64> = alternative
            .iter()
            .map(|s| (s.player_id, s.normalized))
            .collect();

        let mut csv = csv::Writer::from_writer(Vec::new());
        let (with_col, without_col) = (
            "normalized_with_shooter_delta",
            "normalized_without_shooter_delta",
        );
        csv.write_record([
            "player_id",
            "name",
            "team",
            "role",
            "games",
            "chains",
            "total",
            "normalized",
            with_col,
            without_col,
        ])
        .expect("in-memory csv");
        for s in &scores {
            let e = roster.get(&s.player_id);
            let other = alt.get(&s.player_id).copied().unwrap_or(0.0);
            let (with, without) = if suppress {
                (other, s.normalized)
            } else {
                (s.normalized, other)
            };
            csv.write_record([
                s.player_id.to_string(),
                e.map(|e| e.display_name().to_string()).unwrap_or_default(),
                e.map(|e| e.team.clone()).unwrap_or_default(),
                e.and_then(|e| e.position_group)
                    .map(|g| g.name().to_string())
                    .unwrap_or_default(),
                s.games_played.to_string(),
                s.chains_participated.to_string(),
                s.total.to_string(),
                s.normalized.to_string(),
                with.to_string(),
                without.to_string(),
            ])
            .expect("in-memory csv");
        }
        run.write(CREDITS, to_jsonl(&credits))?;
        run.write(PLAYER_SCORES, to_jsonl(&scores))?;
        run.write(PLAYER_SCORES_CSV, csv.into_inner().expect("in-memory csv"))?;
        run.finish()
    }

    fn window(&self, matches: &[MatchInfo]) -> Result<TransferWindow> {
        let first = matches.iter().map(|m| m.match_date).min();
        let last = matches.iter().map(|m| m.match_date).max();
        let start = self.config.window.start.or(first);
        let end = self.config.window.end.or(last);
        match (start, end) {
            (Some(s), Some(e)) => Ok(TransferWindow::new(s, e)?),
            _ => Err(CliError::Stage(
                "no transfer window: set window.start and window.end or ingest at least one match"
                    .into(),
            )),
        }
    }

    pub fn train_transfer(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::TrainTransfer);
        let scores: Vec<PlayerScore> = run.read_upstream_lines(PLAYER_SCORES)?;
        let roster: Vec<RosterEntry> = run.read_upstream_lines(PLAYERS)?;
        let links: LinkReport = run.read_upstream(LINK_REPORT)?;
        let matches: Vec<MatchInfo> = run.read_upstream(MATCHES)?;
        let roster: BTreeMap<u64, RosterEntry> =
            roster.into_iter().map(|e| (e.player_id, e)).collect();
        let players_csv = self.config.data.market.join(PLAYERS_CSV);
        let valuations_csv = self.config.data.market.join(VALUATIONS_CSV);
        let directory = load_player_meta(&players_csv)?;
        let valuations = load_valuations(&valuations_csv)?;
        run.external(format!("market/{PLAYERS_CSV}"), &players_csv)?;
        run.external(format!("market/{VALUATIONS_CSV}"), &valuations_csv)?;

        let window = self.window(&matches)?;
        let transfers = build_transfer_dataset(
            &scores,
            &roster,
            &links.links,
            &valuations,
            &directory,
            window,
        )?;
        let dataset = transfers.to_dataset()?;
        let seed = self.config.seed;
        let (train, test) = shuffle_split(
            &dataset,
            self.config.test_fraction,
            stage_seed(seed, "transfer-split"),
        )?;
        let opts = TrainOptions {
            selection: self.config.models.regression_metric,
        };
        let mut models = Vec::new();
        let mut selected = None;
        for &alg in &self.config.models.regressors {
            info!(
                algorithm = alg.name(),
                rows = train.len(),
                "training transfer model"
            );
            let m = train_regressor(
                alg,
                &train,
                &self.config.grid(alg),
                stage_seed(seed, "transfer-train"),
                opts,
            )?;
            let r = evaluate_regressor(&m, &test)?;
            models.push(TransferModelEntry {
                hyperparameters: m.hyperparameters.clone(),
                grid: m.training.grid.clone(),
                report: TransferModelReport::new(alg, &r, test.target()),
            });
            if alg == self.config.models.transfer_algorithm {
                selected = Some(m);
            }
        }
        let selected = selected.expect("validated: transfer algorithm is trained");

        let mut excluded: BTreeMap<String, usize> = BTreeMap::new();
        for e in &transfers.excluded {
            let key = serde_json::to_value(e.reason)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_else(|| format!("{:?}", e.reason));
            *excluded.entry(key).or_default() += 1;
        }
        let report = TransferReport {
            window,
            rows: transfers.rows.len(),
            excluded,
            target: summarize_target(dataset.target()),
            train_rows: train.len(),
            test_rows: test.len(),
            selected: self.config.models.transfer_algorithm,
            models,
        };
        run.write_json(TRANSFER_DATASET, &transfers)?;
        run.write(TRANSFER_DATASET_CSV, transfers.to_csv())?;
        run.write(TRANSFER_MODEL, selected.to_json()?)?;
        run.write_json(TRANSFER_REPORT, &report)?;
        run.finish()
    }

    pub fn predict(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::Predict);
        let model = run.read_model(TRANSFER_MODEL)?;
        let transfers: TransferDataset = run.read_upstream(TRANSFER_DATASET)?;
        let scores: Vec<PlayerScore> = run.read_upstream_lines(PLAYER_SCORES)?;
        let roster: Vec<RosterEntry> = run.read_upstream_lines(PLAYERS)?;
        let roster: BTreeMap<u64, RosterEntry> =
            roster.into_iter().map(|e| (e.player_id, e)).collect();
        let rows = player_report(
            &self.config.report_players,
            &roster,
            &scores,
            &model,
            &transfers,
        )?;
        run.write(PLAYER_REPORT, player_report_csv(&rows))?;
        run.write_json(PLAYER_REPORT_JSON, &rows)?;
        run.finish()
    }

    pub fn team(&self) -> Result<Manifest> {
        let mut run = StageRun::new(self, StageName::Team);
        let scores: Vec<PlayerScore> = run.read_upstream_lines(PLAYER_SCORES)?;
        let roster: Vec<RosterEntry> = run.read_upstream_lines(PLAYERS)?;
        let roster: BTreeMap<u64, RosterEntry> =
            roster.into_iter().map(|e| (e.player_id, e)).collect();
        let filter: Option<BTreeSet<String>> = match &self.config.team.allowlist {
            Some(list) => Some(list.iter().cloned().collect()),
            None if self.config.team.quarter_finalists_only => {
                let matches: Vec<MatchInfo> = run.read_upstream(MATCHES)?;
                let teams: BTreeSet<String> = matches
                    .iter()
                    .filter(|m| m.stage.to_lowercase().starts_with("quarter"))
                    .flat_map(|m| [m.home_team.name.clone(), m.away_team.name.clone()])
                    .collect();
                (!teams.is_empty()).then_some(teams)
            }
            None => None,
        };
        let team = select_symbolic_team(&scores, &roster, self.config.min_games, filter.as_ref())?;
        run.write(SYMBOLIC_TEAM_MD, team.to_markdown())?;
        run.write_json(
            SYMBOLIC_TEAM,
            &TeamOutput {
                team_filter: filter.map(|f| f.into_iter().collect()),
                team,
            },
        )?;
        run.finish()
    }
}
