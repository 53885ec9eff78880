//! Pipeline configuration: one TOML file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chainvalue_ml::{Algorithm, Grid, SelectionMetric};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Root of the StatsBomb open-data layout.
    pub open_data: PathBuf,
    /// Directory holding `players.csv` and `player_valuations.csv`.
    pub market: PathBuf,
    pub link_overrides: Option<PathBuf>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            open_data: PathBuf::from("open-data/data"),
            market: PathBuf::from("player-scores"),
            link_overrides: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    /// Distance to the goal-line point (120, 80) instead of the goal centre.
    pub paper_distance_formula: bool,
    pub ablate_leakage_feature: bool,
    pub suppress_shooter_delta: bool,
    pub exclude_penalties: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelsConfig {
    pub classifiers: Vec<Algorithm>,
    pub regressors: Vec<Algorithm>,
    /// Classifier whose xG and scorer models feed the valuation.
    pub valuation_algorithm: Algorithm,
    pub transfer_algorithm: Algorithm,
    pub selection_metric: SelectionMetric,
    pub regression_metric: SelectionMetric,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        ModelsConfig {
            classifiers: vec![
                Algorithm::LogisticRegression,
                Algorithm::DecisionTree,
                Algorithm::RandomForest,
                Algorithm::GradientBoostedTrees,
            ],
            regressors: vec![
                Algorithm::DecisionTree,
                Algorithm::RandomForest,
                Algorithm::GradientBoostedTrees,
            ],
            valuation_algorithm: Algorithm::GradientBoostedTrees,
            transfer_algorithm: Algorithm::GradientBoostedTrees,
            selection_metric: SelectionMetric::F1Weighted,
            regression_metric: SelectionMetric::Mae,
        }
    }
}

/// Class-0 weights; unset means the positive prevalence of the training split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassWeightConfig {
    pub xg_negative: Option<f64>,
    pub scorer_negative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeamConfig {
    /// Only players of teams that reached the quarter-finals.
    pub quarter_finalists_only: bool,
    /// Explicit team names; overrides the quarter-final filter when set.
    pub allowlist: Option<Vec<String>>,
}

impl Default for TeamConfig {
    fn default() -> Self {
        TeamConfig {
            quarter_finalists_only: true,
            allowlist: None,
        }
    }
}

pub type GridConfig = BTreeMap<String, BTreeMap<String, Vec<f64>>>;

pub fn default_grids() -> GridConfig {
    let g = |pairs: &[(&str, &[f64])]| -> BTreeMap<String, Vec<f64>> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_vec()))
            .collect()
    };
    BTreeMap::from([
        (
            Algorithm::LogisticRegression.name().to_string(),
            g(&[("c", &[0.1, 1.0, 10.0])]),
        ),
        (
            Algorithm::DecisionTree.name().to_string(),
            g(&[("max_depth", &[3.0, 6.0, 9.0])]),
        ),
        (
            Algorithm::RandomForest.name().to_string(),
            g(&[
                ("max_depth", &[3.0, 6.0, 9.0]),
                ("n_trees", &[100.0, 300.0]),
            ]),
        ),
        (
            Algorithm::GradientBoostedTrees.name().to_string(),
            g(&[
                ("max_depth", &[3.0, 6.0, 9.0]),
                ("n_trees", &[100.0, 300.0]),
                ("learning_rate", &[0.05, 0.1]),
            ]),
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub min_games: u32,
    /// (competition_id, season_id) pairs.
    pub competitions: Vec<(u32, u32)>,
    /// Player names or ids for the valuation report.
    pub report_players: Vec<String>,
    pub data: DataConfig,
    pub window: WindowConfig,
    pub flags: Flags,
    pub models: ModelsConfig,
    pub class_weights: ClassWeightConfig,
    pub team: TeamConfig,
    pub grids: GridConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 20_210_611,
            test_fraction: 0.3,
            min_games: 3,
            competitions: vec![(55, 43)],
            report_players: Vec::new(),
            data: DataConfig::default(),
            window: WindowConfig::default(),
            flags: Flags::default(),
            models: ModelsConfig::default(),
            class_weights: ClassWeightConfig::default(),
            team: TeamConfig::default(),
            grids: default_grids(),
        }
    }
}

const TOP_LEVEL: &[&str] = &[
    "seed",
    "test_fraction",
    "min_games",
    "competitions",
    "report_players",
    "data",
    "window",
    "flags",
    "models",
    "class_weights",
    "team",
    "grids",
];

const TABLES: &[(&str, &[&str])] = &[
    ("data", &["open_data", "market", "link_overrides"]),
    ("window", &["start", "end"]),
    (
        "flags",
        &[
            "paper_distance_formula",
            "ablate_leakage_feature",
            "suppress_shooter_delta",
            "exclude_penalties",
        ],
    ),
    (
        "models",
        &[
            "classifiers",
            "regressors",
            "valuation_algorithm",
            "transfer_algorithm",
            "selection_metric",
            "regression_metric",
        ],
    ),
    ("class_weights", &["xg_negative", "scorer_negative"]),
    ("team", &["quarter_finalists_only", "allowlist"]),
];

/// Every key the schema does not know, as dotted paths.
fn unknown_keys(doc: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in doc {
        if !TOP_LEVEL.contains(&key.as_str()) {
            out.push(format!("unknown key `{key}`"));
            continue;
        }
        if key == "grids" {
            let Some(grids) = value.as_table() else {
                continue;
            };
            for (alg, params) in grids {
                let Some(algorithm) = Algorithm::from_name(alg) else {
                    out.push(format!("unknown key `grids.{alg}`"));
                    continue;
                };
                let known = algorithm.defaults();
                for param in params.as_table().into_iter().flat_map(|t| t.keys()) {
                    if !known.contains_key(param) {
                        out.push(format!("unknown key `grids.{alg}.{param}`"));
                    }
                }
            }
            continue;
        }
        if let (Some((_, allowed)), Some(table)) = (
            TABLES.iter().find(|(name, _)| name == key),
            value.as_table(),
        ) {
            for sub in table.keys() {
                if !allowed.contains(&sub.as_str()) {
                    out.push(format!("unknown key `{key}.{sub}`"));
                }
            }
        }
    }
    out
}

impl PipelineConfig {
    /// Parses TOML text. Unknown keys and invalid values are reported
    /// together.
    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config {
                problems: vec![e.message().to_string()],
            })?;
        let mut problems = unknown_keys(&doc);
        if !problems.is_empty() {
            return Err(CliError::Config { problems });
        }
        let mut config: PipelineConfig =
            toml::Value::Table(doc.clone())
                .try_into()
                .map_err(|e: toml::de::Error| CliError::Config {
                    problems: vec![e.message().to_string()],
                })?;
        // A grid table replaces the default grid of that algorithm only.
        if let Some(grids) = doc.get("grids").and_then(|g| g.as_table()) {
            let mut merged = default_grids();
            for alg in grids.keys() {
                if let Some(g) = config.grids.get(alg) {
                    merged.insert(alg.clone(), g.clone());
                }
            }
            config.grids = merged;
        }
        problems.extend(config.problems());
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(CliError::Config { problems })
        }
    }

    /// Loads a file and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.open_data);
        fix(&mut self.data.market);
        if let Some(p) = self.data.link_overrides.as_mut() {
            fix(p);
        }
    }

    /// Every invalid value, empty when the config is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            out.push(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            ));
        }
        if self.min_games == 0 {
            out.push("min_games must be at least 1".into());
        }
        if let (Some(s), Some(e)) = (self.window.start, self.window.end) {
            if e < s {
                out.push(format!("window.end {e} is before window.start {s}"));
            }
        }
        let m = &self.models;
        if m.classifiers.is_empty() {
            out.push("models.classifiers is empty".into());
        }
        if !m.classifiers.contains(&m.valuation_algorithm) {
            out.push(format!(
                "models.valuation_algorithm `{}` is not among models.classifiers",
                m.valuation_algorithm
            ));
        }
        if m.regressors.contains(&Algorithm::LogisticRegression) {
            out.push("models.regressors cannot contain logistic_regression".into());
        }
        if !m.regressors.contains(&m.transfer_algorithm) {
            out.push(format!(
                "models.transfer_algorithm `{}` is not among models.regressors",
                m.transfer_algorithm
            ));
        }
        if !matches!(
            m.selection_metric,
            SelectionMetric::F1Weighted | SelectionMetric::RecallWeighted
        ) {
            out.push("models.selection_metric must be f1_weighted or recall_weighted".into());
        }
        if !matches!(
            m.regression_metric,
            SelectionMetric::Mae | SelectionMetric::Rmse
        ) {
            out.push("models.regression_metric must be mae or rmse".into());
        }
        for (name, w) in [
            ("class_weights.xg_negative", self.class_weights.xg_negative),
            (
                "class_weights.scorer_negative",
                self.class_weights.scorer_negative,
            ),
        ] {
            if let Some(w) = w {
                if !(w.is_finite() && w > 0.0) {
                    out.push(format!("{name} must be positive, got {w}"));
                }
            }
        }
        for (alg, params) in &self.grids {
            for (param, values) in params {
                if values.is_empty() {
                    out.push(format!("grids.{alg}.{param} is empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    out.push(format!("grids.{alg}.{param} holds a non-finite value"));
                }
            }
        }
        out
    }

    pub fn grid(&self, algorithm: Algorithm) -> Grid {
        let mut grid = Grid::new();
        if let Some(params) = self.grids.get(algorithm.name()) {
            for (name, values) in params {
                grid = grid.with(name, values);
            }
        }
        grid
    }

    /// Hash of the settings that influence outputs.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

/// Command-line overrides; `None` leaves the file or default value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub open_data: Option<PathBuf>,
    pub market: Option<PathBuf>,
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    pub paper_distance_formula: Option<bool>,
    pub ablate_leakage_feature: Option<bool>,
    pub suppress_shooter_delta: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, config: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = &self.open_data {
            config.data.open_data = v.clone();
        }
        if let Some(v) = &self.market {
            config.data.market = v.clone();
        }
        if let Some(v) = self.window_start {
            config.window.start = Some(v);
        }
        if let Some(v) = self.window_end {
            config.window.end = Some(v);
        }
        if let Some(v) = self.paper_distance_formula {
            config.flags.paper_distance_formula = v;
        }
        if let Some(v) = self.ablate_leakage_feature {
            config.flags.ablate_leakage_feature = v;
        }
        if let Some(v) = self.suppress_shooter_delta {
            config.flags.suppress_shooter_delta = v;
        }
        let problems = config.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config { problems })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(PipelineConfig::default().problems().is_empty());
        assert_eq!(
            PipelineConfig::from_toml("").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn every_unknown_key_is_listed() {
        let err = PipelineConfig::from_toml(
            "sed = 1\n[flags]\nsuppress = true\n[grids.random_forest]\ndepth = [3]\n[grids.svm]\nc = [1]\n",
        )
        .unwrap_err();
        let CliError::Config { problems } = err else {
            panic!("{err}")
        };
        assert_eq!(problems.len(), 4, "{problems:?}");
        assert!(problems.iter().any(|p| p.contains("`sed`")));
        assert!(problems.iter().any(|p| p.contains("`flags.suppress`")));
        assert!(problems
            .iter()
            .any(|p| p.contains("`grids.random_forest.depth`")));
        assert!(problems.iter().any(|p| p.contains("`grids.svm`")));
    }

    #[test]
    fn invalid_values_are_listed_together() {
        let err = PipelineConfig::from_toml(
            "test_fraction = 1.5\n[window]\nstart = \"2021-07-01\"\nend = \"2021-06-01\"\n",
        )
        .unwrap_err();
        let CliError::Config { problems } = err else {
            panic!()
        };
        assert_eq!(problems.len(), 2, "{problems:?}");
    }

    #[test]
    fn grid_table_replaces_only_its_algorithm() {
        let c = PipelineConfig::from_toml("[grids.logistic_regression]\nc = [0.5]\n").unwrap();
        assert_eq!(c.grids["logistic_regression"]["c"], vec![0.5]);
        assert_eq!(c.grids["random_forest"], default_grids()["random_forest"]);
    }

    #[test]
    fn flags_override_file() {
        let mut c = PipelineConfig::from_toml("seed = 5\n[flags]\nsuppress_shooter_delta = true\n")
            .unwrap();
        Overrides {
            seed: Some(9),
            suppress_shooter_delta: Some(false),
            ..Overrides::default()
        }
        .apply(&mut c)
        .unwrap();
        assert_eq!(c.seed, 9);
        assert!(!c.flags.suppress_shooter_delta);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.seed += 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
