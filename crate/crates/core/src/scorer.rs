//! Per-action features for the goal-scoring state model.

use chainvalue_ml::{Dataset, FeatureSpec, FeatureValue, ModelArtifact, Schema};
use serde::{Deserialize, Serialize};

use crate::chains::PossessionChain;
use crate::error::Result;

pub const CHAIN_REMAINDER_FEATURE: &str = "actions_to_chain_end";
pub const NO_PREVIOUS_ACTION: &str = "none";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScorerOptions {
    /// Drop the remaining-actions feature, which is only known once a chain
    /// has finished.
    pub ablate_chain_remainder: bool,
}

pub fn scorer_schema(opts: &ScorerOptions) -> Schema {
    let mut features = vec![
        FeatureSpec::categorical("action_type"),
        FeatureSpec::categorical("under_pressure"),
        FeatureSpec::categorical("previous_action_type"),
        FeatureSpec::categorical("play_pattern"),
        FeatureSpec::discrete("x"),
        FeatureSpec::discrete("y"),
        FeatureSpec::discrete(CHAIN_REMAINDER_FEATURE),
        FeatureSpec::discrete("action_number"),
        FeatureSpec::discrete("timestamp"),
        FeatureSpec::continuous("duration"),
        FeatureSpec::continuous("chain_duration_before"),
    ];
    if opts.ablate_chain_remainder {
        features.retain(|f| f.name != CHAIN_REMAINDER_FEATURE);
    }
    Schema::new(features)
}

/// Features of the action at 0-based `pos`, which must not be the shot.
pub fn scorer_features(
    chain: &PossessionChain,
    pos: usize,
    opts: &ScorerOptions,
) -> Vec<FeatureValue> {
    let a = &chain.actions[pos];
    let previous = pos
        .checked_sub(1)
        .map(|p| chain.actions[p].action_type.name().to_string())
        .unwrap_or_else(|| NO_PREVIOUS_ACTION.to_string());
    let before: f64 = chain.actions[..pos].iter().map(|a| a.duration).sum();
    let mut row: Vec<FeatureValue> = vec![
        a.action_type.name().into(),
        a.under_pressure.into(),
        previous.into(),
        a.play_pattern.as_str().into(),
        a.start_state.x.round().into(),
        a.start_state.y.round().into(),
    ];
    if !opts.ablate_chain_remainder {
        row.push(((chain.len() - a.k) as f64).into());
    }
    row.extend([
        (a.k as f64).into(),
        a.timestamp.round().into(),
        a.duration.into(),
        before.into(),
    ]);
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerDataset {
    pub dataset: Dataset,
    pub positive_rows: usize,
}

impl ScorerDataset {
    pub fn prevalence(&self) -> Option<f64> {
        (!self.dataset.is_empty()).then(|| self.positive_rows as f64 / self.dataset.len() as f64)
    }
}

/// One row per non-final action, labelled with its chain's outcome.
pub fn build_scorer_dataset(
    chains: &[PossessionChain],
    opts: &ScorerOptions,
) -> Result<ScorerDataset> {
    let n: usize = chains.iter().map(|c| c.len() - 1).sum();
    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    let mut positive_rows = 0;
    for chain in chains {
        let label = if chain.ends_in_goal { 1.0 } else { 0.0 };
        for pos in 0..chain.len() - 1 {
            rows.push(scorer_features(chain, pos, opts));
            target.push(label);
            ids.push(format!("{}:{}", chain.key(), pos + 1));
            positive_rows += usize::from(chain.ends_in_goal);
        }
    }
    Ok(ScorerDataset {
        dataset: Dataset::new(scorer_schema(opts), rows, target, ids)?,
        positive_rows,
    })
}

/// P(score | state) for the non-final action at 0-based `pos`.
pub fn score_state(
    model: &ModelArtifact,
    chain: &PossessionChain,
    pos: usize,
    opts: &ScorerOptions,
) -> Result<f64> {
    model.check_schema(&scorer_schema(opts))?;
    Ok(model
        .predict_rows(&[scorer_features(chain, pos, opts)])
        .values[0])
}
