//! Shot features and the expected-goals dataset.

use chainvalue_ml::{Dataset, FeatureSpec, FeatureValue, ModelArtifact, Schema};
use serde::{Deserialize, Serialize};

use crate::chains::{Action, PossessionChain};
use crate::error::Result;
use crate::geometry::{distance_with, shooting_angle, DistanceFormula, PitchSpec};

pub const PENALTY_SHOT_TYPE: &str = "Penalty";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct XgOptions {
    pub pitch: PitchSpec,
    pub distance: DistanceFormula,
    pub exclude_penalties: bool,
}

/// The distance column is named after its formula so models trained under
/// one formula refuse rows built with the other.
pub fn xg_schema(opts: &XgOptions) -> Schema {
    let distance = match opts.distance {
        DistanceFormula::GoalCenter => "goal_distance",
        DistanceFormula::Literal => "goal_distance_literal",
    };
    Schema::new(vec![
        FeatureSpec::categorical("technique"),
        FeatureSpec::categorical("body_part"),
        FeatureSpec::categorical("shot_type"),
        FeatureSpec::categorical("under_pressure"),
        FeatureSpec::continuous("shooting_angle"),
        FeatureSpec::continuous(distance),
    ])
}

/// `None` when the action carries no shot detail.
pub fn xg_features(shot: &Action, opts: &XgOptions) -> Result<Option<Vec<FeatureValue>>> {
    let Some(d) = &shot.shot_detail else {
        return Ok(None);
    };
    let angle = shooting_angle(shot.start_state, &opts.pitch)?;
    let distance = distance_with(shot.start_state, &opts.pitch, opts.distance)?;
    Ok(Some(vec![
        d.technique.as_str().into(),
        d.body_part.as_str().into(),
        d.shot_type.as_str().into(),
        shot.under_pressure.into(),
        angle.into(),
        distance.into(),
    ]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct XgDataset {
    pub dataset: Dataset,
    pub skipped_without_detail: usize,
    pub excluded_penalties: usize,
    pub goals: usize,
}

impl XgDataset {
    pub fn prevalence(&self) -> Option<f64> {
        (!self.dataset.is_empty()).then(|| self.goals as f64 / self.dataset.len() as f64)
    }
}

pub fn build_xg_dataset(chains: &[PossessionChain], opts: &XgOptions) -> Result<XgDataset> {
    let mut rows = Vec::with_capacity(chains.len());
    let mut target = Vec::with_capacity(chains.len());
    let mut ids = Vec::with_capacity(chains.len());
    let mut skipped_without_detail = 0;
    let mut excluded_penalties = 0;
    let mut goals = 0;
    for chain in chains {
        let shot = chain.shot();
        if opts.exclude_penalties
            && shot
                .shot_detail
                .as_ref()
                .is_some_and(|d| d.shot_type == PENALTY_SHOT_TYPE)
        {
            excluded_penalties += 1;
            continue;
        }
        match xg_features(shot, opts)? {
            Some(row) => {
                rows.push(row);
                target.push(if chain.ends_in_goal { 1.0 } else { 0.0 });
                goals += usize::from(chain.ends_in_goal);
                ids.push(chain.key());
            }
            None => skipped_without_detail += 1,
        }
    }
    Ok(XgDataset {
        dataset: Dataset::new(xg_schema(opts), rows, target, ids)?,
        skipped_without_detail,
        excluded_penalties,
        goals,
    })
}

/// Scoring probability of a shot. Shots without detail fall back to the
/// model's unknown levels.
pub fn xg_score(model: &ModelArtifact, shot: &Action, opts: &XgOptions) -> Result<f64> {
    model.check_schema(&xg_schema(opts))?;
    let row = match xg_features(shot, opts)? {
        Some(r) => r,
        None => {
            let angle = shooting_angle(shot.start_state, &opts.pitch)?;
            let distance = distance_with(shot.start_state, &opts.pitch, opts.distance)?;
            vec![
                "".into(),
                "".into(),
                "".into(),
                shot.under_pressure.into(),
                angle.into(),
                distance.into(),
            ]
        }
    };
    Ok(model.predict_rows(&[row]).values[0])
}
