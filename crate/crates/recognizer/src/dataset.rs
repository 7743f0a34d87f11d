//! Trials with their invariants computed once, and per-fold feature
//! normalization fitted on the training side only.

use axode_core::features::{raw_features, vision_series, FeatureSeries, FeatureSet, NormStats};
use axode_core::invariants::{extract_invariants, InvariantSeries, PipelineOptions};
use axode_core::pose_io::{GestureTimeline, Trajectory};
use axode_core::synth::SynthTrial;

use crate::data::trial_data;
use crate::error::{Error, Result};
use crate::train::TrialData;

/// One recording with both arms' invariants already extracted.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTrial {
    pub name: String,
    pub user: String,
    pub left: Trajectory,
    pub right: Trajectory,
    pub left_inv: InvariantSeries,
    pub right_inv: InvariantSeries,
    pub timeline: GestureTimeline,
    pub vision: FeatureSeries,
}

impl PreparedTrial {
    pub fn new(
        name: String,
        user: String,
        left: Trajectory,
        right: Trajectory,
        timeline: GestureTimeline,
        vision: FeatureSeries,
    ) -> Result<Self> {
        let t = timeline.len();
        if left.len() != t || right.len() != t || vision.len() != t {
            return Err(Error::validation(format!(
                "{name}: {t} labels, {}/{} poses, {} vision rows",
                left.len(),
                right.len(),
                vision.len()
            )));
        }
        let opts = PipelineOptions::default();
        let left_inv = extract_invariants(&left, &opts)?.series;
        let right_inv = extract_invariants(&right, &opts)?.series;
        Ok(Self {
            name,
            user,
            left,
            right,
            left_inv,
            right_inv,
            timeline,
            vision,
        })
    }

    pub fn from_synth(trial: &SynthTrial) -> Result<Self> {
        let s = &trial.sequence;
        Self::new(
            trial.name.clone(),
            trial.user.clone(),
            s.left.clone(),
            s.right.clone(),
            s.timeline.clone(),
            vision_series(s.vision.clone()),
        )
    }

    pub fn frames(&self) -> usize {
        self.timeline.len()
    }
}

/// Normalization statistics for both arms.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub left: NormStats,
    pub right: NormStats,
}

pub fn fit_arm_stats(trials: &[&PreparedTrial], set: FeatureSet) -> Result<ArmStats> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for t in trials {
        left.push(raw_features(&t.left, &t.left_inv, set)?);
        right.push(raw_features(&t.right, &t.right_inv, set)?);
    }
    Ok(ArmStats {
        left: NormStats::fit(left.iter().map(Vec::as_slice))?,
        right: NormStats::fit(right.iter().map(Vec::as_slice))?,
    })
}

fn normalized(rows: Vec<Vec<f64>>, stats: &NormStats) -> FeatureSeries {
    FeatureSeries {
        frames: rows.iter().map(|r| stats.normalize(r)).collect(),
        mask: vec![true; rows.len()],
        stats: stats.clone(),
    }
}

pub fn to_trial_data(t: &PreparedTrial, set: FeatureSet, stats: &ArmStats, classes: &[u32]) -> Result<TrialData> {
    let left = normalized(raw_features(&t.left, &t.left_inv, set)?, &stats.left);
    let right = normalized(raw_features(&t.right, &t.right_inv, set)?, &stats.right);
    trial_data(&t.name, &t.vision, &left, &right, &t.timeline, classes)
}

/// Training and held-out inputs for one fold; statistics come from `train`.
pub fn fold_data(
    train: &[&PreparedTrial],
    held_out: &[&PreparedTrial],
    set: FeatureSet,
    classes: &[u32],
) -> Result<(Vec<TrialData>, Vec<TrialData>, ArmStats)> {
    let stats = fit_arm_stats(train, set)?;
    let tr = train.iter().map(|t| to_trial_data(t, set, &stats, classes)).collect::<Result<_>>()?;
    let ho = held_out.iter().map(|t| to_trial_data(t, set, &stats, classes)).collect::<Result<_>>()?;
    Ok((tr, ho, stats))
}
