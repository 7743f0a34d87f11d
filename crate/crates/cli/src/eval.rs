//! Leave-one-user-out evaluation of the recognizer on a dataset.

use std::fmt::Write as _;
use std::path::Path;

use axode_core::features::FeatureSet;
use axode_core::metrics::{edit_score_labels, frame_accuracy, louo_splits, score_report, Fold, TrialScore};
use axode_core::pose_io::{transcript_to_string, GestureId, GestureTimeline};
use axode_recognizer::data::{to_timeline, vocabulary};
use axode_recognizer::dataset::{fold_data, PreparedTrial};
use axode_recognizer::train::metrics_csv;
use axode_recognizer::{train, EpochMetrics, Model, Profile, TrainConfig};
use rayon::prelude::*;

use crate::error::Result;
use crate::output::write;

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub features: FeatureSet,
    pub profile: Profile,
    pub seed: u64,
    pub epochs: usize,
    /// Use ground truth as the prediction (pipeline check).
    pub oracle: bool,
    /// Run folds on the rayon pool instead of one after another.
    pub parallel: bool,
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub held_out_user: String,
    pub scores: Vec<TrialScore>,
    pub predictions: Vec<(String, GestureTimeline)>,
    pub history: Vec<EpochMetrics>,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub folds: Vec<FoldResult>,
    pub report_csv: String,
}

impl EvalReport {
    pub fn scores(&self) -> impl Iterator<Item = &TrialScore> {
        self.folds.iter().flat_map(|f| &f.scores)
    }

    pub fn mean_accuracy(&self) -> f64 {
        let all: Vec<f64> = self.scores().map(|s| s.accuracy).collect();
        all.iter().sum::<f64>() / all.len() as f64
    }

    pub fn mean_edit(&self) -> f64 {
        let all: Vec<f64> = self.scores().map(|s| s.edit).collect();
        all.iter().sum::<f64>() / all.len() as f64
    }
}

fn labeled(tl: &GestureTimeline, mask: &[bool]) -> Vec<GestureId> {
    tl.labels().iter().zip(mask).filter(|(_, &m)| m).map(|(g, _)| *g).collect()
}

fn score(fold: usize, trial: &PreparedTrial, pred: &GestureTimeline) -> Result<TrialScore> {
    let mask = trial.timeline.mask();
    Ok(TrialScore {
        fold,
        trial: trial.name.clone(),
        accuracy: frame_accuracy(pred, &trial.timeline, &mask)?,
        edit: edit_score_labels(&labeled(pred, &mask), &labeled(&trial.timeline, &mask)),
    })
}

fn run_fold(index: usize, fold: &Fold, trials: &[PreparedTrial], classes: &[u32], opts: &EvalOptions) -> Result<FoldResult> {
    let pick = |names: &[String]| -> Vec<&PreparedTrial> { trials.iter().filter(|t| names.contains(&t.name)).collect() };
    let (train_set, held_out) = (pick(&fold.train), pick(&fold.validation));
    let mut predictions = Vec::new();
    let mut history = Vec::new();
    if opts.oracle {
        for t in &held_out {
            predictions.push((t.name.clone(), t.timeline.clone()));
        }
    } else {
        let (train_data, held_data, _) = fold_data(&train_set, &held_out, opts.features, classes)?;
        let vision_dim = train_data[0].input.vision.cols;
        let config = opts.profile.model_config(vision_dim, opts.features.dim_per_arm(), classes.to_vec());
        let model = Model::new(config, opts.seed)?;
        let cfg = TrainConfig {
            epochs: opts.epochs,
            seed: opts.seed,
            ..Default::default()
        };
        let outcome = train(model, &train_data, &[], &cfg)?;
        for (t, d) in held_out.iter().zip(&held_data) {
            let pred = outcome.state.model.predict_classes(&d.input)?;
            predictions.push((t.name.clone(), to_timeline(&pred, classes)));
        }
        history = outcome.history;
    }
    let scores = held_out
        .iter()
        .zip(&predictions)
        .map(|(t, (_, p))| score(index, t, p))
        .collect::<Result<_>>()?;
    log::info!("fold {index} (user {}) done", fold.held_out_user);
    Ok(FoldResult {
        fold: index,
        held_out_user: fold.held_out_user.clone(),
        scores,
        predictions,
        history,
    })
}

/// Runs every fold; results are ordered by fold index whatever the schedule.
pub fn run_folds(trials: &[PreparedTrial], opts: &EvalOptions) -> Result<EvalReport> {
    let pairs: Vec<(String, String)> = trials.iter().map(|t| (t.name.clone(), t.user.clone())).collect();
    let plan = louo_splits(&pairs)?;
    let classes = vocabulary(trials.iter().map(|t| &t.timeline));
    let job = |(i, f): (usize, &Fold)| run_fold(i, f, trials, &classes, opts);
    let folds: Vec<FoldResult> = if opts.parallel {
        plan.folds.par_iter().enumerate().map(job).collect::<Result<_>>()?
    } else {
        plan.folds.iter().enumerate().map(job).collect::<Result<_>>()?
    };
    let scores: Vec<TrialScore> = folds.iter().flat_map(|f| f.scores.clone()).collect();
    let mut report_csv = String::new();
    writeln!(report_csv, "# profile {} seed {}{}", opts.profile.name(), opts.seed, if opts.oracle { " oracle" } else { "" }).unwrap();
    report_csv.push_str(&score_report(&scores, Some(&opts.features.label())));
    Ok(EvalReport { folds, report_csv })
}

/// Writes `report.csv`, per-trial prediction transcripts and training logs.
pub fn write_outputs(report: &EvalReport, out: &Path) -> Result<()> {
    write(&out.join("report.csv"), &report.report_csv)?;
    for fold in &report.folds {
        for (name, tl) in &fold.predictions {
            write(&out.join("predictions").join(format!("{name}.txt")), transcript_to_string(tl))?;
        }
        if !fold.history.is_empty() {
            write(&out.join(format!("fold{}_metrics.csv", fold.fold)), metrics_csv(&fold.history))?;
        }
    }
    Ok(())
}
