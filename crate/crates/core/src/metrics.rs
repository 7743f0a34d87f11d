//! Frame accuracy, segmental edit score and leave-one-user-out folds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pose_io::{GestureId, GestureTimeline};

/// Percentage of frames where `pred` equals `gt`, over frames with `mask` set.
pub fn frame_accuracy(pred: &GestureTimeline, gt: &GestureTimeline, mask: &[bool]) -> Result<f64> {
    if pred.len() != gt.len() || mask.len() != gt.len() {
        return Err(Error::validation(format!(
            "length mismatch: pred {}, gt {}, mask {}",
            pred.len(),
            gt.len(),
            mask.len()
        )));
    }
    let (mut correct, mut evaluated) = (0usize, 0usize);
    for ((p, g), &m) in pred.labels().iter().zip(gt.labels()).zip(mask) {
        if m {
            evaluated += 1;
            correct += (p == g) as usize;
        }
    }
    if evaluated == 0 {
        return Err(Error::validation("no frames to evaluate"));
    }
    Ok(100.0 * correct as f64 / evaluated as f64)
}

/// Labels of consecutive runs, e.g. `[1,1,2,2,2,1] → [1,2,1]`.
pub fn segment_labels(labels: &[GestureId]) -> Vec<GestureId> {
    let mut out: Vec<GestureId> = Vec::new();
    for &l in labels {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + (x != y) as usize;
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Segmental edit score in `[0, 100]`: one minus the Levenshtein distance
/// between run-length segment sequences, normalized by the longer one.
pub fn edit_score(pred: &GestureTimeline, gt: &GestureTimeline) -> f64 {
    edit_score_labels(pred.labels(), gt.labels())
}

pub fn edit_score_labels(pred: &[GestureId], gt: &[GestureId]) -> f64 {
    let p = segment_labels(pred);
    let g = segment_labels(gt);
    let longest = p.len().max(g.len());
    if longest == 0 {
        return 100.0;
    }
    (100.0 * (1.0 - levenshtein(&p, &g) as f64 / longest as f64)).max(0.0)
}

/// One cross-validation fold holding out every trial of `held_out_user`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub held_out_user: String,
    pub train: Vec<String>,
    pub validation: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

/// Leave-one-user-out folds over `(trial_id, user_id)` pairs, ordered by user.
pub fn louo_splits(trials: &[(String, String)]) -> Result<FoldPlan> {
    louo_splits_with_roster(trials, &[])
}

/// Like [`louo_splits`], but `roster` may name users without trials; those
/// get no fold and a warning.
pub fn louo_splits_with_roster(trials: &[(String, String)], roster: &[String]) -> Result<FoldPlan> {
    let mut by_user: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (trial, user) in trials {
        by_user.entry(user).or_default().push(trial);
    }
    for user in roster {
        if !by_user.contains_key(user.as_str()) {
            log::warn!("user {user} has no trials; fold omitted");
        }
    }
    if by_user.len() < 2 {
        return Err(Error::validation(format!(
            "leave-one-user-out needs at least 2 users, found {}",
            by_user.len()
        )));
    }
    let folds = by_user
        .iter()
        .map(|(&user, held)| Fold {
            held_out_user: user.to_string(),
            validation: held.iter().map(|t| t.to_string()).collect(),
            train: trials
                .iter()
                .filter(|(_, u)| u != user)
                .map(|(t, _)| t.clone())
                .collect(),
        })
        .collect();
    Ok(FoldPlan { folds })
}

/// Per-trial evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScore {
    pub fold: usize,
    pub trial: String,
    pub accuracy: f64,
    pub edit: f64,
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Report CSV `fold,trial,accuracy,edit_score` with a final `mean ± std` row.
/// `label` (e.g. `{p, κ, τ}`) goes into a leading comment line when given.
pub fn score_report(scores: &[TrialScore], label: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(l) = label {
        writeln!(out, "# features {l}").unwrap();
    }
    out.push_str("fold,trial,accuracy,edit_score\n");
    for s in scores {
        writeln!(out, "{},{},{:.2},{:.2}", s.fold, s.trial, s.accuracy, s.edit).unwrap();
    }
    let acc: Vec<f64> = scores.iter().map(|s| s.accuracy).collect();
    let edit: Vec<f64> = scores.iter().map(|s| s.edit).collect();
    let (am, asd) = mean_std(&acc);
    let (em, esd) = mean_std(&edit);
    writeln!(out, "mean,all,{am:.1} ± {asd:.1},{em:.1} ± {esd:.1}").unwrap();
    out
}
