//! Adam training over whole-trial batches with plateau scheduling and early
//! stopping.

use std::fmt::Write as _;

use axode_core::metrics::edit_score_labels;
use axode_core::pose_io::GestureId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::{inverse_frequency_weights, weighted_cross_entropy};
use crate::model::{argmax, Model, TrialInput};

/// One trial's inputs with class-index labels; frames with `mask` false are
/// ignored by loss and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub name: String,
    pub input: TrialInput,
    pub labels: Vec<usize>,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassWeighting {
    Uniform,
    InverseFrequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Stop after this many epochs without improvement of the monitored loss.
    pub patience: usize,
    /// Halve the learning rate after this many epochs without improvement.
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub weighting: ClassWeighting,
    pub seed: u64,
    /// Stop as soon as training frame accuracy reaches this percentage.
    pub stop_at_accuracy: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            patience: 30,
            plateau_patience: 10,
            plateau_factor: 0.5,
            weighting: ClassWeighting::InverseFrequency,
            seed: 0,
            stop_at_accuracy: None,
        }
    }
}

/// Metrics measured after an epoch, with dropout disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
    pub edit: f64,
    pub learning_rate: f64,
    pub validation_loss: Option<f64>,
}

/// Trained parameters plus the class weights they were trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub model: Model,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub state: ModelState,
    pub history: Vec<EpochMetrics>,
    /// Epoch whose parameters were kept (lowest monitored loss).
    pub best_epoch: usize,
}

/// Dataset-level evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Mean of per-trial losses.
    pub loss: f64,
    /// Pooled over all evaluated frames.
    pub accuracy: f64,
    /// Mean of per-trial edit scores.
    pub edit: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    /// L2 penalty folded into the gradient.
    fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64, weight_decay: f64) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        for i in 0..params.len() {
            let g = grads[i] + weight_decay * params[i];
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Loss and its gradient for one trial under parameters `p`.
pub fn loss_and_grad(
    model: &Model,
    p: &[f64],
    trial: &TrialData,
    alpha: &[f64],
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Vec<f64>)> {
    let trace = model.forward_with(p, &trial.input, rng)?;
    let (loss, dlogits) = weighted_cross_entropy(&trace.probs, &trial.labels, alpha, &trial.mask)?;
    let mut grads = vec![0.0; p.len()];
    model.backward_with(p, &trial.input, &trace, &dlogits, &mut grads);
    Ok((loss, grads))
}

pub fn trial_loss(model: &Model, p: &[f64], trial: &TrialData, alpha: &[f64]) -> Result<f64> {
    let trace = model.forward_with(p, &trial.input, None)?;
    Ok(weighted_cross_entropy(&trace.probs, &trial.labels, alpha, &trial.mask)?.0)
}

/// Masked-in labels of a trial as gesture ids (for edit scoring).
fn masked_ids(model: &Model, idx: &[usize], mask: &[bool]) -> Vec<GestureId> {
    idx.iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&c, _)| GestureId(model.config.classes[c]))
        .collect()
}

pub fn evaluate(model: &Model, trials: &[TrialData], alpha: &[f64]) -> Result<Evaluation> {
    if trials.is_empty() {
        return Err(Error::validation("nothing to evaluate"));
    }
    let (mut loss, mut edit) = (0.0, 0.0);
    let (mut correct, mut total) = (0usize, 0usize);
    for trial in trials {
        let trace = model.forward(&trial.input, None)?;
        loss += weighted_cross_entropy(&trace.probs, &trial.labels, alpha, &trial.mask)?.0;
        let pred: Vec<usize> = (0..trace.probs.rows).map(|t| argmax(trace.probs.row(t))).collect();
        for ((p, l), &m) in pred.iter().zip(&trial.labels).zip(&trial.mask) {
            if m {
                total += 1;
                correct += (p == l) as usize;
            }
        }
        edit += edit_score_labels(&masked_ids(model, &pred, &trial.mask), &masked_ids(model, &trial.labels, &trial.mask));
    }
    let n = trials.len() as f64;
    Ok(Evaluation {
        loss: loss / n,
        accuracy: 100.0 * correct as f64 / total.max(1) as f64,
        edit: edit / n,
    })
}

pub fn class_weights(model: &Model, weighting: ClassWeighting, trials: &[TrialData]) -> Vec<f64> {
    match weighting {
        ClassWeighting::Uniform => vec![1.0; model.classes()],
        ClassWeighting::InverseFrequency => {
            inverse_frequency_weights(model.classes(), trials.iter().map(|t| (t.labels.as_slice(), t.mask.as_slice())))
        }
    }
}

/// Trains `model` on `train`. The monitored loss for scheduling and early
/// stopping is the validation loss when `validation` is non-empty, otherwise
/// the training loss. The parameters of the best monitored epoch are kept.
pub fn train(mut model: Model, train: &[TrialData], validation: &[TrialData], cfg: &TrainConfig) -> Result<TrainOutcome> {
    if train.is_empty() {
        return Err(Error::validation("need at least one training trial"));
    }
    for t in train.iter().chain(validation) {
        model.check_input(&t.input)?;
        if t.labels.len() != t.input.frames() || t.mask.len() != t.input.frames() {
            return Err(Error::validation(format!("{}: labels do not cover every frame", t.name)));
        }
    }
    let alpha = class_weights(&model, cfg.weighting, train);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.params.len());
    let mut lr = cfg.learning_rate;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, 0usize, model.params.values.clone());
    let mut since_best = 0usize;
    let mut since_lr_cut = 0usize;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.epochs {
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for &i in &order {
            let (loss, grads) = loss_and_grad(&model, &model.params.values, &train[i], &alpha, Some(&mut rng))?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    detail: format!("non-finite loss or gradient on trial {}", train[i].name),
                });
            }
            adam.update(&mut model.params.values, &grads, lr, cfg.weight_decay);
        }
        let eval = evaluate(&model, train, &alpha)?;
        let val_loss = if validation.is_empty() { None } else { Some(evaluate(&model, validation, &alpha)?.loss) };
        if !eval.loss.is_finite() || val_loss.is_some_and(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                detail: format!("loss became {}", eval.loss),
            });
        }
        log::debug!("epoch {epoch}: loss {:.5} acc {:.2} edit {:.2} lr {lr:.2e}", eval.loss, eval.accuracy, eval.edit);
        history.push(EpochMetrics {
            epoch,
            loss: eval.loss,
            accuracy: eval.accuracy,
            edit: eval.edit,
            learning_rate: lr,
            validation_loss: val_loss,
        });

        let monitored = val_loss.unwrap_or(eval.loss);
        if monitored < best.0 {
            best = (monitored, epoch, model.params.values.clone());
            since_best = 0;
            since_lr_cut = 0;
        } else {
            since_best += 1;
            since_lr_cut += 1;
            if since_lr_cut >= cfg.plateau_patience {
                lr *= cfg.plateau_factor;
                since_lr_cut = 0;
            }
            if since_best >= cfg.patience {
                log::info!("early stop at epoch {epoch}, best epoch {}", best.1);
                break;
            }
        }
        if cfg.stop_at_accuracy.is_some_and(|a| eval.accuracy >= a) {
            best = (monitored, epoch, model.params.values.clone());
            break;
        }
    }
    model.params.values = best.2;
    Ok(TrainOutcome {
        state: ModelState { model, alpha },
        history,
        best_epoch: best.1,
    })
}

/// Training log as CSV `epoch,loss,acc,edit`.
pub fn metrics_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,loss,acc,edit\n");
    for m in history {
        writeln!(out, "{},{:.6},{:.2},{:.2}", m.epoch, m.loss, m.accuracy, m.edit).unwrap();
    }
    out
}
