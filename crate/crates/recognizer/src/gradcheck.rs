//! Central finite-difference verification of the analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::Model;
use crate::train::{loss_and_grad, trial_loss, TrialData};

pub const FD_STEP: f64 = 1e-6;

/// Denominator floor of the relative error. Central differences of an O(1)
/// loss carry about 1e-10 of absolute rounding noise at this step, so
/// gradients smaller than the floor are compared on an absolute scale.
pub const REL_ERROR_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Parameter name and flat index of the worst entry.
    pub worst: (String, usize),
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares analytic and numeric gradients of the (dropout-free) loss on
/// `samples` parameters: at least one from every tensor, the rest uniform.
pub fn gradient_check(model: &Model, trial: &TrialData, alpha: &[f64], samples: usize, seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p0 = model.params.values.clone();
    let (_, analytic) = loss_and_grad(model, &p0, trial, alpha, None)?;

    let mut picks: Vec<usize> = model
        .params
        .info
        .iter()
        .map(|i| i.id.offset + rng.random_range(0..i.id.len))
        .collect();
    while picks.len() < samples {
        picks.push(rng.random_range(0..p0.len()));
    }

    let mut p = p0.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: picks.len(),
        worst: (String::new(), 0),
    };
    for &k in &picks {
        p[k] = p0[k] + FD_STEP;
        let up = trial_loss(model, &p, trial, alpha)?;
        p[k] = p0[k] - FD_STEP;
        let down = trial_loss(model, &p, trial, alpha)?;
        p[k] = p0[k];
        let numeric = (up - down) / (2.0 * FD_STEP);
        let err = relative_error(analytic[k], numeric);
        if err > report.max_rel_error || report.worst.0.is_empty() {
            let name = model
                .params
                .info
                .iter()
                .find(|i| (i.id.offset..i.id.offset + i.id.len).contains(&k))
                .map_or_else(String::new, |i| i.name.clone());
            report.max_rel_error = report.max_rel_error.max(err);
            report.worst = (name, k);
        }
    }
    Ok(report)
}
