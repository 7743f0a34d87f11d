//! Curvature and torsion of the arc-length-uniform striction curve, and
//! their alignment to video frames.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::pose_io::Trajectory;
use crate::screw::{trajectory_screws, TimedScrew};
use crate::striction::{build_striction_polyline, fit_and_resample, StrictionCurve, StrictionPolyline};

/// Minimum sample count supported by the derivative stencils.
pub const MIN_SAMPLES: usize = 7;
/// `‖r″‖` below which a sample does not take part in sign-flip detection.
pub const EPS_FLIP: f64 = 1e-8;
/// Relative curvature threshold; torsion is zero where `|κ| < this / total_length`.
pub const KAPPA_SMALL_REL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub d1: Vec<Vector3<f64>>,
    pub d2: Vec<Vector3<f64>>,
    pub d3: Vec<Vector3<f64>>,
}

/// Second-order finite differences in arc length: central in the interior,
/// one-sided at the ends. The third derivative uses five-point stencils.
pub fn curve_derivatives(curve: &StrictionCurve) -> Result<Derivatives> {
    let r = &curve.samples;
    let m = r.len();
    if m < MIN_SAMPLES {
        return Err(Error::validation(format!(
            "derivatives need at least {MIN_SAMPLES} samples, got {m}"
        )));
    }
    let h = curve.ds;
    if !(h > 0.0) {
        return Err(Error::Numerical("non-positive arc-length step".into()));
    }
    let (h2, h3) = (h * h, h * h * h);
    let comb = |idx: [usize; 5], w: [f64; 5]| -> Vector3<f64> {
        idx.iter().zip(w).map(|(&i, w)| w * r[i]).sum()
    };

    let d1 = (0..m)
        .map(|i| match i {
            0 => (-1.5 * r[0] + 2.0 * r[1] - 0.5 * r[2]) / h,
            i if i == m - 1 => (1.5 * r[i] - 2.0 * r[i - 1] + 0.5 * r[i - 2]) / h,
            i => (r[i + 1] - r[i - 1]) / (2.0 * h),
        })
        .collect();
    let d2 = (0..m)
        .map(|i| match i {
            0 => (2.0 * r[0] - 5.0 * r[1] + 4.0 * r[2] - r[3]) / h2,
            i if i == m - 1 => (2.0 * r[i] - 5.0 * r[i - 1] + 4.0 * r[i - 2] - r[i - 3]) / h2,
            i => (r[i + 1] - 2.0 * r[i] + r[i - 1]) / h2,
        })
        .collect();
    let fwd0 = [-2.5, 9.0, -12.0, 7.0, -1.5];
    let fwd1 = [-1.5, 5.0, -6.0, 3.0, -0.5];
    let neg = |w: [f64; 5]| w.map(|x| -x);
    let d3 = (0..m)
        .map(|i| {
            let v = match i {
                0 => comb([0, 1, 2, 3, 4], fwd0),
                1 => comb([0, 1, 2, 3, 4], fwd1),
                i if i == m - 1 => comb([i, i - 1, i - 2, i - 3, i - 4], neg(fwd0)),
                i if i == m - 2 => comb([i + 1, i, i - 1, i - 2, i - 3], neg(fwd1)),
                i => comb([i - 2, i - 1, i, i + 1, i + 2], [-0.5, 1.0, 0.0, -1.0, 0.5]),
            };
            v / h3
        })
        .collect();
    Ok(Derivatives { d1, d2, d3 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedCurvature {
    pub kappa: Vec<f64>,
    /// Sign state `γ ∈ {+1, −1}` per sample.
    pub gamma: Vec<i8>,
}

/// `κ = γ‖r″‖`, with `γ` starting at +1 and flipping whenever `r″` turns to
/// the opposite side of the curve.
///
/// Samples with `‖r″‖ < EPS_FLIP` never trigger a flip; each sample is compared
/// against the latest sample whose `‖r″‖` reached that threshold.
pub fn signed_curvature(d: &Derivatives) -> SignedCurvature {
    let mut gamma = 1i8;
    let mut reference: Option<Vector3<f64>> = None;
    let mut kappa = Vec::with_capacity(d.d2.len());
    let mut trace = Vec::with_capacity(d.d2.len());
    for a in &d.d2 {
        let norm = a.norm();
        if norm >= EPS_FLIP {
            if let Some(prev) = reference {
                if a.dot(&prev) < 0.0 {
                    gamma = -gamma;
                }
            }
            reference = Some(*a);
        }
        kappa.push(f64::from(gamma) * norm);
        trace.push(gamma);
    }
    SignedCurvature { kappa, gamma: trace }
}

pub fn curvature_threshold(total_length: f64) -> f64 {
    KAPPA_SMALL_REL / total_length
}

/// `τ = det[r′, r″, r‴] / κ²`, zero wherever `|κ| < eps_kappa`.
pub fn torsion(d: &Derivatives, kappa: &[f64], eps_kappa: f64) -> Vec<f64> {
    d.d1.iter()
        .zip(&d.d2)
        .zip(&d.d3)
        .zip(kappa)
        .map(|(((a, b), c), &k)| {
            if k.abs() < eps_kappa {
                0.0
            } else {
                Matrix3::from_columns(&[*a, *b, *c]).determinant() / (k * k)
            }
        })
        .collect()
}

/// Nearest-anchor frame alignment. Frames before the first anchor take sample
/// 0, frames after the last anchor take the last sample; ties go to the
/// earlier sample.
pub fn invariants_per_frame(kappa: &[f64], tau: &[f64], anchors: &[usize], frames: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(kappa.len(), anchors.len());
    assert_eq!(tau.len(), anchors.len());
    if anchors.is_empty() {
        return (vec![0.0; frames], vec![0.0; frames]);
    }
    let (first, last) = (anchors[0], *anchors.last().unwrap());
    let mut out_k = Vec::with_capacity(frames);
    let mut out_t = Vec::with_capacity(frames);
    for f in 0..frames {
        let idx = if f <= first {
            0
        } else if f >= last {
            anchors.len() - 1
        } else {
            // anchors are sorted: the nearest is at the boundary of f's bucket
            let hi = anchors.partition_point(|&a| a < f);
            let lo_anchor = anchors[hi - 1];
            if anchors[hi] - f < f - lo_anchor {
                hi
            } else {
                anchors.partition_point(|&a| a < lo_anchor)
            }
        };
        out_k.push(kappa[idx]);
        out_t.push(tau[idx]);
    }
    (out_k, out_t)
}

/// κ(s), τ(s) along the curve plus their per-frame alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSeries {
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub gamma: Vec<i8>,
    pub per_frame_kappa: Vec<f64>,
    pub per_frame_tau: Vec<f64>,
    /// No usable striction curve; per-frame values are zero.
    pub degenerate: bool,
}

impl InvariantSeries {
    pub fn degenerate(frames: usize) -> Self {
        Self {
            kappa: Vec::new(),
            tau: Vec::new(),
            gamma: Vec::new(),
            per_frame_kappa: vec![0.0; frames],
            per_frame_tau: vec![0.0; frames],
            degenerate: true,
        }
    }

    /// CSV rows `frame,kappa,tau`.
    pub fn per_frame_csv(&self) -> String {
        let mut out = String::from("frame,kappa,tau\n");
        for (f, (k, t)) in self.per_frame_kappa.iter().zip(&self.per_frame_tau).enumerate() {
            writeln!(out, "{f},{k:?},{t:?}").unwrap();
        }
        out
    }
}

/// κ and τ for a resampled curve.
pub fn curve_invariants(curve: &StrictionCurve) -> Result<(SignedCurvature, Vec<f64>)> {
    let d = curve_derivatives(curve)?;
    let signed = signed_curvature(&d);
    let tau = torsion(&d, &signed.kappa, curvature_threshold(curve.total_length));
    if signed.kappa.iter().chain(&tau).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite curvature or torsion".into()));
    }
    Ok((signed, tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineOptions {
    /// Resampled point count; defaults to the number of usable screws (at
    /// least [`MIN_SAMPLES`]).
    pub samples: Option<usize>,
}

/// Everything the pose → invariants pipeline produces for one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmInvariants {
    pub screws: Vec<TimedScrew>,
    pub polyline: Option<StrictionPolyline>,
    pub curve: Option<StrictionCurve>,
    pub series: InvariantSeries,
}

/// Poses → finite screws → striction polyline → spline → κ, τ per frame.
pub fn extract_invariants(traj: &Trajectory, opts: &PipelineOptions) -> Result<ArmInvariants> {
    let frames = traj.len();
    if frames < 2 {
        return Err(Error::validation(format!("need >= 2 poses, {} arm has {frames}", traj.arm)));
    }
    let screws = trajectory_screws(traj);
    let usable = screws.iter().filter(|s| !s.line.is_identity()).count();
    if usable < 2 {
        return Ok(ArmInvariants {
            screws,
            polyline: None,
            curve: None,
            series: InvariantSeries::degenerate(frames),
        });
    }
    let polyline = build_striction_polyline(&screws)?;
    let m = opts.samples.unwrap_or(usable).max(MIN_SAMPLES);
    let curve = fit_and_resample(&polyline, m)?;
    if curve.degenerate {
        return Ok(ArmInvariants {
            screws,
            polyline: Some(polyline),
            curve: Some(curve),
            series: InvariantSeries::degenerate(frames),
        });
    }
    let (signed, tau) = curve_invariants(&curve)?;
    let (per_frame_kappa, per_frame_tau) = invariants_per_frame(&signed.kappa, &tau, &curve.time_anchor, frames);
    Ok(ArmInvariants {
        screws,
        polyline: Some(polyline),
        curve: Some(curve),
        series: InvariantSeries {
            kappa: signed.kappa,
            tau,
            gamma: signed.gamma,
            per_frame_kappa,
            per_frame_tau,
            degenerate: false,
        },
    })
}

/// CSV rows `frame,kappa_left,tau_left,kappa_right,tau_right`.
pub fn invariants_csv(left: &InvariantSeries, right: &InvariantSeries) -> String {
    let mut out = String::from("frame,kappa_left,tau_left,kappa_right,tau_right\n");
    let n = left.per_frame_kappa.len().min(right.per_frame_kappa.len());
    for f in 0..n {
        writeln!(
            out,
            "{f},{:?},{:?},{:?},{:?}",
            left.per_frame_kappa[f], left.per_frame_tau[f], right.per_frame_kappa[f], right.per_frame_tau[f]
        )
        .unwrap();
    }
    out
}
