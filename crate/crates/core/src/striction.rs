//! Striction polyline from consecutive common normals, cubic-spline fit and
//! uniform arc-length resampling.

use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::screw::{line_closest_points, TimedScrew};
use crate::spline::PiecewiseCurve;

/// Consecutive polyline points closer than this are merged; a polyline whose
/// total chord length is below it collapses to a constant curve.
pub const COINCIDENT_TOL: f64 = 1e-12;

/// One point `j_n` per usable screw line.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictionPolyline {
    pub points: Vec<Vector3<f64>>,
    /// Common-normal lengths `‖u_n‖` between consecutive screws.
    pub gap_lengths: Vec<f64>,
    /// Pose index of the screw each point belongs to.
    pub source_frames: Vec<usize>,
}

impl StrictionPolyline {
    /// `Σ‖u_n‖`, the summed common-normal gaps.
    pub fn gap_total(&self) -> f64 {
        self.gap_lengths.iter().sum()
    }
}

/// Builds the striction polyline. Identity screws are skipped.
///
/// Interior screws get the mean of their two closest points (one towards each
/// neighbour); the first and last screws use their single closest point.
pub fn build_striction_polyline(screws: &[TimedScrew]) -> Result<StrictionPolyline> {
    let usable: Vec<&TimedScrew> = screws.iter().filter(|s| !s.line.is_identity()).collect();
    if usable.len() < 2 {
        return Err(Error::validation(format!(
            "striction curve needs at least 2 non-identity screws, got {}",
            usable.len()
        )));
    }
    let normals: Vec<_> = usable
        .windows(2)
        .map(|w| line_closest_points(&w[0].line, &w[1].line))
        .collect();

    let n = usable.len();
    let points = (0..n)
        .map(|i| match i {
            0 => normals[0].p_a,
            i if i == n - 1 => normals[n - 2].p_b,
            i => 0.5 * (normals[i - 1].p_b + normals[i].p_a),
        })
        .collect();
    Ok(StrictionPolyline {
        points,
        gap_lengths: normals.iter().map(|s| s.distance).collect(),
        source_frames: usable.iter().map(|s| s.frame).collect(),
    })
}

/// Arc-length-uniform samples of the striction curve.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictionCurve {
    pub samples: Vec<Vector3<f64>>,
    /// Uniform arc-length step between samples.
    pub ds: f64,
    /// Arc length of the fitted spline.
    pub total_length: f64,
    /// `Σ‖u_n‖` of the source polyline, kept for reference.
    pub normal_gap_total: f64,
    /// Pose index nearest to each sample, non-decreasing.
    pub time_anchor: Vec<usize>,
    /// Set when the polyline collapsed to a point.
    pub degenerate: bool,
}

impl StrictionCurve {
    /// Wraps samples that are already uniform in arc length.
    pub fn from_uniform_samples(samples: Vec<Vector3<f64>>, ds: f64, time_anchor: Vec<usize>) -> Self {
        let total_length = ds * samples.len().saturating_sub(1) as f64;
        Self {
            samples,
            ds,
            total_length,
            normal_gap_total: 0.0,
            time_anchor,
            degenerate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV rows `k,s,x,y,z,time_anchor`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,s,x,y,z,time_anchor\n");
        for (k, (p, a)) in self.samples.iter().zip(&self.time_anchor).enumerate() {
            writeln!(out, "{k},{:?},{:?},{:?},{:?},{a}", k as f64 * self.ds, p.x, p.y, p.z).unwrap();
        }
        out
    }
}

/// Fits a natural cubic spline (chord-length knots) through the polyline and
/// resamples `m ≥ 2` points uniformly in arc length. Three points fall back to
/// a parabola, two to a segment.
pub fn fit_and_resample(poly: &StrictionPolyline, m: usize) -> Result<StrictionCurve> {
    if m < 2 {
        return Err(Error::validation("resampling needs at least 2 samples"));
    }
    if poly.points.is_empty() || poly.points.len() != poly.source_frames.len() {
        return Err(Error::validation("malformed striction polyline"));
    }

    let mut points = vec![poly.points[0]];
    let mut frames = vec![poly.source_frames[0]];
    let mut params = vec![0.0];
    for (p, f) in poly.points.iter().zip(&poly.source_frames).skip(1) {
        let chord = (p - points.last().unwrap()).norm();
        if chord < COINCIDENT_TOL {
            continue;
        }
        params.push(params.last().unwrap() + chord);
        points.push(*p);
        frames.push(*f);
    }

    let chord_total = *params.last().unwrap();
    if points.len() < 2 || chord_total < COINCIDENT_TOL {
        return Ok(StrictionCurve {
            samples: vec![poly.points[0]; m],
            ds: 0.0,
            total_length: 0.0,
            normal_gap_total: poly.gap_total(),
            time_anchor: spread_anchors(&poly.source_frames, m),
            degenerate: true,
        });
    }

    let curve = match points.len() {
        2 => PiecewiseCurve::linear(&points, &params),
        3 => PiecewiseCurve::quadratic(&points, &params),
        _ => PiecewiseCurve::natural_cubic(&points, &params),
    };
    let cumulative = curve.cumulative_lengths();
    let total_length = *cumulative.last().unwrap();
    let ds = total_length / (m - 1) as f64;

    let mut samples = Vec::with_capacity(m);
    let mut time_anchor = Vec::with_capacity(m);
    for k in 0..m {
        let t = if k == m - 1 {
            *params.last().unwrap()
        } else {
            curve.param_at_length(k as f64 * ds, &cumulative)
        };
        samples.push(curve.eval(t));
        time_anchor.push(frames[nearest_knot(&params, t)]);
    }
    Ok(StrictionCurve {
        samples,
        ds,
        total_length,
        normal_gap_total: poly.gap_total(),
        time_anchor,
        degenerate: false,
    })
}

fn nearest_knot(knots: &[f64], t: f64) -> usize {
    let i = knots.partition_point(|&k| k <= t);
    if i == 0 {
        return 0;
    }
    if i >= knots.len() {
        return knots.len() - 1;
    }
    if t - knots[i - 1] <= knots[i] - t {
        i - 1
    } else {
        i
    }
}

fn spread_anchors(frames: &[usize], m: usize) -> Vec<usize> {
    let n = frames.len();
    (0..m)
        .map(|k| {
            let idx = if m == 1 { 0 } else { (k * (n - 1) + (m - 1) / 2) / (m - 1) };
            frames[idx]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screw::ScrewLine;
    use std::f64::consts::PI;

    fn polyline(points: Vec<Vector3<f64>>) -> StrictionPolyline {
        let n = points.len();
        StrictionPolyline {
            points,
            gap_lengths: vec![0.0; n.saturating_sub(1)],
            source_frames: (0..n).collect(),
        }
    }

    fn timed(frame: usize, line: ScrewLine) -> TimedScrew {
        TimedScrew { frame, line }
    }

    #[test]
    fn two_screws_give_two_points() {
        let a = ScrewLine::line(Vector3::zeros(), Vector3::x());
        let b = ScrewLine::line(Vector3::new(0.0, 0.0, 1.0), Vector3::y());
        let poly = build_striction_polyline(&[timed(0, a), timed(1, b)]).unwrap();
        assert_eq!(poly.points.len(), 2);
        assert_eq!(poly.gap_lengths.len(), 1);
        assert!((poly.points[0] - Vector3::zeros()).norm() < 1e-15);
        assert!((poly.points[1] - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert!((poly.gap_total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ten_screws_give_ten_points() {
        let screws: Vec<_> = (0..10)
            .map(|i| {
                let a = i as f64 * 0.3;
                timed(i, ScrewLine::line(Vector3::new(a.cos(), a.sin(), 0.1 * i as f64), Vector3::new(-a.sin(), a.cos(), 0.5)))
            })
            .collect();
        let poly = build_striction_polyline(&screws).unwrap();
        assert_eq!(poly.points.len(), 10);
        assert_eq!(poly.gap_lengths.len(), 9);
        assert_eq!(poly.source_frames, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_usable_screws_is_an_error() {
        let a = ScrewLine::line(Vector3::zeros(), Vector3::x());
        let id = ScrewLine::identity(Vector3::zeros());
        assert!(build_striction_polyline(&[timed(0, a), timed(1, id)]).is_err());
    }

    #[test]
    fn collinear_points_resample_on_the_line() {
        let pts = (0..5).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        let c = fit_and_resample(&polyline(pts), 9).unwrap();
        assert!((c.total_length - 4.0).abs() < 1e-12);
        assert!((c.ds - 0.5).abs() < 1e-12);
        for (k, p) in c.samples.iter().enumerate() {
            assert!((p - Vector3::new(0.5 * k as f64, 0.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn circle_length_is_two_pi() {
        let pts = (0..64)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 63.0;
                Vector3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let c = fit_and_resample(&polyline(pts), 200).unwrap();
        assert!((c.total_length / (2.0 * PI) - 1.0).abs() < 1e-3, "{}", c.total_length);
    }

    #[test]
    fn three_points_use_parabola() {
        let pts = vec![Vector3::zeros(), Vector3::new(1.0, 1.0, 0.0), Vector3::new(2.0, 0.0, 0.0)];
        let c = fit_and_resample(&polyline(pts.clone()), 11).unwrap();
        assert!(!c.degenerate);
        assert!((c.samples[0] - pts[0]).norm() < 1e-12);
        assert!((c.samples[10] - pts[2]).norm() < 1e-12);
        // samples lie on y = x(2 − x)
        for p in &c.samples {
            assert!((p.y - p.x * (2.0 - p.x)).abs() < 1e-9);
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let c = fit_and_resample(&polyline(vec![Vector3::new(1.0, 2.0, 3.0); 4]), 7).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.samples.len(), 7);
        assert_eq!(c.total_length, 0.0);
    }

    #[test]
    fn spacing_is_uniform_and_anchors_monotone() {
        let pts = (0..40)
            .map(|k| {
                let a = k as f64 * 0.15;
                Vector3::new(a.cos(), a.sin(), 0.3 * a)
            })
            .collect();
        let c = fit_and_resample(&polyline(pts), 40).unwrap();
        for w in c.samples.windows(2) {
            let chord = (w[1] - w[0]).norm();
            assert!((chord / c.ds - 1.0).abs() < 0.02);
        }
        assert!(c.time_anchor.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(c.time_anchor[0], 0);
        assert_eq!(*c.time_anchor.last().unwrap(), 39);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let pts = (0..5).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        let c = fit_and_resample(&polyline(pts), 9).unwrap();
        let csv = c.to_csv();
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.starts_with("k,s,x,y,z,time_anchor\n"));
    }
}
