//! Piecewise-polynomial space curves with arc-length measurement.

use nalgebra::Vector3;

/// 7-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GL_WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

const ARC_REL_TOL: f64 = 1e-13;
const MAX_DEPTH: u32 = 40;

/// `r(t) = c0 + c1·u + c2·u² + c3·u³` with `u = t − knots[i]` on piece `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    knots: Vec<f64>,
    coeffs: Vec<[Vector3<f64>; 4]>,
}

impl PiecewiseCurve {
    /// Natural cubic spline (zero second derivative at both ends) through
    /// `points` at strictly increasing `params`. Needs at least 3 points.
    pub fn natural_cubic(points: &[Vector3<f64>], params: &[f64]) -> Self {
        let n = points.len();
        assert!(n >= 3 && params.len() == n);
        let h: Vec<f64> = params.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<Vector3<f64>> = (0..n - 1).map(|i| (points[i + 1] - points[i]) / h[i]).collect();

        // Thomas algorithm on the interior second derivatives.
        let m = n - 2;
        let mut diag = vec![0.0; m];
        let mut rhs = vec![Vector3::zeros(); m];
        for k in 0..m {
            let i = k + 1;
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            rhs[k] = 6.0 * (slope[i] - slope[i - 1]);
        }
        for k in 1..m {
            let w = h[k] / diag[k - 1];
            diag[k] -= w * h[k];
            let prev = rhs[k - 1];
            rhs[k] -= w * prev;
        }
        let mut second = vec![Vector3::zeros(); n];
        for k in (0..m).rev() {
            let upper = if k + 1 < m { h[k + 1] * second[k + 2] } else { Vector3::zeros() };
            second[k + 1] = (rhs[k] - upper) / diag[k];
        }

        let coeffs = (0..n - 1)
            .map(|i| {
                let (mi, mj, hi) = (second[i], second[i + 1], h[i]);
                [
                    points[i],
                    slope[i] - hi * (2.0 * mi + mj) / 6.0,
                    mi / 2.0,
                    (mj - mi) / (6.0 * hi),
                ]
            })
            .collect();
        Self {
            knots: params.to_vec(),
            coeffs,
        }
    }

    /// The interpolating parabola through three points.
    pub fn quadratic(points: &[Vector3<f64>], params: &[f64]) -> Self {
        assert!(points.len() == 3 && params.len() == 3);
        let (t0, t1, t2) = (params[0], params[1], params[2]);
        let f01 = (points[1] - points[0]) / (t1 - t0);
        let f12 = (points[2] - points[1]) / (t2 - t1);
        let f012 = (f12 - f01) / (t2 - t0);
        // Newton form about t0, then Taylor-shifted to t1 for the second piece.
        let c1_0 = f01 - f012 * (t1 - t0);
        let c1_1 = c1_0 + 2.0 * f012 * (t1 - t0);
        Self {
            knots: params.to_vec(),
            coeffs: vec![
                [points[0], c1_0, f012, Vector3::zeros()],
                [points[1], c1_1, f012, Vector3::zeros()],
            ],
        }
    }

    pub fn linear(points: &[Vector3<f64>], params: &[f64]) -> Self {
        assert!(points.len() == 2 && params.len() == 2);
        let slope = (points[1] - points[0]) / (params[1] - params[0]);
        Self {
            knots: params.to_vec(),
            coeffs: vec![[points[0], slope, Vector3::zeros(), Vector3::zeros()]],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn pieces(&self) -> usize {
        self.coeffs.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Piece containing `t` (clamped to the domain).
    pub fn piece_of(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= t);
        i.saturating_sub(1).min(self.pieces() - 1)
    }

    pub fn eval(&self, t: f64) -> Vector3<f64> {
        let i = self.piece_of(t);
        let u = t - self.knots[i];
        let c = &self.coeffs[i];
        c[0] + u * (c[1] + u * (c[2] + u * c[3]))
    }

    pub fn derivative(&self, t: f64) -> Vector3<f64> {
        self.derivative_on(self.piece_of(t), t)
    }

    fn derivative_on(&self, i: usize, t: f64) -> Vector3<f64> {
        let u = t - self.knots[i];
        let c = &self.coeffs[i];
        c[1] + u * (2.0 * c[2] + 3.0 * u * c[3])
    }

    fn speed_on(&self, i: usize, t: f64) -> f64 {
        self.derivative_on(i, t).norm()
    }

    fn gauss(&self, i: usize, a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(x, w)| w * self.speed_on(i, mid + half * x))
            .sum::<f64>()
            * half
    }

    fn adaptive(&self, i: usize, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (left, right) = (self.gauss(i, a, m), self.gauss(i, m, b));
        let halves = left + right;
        if depth >= MAX_DEPTH || (halves - whole).abs() <= ARC_REL_TOL * halves.abs().max(f64::MIN_POSITIVE) {
            return halves;
        }
        self.adaptive(i, a, m, left, depth + 1) + self.adaptive(i, m, b, right, depth + 1)
    }

    /// Arc length of piece `i` between parameters `a ≤ b`.
    pub fn piece_arc_length(&self, i: usize, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let whole = self.gauss(i, a, b);
        self.adaptive(i, a, b, whole, 0)
    }

    /// Cumulative arc length at every knot; first entry 0.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.knots.len());
        acc.push(0.0);
        for i in 0..self.pieces() {
            let l = self.piece_arc_length(i, self.knots[i], self.knots[i + 1]);
            acc.push(acc[i] + l);
        }
        acc
    }

    /// Parameter at which the arc length from the start equals `s`, given the
    /// knot table from [`cumulative_lengths`](Self::cumulative_lengths).
    pub fn param_at_length(&self, s: f64, cumulative: &[f64]) -> f64 {
        let total = *cumulative.last().unwrap();
        if s <= 0.0 {
            return self.knots[0];
        }
        if s >= total {
            return *self.knots.last().unwrap();
        }
        let i = (cumulative.partition_point(|&c| c <= s).saturating_sub(1)).min(self.pieces() - 1);
        let target = s - cumulative[i];
        let (mut lo, mut hi) = (self.knots[i], self.knots[i + 1]);
        let piece_len = cumulative[i + 1] - cumulative[i];
        let mut t = lo + (hi - lo) * (target / piece_len).clamp(0.0, 1.0);
        for _ in 0..100 {
            let f = self.piece_arc_length(i, self.knots[i], t) - target;
            if f.abs() <= 1e-15 * total.max(1e-300) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let speed = self.speed_on(i, t);
            let newton = t - f / speed;
            t = if speed > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chord_params(points: &[Vector3<f64>]) -> Vec<f64> {
        let mut t = vec![0.0];
        for w in points.windows(2) {
            t.push(t.last().unwrap() + (w[1] - w[0]).norm());
        }
        t
    }

    #[test]
    fn cubic_interpolates_and_has_natural_ends() {
        let pts: Vec<_> = (0..6)
            .map(|i| {
                let x = i as f64 * 0.7;
                Vector3::new(x, x.sin(), 0.2 * x * x)
            })
            .collect();
        let t = chord_params(&pts);
        let c = PiecewiseCurve::natural_cubic(&pts, &t);
        for (p, ti) in pts.iter().zip(&t) {
            assert!((c.eval(*ti) - p).norm() < 1e-12);
        }
        // second derivative vanishes at both ends
        assert!(c.coeffs[0][2].norm() < 1e-12);
        let last = c.coeffs.last().unwrap();
        let h = t[5] - t[4];
        assert!((2.0 * last[2] + 6.0 * last[3] * h).norm() < 1e-10);
    }

    #[test]
    fn cubic_is_c2_at_knots() {
        let pts: Vec<_> = (0..8)
            .map(|i| Vector3::new((i as f64).cos(), (i as f64 * 0.5).sin(), i as f64))
            .collect();
        let t = chord_params(&pts);
        let c = PiecewiseCurve::natural_cubic(&pts, &t);
        for i in 1..7 {
            let h = t[i] - t[i - 1];
            let l = &c.coeffs[i - 1];
            let r = &c.coeffs[i];
            let d1 = l[1] + 2.0 * l[2] * h + 3.0 * l[3] * h * h;
            let d2 = 2.0 * l[2] + 6.0 * l[3] * h;
            assert!((d1 - r[1]).norm() < 1e-10);
            assert!((d2 - 2.0 * r[2]).norm() < 1e-10);
        }
    }

    #[test]
    fn quadratic_passes_through_points() {
        let pts = [Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 1.0, 0.0), Vector3::new(2.0, 0.0, 1.0)];
        let t = chord_params(&pts);
        let c = PiecewiseCurve::quadratic(&pts, &t);
        for (p, ti) in pts.iter().zip(&t) {
            assert!((c.eval(*ti) - p).norm() < 1e-12);
        }
        // both pieces are the same parabola
        let mid = 0.5 * (t[0] + t[1]);
        let left = c.coeffs[0];
        let u = mid - t[0];
        assert!((c.eval(mid) - (left[0] + u * left[1] + u * u * left[2])).norm() < 1e-14);
        let beyond = t[1] + 0.3;
        let u = beyond - t[0];
        assert!((c.eval(beyond) - (left[0] + u * left[1] + u * u * left[2])).norm() < 1e-12);
    }

    #[test]
    fn parabola_arc_length_matches_closed_form() {
        // y = x², x ∈ [0, 1] written as a single linear-in-t piece with t = x
        let c = PiecewiseCurve {
            knots: vec![0.0, 1.0],
            coeffs: vec![[Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0), Vector3::zeros()]],
        };
        let exact = 0.5 * 5f64.sqrt() + 0.25 * (2.0 + 5f64.sqrt()).ln();
        let got = c.piece_arc_length(0, 0.0, 1.0);
        assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");

        let cum = c.cumulative_lengths();
        let t = c.param_at_length(0.5 * exact, &cum);
        assert!((c.piece_arc_length(0, 0.0, t) - 0.5 * exact).abs() < 1e-14);
    }
}
