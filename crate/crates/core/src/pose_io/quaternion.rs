//! Unit quaternions in Hamilton convention, `w` scalar first.

use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Residual allowed on `RᵀR − I` for rotation blocks read from text files.
pub const ORTHONORMALITY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Raw constructor; no normalization.
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Builds a unit quaternion from arbitrary components. Returns `None` for a
    /// zero or non-finite input.
    pub fn unit(w: f64, x: f64, y: f64, z: f64) -> Option<Self> {
        let q = Self::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || n == 0.0 {
            return None;
        }
        Some(q.scale(1.0 / n))
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let (s, c) = (angle / 2.0).sin_cos();
        let a = axis / n * s;
        Self::new(c, a.x, a.y, a.z)
    }

    pub fn from_scalar_vector(w: f64, v: &Vector3<f64>) -> Self {
        Self::new(w, v.x, v.y, v.z)
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Representative with non-negative scalar part.
    pub fn canonical(&self) -> Self {
        if self.w < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Rotates `v` by this (unit) quaternion.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        // v' = v + 2w(u × v) + 2 u × (u × v)
        let u = self.vector();
        let t = 2.0 * u.cross(v);
        v + self.w * t + u.cross(&t)
    }

    /// Distance on the rotation group's double cover: `min(‖p − q‖, ‖p + q‖)`.
    pub fn distance(&self, other: &Self) -> f64 {
        let d = |a: &Self, b: &Self| {
            ((a.w - b.w).powi(2) + (a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2))
                .sqrt()
        };
        d(self, other).min(d(self, &-*other))
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = *self;
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Largest absolute entry of `RᵀR − I`.
pub fn orthonormality_residual(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).abs().max()
}

/// Converts a proper rotation matrix to a unit quaternion with `w ≥ 0`.
///
/// The matrix is validated (orthonormality residual within
/// [`ORTHONORMALITY_TOL`], positive determinant) but not re-orthonormalized.
pub fn rotmat_to_quat(r: &Matrix3<f64>) -> Result<Quaternion> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("rotation matrix has non-finite entries"));
    }
    let residual = orthonormality_residual(r);
    if residual > ORTHONORMALITY_TOL {
        return Err(Error::validation(format!(
            "rotation block is not orthonormal (residual {residual:.3e})"
        )));
    }
    let det = r.determinant();
    if det <= 0.0 {
        return Err(Error::validation(format!(
            "rotation block is a reflection (det {det:.6})"
        )));
    }

    // Shepperd: branch on the largest diagonal combination for conditioning.
    let (m00, m11, m22) = (r[(0, 0)], r[(1, 1)], r[(2, 2)]);
    let trace = m00 + m11 + m22;
    let q = if trace >= m00.max(m11).max(m22) {
        let s = (1.0 + trace).sqrt() * 2.0;
        Quaternion::new(
            0.25 * s,
            (r[(2, 1)] - r[(1, 2)]) / s,
            (r[(0, 2)] - r[(2, 0)]) / s,
            (r[(1, 0)] - r[(0, 1)]) / s,
        )
    } else if m00 >= m11 && m00 >= m22 {
        let s = (1.0 + m00 - m11 - m22).sqrt() * 2.0;
        Quaternion::new(
            (r[(2, 1)] - r[(1, 2)]) / s,
            0.25 * s,
            (r[(0, 1)] + r[(1, 0)]) / s,
            (r[(0, 2)] + r[(2, 0)]) / s,
        )
    } else if m11 >= m22 {
        let s = (1.0 - m00 + m11 - m22).sqrt() * 2.0;
        Quaternion::new(
            (r[(0, 2)] - r[(2, 0)]) / s,
            (r[(0, 1)] + r[(1, 0)]) / s,
            0.25 * s,
            (r[(1, 2)] + r[(2, 1)]) / s,
        )
    } else {
        let s = (1.0 - m00 - m11 + m22).sqrt() * 2.0;
        Quaternion::new(
            (r[(1, 0)] - r[(0, 1)]) / s,
            (r[(0, 2)] + r[(2, 0)]) / s,
            (r[(1, 2)] + r[(2, 1)]) / s,
            0.25 * s,
        )
    };
    Ok(q.normalized().canonical())
}

pub fn quat_to_rotmat(q: &Quaternion) -> Matrix3<f64> {
    q.to_rotation_matrix()
}

/// Flips signs so consecutive quaternions have non-negative dot products.
/// The first element is kept as is.
pub fn hemisphere_align(qs: &[Quaternion]) -> Vec<Quaternion> {
    let mut out: Vec<Quaternion> = Vec::with_capacity(qs.len());
    for q in qs {
        let next = match out.last() {
            Some(prev) if prev.dot(q) < 0.0 => -*q,
            _ => *q,
        };
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn rz(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn identity_matrix_gives_identity_quaternion() {
        let q = rotmat_to_quat(&Matrix3::identity()).unwrap();
        assert_eq!(q, Quaternion::IDENTITY);
    }

    #[test]
    fn quarter_turn_about_z() {
        let q = rotmat_to_quat(&rz(FRAC_PI_2)).unwrap();
        assert!((q.w - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(q.x.abs() < 1e-15 && q.y.abs() < 1e-15);
        assert!((q.z - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn reflection_is_rejected() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(matches!(rotmat_to_quat(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn non_orthonormal_is_rejected() {
        let mut m = Matrix3::identity();
        m[(0, 1)] = 0.01;
        assert!(rotmat_to_quat(&m).is_err());
        // within the single-precision text tolerance is accepted
        m[(0, 1)] = 1e-4;
        assert!(rotmat_to_quat(&m).is_ok());
    }

    #[test]
    fn half_turns_use_off_diagonal_branches() {
        for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
            let q = Quaternion::from_axis_angle(&axis, std::f64::consts::PI);
            let back = rotmat_to_quat(&q.to_rotation_matrix()).unwrap();
            assert!(back.distance(&q) < 1e-12);
        }
    }

    #[test]
    fn hemisphere_align_examples() {
        let q = Quaternion::from_axis_angle(&Vector3::new(1.0, 2.0, 3.0), 0.7);
        assert_eq!(hemisphere_align(&[q, -q]), vec![q, q]);

        let aligned = vec![q, q, q];
        assert_eq!(hemisphere_align(&aligned), aligned);

        let alternating: Vec<_> = (0..5)
            .map(|i| {
                let p = Quaternion::from_axis_angle(&Vector3::z(), 0.1 * i as f64);
                if i % 2 == 0 { p } else { -p }
            })
            .collect();
        let out = hemisphere_align(&alternating);
        for w in out.windows(2) {
            assert!(w[0].dot(&w[1]) >= 0.0);
        }
        for (a, b) in out.iter().zip(&alternating) {
            assert!(a == b || *a == -*b);
        }
    }

    fn arb_quat() -> impl Strategy<Value = Quaternion> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter_map("non-zero", |(w, x, y, z)| {
                Quaternion::unit(w, x, y, z).filter(|q| q.norm() > 0.5)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matrix_roundtrip(q in arb_quat()) {
            let back = rotmat_to_quat(&quat_to_rotmat(&q)).unwrap();
            prop_assert!(back.distance(&q) < 1e-9);
            prop_assert!((back.norm() - 1.0).abs() < 1e-9);
            prop_assert!(back.w >= 0.0);
            prop_assert!((back.to_rotation_matrix() - q.to_rotation_matrix()).abs().max() < 1e-6);
        }

        #[test]
        fn alignment_is_idempotent_and_preserves_rotation(
            qs in proptest::collection::vec(arb_quat(), 1..20),
            v in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        ) {
            let v = Vector3::new(v.0, v.1, v.2);
            let once = hemisphere_align(&qs);
            prop_assert_eq!(&hemisphere_align(&once), &once);
            for (a, b) in once.iter().zip(&qs) {
                prop_assert!((a.rotate(&v) - b.rotate(&v)).norm() < 1e-12);
            }
        }
    }
}
