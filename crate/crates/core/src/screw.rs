//! Screws of finite motion between consecutive poses, in Plücker form, and
//! the common normal between two screw lines.

use std::cmp::Ordering;
use std::fmt::Write as _;

use nalgebra::{Isometry3, Vector3};

use crate::pose_io::{Pose, Quaternion, Trajectory};

/// Rotations below this angle (radians) are treated as no rotation.
pub const THETA_MIN: f64 = 1e-6;
/// Displacements below this length (meters) are treated as no displacement.
pub const D_MIN: f64 = 1e-9;
/// Threshold on `1 − cos²φ` between unit line directions for the parallel branch.
pub const EPS_PAR: f64 = 1e-10;
/// Skew lines closer than this are reported as intersecting.
pub const INTERSECT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScrewKind {
    General,
    PureTranslation,
    Identity,
}

impl ScrewKind {
    pub fn name(self) -> &'static str {
        match self {
            ScrewKind::General => "general",
            ScrewKind::PureTranslation => "pure_translation",
            ScrewKind::Identity => "identity",
        }
    }
}

/// A finite screw: a line in Plücker coordinates plus the rotation about it and
/// the translation along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewLine {
    pub direction: Vector3<f64>,
    pub point: Vector3<f64>,
    /// `point × direction`
    pub moment: Vector3<f64>,
    pub angle: f64,
    /// Signed displacement along `direction`.
    pub translation: f64,
    pub kind: ScrewKind,
}

impl ScrewLine {
    /// A bare line through `point` along `direction` (normalized), with no motion.
    pub fn line(point: Vector3<f64>, direction: Vector3<f64>) -> Self {
        let direction = direction.normalize();
        Self {
            direction,
            point,
            moment: point.cross(&direction),
            angle: 0.0,
            translation: 0.0,
            kind: ScrewKind::General,
        }
    }

    pub fn identity(at: Vector3<f64>) -> Self {
        Self {
            direction: Vector3::z(),
            point: at,
            moment: at.cross(&Vector3::z()),
            angle: 0.0,
            translation: 0.0,
            kind: ScrewKind::Identity,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.kind == ScrewKind::Identity
    }

    /// Applies the screw displacement: rotate by `angle` about the line, then
    /// slide `translation` along it.
    pub fn apply(&self, pose: &Pose) -> Pose {
        match self.kind {
            ScrewKind::Identity => *pose,
            ScrewKind::PureTranslation => Pose::new(
                pose.position + self.translation * self.direction,
                pose.rotation,
                pose.frame_index,
            ),
            ScrewKind::General => {
                let r = Quaternion::from_axis_angle(&self.direction, self.angle);
                let position = self.point
                    + r.rotate(&(pose.position - self.point))
                    + self.translation * self.direction;
                Pose::new(position, (r * pose.rotation).normalized(), pose.frame_index)
            }
        }
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        let direction = iso.rotation * self.direction;
        let point = iso.rotation * self.point + iso.translation.vector;
        Self {
            direction,
            point,
            moment: point.cross(&direction),
            ..*self
        }
    }

    pub fn distance_to_point(&self, p: &Vector3<f64>) -> f64 {
        (p - self.point).cross(&self.direction).norm()
    }

    pub fn point_at(&self, mu: f64) -> Vector3<f64> {
        self.point + mu * self.direction
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeRotation {
    pub delta: Quaternion,
    /// `None` when the rotation is too small to define an axis.
    pub axis: Option<Vector3<f64>>,
    pub angle: f64,
}

/// `Δq = q_t1 ⊛ q_t*`, its axis and angle in `[0, π]`.
pub fn relative_rotation(q_t: &Quaternion, q_t1: &Quaternion) -> RelativeRotation {
    let delta = (*q_t1 * q_t.conjugate()).canonical();
    let v = delta.vector();
    let sin_half = v.norm();
    let angle = 2.0 * sin_half.atan2(delta.w);
    let axis = if sin_half >= (THETA_MIN / 2.0).sin() {
        Some(v / sin_half)
    } else {
        None
    };
    RelativeRotation { delta, axis, angle }
}

/// Screw of finite motion carrying `pose_t` onto `pose_t1` (Chasles).
pub fn finite_screw(pose_t: &Pose, pose_t1: &Pose) -> ScrewLine {
    let rel = relative_rotation(&pose_t.rotation, &pose_t1.rotation);
    let p = pose_t.position;
    let d = pose_t1.position - p;

    let axis = match rel.axis {
        Some(axis) if rel.angle >= THETA_MIN => axis,
        _ => {
            let len = d.norm();
            if len < D_MIN {
                return ScrewLine::identity(p);
            }
            let direction = d / len;
            return ScrewLine {
                direction,
                point: p,
                moment: p.cross(&direction),
                angle: 0.0,
                translation: len,
                kind: ScrewKind::PureTranslation,
            };
        }
    };

    let d_perp = d - axis * axis.dot(&d);
    let p_mid = p + 0.5 * d_perp;
    let n = d_perp.norm();
    let point = if n < D_MIN {
        p_mid
    } else {
        p_mid + (n / (2.0 * (rel.angle / 2.0).tan())) * axis.cross(&(d_perp / n))
    };
    ScrewLine {
        direction: axis,
        point,
        moment: point.cross(&axis),
        angle: rel.angle,
        translation: axis.dot(&d),
        kind: ScrewKind::General,
    }
}

/// Screw from pose `frame` to pose `frame + 1` (indices into the trajectory).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedScrew {
    pub frame: usize,
    pub line: ScrewLine,
}

/// One screw per adjacent pose pair, identity screws included.
pub fn trajectory_screws(traj: &Trajectory) -> Vec<TimedScrew> {
    traj.poses
        .windows(2)
        .enumerate()
        .map(|(frame, w)| TimedScrew {
            frame,
            line: finite_screw(&w[0], &w[1]),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalCase {
    Parallel,
    Skew,
    Intersecting,
}

/// The common normal between two lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSegment {
    pub p_a: Vector3<f64>,
    pub p_b: Vector3<f64>,
    pub distance: f64,
    pub case: NormalCase,
}

/// Closest points between two lines.
///
/// Non-parallel pairs are evaluated in a canonical argument order so that
/// swapping `a` and `b` swaps the closest points bit for bit.
pub fn line_closest_points(a: &ScrewLine, b: &ScrewLine) -> NormalSegment {
    let (sa, sb) = (a.direction, b.direction);
    // |sa × sb|² equals |sa|²|sb|² − (sa·sb)² without the cancellation
    let den = sa.cross(&sb).norm_squared();

    if den < EPS_PAR {
        let proj = b.point + ((a.point - b.point).dot(&sb) / sb.norm_squared()) * sb;
        return NormalSegment {
            p_a: a.point,
            p_b: proj,
            distance: (a.point - proj).norm(),
            case: NormalCase::Parallel,
        };
    }

    if line_order(a, b) == Ordering::Greater {
        let s = skew_closest_points(b, a, den);
        return NormalSegment {
            p_a: s.p_b,
            p_b: s.p_a,
            ..s
        };
    }
    skew_closest_points(a, b, den)
}

fn skew_closest_points(a: &ScrewLine, b: &ScrewLine, den: f64) -> NormalSegment {
    let (sa, sb) = (a.direction, b.direction);
    // cross-product form stays accurate for nearly parallel lines
    let n = sa.cross(&sb);
    let w = b.point - a.point;
    let mu_a = w.cross(&sb).dot(&n) / den;
    let mu_b = w.cross(&sa).dot(&n) / den;
    let p_a = a.point + mu_a * sa;
    let p_b = b.point + mu_b * sb;
    let distance = (p_b - p_a).norm();
    NormalSegment {
        p_a,
        p_b,
        distance,
        case: if distance <= INTERSECT_TOL {
            NormalCase::Intersecting
        } else {
            NormalCase::Skew
        },
    }
}

fn line_order(a: &ScrewLine, b: &ScrewLine) -> Ordering {
    a.direction
        .iter()
        .chain(a.point.iter())
        .zip(b.direction.iter().chain(b.point.iter()))
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// CSV rows `t,sx,sy,sz,s0x,s0y,s0z,theta,kind`.
pub fn screws_csv(screws: &[TimedScrew]) -> String {
    let mut out = String::from("t,sx,sy,sz,s0x,s0y,s0z,theta,kind\n");
    for s in screws {
        let l = &s.line;
        writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            s.frame,
            l.direction.x,
            l.direction.y,
            l.direction.z,
            l.point.x,
            l.point.y,
            l.point.z,
            l.angle,
            l.kind.name()
        )
        .unwrap();
    }
    out
}
