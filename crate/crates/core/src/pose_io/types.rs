use std::fmt;
use std::str::FromStr;

use nalgebra::{Isometry3, Vector3};

use super::quaternion::Quaternion;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// Tool-tip position in meters.
    pub position: Vector3<f64>,
    pub rotation: Quaternion,
    pub frame_index: usize,
}

impl Pose {
    pub fn new(position: Vector3<f64>, rotation: Quaternion, frame_index: usize) -> Self {
        Self {
            position,
            rotation,
            frame_index,
        }
    }

    /// Pre-multiplies the pose by a rigid transform of the world frame.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        let r = iso.rotation.quaternion();
        let rq = Quaternion::new(r.w, r.i, r.j, r.k);
        Self {
            position: iso.rotation * self.position + iso.translation.vector,
            rotation: rq * self.rotation,
            frame_index: self.frame_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub arm: Arm,
    pub poses: Vec<Pose>,
    /// Seconds between consecutive frames.
    pub sample_period: f64,
}

impl Trajectory {
    /// Validates finiteness, unit rotations and strictly increasing frame indices.
    pub fn new(arm: Arm, poses: Vec<Pose>, sample_period: f64) -> Result<Self> {
        let traj = Self {
            arm,
            poses,
            sample_period,
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(Error::validation("sample period must be positive"));
        }
        for (i, p) in self.poses.iter().enumerate() {
            if !p.position.iter().all(|v| v.is_finite()) || !p.rotation.is_finite() {
                return Err(Error::validation(format!(
                    "{} arm pose {i} has non-finite components",
                    self.arm
                )));
            }
            if (p.rotation.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!(
                    "{} arm pose {i} rotation is not a unit quaternion",
                    self.arm
                )));
            }
        }
        for w in self.poses.windows(2) {
            if w[1].frame_index <= w[0].frame_index {
                return Err(Error::validation(format!(
                    "{} arm frame indices not strictly increasing at frame {}",
                    self.arm, w[1].frame_index
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.poses.iter().map(|p| &p.position)
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        Self {
            arm: self.arm,
            poses: self.poses.iter().map(|p| p.transformed(iso)).collect(),
            sample_period: self.sample_period,
        }
    }

    /// Scales positions by `c`, leaving rotations untouched.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            arm: self.arm,
            poses: self
                .poses
                .iter()
                .map(|p| Pose::new(p.position * c, p.rotation, p.frame_index))
                .collect(),
            sample_period: self.sample_period,
        }
    }
}

/// Gesture label. Labels are written `G<n>` in transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GestureId(pub u32);

impl GestureId {
    /// Frames not covered by any transcript segment.
    pub const UNLABELED: GestureId = GestureId(u32::MAX);

    pub fn is_labeled(self) -> bool {
        self != Self::UNLABELED
    }
}

impl fmt::Display for GestureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_labeled() {
            write!(f, "G{}", self.0)
        } else {
            f.write_str("unlabeled")
        }
    }
}

impl FromStr for GestureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "unlabeled" {
            return Ok(Self::UNLABELED);
        }
        let digits = s.strip_prefix('G').unwrap_or(s);
        match digits.parse::<u32>() {
            Ok(n) if n != u32::MAX => Ok(GestureId(n)),
            _ => Err(format!("invalid gesture label {s:?}")),
        }
    }
}

/// Inclusive frame range carrying one gesture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub gesture: GestureId,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Per-frame labels together with their run-length segments. The segments
/// always partition `[0, T)`, unlabeled runs included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GestureTimeline {
    labels: Vec<GestureId>,
    segments: Vec<Segment>,
}

impl GestureTimeline {
    pub fn from_labels(labels: Vec<GestureId>) -> Self {
        let segments = run_length_segments(&labels);
        Self { labels, segments }
    }

    pub fn labels(&self) -> &[GestureId] {
        &self.labels
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `true` for frames carrying a real gesture.
    pub fn mask(&self) -> Vec<bool> {
        self.labels.iter().map(|g| g.is_labeled()).collect()
    }

    /// Distinct labeled gestures, sorted.
    pub fn gestures(&self) -> Vec<GestureId> {
        let mut g: Vec<_> = self.labels.iter().copied().filter(|g| g.is_labeled()).collect();
        g.sort_unstable();
        g.dedup();
        g
    }
}

fn run_length_segments(labels: &[GestureId]) -> Vec<Segment> {
    let mut segments: Vec<Segment> = Vec::new();
    for (t, &g) in labels.iter().enumerate() {
        match segments.last_mut() {
            Some(seg) if seg.gesture == g => seg.end = t,
            _ => segments.push(Segment {
                start: t,
                end: t,
                gesture: g,
            }),
        }
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gesture_labels_parse_and_print() {
        assert_eq!("G7".parse::<GestureId>().unwrap(), GestureId(7));
        assert_eq!("11".parse::<GestureId>().unwrap(), GestureId(11));
        assert_eq!(GestureId(3).to_string(), "G3");
        assert!("Gx".parse::<GestureId>().is_err());
    }

    #[test]
    fn non_monotone_frames_are_rejected() {
        let p = Pose::new(Vector3::zeros(), Quaternion::IDENTITY, 3);
        let q = Pose::new(Vector3::zeros(), Quaternion::IDENTITY, 3);
        assert!(Trajectory::new(Arm::Left, vec![p, q], 1.0 / 30.0).is_err());
    }

    #[test]
    fn nan_positions_are_rejected() {
        let p = Pose::new(Vector3::new(f64::NAN, 0.0, 0.0), Quaternion::IDENTITY, 0);
        assert!(Trajectory::new(Arm::Right, vec![p], 1.0 / 30.0).is_err());
    }

    proptest! {
        #[test]
        fn segments_partition_frames(raw in proptest::collection::vec(0u32..4, 1..60)) {
            let labels: Vec<_> = raw
                .iter()
                .map(|&g| if g == 0 { GestureId::UNLABELED } else { GestureId(g) })
                .collect();
            let tl = GestureTimeline::from_labels(labels.clone());
            let segs = tl.segments();
            prop_assert_eq!(segs[0].start, 0);
            prop_assert_eq!(segs.last().unwrap().end, labels.len() - 1);
            for w in segs.windows(2) {
                prop_assert_eq!(w[1].start, w[0].end + 1);
                prop_assert!(w[0].gesture != w[1].gesture);
            }
            let expanded: Vec<_> = segs
                .iter()
                .flat_map(|s| std::iter::repeat(s.gesture).take(s.len()))
                .collect();
            prop_assert_eq!(expanded, labels);
        }
    }
}
