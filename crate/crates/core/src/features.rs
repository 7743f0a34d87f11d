//! Per-frame feature vectors for one arm, the z-score normalization fitted on
//! training data, and precomputed vision features.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::invariants::InvariantSeries;
use crate::pose_io::Trajectory;

/// Standard deviations below this are treated as constant columns.
pub const STD_FLOOR: f64 = 1e-12;

/// Which kinematic channels go into an arm's feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    pub p: bool,
    pub q: bool,
    pub kappa: bool,
    pub tau: bool,
}

impl FeatureSet {
    pub const P: FeatureSet = FeatureSet { p: true, q: false, kappa: false, tau: false };
    pub const PQ: FeatureSet = FeatureSet { p: true, q: true, kappa: false, tau: false };
    pub const PKT: FeatureSet = FeatureSet { p: true, q: false, kappa: true, tau: true };
    pub const PQKT: FeatureSet = FeatureSet { p: true, q: true, kappa: true, tau: true };

    pub fn dim_per_arm(&self) -> usize {
        3 * self.p as usize + 4 * self.q as usize + self.kappa as usize + self.tau as usize
    }

    pub fn uses_invariants(&self) -> bool {
        self.kappa || self.tau
    }

    /// Table label such as `{p, κ, τ}`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for (on, name) in [(self.p, "p"), (self.q, "q"), (self.kappa, "κ"), (self.tau, "τ")] {
            if on {
                parts.push(name);
            }
        }
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (on, name) in [(self.p, "p"), (self.q, "q"), (self.kappa, "k"), (self.tau, "t")] {
            if on {
                parts.push(name);
            }
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    /// Parses comma-separated channel names: `p`, `q`, `k`/`kappa`/`κ`, `t`/`tau`/`τ`.
    fn from_str(s: &str) -> Result<Self> {
        let mut set = FeatureSet { p: false, q: false, kappa: false, tau: false };
        for part in s.split(',').map(str::trim) {
            let slot = match part {
                "p" => &mut set.p,
                "q" => &mut set.q,
                "k" | "kappa" | "κ" => &mut set.kappa,
                "t" | "tau" | "τ" => &mut set.tau,
                other => return Err(Error::validation(format!("unknown feature channel {other:?}"))),
            };
            if *slot {
                return Err(Error::validation(format!("feature channel {part:?} given twice")));
            }
            *slot = true;
        }
        if set.dim_per_arm() == 0 {
            return Err(Error::validation("empty feature selection"));
        }
        Ok(set)
    }
}

/// Per-column mean and standard deviation (population).
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Statistics over all rows of all given matrices.
    pub fn fit<'a>(matrices: impl IntoIterator<Item = &'a [Vec<f64>]>) -> Result<Self> {
        let mut count = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut rows_all: Vec<&Vec<f64>> = Vec::new();
        for m in matrices {
            for row in m {
                if sum.is_empty() {
                    sum = vec![0.0; row.len()];
                } else if row.len() != sum.len() {
                    return Err(Error::validation("feature rows of different widths"));
                }
                sum.iter_mut().zip(row).for_each(|(s, v)| *s += v);
                rows_all.push(row);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::validation("no frames to fit normalization on"));
        }
        let n = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let mut var = vec![0.0; mean.len()];
        for row in rows_all {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(Self { mean, std })
    }

    /// Mean 0, std 1: leaves values unchanged.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s < STD_FLOOR { 0.0 } else { (x - m) / s })
            .collect()
    }

    /// Inverse of [`normalize`](Self::normalize); constant columns come back as their mean.
    pub fn denormalize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(z, (m, s))| if *s < STD_FLOOR { *m } else { z * s + m })
            .collect()
    }
}

/// `T × dim` per-frame features with the statistics used to normalize them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub frames: Vec<Vec<f64>>,
    pub stats: NormStats,
    pub mask: Vec<bool>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.frames.first().map_or(self.stats.dim(), Vec::len)
    }
}

/// Unnormalized rows `[p | q | κ | τ]` restricted to `set`.
pub fn raw_features(traj: &Trajectory, inv: &InvariantSeries, set: FeatureSet) -> Result<Vec<Vec<f64>>> {
    let t = traj.len();
    if set.uses_invariants() && (inv.per_frame_kappa.len() != t || inv.per_frame_tau.len() != t) {
        return Err(Error::validation(format!(
            "trajectory has {t} frames but invariants have {}",
            inv.per_frame_kappa.len()
        )));
    }
    Ok(traj
        .poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let mut row = Vec::with_capacity(set.dim_per_arm());
            if set.p {
                row.extend(pose.position.iter());
            }
            if set.q {
                let q = pose.rotation;
                row.extend([q.w, q.x, q.y, q.z]);
            }
            if set.kappa {
                row.push(inv.per_frame_kappa[i]);
            }
            if set.tau {
                row.push(inv.per_frame_tau[i]);
            }
            row
        })
        .collect())
}

/// Feature rows z-scored with `stats`, or with statistics fitted on this
/// trajectory when none are given.
pub fn assemble_features(
    traj: &Trajectory,
    inv: &InvariantSeries,
    set: FeatureSet,
    stats: Option<&NormStats>,
) -> Result<FeatureSeries> {
    let raw = raw_features(traj, inv, set)?;
    let stats = match stats {
        Some(s) if s.dim() != set.dim_per_arm() => {
            return Err(Error::validation(format!(
                "normalization has {} dims, selection {set} needs {}",
                s.dim(),
                set.dim_per_arm()
            )))
        }
        Some(s) => s.clone(),
        None => NormStats::fit([raw.as_slice()])?,
    };
    let frames: Vec<_> = raw.iter().map(|r| stats.normalize(r)).collect();
    let mask = vec![true; frames.len()];
    Ok(FeatureSeries { frames, stats, mask })
}

/// Reads a `T × D` vision matrix: either CSV (one frame per row) or, for
/// `.bin`/`.f32` files, a little-endian `u32` header `(T, D)` followed by
/// `T·D` little-endian `f32` values. Values are passed through unnormalized.
pub fn load_vision_features(path: &Path, frames: usize) -> Result<FeatureSeries> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let binary = matches!(path.extension().and_then(|e| e.to_str()), Some("bin" | "f32"));
    let name = path.display().to_string();
    let rows = if binary { parse_vision_binary(&bytes, &name)? } else { parse_vision_csv(&bytes, &name)? };
    if rows.len() != frames {
        return Err(Error::validation(format!(
            "{name}: vision features have {} rows, expected {frames}",
            rows.len()
        )));
    }
    Ok(vision_series(rows))
}

/// Wraps precomputed vision rows without normalization.
pub fn vision_series(rows: Vec<Vec<f64>>) -> FeatureSeries {
    let dim = rows.first().map_or(0, Vec::len);
    FeatureSeries {
        mask: vec![true; rows.len()],
        frames: rows,
        stats: NormStats::identity(dim),
    }
}

fn parse_vision_csv(bytes: &[u8], name: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(name, 0, "not UTF-8 text"))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(name, i + 1, format!("bad value {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(name, i + 1, format!("expected {} values, got {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_vision_binary(bytes: &[u8], name: &str) -> Result<Vec<Vec<f64>>> {
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    if bytes.len() < 8 {
        return Err(Error::parse(name, 0, "missing (T, D) header"));
    }
    let (t, d) = (word(0), word(4));
    if bytes.len() != 8 + 4 * t * d {
        return Err(Error::parse(name, 0, format!("header says {t}x{d} but payload has {} bytes", bytes.len() - 8)));
    }
    Ok((0..t)
        .map(|r| {
            (0..d)
                .map(|c| f32::from_le_bytes(bytes[8 + 4 * (r * d + c)..][..4].try_into().unwrap()) as f64)
                .collect()
        })
        .collect())
}

/// Writes the binary layout read by [`load_vision_features`].
pub fn write_vision_binary(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let d = rows.first().map_or(0, Vec::len);
    let mut buf = Vec::with_capacity(8 + 4 * rows.len() * d);
    buf.extend((rows.len() as u32).to_le_bytes());
    buf.extend((d as u32).to_le_bytes());
    for row in rows {
        for v in row {
            buf.extend((*v as f32).to_le_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Writes vision rows as CSV with shortest round-trip formatting.
pub fn write_vision_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose_io::{Arm, Pose, Quaternion};
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn traj(n: usize) -> Trajectory {
        let poses = (0..n)
            .map(|i| {
                let t = i as f64;
                Pose::new(
                    Vector3::new(t.sin(), 0.5 * t, 2.0),
                    Quaternion::from_axis_angle(&Vector3::z(), 0.1 * t),
                    i,
                )
            })
            .collect();
        Trajectory::new(Arm::Left, poses, 1.0 / 30.0).unwrap()
    }

    fn inv(n: usize) -> InvariantSeries {
        InvariantSeries {
            per_frame_kappa: (0..n).map(|i| i as f64 * 0.1).collect(),
            per_frame_tau: (0..n).map(|i| (i as f64).cos()).collect(),
            ..InvariantSeries::degenerate(n)
        }
    }

    #[test]
    fn table_dims() {
        assert_eq!(FeatureSet::P.dim_per_arm(), 3);
        assert_eq!(FeatureSet::PQ.dim_per_arm(), 7);
        assert_eq!(FeatureSet::PKT.dim_per_arm(), 5);
        assert_eq!(FeatureSet::PQKT.dim_per_arm(), 9);
    }

    #[test]
    fn parse_and_label() {
        assert_eq!("p,k,t".parse::<FeatureSet>().unwrap(), FeatureSet::PKT);
        assert_eq!("p, q".parse::<FeatureSet>().unwrap().label(), "{p, q}");
        assert_eq!(FeatureSet::PQKT.label(), "{p, q, κ, τ}");
        assert_eq!(FeatureSet::PKT.to_string(), "p,k,t");
        assert!("".parse::<FeatureSet>().is_err());
        assert!("p,x".parse::<FeatureSet>().is_err());
        assert!("p,p".parse::<FeatureSet>().is_err());
    }

    #[test]
    fn every_subset_has_summed_dim() {
        for bits in 1..16u8 {
            let set = FeatureSet {
                p: bits & 1 != 0,
                q: bits & 2 != 0,
                kappa: bits & 4 != 0,
                tau: bits & 8 != 0,
            };
            let s = assemble_features(&traj(20), &inv(20), set, None).unwrap();
            assert_eq!(s.dim(), set.dim_per_arm());
        }
    }

    #[test]
    fn normalized_training_columns() {
        let s = assemble_features(&traj(50), &inv(50), FeatureSet::PQKT, None).unwrap();
        let n = s.len() as f64;
        for c in 0..s.dim() {
            let col: Vec<f64> = s.frames.iter().map(|r| r[c]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-6, "column {c} mean {mean}");
            if s.stats.std[c] >= STD_FLOOR {
                assert!((var.sqrt() - 1.0).abs() < 1e-6, "column {c} std {}", var.sqrt());
            }
        }
    }

    #[test]
    fn constant_column_is_zero() {
        // z is constant at 2.0
        let s = assemble_features(&traj(30), &inv(30), FeatureSet::P, None).unwrap();
        assert!(s.frames.iter().all(|r| r[2] == 0.0));
    }

    #[test]
    fn frozen_stats_are_reused() {
        let train = assemble_features(&traj(40), &inv(40), FeatureSet::PKT, None).unwrap();
        let val = assemble_features(&traj(25), &inv(25), FeatureSet::PKT, Some(&train.stats)).unwrap();
        assert_eq!(val.stats, train.stats);
        assert!(assemble_features(&traj(25), &inv(25), FeatureSet::P, Some(&train.stats)).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(assemble_features(&traj(20), &inv(19), FeatureSet::PKT, None).is_err());
        // position-only features do not look at the invariants
        assert!(assemble_features(&traj(20), &inv(19), FeatureSet::PQ, None).is_ok());
    }

    #[test]
    fn vision_csv_and_binary() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<Vec<f64>> = (0..100).map(|i| (0..128).map(|j| (i * 128 + j) as f64 * 0.25).collect()).collect();
        let csv = dir.path().join("v.csv");
        write_vision_csv(&csv, &rows).unwrap();
        let s = load_vision_features(&csv, 100).unwrap();
        assert_eq!((s.len(), s.dim()), (100, 128));
        assert_eq!(s.frames, rows);
        let bin = dir.path().join("v.bin");
        write_vision_binary(&bin, &rows).unwrap();
        assert_eq!(load_vision_features(&bin, 100).unwrap().frames, rows);

        write_vision_csv(&csv, &rows[..99]).unwrap();
        assert!(matches!(load_vision_features(&csv, 100), Err(Error::Validation(_))));
        assert!(matches!(load_vision_features(&dir.path().join("none.csv"), 100), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn normalize_roundtrip(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..40)) {
            let stats = NormStats::fit([rows.as_slice()]).unwrap();
            for r in &rows {
                let back = stats.denormalize(&stats.normalize(r));
                for (a, b) in back.iter().zip(r) {
                    prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
                }
            }
        }
    }
}
