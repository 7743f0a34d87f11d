//! Whitespace-separated kinematics tables (one frame per row).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::quaternion::{hemisphere_align, rotmat_to_quat};
use super::types::{Arm, Pose, Trajectory};
use crate::error::{Error, Result};

/// Default frame rate assumed for kinematics rows.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 30.0;

/// Column offsets (0-based) of the tool-tip position triplet and the
/// row-major 3×3 rotation block for each arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMap {
    pub left_position: usize,
    pub left_rotation: usize,
    pub right_position: usize,
    pub right_rotation: usize,
    pub columns: usize,
    pub sample_rate_hz: f64,
}

impl Default for ColumnMap {
    /// JIGSAWS 76-column layout, patient-side manipulators.
    fn default() -> Self {
        Self {
            left_position: 38,
            left_rotation: 41,
            right_position: 57,
            right_rotation: 60,
            columns: 76,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

impl ColumnMap {
    pub fn position_offset(&self, arm: Arm) -> usize {
        match arm {
            Arm::Left => self.left_position,
            Arm::Right => self.right_position,
        }
    }

    pub fn rotation_offset(&self, arm: Arm) -> usize {
        match arm {
            Arm::Left => self.left_rotation,
            Arm::Right => self.right_rotation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let blocks = [
            ("left_position", self.left_position, 3),
            ("left_rotation", self.left_rotation, 9),
            ("right_position", self.right_position, 3),
            ("right_rotation", self.right_rotation, 9),
        ];
        for (name, start, len) in blocks {
            if start + len > self.columns {
                return Err(Error::validation(format!(
                    "column map: {name} block [{start}, {}) exceeds row width {}",
                    start + len,
                    self.columns
                )));
            }
        }
        for (i, a) in blocks.iter().enumerate() {
            for b in &blocks[i + 1..] {
                if a.1 < b.1 + b.2 && b.1 < a.1 + a.2 {
                    return Err(Error::validation(format!(
                        "column map: blocks {} and {} overlap",
                        a.0, b.0
                    )));
                }
            }
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::validation("column map: sample_rate_hz must be positive"));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Unspecified keys keep
    /// their JIGSAWS defaults.
    pub fn from_str_named(text: &str, file: &str) -> Result<Self> {
        let mut map = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::parse(file, i + 1, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let as_offset = || {
                value
                    .parse::<usize>()
                    .map_err(|_| Error::parse(file, i + 1, format!("{key}: not an integer: {value}")))
            };
            match key {
                "left_position" => map.left_position = as_offset()?,
                "left_rotation" => map.left_rotation = as_offset()?,
                "right_position" => map.right_position = as_offset()?,
                "right_rotation" => map.right_rotation = as_offset()?,
                "columns" => map.columns = as_offset()?,
                "sample_rate_hz" => {
                    map.sample_rate_hz = value
                        .parse()
                        .map_err(|_| Error::parse(file, i + 1, format!("bad rate {value}")))?
                }
                other => return Err(Error::parse(file, i + 1, format!("unknown key {other:?}"))),
            }
        }
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_str_named(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        format!(
            "left_position = {}\nleft_rotation = {}\nright_position = {}\nright_rotation = {}\ncolumns = {}\nsample_rate_hz = {}\n",
            self.left_position,
            self.left_rotation,
            self.right_position,
            self.right_rotation,
            self.columns,
            self.sample_rate_hz
        )
    }
}

/// Raw numeric rows of a kinematics file.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicsTable {
    pub width: usize,
    pub rows: Vec<Vec<f64>>,
}

impl KinematicsTable {
    pub fn parse(text: &str, width: usize, file: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::parse(file, i + 1, format!("not a number: {tok:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != width {
                return Err(Error::parse(
                    file,
                    i + 1,
                    format!("expected {width} columns, found {}", row.len()),
                ));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::parse(file, i + 1, format!("non-finite value {v}")));
            }
            rows.push(row);
        }
        Ok(Self { width, rows })
    }

    /// Shortest round-trip decimal formatting, so parsing the output
    /// reproduces every value bit for bit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Extracts both arms. Frame indices are row indices.
    pub fn trajectories(&self, map: &ColumnMap, file: &str) -> Result<(Trajectory, Trajectory)> {
        map.validate()?;
        if map.columns != self.width {
            return Err(Error::validation(format!(
                "column map expects {} columns, table has {}",
                map.columns, self.width
            )));
        }
        let period = 1.0 / map.sample_rate_hz;
        let mut arms = Vec::with_capacity(2);
        for arm in Arm::BOTH {
            let (po, ro) = (map.position_offset(arm), map.rotation_offset(arm));
            let mut positions = Vec::with_capacity(self.rows.len());
            let mut rotations = Vec::with_capacity(self.rows.len());
            for (i, row) in self.rows.iter().enumerate() {
                positions.push(Vector3::new(row[po], row[po + 1], row[po + 2]));
                let m = Matrix3::from_row_slice(&row[ro..ro + 9]);
                let q = rotmat_to_quat(&m).map_err(|e| match e {
                    Error::Validation(msg) => {
                        Error::Validation(format!("{file}: row {}, {arm} arm: {msg}", i + 1))
                    }
                    other => other,
                })?;
                rotations.push(q);
            }
            let poses = positions
                .into_iter()
                .zip(hemisphere_align(&rotations))
                .enumerate()
                .map(|(i, (p, q))| Pose::new(p, q, i))
                .collect();
            arms.push(Trajectory::new(arm, poses, period)?);
        }
        let right = arms.pop().unwrap();
        let left = arms.pop().unwrap();
        Ok((left, right))
    }

    /// Builds a table from two equally long trajectories; unmapped columns are zero.
    pub fn from_trajectories(left: &Trajectory, right: &Trajectory, map: &ColumnMap) -> Result<Self> {
        map.validate()?;
        if left.len() != right.len() {
            return Err(Error::validation("left and right trajectories differ in length"));
        }
        let rows = left
            .poses
            .iter()
            .zip(&right.poses)
            .map(|(l, r)| {
                let mut row = vec![0.0; map.columns];
                for (arm, pose) in [(Arm::Left, l), (Arm::Right, r)] {
                    let po = map.position_offset(arm);
                    row[po..po + 3].copy_from_slice(pose.position.as_slice());
                    let m = pose.rotation.to_rotation_matrix();
                    let ro = map.rotation_offset(arm);
                    for i in 0..3 {
                        for j in 0..3 {
                            row[ro + 3 * i + j] = m[(i, j)];
                        }
                    }
                }
                row
            })
            .collect();
        Ok(Self {
            width: map.columns,
            rows,
        })
    }
}

pub fn parse_kinematics_str(text: &str, map: &ColumnMap, file: &str) -> Result<(Trajectory, Trajectory)> {
    KinematicsTable::parse(text, map.columns, file)?.trajectories(map, file)
}

/// Reads a kinematics file into left and right trajectories.
pub fn parse_kinematics(path: &Path, map: &ColumnMap) -> Result<(Trajectory, Trajectory)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kinematics_str(&text, map, &path.display().to_string())
}

pub fn write_kinematics(path: &Path, left: &Trajectory, right: &Trajectory, map: &ColumnMap) -> Result<()> {
    let table = KinematicsTable::from_trajectories(left, right, map)?;
    std::fs::write(path, table.to_text()).map_err(|e| Error::io(path, e))
}
