//! Dataset directory layout:
//!
//! ```text
//! kinematics/<trial>.txt       76-column pose rows
//! transcriptions/<trial>.txt   `start end label` lines
//! vision/<trial>.csv|.bin      optional precomputed features
//! trials.csv                   optional `trial,user` roster
//! ```
//!
//! Without a roster the user is the letter block of the trial suffix, e.g.
//! `B` for `Suturing_B001`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use axode_core::features::{load_vision_features, vision_series, FeatureSeries};
use axode_core::pose_io::{parse_kinematics, parse_transcript, ColumnMap};
use axode_core::synth::synthetic_vision;
use axode_recognizer::dataset::PreparedTrial;

use crate::error::{CliError, Result};
use crate::output::read_to_string;

pub struct VisionSource {
    pub synthetic: bool,
    pub dim: usize,
    pub seed: u64,
}

pub fn user_from_name(name: &str) -> Option<String> {
    let suffix = name.rsplit('_').next()?;
    let user: String = suffix.chars().take_while(|c| !c.is_ascii_digit()).collect();
    (!user.is_empty()).then_some(user)
}

fn list_trials(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn read_roster(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read_to_string(path)?;
    let mut roster = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line == "trial,user") {
            continue;
        }
        let (trial, user) = line
            .split_once(',')
            .ok_or_else(|| CliError::validation(format!("{}:{}: expected `trial,user`", path.display(), i + 1)))?;
        roster.insert(trial.trim().to_string(), user.trim().to_string());
    }
    Ok(roster)
}

fn vision_for(dir: &Path, name: &str, frames: usize, index: usize, src: &VisionSource) -> Result<FeatureSeries> {
    for ext in ["csv", "bin"] {
        let path = dir.join("vision").join(format!("{name}.{ext}"));
        if path.exists() && !src.synthetic {
            return Ok(load_vision_features(&path, frames)?);
        }
    }
    if src.synthetic {
        let seed = src.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64);
        return Ok(vision_series(synthetic_vision(frames, src.dim, seed)));
    }
    Err(CliError::validation(format!(
        "no vision features for {name} under {}; pass --synthetic-vision to generate them",
        dir.join("vision").display()
    )))
}

/// Loads every trial that has both kinematics and a transcript.
pub fn load_dataset(dir: &Path, map: &ColumnMap, vision: &VisionSource) -> Result<Vec<PreparedTrial>> {
    let kin_dir = dir.join("kinematics");
    let roster_path = dir.join("trials.csv");
    let roster = if roster_path.exists() { Some(read_roster(&roster_path)?) } else { None };
    let mut trials = Vec::new();
    for (index, (name, kin_path)) in list_trials(&kin_dir)?.into_iter().enumerate() {
        let transcript = dir.join("transcriptions").join(format!("{name}.txt"));
        if !transcript.exists() {
            log::warn!("{name}: no transcript, skipped");
            continue;
        }
        let user = match &roster {
            Some(r) => r.get(&name).cloned(),
            None => user_from_name(&name),
        }
        .ok_or_else(|| CliError::validation(format!("cannot tell the user of trial {name}")))?;
        let (left, right) = parse_kinematics(&kin_path, map)?;
        let timeline = parse_transcript(&transcript, left.len())?;
        let vis = vision_for(dir, &name, left.len(), index, vision)?;
        trials.push(PreparedTrial::new(name, user, left, right, timeline, vis)?);
    }
    if trials.is_empty() {
        return Err(CliError::validation(format!("no trials found under {}", kin_dir.display())));
    }
    Ok(trials)
}
