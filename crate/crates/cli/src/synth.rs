//! Writes synthetic datasets in the formats the other commands read.

use std::path::Path;

use axode_core::features::write_vision_csv;
use axode_core::pose_io::{write_kinematics, write_transcript, ColumnMap};
use axode_core::synth::{gen_helix_trajectory, toy_benchmark, SequenceOptions};

use crate::error::{CliError, Result};
use crate::output::{create_dir, write};

/// Toy benchmark as a dataset directory; returns the trial names.
pub fn write_toy(out: &Path, seed: u64, opts: &SequenceOptions) -> Result<Vec<String>> {
    let trials = toy_benchmark(seed, opts)?;
    let map = ColumnMap::default();
    for sub in ["kinematics", "transcriptions", "vision"] {
        create_dir(&out.join(sub))?;
    }
    let mut roster = String::from("trial,user\n");
    for t in &trials {
        let s = &t.sequence;
        write_kinematics(&out.join("kinematics").join(format!("{}.txt", t.name)), &s.left, &s.right, &map)?;
        write_transcript(&out.join("transcriptions").join(format!("{}.txt", t.name)), &s.timeline)?;
        write_vision_csv(&out.join("vision").join(format!("{}.csv", t.name)), &s.vision)?;
        roster.push_str(&format!("{},{}\n", t.name, t.user));
    }
    write(&out.join("trials.csv"), roster)?;
    Ok(trials.into_iter().map(|t| t.name).collect())
}

/// Kinematics file whose two arms both trace the helix motion.
pub fn write_helix(out: &Path, a: f64, b: f64, n: usize, dtheta: f64) -> Result<(f64, f64)> {
    let h = gen_helix_trajectory(a, b, n, dtheta)?;
    let left = h.trajectory;
    let mut right = left.clone();
    right.arm = axode_core::pose_io::Arm::Right;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_kinematics(out, &left, &right, &ColumnMap::default()).map_err(CliError::from)?;
    Ok((h.kappa, h.tau))
}
