use std::path::Path;

use axode_core::invariants::{extract_invariants, invariants_csv, ArmInvariants, PipelineOptions};
use axode_core::pose_io::{parse_kinematics, Arm, ColumnMap};
use axode_core::screw::screws_csv;

use crate::error::Result;
use crate::output::{create_dir, write};

/// Per-arm invariants plus debug dumps for one kinematics file.
pub fn run(kinematics: &Path, map: &ColumnMap, samples: Option<usize>, out: &Path) -> Result<[ArmInvariants; 2]> {
    let (left, right) = parse_kinematics(kinematics, map)?;
    let opts = PipelineOptions { samples };
    let arms = [extract_invariants(&left, &opts)?, extract_invariants(&right, &opts)?];
    create_dir(out)?;
    for (arm, inv) in Arm::BOTH.iter().zip(&arms) {
        let name = arm.name();
        write(&out.join(format!("{name}_invariants.csv")), inv.series.per_frame_csv())?;
        write(&out.join(format!("{name}_screws.csv")), screws_csv(&inv.screws))?;
        let striction = inv.curve.as_ref().map_or_else(|| "k,s,x,y,z,time_anchor\n".to_string(), |c| c.to_csv());
        write(&out.join(format!("{name}_striction.csv")), striction)?;
        if inv.series.degenerate {
            log::warn!("{name} arm: no usable striction curve, invariants set to zero");
        }
    }
    write(&out.join("invariants.csv"), invariants_csv(&arms[0].series, &arms[1].series))?;
    Ok(arms)
}
