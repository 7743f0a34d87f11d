//! Kinematics and transcript parsing plus quaternion utilities.

mod kinematics;
mod quaternion;
mod transcript;
mod types;

pub use kinematics::{
    parse_kinematics, parse_kinematics_str, write_kinematics, ColumnMap, KinematicsTable,
    DEFAULT_SAMPLE_RATE_HZ,
};
pub use quaternion::{
    hemisphere_align, orthonormality_residual, quat_to_rotmat, rotmat_to_quat, Quaternion,
    ORTHONORMALITY_TOL,
};
pub use transcript::{parse_transcript, parse_transcript_str, transcript_to_string, write_transcript};
pub use types::{Arm, GestureId, GestureTimeline, Pose, Segment, Trajectory};
