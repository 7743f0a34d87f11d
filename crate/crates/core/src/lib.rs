//! Screw-axis motion invariants for surgical tool trajectories.
//!
//! The pipeline turns a pose sequence into finite screws, the screws into a
//! striction curve, and the curve into signed curvature and torsion per frame.
//! `features` and `metrics` support the gesture recognizer, and `synth`
//! produces motions with known invariants.

pub mod error;
pub mod features;
pub mod invariants;
pub mod metrics;
pub mod pose_io;
pub mod screw;
pub mod spline;
pub mod striction;
pub mod synth;

pub use error::{Error, Result};
