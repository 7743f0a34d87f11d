//! Conversion from pipeline outputs to recognizer inputs.

use axode_core::features::FeatureSeries;
use axode_core::pose_io::{GestureId, GestureTimeline};

use crate::error::{Error, Result};
use crate::model::TrialInput;
use crate::tensor::Mat;
use crate::train::TrialData;

/// Sorted labeled gesture ids over all timelines.
pub fn vocabulary<'a>(timelines: impl IntoIterator<Item = &'a GestureTimeline>) -> Vec<u32> {
    let mut ids: Vec<u32> = timelines.into_iter().flat_map(|t| t.gestures()).map(|g| g.0).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Frames whose gesture is unlabeled or outside `classes` are masked out.
pub fn trial_data(
    name: &str,
    vision: &FeatureSeries,
    left: &FeatureSeries,
    right: &FeatureSeries,
    timeline: &GestureTimeline,
    classes: &[u32],
) -> Result<TrialData> {
    let t = timeline.len();
    if vision.len() != t || left.len() != t || right.len() != t {
        return Err(Error::validation(format!(
            "{name}: {t} labels but vision/left/right have {}/{}/{} frames",
            vision.len(),
            left.len(),
            right.len()
        )));
    }
    let (labels, mut mask): (Vec<usize>, Vec<bool>) = timeline
        .labels()
        .iter()
        .map(|g| match classes.iter().position(|&c| GestureId(c) == *g) {
            Some(i) => (i, true),
            None => (0, false),
        })
        .unzip();
    for (i, m) in mask.iter_mut().enumerate() {
        *m &= vision.mask[i] && left.mask[i] && right.mask[i];
    }
    Ok(TrialData {
        name: name.to_string(),
        input: TrialInput {
            vision: Mat::from_rows(&vision.frames),
            left: Mat::from_rows(&left.frames),
            right: Mat::from_rows(&right.frames),
        },
        labels,
        mask,
    })
}

/// Class indices back to a timeline.
pub fn to_timeline(pred: &[usize], classes: &[u32]) -> GestureTimeline {
    GestureTimeline::from_labels(pred.iter().map(|&c| GestureId(classes[c])).collect())
}
