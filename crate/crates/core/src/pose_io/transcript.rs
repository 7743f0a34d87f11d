//! Gesture transcripts: one `start end label` line per segment, 0-based
//! inclusive frame ranges.

use std::path::Path;

use super::types::{GestureId, GestureTimeline};
use crate::error::{Error, Result};

pub fn parse_transcript_str(text: &str, total_frames: usize, file: &str) -> Result<GestureTimeline> {
    let mut labels = vec![GestureId::UNLABELED; total_frames];
    let mut prev_end: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let [start, end, label] = toks[..] else {
            return Err(Error::parse(file, i + 1, "expected `start end label`"));
        };
        let frame = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| Error::parse(file, i + 1, format!("bad frame index {tok:?}")))
        };
        let (start, end) = (frame(start)?, frame(end)?);
        let gesture: GestureId = label.parse().map_err(|m: String| Error::parse(file, i + 1, m))?;
        if end < start {
            return Err(Error::parse(file, i + 1, format!("end {end} before start {start}")));
        }
        if let Some(p) = prev_end {
            if start <= p {
                return Err(Error::parse(
                    file,
                    i + 1,
                    format!("segment starting at {start} overlaps previous segment ending at {p}"),
                ));
            }
        }
        if end >= total_frames {
            return Err(Error::parse(
                file,
                i + 1,
                format!("segment end {end} beyond last frame {}", total_frames.saturating_sub(1)),
            ));
        }
        labels[start..=end].fill(gesture);
        prev_end = Some(end);
    }
    Ok(GestureTimeline::from_labels(labels))
}

pub fn parse_transcript(path: &Path, total_frames: usize) -> Result<GestureTimeline> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_transcript_str(&text, total_frames, &path.display().to_string())
}

/// Labeled segments only; unlabeled gaps are implied.
pub fn transcript_to_string(timeline: &GestureTimeline) -> String {
    timeline
        .segments()
        .iter()
        .filter(|s| s.gesture.is_labeled())
        .map(|s| format!("{} {} {}\n", s.start, s.end, s.gesture))
        .collect()
}

pub fn write_transcript(path: &Path, timeline: &GestureTimeline) -> Result<()> {
    std::fs::write(path, transcript_to_string(timeline)).map_err(|e| Error::io(path, e))
}
