//! Hold segmentation from a log-score trace.
//!
//! A two-threshold scan opens a segment when the log-score reaches
//! `log_threshold_on` and closes it at the first sample below
//! `log_threshold_off`. Segments separated by less than `merge_gap_s` are then
//! joined, and anything shorter than `min_duration_s` is dropped.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoreTrace;
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// A segment opens at `ln f >= log_threshold_on`.
    pub log_threshold_on: f64,
    /// An open segment closes at `ln f < log_threshold_off`.
    pub log_threshold_off: f64,
    /// Seconds.
    pub min_duration_s: f64,
    /// Seconds.
    pub merge_gap_s: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            log_threshold_on: -10.0,
            log_threshold_off: -14.0,
            min_duration_s: 0.3,
            merge_gap_s: 0.1,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.log_threshold_on,
            self.log_threshold_off,
            self.min_duration_s,
            self.merge_gap_s,
        ];
        if all.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidConfig("detection parameters must not be NaN".into()));
        }
        if self.log_threshold_off > self.log_threshold_on {
            return Err(Error::InvalidConfig(format!(
                "log_threshold_off ({}) exceeds log_threshold_on ({})",
                self.log_threshold_off, self.log_threshold_on
            )));
        }
        if self.min_duration_s < 0.0 || self.merge_gap_s < 0.0 {
            return Err(Error::InvalidConfig(
                "min_duration_s and merge_gap_s must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// The same config with both thresholds moved by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            log_threshold_on: self.log_threshold_on + offset,
            log_threshold_off: self.log_threshold_off + offset,
            ..*self
        }
    }
}

/// A detected hold, `[start_index, end_index)` in sample indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldSegment {
    pub start_index: usize,
    pub end_index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub peak_log_score: f64,
    pub mean_log_score: f64,
}

impl HoldSegment {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index
    }

    pub fn is_empty(&self) -> bool {
        self.start_index >= self.end_index
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn contains(&self, other: &HoldSegment) -> bool {
        self.start_index <= other.start_index && other.end_index <= self.end_index
    }
}

/// Channel statistics over a detected hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldSummary {
    pub segment: HoldSegment,
    /// Plateau pressure estimate, cmH2O.
    pub mean_pressure: f64,
    /// L/min
    pub mean_flow: f64,
    /// L/min
    pub mean_abs_flow: f64,
}

/// Runs hysteresis thresholding, gap merging and duration filtering.
///
/// The output is sorted by `start_index` and pairwise disjoint.
pub fn detect_holds(trace: &ScoreTrace, config: &DetectionConfig) -> Result<Vec<HoldSegment>> {
    config.validate()?;
    let scores = trace.log_scores();
    let rate = trace.sample_rate_hz();

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match open {
            None if s >= config.log_threshold_on => open = Some(i),
            Some(start) if s < config.log_threshold_off => {
                runs.push((start, i));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        runs.push((start, scores.len()));
    }

    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for (start, end) in runs {
        match merged.last_mut() {
            Some(last) if ((start - last.1) as f64 / rate) < config.merge_gap_s => last.1 = end,
            _ => merged.push((start, end)),
        }
    }

    Ok(merged
        .into_iter()
        .filter(|&(start, end)| (end - start) as f64 / rate >= config.min_duration_s)
        .map(|(start, end)| make_segment(trace, start, end))
        .collect())
}

fn make_segment(trace: &ScoreTrace, start: usize, end: usize) -> HoldSegment {
    let window = &trace.log_scores()[start..end];
    let peak = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let times = trace.times();
    // The exclusive end is the next sample's timestamp, or one period past the last.
    let end_s = match times.get(end) {
        Some(&t) => t,
        None => times[end - 1] + 1.0 / trace.sample_rate_hz(),
    };
    HoldSegment {
        start_index: start,
        end_index: end,
        start_s: times[start],
        end_s,
        peak_log_score: peak,
        mean_log_score: mean,
    }
}

/// Channel means over the segment's samples.
pub fn summarize_segment(w: &Waveform, seg: &HoldSegment) -> Result<HoldSummary> {
    if seg.start_index >= seg.end_index || seg.end_index > w.len() {
        return Err(Error::IndexOutOfBounds {
            start: seg.start_index,
            end: seg.end_index,
            len: w.len(),
        });
    }
    let window = &w.samples()[seg.start_index..seg.end_index];
    let n = window.len() as f64;
    let (mut p, mut f, mut af) = (0.0, 0.0, 0.0);
    for s in window {
        p += s.pressure;
        f += s.flow;
        af += s.flow.abs();
    }
    Ok(HoldSummary {
        segment: *seg,
        mean_pressure: p / n,
        mean_flow: f / n,
        mean_abs_flow: af / n,
    })
}

/// One line of the segment NDJSON stream.
///
/// Non-finite log-scores are written as `null` and read back as `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    pub start_s: f64,
    pub end_s: f64,
    pub start_index: usize,
    pub end_index: usize,
    #[serde(with = "crate::ndjson::neg_inf_as_null")]
    pub peak_log_score: f64,
    #[serde(with = "crate::ndjson::neg_inf_as_null")]
    pub mean_log_score: f64,
    pub mean_pressure: f64,
    pub mean_flow: f64,
}

impl From<&HoldSummary> for SegmentRecord {
    fn from(h: &HoldSummary) -> Self {
        Self {
            start_s: h.segment.start_s,
            end_s: h.segment.end_s,
            start_index: h.segment.start_index,
            end_index: h.segment.end_index,
            peak_log_score: h.segment.peak_log_score,
            mean_log_score: h.segment.mean_log_score,
            mean_pressure: h.mean_pressure,
            mean_flow: h.mean_flow,
        }
    }
}

impl SegmentRecord {
    pub fn segment(&self) -> HoldSegment {
        HoldSegment {
            start_index: self.start_index,
            end_index: self.end_index,
            start_s: self.start_s,
            end_s: self.end_s,
            peak_log_score: self.peak_log_score,
            mean_log_score: self.mean_log_score,
        }
    }
}

pub fn write_segments_ndjson<W: Write>(records: &[SegmentRecord], sink: W) -> std::io::Result<()> {
    crate::ndjson::write_lines(records, sink)
}

pub fn read_segments_ndjson<R: BufRead>(source: R) -> Result<Vec<SegmentRecord>> {
    crate::ndjson::read_lines(source)
}
