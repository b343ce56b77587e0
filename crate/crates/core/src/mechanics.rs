//! Static respiratory mechanics from a detected hold.
//!
//! Textbook hold formulas:
//!
//! * compliance `C = V_T / (P_plat - PEEP)` in L/cmH2O;
//! * resistance `R = (P_peak - P_plat) / flow_end_insp` in cmH2O/(L/s).
//!
//! Waveform flow is in L/min and is converted to L/s here.
//!
//! [`assess_hold`] reads its inputs from the waveform around a hold with fixed
//! heuristics: the peak pressure is the maximum, and the end-inspiratory flow
//! the last positive flow, within `pre_hold_window_s` before the hold. Tidal
//! volume is the rise of the integrated flow from its minimum over
//! `volume_window_s` before the hold. PEEP, unless given, is the median
//! pressure of expiratory (negative-flow) samples within `peep_window_s`.

use serde::{Deserialize, Serialize};

use crate::detection::{HoldSummary, SegmentRecord};
use crate::error::{Error, Result};
use crate::waveform::Waveform;

/// Seconds per minute, for L/min to L/s.
const SECONDS_PER_MINUTE: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicsInput {
    /// cmH2O
    pub plateau_pressure: f64,
    /// cmH2O
    pub peak_pressure: f64,
    /// cmH2O
    pub peep: f64,
    /// L
    pub tidal_volume: f64,
    /// L/s
    pub end_inspiratory_flow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicsEstimate {
    /// L/cmH2O
    pub compliance: f64,
    /// cmH2O/(L/s)
    pub resistance: f64,
}

/// Trapezoidal volume in litres over samples `[start, end)`.
pub fn integrate_volume(w: &Waveform, start: usize, end: usize) -> Result<f64> {
    if start >= end || end > w.len() {
        return Err(Error::InvalidRange {
            start,
            end,
            len: w.len(),
        });
    }
    let dt = w.period_s();
    let window = &w.samples()[start..end];
    Ok(window
        .windows(2)
        .map(|p| 0.5 * (p[0].flow + p[1].flow) / SECONDS_PER_MINUTE * dt)
        .sum())
}

fn finite(value: f64, name: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteInput(name))
    }
}

/// `V_T / (P_plat - PEEP)`.
pub fn estimate_compliance(input: &MechanicsInput) -> Result<f64> {
    let plateau = finite(input.plateau_pressure, "plateau_pressure")?;
    let peep = finite(input.peep, "peep")?;
    let volume = finite(input.tidal_volume, "tidal_volume")?;
    if plateau <= peep {
        return Err(Error::DegenerateDrivingPressure { plateau, peep });
    }
    if volume <= 0.0 {
        return Err(Error::DegenerateVolume(volume));
    }
    Ok(volume / (plateau - peep))
}

/// `(P_peak - P_plat) / flow`.
pub fn estimate_resistance(input: &MechanicsInput) -> Result<f64> {
    let peak = finite(input.peak_pressure, "peak_pressure")?;
    let plateau = finite(input.plateau_pressure, "plateau_pressure")?;
    let flow = finite(input.end_inspiratory_flow, "end_inspiratory_flow")?;
    if flow <= 0.0 {
        return Err(Error::DegenerateFlow(flow));
    }
    Ok((peak - plateau) / flow)
}

pub fn estimate_mechanics(input: &MechanicsInput) -> Result<MechanicsEstimate> {
    Ok(MechanicsEstimate {
        compliance: estimate_compliance(input)?,
        resistance: estimate_resistance(input)?,
    })
}

/// Windows used by [`assess_hold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessConfig {
    pub pre_hold_window_s: f64,
    pub volume_window_s: f64,
    pub peep_window_s: f64,
    /// Known PEEP in cmH2O; estimated from the waveform when `None`.
    pub peep_cmh2o: Option<f64>,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            pre_hold_window_s: 1.0,
            volume_window_s: 3.0,
            peep_window_s: 5.0,
            peep_cmh2o: None,
        }
    }
}

impl AssessConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pre_hold_window_s", self.pre_hold_window_s),
            ("volume_window_s", self.volume_window_s),
            ("peep_window_s", self.peep_window_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(p) = self.peep_cmh2o {
            finite(p, "peep")?;
        }
        Ok(())
    }
}

/// Everything read off the waveform for one hold, plus the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldAssessment {
    pub summary: HoldSummary,
    pub peak_pressure: Option<f64>,
    pub peep: Option<f64>,
    pub peep_estimated: bool,
    pub tidal_volume: Option<f64>,
    /// L/s
    pub end_inspiratory_flow: Option<f64>,
    pub compliance: Result<f64>,
    pub resistance: Result<f64>,
}

fn window_start(end: usize, seconds: f64, rate: f64) -> usize {
    end.saturating_sub((seconds * rate).round() as usize)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    })
}

/// Reads mechanics inputs around `summary` and applies both estimators.
pub fn assess_hold(w: &Waveform, summary: &HoldSummary, config: &AssessConfig) -> Result<HoldAssessment> {
    config.validate()?;
    let seg = &summary.segment;
    if seg.start_index >= seg.end_index || seg.end_index > w.len() {
        return Err(Error::IndexOutOfBounds {
            start: seg.start_index,
            end: seg.end_index,
            len: w.len(),
        });
    }
    let rate = w.sample_rate_hz();
    let start = seg.start_index;
    let samples = w.samples();

    let pre = &samples[window_start(start, config.pre_hold_window_s, rate)..start];
    let peak_pressure = pre.iter().map(|s| s.pressure).reduce(f64::max);
    let end_inspiratory_flow = pre
        .iter()
        .rev()
        .find(|s| s.flow > 0.0)
        .map(|s| s.flow / SECONDS_PER_MINUTE);

    let (peep, peep_estimated) = match config.peep_cmh2o {
        Some(p) => (Some(p), false),
        None => {
            let lo = window_start(start, config.peep_window_s, rate);
            let expiratory = samples[lo..start]
                .iter()
                .filter(|s| s.flow < 0.0)
                .map(|s| s.pressure)
                .collect();
            (median(expiratory), true)
        }
    };

    let tidal_volume = {
        let lo = window_start(start, config.volume_window_s, rate);
        let window = &samples[lo..=start];
        if window.len() < 2 {
            None
        } else {
            let dt = 1.0 / rate;
            let mut v = 0.0;
            let mut lowest = 0.0f64;
            for p in window.windows(2) {
                v += 0.5 * (p[0].flow + p[1].flow) / SECONDS_PER_MINUTE * dt;
                lowest = lowest.min(v);
            }
            Some(v - lowest)
        }
    };

    let missing = |what: &str| Error::InvalidConfig(format!("no {what} found before the hold"));
    let plateau = summary.mean_pressure;
    let compliance = match (tidal_volume, peep) {
        (Some(v), Some(p)) => estimate_compliance(&MechanicsInput {
            plateau_pressure: plateau,
            peak_pressure: peak_pressure.unwrap_or(plateau),
            peep: p,
            tidal_volume: v,
            end_inspiratory_flow: end_inspiratory_flow.unwrap_or(0.0),
        }),
        (None, _) => Err(missing("flow samples for the tidal volume")),
        (_, None) => Err(missing("expiratory samples for the PEEP estimate")),
    };
    let resistance = match (peak_pressure, end_inspiratory_flow) {
        (Some(peak), Some(flow)) => estimate_resistance(&MechanicsInput {
            plateau_pressure: plateau,
            peak_pressure: peak,
            peep: peep.unwrap_or(0.0),
            tidal_volume: tidal_volume.unwrap_or(0.0),
            end_inspiratory_flow: flow,
        }),
        (None, _) => Err(missing("samples for the peak pressure")),
        (_, None) => Err(missing("positive inspiratory flow")),
    };

    Ok(HoldAssessment {
        summary: *summary,
        peak_pressure,
        peep,
        peep_estimated,
        tidal_volume,
        end_inspiratory_flow,
        compliance,
        resistance,
    })
}

/// Label recorded in every report line naming the input heuristics.
pub const REPORT_METHOD: &str = "pre-hold-window heuristic";

/// One line of the per-hold mechanics report.
///
/// Estimates whose preconditions fail are omitted and replaced by an
/// `*_error` reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
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
    pub plateau_pressure_cmh2o: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_pressure_cmh2o: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peep_cmh2o: Option<f64>,
    pub peep_estimated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tidal_volume_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_inspiratory_flow_lps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance_l_per_cmh2o: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resistance_cmh2o_s_per_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resistance_error: Option<String>,
    pub method: String,
}

impl From<&HoldAssessment> for ReportRecord {
    fn from(a: &HoldAssessment) -> Self {
        let seg = SegmentRecord::from(&a.summary);
        let split = |r: &Result<f64>| match r {
            Ok(v) => (Some(*v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let (compliance, compliance_error) = split(&a.compliance);
        let (resistance, resistance_error) = split(&a.resistance);
        Self {
            start_s: seg.start_s,
            end_s: seg.end_s,
            start_index: seg.start_index,
            end_index: seg.end_index,
            peak_log_score: seg.peak_log_score,
            mean_log_score: seg.mean_log_score,
            mean_pressure: seg.mean_pressure,
            mean_flow: seg.mean_flow,
            plateau_pressure_cmh2o: a.summary.mean_pressure,
            peak_pressure_cmh2o: a.peak_pressure,
            peep_cmh2o: a.peep,
            peep_estimated: a.peep_estimated,
            tidal_volume_l: a.tidal_volume,
            end_inspiratory_flow_lps: a.end_inspiratory_flow,
            compliance_l_per_cmh2o: compliance,
            compliance_error,
            resistance_cmh2o_s_per_l: resistance,
            resistance_error,
            method: REPORT_METHOD.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{summarize_segment, HoldSegment};
    use crate::waveform::Sample;
    use proptest::prelude::*;

    fn flow_waveform(flows: &[f64], rate: f64) -> Waveform {
        let samples = flows
            .iter()
            .enumerate()
            .map(|(i, &f)| Sample::new(i as f64 / rate, f, 15.0))
            .collect();
        Waveform::new(samples, rate).unwrap()
    }

    #[test]
    fn volume_of_constant_flow() {
        let w = flow_waveform(&[60.0; 101], 100.0);
        assert!((integrate_volume(&w, 0, 101).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn volume_of_zero_flow() {
        let w = flow_waveform(&[0.0; 50], 100.0);
        assert_eq!(integrate_volume(&w, 0, 50).unwrap(), 0.0);
        assert_eq!(integrate_volume(&w, 10, 11).unwrap(), 0.0);
    }

    #[test]
    fn volume_of_linear_ramp_is_exact() {
        let ramp: Vec<f64> = (0..=100).map(|i| 60.0 * i as f64 / 100.0).collect();
        let w = flow_waveform(&ramp, 100.0);
        assert!((integrate_volume(&w, 0, 101).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn volume_rejects_bad_ranges() {
        let w = flow_waveform(&[0.0; 5], 100.0);
        assert_eq!(
            integrate_volume(&w, 3, 3),
            Err(Error::InvalidRange {
                start: 3,
                end: 3,
                len: 5
            })
        );
        assert!(integrate_volume(&w, 0, 6).is_err());
    }

    fn input(tidal: f64, plateau: f64, peep: f64, peak: f64, flow: f64) -> MechanicsInput {
        MechanicsInput {
            plateau_pressure: plateau,
            peak_pressure: peak,
            peep,
            tidal_volume: tidal,
            end_inspiratory_flow: flow,
        }
    }

    #[test]
    fn compliance_examples() {
        assert!((estimate_compliance(&input(0.5, 15.0, 5.0, 20.0, 0.5)).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(
            estimate_compliance(&input(0.5, 5.0, 5.0, 20.0, 0.5)),
            Err(Error::DegenerateDrivingPressure {
                plateau: 5.0,
                peep: 5.0
            })
        );
        assert_eq!(
            estimate_compliance(&input(0.0, 15.0, 5.0, 20.0, 0.5)),
            Err(Error::DegenerateVolume(0.0))
        );
    }

    #[test]
    fn resistance_examples() {
        assert!((estimate_resistance(&input(0.5, 15.0, 5.0, 20.0, 0.5)).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(estimate_resistance(&input(0.5, 15.0, 5.0, 15.0, 0.5)).unwrap(), 0.0);
        assert_eq!(
            estimate_resistance(&input(0.5, 15.0, 5.0, 20.0, 0.0)),
            Err(Error::DegenerateFlow(0.0))
        );
        assert!(estimate_resistance(&input(0.5, 15.0, 5.0, f64::NAN, 0.5)).is_err());
        let both = estimate_mechanics(&input(0.5, 15.0, 5.0, 20.0, 0.5)).unwrap();
        assert!((both.compliance - 0.05).abs() < 1e-15 && (both.resistance - 10.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn compliance_scales_and_shifts(v in 0.05f64..2.0, peep in 0.0f64..15.0, drive in 1.0f64..30.0, c in -20.0f64..20.0) {
            let base = estimate_compliance(&input(v, peep + drive, peep, 0.0, 1.0)).unwrap();
            let doubled = estimate_compliance(&input(2.0 * v, peep + drive, peep, 0.0, 1.0)).unwrap();
            prop_assert!((doubled - 2.0 * base).abs() <= 1e-12 * base);
            let shifted = estimate_compliance(&input(v, peep + drive + c, peep + c, 0.0, 1.0)).unwrap();
            prop_assert!((shifted - base).abs() <= 1e-9 * base);
        }

        #[test]
        fn resistance_ignores_common_offset(plat in 5.0f64..30.0, drop in 0.0f64..20.0, flow in 0.05f64..2.0, c in -20.0f64..20.0) {
            let base = estimate_resistance(&input(0.5, plat, 0.0, plat + drop, flow)).unwrap();
            let shifted = estimate_resistance(&input(0.5, plat + c, 0.0, plat + drop + c, flow)).unwrap();
            prop_assert!((shifted - base).abs() <= 1e-9 * base.max(1.0));
        }
    }

    fn hold_waveform() -> (Waveform, HoldSummary) {
        // 100 Hz: 1 s expiration at PEEP 5, 1 s inspiration at 30 L/min with
        // pressure ramping to 20, then a 1 s hold at 15.
        let mut samples = Vec::new();
        for i in 0..300 {
            let t = i as f64 / 100.0;
            let (flow, pressure) = match i {
                0..=99 => (-5.0, 5.0),
                100..=199 => (30.0, 15.0 + 5.0 * (i - 100) as f64 / 99.0),
                _ => (0.0, 15.0),
            };
            samples.push(Sample::new(t, flow, pressure));
        }
        let w = Waveform::new(samples, 100.0).unwrap();
        let seg = HoldSegment {
            start_index: 200,
            end_index: 300,
            start_s: 2.0,
            end_s: 3.0,
            peak_log_score: -1.66,
            mean_log_score: -1.66,
        };
        let summary = summarize_segment(&w, &seg).unwrap();
        (w, summary)
    }

    #[test]
    fn assess_reads_the_pre_hold_window() {
        let (w, summary) = hold_waveform();
        let a = assess_hold(&w, &summary, &AssessConfig::default()).unwrap();
        assert_eq!(a.peak_pressure, Some(20.0));
        assert_eq!(a.end_inspiratory_flow, Some(0.5));
        assert_eq!(a.peep, Some(5.0));
        assert!(a.peep_estimated);
        // Trapezoid: 100 intervals at 30 L/min minus the half-steps at both edges.
        let v = a.tidal_volume.unwrap();
        assert!((v - 0.5).abs() < 0.01, "{v}");
        assert!((a.compliance.clone().unwrap() - v / 10.0).abs() < 1e-12);
        assert!((a.resistance.clone().unwrap() - 10.0).abs() < 1e-12);

        let rec = ReportRecord::from(&a);
        assert_eq!(rec.compliance_error, None);
        assert_eq!(rec.method, REPORT_METHOD);
    }

    #[test]
    fn assess_reports_reasons_when_inputs_are_missing() {
        let (w, mut summary) = hold_waveform();
        summary.segment.start_index = 0;
        summary.segment.end_index = 50;
        let a = assess_hold(&w, &summary, &AssessConfig::default()).unwrap();
        assert!(a.compliance.is_err() && a.resistance.is_err());
        let rec = ReportRecord::from(&a);
        assert!(rec.compliance_l_per_cmh2o.is_none());
        assert!(rec.compliance_error.is_some() && rec.resistance_error.is_some());
        let json = serde_json::to_string(&rec).unwrap();
        assert!(!json.contains("compliance_l_per_cmh2o"));
        let back: ReportRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn given_peep_overrides_estimate() {
        let (w, summary) = hold_waveform();
        let cfg = AssessConfig {
            peep_cmh2o: Some(7.0),
            ..Default::default()
        };
        let a = assess_hold(&w, &summary, &cfg).unwrap();
        assert_eq!(a.peep, Some(7.0));
        assert!(!a.peep_estimated);
        let cfg = AssessConfig {
            peep_cmh2o: Some(15.0),
            ..Default::default()
        };
        assert!(matches!(
            assess_hold(&w, &summary, &cfg).unwrap().compliance,
            Err(Error::DegenerateDrivingPressure { .. })
        ));
    }
}
