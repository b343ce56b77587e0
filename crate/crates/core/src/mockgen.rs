//! Seeded synthetic ventilator waveforms with annotated inspiratory holds.
//!
//! Each breath has a pressure-control shape. Let `T = 60 / respiratory_rate_bpm`
//! be the period, `Ti = T * r / (1 + r)` the inspiratory time for I:E ratio
//! `r`, and `Te = T - Ti`. At phase `s` into the breath:
//!
//! * inspiration (`s < Ti`): flow `= peak_flow * exp(-s / (Ti / 1.5))`,
//!   pressure rises from PEEP towards the peak with time constant `Ti / 20`;
//! * expiration: flow is negative, decaying with time constant `Te / 4`, and
//!   its amplitude returns exactly the inspired volume; pressure relaxes back
//!   to PEEP with time constant `Ti / 20`.
//!
//! Inside a configured hold, flow is 0 and pressure is the plateau. The breath
//! clock keeps running underneath, so breathing resumes in phase afterwards.
//! White Gaussian noise is then added to both channels. Per sample, one
//! Box-Muller pair is drawn from [`SplitMix64`]: the cosine branch perturbs
//! flow and the sine branch perturbs pressure. The volume channel is the
//! cumulative trapezoidal integral of the noisy flow.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::waveform::{Sample, Waveform};

/// An injected hold, `(start_s, duration_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldSpec {
    pub start_s: f64,
    pub duration_s: f64,
}

impl HoldSpec {
    pub fn new(start_s: f64, duration_s: f64) -> Self {
        Self { start_s, duration_s }
    }

    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t < self.end_s()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockConfig {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub respiratory_rate_bpm: f64,
    /// Inspiratory over expiratory time; 0.5 means 1:2.
    pub i_to_e_ratio: f64,
    /// L/min
    pub peak_flow_lpm: f64,
    pub peep_cmh2o: f64,
    pub plateau_cmh2o: f64,
    pub peak_pressure_cmh2o: f64,
    /// L/min
    pub noise_sd_flow: f64,
    /// cmH2O
    pub noise_sd_pressure: f64,
    pub holds: Vec<HoldSpec>,
    pub rng_seed: u64,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            duration_s: 90.0,
            sample_rate_hz: 100.0,
            respiratory_rate_bpm: 15.0,
            i_to_e_ratio: 0.5,
            peak_flow_lpm: 60.0,
            peep_cmh2o: 5.0,
            plateau_cmh2o: 15.0,
            peak_pressure_cmh2o: 20.0,
            noise_sd_flow: 1.0,
            noise_sd_pressure: 1.0,
            holds: vec![HoldSpec::new(45.0, 2.0)],
            rng_seed: 0,
        }
    }
}

impl MockConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("duration_s", self.duration_s),
            ("sample_rate_hz", self.sample_rate_hz),
            ("respiratory_rate_bpm", self.respiratory_rate_bpm),
            ("i_to_e_ratio", self.i_to_e_ratio),
            ("peak_flow_lpm", self.peak_flow_lpm),
            ("plateau_cmh2o", self.plateau_cmh2o),
            ("peak_pressure_cmh2o", self.peak_pressure_cmh2o),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("peep_cmh2o", self.peep_cmh2o),
            ("noise_sd_flow", self.noise_sd_flow),
            ("noise_sd_pressure", self.noise_sd_pressure),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.sample_count() == 0 {
            return bad("duration_s * sample_rate_hz rounds to zero samples".into());
        }
        for h in &self.holds {
            if !(h.start_s.is_finite() && h.duration_s.is_finite() && h.duration_s > 0.0) {
                return bad(format!(
                    "hold ({}, {}) needs a finite start and positive duration",
                    h.start_s, h.duration_s
                ));
            }
            if h.start_s < 0.0 || h.end_s() > self.duration_s {
                return bad(format!(
                    "hold [{}, {}) lies outside [0, {}]",
                    h.start_s,
                    h.end_s(),
                    self.duration_s
                ));
            }
        }
        for (i, a) in self.holds.iter().enumerate() {
            for b in &self.holds[i + 1..] {
                if a.start_s < b.end_s() && b.start_s < a.end_s() {
                    return bad(format!(
                        "holds [{}, {}) and [{}, {}) overlap",
                        a.start_s,
                        a.end_s(),
                        b.start_s,
                        b.end_s()
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Annotated hold intervals `(start_s, end_s)`, in configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub hold_segments: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthRecord {
    pub start_s: f64,
    pub end_s: f64,
}

impl GroundTruth {
    pub fn records(&self) -> Vec<GroundTruthRecord> {
        self.hold_segments
            .iter()
            .map(|&(start_s, end_s)| GroundTruthRecord { start_s, end_s })
            .collect()
    }

    pub fn write_ndjson<W: Write>(&self, sink: W) -> std::io::Result<()> {
        crate::ndjson::write_lines(&self.records(), sink)
    }

    pub fn read_ndjson<R: BufRead>(source: R) -> Result<Self> {
        let records: Vec<GroundTruthRecord> = crate::ndjson::read_lines(source)?;
        Ok(Self {
            hold_segments: records.into_iter().map(|r| (r.start_s, r.end_s)).collect(),
        })
    }
}

/// Noise-free breath pattern at phase `s` seconds into a breath.
#[derive(Debug, Clone, Copy)]
struct BreathShape {
    period: f64,
    t_insp: f64,
    tau_insp_flow: f64,
    tau_exp_flow: f64,
    tau_pressure: f64,
    peak_flow: f64,
    peak_exp_flow: f64,
    peep: f64,
    peak_pressure: f64,
    end_insp_pressure: f64,
}

impl BreathShape {
    fn new(c: &MockConfig) -> Self {
        let period = 60.0 / c.respiratory_rate_bpm;
        let t_insp = period * c.i_to_e_ratio / (1.0 + c.i_to_e_ratio);
        let t_exp = period - t_insp;
        let tau_insp_flow = t_insp / 1.5;
        let tau_exp_flow = t_exp / 4.0;
        let tau_pressure = t_insp / 20.0;
        let inspired = c.peak_flow_lpm * tau_insp_flow * (1.0 - (-t_insp / tau_insp_flow).exp());
        let peak_exp_flow = inspired / (tau_exp_flow * (1.0 - (-t_exp / tau_exp_flow).exp()));
        let rise = |s: f64| c.peep_cmh2o + (c.peak_pressure_cmh2o - c.peep_cmh2o) * (1.0 - (-s / tau_pressure).exp());
        Self {
            period,
            t_insp,
            tau_insp_flow,
            tau_exp_flow,
            tau_pressure,
            peak_flow: c.peak_flow_lpm,
            peak_exp_flow,
            peep: c.peep_cmh2o,
            peak_pressure: c.peak_pressure_cmh2o,
            end_insp_pressure: rise(t_insp),
        }
    }

    /// (flow L/min, pressure cmH2O) at absolute time `t`.
    fn at(&self, t: f64) -> (f64, f64) {
        let phase = t.rem_euclid(self.period);
        if phase < self.t_insp {
            let flow = self.peak_flow * (-phase / self.tau_insp_flow).exp();
            let pressure = self.peep + (self.peak_pressure - self.peep) * (1.0 - (-phase / self.tau_pressure).exp());
            (flow, pressure)
        } else {
            let s = phase - self.t_insp;
            let flow = -self.peak_exp_flow * (-s / self.tau_exp_flow).exp();
            let pressure = self.peep + (self.end_insp_pressure - self.peep) * (-s / self.tau_pressure).exp();
            (flow, pressure)
        }
    }
}

/// Generates a waveform and its ground truth. Deterministic in `config`.
pub fn generate_mock_waveform(config: &MockConfig) -> Result<(Waveform, GroundTruth)> {
    config.validate()?;
    let shape = BreathShape::new(config);
    let rate = config.sample_rate_hz;
    let dt = 1.0 / rate;
    let mut rng = SplitMix64::new(config.rng_seed);

    let n = config.sample_count();
    let mut samples = Vec::with_capacity(n);
    let mut volume = 0.0;
    let mut prev_flow: Option<f64> = None;
    for i in 0..n {
        let t = i as f64 / rate;
        let (mut flow, mut pressure) = if config.holds.iter().any(|h| h.contains(t)) {
            (0.0, config.plateau_cmh2o)
        } else {
            shape.at(t)
        };
        let (z_flow, z_pressure) = rng.next_normal_pair();
        flow += config.noise_sd_flow * z_flow;
        pressure += config.noise_sd_pressure * z_pressure;

        if let Some(prev) = prev_flow {
            volume += 0.5 * (prev + flow) / 60.0 * dt;
        }
        prev_flow = Some(flow);
        samples.push(Sample::new(t, flow, pressure).with_volume(volume));
    }

    let truth = GroundTruth {
        hold_segments: config.holds.iter().map(|h| (h.start_s, h.end_s())).collect(),
    };
    Ok((Waveform::new(samples, rate)?, truth))
}
