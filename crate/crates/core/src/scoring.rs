//! Model evidence for the inspiratory-hold hypothesis.
//!
//! Under the hold model, flow and pressure are independent white Gaussian
//! noise around fixed means, and samples are independent in time. The
//! per-sample score is the evidence ratio
//!
//! ```text
//!            q(t)                 q(t) = N(flow_t | mu_f, var_f) * N(pressure_t | mu_p, var_p)
//! f(t) = ----------    where
//!         1 - q(t)
//! ```
//!
//! Prior odds between "hold" and "no hold" are constant, so they only rescale
//! `f(t)` and never appear here. A thresholded decision is unaffected as long as
//! the threshold is rescaled by the same constant.
//!
//! `1 - q` is only a probability when `q < 1`, which holds whenever
//! `sqrt(var_f * var_p) >= 1 / (2 pi)`. Outside that regime `q` is clamped to
//! [`MAX_EVIDENCE`] so the score stays finite.
//!
//! Traces are kept in the log domain: a breathing sample at 60 L/min already
//! has `ln q` around -1800, far below the smallest positive `f64`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::format::format_decimal;
use crate::waveform::{check_timing, infer_rate, read_table, Waveform};

/// Upper clamp applied to the density product before forming `q / (1 - q)`.
pub const MAX_EVIDENCE: f64 = 1.0 - 1e-12;

/// Gaussian parameters of the hold model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// L/min
    pub mu_flow: f64,
    /// (L/min)^2
    pub var_flow: f64,
    /// cmH2O
    pub mu_pressure: f64,
    /// (cmH2O)^2
    pub var_pressure: f64,
}

impl Default for ModelParams {
    /// Inspiratory hold: zero flow at a 15 cmH2O plateau, unit variances.
    fn default() -> Self {
        Self {
            mu_flow: 0.0,
            var_flow: 1.0,
            mu_pressure: 15.0,
            var_pressure: 1.0,
        }
    }
}

impl ModelParams {
    pub fn inspiratory_hold() -> Self {
        Self::default()
    }

    /// Expiratory hold: zero flow with pressure resting at `peep_cmh2o`.
    pub fn expiratory_hold(peep_cmh2o: f64) -> Self {
        Self {
            mu_pressure: peep_cmh2o,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.mu_flow, self.var_flow, self.mu_pressure, self.var_pressure];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("model parameter"));
        }
        for var in [self.var_flow, self.var_pressure] {
            if var <= 0.0 {
                return Err(Error::NonPositiveVariance(var));
            }
        }
        Ok(())
    }

    /// True when the density product can never reach 1, i.e. the clamp is inert.
    pub fn is_self_consistent(&self) -> bool {
        (self.var_flow * self.var_pressure).sqrt() >= 1.0 / (2.0 * PI)
    }
}

fn check_density_args(x: f64, mean: f64, variance: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput("x"));
    }
    if !mean.is_finite() {
        return Err(Error::NonFiniteInput("mean"));
    }
    if !variance.is_finite() || variance <= 0.0 {
        return Err(Error::NonPositiveVariance(variance));
    }
    Ok(())
}

/// Normal density `N(x | mean, variance)`. Underflows to 0 far in the tails.
pub fn gaussian_pdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    check_density_args(x, mean, variance)?;
    let d = x - mean;
    Ok((-d * d / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt())
}

/// Natural log of [`gaussian_pdf`]; finite for every finite input.
pub fn log_gaussian_pdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    check_density_args(x, mean, variance)?;
    Ok(log_density_unchecked(x, mean, variance))
}

#[inline]
fn log_density_unchecked(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * PI * variance).ln() - d * d / (2.0 * variance)
}

/// Linear score `q / (1 - q)` for one sample.
pub fn score_sample(flow: f64, pressure: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let q = gaussian_pdf(flow, params.mu_flow, params.var_flow)?
        * gaussian_pdf(pressure, params.mu_pressure, params.var_pressure)?;
    let q = q.min(MAX_EVIDENCE);
    Ok(q / (1.0 - q))
}

/// `ln(q) - ln(1 - q)` for one sample, with the same clamp as [`score_sample`].
pub fn log_score_sample(flow: f64, pressure: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !flow.is_finite() {
        return Err(Error::NonFiniteInput("flow"));
    }
    if !pressure.is_finite() {
        return Err(Error::NonFiniteInput("pressure"));
    }
    Ok(log_score_unchecked(flow, pressure, params))
}

#[inline]
fn log_score_unchecked(flow: f64, pressure: f64, params: &ModelParams) -> f64 {
    let ln_q = log_density_unchecked(flow, params.mu_flow, params.var_flow)
        + log_density_unchecked(pressure, params.mu_pressure, params.var_pressure);
    let ln_q = ln_q.min(MAX_EVIDENCE.ln());
    // ln(1 - q) via ln_1p keeps full precision when q is tiny.
    ln_q - (-ln_q.exp()).ln_1p()
}

/// Per-sample log-scores aligned with a source waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTrace {
    times: Vec<f64>,
    log_scores: Vec<f64>,
    sample_rate_hz: f64,
}

impl ScoreTrace {
    /// Builds a trace from explicit timestamps; checks the same timing rules as
    /// a waveform and that no score is NaN or `+inf`.
    pub fn new(times: Vec<f64>, log_scores: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if times.len() != log_scores.len() {
            return Err(Error::LengthMismatch(format!(
                "{} timestamps for {} scores",
                times.len(),
                log_scores.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSampleRate(sample_rate_hz));
        }
        let expected = 1.0 / sample_rate_hz;
        for (row, (&t, &s)) in times.iter().zip(&log_scores).enumerate() {
            if !t.is_finite() {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("non-finite time {t}"),
                });
            }
            if s.is_nan() || s == f64::INFINITY {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("invalid log-score {s}"),
                });
            }
        }
        check_timing(&times, expected)?;
        Ok(Self {
            times,
            log_scores,
            sample_rate_hz,
        })
    }

    /// Uniform timeline starting at `start_s`. Convenient for synthetic traces.
    pub fn from_log_scores(start_s: f64, sample_rate_hz: f64, log_scores: Vec<f64>) -> Result<Self> {
        let times = (0..log_scores.len())
            .map(|i| start_s + i as f64 / sample_rate_hz)
            .collect();
        Self::new(times, log_scores, sample_rate_hz)
    }

    pub fn log_scores(&self) -> &[f64] {
        &self.log_scores
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.log_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_scores.is_empty()
    }

    /// `exp(ln f)`, underflowing to exactly 0.
    pub fn linear_scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_scores.iter().map(|s| s.exp())
    }

    /// A copy with `offset` added to every log-score, i.e. the score multiplied
    /// by `exp(offset)`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            times: self.times.clone(),
            log_scores: self.log_scores.iter().map(|s| s + offset).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Scores every sample of `w`.
pub fn score_series(w: &Waveform, params: &ModelParams) -> Result<ScoreTrace> {
    params.validate()?;
    let log_scores = w
        .samples()
        .iter()
        .map(|s| log_score_unchecked(s.flow, s.pressure, params))
        .collect();
    Ok(ScoreTrace {
        times: w.times().collect(),
        log_scores,
        sample_rate_hz: w.sample_rate_hz(),
    })
}

/// Log of the hold-model evidence over samples `[start, end)`: the sum of
/// both channels' log-densities.
pub fn window_log_evidence(w: &Waveform, start: usize, end: usize, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if start >= end || end > w.len() {
        return Err(Error::InvalidRange {
            start,
            end,
            len: w.len(),
        });
    }
    Ok(neumaier_sum(w.samples()[start..end].iter().map(|s| {
        log_density_unchecked(s.flow, params.mu_flow, params.var_flow)
            + log_density_unchecked(s.pressure, params.mu_pressure, params.var_pressure)
    })))
}

/// Compensated summation; the result is within a few ulps of the exact sum
/// regardless of length, so adjacent windows add up to their union.
fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Writes a trace as CSV `t,log_score`, adding a `score` column when `linear`.
pub fn write_score_csv<W: Write>(trace: &ScoreTrace, linear: bool, mut sink: W) -> std::io::Result<()> {
    if linear {
        writeln!(sink, "t,log_score,score")?;
    } else {
        writeln!(sink, "t,log_score")?;
    }
    for (&t, &s) in trace.times.iter().zip(&trace.log_scores) {
        write!(sink, "{},{}", format_decimal(t), format_decimal(s))?;
        if linear {
            write!(sink, ",{}", format_decimal(s.exp()))?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// Reads a trace written by [`write_score_csv`]. The optional `score` column
/// is ignored; the log-score is authoritative.
pub fn load_score_csv<R: Read>(source: R, expected_rate_hz: Option<f64>) -> Result<ScoreTrace> {
    let table = read_table(source, &[&["t", "log_score"], &["t", "log_score", "score"]])?;
    if table.rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let times: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let log_scores = table.rows.iter().map(|r| r[1]).collect();
    let rate = match expected_rate_hz {
        Some(rate) => rate,
        None => infer_rate(&times)?,
    };
    ScoreTrace::new(times, log_scores, rate)
}
