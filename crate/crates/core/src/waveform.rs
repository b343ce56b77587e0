//! Ventilator recordings: uniformly sampled flow and pressure, optionally volume.
//!
//! Units throughout the crate: time in seconds, flow in L/min, pressure in
//! cmH2O, volume in L.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::format::format_decimal;

/// Relative tolerance on sample spacing against `1 / sample_rate_hz`.
pub const SPACING_TOLERANCE: f64 = 1e-6;

/// One time-aligned measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Seconds.
    pub t: f64,
    /// Airflow, L/min. Positive towards the patient.
    pub flow: f64,
    /// Airway pressure, cmH2O.
    pub pressure: f64,
    /// Inspired volume, L.
    pub volume: Option<f64>,
}

impl Sample {
    pub fn new(t: f64, flow: f64, pressure: f64) -> Self {
        Self {
            t,
            flow,
            pressure,
            volume: None,
        }
    }

    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self
    }
}

/// A validated, immutable, uniformly sampled recording.
///
/// Either every sample carries a volume or none does.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<Sample>,
    sample_rate_hz: f64,
}

impl Waveform {
    /// Builds a waveform, checking every invariant.
    pub fn new(samples: Vec<Sample>, sample_rate_hz: f64) -> Result<Self> {
        validate_samples(&samples, sample_rate_hz)?;
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Builds a waveform with the sample rate inferred from the median spacing.
    pub fn with_inferred_rate(samples: Vec<Sample>) -> Result<Self> {
        let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let rate = infer_rate(&times)?;
        Self::new(samples, rate)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false: a waveform holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_volume(&self) -> bool {
        self.samples.first().is_some_and(|s| s.volume.is_some())
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn flows(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.flow)
    }

    pub fn pressures(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.pressure)
    }

    /// Sample period in seconds.
    pub fn period_s(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}

/// Checks every [`Waveform`] invariant on an already-built waveform.
pub fn validate_waveform(w: &Waveform) -> Result<()> {
    validate_samples(&w.samples, w.sample_rate_hz)
}

fn validate_samples(samples: &[Sample], sample_rate_hz: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidSampleRate(sample_rate_hz));
    }

    let with_volume = samples[0].volume.is_some();
    for (row, s) in samples.iter().enumerate() {
        let fields = [("t", s.t), ("flow", s.flow), ("pressure", s.pressure)];
        for (name, value) in fields.into_iter().chain(s.volume.map(|v| ("volume", v))) {
            if !value.is_finite() {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("non-finite {name} value {value}"),
                });
            }
        }
        if s.volume.is_some() != with_volume {
            return Err(Error::MalformedRow {
                row,
                reason: "volume present on some samples but not others".into(),
            });
        }
    }

    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    check_timing(&times, 1.0 / sample_rate_hz)
}

/// Strictly increasing timestamps, then uniform spacing around `period`.
pub(crate) fn check_timing(times: &[f64], period: f64) -> Result<()> {
    for (i, pair) in times.windows(2).enumerate() {
        if pair[1].partial_cmp(&pair[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonMonotonicTime { index: i + 1 });
        }
    }
    for (i, pair) in times.windows(2).enumerate() {
        let spacing = pair[1] - pair[0];
        if ((spacing - period) / period).abs() > SPACING_TOLERANCE {
            return Err(Error::NonUniformSampling {
                index: i + 1,
                spacing,
                expected: period,
            });
        }
    }
    Ok(())
}

/// Sample rate implied by the median timestamp spacing.
///
/// A single timestamp carries no spacing information; callers must supply a
/// rate in that case.
pub(crate) fn infer_rate(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut spacings = Vec::with_capacity(times.len().saturating_sub(1));
    for (i, pair) in times.windows(2).enumerate() {
        let dt = pair[1] - pair[0];
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::NonMonotonicTime { index: i + 1 });
        }
        spacings.push(dt);
    }
    if spacings.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot infer the sample rate from a single sample; pass an expected rate".into(),
        ));
    }
    spacings.sort_by(f64::total_cmp);
    let mid = spacings.len() / 2;
    let median = if spacings.len() % 2 == 0 {
        0.5 * (spacings[mid - 1] + spacings[mid])
    } else {
        spacings[mid]
    };
    Ok(1.0 / median)
}

/// Reads a waveform from CSV with header `t,flow,pressure[,volume]`.
///
/// Lines starting with `#` are ignored; LF and CRLF endings are accepted.
/// When `expected_rate_hz` is `None` the rate is inferred from the median
/// spacing of the timestamps.
pub fn load_waveform_csv<R: Read>(source: R, expected_rate_hz: Option<f64>) -> Result<Waveform> {
    let table = read_table(
        source,
        &[&["t", "flow", "pressure"], &["t", "flow", "pressure", "volume"]],
    )?;
    let with_volume = table.columns == 4;

    let samples: Vec<Sample> = table
        .rows
        .iter()
        .map(|r| Sample {
            t: r[0],
            flow: r[1],
            pressure: r[2],
            volume: with_volume.then(|| r[3]),
        })
        .collect();

    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    match expected_rate_hz {
        Some(rate) => Waveform::new(samples, rate),
        None => Waveform::with_inferred_rate(samples),
    }
}

/// Writes `w` as CSV. The volume column is emitted only when present.
pub fn write_waveform_csv<W: Write>(w: &Waveform, mut sink: W) -> std::io::Result<()> {
    if w.has_volume() {
        writeln!(sink, "t,flow,pressure,volume")?;
    } else {
        writeln!(sink, "t,flow,pressure")?;
    }
    for s in w.samples() {
        write!(
            sink,
            "{},{},{}",
            format_decimal(s.t),
            format_decimal(s.flow),
            format_decimal(s.pressure)
        )?;
        if let Some(v) = s.volume {
            write!(sink, ",{}", format_decimal(v))?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

pub(crate) struct Table {
    pub columns: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Parses a numeric CSV table whose header must equal one of `headers`.
pub(crate) fn read_table<R: Read>(source: R, headers: &[&[&str]]) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::EmptyInput),
        Some(rec) => rec.map_err(|e| csv_error(0, e))?,
    };
    let names: Vec<&str> = header.iter().collect();
    let columns = headers
        .iter()
        .find(|h| h.iter().copied().eq(names.iter().copied()))
        .map(|h| h.len())
        .ok_or_else(|| Error::MalformedRow {
            row: 0,
            reason: format!(
                "unexpected header `{}`, expected `{}`",
                names.join(","),
                headers.iter().map(|h| h.join(",")).collect::<Vec<_>>().join("` or `")
            ),
        })?;

    let mut rows = Vec::new();
    for (row, rec) in records.enumerate() {
        let rec = rec.map_err(|e| csv_error(row, e))?;
        if rec.len() != columns {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected {columns} fields, found {}", rec.len()),
            });
        }
        let values = rec
            .iter()
            .map(|field| {
                parse_field(field).ok_or_else(|| Error::MalformedRow {
                    row,
                    reason: format!("non-numeric field `{field}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(Table { columns, rows })
}

fn parse_field(field: &str) -> Option<f64> {
    // Rust's float parser also accepts "infinity"/"nan" spellings; the
    // finiteness check in validation decides whether they are allowed.
    field.parse::<f64>().ok()
}

fn csv_error(row: usize, e: csv::Error) -> Error {
    Error::MalformedRow {
        row,
        reason: e.to_string(),
    }
}
