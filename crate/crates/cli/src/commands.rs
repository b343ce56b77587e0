//! Subcommand bodies as byte-in, byte-out functions.
//!
//! `pipeline` chains the same functions over in-memory buffers, so its output
//! is exactly what piping the individual subcommands produces.

use holdscan::{
    assess_hold, detect_holds, generate_mock_waveform, load_score_csv, load_waveform_csv, read_segments_ndjson,
    score_series, summarize_segment, write_score_csv, write_segments_ndjson, write_waveform_csv, AssessConfig,
    DetectionConfig, MockConfig, ModelParams, ReportRecord, SegmentRecord, Waveform,
};

use crate::error::CliError;

fn buffer_error(e: std::io::Error) -> CliError {
    CliError::Usage(format!("failed to serialize output: {e}"))
}

fn load_waveform(bytes: &[u8], rate_hz: Option<f64>) -> Result<Waveform, CliError> {
    load_waveform_csv(bytes, rate_hz).map_err(CliError::data("waveform"))
}

/// Waveform CSV and ground-truth NDJSON.
pub fn generate(config: &MockConfig) -> Result<(Vec<u8>, Vec<u8>), CliError> {
    let (waveform, truth) = generate_mock_waveform(config).map_err(CliError::invalid_setting)?;
    let mut csv = Vec::new();
    write_waveform_csv(&waveform, &mut csv).map_err(buffer_error)?;
    let mut ndjson = Vec::new();
    truth.write_ndjson(&mut ndjson).map_err(buffer_error)?;
    Ok((csv, ndjson))
}

/// Score CSV for a waveform CSV.
pub fn score(
    waveform_csv: &[u8],
    rate_hz: Option<f64>,
    params: &ModelParams,
    linear: bool,
) -> Result<Vec<u8>, CliError> {
    let waveform = load_waveform(waveform_csv, rate_hz)?;
    let trace = score_series(&waveform, params).map_err(CliError::data("scoring"))?;
    let mut out = Vec::new();
    write_score_csv(&trace, linear, &mut out).map_err(buffer_error)?;
    Ok(out)
}

/// Segment NDJSON for a score CSV and the waveform it came from.
pub fn detect(
    score_csv: &[u8],
    waveform_csv: &[u8],
    rate_hz: Option<f64>,
    config: &DetectionConfig,
) -> Result<Vec<u8>, CliError> {
    let trace = load_score_csv(score_csv, rate_hz).map_err(CliError::data("scores"))?;
    let waveform = load_waveform(waveform_csv, rate_hz)?;
    if trace.len() != waveform.len() {
        return Err(CliError::Data {
            context: "scores".into(),
            source: holdscan::Error::LengthMismatch(format!(
                "{} scores for a waveform of {} samples",
                trace.len(),
                waveform.len()
            )),
        });
    }
    let segments = detect_holds(&trace, config).map_err(CliError::data("detection"))?;
    let records = segments
        .iter()
        .map(|seg| summarize_segment(&waveform, seg).map(|s| SegmentRecord::from(&s)))
        .collect::<holdscan::Result<Vec<_>>>()
        .map_err(CliError::data("detection"))?;
    let mut out = Vec::new();
    write_segments_ndjson(&records, &mut out).map_err(buffer_error)?;
    Ok(out)
}

/// Report NDJSON for a waveform CSV and its segment NDJSON.
pub fn report(
    waveform_csv: &[u8],
    segments_ndjson: &[u8],
    rate_hz: Option<f64>,
    config: &AssessConfig,
) -> Result<Vec<u8>, CliError> {
    let waveform = load_waveform(waveform_csv, rate_hz)?;
    let segments = read_segments_ndjson(segments_ndjson).map_err(CliError::data("segments"))?;
    let mut records = Vec::with_capacity(segments.len());
    for rec in &segments {
        let summary = summarize_segment(&waveform, &rec.segment()).map_err(CliError::data("segments"))?;
        let assessment = assess_hold(&waveform, &summary, config).map_err(CliError::data("report"))?;
        records.push(ReportRecord::from(&assessment));
    }
    let mut out = Vec::new();
    holdscan::ndjson::write_lines(&records, &mut out).map_err(buffer_error)?;
    Ok(out)
}

pub struct PipelineOutput {
    pub waveform_csv: Vec<u8>,
    pub truth_ndjson: Vec<u8>,
    pub score_csv: Vec<u8>,
    pub segments_ndjson: Vec<u8>,
    pub report_ndjson: Vec<u8>,
}

pub fn pipeline(
    mock: &MockConfig,
    params: &ModelParams,
    detection: &DetectionConfig,
    assess: &AssessConfig,
) -> Result<PipelineOutput, CliError> {
    let (waveform_csv, truth_ndjson) = generate(mock)?;
    let score_csv = score(&waveform_csv, None, params, false)?;
    let segments_ndjson = detect(&score_csv, &waveform_csv, None, detection)?;
    let report_ndjson = report(&waveform_csv, &segments_ndjson, None, assess)?;
    Ok(PipelineOutput {
        waveform_csv,
        truth_ndjson,
        score_csv,
        segments_ndjson,
        report_ndjson,
    })
}
