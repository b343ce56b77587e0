//! Detection of inspiratory-hold manoeuvres in mechanical-ventilator
//! flow/pressure waveforms.
//!
//! During a hold the flow to the patient is near zero and the airway pressure
//! sits on a plateau. Each sample is scored by how well it fits that picture
//! (see [`scoring`]), the score trace is segmented into holds
//! ([`detection`]), and each hold yields compliance and resistance estimates
//! ([`mechanics`]). [`mockgen`] produces seeded synthetic recordings with
//! ground truth for validation.
//!
//! ```
//! use holdscan::{detect_holds, generate_mock_waveform, score_series};
//! use holdscan::{DetectionConfig, MockConfig, ModelParams};
//!
//! let (waveform, truth) = generate_mock_waveform(&MockConfig::with_seed(7)).unwrap();
//! let trace = score_series(&waveform, &ModelParams::default()).unwrap();
//! let holds = detect_holds(&trace, &DetectionConfig::default()).unwrap();
//! assert_eq!(holds.len(), truth.hold_segments.len());
//! ```

pub mod detection;
pub mod error;
pub mod format;
pub mod mechanics;
pub mod mockgen;
pub mod ndjson;
pub mod rng;
pub mod scoring;
pub mod waveform;

pub use detection::{
    detect_holds, read_segments_ndjson, summarize_segment, write_segments_ndjson, DetectionConfig, HoldSegment,
    HoldSummary, SegmentRecord,
};
pub use error::{Error, Result};
pub use mechanics::{
    assess_hold, estimate_compliance, estimate_mechanics, estimate_resistance, integrate_volume, AssessConfig,
    HoldAssessment, MechanicsEstimate, MechanicsInput, ReportRecord,
};
pub use mockgen::{generate_mock_waveform, GroundTruth, GroundTruthRecord, HoldSpec, MockConfig};
pub use scoring::{
    gaussian_pdf, load_score_csv, log_gaussian_pdf, log_score_sample, score_sample, score_series, window_log_evidence,
    write_score_csv, ModelParams, ScoreTrace,
};
pub use waveform::{load_waveform_csv, validate_waveform, write_waveform_csv, Sample, Waveform};
