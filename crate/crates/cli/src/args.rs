use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Find inspiratory holds in ventilator flow/pressure recordings.
///
/// Units: time s, flow L/min, pressure cmH2O, volume L. Every numeric option
/// can also be set in a `--config` TOML file using the option name with
/// underscores (e.g. `log_threshold_on = -12.0`). Flags override the file,
/// which overrides the defaults.
#[derive(Debug, Parser)]
#[command(name = "holdscan", version, about, long_about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic waveform CSV with annotated holds
    Generate(GenerateArgs),
    /// Score every sample of a waveform CSV; emits `t,log_score`
    Score(ScoreArgs),
    /// Detect holds in a score CSV; emits segment NDJSON
    Detect(DetectArgs),
    /// Estimate compliance and resistance per hold; emits report NDJSON
    Report(ReportArgs),
    /// Run generate, score, detect and report in sequence; emits report NDJSON
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigFlag {
    /// Flat TOML file of `key = value` settings
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RateFlag {
    /// Expected sample rate in Hz; inferred from the median spacing when absent
    #[arg(long, value_name = "HZ")]
    pub rate_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// Hold-model mean flow, L/min [default: 0]
    #[arg(long, value_name = "LPM", allow_hyphen_values = true)]
    pub mu_flow: Option<f64>,
    /// Hold-model flow variance, (L/min)^2 [default: 1]
    #[arg(long, value_name = "LPM2")]
    pub var_flow: Option<f64>,
    /// Hold-model mean pressure, cmH2O [default: 15]
    #[arg(long, value_name = "CMH2O", allow_hyphen_values = true)]
    pub mu_pressure: Option<f64>,
    /// Hold-model pressure variance, (cmH2O)^2 [default: 1]
    #[arg(long, value_name = "CMH2O2")]
    pub var_pressure: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DetectionFlags {
    /// Natural-log score at which a hold opens [default: -10]
    #[arg(long, value_name = "NATS", allow_hyphen_values = true)]
    pub log_threshold_on: Option<f64>,
    /// Natural-log score below which an open hold closes [default: -14]
    #[arg(long, value_name = "NATS", allow_hyphen_values = true)]
    pub log_threshold_off: Option<f64>,
    /// Shortest hold kept, seconds [default: 0.3]
    #[arg(long, value_name = "S")]
    pub min_duration_s: Option<f64>,
    /// Holds separated by a shorter gap are merged, seconds [default: 0.1]
    #[arg(long, value_name = "S")]
    pub merge_gap_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MockFlags {
    /// Recording length, seconds [default: 90]
    #[arg(long, value_name = "S")]
    pub duration_s: Option<f64>,
    /// Sample rate, Hz [default: 100]
    #[arg(long, value_name = "HZ")]
    pub sample_rate_hz: Option<f64>,
    /// Breaths per minute [default: 15]
    #[arg(long, value_name = "BPM")]
    pub respiratory_rate_bpm: Option<f64>,
    /// Inspiratory:expiratory time ratio [default: 0.5]
    #[arg(long, value_name = "RATIO")]
    pub i_to_e_ratio: Option<f64>,
    /// Peak inspiratory flow, L/min [default: 60]
    #[arg(long, value_name = "LPM")]
    pub peak_flow_lpm: Option<f64>,
    /// Positive end-expiratory pressure, cmH2O [default: 5]
    #[arg(long, value_name = "CMH2O")]
    pub peep_cmh2o: Option<f64>,
    /// Pressure during holds, cmH2O [default: 15]
    #[arg(long, value_name = "CMH2O")]
    pub plateau_cmh2o: Option<f64>,
    /// Peak inspiratory pressure, cmH2O [default: 20]
    #[arg(long, value_name = "CMH2O")]
    pub peak_pressure_cmh2o: Option<f64>,
    /// Flow noise standard deviation, L/min [default: 1]
    #[arg(long, value_name = "LPM")]
    pub noise_sd_flow: Option<f64>,
    /// Pressure noise standard deviation, cmH2O [default: 1]
    #[arg(long, value_name = "CMH2O")]
    pub noise_sd_pressure: Option<f64>,
    /// Injected hold as START:DURATION in seconds; repeatable [default: 45:2]
    #[arg(long = "hold", value_name = "START:DURATION", value_parser = parse_hold)]
    pub holds: Vec<(f64, f64)>,
    /// Generate without any hold
    #[arg(long, conflicts_with = "holds")]
    pub no_holds: bool,
    /// RNG seed (SplitMix64); required here or as `rng_seed` in the config
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AssessFlags {
    /// Known PEEP, cmH2O; estimated from expiratory samples when absent
    #[arg(long, value_name = "CMH2O")]
    pub known_peep_cmh2o: Option<f64>,
    /// Window before each hold searched for peak pressure and end-inspiratory flow, seconds [default: 1]
    #[arg(long, value_name = "S")]
    pub pre_hold_window_s: Option<f64>,
    /// Window before each hold used for the tidal volume, seconds [default: 3]
    #[arg(long, value_name = "S")]
    pub volume_window_s: Option<f64>,
    /// Window before each hold used for the PEEP estimate, seconds [default: 5]
    #[arg(long, value_name = "S")]
    pub peep_window_s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub mock: MockFlags,
    /// Also write the ground-truth holds as NDJSON to this file
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlag,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Waveform CSV, or `-` for stdin
    #[arg(value_name = "WAVEFORM")]
    pub input: PathBuf,
    /// Add a `score` column holding exp(log_score), 0 on underflow
    #[arg(long)]
    pub linear: bool,
    #[command(flatten)]
    pub rate: RateFlag,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub config: ConfigFlag,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Score CSV from `score`, or `-` for stdin
    #[arg(value_name = "SCORES")]
    pub scores: PathBuf,
    /// The waveform the scores were computed from
    #[arg(long, value_name = "FILE")]
    pub waveform: PathBuf,
    #[command(flatten)]
    pub rate: RateFlag,
    #[command(flatten)]
    pub detection: DetectionFlags,
    #[command(flatten)]
    pub config: ConfigFlag,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Waveform CSV, or `-` for stdin
    #[arg(value_name = "WAVEFORM")]
    pub waveform: PathBuf,
    /// Segment NDJSON from `detect`, or `-` for stdin
    #[arg(value_name = "SEGMENTS")]
    pub segments: PathBuf,
    #[command(flatten)]
    pub rate: RateFlag,
    #[command(flatten)]
    pub assess: AssessFlags,
    #[command(flatten)]
    pub config: ConfigFlag,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub mock: MockFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub detection: DetectionFlags,
    #[command(flatten)]
    pub assess: AssessFlags,
    #[command(flatten)]
    pub config: ConfigFlag,
}

fn parse_hold(s: &str) -> Result<(f64, f64), String> {
    let (start, duration) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START:DURATION, got `{s}`"))?;
    let start = start
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad hold start: {e}"))?;
    let duration = duration
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad hold duration: {e}"))?;
    Ok((start, duration))
}
