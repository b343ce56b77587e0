//! Flat TOML configuration and flag/file/default resolution.

use std::path::Path;

use holdscan::{AssessConfig, DetectionConfig, HoldSpec, MockConfig, ModelParams};
use serde::Deserialize;

use crate::args::{AssessFlags, DetectionFlags, MockFlags, ModelFlags};
use crate::error::CliError;

/// Every key accepted in a `--config` file. Keys match the field names of
/// the library's configuration types.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mu_flow: Option<f64>,
    pub var_flow: Option<f64>,
    pub mu_pressure: Option<f64>,
    pub var_pressure: Option<f64>,

    pub log_threshold_on: Option<f64>,
    pub log_threshold_off: Option<f64>,
    pub min_duration_s: Option<f64>,
    pub merge_gap_s: Option<f64>,

    pub duration_s: Option<f64>,
    pub sample_rate_hz: Option<f64>,
    pub respiratory_rate_bpm: Option<f64>,
    pub i_to_e_ratio: Option<f64>,
    pub peak_flow_lpm: Option<f64>,
    pub peep_cmh2o: Option<f64>,
    pub plateau_cmh2o: Option<f64>,
    pub peak_pressure_cmh2o: Option<f64>,
    pub noise_sd_flow: Option<f64>,
    pub noise_sd_pressure: Option<f64>,
    /// `[[start_s, duration_s], ...]`
    pub holds: Option<Vec<(f64, f64)>>,
    pub rng_seed: Option<u64>,

    pub known_peep_cmh2o: Option<f64>,
    pub pre_hold_window_s: Option<f64>,
    pub volume_window_s: Option<f64>,
    pub peep_window_s: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config file: {e}")))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse(&text)
            }
        }
    }

    pub fn model(&self, flags: &ModelFlags) -> Result<ModelParams, CliError> {
        let d = ModelParams::default();
        let params = ModelParams {
            mu_flow: flags.mu_flow.or(self.mu_flow).unwrap_or(d.mu_flow),
            var_flow: flags.var_flow.or(self.var_flow).unwrap_or(d.var_flow),
            mu_pressure: flags.mu_pressure.or(self.mu_pressure).unwrap_or(d.mu_pressure),
            var_pressure: flags.var_pressure.or(self.var_pressure).unwrap_or(d.var_pressure),
        };
        params.validate().map_err(CliError::invalid_setting)?;
        Ok(params)
    }

    pub fn detection(&self, flags: &DetectionFlags) -> Result<DetectionConfig, CliError> {
        let d = DetectionConfig::default();
        let cfg = DetectionConfig {
            log_threshold_on: flags
                .log_threshold_on
                .or(self.log_threshold_on)
                .unwrap_or(d.log_threshold_on),
            log_threshold_off: flags
                .log_threshold_off
                .or(self.log_threshold_off)
                .unwrap_or(d.log_threshold_off),
            min_duration_s: flags.min_duration_s.or(self.min_duration_s).unwrap_or(d.min_duration_s),
            merge_gap_s: flags.merge_gap_s.or(self.merge_gap_s).unwrap_or(d.merge_gap_s),
        };
        cfg.validate().map_err(CliError::invalid_setting)?;
        Ok(cfg)
    }

    pub fn mock(&self, flags: &MockFlags) -> Result<MockConfig, CliError> {
        let d = MockConfig::default();
        let seed = flags.seed.or(self.rng_seed).ok_or_else(|| {
            CliError::Usage("a seed is required: pass --seed or set rng_seed in the config file".into())
        })?;
        let holds = if flags.no_holds {
            Vec::new()
        } else if !flags.holds.is_empty() {
            flags.holds.iter().map(|&(s, l)| HoldSpec::new(s, l)).collect()
        } else if let Some(h) = &self.holds {
            h.iter().map(|&(s, l)| HoldSpec::new(s, l)).collect()
        } else {
            d.holds.clone()
        };
        let cfg = MockConfig {
            duration_s: flags.duration_s.or(self.duration_s).unwrap_or(d.duration_s),
            sample_rate_hz: flags.sample_rate_hz.or(self.sample_rate_hz).unwrap_or(d.sample_rate_hz),
            respiratory_rate_bpm: flags
                .respiratory_rate_bpm
                .or(self.respiratory_rate_bpm)
                .unwrap_or(d.respiratory_rate_bpm),
            i_to_e_ratio: flags.i_to_e_ratio.or(self.i_to_e_ratio).unwrap_or(d.i_to_e_ratio),
            peak_flow_lpm: flags.peak_flow_lpm.or(self.peak_flow_lpm).unwrap_or(d.peak_flow_lpm),
            peep_cmh2o: flags.peep_cmh2o.or(self.peep_cmh2o).unwrap_or(d.peep_cmh2o),
            plateau_cmh2o: flags.plateau_cmh2o.or(self.plateau_cmh2o).unwrap_or(d.plateau_cmh2o),
            peak_pressure_cmh2o: flags
                .peak_pressure_cmh2o
                .or(self.peak_pressure_cmh2o)
                .unwrap_or(d.peak_pressure_cmh2o),
            noise_sd_flow: flags.noise_sd_flow.or(self.noise_sd_flow).unwrap_or(d.noise_sd_flow),
            noise_sd_pressure: flags
                .noise_sd_pressure
                .or(self.noise_sd_pressure)
                .unwrap_or(d.noise_sd_pressure),
            holds,
            rng_seed: seed,
        };
        cfg.validate().map_err(CliError::invalid_setting)?;
        Ok(cfg)
    }

    pub fn assess(&self, flags: &AssessFlags) -> Result<AssessConfig, CliError> {
        let d = AssessConfig::default();
        let cfg = AssessConfig {
            pre_hold_window_s: flags
                .pre_hold_window_s
                .or(self.pre_hold_window_s)
                .unwrap_or(d.pre_hold_window_s),
            volume_window_s: flags
                .volume_window_s
                .or(self.volume_window_s)
                .unwrap_or(d.volume_window_s),
            peep_window_s: flags.peep_window_s.or(self.peep_window_s).unwrap_or(d.peep_window_s),
            peep_cmh2o: flags.known_peep_cmh2o.or(self.known_peep_cmh2o),
        };
        cfg.validate().map_err(CliError::invalid_setting)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let file = FileConfig::parse("").unwrap();
        assert_eq!(file.model(&ModelFlags::default()).unwrap(), ModelParams::default());
        assert_eq!(
            file.detection(&DetectionFlags::default()).unwrap(),
            DetectionConfig::default()
        );
        assert_eq!(file.assess(&AssessFlags::default()).unwrap(), AssessConfig::default());
        assert!(matches!(file.mock(&MockFlags::default()), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file =
            FileConfig::parse("mu_pressure = 12.0\nvar_flow = 2.0\nrng_seed = 9\nholds = [[10.0, 1.5], [30.0, 2.0]]\n")
                .unwrap();
        let flags = ModelFlags {
            mu_pressure: Some(18.0),
            ..Default::default()
        };
        let m = file.model(&flags).unwrap();
        assert_eq!((m.mu_flow, m.var_flow, m.mu_pressure), (0.0, 2.0, 18.0));

        let mock = file.mock(&MockFlags::default()).unwrap();
        assert_eq!(mock.rng_seed, 9);
        assert_eq!(mock.holds, vec![HoldSpec::new(10.0, 1.5), HoldSpec::new(30.0, 2.0)]);

        let flags = MockFlags {
            seed: Some(4),
            holds: vec![(50.0, 1.0)],
            ..Default::default()
        };
        let mock = file.mock(&flags).unwrap();
        assert_eq!(mock.rng_seed, 4);
        assert_eq!(mock.holds, vec![HoldSpec::new(50.0, 1.0)]);

        let flags = MockFlags {
            no_holds: true,
            ..Default::default()
        };
        assert!(file.mock(&flags).unwrap().holds.is_empty());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(FileConfig::parse("mu_flw = 1.0"), Err(CliError::Usage(_))));
        let file = FileConfig::parse("var_pressure = 0.0").unwrap();
        assert!(matches!(file.model(&ModelFlags::default()), Err(CliError::Usage(_))));
        let file = FileConfig::parse("log_threshold_off = 0.0").unwrap();
        assert!(file.detection(&DetectionFlags::default()).is_err());
    }
}
