//! Independent oracles shared by the integration and acceptance suites.
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use holdscan::{Sample, Waveform};

/// Composite Simpson's rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Direct evaluation of the linear score from its definition, for inputs
/// where nothing underflows.
pub fn naive_score(flow: f64, pressure: f64, mu_f: f64, var_f: f64, mu_p: f64, var_p: f64) -> f64 {
    let density =
        |x: f64, m: f64, v: f64| (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let q = density(flow, mu_f, var_f) * density(pressure, mu_p, var_p);
    q / (1.0 - q)
}

/// Single-compartment lung `P_aw - PEEP = R dV/dt + V / C`, forward Euler.
pub struct LungSimulation {
    pub waveform: Waveform,
    /// Sample indices `[start, end)` of the end-inspiratory hold.
    pub hold: (usize, usize),
    pub resistance: f64,
    pub compliance: f64,
    pub peep: f64,
}

/// Two volume-controlled breaths at constant `flow_lps` for `t_insp_s`; the
/// second is followed by a `hold_s` end-inspiratory hold. Expiration is
/// passive. Flow is recorded in L/min, pressure in cmH2O.
pub fn simulate_single_compartment(
    resistance: f64,
    compliance: f64,
    peep: f64,
    flow_lps: f64,
    rate_hz: f64,
) -> LungSimulation {
    #[derive(Clone, Copy)]
    enum Phase {
        Inspire,
        Hold,
        Expire,
    }
    let schedule = [
        (Phase::Inspire, 1.0),
        (Phase::Expire, 3.0),
        (Phase::Inspire, 1.0),
        (Phase::Hold, 1.0),
        (Phase::Expire, 3.0),
    ];
    let dt = 1.0 / rate_hz;
    let mut volume = 0.0;
    let mut samples = Vec::new();
    let mut hold = (0, 0);
    for (phase, seconds) in schedule {
        let steps = (seconds * rate_hz).round() as usize;
        if matches!(phase, Phase::Hold) {
            hold = (samples.len(), samples.len() + steps);
        }
        for _ in 0..steps {
            // Ventilator drive above PEEP for this step.
            let drive = match phase {
                Phase::Inspire => resistance * flow_lps + volume / compliance,
                Phase::Hold => volume / compliance,
                Phase::Expire => 0.0,
            };
            let flow = match phase {
                Phase::Hold => 0.0,
                _ => (drive - volume / compliance) / resistance,
            };
            let t = samples.len() as f64 / rate_hz;
            samples.push(Sample::new(t, flow * 60.0, peep + drive));
            volume += flow * dt;
        }
    }
    LungSimulation {
        waveform: Waveform::new(samples, rate_hz).expect("simulated waveform is valid"),
        hold,
        resistance,
        compliance,
        peep,
    }
}
