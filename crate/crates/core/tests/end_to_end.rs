mod support;

use holdscan::{
    assess_hold, detect_holds, estimate_mechanics, generate_mock_waveform, score_series, summarize_segment,
    AssessConfig, DetectionConfig, MechanicsInput, MockConfig, ModelParams,
};
use support::simulate_single_compartment;

#[test]
fn default_mock_hold_is_found() {
    let mut hits = 0;
    for seed in 0..30 {
        let (w, truth) = generate_mock_waveform(&MockConfig::with_seed(seed)).unwrap();
        let trace = score_series(&w, &ModelParams::default()).unwrap();
        let segs = detect_holds(&trace, &DetectionConfig::default()).unwrap();
        let (t0, t1) = truth.hold_segments[0];
        if segs.len() == 1 && (segs[0].start_s - t0).abs() <= 0.2 && (segs[0].end_s - t1).abs() <= 0.2 {
            hits += 1;
        }
    }
    assert!(hits >= 29, "{hits}/30");
}

#[test]
fn breathing_scores_stay_low_outside_holds() {
    for seed in [1, 2, 3] {
        let (w, _) = generate_mock_waveform(&MockConfig::with_seed(seed)).unwrap();
        let trace = score_series(&w, &ModelParams::default()).unwrap();
        let outside: Vec<f64> = w
            .samples()
            .iter()
            .zip(trace.log_scores())
            .filter(|(s, _)| !(45.0..47.0).contains(&s.t))
            .map(|(_, &l)| l)
            .collect();
        let high = outside.iter().filter(|&&l| l >= -25.0).count();
        assert!(
            (high as f64) <= 0.01 * outside.len() as f64,
            "seed {seed}: {high} of {}",
            outside.len()
        );
    }
}

#[test]
fn expiratory_hold_template_finds_expiratory_pause() {
    // Pause at PEEP: zero flow, pressure at 5 cmH2O.
    let cfg = MockConfig {
        plateau_cmh2o: 5.0,
        holds: vec![holdscan::HoldSpec::new(30.0, 1.5)],
        ..MockConfig::with_seed(12)
    };
    let (w, _) = generate_mock_waveform(&cfg).unwrap();
    let inspiratory = score_series(&w, &ModelParams::inspiratory_hold()).unwrap();
    assert!(detect_holds(&inspiratory, &DetectionConfig::default())
        .unwrap()
        .is_empty());
    let expiratory = score_series(&w, &ModelParams::expiratory_hold(5.0)).unwrap();
    // Every breath ends with about a second of near-zero flow at PEEP, which
    // the template also matches; only the injected pause outlasts 1.2 s.
    let natural = detect_holds(&expiratory, &DetectionConfig::default()).unwrap();
    assert!(natural.len() > 10);
    let cfg = DetectionConfig {
        min_duration_s: 1.2,
        ..Default::default()
    };
    let segs = detect_holds(&expiratory, &cfg).unwrap();
    assert_eq!(segs.len(), 1, "{segs:?}");
    assert!(segs[0].start_s <= 30.0 + 0.2 && segs[0].end_s >= 31.5, "{segs:?}");
}

#[test]
fn mechanics_recover_simulated_lung() {
    let sim = simulate_single_compartment(10.0, 0.05, 5.0, 0.5, 1000.0);
    let trace = score_series(&sim.waveform, &ModelParams::default()).unwrap();
    let segs = detect_holds(&trace, &DetectionConfig::default()).unwrap();
    assert_eq!(segs.len(), 1);
    assert_eq!((segs[0].start_index, segs[0].end_index), sim.hold);

    let summary = summarize_segment(&sim.waveform, &segs[0]).unwrap();
    let a = assess_hold(&sim.waveform, &summary, &AssessConfig::default()).unwrap();
    let c = a.compliance.unwrap();
    let r = a.resistance.unwrap();
    assert!((c - sim.compliance).abs() / sim.compliance < 0.05, "C = {c}");
    assert!((r - sim.resistance).abs() / sim.resistance < 0.05, "R = {r}");

    let direct = estimate_mechanics(&MechanicsInput {
        plateau_pressure: summary.mean_pressure,
        peak_pressure: a.peak_pressure.unwrap(),
        peep: sim.peep,
        tidal_volume: a.tidal_volume.unwrap(),
        end_inspiratory_flow: 0.5,
    })
    .unwrap();
    assert!((direct.compliance - c).abs() < 1e-3 * c);
}
