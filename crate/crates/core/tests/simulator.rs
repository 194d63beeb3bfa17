use kms_core::model::{cdf, threshold_grid, ChannelParams, DopplerParams};
use kms_core::simulator::{draw_amplitudes, generate, measure, EnvelopeTrace, SimConfig};
use proptest::prelude::*;

fn rayleigh() -> ChannelParams {
    ChannelParams::new(0.0, 1.0, 1.0, 1.0, 0.0).unwrap()
}

fn ks_statistic(samples: &[f64], p: &ChannelParams) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // Evaluate the model CDF on a subsample of order statistics; the
    // empirical CDF steps are 1/n, far below the tolerance.
    let stride = (sorted.len() / 4000).max(1);
    let mut worst: f64 = 0.0;
    for i in (0..sorted.len()).step_by(stride) {
        let f = cdf(p, sorted[i]).unwrap();
        worst = worst.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    worst
}

#[test]
fn rayleigh_mean_power_matches_rms_level() {
    let cfg = SimConfig::new(rayleigh(), DopplerParams::new(10.0).unwrap(), 1000.0, 200.0, 42).unwrap();
    let t = generate(&cfg).unwrap();
    let mean_sq = t.samples().iter().map(|s| s * s).sum::<f64>() / t.len() as f64;
    assert!((mean_sq - 1.0).abs() <= 0.02, "{mean_sq}");
}

#[test]
fn same_seed_same_trace() {
    let p = ChannelParams::new(1.39, 1.78, 0.55, 1.14, 0.0).unwrap();
    let cfg = SimConfig::new(p, DopplerParams::new(2.4).unwrap(), 100.0, 60.0, 9).unwrap();
    let (a, b) = (generate(&cfg).unwrap(), generate(&cfg).unwrap());
    assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let other = SimConfig::new(p, DopplerParams::new(2.4).unwrap(), 100.0, 60.0, 10).unwrap();
    assert_ne!(a.samples(), generate(&other).unwrap().samples());
}

#[test]
fn d2d_amplitudes_follow_model_pdf() {
    let p = ChannelParams::new(1.39, 1.78, 0.55, 1.14, 0.0).unwrap();
    let f_m = 2.4;
    let cfg = SimConfig::new(p, DopplerParams::new(f_m).unwrap(), 32.0 * f_m, 500.0 / f_m, 3).unwrap();
    let t = generate(&cfg).unwrap();
    let ks = ks_statistic(t.samples(), &p);
    assert!(ks <= 0.02, "KS = {ks}");
}

#[test]
fn iid_draws_follow_model_pdf() {
    let p = ChannelParams::new(0.66, 1.39, 0.36, 1.03, 0.0).unwrap();
    let ks = ks_statistic(&draw_amplitudes(&p, 100_000, 1), &p);
    assert!(ks <= 0.01, "KS = {ks}");
}

#[test]
fn rayleigh_crossing_rate_matches_closed_form() {
    let f_m = 5.0;
    let d = DopplerParams::new(f_m).unwrap();
    let cfg = SimConfig::new(rayleigh(), d, 256.0 * f_m, 2000.0 / f_m, 42).unwrap();
    let t = generate(&cfg).unwrap();
    let grid = threshold_grid(-20.0, 5.0, 26).unwrap();
    let e = measure(&t, &d, &grid).unwrap();
    for (i, &db) in grid.iter().enumerate() {
        if db < -15.0 {
            continue;
        }
        let rt = 10f64.powf(db / 20.0);
        let expect = (2.0 * std::f64::consts::PI).sqrt() * rt * (-rt * rt).exp();
        let got = e.lcr_normalized[i];
        assert!((got / expect - 1.0).abs() <= 0.08, "{db} dB: {got} vs {expect} ({} crossings)", e.upcrossings[i]);
    }
}

#[test]
fn counters_satisfy_empirical_fade_identity() {
    let d = DopplerParams::new(4.0).unwrap();
    let p = ChannelParams::new(0.66, 1.39, 0.36, 1.03, 0.0).unwrap();
    let t = generate(&SimConfig::new(p, d, 64.0 * 4.0, 100.0, 17).unwrap()).unwrap();
    let e = measure(&t, &d, &threshold_grid(-25.0, 5.0, 31).unwrap()).unwrap();
    for i in 0..e.thresholds_db.len() {
        assert!(e.n_fades[i] <= e.upcrossings[i] + 1);
        // afd · lcr = fraction of time below, exactly.
        let product = e.afd_normalized[i] * e.lcr_normalized[i];
        let fraction = e.time_below_s[i] / e.duration_s;
        assert!((product - fraction).abs() <= 1e-12 * fraction.max(1e-300), "row {i}");
    }
}

fn wiggle(len: usize, seed: u64) -> Vec<f64> {
    // Deterministic positive test signal with many distinct levels.
    (0..len)
        .map(|k| {
            let t = k as f64 * 0.013 + seed as f64;
            1.2 + (t * 3.1).sin() + 0.6 * (t * 7.7 + 0.3).cos() + 0.15 * (t * 29.0).sin()
        })
        .map(|v: f64| v.abs())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_the_trace_leaves_counts_unchanged(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let d = DopplerParams::new(1.0).unwrap();
        let grid = threshold_grid(-20.0, 4.0, 13).unwrap();
        let base = EnvelopeTrace::from_samples(wiggle(3000, seed), 50.0).unwrap();
        let scaled = EnvelopeTrace::from_samples(base.samples().iter().map(|s| s * scale).collect(), 50.0).unwrap();
        let (a, b) = (measure(&base, &d, &grid).unwrap(), measure(&scaled, &d, &grid).unwrap());
        prop_assert_eq!(&a.upcrossings, &b.upcrossings);
        prop_assert_eq!(&a.n_fades, &b.n_fades);
        for (x, y) in a.lcr_normalized.iter().zip(&b.lcr_normalized) {
            prop_assert!(x == y);
        }
    }

    #[test]
    fn time_below_grows_with_threshold_when_record_ends_high(seed in 0u64..1000) {
        let mut s = wiggle(2000, seed);
        s.push(100.0);
        let t = EnvelopeTrace::from_samples(s, 50.0).unwrap();
        let e = measure(&t, &DopplerParams::new(1.0).unwrap(), &threshold_grid(-30.0, 6.0, 19).unwrap()).unwrap();
        prop_assert!(e.time_below_s.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(&e.n_fades, &e.upcrossings);
    }
}
