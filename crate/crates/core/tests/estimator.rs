use kms_core::estimator::{fit_lcr, fit_pdf, fit_trace, SampleSet};
use kms_core::model::{cdf, ChannelParams, DopplerParams};
use kms_core::simulator::{draw_amplitudes, generate, EnvelopeTrace, SimConfig};

fn on_body() -> ChannelParams {
    ChannelParams::new(0.66, 1.39, 0.36, 1.03, 0.0).unwrap()
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got / want - 1.0).abs() <= rel
}

#[test]
fn recovers_on_body_shape_from_iid_draws() {
    let truth = on_body();
    let s = SampleSet::new(draw_amplitudes(&truth, 100_000, 1)).unwrap();
    let fit = fit_pdf(&s, None).unwrap();
    let p = fit.params;
    assert!(fit.converged);
    assert!(within(p.kappa(), 0.66, 0.25), "kappa {}", p.kappa());
    assert!(within(p.mu(), 1.39, 0.25), "mu {}", p.mu());
    assert!(within(p.m(), 0.36, 0.25), "m {}", p.m());
    assert!(within(p.r_bar() * s.rms(), 1.03, 0.02), "r_bar {}", p.r_bar() * s.rms());
}

#[test]
fn rayleigh_draws_fit_a_rayleigh_law() {
    // μ = m = 1 is Rayleigh for every κ, so only μ and the fitted law are pinned.
    let ray = ChannelParams::new(0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
    let s = SampleSet::new(draw_amplitudes(&ray, 100_000, 1)).unwrap();
    let p = fit_pdf(&s, None).unwrap().params;
    assert!((0.85..=1.15).contains(&p.mu()), "mu {}", p.mu());
    let fitted = p.with_r_bar(p.r_bar() * s.rms()).unwrap();
    for k in 1..40 {
        let r = 0.07 * k as f64;
        let gap = (cdf(&fitted, r).unwrap() - cdf(&ray, r).unwrap()).abs();
        assert!(gap <= 0.01, "r = {r}: {gap}");
    }
}

#[test]
fn constant_input_is_degenerate() {
    let s = SampleSet::new(vec![0.7; 5000]).unwrap();
    let e = fit_pdf(&s, None).unwrap_err();
    assert!(e.to_string().contains("histogram"), "{e}");
}

#[test]
fn best_fit_beats_every_start() {
    let s = SampleSet::new(draw_amplitudes(&on_body(), 20_000, 4)).unwrap();
    let fit = fit_pdf(&s, None).unwrap();
    assert!(fit.starts.len() >= 5);
    for st in &fit.starts {
        assert!(fit.residual <= st.initial_residual, "{st:?}");
    }
}

#[test]
fn fit_is_reproducible_and_scale_free() {
    let base = draw_amplitudes(&on_body(), 20_000, 9);
    let fit = |c: f64| fit_pdf(&SampleSet::new(base.iter().map(|a| a * c).collect()).unwrap(), None).unwrap();
    let a = fit(1.0);
    let b = fit(1.0);
    assert_eq!(a.residual.to_bits(), b.residual.to_bits());
    assert_eq!(a.params, b.params);
    for c in [0.1, 10.0] {
        let q = fit(c).params;
        for (x, y) in [(a.params.kappa(), q.kappa()), (a.params.mu(), q.mu()), (a.params.m(), q.m())] {
            assert!(within(y, x, 1e-6), "c = {c}: {x} vs {y}");
        }
    }
}

#[test]
fn trace_fit_scale_free_in_doppler_stage() {
    let d = DopplerParams::new(4.68).unwrap();
    let t = generate(&SimConfig::new(on_body(), d, 32.0 * 4.68, 2000.0 / 4.68, 5).unwrap()).unwrap();
    let a = fit_trace(&t).unwrap();
    for c in [0.1, 10.0] {
        let scaled = EnvelopeTrace::from_samples(t.samples().iter().map(|s| s * c).collect(), t.sample_rate_hz()).unwrap();
        let b = fit_trace(&scaled).unwrap();
        assert!(within(b.f_m_hat.unwrap(), a.f_m_hat.unwrap(), 1e-6));
        assert!((b.rho_hat.unwrap() - a.rho_hat.unwrap()).abs() <= 1e-6);
        assert!(within(b.r_bar_hat, c * a.r_bar_hat, 1e-6));
    }
}

#[test]
fn doppler_recovered_where_model_and_physics_agree() {
    // Light shadowing, integer μ: the closed-form LCR describes the simulated physics.
    let p = ChannelParams::new(0.66, 2.0, 500.0, 1.0, 0.0).unwrap();
    let d = DopplerParams::new(4.68).unwrap();
    let t = generate(&SimConfig::new(p, d, 64.0 * 4.68, 20_000.0 / 4.68, 1).unwrap()).unwrap();
    let fit = fit_lcr(&t, &p).unwrap();
    assert!(fit.converged);
    assert!(within(fit.f_m_hat, 4.68, 0.10), "{fit:?}");
    assert_eq!(fit.rho_hat, 0.0);
}

#[test]
fn doubling_sample_rate_barely_moves_doppler() {
    let p = ChannelParams::new(0.66, 2.0, 500.0, 1.0, 0.0).unwrap();
    let d = DopplerParams::new(4.68).unwrap();
    let fit = |fs: f64| {
        let t = generate(&SimConfig::new(p, d, fs, 2000.0 / 4.68, 1).unwrap()).unwrap();
        fit_lcr(&t, &p).unwrap().f_m_hat
    };
    // Same seed and Doppler: the denser trace samples the same continuous-time process.
    let (a, b) = (fit(64.0 * 4.68), fit(128.0 * 4.68));
    assert!(within(b, a, 0.02), "{a} vs {b}");
}

#[test]
fn sinusoid_is_flagged() {
    let fs = 200.0;
    let samples: Vec<f64> = (0..40_000).map(|k| (std::f64::consts::TAU * 1.3 * k as f64 / fs).sin().abs()).collect();
    let t = EnvelopeTrace::from_samples(samples, fs).unwrap();
    let r = fit_trace(&t).unwrap();
    assert!(!r.is_complete());
    assert!(r.lcr_error.is_some());
}

#[test]
fn short_trace_has_too_few_crossings() {
    let d = DopplerParams::new(1.0).unwrap();
    let t = generate(&SimConfig::new(on_body(), d, 16.0, 100.0, 2).unwrap()).unwrap();
    let short = EnvelopeTrace::from_samples(t.samples()[..200].to_vec(), 16.0).unwrap();
    assert!(fit_lcr(&short, &on_body()).is_err());
}
