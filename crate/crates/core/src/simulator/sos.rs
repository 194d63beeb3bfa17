//! Sum-of-sinusoids Gaussian processes with a Clarke (Jakes) Doppler spectrum.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples between exact re-evaluations of the rotating phasors.
const RESYNC_EVERY: usize = 2048;

/// SplitMix64 finalizer.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `index` derived from the user seed.
///
/// `splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5EED))`; every random
/// component of a simulation draws from its own substream, so results do
/// not depend on evaluation order.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0x5EED)))
}

pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, index))
}

/// One real zero-mean Gaussian process
/// `x(t) = std · √(2/N) Σ_n cos(2π f_max cos(α_n) t + φ_n)`,
/// `α_n = (2πn − π + θ)/(4N)`, with θ and φ_n uniform on [−π, π).
#[derive(Debug, Clone)]
pub(crate) struct SosProcess {
    omegas: Vec<f64>,
    phases: Vec<f64>,
    amplitude: f64,
}

impl SosProcess {
    pub(crate) fn new(rng: &mut ChaCha8Rng, n: usize, f_max: f64, std: f64) -> Self {
        let theta = rng.random_range(-PI..PI);
        let nf = n as f64;
        let omegas = (1..=n)
            .map(|i| {
                let alpha = (TAU * i as f64 - PI + theta) / (4.0 * nf);
                TAU * f_max * alpha.cos()
            })
            .collect();
        let phases = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        SosProcess { omegas, phases, amplitude: std * (2.0 / nf).sqrt() }
    }

    /// Writes `len` samples at spacing `dt` starting from t = 0.
    pub(crate) fn render(&self, len: usize, dt: f64) -> Vec<f64> {
        let mut out = vec![0.0; len];
        let mut start = 0;
        while start < len {
            let end = (start + RESYNC_EVERY).min(len);
            let t0 = start as f64 * dt;
            for (&w, &phi) in self.omegas.iter().zip(&self.phases) {
                let (mut s, mut c) = (w * t0 + phi).rem_euclid(TAU).sin_cos();
                let (ds, dc) = (w * dt).sin_cos();
                for v in &mut out[start..end] {
                    *v += c;
                    let next_c = c * dc - s * ds;
                    s = s * dc + c * ds;
                    c = next_c;
                }
            }
            start = end;
        }
        for v in &mut out {
            *v *= self.amplitude;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_differ_and_repeat() {
        assert_eq!(stream_seed(42, 3), stream_seed(42, 3));
        assert_ne!(stream_seed(42, 3), stream_seed(42, 4));
        assert_ne!(stream_seed(42, 3), stream_seed(43, 3));
    }

    #[test]
    fn phasor_rotation_tracks_direct_evaluation() {
        let mut rng = stream_rng(7, 0);
        let p = SosProcess::new(&mut rng, 16, 10.0, 1.0);
        let dt = 1e-3;
        let x = p.render(5000, dt);
        for &k in &[0usize, 1, 2047, 2048, 4999] {
            let t = k as f64 * dt;
            let direct: f64 =
                p.omegas.iter().zip(&p.phases).map(|(w, phi)| (w * t + phi).cos()).sum::<f64>() * p.amplitude;
            assert!((x[k] - direct).abs() < 1e-9, "sample {k}");
        }
    }

    #[test]
    fn variance_and_slope_variance() {
        let mut rng = stream_rng(11, 0);
        let (f, std) = (5.0, 1.7);
        let p = SosProcess::new(&mut rng, 64, f, std);
        let dt = 1e-3;
        let x = p.render(400_000, dt);
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((var / (std * std) - 1.0).abs() < 0.03, "{var}");
        // Long-run slope variance of the realization, from its frequency set;
        // the random angle offset θ moves it by up to 1/N relative.
        let slope = p.omegas.iter().map(|w| w * w).sum::<f64>() * p.amplitude * p.amplitude / 2.0;
        let expect = 2.0 * PI * PI * f * f * std * std;
        assert!((slope / expect - 1.0).abs() < 0.02, "{slope} vs {expect}");
    }
}
