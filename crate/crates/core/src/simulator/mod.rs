//! Monte Carlo synthesis of κ-μ shadowed envelopes and empirical crossing statistics.
//!
//! The envelope follows the cluster model
//! `R² = Σ_i (X_i + ξ p_i)² + (Y_i + ξ q_i)²`
//! with Clarke-spectrum Gaussian processes X_i, Y_i and a common
//! Nakagami-m shadowing process ξ(t).

mod measure;
mod quantile;
mod sos;

use std::io::{BufRead, Write};
use std::path::Path;

use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::format::significant;
use crate::model::{ChannelParams, DopplerParams};

pub use measure::{measure, EmpiricalSecondOrder};
pub use sos::stream_seed;

use quantile::QuantileMap;
use sos::{stream_rng, SosProcess};

pub const DEFAULT_SINUSOIDS: usize = 64;
/// Minimum sample rate in units of f_m.
pub const MIN_OVERSAMPLING: f64 = 16.0;
/// Minimum record length in units of 1/f_m.
pub const MIN_DOPPLER_PERIODS: f64 = 100.0;

const TRACE_HEADER: &str = "# kms-trace v1";
const TRACE_DIGITS: usize = 12;

// Substream layout for `stream_seed`.
const STREAM_SHADOW: u64 = 0;
const STREAM_FRACTION: u64 = 1;
const STREAM_FIRST_QUADRATURE: u64 = 2;

/// Everything needed to synthesize one envelope record.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    params: ChannelParams,
    doppler: DopplerParams,
    shadow_doppler_hz: f64,
    sample_rate_hz: f64,
    duration_s: f64,
    seed: u64,
    n_sinusoids: usize,
}

impl SimConfig {
    /// Shadow Doppler defaults to f_m and the sinusoid count to 64.
    pub fn new(
        params: ChannelParams,
        doppler: DopplerParams,
        sample_rate_hz: f64,
        duration_s: f64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            params,
            doppler,
            shadow_doppler_hz: doppler.f_m(),
            sample_rate_hz,
            duration_s,
            seed,
            n_sinusoids: DEFAULT_SINUSOIDS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_shadow_doppler(mut self, hz: f64) -> Result<Self> {
        self.shadow_doppler_hz = hz;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sinusoids(mut self, n: usize) -> Result<Self> {
        self.n_sinusoids = n;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let f_m = self.doppler.f_m();
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.params.mu() < 0.5 {
            return invalid(format!("mu must be >= 0.5 for simulation, got {}", self.params.mu()));
        }
        if self.params.rho() != 0.0 {
            return invalid(format!("rho must be 0 for simulation, got {}", self.params.rho()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz >= MIN_OVERSAMPLING * f_m) {
            return invalid(format!(
                "sample_rate_hz must be >= 16*f_m = {}, got {}",
                MIN_OVERSAMPLING * f_m,
                self.sample_rate_hz
            ));
        }
        if !(self.shadow_doppler_hz.is_finite() && self.shadow_doppler_hz > 0.0 && self.shadow_doppler_hz <= f_m) {
            return invalid(format!("shadow_doppler_hz must be in (0, f_m = {f_m}], got {}", self.shadow_doppler_hz));
        }
        if !(self.duration_s.is_finite() && self.duration_s * f_m >= MIN_DOPPLER_PERIODS) {
            return invalid(format!(
                "duration_s*f_m must be >= 100, got {}",
                self.duration_s * f_m
            ));
        }
        if self.n_sinusoids == 0 {
            return invalid("n_sinusoids must be positive".into());
        }
        Ok(())
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn doppler(&self) -> &DopplerParams {
        &self.doppler
    }

    pub fn shadow_doppler_hz(&self) -> f64 {
        self.shadow_doppler_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_sinusoids(&self) -> usize {
        self.n_sinusoids
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }
}

/// A uniformly sampled envelope record.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTrace {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    config: Option<SimConfig>,
}

impl EnvelopeTrace {
    /// Wraps measured amplitudes; all must be finite and nonnegative.
    pub fn from_samples(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("trace has no samples".into()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidConfig(format!("sample_rate_hz must be finite and > 0, got {sample_rate_hz}")));
        }
        if let Some(k) = samples.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "sample {k} is {}, amplitudes must be finite and >= 0",
                samples[k]
            )));
        }
        Ok(EnvelopeTrace { samples, sample_rate_hz, config: None })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// The configuration that produced the trace, if it was simulated.
    pub fn config(&self) -> Option<&SimConfig> {
        self.config.as_ref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        writeln!(w, "sample_rate_hz={}", self.sample_rate_hz)?;
        for &s in &self.samples {
            writeln!(w, "{}", significant(s, TRACE_DIGITS))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next_line = |what: &str| -> Result<String> {
            match lines.next() {
                Some(line) => Ok(line?),
                None => Err(Error::Parse(format!("missing {what}"))),
            }
        };
        let header = next_line("header line")?;
        if header.trim_end() != TRACE_HEADER {
            return Err(Error::Parse(format!("line 1: expected '{TRACE_HEADER}', got '{}'", header.trim_end())));
        }
        let rate_line = next_line("sample_rate_hz line")?;
        let rate = rate_line
            .trim()
            .strip_prefix("sample_rate_hz=")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("line 2: expected 'sample_rate_hz=<value>', got '{}'", rate_line.trim())))?;
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let v: f64 =
                text.parse().map_err(|_| Error::Parse(format!("line {}: '{text}' is not a number", i + 3)))?;
            samples.push(v);
        }
        EnvelopeTrace::from_samples(samples, rate).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::Parse(msg),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// Splits 2μ into whole Gaussian quadratures and a fractional remainder.
fn quadrature_split(mu: f64) -> (usize, f64) {
    let dof = 2.0 * mu;
    let whole = (dof + 1e-12).floor();
    let frac = dof - whole;
    (whole as usize, if frac > 1e-12 { frac } else { 0.0 })
}

/// Synthesizes an envelope record; identical configurations give identical samples.
///
/// Given ξ, R²/σ² is noncentral chi-square with 2μ degrees of freedom. The
/// whole part of 2μ is carried by Gaussian quadratures that share the
/// dominant component; a fractional remainder f is a central χ²_f process
/// obtained by mapping a Clarke Gaussian through the χ²_f quantile, with
/// its bandwidth set so that its slope variance equals that of f Gaussian
/// squares.
pub fn generate(cfg: &SimConfig) -> Result<EnvelopeTrace> {
    cfg.validate()?;
    let p = &cfg.params;
    let n = cfg.n_samples();
    let dt = 1.0 / cfg.sample_rate_hz;
    let f_m = cfg.doppler.f_m();
    let sigma2 = p.scattered_variance();
    let sigma = sigma2.sqrt();
    let d2 = p.dominant_power();
    let (whole, frac) = quadrature_split(p.mu());

    let xi = if d2 > 0.0 {
        let map = QuantileMap::nakagami(p.m());
        // Clarke Gaussian with max frequency f_g has slope variance 2π²f_g²;
        // through the map this gives Var(ξ') = π² f_s² / m.
        let f_g = cfg.shadow_doppler_hz / (2.0 * p.m() * map.mean_sq_gain()).sqrt();
        let g = SosProcess::new(&mut stream_rng(cfg.seed, STREAM_SHADOW), cfg.n_sinusoids, f_g, 1.0).render(n, dt);
        g.into_iter().map(|x| map.apply(x)).collect()
    } else {
        Vec::new()
    };

    let mut power = if frac > 0.0 {
        let map = QuantileMap::chi_square(frac);
        // f Gaussian squares have Var(d/dt Σu²) = 4 f σ² · 2π² f_m² σ².
        let f_g = 2.0 * f_m * (frac / map.mean_sq_gain()).sqrt();
        let g = SosProcess::new(&mut stream_rng(cfg.seed, STREAM_FRACTION), cfg.n_sinusoids, f_g, 1.0).render(n, dt);
        g.into_iter().map(|x| sigma2 * map.apply(x)).collect()
    } else {
        vec![0.0; n]
    };
    let a = (d2 / whole as f64).sqrt();
    for j in 0..whole {
        let x = SosProcess::new(&mut stream_rng(cfg.seed, STREAM_FIRST_QUADRATURE + j as u64), cfg.n_sinusoids, f_m, sigma)
            .render(n, dt);
        for k in 0..n {
            let u = if xi.is_empty() { x[k] } else { x[k] + xi[k] * a };
            power[k] += u * u;
        }
    }
    let samples = power.into_iter().map(f64::sqrt).collect();
    Ok(EnvelopeTrace { samples, sample_rate_hz: cfg.sample_rate_hz, config: Some(cfg.clone()) })
}

/// Independent draws from the envelope distribution.
///
/// Given ξ² ~ Gamma(m, 1/m), R²/σ² is noncentral chi-square with 2μ
/// degrees of freedom and noncentrality ξ²d²/σ², sampled as
/// 2·Gamma(μ + N) with N ~ Poisson(ξ²d²/(2σ²)).
pub fn draw_amplitudes(p: &ChannelParams, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let sigma2 = p.scattered_variance();
    let d2 = p.dominant_power();
    let shadow = Gamma::new(p.m(), 1.0 / p.m()).expect("m > 0 by invariant");
    (0..count)
        .map(|_| {
            let lambda = if d2 > 0.0 { shadow.sample(&mut rng) * d2 / (2.0 * sigma2) } else { 0.0 };
            let extra = if lambda > 0.0 {
                Poisson::new(lambda).map(|d| d.sample(&mut rng)).unwrap_or(0.0)
            } else {
                0.0
            };
            let g = Gamma::new(p.mu() + extra, 1.0).expect("positive shape").sample(&mut rng);
            (2.0 * sigma2 * g).sqrt()
        })
        .collect()
}
