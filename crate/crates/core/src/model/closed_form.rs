//! Envelope PDF and CDF, slope variances, level crossing rate and average
//! fade duration of the κ-μ shadowed envelope.
//!
//! All prefactors are accumulated as logarithms. The shadowing ratio
//! `m^m / (μκ + m)^m` is kept as `-m ln(1 + μκ/m)` so that very large `m`
//! (the unshadowed limit) stays exact.

use std::f64::consts::PI;

use super::params::{ChannelParams, DopplerParams};
use crate::error::{Error, Result};
use crate::specfun::{
    integrate_adaptive_fallible, ln_gamma_unchecked, ln_humbert_phi2, ln_kummer_1f1, SeriesControl,
};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative tolerance of the quadrature used when the Φ₂ series fails.
pub const CDF_QUADRATURE_TOL: f64 = 1e-10;

fn series() -> SeriesControl {
    SeriesControl::new(1e-13, 20_000).expect("static control is valid")
}

fn check_amplitude(r: f64, strictly_positive: bool) -> Result<()> {
    let ok = r.is_finite() && if strictly_positive { r > 0.0 } else { r >= 0.0 };
    if ok {
        Ok(())
    } else if strictly_positive {
        Err(Error::domain(format!("amplitude r must be finite and > 0, got {r}")))
    } else {
        Err(Error::domain(format!("amplitude r must be finite and >= 0, got {r}")))
    }
}

/// ln(m^m / (μκ + m)^m).
fn ln_shadow_ratio(p: &ChannelParams) -> f64 {
    -p.m() * (p.mu() * p.kappa() / p.m()).ln_1p()
}

/// ln[exp(-μ(1+κ)s) ₁F₁(m; μ; μ²κ(1+κ)/(μκ+m) s)] with s = (r/r̄)².
fn ln_envelope_kernel(p: &ChannelParams, s: f64) -> Result<f64> {
    let (kappa, mu, m) = (p.kappa(), p.mu(), p.m());
    let decay = -mu * (1.0 + kappa) * s;
    if kappa == 0.0 {
        return Ok(decay);
    }
    let z = mu * mu * kappa * (1.0 + kappa) / (mu * kappa + m) * s;
    Ok(decay + ln_kummer_1f1(m, mu, z, &series())?)
}

/// ln Φ₂(μ - m, m; μ + 1; -μ(1+κ)s, -μ(1+κ)m s/(μκ+m)).
fn ln_cdf_phi2(p: &ChannelParams, s: f64) -> Result<f64> {
    let (kappa, mu, m) = (p.kappa(), p.mu(), p.m());
    let x = -mu * (1.0 + kappa) * s;
    let y = x * m / (mu * kappa + m);
    ln_humbert_phi2(mu - m, m, mu + 1.0, x, y, &series())
}

/// (2μ - 1) ln t, with the r = 0 limits made explicit.
fn ln_power(exponent: f64, t: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else {
        exponent * t.ln()
    }
}

/// Envelope probability density f_R(r).
pub fn pdf(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, false)?;
    let (kappa, mu) = (p.kappa(), p.mu());
    if r == 0.0 {
        if mu > 0.5 {
            return Ok(0.0);
        } else if mu < 0.5 {
            return Ok(f64::INFINITY);
        }
    }
    let t = r / p.r_bar();
    let ln_f = 2f64.ln() + mu * mu.ln() + mu * kappa.ln_1p() - ln_gamma_unchecked(mu) + ln_shadow_ratio(p)
        - p.r_bar().ln()
        + ln_power(2.0 * mu - 1.0, t)
        + ln_envelope_kernel(p, t * t)?;
    Ok(ln_f.exp())
}

/// Envelope distribution function F_R(r) from the Φ₂ closed form, falling
/// back to quadrature of the PDF if the series does not converge.
pub fn cdf(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, false)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    match cdf_closed_form(p, r) {
        Ok(v) => Ok(v),
        Err(e) if e.is_numerical() => cdf_by_quadrature(p, r),
        Err(e) => Err(e),
    }
}

/// The Φ₂ closed form of the CDF, without quadrature fallback.
pub fn cdf_closed_form(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, false)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let (kappa, mu) = (p.kappa(), p.mu());
    let t = r / p.r_bar();
    let s = t * t;
    let ln_f = (mu - 1.0) * mu.ln() + mu * kappa.ln_1p() + ln_shadow_ratio(p) - ln_gamma_unchecked(mu)
        + mu * s.ln()
        + ln_cdf_phi2(p, s)?;
    Ok(clamp_probability(ln_f.exp()))
}

/// CDF as adaptive quadrature of the PDF over `[0, r]`.
pub fn cdf_by_quadrature(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, false)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    // The integrand is unbounded at 0 when μ < 1/2; start just inside.
    let lo = if p.mu() < 0.5 { r * 1e-300 } else { 0.0 };
    let v = integrate_adaptive_fallible(|u| pdf(p, u), lo, r, CDF_QUADRATURE_TOL)?;
    Ok(clamp_probability(v))
}

fn clamp_probability(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Variance of the envelope slope caused by the multipath, π² f_m² r̄² / (μ(1+κ)).
pub fn slope_variance_multipath(p: &ChannelParams, d: &DopplerParams) -> f64 {
    PI * PI * d.f_m() * d.f_m() * p.r_bar() * p.r_bar() / (p.mu() * (1.0 + p.kappa()))
}

/// Variance of the envelope slope caused by the shadowed dominant
/// component, π² f_m² κ r̄² / (m(1+κ)). Undefined without a dominant component.
pub fn slope_variance_shadow(p: &ChannelParams, d: &DopplerParams) -> Result<f64> {
    if p.kappa() == 0.0 {
        return Err(Error::domain("slope_variance_shadow requires kappa > 0 (no dominant component)"));
    }
    Ok(PI * PI * d.f_m() * d.f_m() * p.kappa() * p.r_bar() * p.r_bar() / (p.m() * (1.0 + p.kappa())))
}

/// ∫₀^∞ ṙ f(ṙ) dṙ for the envelope slope modelled as the sum of two
/// correlated zero-mean Gaussians with standard deviations `sigma_a`
/// (multipath) and `sigma_b` (shadowed dominant component).
pub fn mean_positive_slope(sigma_a: f64, sigma_b: f64, rho: f64) -> f64 {
    let one_minus = 1.0 - rho * rho;
    let spread = sigma_a * sigma_a + 2.0 * rho * sigma_a * sigma_b + sigma_b * sigma_b;
    (one_minus * spread).sqrt() * sigma_a / ((2.0 * PI).sqrt() * (sigma_a * one_minus + 4.0 * rho * sigma_b))
}

/// Level crossing rate normalized by the maximum Doppler frequency, N_R(r)/f_m,
/// for arbitrary slope correlation ρ.
pub fn lcr_normalized(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, true)?;
    let (kappa, mu, m, rho) = (p.kappa(), p.mu(), p.m(), p.rho());
    let t = r / p.r_bar();
    let one_minus = 1.0 - rho * rho;
    let spread = m + mu * kappa + 2.0 * rho * (mu * kappa * m).sqrt();
    let ln_n = 0.5 * (LN_2PI + one_minus.ln())
        + (mu - 0.5) * mu.ln()
        + (mu - 0.5) * kappa.ln_1p()
        + 0.5 * spread.ln()
        - p.slope_denominator().ln()
        + ln_shadow_ratio(p)
        - ln_gamma_unchecked(mu)
        + ln_power(2.0 * mu - 1.0, t)
        + ln_envelope_kernel(p, t * t)?;
    Ok(ln_n.exp())
}

/// The uncorrelated (ρ = 0) closed form of N_R(r)/f_m, written out separately.
pub fn lcr_normalized_uncorrelated(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, true)?;
    require_uncorrelated(p)?;
    let (kappa, mu, m) = (p.kappa(), p.mu(), p.m());
    let t = r / p.r_bar();
    let ln_n = 0.5 * LN_2PI + (mu - 0.5) * mu.ln() - 0.5 * m.ln() - m * (mu * kappa / m).ln_1p()
        + (mu - 0.5) * kappa.ln_1p()
        + 0.5 * (m + mu * kappa).ln()
        - ln_gamma_unchecked(mu)
        + ln_power(2.0 * mu - 1.0, t)
        + ln_envelope_kernel(p, t * t)?;
    Ok(ln_n.exp())
}

/// Average fade duration multiplied by f_m, computed as F_R(r) / (N_R(r)/f_m).
///
/// Returns `+inf` when the crossing rate underflows while the CDF does not.
pub fn afd_normalized(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, true)?;
    let f = cdf(p, r)?;
    let n = lcr_normalized(p, r)?;
    if n == 0.0 {
        if f > 0.0 {
            return Ok(f64::INFINITY);
        }
        // Both underflowed: the log-domain ratio is still well defined.
        return afd_closed_form(p, r);
    }
    Ok(f / n)
}

/// T_R(r) f_m from its explicit Φ₂ / ₁F₁ ratio form, for arbitrary ρ.
pub fn afd_closed_form(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, true)?;
    let (kappa, mu, m, rho) = (p.kappa(), p.mu(), p.m(), p.rho());
    let t = r / p.r_bar();
    let s = t * t;
    let one_minus = 1.0 - rho * rho;
    let spread = m + mu * kappa + 2.0 * rho * (mu * kappa * m).sqrt();
    let ln_t = p.slope_denominator().ln() + 0.5 * kappa.ln_1p()
        - 0.5 * (LN_2PI + one_minus.ln())
        - 0.5 * mu.ln()
        - 0.5 * spread.ln()
        + t.ln()
        + ln_cdf_phi2(p, s)?
        - ln_envelope_kernel(p, s)?;
    Ok(ln_t.exp())
}

/// The uncorrelated (ρ = 0) explicit form of T_R(r) f_m.
pub fn afd_closed_form_uncorrelated(p: &ChannelParams, r: f64) -> Result<f64> {
    check_amplitude(r, true)?;
    require_uncorrelated(p)?;
    let (kappa, mu, m) = (p.kappa(), p.mu(), p.m());
    let t = r / p.r_bar();
    let s = t * t;
    let ln_t = 0.5 * m.ln() + 0.5 * kappa.ln_1p() - 0.5 * LN_2PI - 0.5 * mu.ln() - 0.5 * (m + mu * kappa).ln()
        + t.ln()
        + ln_cdf_phi2(p, s)?
        - ln_envelope_kernel(p, s)?;
    Ok(ln_t.exp())
}

fn require_uncorrelated(p: &ChannelParams) -> Result<()> {
    if p.rho() == 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("uncorrelated form requires rho = 0, got {}", p.rho())))
    }
}
