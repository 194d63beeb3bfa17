//! Memoryless maps from a unit Gaussian to gamma-family marginals.

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::specfun::ln_gamma;

/// Gaussian inputs are clamped to ±X_MAX (tail mass ~1e-15).
const X_MAX: f64 = 8.0;
const TABLE_POINTS: usize = 4097;
/// Above this shape the Wilson–Hilferty cube is used for the gamma quantile.
const WILSON_HILFERTY_ABOVE: f64 = 1e4;

/// Tabulated g(x) = (F⁻¹(Φ(x)))^exponent for F the Gamma(shape, rate) CDF.
#[derive(Debug, Clone)]
pub(crate) struct QuantileMap {
    dx: f64,
    ln_out: Vec<f64>,
    /// E[g'(G)²] for standard normal G.
    mean_sq_gain: f64,
}

impl QuantileMap {
    pub(crate) fn new(shape: f64, rate: f64, exponent: f64) -> Self {
        let dx = 2.0 * X_MAX / (TABLE_POINTS - 1) as f64;
        // Gamma(shape, rate) = Gamma(shape, shape) · shape / rate.
        let ln_scale = (shape / rate).ln();
        let ln_out: Vec<f64> = (0..TABLE_POINTS)
            .map(|k| exponent * (ln_gamma_quantile(shape, -X_MAX + k as f64 * dx) + ln_scale))
            .collect();
        let mut mean_sq_gain = 0.0;
        for k in 1..TABLE_POINTS - 1 {
            let x = -X_MAX + k as f64 * dx;
            let slope = (ln_out[k + 1].exp() - ln_out[k - 1].exp()) / (2.0 * dx);
            mean_sq_gain += std_normal_pdf(x) * slope * slope * dx;
        }
        QuantileMap { dx, ln_out, mean_sq_gain }
    }

    /// Unit-power Nakagami-m: ξ with ξ² ~ Gamma(m, rate m).
    pub(crate) fn nakagami(m: f64) -> Self {
        Self::new(m, m, 0.5)
    }

    /// Central chi-square with `dof` degrees of freedom.
    pub(crate) fn chi_square(dof: f64) -> Self {
        Self::new(0.5 * dof, 0.5, 1.0)
    }

    pub(crate) fn mean_sq_gain(&self) -> f64 {
        self.mean_sq_gain
    }

    pub(crate) fn apply(&self, x: f64) -> f64 {
        let pos = ((x.clamp(-X_MAX, X_MAX) + X_MAX) / self.dx).min((TABLE_POINTS - 1) as f64);
        let k = (pos as usize).min(TABLE_POINTS - 2);
        let frac = pos - k as f64;
        (self.ln_out[k] + frac * (self.ln_out[k + 1] - self.ln_out[k])).exp()
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// ln of the Gamma(shape m, rate m) quantile at probability Φ(x).
fn ln_gamma_quantile(m: f64, x: f64) -> f64 {
    if m >= WILSON_HILFERTY_ABOVE {
        let c = 1.0 - 1.0 / (9.0 * m) + x / (3.0 * m.sqrt());
        return 3.0 * c.ln();
    }
    // Work on the smaller tail so that its probability keeps full relative precision.
    let lower = x <= 0.0;
    let ln_target = (0.5 * erfc(x.abs() / std::f64::consts::SQRT_2)).ln();
    let ln_norm = m * m.ln() - ln_gamma(m).unwrap_or(f64::NAN);
    // h(u) = ln tail(m e^u) - ln_target, monotone in u = ln y.
    let h = |u: f64| {
        let y = u.exp();
        let tail = if lower { gamma_lr(m, m * y) } else { gamma_ur(m, m * y) };
        tail.ln() - ln_target
    };
    let dh = |u: f64| {
        let y = u.exp();
        let tail = if lower { gamma_lr(m, m * y) } else { gamma_ur(m, m * y) };
        let ln_density_times_y = ln_norm + m * u - m * y;
        let d = (ln_density_times_y - tail.ln()).exp();
        if lower { d } else { -d }
    };
    let increasing = lower;
    let wh = 1.0 - 1.0 / (9.0 * m) + x / (3.0 * m.sqrt());
    let mut u = if wh > 0.05 { 3.0 * wh.ln() } else { (ln_target + ln_gamma(m + 1.0).unwrap_or(0.0)) / m - m.ln() };
    // Bracket the root, then safeguarded Newton.
    let (mut lo, mut hi) = (u - 1.0, u + 1.0);
    let below = |v: f64| if increasing { v < 0.0 } else { v > 0.0 };
    while !below(h(lo)) {
        lo -= 2.0 * (hi - lo);
    }
    while below(h(hi)) {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..100 {
        let value = h(u);
        if value == 0.0 {
            break;
        }
        if below(value) {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - value / dh(u);
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let done = (next - u).abs() <= 1e-13 * u.abs().max(1.0);
        u = next;
        if done || hi - lo <= 1e-14 * u.abs().max(1.0) {
            break;
        }
    }
    u
}
