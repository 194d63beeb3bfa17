use crate::error::{Error, Result};

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficients).
const LANCZOS_G: f64 = 607.0 / 128.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural logarithm of the gamma function for positive finite arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("ln_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// `ln_gamma` without the domain check. Callers guarantee `x > 0`.
pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    // Exact values keep the roots of ln Γ free of rounding noise.
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    // ln Γ(x) = ln Γ(x + 1) - ln x, with the Lanczos sum evaluated at x.
    let mut series = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    let ln_gamma_xp1 = HALF_LN_2PI + (x + 0.5) * t.ln() - t + series.ln();
    ln_gamma_xp1 - x.ln()
}

/// Logarithm of the Pochhammer symbol `(a)_n = Γ(a + n) / Γ(a)` for `a > 0`.
#[allow(dead_code)]
pub(crate) fn ln_pochhammer(a: f64, n: f64) -> f64 {
    ln_gamma_unchecked(a + n) - ln_gamma_unchecked(a)
}
