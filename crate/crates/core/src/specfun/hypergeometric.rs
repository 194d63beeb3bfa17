//! Kummer's confluent hypergeometric function ₁F₁ and Humbert's Φ₂.
//!
//! Both are summed as power series in a logarithmic frame, so arguments far
//! beyond the overflow point of `exp` are fine when the caller asks for the
//! logarithm. Negative arguments are moved to the positive side with the
//! Kummer transformation
//!
//! ```text
//! 1F1(a; b; x) = e^x 1F1(b - a; b; -x)
//! ```
//!
//! and its bivariate analogue
//!
//! ```text
//! Φ2(b1, b2; c; x, y) = e^x Φ2(c - b1 - b2, b2; c; -x, y - x)
//! ```
//!
//! which turn the alternating series met by the envelope CDF into series of
//! positive terms.

use super::series::{Scaled, ScaledSum};
use crate::error::{Error, Result};

/// Largest tolerated ratio of the biggest series term to the result.
pub const CANCELLATION_LIMIT: f64 = 1e12;

/// Below this argument ₁F₁ is evaluated through the Kummer transformation.
/// The transformed series has at most finitely many sign changes, so it is
/// used on the whole negative axis.
pub const KUMMER_REFLECT_BELOW: f64 = 0.0;

/// Number of consecutive negligible terms that ends the Φ₂ outer sum.
const PHI2_QUIET_TERMS: usize = 3;

/// Truncation control for the hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    rel_tol: f64,
    max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::domain(format!("SeriesControl.rel_tol must lie in (0, 1), got {rel_tol}")));
        }
        if max_terms < 1 {
            return Err(Error::domain("SeriesControl.max_terms must be at least 1"));
        }
        Ok(SeriesControl { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { rel_tol: 1e-10, max_terms: 10_000 }
    }
}

/// Kummer's function ₁F₁(a; b; x) = Σ (a)_k x^k / ((b)_k k!).
pub fn kummer_1f1(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<f64> {
    let s = kummer_scaled(a, b, x, ctrl)?;
    let v = s.to_f64();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence {
            what: "kummer_1f1",
            detail: format!("1F1({a}; {b}; {x}) overflows f64, use ln_kummer_1f1"),
        })
    }
}

/// Natural logarithm of ₁F₁(a; b; x). Fails if the function value is not positive.
pub fn ln_kummer_1f1(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<f64> {
    let s = kummer_scaled(a, b, x, ctrl)?;
    if !s.is_positive() {
        return Err(Error::domain(format!("1F1({a}; {b}; {x}) is not positive, no logarithm")));
    }
    Ok(s.ln_abs())
}

/// Humbert's confluent function
/// Φ₂(b1, b2; c; x, y) = Σ_{j,k} (b1)_j (b2)_k x^j y^k / ((c)_{j+k} j! k!),
/// evaluated as the single sum Σ_k (b2)_k y^k / ((c)_k k!) · ₁F₁(b1; c + k; x).
pub fn humbert_phi2(b1: f64, b2: f64, c: f64, x: f64, y: f64, ctrl: &SeriesControl) -> Result<f64> {
    let s = phi2_scaled(b1, b2, c, x, y, ctrl)?;
    let v = s.to_f64();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence {
            what: "humbert_phi2",
            detail: "result overflows f64, use ln_humbert_phi2".into(),
        })
    }
}

/// Natural logarithm of Φ₂. Fails if the function value is not positive.
pub fn ln_humbert_phi2(b1: f64, b2: f64, c: f64, x: f64, y: f64, ctrl: &SeriesControl) -> Result<f64> {
    let s = phi2_scaled(b1, b2, c, x, y, ctrl)?;
    if !s.is_positive() {
        return Err(Error::domain(format!(
            "Phi2({b1}, {b2}; {c}; {x}, {y}) is not positive, no logarithm"
        )));
    }
    Ok(s.ln_abs())
}

pub(crate) fn kummer_scaled(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<Scaled> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::domain(format!("1F1 requires finite b > 0, got b = {b}")));
    }
    if !a.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!("1F1 requires finite a and x, got a = {a}, x = {x}")));
    }
    if x == 0.0 {
        return Ok(Scaled::one());
    }
    if a == b {
        return Ok(Scaled::exp(x));
    }
    if x < KUMMER_REFLECT_BELOW {
        let mut s = series_1f1(b - a, b, -x, ctrl)?;
        s.ln_scale += x;
        return Ok(s);
    }
    series_1f1(a, b, x, ctrl)
}

fn series_1f1(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<Scaled> {
    let mut acc = ScaledSum::new();
    let mut term = 1.0;
    acc.add(term);
    let mut quiet = 0;
    let mut converged = false;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let ratio = (a + kf) * x / ((b + kf) * (kf + 1.0));
        term *= ratio;
        if term == 0.0 {
            // a is a non-positive integer (polynomial case) or the terms underflowed.
            converged = true;
            break;
        }
        acc.add(term);
        term *= acc.rescale_if_needed();
        let r = ratio.abs();
        if r < 1.0 && term.abs() <= ctrl.rel_tol * acc.total().abs() * (1.0 - r) {
            quiet += 1;
            if quiet >= 2 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "kummer_1f1",
            detail: format!(
                "1F1({a}; {b}; {x}) not within rel_tol {} after {} terms",
                ctrl.rel_tol, ctrl.max_terms
            ),
        });
    }
    check_cancellation("kummer_1f1", &acc)?;
    Ok(acc.finish())
}

pub(crate) fn phi2_scaled(b1: f64, b2: f64, c: f64, x: f64, y: f64, ctrl: &SeriesControl) -> Result<Scaled> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!("Phi2 requires finite c > 0, got c = {c}")));
    }
    if ![b1, b2, x, y].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("Phi2 requires finite b1, b2, x, y"));
    }
    if x == 0.0 && y == 0.0 {
        return Ok(Scaled::one());
    }
    if x <= 0.0 && y <= 0.0 {
        // Pull out the more negative argument; Φ₂ is symmetric under
        // (b1, x) <-> (b2, y), so either ordering can be transformed.
        let mut s = if x <= y {
            let mut s = phi2_single_sum(c - (b1 + b2), b2, c, -x, y - x, ctrl)?;
            s.ln_scale += x;
            s
        } else {
            let mut s = phi2_single_sum(c - (b1 + b2), b1, c, -y, x - y, ctrl)?;
            s.ln_scale += y;
            s
        };
        if s.value == 0.0 {
            s.ln_scale = 0.0;
        }
        return Ok(s);
    }
    phi2_single_sum(b1, b2, c, x, y, ctrl)
}

fn phi2_single_sum(b1: f64, b2: f64, c: f64, x: f64, y: f64, ctrl: &SeriesControl) -> Result<Scaled> {
    if y == 0.0 {
        return kummer_scaled(b1, c, x, ctrl);
    }
    let mut acc = ScaledSum::new();
    // Coefficient (b2)_k y^k / ((c)_k k!) as coef * exp(coef_scale), updated
    // multiplicatively so terms reach the sum without a round trip through ln.
    let mut coef = 1.0f64;
    let mut coef_scale = 0.0;
    // The outer sum can cancel, so the inner values are taken to full precision.
    let inner_ctrl = SeriesControl { rel_tol: ctrl.rel_tol.min(f64::EPSILON / 4.0), ..*ctrl };
    let mut prev_ln = f64::INFINITY;
    let mut quiet = 0;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let inner = kummer_scaled(b1, c + kf, x, &inner_ctrl)?;
        let mant = coef * inner.value;
        let scale = coef_scale + inner.ln_scale;
        acc.add_scaled(mant, scale);
        let term_ln = mant.abs().ln() + scale;

        let total_ln = acc.total().abs().ln() + acc.ln_scale();
        let decreasing = term_ln <= prev_ln;
        if decreasing && term_ln <= ctrl.rel_tol.ln() + total_ln {
            quiet += 1;
            if quiet >= PHI2_QUIET_TERMS {
                check_cancellation("humbert_phi2", &acc)?;
                return Ok(acc.finish());
            }
        } else {
            quiet = 0;
        }
        prev_ln = term_ln;

        let step = (b2 + kf) * y / ((c + kf) * (kf + 1.0));
        if step == 0.0 {
            // b2 is a non-positive integer: the outer sum terminates.
            check_cancellation("humbert_phi2", &acc)?;
            return Ok(acc.finish());
        }
        coef *= step;
        let mag = coef.abs();
        if !(1e-150..=1e150).contains(&mag) {
            coef_scale += mag.ln();
            coef = coef.signum();
        }
    }
    Err(Error::NonConvergence {
        what: "humbert_phi2",
        detail: format!(
            "Phi2({b1}, {b2}; {c}; {x}, {y}) not within rel_tol {} after {} terms",
            ctrl.rel_tol, ctrl.max_terms
        ),
    })
}

fn check_cancellation(what: &'static str, acc: &ScaledSum) -> Result<()> {
    let ratio = acc.cancellation_ratio();
    if ratio > CANCELLATION_LIMIT {
        return Err(Error::NonConvergence {
            what,
            detail: format!("alternating series lost too many digits (max term / result = {ratio:e})"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn ctrl() -> SeriesControl {
        SeriesControl::new(1e-15, 10_000).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn control_invariants() {
        assert!(SeriesControl::new(0.0, 10).is_err());
        assert!(SeriesControl::new(1.0, 10).is_err());
        assert!(SeriesControl::new(1e-8, 0).is_err());
        let c = SeriesControl::new(1e-8, 5).unwrap();
        assert_eq!((c.rel_tol(), c.max_terms()), (1e-8, 5));
    }

    #[test]
    fn kummer_elementary_values() {
        assert!(rel(kummer_1f1(2.0, 2.0, 1.0, &ctrl()).unwrap(), E) < 1e-14);
        assert_eq!(kummer_1f1(0.36, 1.39, 0.0, &ctrl()).unwrap(), 1.0);
        assert!(rel(kummer_1f1(1.0, 2.0, 1.0, &ctrl()).unwrap(), E - 1.0) < 1e-12);
        // 1F1(1; 2; x) = (e^x - 1) / x on the negative side too.
        let x: f64 = -45.0;
        let expect = (f64::exp(x) - 1.0) / x;
        assert!(rel(kummer_1f1(1.0, 2.0, x, &ctrl()).unwrap(), expect) < 1e-12);
    }

    #[test]
    fn kummer_polynomial_case() {
        // 1F1(-2; 1; x) = 1 - 2x + x^2 / 2 (Laguerre L_2)
        let x = 3.0;
        let v = kummer_1f1(-2.0, 1.0, x, &ctrl()).unwrap();
        assert!(rel(v, 1.0 - 2.0 * x + x * x / 2.0) < 1e-14);
    }

    #[test]
    fn kummer_log_domain_beyond_overflow() {
        // 1F1(a; a; x) = e^x, far past f64 range.
        let ln = ln_kummer_1f1(1.5, 1.5, 2000.0, &ctrl()).unwrap();
        assert!((ln - 2000.0).abs() < 1e-12);
        // 1F1(1; 2; x) = (e^x - 1)/x, ln ≈ x - ln x.
        let ln = ln_kummer_1f1(1.0, 2.0, 1500.0, &ctrl()).unwrap();
        assert!((ln - (1500.0 - 1500f64.ln())).abs() < 1e-10);
        assert!(matches!(kummer_1f1(1.0, 2.0, 1500.0, &ctrl()), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn kummer_domain_and_budget_errors() {
        assert!(matches!(kummer_1f1(1.0, 0.0, 1.0, &ctrl()), Err(Error::Domain(_))));
        assert!(matches!(kummer_1f1(1.0, -2.0, 1.0, &ctrl()), Err(Error::Domain(_))));
        assert!(matches!(kummer_1f1(1.0, 1.0, f64::NAN, &ctrl()), Err(Error::Domain(_))));
        let tight = SeriesControl::new(1e-10, 5).unwrap();
        assert!(matches!(kummer_1f1(1.0, 2.0, 10.0, &tight), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn kummer_reports_cancellation() {
        // 1F1(-1; 1; x) = 1 - x cancels exactly at its root.
        let r = kummer_1f1(-1.0, 1.0, 1.0, &ctrl());
        assert!(matches!(r, Err(Error::NonConvergence { .. })), "{r:?}");
        // Past the root the direct sum is fine.
        assert!((kummer_1f1(-1.0, 1.0, 3.0, &ctrl()).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn phi2_trivial_reductions() {
        assert_eq!(humbert_phi2(1.23, 0.55, 2.78, 0.0, 0.0, &ctrl()).unwrap(), 1.0);
        for x in [-7.0, -1.0, 0.5, 3.0] {
            let p = humbert_phi2(1.23, 0.55, 2.78, x, 0.0, &ctrl()).unwrap();
            let k = kummer_1f1(1.23, 2.78, x, &ctrl()).unwrap();
            assert!(rel(p, k) < 1e-12, "x = {x}");
        }
        // Φ2(b1, b2; c; x, x) = 1F1(b1 + b2; c; x)
        let p = humbert_phi2(0.7, 1.1, 2.5, -3.0, -3.0, &ctrl()).unwrap();
        let k = kummer_1f1(1.8, 2.5, -3.0, &ctrl()).unwrap();
        assert!(rel(p, k) < 1e-12);
    }

    #[test]
    fn phi2_domain_errors() {
        assert!(matches!(humbert_phi2(1.0, 1.0, 0.0, -1.0, -1.0, &ctrl()), Err(Error::Domain(_))));
        assert!(matches!(humbert_phi2(1.0, 1.0, 1.0, f64::INFINITY, -1.0, &ctrl()), Err(Error::Domain(_))));
    }

    #[test]
    fn phi2_nonpositive_integer_b2_terminates() {
        // b2 = 0: only k = 0 survives.
        let p = humbert_phi2(1.5, 0.0, 2.0, 1.0, 5.0, &ctrl()).unwrap();
        let k = kummer_1f1(1.5, 2.0, 1.0, &ctrl()).unwrap();
        assert!(rel(p, k) < 1e-14);
    }
}
