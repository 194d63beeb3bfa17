//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Subinterval budget before giving up.
pub const MAX_SUBINTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[lo, hi]` to estimated relative error `rel_tol`.
pub fn integrate_adaptive<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_adaptive_fallible(|x| Ok(f(x)), lo, hi, rel_tol)
}

/// As [`integrate_adaptive`] for integrands that can fail; the first
/// integrand error is returned unchanged.
pub fn integrate_adaptive_fallible<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("integration requires finite lo < hi, got [{lo}, {hi}]")));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::domain(format!("integration rel_tol must lie in (0, 1), got {rel_tol}")));
    }

    let first = kronrod_segment(&mut f, lo, hi)?;
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while error > rel_tol * total.abs() {
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::Quadrature { intervals: heap.len(), error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::Quadrature { intervals: heap.len() + 1, error });
        }
        let left = kronrod_segment(&mut f, worst.lo, mid)?;
        let right = kronrod_segment(&mut f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so the running totals do not drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

fn kronrod_segment<F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("integrand is not finite at x = {x}")))
        }
    };

    let fc = eval(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_polynomial() {
        let v = integrate_adaptive(|_| 1.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        let v = integrate_adaptive(|x| x.powi(5), -1.0, 2.0, 1e-12).unwrap();
        assert!((v - (64.0 - 1.0) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_density_has_unit_mass() {
        let v = integrate_adaptive(|x| 2.0 * x * (-x * x).exp(), 0.0, 40.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫0^1 x^(-1/2) dx = 2
        let v = integrate_adaptive(|x| if x == 0.0 { 0.0 } else { x.powf(-0.5) }, 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn bad_interval_and_nonfinite_integrand() {
        assert!(matches!(integrate_adaptive(|x| x, 1.0, 1.0, 1e-8), Err(Error::Domain(_))));
        assert!(matches!(integrate_adaptive(|x| x, 0.0, f64::INFINITY, 1e-8), Err(Error::Domain(_))));
        assert!(matches!(integrate_adaptive(|_| f64::NAN, 0.0, 1.0, 1e-8), Err(Error::Domain(_))));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // sin(1/x) oscillates without bound near 0.
        let r = integrate_adaptive(|x| (1.0 / x).sin() / x, 1e-9, 1.0, 1e-14);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
