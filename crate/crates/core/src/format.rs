//! Fixed significant-digit number formatting for text outputs.

/// Formats `x` with `digits` significant digits.
///
/// Plain decimal notation for magnitudes in `[1e-5, 1e15)`, scientific
/// notation otherwise. Zero prints as `0` and non-finite values as `NaN`,
/// `inf` or `-inf`.
pub fn significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = digits - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(significant(2.0 * (-1f64).exp(), 12), "0.735758882343");
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(1234.5, 6), "1234.50");
        assert_eq!(significant(-0.5, 3), "-0.500");
        assert_eq!(significant(f64::NAN, 12), "NaN");
        assert_eq!(significant(f64::INFINITY, 12), "inf");
    }

    #[test]
    fn scientific_outside_decimal_range() {
        assert_eq!(significant(1.5e-7, 4), "1.500e-7");
        assert_eq!(significant(2.5e20, 3), "2.50e20");
    }

    #[test]
    fn round_trip_keeps_requested_precision() {
        for &x in &[0.123456789012345, 4.56789012345678, 1.0e-4 * 7.77777777777, 98765.4321] {
            let back: f64 = significant(x, 12).parse().unwrap();
            assert!((back - x).abs() / x < 1e-11);
        }
    }
}
