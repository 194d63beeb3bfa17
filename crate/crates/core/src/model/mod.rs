//! Closed-form κ-μ shadowed envelope statistics.

mod closed_form;
mod params;

use std::fmt;
use std::str::FromStr;

pub use closed_form::{
    afd_closed_form, afd_closed_form_uncorrelated, afd_normalized, cdf, cdf_by_quadrature, cdf_closed_form,
    lcr_normalized, lcr_normalized_uncorrelated, mean_positive_slope, pdf, slope_variance_multipath,
    slope_variance_shadow, CDF_QUADRATURE_TOL,
};
pub use params::{ChannelParams, DopplerParams};

use crate::error::{Error, Result};

/// Stand-in for m = ∞ (no shadowing of the dominant components).
pub const LARGE_M: f64 = 1e6;

/// Stand-in for κ → 0 in the special-case mappings.
pub const KAPPA_LIMIT: f64 = 1e-9;

/// Classical fading models contained in the κ-μ shadowed family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialCase {
    Rayleigh,
    /// Rice with factor `k`.
    Rice { k: f64 },
    /// Nakagami-m with shape `m`.
    Nakagami { m: f64 },
    KappaMu { kappa: f64, mu: f64 },
}

/// Unit-rms, uncorrelated parameters that reproduce a classical model.
pub fn special_case_params(kind: SpecialCase) -> Result<ChannelParams> {
    let positive = |v: f64, name: &str| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!("{name} must be finite and > 0, got {v}")))
        }
    };
    match kind {
        SpecialCase::Rayleigh => ChannelParams::new(KAPPA_LIMIT, 1.0, LARGE_M, 1.0, 0.0),
        SpecialCase::Rice { k } => ChannelParams::new(positive(k, "Rice k")?, 1.0, LARGE_M, 1.0, 0.0),
        SpecialCase::Nakagami { m } => ChannelParams::new(KAPPA_LIMIT, positive(m, "Nakagami m")?, LARGE_M, 1.0, 0.0),
        SpecialCase::KappaMu { kappa, mu } => {
            ChannelParams::new(positive(kappa, "kappa-mu kappa")?, positive(mu, "kappa-mu mu")?, LARGE_M, 1.0, 0.0)
        }
    }
}

/// Which statistic a curve holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Pdf,
    Cdf,
    Lcr,
    Afd,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [Statistic::Pdf, Statistic::Cdf, Statistic::Lcr, Statistic::Afd];

    /// Evaluates the statistic at amplitude `r`. LCR and AFD are normalized by f_m.
    pub fn evaluate(self, p: &ChannelParams, r: f64) -> Result<f64> {
        match self {
            Statistic::Pdf => pdf(p, r),
            Statistic::Cdf => cdf(p, r),
            Statistic::Lcr => lcr_normalized(p, r),
            Statistic::Afd => afd_normalized(p, r),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Pdf => "pdf",
            Statistic::Cdf => "cdf",
            Statistic::Lcr => "lcr",
            Statistic::Afd => "afd",
        })
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pdf" => Ok(Statistic::Pdf),
            "cdf" => Ok(Statistic::Cdf),
            "lcr" => Ok(Statistic::Lcr),
            "afd" => Ok(Statistic::Afd),
            other => Err(Error::domain(format!("unknown statistic '{other}', expected pdf|cdf|lcr|afd"))),
        }
    }
}

/// A grid point whose value could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct MissingPoint {
    pub index: usize,
    pub reason: String,
}

/// A statistic tabulated over thresholds 20 log10(r / r̄) in dB.
///
/// Failed points hold `NaN` in `values` and are listed in `missing`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatCurve {
    pub statistic: Statistic,
    pub thresholds_db: Vec<f64>,
    pub values: Vec<f64>,
    pub missing: Vec<MissingPoint>,
}

/// `points` evenly spaced thresholds from `from_db` to `to_db` inclusive.
pub fn threshold_grid(from_db: f64, to_db: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::domain(format!("threshold grid needs at least 2 points, got {points}")));
    }
    if !(from_db.is_finite() && to_db.is_finite() && from_db < to_db) {
        return Err(Error::domain(format!("threshold grid needs finite db-from < db-to, got {from_db}, {to_db}")));
    }
    let step = (to_db - from_db) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { to_db } else { from_db + step * i as f64 })
        .collect())
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("threshold grid is empty"));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::domain("threshold grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("threshold grid must be strictly increasing"));
    }
    Ok(())
}

/// Evaluates `stat` at r = r̄ 10^(dB/20) for every threshold in `grid`.
pub fn curve(p: &ChannelParams, stat: Statistic, grid: &[f64]) -> Result<StatCurve> {
    validate_grid(grid)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut missing = Vec::new();
    for (index, &db) in grid.iter().enumerate() {
        let r = p.r_bar() * 10f64.powf(db / 20.0);
        match stat.evaluate(p, r) {
            Ok(v) => values.push(v),
            Err(e) => {
                values.push(f64::NAN);
                missing.push(MissingPoint { index, reason: e.to_string() });
            }
        }
    }
    Ok(StatCurve { statistic: stat, thresholds_db: grid.to_vec(), values, missing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_case_mappings() {
        let p = special_case_params(SpecialCase::Nakagami { m: 2.7 }).unwrap();
        assert_eq!((p.kappa(), p.mu(), p.m(), p.rho()), (1e-9, 2.7, 1e6, 0.0));
        let p = special_case_params(SpecialCase::Rice { k: 3.0 }).unwrap();
        assert_eq!((p.kappa(), p.mu(), p.m(), p.rho()), (3.0, 1.0, 1e6, 0.0));
        let p = special_case_params(SpecialCase::KappaMu { kappa: 0.5, mu: 2.0 }).unwrap();
        assert_eq!((p.kappa(), p.mu(), p.m(), p.rho()), (0.5, 2.0, 1e6, 0.0));
        let p = special_case_params(SpecialCase::Rayleigh).unwrap();
        assert_eq!((p.kappa(), p.mu(), p.m()), (KAPPA_LIMIT, 1.0, LARGE_M));
        assert!(special_case_params(SpecialCase::Rice { k: 0.0 }).is_err());
        assert!(special_case_params(SpecialCase::Nakagami { m: -1.0 }).is_err());
        assert!(special_case_params(SpecialCase::KappaMu { kappa: 1.0, mu: 0.0 }).is_err());
    }

    #[test]
    fn statistic_parsing() {
        for s in Statistic::ALL {
            assert_eq!(s.to_string().parse::<Statistic>().unwrap(), s);
        }
        assert_eq!("LCR".parse::<Statistic>().unwrap(), Statistic::Lcr);
        assert!("snr".parse::<Statistic>().is_err());
    }

    #[test]
    fn grid_construction() {
        let g = threshold_grid(-30.0, 10.0, 101).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[100]), (-30.0, 10.0));
        assert!((g[1] - g[0] - 0.4).abs() < 1e-12);
        assert!(threshold_grid(0.0, 1.0, 1).is_err());
        assert!(threshold_grid(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn curve_rejects_unsorted_grid() {
        let p = special_case_params(SpecialCase::Rayleigh).unwrap();
        assert!(curve(&p, Statistic::Pdf, &[0.0, 0.0]).is_err());
        assert!(curve(&p, Statistic::Pdf, &[]).is_err());
    }

    #[test]
    fn rayleigh_lcr_curve_at_zero_db() {
        let p = ChannelParams::new(0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let c = curve(&p, Statistic::Lcr, &[0.0]).unwrap();
        assert!((c.values[0] - 0.922_137_008_895_789).abs() < 1e-12);
        assert!(c.missing.is_empty());
    }

    #[test]
    fn cdf_curve_is_nondecreasing() {
        let p = ChannelParams::new(1.39, 1.78, 0.55, 1.14, 0.29).unwrap();
        let g = threshold_grid(-40.0, 10.0, 201).unwrap();
        let c = curve(&p, Statistic::Cdf, &g).unwrap();
        assert!(c.missing.is_empty());
        assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn table_row_lcr_curve_is_finite() {
        let p = ChannelParams::new(1.39, 1.78, 0.55, 1.14, 0.29).unwrap();
        let g = threshold_grid(-30.0, 10.0, 101).unwrap();
        let c = curve(&p, Statistic::Lcr, &g).unwrap();
        assert!(c.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}
