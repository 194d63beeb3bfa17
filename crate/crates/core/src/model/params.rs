use std::fmt;

use crate::error::{Error, Result};

/// Parameters of a κ-μ shadowed envelope.
///
/// * `kappa`: dominant-to-scattered power ratio (0 is the Nakagami limit)
/// * `mu`: number of multipath clusters, any positive real
/// * `m`: Nakagami shape of the shadowing of the dominant components
/// * `r_bar`: rms envelope level
/// * `rho`: correlation between the slopes of the multipath and the shadowed
///   dominant components
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    kappa: f64,
    mu: f64,
    m: f64,
    r_bar: f64,
    rho: f64,
}

impl ChannelParams {
    pub fn new(kappa: f64, mu: f64, m: f64, r_bar: f64, rho: f64) -> Result<Self> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::domain(what.to_string())) };
        check(kappa.is_finite() && kappa >= 0.0, "ChannelParams.kappa must be finite and >= 0")?;
        check(mu.is_finite() && mu > 0.0, "ChannelParams.mu must be finite and > 0")?;
        check(m.is_finite() && m > 0.0, "ChannelParams.m must be finite and > 0")?;
        check(r_bar.is_finite() && r_bar > 0.0, "ChannelParams.r_bar must be finite and > 0")?;
        check(rho.is_finite() && rho.abs() < 1.0, "ChannelParams.rho must satisfy |rho| < 1")?;
        check(kappa > 0.0 || rho == 0.0, "ChannelParams.rho must be 0 when kappa = 0")?;
        let p = ChannelParams { kappa, mu, m, r_bar, rho };
        if p.slope_denominator() <= 0.0 {
            return Err(Error::domain(format!(
                "ChannelParams slope denominator sqrt(m)(1 - rho^2) + 4 rho sqrt(mu kappa) must be > 0, got {:e}",
                p.slope_denominator()
            )));
        }
        Ok(p)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn r_bar(&self) -> f64 {
        self.r_bar
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.kappa, self.mu, self.m, self.r_bar, rho)
    }

    pub fn with_r_bar(&self, r_bar: f64) -> Result<Self> {
        Self::new(self.kappa, self.mu, self.m, r_bar, self.rho)
    }

    /// Power of the scattered waves per quadrature component, σ² = r̄² / (2μ(1 + κ)).
    pub fn scattered_variance(&self) -> f64 {
        self.r_bar * self.r_bar / (2.0 * self.mu * (1.0 + self.kappa))
    }

    /// Total dominant power d² = κ r̄² / (1 + κ), also the mean shadowed dominant power Ω.
    pub fn dominant_power(&self) -> f64 {
        self.kappa * self.r_bar * self.r_bar / (1.0 + self.kappa)
    }

    /// √m (1 - ρ²) + 4ρ √(μκ); the LCR is only defined while this is positive.
    pub fn slope_denominator(&self) -> f64 {
        self.m.sqrt() * (1.0 - self.rho * self.rho) + 4.0 * self.rho * (self.mu * self.kappa).sqrt()
    }
}

impl fmt::Display for ChannelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kappa={} mu={} m={} r_bar={} rho={}",
            self.kappa, self.mu, self.m, self.r_bar, self.rho
        )
    }
}

/// Maximum Doppler frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerParams {
    f_m: f64,
}

impl DopplerParams {
    pub fn new(f_m: f64) -> Result<Self> {
        if f_m.is_finite() && f_m > 0.0 {
            Ok(DopplerParams { f_m })
        } else {
            Err(Error::domain(format!("DopplerParams.f_m must be finite and > 0, got {f_m}")))
        }
    }

    pub fn f_m(&self) -> f64 {
        self.f_m
    }
}
