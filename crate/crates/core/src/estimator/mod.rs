//! Two-stage least-squares fitting: envelope PDF, then LCR.
//!
//! Stage 1 fits (κ, μ, m, r̄) to a histogram of the rms-normalized
//! amplitudes. Stage 2 fits (f_m, ρ) to the empirical crossing rate in
//! log space, holding the stage-1 shape fixed.

mod lm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lcr_normalized, pdf, threshold_grid, ChannelParams, DopplerParams};
use crate::simulator::{measure, EnvelopeTrace};

use lm::{minimize, Bound};

/// Fewer samples than this are rejected outright.
pub const MIN_SAMPLES: usize = 100;
pub const MIN_BINS: usize = 30;
pub const MAX_BINS: usize = 200;
/// A histogram with fewer occupied bins is degenerate.
pub const MIN_NONEMPTY_BINS: usize = 10;

/// Thresholds used in the LCR fit, dB relative to the rms.
pub const LCR_DB_FROM: f64 = -30.0;
pub const LCR_DB_TO: f64 = 6.0;
pub const LCR_DB_POINTS: usize = 37;
/// A threshold joins the LCR fit only with at least this many upcrossings.
pub const MIN_CROSSINGS: u64 = 10;
pub const MIN_LCR_THRESHOLDS: usize = 10;
/// Stage 2 is flagged as failed above this rms error in log10 LCR.
pub const MAX_RMS_LOG_ERROR: f64 = 0.3;

pub const RHO_MAX: f64 = 0.95;
const RHO_GRID_STEP: f64 = 0.01;
/// Relative cost difference below which two correlations are a tie.
const TIE_RTOL: f64 = 1e-9;

const KAPPA_BOUNDS: (f64, f64) = (1e-6, 50.0);
const MU_BOUNDS: (f64, f64) = (0.25, 16.0);
const M_BOUNDS: (f64, f64) = (0.05, 500.0);
const R_BAR_BOUNDS: (f64, f64) = (0.5, 2.0);

/// (κ, μ, m) corners of the multi-start list; r̄ starts at 1.
pub const START_CORNERS: [(f64, f64, f64); 8] = [
    (0.5, 0.5, 0.5),
    (0.5, 0.5, 5.0),
    (0.5, 3.0, 0.5),
    (0.5, 3.0, 5.0),
    (3.0, 0.5, 0.5),
    (3.0, 0.5, 5.0),
    (3.0, 3.0, 0.5),
    (3.0, 3.0, 5.0),
];

/// Positive amplitude samples together with their rms.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    amplitudes: Vec<f64>,
    rms: f64,
}

impl SampleSet {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "sample count must be >= {MIN_SAMPLES}, got {}",
                amplitudes.len()
            )));
        }
        if let Some(k) = amplitudes.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "amplitude {k} is {}, samples must be finite and > 0",
                amplitudes[k]
            )));
        }
        let rms = (amplitudes.iter().map(|a| a * a).sum::<f64>() / amplitudes.len() as f64).sqrt();
        Ok(SampleSet { amplitudes, rms })
    }

    /// Samples of a trace; exact zeros are dropped (they carry no shape information
    /// on a log-amplitude scale and violate the positivity invariant).
    pub fn from_trace(trace: &EnvelopeTrace) -> Result<Self> {
        Self::new(trace.samples().iter().copied().filter(|&a| a > 0.0).collect())
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn rms(&self) -> f64 {
        self.rms
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    fn normalized(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a / self.rms).collect()
    }
}

/// Density histogram with Freedman–Diaconis bin width.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub centers: Vec<f64>,
    pub density: Vec<f64>,
}

pub fn histogram(values: &[f64]) -> Result<Histogram> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if hi <= lo {
        return Err(Error::DegenerateHistogram(format!("all {n} samples equal {lo}")));
    }
    let quantile = |q: f64| {
        let pos = q * (n - 1) as f64;
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        if k + 1 < n { sorted[k] + frac * (sorted[k + 1] - sorted[k]) } else { sorted[k] }
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let fd_width = 2.0 * iqr / (n as f64).cbrt();
    let bins = if fd_width > 0.0 { ((hi - lo) / fd_width).ceil() as usize } else { MAX_BINS };
    let bins = bins.clamp(MIN_BINS, MAX_BINS);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &sorted {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let nonempty = counts.iter().filter(|&&c| c > 0).count();
    if nonempty < MIN_NONEMPTY_BINS {
        return Err(Error::DegenerateHistogram(format!(
            "{nonempty} nonempty bins, need at least {MIN_NONEMPTY_BINS}"
        )));
    }
    let scale = 1.0 / (n as f64 * width);
    Ok(Histogram {
        centers: (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect(),
        density: counts.iter().map(|&c| c as f64 * scale).collect(),
    })
}

/// Outcome of the PDF stage; `params` are in rms-normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct PdfFit {
    pub params: ChannelParams,
    pub residual: f64,
    pub n_bins: usize,
    pub converged: bool,
    /// Objective at each start point and after refinement from it.
    pub starts: Vec<StartOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub start: (f64, f64, f64, f64),
    pub initial_residual: f64,
    pub final_residual: f64,
    pub converged: bool,
}

fn pdf_residuals(h: &Histogram, kappa: f64, mu: f64, m: f64, r_bar: f64) -> Option<Vec<f64>> {
    let p = ChannelParams::new(kappa, mu, m, r_bar, 0.0).ok()?;
    h.centers.iter().zip(&h.density).map(|(&c, &d)| pdf(&p, c).ok().map(|f| d - f)).collect()
}

/// Method-of-moments seed: κ = 0.1 and m = 1 with μ matched to the
/// amount of fading Var(R²)/E[R²]².
fn moment_seed(normalized: &[f64]) -> (f64, f64, f64, f64) {
    let n = normalized.len() as f64;
    let mean = normalized.iter().map(|a| a * a).sum::<f64>() / n;
    let var = normalized.iter().map(|a| (a * a - mean).powi(2)).sum::<f64>() / n;
    let af = var / (mean * mean);
    let (kappa, m) = (0.1, 1.0);
    // AF = (1 + 2κ)/(μ(1+κ)²) + κ²/(m(1+κ)²)
    let k1 = (1.0 + kappa) * (1.0 + kappa);
    let denom = af - kappa * kappa / (m * k1);
    let mu = if denom > 0.0 { (1.0 + 2.0 * kappa) / (k1 * denom) } else { MU_BOUNDS.1 };
    (kappa, mu.clamp(0.3, 15.0), m, mean.sqrt())
}

/// Least-squares fit of the envelope PDF to the sample histogram.
///
/// Starts from `init` (if given), the eight [`START_CORNERS`] and a
/// method-of-moments seed; the best refined start wins, ties going to the
/// earliest start.
pub fn fit_pdf(s: &SampleSet, init: Option<&ChannelParams>) -> Result<PdfFit> {
    let normalized = s.normalized();
    let h = histogram(&normalized)?;
    let mut starts: Vec<(f64, f64, f64, f64)> = Vec::new();
    if let Some(p) = init {
        starts.push((p.kappa(), p.mu(), p.m(), p.r_bar() / s.rms()));
    }
    starts.extend(START_CORNERS.iter().map(|&(k, mu, m)| (k, mu, m, 1.0)));
    starts.push(moment_seed(&normalized));

    let bounds = [
        Bound { lo: KAPPA_BOUNDS.0.ln(), hi: KAPPA_BOUNDS.1.ln() },
        Bound { lo: MU_BOUNDS.0, hi: MU_BOUNDS.1 },
        Bound { lo: M_BOUNDS.0.ln(), hi: M_BOUNDS.1.ln() },
        Bound { lo: R_BAR_BOUNDS.0, hi: R_BAR_BOUNDS.1 },
    ];
    let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);
    let residual = |x: &[f64]| pdf_residuals(&h, x[0].exp(), x[1], x[2].exp(), x[3]);

    let mut outcomes = Vec::with_capacity(starts.len());
    let mut best: Option<(f64, usize, Vec<f64>, bool)> = None;
    for (i, &(k, mu, m, rb)) in starts.iter().enumerate() {
        let x0 = [
            clamp(k, KAPPA_BOUNDS).ln(),
            clamp(mu, MU_BOUNDS),
            clamp(m, M_BOUNDS).ln(),
            clamp(rb, R_BAR_BOUNDS),
        ];
        let out = minimize(residual, &x0, &bounds);
        outcomes.push(StartOutcome {
            start: (k, mu, m, rb),
            initial_residual: out.initial_cost,
            final_residual: out.cost,
            converged: out.converged,
        });
        if out.cost.is_finite() && best.as_ref().is_none_or(|b| out.cost < b.0) {
            best = Some((out.cost, i, out.x, out.converged));
        }
    }
    let (residual, _, x, converged) = best.ok_or_else(|| Error::NonConvergence {
        what: "pdf fit",
        detail: "the model could not be evaluated at any start point".into(),
    })?;
    let params = ChannelParams::new(x[0].exp(), x[1], x[2].exp(), x[3], 0.0)?;
    Ok(PdfFit { params, residual, n_bins: h.centers.len(), converged, starts: outcomes })
}

/// Outcome of the LCR stage.
#[derive(Debug, Clone, PartialEq)]
pub struct LcrFit {
    pub f_m_hat: f64,
    pub rho_hat: f64,
    /// Sum of squared log10 errors.
    pub residual: f64,
    pub n_thresholds: usize,
    /// False when the best fit still misses by more than [`MAX_RMS_LOG_ERROR`].
    pub converged: bool,
}

/// Fits (f_m, ρ) to the empirical LCR of `trace` with the shape of `p_hat`
/// held fixed. Thresholds are relative to the trace rms, so `p_hat` may be
/// given in either normalized or input units.
pub fn fit_lcr(trace: &EnvelopeTrace, p_hat: &ChannelParams) -> Result<LcrFit> {
    let grid = threshold_grid(LCR_DB_FROM, LCR_DB_TO, LCR_DB_POINTS)?;
    // Unit Doppler: lcr_normalized below is then crossings per second.
    let e = measure(trace, &DopplerParams::new(1.0)?, &grid)?;
    let rate: Vec<(f64, f64)> = grid
        .iter()
        .zip(&e.upcrossings)
        .zip(&e.lcr_normalized)
        .filter(|((_, &ups), _)| ups >= MIN_CROSSINGS)
        .map(|((&db, _), &per_second)| (10f64.powf(db / 20.0), per_second.log10()))
        .collect();
    if rate.len() < MIN_LCR_THRESHOLDS {
        return Err(Error::InsufficientCrossings(format!(
            "{} thresholds have >= {MIN_CROSSINGS} upcrossings, need at least {MIN_LCR_THRESHOLDS}",
            rate.len()
        )));
    }
    let unit = p_hat.with_rho(0.0)?.with_r_bar(1.0)?;
    let nyquist = trace.sample_rate_hz() / 2.0;

    // For fixed ρ the best log10 f_m is the mean offset between the curves.
    let profile = |rho: f64| -> Option<(f64, f64)> {
        let p = unit.with_rho(rho).ok()?;
        let mut diffs = Vec::with_capacity(rate.len());
        for &(t, log_rate) in &rate {
            let theory = lcr_normalized(&p, t).ok()?;
            if theory.is_nan() || theory <= 0.0 {
                return None;
            }
            diffs.push(log_rate - theory.log10());
        }
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let log_fm = mean.min(nyquist.log10());
        let sse = diffs.iter().map(|d| (d - log_fm).powi(2)).sum::<f64>();
        Some((sse, log_fm))
    };

    // ρ only scales the closed-form curve, so the cost is flat in ρ unless
    // the Nyquist cap binds; ties go to the smallest correlation.
    let rho_max = if unit.kappa() > 0.0 { RHO_MAX } else { 0.0 };
    let steps = (rho_max / RHO_GRID_STEP).round() as usize;
    let costs: Vec<(f64, f64)> = (0..=steps)
        .map(|k| (k as f64 * RHO_GRID_STEP).min(rho_max))
        .filter_map(|rho| profile(rho).map(|(sse, _)| (rho, sse)))
        .collect();
    let floor = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let &(mut rho, grid_cost) = costs.iter().find(|c| c.1 <= floor + TIE_RTOL * floor.max(1e-300)).ok_or_else(|| {
        Error::NonConvergence { what: "lcr fit", detail: "theoretical LCR could not be evaluated for any correlation".into() }
    })?;
    // Golden-section refinement within one grid step.
    if rho_max > 0.0 {
        let (mut a, mut b) = ((rho - RHO_GRID_STEP).max(0.0), (rho + RHO_GRID_STEP).min(rho_max));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let cost = |r: f64| profile(r).map_or(f64::INFINITY, |v| v.0);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (cost(c), cost(d));
        for _ in 0..40 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = cost(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = cost(d);
            }
        }
        let mid = 0.5 * (a + b);
        if cost(mid) < grid_cost - TIE_RTOL * grid_cost {
            rho = mid;
        }
    }
    let (residual, log_fm) = profile(rho).expect("evaluated during the search");
    let rms_err = (residual / rate.len() as f64).sqrt();
    Ok(LcrFit {
        f_m_hat: 10f64.powf(log_fm),
        rho_hat: rho,
        residual,
        n_thresholds: rate.len(),
        converged: rms_err <= MAX_RMS_LOG_ERROR,
    })
}

/// Serialized fit result; field names follow the usual table of
/// κ-μ shadowed estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kappa_hat: f64,
    pub mu_hat: f64,
    /// In the units of the input amplitudes.
    pub r_bar_hat: f64,
    pub m_hat: f64,
    /// Absent when the LCR stage failed.
    pub f_m_hat: Option<f64>,
    pub rho_hat: Option<f64>,
    pub pdf_residual: f64,
    pub lcr_residual: Option<f64>,
    pub n_bins: usize,
    pub lcr_thresholds: usize,
    pub pdf_converged: bool,
    pub lcr_converged: bool,
    pub rms: f64,
    pub n_samples: usize,
    /// Why the LCR stage produced no estimate.
    pub lcr_error: Option<String>,
}

impl FitReport {
    /// Estimated parameters in input units (ρ = 0 if stage 2 failed).
    pub fn params_hat(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.kappa_hat, self.mu_hat, self.m_hat, self.r_bar_hat, self.rho_hat.unwrap_or(0.0))
    }

    /// Both stages produced an estimate and met their convergence criteria.
    pub fn is_complete(&self) -> bool {
        self.f_m_hat.is_some() && self.pdf_converged && self.lcr_converged
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Runs both stages on a trace. A stage-1 failure is an error; a stage-2
/// failure is reported inside the returned report.
pub fn fit_trace(trace: &EnvelopeTrace) -> Result<FitReport> {
    let samples = SampleSet::from_trace(trace)?;
    let stage1 = fit_pdf(&samples, None)?;
    let p = &stage1.params;
    let mut report = FitReport {
        kappa_hat: p.kappa(),
        mu_hat: p.mu(),
        r_bar_hat: p.r_bar() * samples.rms(),
        m_hat: p.m(),
        f_m_hat: None,
        rho_hat: None,
        pdf_residual: stage1.residual,
        lcr_residual: None,
        n_bins: stage1.n_bins,
        lcr_thresholds: 0,
        pdf_converged: stage1.converged,
        lcr_converged: false,
        rms: samples.rms(),
        n_samples: samples.len(),
        lcr_error: None,
    };
    match fit_lcr(trace, p) {
        Ok(s2) => {
            report.f_m_hat = Some(s2.f_m_hat);
            report.rho_hat = Some(s2.rho_hat);
            report.lcr_residual = Some(s2.residual);
            report.lcr_thresholds = s2.n_thresholds;
            report.lcr_converged = s2.converged;
            if !s2.converged {
                report.lcr_error = Some(format!(
                    "rms log10 LCR error {:.3} exceeds {MAX_RMS_LOG_ERROR}",
                    (s2.residual / s2.n_thresholds as f64).sqrt()
                ));
            }
        }
        Err(e) => report.lcr_error = Some(e.to_string()),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_is_a_density() {
        let v: Vec<f64> = (0..5000).map(|k| ((k as f64 + 0.5) / 5000.0).sqrt()).collect();
        let h = histogram(&v).unwrap();
        assert!((MIN_BINS..=MAX_BINS).contains(&h.centers.len()));
        let width = h.centers[1] - h.centers[0];
        let mass: f64 = h.density.iter().sum::<f64>() * width;
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let s = SampleSet::new(vec![0.7; 500]).unwrap();
        assert!(matches!(fit_pdf(&s, None), Err(Error::DegenerateHistogram(_))));
    }

    #[test]
    fn too_few_or_invalid_samples() {
        let e = SampleSet::new(vec![1.0; 10]).unwrap_err();
        assert!(e.to_string().contains("sample count"), "{e}");
        let mut v = vec![1.0; 200];
        v[3] = -1.0;
        assert!(SampleSet::new(v).is_err());
    }

    #[test]
    fn moment_seed_for_rayleigh_is_near_one_cluster() {
        // Rayleigh power is exponential: AF = 1.
        let v: Vec<f64> = (1..=20000).map(|k| (-(1.0 - k as f64 / 20001.0).ln()).sqrt()).collect();
        let (_, mu, _, _) = moment_seed(&v);
        assert!((mu - 1.0).abs() < 0.15, "{mu}");
    }
}
