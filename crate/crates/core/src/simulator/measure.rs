use crate::error::{Error, Result};
use crate::model::{validate_grid, DopplerParams};

use super::EnvelopeTrace;

/// Crossing counts and derived normalized LCR/AFD over a threshold grid.
///
/// Thresholds are in dB relative to the trace rms.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSecondOrder {
    pub thresholds_db: Vec<f64>,
    /// Absolute amplitude of each threshold.
    pub levels: Vec<f64>,
    pub upcrossings: Vec<u64>,
    pub time_below_s: Vec<f64>,
    pub n_fades: Vec<u64>,
    pub lcr_normalized: Vec<f64>,
    pub afd_normalized: Vec<f64>,
    pub duration_s: f64,
    pub rms: f64,
}

/// Counts crossings of `trace` at each threshold of `grid`.
///
/// An upcrossing is a sample pair with `s_k < L <= s_{k+1}`. Time below
/// and the fade count use maximal runs of samples below `L`; a run still
/// open at the end of the record is left out of both.
pub fn measure(trace: &EnvelopeTrace, d: &DopplerParams, grid: &[f64]) -> Result<EmpiricalSecondOrder> {
    if grid.is_empty() {
        return Err(Error::domain("threshold grid is empty"));
    }
    validate_grid(grid)?;
    let s = trace.samples();
    let dt = 1.0 / trace.sample_rate_hz();
    let duration = trace.duration_s();
    let rms = trace.rms();
    let f_m = d.f_m();

    let mut out = EmpiricalSecondOrder {
        thresholds_db: grid.to_vec(),
        levels: Vec::with_capacity(grid.len()),
        upcrossings: Vec::with_capacity(grid.len()),
        time_below_s: Vec::with_capacity(grid.len()),
        n_fades: Vec::with_capacity(grid.len()),
        lcr_normalized: Vec::with_capacity(grid.len()),
        afd_normalized: Vec::with_capacity(grid.len()),
        duration_s: duration,
        rms,
    };
    for &db in grid {
        let level = rms * 10f64.powf(db / 20.0);
        let mut ups = 0u64;
        let mut fades = 0u64;
        let mut closed_below = 0u64;
        let mut run = 0u64;
        for (k, &v) in s.iter().enumerate() {
            if v < level {
                run += 1;
            } else if run > 0 {
                fades += 1;
                closed_below += run;
                run = 0;
            }
            if k + 1 < s.len() && v < level && level <= s[k + 1] {
                ups += 1;
            }
        }
        let time_below = closed_below as f64 * dt;
        out.levels.push(level);
        out.upcrossings.push(ups);
        out.n_fades.push(fades);
        out.time_below_s.push(time_below);
        out.lcr_normalized.push(ups as f64 / (duration * f_m));
        out.afd_normalized.push(if fades == 0 { 0.0 } else { time_below / fades as f64 * f_m });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(samples: Vec<f64>) -> EnvelopeTrace {
        EnvelopeTrace::from_samples(samples, 100.0).unwrap()
    }

    #[test]
    fn constant_trace_has_no_crossings() {
        let e = measure(&trace(vec![1.0; 500]), &DopplerParams::new(1.0).unwrap(), &[-3.0]).unwrap();
        assert_eq!((e.upcrossings[0], e.n_fades[0], e.time_below_s[0]), (0, 0, 0.0));
        assert_eq!(e.afd_normalized[0], 0.0);
    }

    #[test]
    fn triangle_wave_crosses_once_per_period() {
        // Ten periods of 1.8 → 0.2 → 1.8.
        let mut s = Vec::new();
        for _ in 0..10 {
            s.extend((0..20).map(|k| 1.8 - 0.08 * k as f64));
            s.extend((0..20).map(|k| 0.2 + 0.08 * k as f64));
        }
        s.push(1.8);
        let t = trace(s);
        let db = 20.0 * (1.0 / t.rms()).log10();
        let e = measure(&t, &DopplerParams::new(1.0).unwrap(), &[db]).unwrap();
        assert_eq!(e.upcrossings[0], 10);
        assert_eq!(e.n_fades[0], 10);
    }

    #[test]
    fn open_final_run_is_excluded() {
        let t = trace(vec![2.0, 0.5, 0.5, 2.0, 0.5, 0.5, 0.5]);
        let level_db = 20.0 * (1.0 / t.rms()).log10();
        let e = measure(&t, &DopplerParams::new(1.0).unwrap(), &[level_db]).unwrap();
        assert_eq!((e.upcrossings[0], e.n_fades[0]), (1, 1));
        assert!((e.time_below_s[0] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn empty_or_unsorted_grid() {
        let t = trace(vec![1.0; 10]);
        let d = DopplerParams::new(1.0).unwrap();
        assert!(measure(&t, &d, &[]).is_err());
        assert!(measure(&t, &d, &[0.0, -1.0]).is_err());
    }
}
