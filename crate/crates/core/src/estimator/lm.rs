//! Box-constrained Levenberg–Marquardt with a sine reparameterization.
//!
//! Each bounded coordinate x ∈ [lo, hi] is driven through
//! `x = lo + (hi − lo)(1 + sin z)/2`, so the inner problem in z is
//! unconstrained.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Bound {
    pub lo: f64,
    pub hi: f64,
}

impl Bound {
    fn to_x(self, z: f64) -> f64 {
        self.lo + (self.hi - self.lo) * 0.5 * (1.0 + z.sin())
    }

    fn to_z(self, x: f64) -> f64 {
        let u = (2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0).clamp(-1.0, 1.0);
        u.asin()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    pub cost: f64,
    pub initial_cost: f64,
    pub converged: bool,
}

const MAX_ITERATIONS: usize = 300;
const COST_RTOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-10;
const LAMBDA_MAX: f64 = 1e12;

fn sse(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes Σ residual(x)² over the box; `residual` returns `None` where
/// the model cannot be evaluated, which counts as an infinite cost.
pub(crate) fn minimize<F>(residual: F, x0: &[f64], bounds: &[Bound]) -> LmOutcome
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    let to_x = |z: &[f64]| -> Vec<f64> { z.iter().zip(bounds).map(|(&z, b)| b.to_x(z)).collect() };
    let eval = |z: &[f64]| residual(&to_x(z)).filter(|r| r.iter().all(|v| v.is_finite()));

    let mut z: Vec<f64> = x0.iter().zip(bounds).map(|(&x, b)| b.to_z(x)).collect();
    let Some(mut r) = eval(&z) else {
        return LmOutcome { x: to_x(&z), cost: f64::INFINITY, initial_cost: f64::INFINITY, converged: false };
    };
    let mut cost = sse(&r);
    let initial_cost = cost;
    let mut lambda = 1e-3;
    let mut converged = false;

    'outer: for _ in 0..MAX_ITERATIONS {
        // Forward-difference Jacobian in z.
        let mut jac = vec![vec![0.0; n]; r.len()];
        for j in 0..n {
            let h = 1e-7 * z[j].abs().max(1.0);
            let mut zp = z.clone();
            zp[j] += h;
            let Some(rp) = eval(&zp) else { continue };
            for (row, (a, b)) in jac.iter_mut().zip(rp.iter().zip(&r)) {
                row[j] = (a - b) / h;
            }
        }
        let mut a = vec![vec![0.0; n]; n];
        let mut g = vec![0.0; n];
        for (row, &ri) in jac.iter().zip(&r) {
            for i in 0..n {
                g[i] += row[i] * ri;
                for k in 0..n {
                    a[i][k] += row[i] * row[k];
                }
            }
        }
        let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm <= 1e-14 * cost.max(1e-300) {
            converged = true;
            break;
        }
        loop {
            let mut damped = a.clone();
            for i in 0..n {
                damped[i][i] += lambda * a[i][i].max(1e-12);
            }
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(step) = solve(damped, rhs) else {
                lambda *= 4.0;
                if lambda > LAMBDA_MAX {
                    converged = true;
                    break 'outer;
                }
                continue;
            };
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, b)| a + b).collect();
            match eval(&trial) {
                Some(rt) if sse(&rt) < cost => {
                    let new_cost = sse(&rt);
                    let small_step = step.iter().zip(&z).all(|(s, zi)| s.abs() <= STEP_TOL * zi.abs().max(1.0));
                    let small_gain = cost - new_cost <= COST_RTOL * cost;
                    z = trial;
                    r = rt;
                    cost = new_cost;
                    lambda = (lambda / 3.0).max(1e-12);
                    if small_step || small_gain {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    lambda *= 4.0;
                    if lambda > LAMBDA_MAX {
                        // No descent direction left at this resolution.
                        converged = true;
                        break 'outer;
                    }
                }
            }
        }
    }
    LmOutcome { x: to_x(&z), cost, initial_cost, converged }
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
