//! One-class support vector machine with an RBF kernel.
//!
//! Solves the nu-parameterized dual
//!
//! ```text
//! minimize    (1/2) a' K a
//! subject to  0 <= a_i <= 1/(nu * n),   sum a_i = 1
//! ```
//!
//! with sequential minimal optimization on the most violating pair. The
//! decision function `f(x) = sum_i a_i k(x_i, x) - rho` is negative for
//! points outside the learned support of the data; `nu` upper-bounds the
//! training outlier fraction and lower-bounds the support-vector fraction.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OcsvmParams {
    /// Target outlier fraction bound, in (0, 1].
    pub nu: f64,
    /// RBF width; `None` picks 1 / (d * var(X)) from the data.
    pub gamma: Option<f64>,
    /// KKT violation below which the solver stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OcsvmParams {
    fn default() -> Self {
        OcsvmParams {
            nu: 0.3,
            gamma: None,
            tol: 1e-6,
            max_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OneClassSvm {
    /// Training points with nonzero dual weight.
    support: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    rho: f64,
    gamma: f64,
    objective_trace: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * sq).exp()
}

/// Variance of all matrix entries pooled together (the "scale" heuristic
/// denominator).
fn pooled_variance(points: &[Vec<f64>]) -> f64 {
    let count = (points.len() * points[0].len()) as f64;
    let mean: f64 = points.iter().flatten().sum::<f64>() / count;
    points
        .iter()
        .flatten()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / count
}

impl OneClassSvm {
    pub fn fit(points: &[Vec<f64>], params: &OcsvmParams) -> Result<OneClassSvm> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "one-class SVM needs at least 2 points, got {n}"
            )));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput("ragged or empty feature matrix".into()));
        }
        if !(params.nu > 0.0 && params.nu <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "nu must be in (0, 1], got {}",
                params.nu
            )));
        }

        let gamma = match params.gamma {
            Some(g) if g > 0.0 => g,
            Some(g) => {
                return Err(Error::InvalidInput(format!("gamma must be positive, got {g}")));
            }
            None => {
                let var = pooled_variance(points);
                if var > 0.0 {
                    1.0 / (d as f64 * var)
                } else {
                    1.0
                }
            }
        };

        let kernel: Vec<Vec<f64>> = points
            .iter()
            .map(|a| points.iter().map(|b| rbf(a, b, gamma)).collect())
            .collect();

        // Feasible start in libsvm's style: the first floor(nu*n) points get
        // the box bound, the next one takes the remainder.
        let c = 1.0 / (params.nu * n as f64);
        let mut alpha = vec![0.0; n];
        let full = (params.nu * n as f64).floor() as usize;
        let mut remaining = 1.0;
        for a in alpha.iter_mut().take(full.min(n)) {
            *a = c;
            remaining -= c;
        }
        if remaining > 0.0 {
            alpha[full.min(n - 1)] += remaining;
        }

        // Gradient of the objective: g = K a.
        let mut grad: Vec<f64> = (0..n)
            .map(|i| kernel[i].iter().zip(&alpha).map(|(k, a)| k * a).sum())
            .collect();
        let mut objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();
        let mut objective_trace = vec![objective];

        let mut converged = false;
        let mut violation = f64::INFINITY;
        for _ in 0..params.max_iters {
            // Most violating pair: shrink the largest gradient with room to
            // give, grow the smallest gradient with room to take.
            let mut up: Option<usize> = None; // alpha_i > 0, maximal gradient
            let mut down: Option<usize> = None; // alpha_j < C, minimal gradient
            for i in 0..n {
                if alpha[i] > 0.0 && up.is_none_or(|u| grad[i] > grad[u]) {
                    up = Some(i);
                }
                if alpha[i] < c && down.is_none_or(|v| grad[i] < grad[v]) {
                    down = Some(i);
                }
            }
            let (i, j) = match (up, down) {
                (Some(i), Some(j)) if i != j => (i, j),
                _ => {
                    converged = true;
                    break;
                }
            };
            violation = grad[i] - grad[j];
            if violation <= params.tol {
                converged = true;
                break;
            }

            // Move weight from i to j along the equality constraint.
            let eta = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            let max_step = alpha[i].min(c - alpha[j]);
            let step = if eta > 0.0 {
                (violation / eta).min(max_step)
            } else {
                max_step
            };
            // Objective change along the pair direction (recorded before the
            // gradient moves): always a descent step.
            objective += -step * violation + 0.5 * step * step * eta;
            objective_trace.push(objective);

            alpha[i] -= step;
            alpha[j] += step;
            for k in 0..n {
                grad[k] += step * (kernel[j][k] - kernel[i][k]);
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                violation,
                iterations: params.max_iters,
            });
        }

        // rho anchors the margin. Taking the smallest gradient among points
        // that could still absorb weight (alpha < C) puts every margin
        // candidate at f >= 0, so only bound points -- at most floor(nu*n)
        // of them -- can score negative. That keeps the nu bound on the
        // flagged fraction deterministic instead of letting stop-tolerance
        // noise flip points sitting exactly on the margin.
        let margin = 1e-12 * c.max(1.0);
        let down_min = (0..n)
            .filter(|&i| alpha[i] < c - margin)
            .map(|i| grad[i])
            .fold(f64::INFINITY, f64::min);
        let rho = if down_min.is_finite() {
            down_min
        } else {
            // nu = 1 pins every alpha at the bound: treat the whole training
            // set as boundary-or-outside.
            grad.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };

        let (support, alpha): (Vec<Vec<f64>>, Vec<f64>) = points
            .iter()
            .zip(&alpha)
            .filter(|(_, a)| **a > margin)
            .map(|(p, a)| (p.clone(), *a))
            .unzip();

        Ok(OneClassSvm {
            support,
            alpha,
            rho,
            gamma,
            objective_trace,
        })
    }

    pub fn n_support(&self) -> usize {
        self.support.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Dual objective value after each SMO step; non-increasing.
    pub fn objective_trace(&self) -> &[f64] {
        &self.objective_trace
    }

    /// Signed decision value; negative means outside the learned support.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let k: f64 = self
            .support
            .iter()
            .zip(&self.alpha)
            .map(|(s, a)| a * rbf(s, x, self.gamma))
            .sum();
        k - self.rho
    }

    /// Outlier scores aligned with the other detectors: higher = more
    /// anomalous (the negated decision value).
    pub fn score_samples(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| -self.decision(x)).collect()
    }
}
