//! Robust covariance ("elliptic envelope") outlier scores.
//!
//! Location and scatter are estimated with a minimum-covariance-determinant
//! search: many small random subsets are inflated by concentration steps
//! (refit on the `h` points with smallest Mahalanobis distance) until the
//! determinant stops shrinking, and the lowest-determinant fit wins. Points
//! are scored by squared Mahalanobis distance to that robust center, which
//! a handful of far-away days cannot drag around.

use crate::error::{Error, Result};
use crate::numerics::{sym_eigen, Rng, SymMatrix};

#[derive(Debug, Clone)]
pub struct EnvelopeParams {
    /// Random (d+1)-subset restarts of the determinant search.
    pub n_starts: usize,
    /// Concentration-step cap per restart.
    pub max_c_steps: usize,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams {
            n_starts: 30,
            max_c_steps: 25,
        }
    }
}

/// Symmetric-matrix inverse and log-determinant via eigendecomposition.
/// Fails on non-positive eigenvalues (callers add a ridge first).
fn inv_logdet(cov: &SymMatrix) -> Result<(Vec<f64>, f64)> {
    let d = cov.n();
    let (values, vectors) = sym_eigen(cov);
    if values.iter().any(|v| *v <= 0.0) {
        return Err(Error::Degenerate(
            "covariance is not positive definite".into(),
        ));
    }
    let logdet = values.iter().map(|v| v.ln()).sum();
    let mut inv = vec![0.0; d * d];
    for (lam, vec) in values.iter().zip(&vectors) {
        let w = 1.0 / lam;
        for i in 0..d {
            for j in 0..d {
                inv[i * d + j] += w * vec[i] * vec[j];
            }
        }
    }
    Ok((inv, logdet))
}

/// Mean and (population) covariance of the chosen rows, with `ridge` added
/// to the diagonal.
fn moments(points: &[Vec<f64>], idx: &[usize], ridge: f64) -> (Vec<f64>, SymMatrix) {
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    for &i in idx {
        for (m, x) in mean.iter_mut().zip(&points[i]) {
            *m += x;
        }
    }
    let inv_n = 1.0 / idx.len() as f64;
    for m in &mut mean {
        *m *= inv_n;
    }
    let mut cov = SymMatrix::zeros(d);
    for a in 0..d {
        for b in a..d {
            let mut s = 0.0;
            for &i in idx {
                s += (points[i][a] - mean[a]) * (points[i][b] - mean[b]);
            }
            let mut v = s * inv_n;
            if a == b {
                v += ridge;
            }
            cov.set(a, b, v);
        }
    }
    (mean, cov)
}

#[derive(Debug, Clone)]
pub struct EllipticEnvelope {
    mean: Vec<f64>,
    cov_inv: Vec<f64>,
    dim: usize,
    det_trace: Vec<f64>,
}

impl EllipticEnvelope {
    /// Fits the robust location/scatter estimate. Needs `n >= d + 2` rows
    /// so that the (d+1)-subsets leave something to concentrate on.
    pub fn fit(points: &[Vec<f64>], params: &EnvelopeParams, rng: &mut Rng) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidInput("no points".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput("ragged feature matrix".into()));
        }
        if n < d + 2 {
            return Err(Error::InvalidInput(format!(
                "robust covariance needs at least d + 2 = {} points, got {n}",
                d + 2
            )));
        }
        if params.n_starts == 0 {
            return Err(Error::InvalidInput("n_starts must be positive".into()));
        }

        // One fixed ridge for the whole fit keeps determinants comparable
        // across subsets and guards rank-deficient ones.
        let all: Vec<usize> = (0..n).collect();
        let (_, full_cov) = moments(points, &all, 0.0);
        let ridge = (1e-6 * full_cov.trace() / d as f64).max(1e-12);

        let h = (n + d + 1) / 2;
        let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> = None;

        for start in 0..params.n_starts {
            let mut local = rng.child(start as u64);
            let seed_idx = local.sample_indices(n, d + 1);
            let (mut mean, mut cov) = moments(points, &seed_idx, ridge);
            let (mut inv, _) = inv_logdet(&cov)?;

            let mut trace = Vec::new();
            let mut prev_logdet = f64::INFINITY;
            for _ in 0..params.max_c_steps {
                // Concentrate: keep the h points closest under the current fit.
                let dists: Vec<f64> = (0..n)
                    .map(|i| mahalanobis_sq_raw(&points[i], &mean, &inv, d))
                    .collect();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    dists[a].partial_cmp(&dists[b]).unwrap().then(a.cmp(&b))
                });
                order.truncate(h);

                let (new_mean, new_cov) = moments(points, &order, ridge);
                let (new_inv, logdet) = inv_logdet(&new_cov)?;
                if logdet >= prev_logdet - 1e-12 {
                    break;
                }
                trace.push(logdet);
                prev_logdet = logdet;
                mean = new_mean;
                cov = new_cov;
                inv = new_inv;
            }
            let _ = cov;

            if best.as_ref().is_none_or(|(b, ..)| prev_logdet < *b) {
                best = Some((prev_logdet, mean, inv, trace));
            }
        }

        let (_, mean, cov_inv, det_trace) = best.expect("at least one start ran");
        Ok(EllipticEnvelope {
            mean,
            cov_inv,
            dim: d,
            det_trace,
        })
    }

    /// Builds an envelope from explicit moments (no robust search).
    pub fn from_moments(mean: Vec<f64>, cov: &SymMatrix) -> Result<Self> {
        if mean.len() != cov.n() {
            return Err(Error::InvalidInput(format!(
                "mean has {} entries but covariance is {}x{}",
                mean.len(),
                cov.n(),
                cov.n()
            )));
        }
        let (cov_inv, logdet) = inv_logdet(cov)?;
        Ok(EllipticEnvelope {
            dim: mean.len(),
            mean,
            cov_inv,
            det_trace: vec![logdet],
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Log-determinant after each adopted concentration step of the winning
    /// restart; non-increasing by construction.
    pub fn det_trace(&self) -> &[f64] {
        &self.det_trace
    }

    /// Squared Mahalanobis distance of `x` from the robust center.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        mahalanobis_sq_raw(x, &self.mean, &self.cov_inv, self.dim)
    }

    /// Outlier scores: larger means farther from the routine mass.
    pub fn score_samples(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.mahalanobis_sq(x)).collect()
    }
}

fn mahalanobis_sq_raw(x: &[f64], mean: &[f64], cov_inv: &[f64], d: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        let vi = x[i] - mean[i];
        for j in 0..d {
            acc += vi * cov_inv[i * d + j] * (x[j] - mean[j]);
        }
    }
    acc
}
