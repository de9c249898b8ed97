//! Principal component analysis via the Jacobi eigensolver.
//!
//! For wide data (more features than rows, the usual case for day signatures
//! with high-dimensional descriptor blocks) the covariance matrix is never
//! formed; the eigenproblem is solved on the n x n Gram matrix instead and
//! the component directions recovered from it.

use super::{sym_eigen, SymMatrix};

#[derive(Debug, Clone)]
pub struct Pca {
    /// Per-feature mean of the training rows.
    pub mean: Vec<f64>,
    /// Orthonormal component directions, highest variance first.
    pub components: Vec<Vec<f64>>,
    /// Variance of the training data along each component.
    pub explained_variance: Vec<f64>,
}

impl Pca {
    /// Fits at most `n_components` components to `points` (rows). The count
    /// is clamped to `min(rows, features)`; degenerate directions (zero
    /// variance) are kept as explicit zero vectors so callers always get the
    /// dimensionality they asked for.
    pub fn fit(points: &[Vec<f64>], n_components: usize) -> Pca {
        assert!(!points.is_empty(), "pca on empty input");
        let n = points.len();
        let d = points[0].len();
        let k = n_components.min(n).min(d);

        let mean = super::mean_vector(points);
        let centered: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
            .collect();
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };

        let (mut pairs, used_gram) = if d <= n {
            // Primal: d x d covariance.
            let mut cov = SymMatrix::zeros(d);
            for i in 0..d {
                for j in i..d {
                    let s: f64 = centered.iter().map(|r| r[i] * r[j]).sum();
                    cov.set(i, j, s / denom);
                }
            }
            let (vals, vecs) = sym_eigen(&cov);
            (vals.into_iter().zip(vecs).collect::<Vec<_>>(), false)
        } else {
            // Dual: n x n Gram matrix X X^T / (n-1); same nonzero spectrum.
            let mut gram = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let s: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                    gram.set(i, j, s / denom);
                }
            }
            let (vals, vecs) = sym_eigen(&gram);
            (vals.into_iter().zip(vecs).collect::<Vec<_>>(), true)
        };

        // Descending by variance; clamp slightly-negative roundoff to zero.
        pairs.reverse();
        pairs.truncate(k);

        let mut components = Vec::with_capacity(k);
        let mut explained_variance = Vec::with_capacity(k);
        for (lam, vec) in pairs {
            let lam = lam.max(0.0);
            let mut dir = if used_gram {
                // Covariance eigenvector is X^T u, renormalized.
                let mut w = vec![0.0; d];
                for (row, &u) in centered.iter().zip(&vec) {
                    for (wj, xj) in w.iter_mut().zip(row) {
                        *wj += u * xj;
                    }
                }
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    for x in &mut w {
                        *x /= norm;
                    }
                } else {
                    w.fill(0.0);
                }
                w
            } else {
                vec
            };
            // Sign convention: largest-magnitude entry positive, so repeated
            // fits (and golden files derived from them) are stable.
            if let Some(pivot) = dir
                .iter()
                .cloned()
                .reduce(|a, b| if b.abs() > a.abs() { b } else { a })
            {
                if pivot < 0.0 {
                    for x in &mut dir {
                        *x = -*x;
                    }
                }
            }
            components.push(dir);
            explained_variance.push(lam);
        }

        Pca {
            mean,
            components,
            explained_variance,
        }
    }

    /// Coordinates of `point` in the component basis.
    pub fn transform(&self, point: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(point.iter().zip(&self.mean))
                    .map(|(w, (x, m))| w * (x - m))
                    .sum()
            })
            .collect()
    }

    pub fn transform_all(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        points.iter().map(|p| self.transform(p)).collect()
    }
}
