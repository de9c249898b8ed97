//! Small self-contained numerical kernels: symmetric matrices, pairwise
//! distances, a Jacobi eigensolver, k-means, and PCA.
//!
//! Everything here operates on `Vec<f64>` / slices to keep the crate free of
//! linear-algebra dependencies; the matrices involved are tiny (at most a few
//! thousand entries), so simplicity and testability win over speed.

pub mod eigen;
pub mod kmeans;
pub mod pca;
pub mod rng;

pub use eigen::sym_eigen;
pub use rng::Rng;

/// Dense symmetric matrix, stored as the full square for simple indexing.
/// Writes through `set` keep the symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from a full row-major square matrix, averaging the off-diagonal
    /// pair to remove asymmetric floating-point noise.
    pub fn from_rows(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n);
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (rows[i * n + j] + rows[j * n + i]);
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Row `i` as a slice (valid because the full square is stored).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// All pairwise Euclidean distances between the rows of `points`.
/// The diagonal is exactly zero.
pub fn pairwise_euclidean(points: &[Vec<f64>]) -> SymMatrix {
    let n = points.len();
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            m.set(i, j, euclidean(&points[i], &points[j]));
        }
    }
    m
}

/// Arithmetic mean of each coordinate over the rows of `points`.
pub fn mean_vector(points: &[Vec<f64>]) -> Vec<f64> {
    assert!(!points.is_empty());
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    let inv = 1.0 / points.len() as f64;
    for m in &mut mean {
        *m *= inv;
    }
    mean
}
