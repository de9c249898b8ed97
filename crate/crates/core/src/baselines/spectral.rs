//! Two-way spectral clustering for routine / non-routine day separation.
//!
//! Builds an RBF affinity from the distance matrix, embeds the points with
//! the two lowest eigenvectors of the unnormalized graph Laplacian
//! `L = D - W`, bisects the embedding with k-means, and calls the smaller
//! cluster non-routine.

use crate::dataset::Label;
use crate::numerics::{kmeans::kmeans, sym_eigen, Rng, SymMatrix};

/// Median of the strictly positive pairwise distances; `None` when every
/// distance is zero (all points identical).
fn positive_median(dist: &SymMatrix) -> Option<f64> {
    let n = dist.n();
    let mut ds: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            if d > 0.0 {
                ds.push(d);
            }
        }
    }
    if ds.is_empty() {
        return None;
    }
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = ds.len();
    Some(if m % 2 == 1 {
        ds[m / 2]
    } else {
        0.5 * (ds[m / 2 - 1] + ds[m / 2])
    })
}

fn mean_pairwise_within(dist: &SymMatrix, members: &[usize]) -> f64 {
    if members.len() < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            sum += dist.get(i, j);
            count += 1;
        }
    }
    sum / count as f64
}

/// Splits the points behind `dist` into routine (majority) and non-routine
/// (minority) groups. An exact size tie is broken by spread: the looser
/// cluster (larger mean pairwise distance) is called non-routine. If all
/// points coincide there is nothing to separate and every day is routine.
pub fn spectral_two_way(dist: &SymMatrix, rng: &mut Rng) -> Vec<Label> {
    let n = dist.n();
    if n < 2 {
        return vec![Label::Routine; n];
    }
    let Some(sigma) = positive_median(dist) else {
        return vec![Label::Routine; n];
    };

    // RBF affinity; the diagonal is irrelevant to L = D - W and left zero.
    let mut laplacian = SymMatrix::zeros(n);
    let mut degree = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            let w = (-d * d / (2.0 * sigma * sigma)).exp();
            laplacian.set(i, j, -w);
            degree[i] += w;
            degree[j] += w;
        }
    }
    for i in 0..n {
        laplacian.set(i, i, degree[i]);
    }

    // Embed with the eigenvectors of the two smallest eigenvalues.
    let (_, vectors) = sym_eigen(&laplacian);
    let embedding: Vec<Vec<f64>> = (0..n).map(|i| vec![vectors[0][i], vectors[1][i]]).collect();

    let fit = kmeans(&embedding, 2, rng);
    let counts = fit.assignments.iter().filter(|a| **a == 1).count();
    let (zero, one) = (n - counts, counts);

    let minority = match zero.cmp(&one) {
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => {
            let members = |c: usize| -> Vec<usize> {
                (0..n).filter(|&i| fit.assignments[i] == c).collect()
            };
            if mean_pairwise_within(dist, &members(0)) > mean_pairwise_within(dist, &members(1)) {
                0
            } else {
                1
            }
        }
    };

    fit.assignments
        .iter()
        .map(|&a| {
            if a == minority {
                Label::NonRoutine
            } else {
                Label::Routine
            }
        })
        .collect()
}
