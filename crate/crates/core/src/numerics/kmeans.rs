//! Lloyd's k-means with k-means++ seeding.

use super::Rng;

const MAX_ITERS: usize = 300;

/// Result of a k-means run.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    /// One centroid per cluster.
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from each point to its centroid, recorded
    /// after every Lloyd iteration (non-increasing).
    pub objective_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// k-means++ initialization: first centroid uniform, each subsequent one
/// drawn with probability proportional to squared distance from the chosen
/// set. Falls back to uniform choice when all remaining distances are zero.
fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.range(points.len())].clone());
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.next_f64() * total;
            let mut chosen = points.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.range(points.len())
        };
        centroids.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

/// Clusters `points` into `k` groups. Panics if `points` is empty or
/// `k == 0`; `k` larger than the number of points is clamped down.
pub fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut Rng) -> KMeansFit {
    assert!(!points.is_empty(), "kmeans on empty input");
    assert!(k > 0, "kmeans with k = 0");
    let k = k.min(points.len());
    let d = points[0].len();

    let mut centroids = plus_plus_init(points, k, rng);
    let mut assignments = vec![0usize; points.len()];
    let mut objective_trace = Vec::new();

    for _ in 0..MAX_ITERS {
        // Assignment step.
        let mut changed = false;
        let mut objective = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, dist) = nearest(p, &centroids);
            objective += dist;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        objective_trace.push(objective);

        // Update step.
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed an empty cluster at the point farthest from its
                // current centroid, a standard repair that keeps k clusters.
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        let da = sq_dist(&points[a], &centroids[assignments[a]]);
                        let db = sq_dist(&points[b], &centroids[assignments[b]]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                centroids[c] = points[far].clone();
                assignments[far] = c;
                changed = true;
            } else {
                let inv = 1.0 / counts[c] as f64;
                for (dst, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *dst = s * inv;
                }
            }
        }

        if !changed {
            break;
        }
    }

    KMeansFit {
        assignments,
        centroids,
        objective_trace,
    }
}

/// Index of the centroid nearest to `point` (for assigning held-out points).
pub fn assign(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    nearest(point, centroids).0
}
