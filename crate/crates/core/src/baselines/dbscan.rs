//! Density-based clustering (DBSCAN) over a precomputed distance matrix.
//!
//! A point whose closed eps-ball (boundary included, the point itself
//! counted) holds at least `min_pts` points is a core point; core points
//! within eps of each other share a cluster, non-core points within eps of
//! a core join its cluster as border points, and everything else is noise.

use crate::numerics::SymMatrix;

/// Cluster assignment for one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    /// Dense interior point of the given cluster.
    Core(usize),
    /// Within eps of a core point of the given cluster, but not dense itself.
    Border(usize),
    Noise,
}

impl Assignment {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Assignment::Core(c) | Assignment::Border(c) => Some(c),
            Assignment::Noise => None,
        }
    }

    pub fn is_noise(self) -> bool {
        self == Assignment::Noise
    }
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub assignments: Vec<Assignment>,
    pub n_clusters: usize,
}

fn neighbours(dist: &SymMatrix, i: usize, eps: f64) -> Vec<usize> {
    (0..dist.n()).filter(|&j| dist.get(i, j) <= eps).collect()
}

/// Runs DBSCAN on a distance matrix. Deterministic: clusters are numbered
/// in order of their first (lowest-index) core point.
pub fn dbscan(dist: &SymMatrix, eps: f64, min_pts: usize) -> Clustering {
    let n = dist.n();
    let core: Vec<bool> = (0..n)
        .map(|i| neighbours(dist, i, eps).len() >= min_pts)
        .collect();

    let mut assignments = vec![Assignment::Noise; n];
    let mut n_clusters = 0;
    for start in 0..n {
        if !core[start] || assignments[start] != Assignment::Noise {
            continue;
        }
        let cluster = n_clusters;
        n_clusters += 1;
        // Flood-fill over density-reachable points.
        assignments[start] = Assignment::Core(cluster);
        let mut queue = vec![start];
        while let Some(p) = queue.pop() {
            for q in neighbours(dist, p, eps) {
                match assignments[q] {
                    Assignment::Noise => {
                        if core[q] {
                            assignments[q] = Assignment::Core(cluster);
                            queue.push(q);
                        } else {
                            assignments[q] = Assignment::Border(cluster);
                        }
                    }
                    // Already claimed by this or an earlier cluster.
                    _ => {}
                }
            }
        }
    }

    Clustering {
        assignments,
        n_clusters,
    }
}

/// Data-driven eps: the median, over all points, of the distance to each
/// point's `min_pts`-th nearest neighbour (the point itself counts as the
/// first). The median of an even count is the mean of the middle pair.
pub fn eps_heuristic(dist: &SymMatrix, min_pts: usize) -> f64 {
    let n = dist.n();
    if n == 0 {
        return 0.0;
    }
    let k = min_pts.min(n);
    let mut kth: Vec<f64> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = dist.row(i).to_vec();
            row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            row[k - 1]
        })
        .collect();
    kth.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if n % 2 == 1 {
        kth[n / 2]
    } else {
        0.5 * (kth[n / 2 - 1] + kth[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::pairwise_euclidean;

    fn points_1d(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn two_clusters_and_noise() {
        let pts = points_1d(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0, 100.0]);
        let dist = pairwise_euclidean(&pts);
        let c = dbscan(&dist, 1.5, 3);
        assert_eq!(c.n_clusters, 2);
        assert_eq!(c.assignments[0].cluster(), Some(0));
        assert_eq!(c.assignments[1].cluster(), Some(0));
        assert_eq!(c.assignments[2].cluster(), Some(0));
        assert_eq!(c.assignments[3].cluster(), Some(1));
        assert_eq!(c.assignments[5].cluster(), Some(1));
        assert!(c.assignments[6].is_noise());
    }

    #[test]
    fn eps_boundary_is_inclusive_and_self_counts() {
        // With eps exactly 1.0 the middle point's closed ball is {0,1,2}:
        // itself plus both ends, reaching min_pts = 3.
        let pts = points_1d(&[0.0, 1.0, 2.0]);
        let dist = pairwise_euclidean(&pts);
        let c = dbscan(&dist, 1.0, 3);
        assert_eq!(c.n_clusters, 1);
        assert_eq!(c.assignments[1], Assignment::Core(0));
        // The ends see only 2 points within eps, so they join as border.
        assert_eq!(c.assignments[0], Assignment::Border(0));
        assert_eq!(c.assignments[2], Assignment::Border(0));
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let pts = vec![vec![4.0, 4.0]; 6];
        let dist = pairwise_euclidean(&pts);
        // eps from the heuristic is 0; the closed ball still holds all six.
        let eps = eps_heuristic(&dist, 3);
        assert_eq!(eps, 0.0);
        let c = dbscan(&dist, eps, 3);
        assert_eq!(c.n_clusters, 1);
        assert!(c.assignments.iter().all(|a| *a == Assignment::Core(0)));
    }

    #[test]
    fn heuristic_matches_hand_computation() {
        let pts = points_1d(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0, 100.0]);
        let dist = pairwise_euclidean(&pts);
        // Third-nearest (self included) per point: [2,1,2,2,1,2,89];
        // the median of the sorted list is 2.
        assert_eq!(eps_heuristic(&dist, 3), 2.0);
        let c = dbscan(&dist, 2.0, 3);
        assert_eq!(c.n_clusters, 2);
        assert!(c.assignments[6].is_noise());
    }

    #[test]
    fn heuristic_even_count_averages_middle_pair() {
        let pts = points_1d(&[0.0, 1.0, 3.0, 6.0]);
        let dist = pairwise_euclidean(&pts);
        // Second-nearest per point: [1,1,2,3]; median = (1 + 2) / 2.
        assert_eq!(eps_heuristic(&dist, 2), 1.5);
    }

    #[test]
    fn min_pts_larger_than_everything_marks_all_noise() {
        let pts = points_1d(&[0.0, 5.0, 10.0]);
        let dist = pairwise_euclidean(&pts);
        let c = dbscan(&dist, 1.0, 3);
        assert_eq!(c.n_clusters, 0);
        assert!(c.assignments.iter().all(|a| a.is_noise()));
    }

    #[test]
    fn border_points_touch_a_core_of_their_cluster() {
        let mut rng = crate::numerics::Rng::new(21);
        let mut pts: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.normal(), rng.normal()])
            .collect();
        pts.extend((0..30).map(|_| vec![8.0 + rng.normal(), 8.0 + rng.normal()]));
        let dist = pairwise_euclidean(&pts);
        let eps = eps_heuristic(&dist, 3);
        let c = dbscan(&dist, eps, 3);
        for (i, a) in c.assignments.iter().enumerate() {
            if let Assignment::Border(cluster) = a {
                let touches_core = (0..pts.len()).any(|j| {
                    c.assignments[j] == Assignment::Core(*cluster) && dist.get(i, j) <= eps
                });
                assert!(touches_core, "border point {i} floats free");
            }
        }
    }
}
