//! Isolation forest outlier detector.
//!
//! Each tree recursively partitions a subsample with axis-aligned cuts at
//! uniformly random positions; points that isolate in few cuts are likely
//! outliers. The anomaly score for a point with expected path length `e`
//! over a forest grown on subsamples of size `m` is `2^(-e / c(m))`, where
//! `c(m)` is the expected path length of an unsuccessful binary search tree
//! lookup — the same normalization applied at truncated leaves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Truncated Euler-Mascheroni constant used by the harmonic-number
/// approximation `H(i) = ln(i) + gamma`.
const EULER_GAMMA: f64 = 0.5772156649;

/// Expected path length `c(m)` of an unsuccessful search in a binary search
/// tree holding `m` points: `2 H(m-1) - 2 (m-1) / m`, and 0 for `m < 2`.
pub fn average_path_length(m: usize) -> f64 {
    if m < 2 {
        return 0.0;
    }
    let m = m as f64;
    let harmonic = (m - 1.0).ln() + EULER_GAMMA;
    2.0 * harmonic - 2.0 * (m - 1.0) / m
}

/// Anomaly score for an average path length `e` under normalization `c_norm`.
/// Monotone decreasing in `e`; equals 0.5 when `e == c_norm`.
pub fn score_from_path(e: f64, c_norm: f64) -> f64 {
    debug_assert!(c_norm > 0.0);
    2.0_f64.powf(-e / c_norm)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Node {
    /// Internal cut: `feature < threshold` goes left, the rest right.
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// External node holding `size` training points.
    Leaf { size: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IsoTree {
    nodes: Vec<Node>,
}

impl IsoTree {
    fn build(data: &[Vec<f64>], idx: &mut [usize], height_limit: usize, rng: &mut Rng) -> IsoTree {
        let mut nodes = Vec::new();
        Self::grow(&mut nodes, data, idx, 0, height_limit, rng);
        IsoTree { nodes }
    }

    /// Appends the subtree over `idx` and returns its root index.
    fn grow(
        nodes: &mut Vec<Node>,
        data: &[Vec<f64>],
        idx: &mut [usize],
        depth: usize,
        height_limit: usize,
        rng: &mut Rng,
    ) -> u32 {
        let here = nodes.len() as u32;
        if depth >= height_limit || idx.len() <= 1 {
            nodes.push(Node::Leaf {
                size: idx.len() as u32,
            });
            return here;
        }

        // Only features that actually vary within this node are candidates;
        // constant features can never separate anything.
        let d = data[idx[0]].len();
        let mut candidates = Vec::new();
        for f in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in idx.iter() {
                let v = data[i][f];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > lo {
                candidates.push((f, lo, hi));
            }
        }
        let Some(&(feature, lo, hi)) = (!candidates.is_empty())
            .then(|| &candidates[rng.range(candidates.len())])
        else {
            // All remaining points identical: stop early.
            nodes.push(Node::Leaf {
                size: idx.len() as u32,
            });
            return here;
        };

        // A cut strictly inside (lo, hi), so both children are nonempty.
        // When lo and hi are adjacent floats no interior point exists; `hi`
        // itself still separates (the `< threshold` test sends the maxima
        // right and everything else left).
        let mut threshold = hi;
        for _ in 0..8 {
            let t = lo + rng.next_f64() * (hi - lo);
            if t > lo && t < hi {
                threshold = t;
                break;
            }
        }

        let split_at = partition(data, idx, feature, threshold);
        nodes.push(Node::Leaf { size: 0 }); // placeholder, patched below
        let (left_idx, right_idx) = idx.split_at_mut(split_at);
        let left = Self::grow(nodes, data, left_idx, depth + 1, height_limit, rng);
        let right = Self::grow(nodes, data, right_idx, depth + 1, height_limit, rng);
        nodes[here as usize] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        here
    }

    /// Path length of `x`: edges walked plus the subtree adjustment `c(size)`
    /// at the external node reached.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut node = 0usize;
        let mut depth = 0.0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { size } => {
                    return depth + average_path_length(*size as usize);
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                    depth += 1.0;
                }
            }
        }
    }

    #[cfg(test)]
    fn split_features(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect()
    }
}

/// Reorders `idx` so that points with `feature < threshold` come first;
/// returns the boundary position.
fn partition(data: &[Vec<f64>], idx: &mut [usize], feature: usize, threshold: f64) -> usize {
    let mut store = 0;
    for i in 0..idx.len() {
        if data[idx[i]][feature] < threshold {
            idx.swap(store, i);
            store += 1;
        }
    }
    store
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IsoForestParams {
    /// Number of trees in the ensemble.
    pub n_trees: usize,
    /// Per-tree subsample size; clamped to the training-set size.
    pub subsample_size: usize,
    /// Seed for the forest's random stream.
    pub seed: u64,
}

impl Default for IsoForestParams {
    fn default() -> Self {
        IsoForestParams {
            n_trees: 100,
            subsample_size: 256,
            seed: 0,
        }
    }
}

/// Version tag written into serialized forests; bump on breaking changes.
pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoForest {
    format_version: u32,
    params: IsoForestParams,
    /// Effective subsample size after clamping to the training-set size.
    subsample_used: usize,
    n_features: usize,
    trees: Vec<IsoTree>,
}

impl IsoForest {
    /// Grows the ensemble on `data` (rows are points). Requires at least two
    /// rows, rectangular data, and positive parameter values.
    pub fn fit(data: &[Vec<f64>], params: IsoForestParams) -> Result<IsoForest> {
        if data.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "isolation forest needs at least 2 points, got {}",
                data.len()
            )));
        }
        if params.n_trees == 0 || params.subsample_size < 2 {
            return Err(Error::InvalidInput(
                "need n_trees >= 1 and subsample_size >= 2".into(),
            ));
        }
        let n_features = data[0].len();
        if n_features == 0 {
            return Err(Error::InvalidInput("points have no features".into()));
        }
        for (i, row) in data.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} features, expected {n_features}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "row {i} contains a non-finite value"
                )));
            }
        }

        let subsample_used = params.subsample_size.min(data.len());
        let height_limit = (subsample_used as f64).log2().ceil() as usize;
        let root = Rng::new(params.seed);

        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = root.child(t as u64);
                let mut idx = if subsample_used < data.len() {
                    rng.sample_indices(data.len(), subsample_used)
                } else {
                    (0..data.len()).collect()
                };
                IsoTree::build(data, &mut idx, height_limit, &mut rng)
            })
            .collect();

        Ok(IsoForest {
            format_version: FOREST_FORMAT_VERSION,
            params,
            subsample_used,
            n_features,
            trees,
        })
    }

    pub fn params(&self) -> &IsoForestParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Average path length of `x` over all trees.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.path_length(x)).sum();
        total / self.trees.len() as f64
    }

    /// Anomaly score in (0, 1]; higher means more isolated.
    pub fn score(&self, x: &[f64]) -> f64 {
        score_from_path(self.path_length(x), average_path_length(self.subsample_used))
    }

    pub fn score_samples(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.score(x)).collect()
    }

    /// Serializes the fitted forest as a versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Restores a forest written by [`IsoForest::to_json`]. Rejects documents
    /// with an unknown `format_version`.
    pub fn from_json(json: &str) -> Result<IsoForest> {
        let forest: IsoForest =
            serde_json::from_str(json).map_err(|e| Error::Serialize(e.to_string()))?;
        if forest.format_version != FOREST_FORMAT_VERSION {
            return Err(Error::Serialize(format!(
                "unsupported forest format version {} (expected {FOREST_FORMAT_VERSION})",
                forest.format_version
            )));
        }
        if forest.trees.is_empty() {
            return Err(Error::Serialize("forest document has no trees".into()));
        }
        Ok(forest)
    }
}

/// Scores with a yes/no call per point, as produced by [`decide`].
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    /// Anomaly score per point (higher = more anomalous).
    pub scores: Vec<f64>,
    /// Whether each point is flagged as an outlier.
    pub flagged: Vec<bool>,
    /// Smallest score that was flagged.
    pub threshold: f64,
}

impl DetectionOutcome {
    pub fn n_flagged(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }
}

/// Flags the highest-scoring `floor(contamination * n)` points as outliers.
/// Points tied with the cut-off score are all flagged, so the flagged count
/// can exceed the floor under ties. `contamination` must lie in (0, 0.5].
pub fn decide(scores: &[f64], contamination: f64) -> Result<DetectionOutcome> {
    if !(contamination > 0.0 && contamination <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "contamination must be in (0, 0.5], got {contamination}"
        )));
    }
    if scores.is_empty() {
        return Err(Error::InvalidInput("no scores to threshold".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("scores contain NaN".into()));
    }

    let n = scores.len();
    let mut sorted: Vec<f64> = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // The lowest score that still belongs to the top floor(c * n).
    let cut = (((1.0 - contamination) * n as f64).ceil() as usize).min(n - 1);
    let threshold = sorted[cut];
    let flagged: Vec<bool> = scores.iter().map(|s| *s >= threshold).collect();
    Ok(DetectionOutcome {
        scores: scores.to_vec(),
        flagged,
        threshold,
    })
}
