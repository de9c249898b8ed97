//! Experiment runner: fans every (user, method, feature-mode) cell out to a
//! worker pool, evaluates predictions against the ground truth, and writes
//! the run artifacts (results table, manifest, plots).
//!
//! Every cell draws its randomness from a stream named
//! `"<user>/<method>/<mode>"` under the run seed, so results do not depend
//! on scheduling order and any single cell can be reproduced in isolation.

pub mod plots;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    dbscan, eps_heuristic, spectral_two_way, EllipticEnvelope, EnvelopeParams, OcsvmParams,
    OneClassSvm,
};
use crate::dataset::{synth::SyntheticConfig, Label, StudyDataset};
use crate::daysig::{activity_histogram, build_signatures, FeatureMode, UserSignatures};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::iforest::{decide, IsoForest, IsoForestParams};
use crate::numerics::{pairwise_euclidean, pca::Pca, Rng};

/// Detectors, in the order their rows appear in the results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RobustCovariance,
    OneClassSvm,
    Dbscan,
    Spectral,
    IsolationForest,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::RobustCovariance,
        Method::OneClassSvm,
        Method::Dbscan,
        Method::Spectral,
        Method::IsolationForest,
    ];

    pub fn as_code(self) -> &'static str {
        match self {
            Method::RobustCovariance => "robust-covariance",
            Method::OneClassSvm => "one-class-svm",
            Method::Dbscan => "dbscan",
            Method::Spectral => "spectral",
            Method::IsolationForest => "isolation-forest",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_code())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_code() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method '{s}'")))
    }
}

/// Knobs for one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub seed: u64,
    /// Expected fraction of non-routine days, in (0, 0.5].
    pub contamination: f64,
    pub methods: Vec<Method>,
    /// Empty means "all modes the corpus supports".
    pub modes: Vec<FeatureMode>,
    /// `None` keeps each mode's default z-scoring choice.
    pub standardize: Option<bool>,
    pub n_trees: usize,
    pub subsample_size: usize,
    /// DBSCAN density threshold.
    pub min_pts: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            contamination: 0.3,
            methods: Method::ALL.to_vec(),
            modes: Vec::new(),
            standardize: None,
            n_trees: 100,
            subsample_size: 256,
            min_pts: 3,
        }
    }
}

/// Run configuration file: the options above plus a data source, which is
/// either a corpus directory or an inline generator config (exactly one).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub synth: Option<SyntheticConfig>,
    /// Output directory; default `out`, overridable on the command line.
    pub out: PathBuf,
    pub seed: u64,
    pub contamination: f64,
    pub methods: Vec<Method>,
    pub modes: Vec<FeatureMode>,
    pub standardize: Option<bool>,
    pub n_trees: usize,
    pub subsample_size: usize,
    pub min_pts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opts = RunOptions::default();
        RunConfig {
            corpus: None,
            synth: None,
            out: PathBuf::from("out"),
            seed: opts.seed,
            contamination: opts.contamination,
            methods: opts.methods,
            modes: opts.modes,
            standardize: opts.standardize,
            n_trees: opts.n_trees,
            subsample_size: opts.subsample_size,
            min_pts: opts.min_pts,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.corpus.is_some() == cfg.synth.is_some() {
            return Err(Error::Config(
                "configure exactly one data source: 'corpus' or '[synth]'".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            contamination: self.contamination,
            methods: self.methods.clone(),
            modes: self.modes.clone(),
            standardize: self.standardize,
            n_trees: self.n_trees,
            subsample_size: self.subsample_size,
            min_pts: self.min_pts,
        }
    }

    /// Loads or generates the configured dataset.
    pub fn load_dataset(&self, config_dir: &Path) -> Result<StudyDataset> {
        match (&self.corpus, &self.synth) {
            (Some(path), None) => {
                let path = if path.is_relative() {
                    config_dir.join(path)
                } else {
                    path.clone()
                };
                crate::dataset::load_corpus(&path)
            }
            (None, Some(synth)) => crate::dataset::synth::generate(synth),
            _ => Err(Error::Config(
                "configure exactly one data source: 'corpus' or '[synth]'".into(),
            )),
        }
    }
}

/// Outcome of one (user, method, mode) cell. A failed cell keeps its slot
/// (with `error` set and no predictions) so the manifest always covers the
/// full matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub user: String,
    pub method: Method,
    pub mode: FeatureMode,
    /// ISO dates, one per day, in date order.
    pub dates: Vec<String>,
    pub ground_truth: Vec<Option<Label>>,
    /// Empty when the cell failed.
    pub predicted: Vec<Label>,
    pub error: Option<String>,
    /// Wall-clock fit+predict time; informational only, excluded from
    /// determinism guarantees.
    pub wall_ms: f64,
}

impl CellResult {
    /// (ground truth, prediction) pairs for the labelled days.
    fn labelled_pairs(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.ground_truth
            .iter()
            .zip(&self.predicted)
            .filter_map(|(g, p)| g.map(|g| (g, *p)))
    }

    pub fn evaluate(&self) -> Result<EvalReport> {
        let (gt, pred): (Vec<Label>, Vec<Label>) = self.labelled_pairs().unzip();
        evaluate(&gt, &pred)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserSummary {
    pub id: String,
    pub n_days: usize,
    pub n_non_routine: usize,
}

/// 2-D projection of one user's signatures under one mode, shared by all of
/// that mode's scatter plots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Projection {
    pub user: String,
    pub mode: FeatureMode,
    pub coords: Vec<[f64; 2]>,
}

/// Per-day activity occurrence histograms for one user (each row sums to 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActivityMix {
    pub user: String,
    pub dates: Vec<String>,
    pub labels: Vec<Option<Label>>,
    pub histograms: Vec<Vec<f64>>,
}

/// Version tag for the manifest document; bump on breaking changes.
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Everything needed to reproduce the run and re-render its tables and
/// plots without the original corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub crate_version: String,
    pub options: RunOptions,
    /// Modes actually run (options.modes after defaulting).
    pub modes: Vec<FeatureMode>,
    pub n_globals: usize,
    pub users: Vec<UserSummary>,
    pub cells: Vec<CellResult>,
    pub projections: Vec<Projection>,
    pub activity_mix: Vec<ActivityMix>,
    /// Paths (relative to the output directory) of every file the run wrote,
    /// including this manifest. Filled in by [`write_outputs`].
    pub artifacts: Vec<String>,
    /// Total wall-clock time; informational only.
    pub wall_ms: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<RunManifest> {
        let m: RunManifest =
            serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::Serialize(format!(
                "unsupported manifest format version {} (expected {MANIFEST_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    /// Cells that failed, for error reporting.
    pub fn failed_cells(&self) -> Vec<&CellResult> {
        self.cells.iter().filter(|c| c.error.is_some()).collect()
    }

    /// Day-weighted aggregate score for one (method, mode) column across all
    /// users: the per-user labelled days are pooled and scored together.
    /// Failed cells contribute nothing; `None` when no labelled day survives.
    pub fn aggregate(&self, method: Method, mode: FeatureMode) -> Option<EvalReport> {
        let mut gt = Vec::new();
        let mut pred = Vec::new();
        for cell in &self.cells {
            if cell.method == method && cell.mode == mode {
                for (g, p) in cell.labelled_pairs() {
                    gt.push(g);
                    pred.push(p);
                }
            }
        }
        evaluate(&gt, &pred).ok()
    }

    /// The `results.csv` table: one aggregate row per (method, mode), methods
    /// outermost, in canonical order. Columns with no scored days (every cell
    /// failed or nothing was labelled) render as `nan`.
    pub fn render_results_csv(&self) -> String {
        let mut out = String::from(
            "method,features,accuracy,weighted_f,weighted_p,weighted_r,macro_f,macro_p,macro_r\n",
        );
        for method in Method::ALL {
            if !self.options.methods.contains(&method) {
                continue;
            }
            for mode in FeatureMode::ALL {
                if !self.modes.contains(&mode) {
                    continue;
                }
                out.push_str(&format!("{},{}", method.as_code(), mode.as_code()));
                match self.aggregate(method, mode) {
                    Some(report) => {
                        for v in report.metric_cells() {
                            out.push_str(&format!(",{v:.4}"));
                        }
                    }
                    None => out.push_str(&",nan".repeat(7)),
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Caps the dimensionality for detectors that need a well-conditioned dense
/// covariance (robust covariance, spectral): at most 10 dimensions and at
/// least two fewer than the number of days.
fn reduce_for_dense(x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let d = x.first().map_or(0, |r| r.len());
    let target = n.saturating_sub(2).min(10);
    if target == 0 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 days for covariance-based detectors, got {n}"
        )));
    }
    if d <= target {
        return Ok(x.to_vec());
    }
    Ok(Pca::fit(x, target).transform_all(x))
}

fn flags_to_labels(flagged: &[bool]) -> Vec<Label> {
    flagged
        .iter()
        .map(|f| if *f { Label::NonRoutine } else { Label::Routine })
        .collect()
}

/// Runs one detector on one user's signature matrix.
fn predict_cell(
    x: &[Vec<f64>],
    method: Method,
    opts: &RunOptions,
    rng: &mut Rng,
) -> Result<Vec<Label>> {
    match method {
        Method::IsolationForest => {
            let forest = IsoForest::fit(
                x,
                IsoForestParams {
                    n_trees: opts.n_trees,
                    subsample_size: opts.subsample_size,
                    seed: rng.key(),
                },
            )?;
            let outcome = decide(&forest.score_samples(x), opts.contamination)?;
            Ok(flags_to_labels(&outcome.flagged))
        }
        Method::RobustCovariance => {
            let reduced = reduce_for_dense(x)?;
            let env = EllipticEnvelope::fit(&reduced, &EnvelopeParams::default(), rng)?;
            let outcome = decide(&env.score_samples(&reduced), opts.contamination)?;
            Ok(flags_to_labels(&outcome.flagged))
        }
        Method::OneClassSvm => {
            let svm = OneClassSvm::fit(
                x,
                &OcsvmParams {
                    nu: opts.contamination,
                    ..Default::default()
                },
            )?;
            Ok(x.iter()
                .map(|p| {
                    if svm.decision(p) < 0.0 {
                        Label::NonRoutine
                    } else {
                        Label::Routine
                    }
                })
                .collect())
        }
        Method::Dbscan => {
            let dist = pairwise_euclidean(x);
            let eps = eps_heuristic(&dist, opts.min_pts);
            let clustering = dbscan(&dist, eps, opts.min_pts);
            Ok(clustering
                .assignments
                .iter()
                .map(|a| {
                    if a.is_noise() {
                        Label::NonRoutine
                    } else {
                        Label::Routine
                    }
                })
                .collect())
        }
        Method::Spectral => {
            let reduced = reduce_for_dense(x)?;
            let dist = pairwise_euclidean(&reduced);
            Ok(spectral_two_way(&dist, rng))
        }
    }
}

fn validate_options(opts: &RunOptions) -> Result<()> {
    if !(opts.contamination > 0.0 && opts.contamination <= 0.5) {
        return Err(Error::Config(format!(
            "contamination must be in (0, 0.5], got {}",
            opts.contamination
        )));
    }
    if opts.methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    if opts.n_trees == 0 || opts.subsample_size < 2 || opts.min_pts == 0 {
        return Err(Error::Config(
            "n_trees, subsample_size and min_pts must be positive (subsample_size >= 2)".into(),
        ));
    }
    Ok(())
}

/// Runs every configured cell over the dataset and collects the manifest.
/// Individual cell failures are recorded, not propagated; only setup errors
/// (bad options, unbuildable signatures) abort the run.
pub fn run_experiments(dataset: &StudyDataset, opts: &RunOptions) -> Result<RunManifest> {
    let started = std::time::Instant::now();
    validate_options(opts)?;
    let modes: Vec<FeatureMode> = if opts.modes.is_empty() {
        if dataset.n_globals > 0 {
            FeatureMode::ALL.to_vec()
        } else {
            vec![FeatureMode::Act]
        }
    } else {
        opts.modes.clone()
    };

    // Signatures are shared by all methods within a mode; build them once,
    // along with the 2-D projections the scatter plots draw.
    let mut signatures: BTreeMap<&str, Vec<UserSignatures>> = BTreeMap::new();
    let mut projections = Vec::new();
    for mode in &modes {
        let per_user = build_signatures(dataset, *mode, opts.standardize)?;
        for user in &per_user {
            let x = user.feature_matrix();
            let projected = Pca::fit(&x, 2).transform_all(&x);
            projections.push(Projection {
                user: user.user_id.clone(),
                mode: *mode,
                coords: projected
                    .iter()
                    .map(|p| {
                        [
                            p.first().copied().unwrap_or(0.0),
                            p.get(1).copied().unwrap_or(0.0),
                        ]
                    })
                    .collect(),
            });
        }
        signatures.insert(mode.as_code(), per_user);
    }

    let activity_mix = dataset
        .users
        .iter()
        .map(|user| ActivityMix {
            user: user.user_id.clone(),
            dates: user.days.iter().map(|d| d.date.to_string()).collect(),
            labels: user.days.iter().map(|d| d.label).collect(),
            histograms: user.days.iter().map(activity_histogram).collect(),
        })
        .collect();

    let root = Rng::new(opts.seed);
    let mut jobs = Vec::new();
    for mode in &modes {
        let per_user = &signatures[mode.as_code()];
        for user in per_user {
            for method in Method::ALL {
                if opts.methods.contains(&method) {
                    jobs.push((user, method, *mode));
                }
            }
        }
    }

    let mut cells: Vec<CellResult> = jobs
        .into_par_iter()
        .map(|(user, method, mode)| {
            let cell_started = std::time::Instant::now();
            let stream = format!("{}/{}/{}", user.user_id, method.as_code(), mode.as_code());
            let mut rng = root.child_named(&stream);
            let x = user.feature_matrix();
            let (predicted, error) = match predict_cell(&x, method, opts, &mut rng) {
                Ok(p) => (p, None),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            CellResult {
                user: user.user_id.clone(),
                method,
                mode,
                dates: user.days.iter().map(|d| d.date.to_string()).collect(),
                ground_truth: user.labels(),
                predicted,
                error,
                wall_ms: cell_started.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();
    // Deterministic manifest order regardless of scheduling.
    cells.sort_by(|a, b| {
        let key = |c: &CellResult| {
            (
                c.user.clone(),
                Method::ALL.iter().position(|m| *m == c.method),
                FeatureMode::ALL.iter().position(|m| *m == c.mode),
            )
        };
        key(a).cmp(&key(b))
    });

    Ok(RunManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        options: opts.clone(),
        modes,
        n_globals: dataset.n_globals,
        users: dataset
            .users
            .iter()
            .map(|u| UserSummary {
                id: u.user_id.clone(),
                n_days: u.n_days(),
                n_non_routine: u.n_labelled(Label::NonRoutine),
            })
            .collect(),
        cells,
        projections,
        activity_mix,
        artifacts: Vec::new(),
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Writes `results.csv`, the `plots/` directory, and `manifest.json` under
/// `out_dir`, and records every written path in `manifest.artifacts` (the
/// manifest itself included) so the directory carries no orphan files.
pub fn write_outputs(out_dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut artifacts = vec!["results.csv".to_string()];
    std::fs::write(out_dir.join("results.csv"), manifest.render_results_csv())?;
    artifacts.extend(plots::write_plots(&out_dir.join("plots"), manifest)?);
    artifacts.push("manifest.json".to_string());
    manifest.artifacts = artifacts;
    std::fs::write(out_dir.join("manifest.json"), manifest.to_json()?)?;
    Ok(())
}
