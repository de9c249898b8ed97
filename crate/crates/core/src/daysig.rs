//! Day signatures: one fixed-length feature vector per recorded day.
//!
//! A day's signature is the arithmetic mean of its per-image descriptors,
//! taken over the selected feature blocks. Detectors operate on these
//! signatures, never on raw images.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dataset::{DayRecord, Label, StudyDataset, N_ACTIVITIES};
use crate::error::{Error, Result};

/// Which descriptor blocks make up the signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    /// Activity scores only.
    Act,
    /// Global appearance features only.
    Glo,
    /// Activity block first, then the global block.
    ActGlo,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 3] = [FeatureMode::Act, FeatureMode::Glo, FeatureMode::ActGlo];

    /// Token used in CSV output and on the command line.
    pub fn as_code(self) -> &'static str {
        match self {
            FeatureMode::Act => "act",
            FeatureMode::Glo => "glo",
            FeatureMode::ActGlo => "act-glo",
        }
    }

    /// Signature width under this mode for a corpus with `n_globals`
    /// global features.
    pub fn width(self, n_globals: usize) -> usize {
        match self {
            FeatureMode::Act => N_ACTIVITIES,
            FeatureMode::Glo => n_globals,
            FeatureMode::ActGlo => N_ACTIVITIES + n_globals,
        }
    }

    /// Signatures mixing heterogeneous blocks are standardized by default;
    /// single-block signatures are left on their native scale.
    pub fn standardize_by_default(self) -> bool {
        matches!(self, FeatureMode::ActGlo)
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_code())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<FeatureMode> {
        FeatureMode::ALL
            .into_iter()
            .find(|m| m.as_code() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown feature mode '{s}' (expected act, glo, or act-glo)"
                ))
            })
    }
}

/// One day's feature vector with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySignature {
    pub date: NaiveDate,
    pub label: Option<Label>,
    pub features: Vec<f64>,
}

/// All signatures for one participant, in date order.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSignatures {
    pub user_id: String,
    pub days: Vec<DaySignature>,
}

impl UserSignatures {
    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        self.days.iter().map(|d| d.features.clone()).collect()
    }

    pub fn labels(&self) -> Vec<Option<Label>> {
        self.days.iter().map(|d| d.label).collect()
    }
}

/// Fraction of the day's images whose strongest activity is class `k`, for
/// each `k` (ties go to the lowest class index). Sums to 1 over a nonempty
/// day. This is the "which activity occurred" view used by the per-day
/// activity plots; the model's `act` signature averages the raw scores
/// instead (see [`aggregate_day`]).
pub fn activity_histogram(day: &DayRecord) -> Vec<f64> {
    let mut counts = vec![0.0; N_ACTIVITIES];
    for img in &day.images {
        let top = img
            .activities
            .iter()
            .enumerate()
            .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
            .map_or(0, |(k, _)| k);
        counts[top] += 1.0;
    }
    let inv = 1.0 / day.images.len() as f64;
    for c in &mut counts {
        *c *= inv;
    }
    counts
}

fn mean_block<'a, F>(day: &'a DayRecord, block: F, width: usize) -> Vec<f64>
where
    F: Fn(&'a crate::dataset::ImageDescriptor) -> &'a [f64],
{
    let mut acc = vec![0.0; width];
    for img in &day.images {
        for (a, v) in acc.iter_mut().zip(block(img)) {
            *a += v;
        }
    }
    let inv = 1.0 / day.images.len() as f64;
    for a in &mut acc {
        *a *= inv;
    }
    acc
}

/// Mean descriptor of one day under `mode`.
pub fn aggregate_day(day: &DayRecord, mode: FeatureMode) -> Vec<f64> {
    match mode {
        FeatureMode::Act => mean_block(day, |img| &img.activities, N_ACTIVITIES),
        FeatureMode::Glo => {
            let width = day.images.first().map_or(0, |i| i.globals.len());
            mean_block(day, |img| &img.globals, width)
        }
        FeatureMode::ActGlo => {
            let mut v = aggregate_day(day, FeatureMode::Act);
            v.extend(aggregate_day(day, FeatureMode::Glo));
            v
        }
    }
}

/// Replaces each user's features with per-dimension z-scores computed over
/// that user's days (population standard deviation). Dimensions constant
/// within a user become exactly zero.
fn standardize_user(days: &mut [DaySignature]) {
    if days.is_empty() {
        return;
    }
    let n = days.len() as f64;
    let width = days[0].features.len();
    for dim in 0..width {
        let mean = days.iter().map(|d| d.features[dim]).sum::<f64>() / n;
        let var = days
            .iter()
            .map(|d| {
                let e = d.features[dim] - mean;
                e * e
            })
            .sum::<f64>()
            / n;
        let std = var.sqrt();
        for d in days.iter_mut() {
            d.features[dim] = if std > 0.0 {
                (d.features[dim] - mean) / std
            } else {
                0.0
            };
        }
    }
}

/// Builds per-user day signatures for the whole corpus.
///
/// `standardize: None` applies the mode's default (z-scores only for
/// mixed-block signatures); `Some(flag)` forces the choice.
pub fn build_signatures(
    dataset: &StudyDataset,
    mode: FeatureMode,
    standardize: Option<bool>,
) -> Result<Vec<UserSignatures>> {
    if mode != FeatureMode::Act && dataset.n_globals == 0 {
        return Err(Error::InvalidInput(format!(
            "feature mode '{mode}' needs global features, but the corpus has none"
        )));
    }
    let standardize = standardize.unwrap_or_else(|| mode.standardize_by_default());

    let mut out = Vec::with_capacity(dataset.users.len());
    for user in &dataset.users {
        let mut days: Vec<DaySignature> = user
            .days
            .iter()
            .map(|day| DaySignature {
                date: day.date,
                label: day.label,
                features: aggregate_day(day, mode),
            })
            .collect();
        if standardize {
            standardize_user(&mut days);
        }
        out.push(UserSignatures {
            user_id: user.user_id.clone(),
            days,
        });
    }
    Ok(out)
}

/// Writes signatures as CSV: `user,day,label,f0,...`. Unlabelled days get an
/// empty label cell. Floats are written in shortest round-trip form.
pub fn write_signatures_csv(path: &Path, signatures: &[UserSignatures]) -> Result<()> {
    let width = signatures
        .iter()
        .flat_map(|u| u.days.first())
        .map(|d| d.features.len())
        .next()
        .unwrap_or(0);
    let mut out = String::from("user,day,label");
    for i in 0..width {
        out.push_str(&format!(",f{i}"));
    }
    out.push('\n');
    for user in signatures {
        for day in &user.days {
            out.push_str(&format!(
                "{},{},{}",
                user.user_id,
                day.date,
                day.label.map_or("", |l| l.as_code())
            ));
            for f in &day.features {
                out.push_str(&format!(",{f}"));
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ImageDescriptor;

    fn day_with(acts: &[Vec<f64>], globs: &[Vec<f64>], label: Option<Label>) -> DayRecord {
        DayRecord {
            date: NaiveDate::from_ymd_opt(2021, 6, 1).unwrap(),
            images: acts
                .iter()
                .zip(globs)
                .enumerate()
                .map(|(i, (a, g))| ImageDescriptor {
                    ts: i as f64,
                    activities: a.clone(),
                    globals: g.clone(),
                })
                .collect(),
            label,
        }
    }

    fn one_hot(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; N_ACTIVITIES];
        v[i] = 1.0;
        v
    }

    #[test]
    fn histogram_counts_argmax_activities() {
        // Argmaxes land on classes {0, 0, 1, 2}.
        let mut soft = vec![0.02; N_ACTIVITIES];
        soft[2] = 0.6;
        let day = day_with(
            &[one_hot(0), one_hot(0), one_hot(1), soft],
            &vec![vec![0.0]; 4],
            None,
        );
        let hist = activity_histogram(&day);
        assert_eq!(hist[0], 0.5);
        assert_eq!(hist[1], 0.25);
        assert_eq!(hist[2], 0.25);
        assert!(hist[3..].iter().all(|v| *v == 0.0));
        assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_single_activity_day_is_one_hot() {
        let day = day_with(&[one_hot(3), one_hot(3)], &[vec![], vec![]], None);
        assert_eq!(activity_histogram(&day), one_hot(3));
    }

    #[test]
    fn histogram_ties_go_to_lowest_class() {
        let uniform = vec![1.0 / N_ACTIVITIES as f64; N_ACTIVITIES];
        let day = day_with(&[uniform.clone(), uniform], &[vec![], vec![]], None);
        assert_eq!(activity_histogram(&day), one_hot(0));
    }

    #[test]
    fn aggregate_is_mean_over_images() {
        let day = day_with(
            &[one_hot(0), one_hot(1)],
            &[vec![2.0, 4.0], vec![4.0, 0.0]],
            None,
        );
        let act = aggregate_day(&day, FeatureMode::Act);
        assert_eq!(act[0], 0.5);
        assert_eq!(act[1], 0.5);
        assert!(act[2..].iter().all(|v| *v == 0.0));
        assert_eq!(aggregate_day(&day, FeatureMode::Glo), vec![3.0, 2.0]);
        let both = aggregate_day(&day, FeatureMode::ActGlo);
        assert_eq!(both.len(), N_ACTIVITIES + 2);
        assert_eq!(&both[..N_ACTIVITIES], &act[..]);
        assert_eq!(&both[N_ACTIVITIES..], &[3.0, 2.0]);
    }

    fn tiny_corpus() -> StudyDataset {
        let mk_day = |date_day: u32, act_idx: usize, g0: f64, label: Label| DayRecord {
            date: NaiveDate::from_ymd_opt(2021, 6, date_day).unwrap(),
            images: vec![ImageDescriptor {
                ts: 0.0,
                activities: one_hot(act_idx),
                globals: vec![g0, 7.0],
            }],
            label: Some(label),
        };
        StudyDataset {
            users: vec![crate::dataset::UserDays {
                user_id: "u01".into(),
                days: vec![
                    mk_day(1, 0, 1.0, Label::Routine),
                    mk_day(2, 0, 3.0, Label::Routine),
                    mk_day(3, 1, 5.0, Label::NonRoutine),
                ],
            }],
            n_globals: 2,
        }
    }

    #[test]
    fn widths_match_mode() {
        let ds = tiny_corpus();
        for mode in FeatureMode::ALL {
            let sigs = build_signatures(&ds, mode, Some(false)).unwrap();
            assert_eq!(sigs[0].days.len(), 3);
            for day in &sigs[0].days {
                assert_eq!(day.features.len(), mode.width(ds.n_globals));
            }
        }
    }

    #[test]
    fn standardize_zscores_per_user() {
        let ds = tiny_corpus();
        let sigs = build_signatures(&ds, FeatureMode::Glo, Some(true)).unwrap();
        let col: Vec<f64> = sigs[0].days.iter().map(|d| d.features[0]).collect();
        // g0 values 1,3,5: mean 3, population std sqrt(8/3).
        let std = (8.0f64 / 3.0).sqrt();
        assert!((col[0] - (1.0 - 3.0) / std).abs() < 1e-12);
        assert!((col[1] - 0.0).abs() < 1e-12);
        assert!((col[2] - (5.0 - 3.0) / std).abs() < 1e-12);
        // g1 is constant 7 -> zero after standardization.
        assert!(sigs[0].days.iter().all(|d| d.features[1] == 0.0));
    }

    #[test]
    fn default_standardization_only_for_mixed_mode() {
        let ds = tiny_corpus();
        let act = build_signatures(&ds, FeatureMode::Act, None).unwrap();
        // Raw scale preserved: one-hot means survive.
        assert_eq!(act[0].days[0].features[0], 1.0);
        let both = build_signatures(&ds, FeatureMode::ActGlo, None).unwrap();
        // Standardized: per-dim population std is 1 for varying dims.
        let col: Vec<f64> = both[0].days.iter().map(|d| d.features[N_ACTIVITIES]).collect();
        let mean: f64 = col.iter().sum::<f64>() / 3.0;
        let var: f64 = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn glo_mode_needs_globals() {
        let mut ds = tiny_corpus();
        ds.n_globals = 0;
        for user in &mut ds.users {
            for day in &mut user.days {
                for img in &mut day.images {
                    img.globals.clear();
                }
            }
        }
        assert!(build_signatures(&ds, FeatureMode::Glo, None).is_err());
        assert!(build_signatures(&ds, FeatureMode::ActGlo, None).is_err());
        assert!(build_signatures(&ds, FeatureMode::Act, None).is_ok());
    }

    #[test]
    fn mode_codes_round_trip() {
        for mode in FeatureMode::ALL {
            assert_eq!(mode.as_code().parse::<FeatureMode>().unwrap(), mode);
        }
        assert!("activities".parse::<FeatureMode>().is_err());
    }

    #[test]
    fn csv_export_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("signatures.csv");
        let ds = tiny_corpus();
        let sigs = build_signatures(&ds, FeatureMode::Glo, Some(false)).unwrap();
        write_signatures_csv(&path, &sigs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "user,day,label,f0,f1");
        assert_eq!(lines[1], "u01,2021-06-01,R,1,7");
        assert_eq!(lines[3], "u01,2021-06-03,N,5,7");
        assert_eq!(lines.len(), 4);
    }
}
