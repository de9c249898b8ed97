//! Synthetic corpus generator.
//!
//! Each simulated participant has a routine activity profile: a prototype
//! distribution supported on a small set of activities. Routine-day images
//! draw activities near that prototype; non-routine days mix in a second
//! "novel" prototype supported on a disjoint activity set, with mixing
//! weight `novelty`. When global features are enabled, each participant
//! gets a per-dimension baseline, and non-routine days shift that baseline
//! by `novelty * scale` with a day-specific sign pattern.
//!
//! Generation is fully determined by `seed`: every user, day, and image
//! draws from its own child stream, so adding a user or reordering the list
//! does not disturb other users' data.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{DayRecord, ImageDescriptor, Label, StudyDataset, UserDays, N_ACTIVITIES};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// First simulated calendar day; day `i` of a user is `BASE_DATE + i`.
const BASE_DATE: (i32, u32, u32) = (2021, 6, 1);

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticUser {
    pub id: String,
    /// Number of recorded days.
    pub days: usize,
    /// How many of those days are non-routine.
    pub outliers: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub users: Vec<SyntheticUser>,
    /// Width of the global feature block (0 disables it).
    pub n_globals: usize,
    /// Images recorded per day, drawn uniformly from this inclusive range.
    pub images_min: usize,
    pub images_max: usize,
    /// Activities in each prototype's support.
    pub support_size: usize,
    /// Weight of per-image noise mixed into every activity draw, in [0, 1).
    pub routine_jitter: f64,
    /// How strongly non-routine days depart from the routine prototype,
    /// in [0, 1]. At 1 the prototype component is replaced outright.
    pub novelty: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            users: Vec::new(),
            n_globals: 0,
            images_min: 24,
            images_max: 36,
            support_size: 5,
            routine_jitter: 0.2,
            novelty: 0.8,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.users.is_empty() {
            return err("no users configured".into());
        }
        let mut ids: Vec<&str> = self.users.iter().map(|u| u.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.users.len() || ids.iter().any(|id| id.is_empty()) {
            return err("user ids must be unique and nonempty".into());
        }
        for u in &self.users {
            if u.days == 0 {
                return err(format!("user {}: needs at least one day", u.id));
            }
            if u.outliers > u.days {
                return err(format!(
                    "user {}: {} outliers exceed {} days",
                    u.id, u.outliers, u.days
                ));
            }
        }
        if self.images_min == 0 || self.images_min > self.images_max {
            return err(format!(
                "bad images_min..images_max range: {}..{}",
                self.images_min, self.images_max
            ));
        }
        if self.support_size == 0 || 2 * self.support_size > N_ACTIVITIES {
            return err(format!(
                "support_size {} needs two disjoint supports within {N_ACTIVITIES} activities",
                self.support_size
            ));
        }
        if !(0.0..1.0).contains(&self.routine_jitter) {
            return err(format!("routine_jitter {} not in [0, 1)", self.routine_jitter));
        }
        if !(0.0..=1.0).contains(&self.novelty) {
            return err(format!("novelty {} not in [0, 1]", self.novelty));
        }
        Ok(())
    }
}

/// A prototype distribution over all activities, supported on `support`.
struct Prototype {
    dense: Vec<f64>,
}

impl Prototype {
    fn sample(support: &[usize], rng: &mut Rng) -> Prototype {
        let weights = rng.simplex_uniform(support.len());
        let mut dense = vec![0.0; N_ACTIVITIES];
        for (&idx, &w) in support.iter().zip(&weights) {
            dense[idx] = w;
        }
        Prototype { dense }
    }

    /// One image's activity vector: the prototype blended with fresh
    /// simplex noise. Stays on the simplex by construction.
    fn draw(&self, jitter: f64, rng: &mut Rng) -> Vec<f64> {
        let noise = rng.simplex_uniform(N_ACTIVITIES);
        self.dense
            .iter()
            .zip(&noise)
            .map(|(p, n)| (1.0 - jitter) * p + jitter * n)
            .collect()
    }
}

struct UserModel {
    routine: Prototype,
    /// Activities the routine prototype never uses. Each non-routine day
    /// draws its own prototype from these, so planted outliers differ from
    /// the routine and from each other (a trip day and a sick day should not
    /// look alike).
    spare: Vec<usize>,
    global_mean: Vec<f64>,
    global_scale: Vec<f64>,
}

impl UserModel {
    fn sample(cfg: &SyntheticConfig, rng: &Rng) -> UserModel {
        let mut proto_rng = rng.child_named("prototype");
        let support = proto_rng.sample_indices(N_ACTIVITIES, cfg.support_size);
        let spare: Vec<usize> = (0..N_ACTIVITIES).filter(|i| !support.contains(i)).collect();
        let routine = Prototype::sample(&support, &mut proto_rng);

        let mut glob_rng = rng.child_named("globals");
        let global_mean = (0..cfg.n_globals).map(|_| glob_rng.normal()).collect();
        let global_scale = (0..cfg.n_globals)
            .map(|_| 0.1 + 0.2 * glob_rng.next_f64())
            .collect();
        UserModel {
            routine,
            spare,
            global_mean,
            global_scale,
        }
    }

    /// Fresh novel-activity prototype for one non-routine day.
    fn sample_novel(&self, cfg: &SyntheticConfig, rng: &mut Rng) -> Prototype {
        let support: Vec<usize> = rng
            .sample_indices(self.spare.len(), cfg.support_size.min(self.spare.len()))
            .into_iter()
            .map(|i| self.spare[i])
            .collect();
        Prototype::sample(&support, rng)
    }
}

fn generate_day(
    cfg: &SyntheticConfig,
    model: &UserModel,
    date: NaiveDate,
    outlier: bool,
    rng: &mut Rng,
) -> DayRecord {
    let n_images = cfg.images_min + rng.range(cfg.images_max - cfg.images_min + 1);
    // Day-specific direction for the global-feature shift.
    let shift: Vec<f64> = if outlier {
        model
            .global_scale
            .iter()
            .map(|s| {
                let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
                cfg.novelty * s * sign
            })
            .collect()
    } else {
        vec![0.0; cfg.n_globals]
    };

    let novel = outlier.then(|| model.sample_novel(cfg, rng));

    let mut images: Vec<ImageDescriptor> = (0..n_images)
        .map(|_| {
            let ts = rng.next_f64() * SECONDS_PER_DAY;
            let routine_draw = model.routine.draw(cfg.routine_jitter, rng);
            let activities = if let Some(novel) = &novel {
                let novel_draw = novel.draw(cfg.routine_jitter, rng);
                routine_draw
                    .iter()
                    .zip(&novel_draw)
                    .map(|(r, n)| (1.0 - cfg.novelty) * r + cfg.novelty * n)
                    .collect()
            } else {
                routine_draw
            };
            let globals = model
                .global_mean
                .iter()
                .zip(&model.global_scale)
                .zip(&shift)
                .map(|((m, s), sh)| m + sh + s * rng.normal())
                .collect();
            ImageDescriptor {
                ts,
                activities,
                globals,
            }
        })
        .collect();
    images.sort_by(|a, b| a.ts.partial_cmp(&b.ts).unwrap());

    DayRecord {
        date,
        images,
        label: Some(if outlier {
            Label::NonRoutine
        } else {
            Label::Routine
        }),
    }
}

/// Generates a labelled corpus according to `cfg`.
pub fn generate(cfg: &SyntheticConfig) -> Result<StudyDataset> {
    cfg.validate()?;
    let root = Rng::new(cfg.seed);
    let base = NaiveDate::from_ymd_opt(BASE_DATE.0, BASE_DATE.1, BASE_DATE.2)
        .expect("valid base date");

    let mut users = Vec::with_capacity(cfg.users.len());
    for user_cfg in &cfg.users {
        let user_rng = root.child_named(&user_cfg.id);
        let model = UserModel::sample(cfg, &user_rng);

        let mut plan_rng = user_rng.child_named("plan");
        let mut outlier_days = plan_rng.sample_indices(user_cfg.days, user_cfg.outliers);
        outlier_days.sort_unstable();

        let day_rng = user_rng.child_named("day");
        let days: Vec<DayRecord> = (0..user_cfg.days)
            .map(|d| {
                let date = base + chrono::Days::new(d as u64);
                let outlier = outlier_days.binary_search(&d).is_ok();
                generate_day(cfg, &model, date, outlier, &mut day_rng.child(d as u64))
            })
            .collect();
        users.push(UserDays {
            user_id: user_cfg.id.clone(),
            days,
        });
    }
    Ok(StudyDataset {
        users,
        n_globals: cfg.n_globals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::euclidean;

    fn small_config() -> SyntheticConfig {
        SyntheticConfig {
            seed: 11,
            users: vec![
                SyntheticUser {
                    id: "u01".into(),
                    days: 8,
                    outliers: 3,
                },
                SyntheticUser {
                    id: "u02".into(),
                    days: 5,
                    outliers: 1,
                },
            ],
            n_globals: 16,
            images_min: 6,
            images_max: 10,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn counts_match_config() {
        let ds = generate(&small_config()).unwrap();
        assert_eq!(ds.users.len(), 2);
        assert_eq!(ds.users[0].n_days(), 8);
        assert_eq!(ds.users[0].n_labelled(Label::NonRoutine), 3);
        assert_eq!(ds.users[1].n_days(), 5);
        assert_eq!(ds.users[1].n_labelled(Label::NonRoutine), 1);
        for user in &ds.users {
            for day in &user.days {
                assert!((6..=10).contains(&day.images.len()));
                for img in &day.images {
                    assert_eq!(img.activities.len(), N_ACTIVITIES);
                    assert_eq!(img.globals.len(), 16);
                    assert!((0.0..SECONDS_PER_DAY).contains(&img.ts));
                }
            }
        }
    }

    #[test]
    fn activities_stay_on_simplex() {
        let ds = generate(&small_config()).unwrap();
        for user in &ds.users {
            for day in &user.days {
                for img in &day.images {
                    assert!(img.activities.iter().all(|a| *a >= 0.0));
                    let sum: f64 = img.activities.iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9, "activity sum {sum}");
                }
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = small_config();
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SyntheticConfig {
            seed: 12,
            ..small_config()
        };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn adding_a_user_leaves_existing_days_untouched() {
        let base = generate(&small_config()).unwrap();
        let mut extended_cfg = small_config();
        extended_cfg.users.push(SyntheticUser {
            id: "u03".into(),
            days: 4,
            outliers: 1,
        });
        let extended = generate(&extended_cfg).unwrap();
        assert_eq!(base.users[0], extended.users[0]);
        assert_eq!(base.users[1], extended.users[1]);
    }

    #[test]
    fn full_novelty_without_jitter_disjoint_support() {
        let cfg = SyntheticConfig {
            novelty: 1.0,
            routine_jitter: 0.0,
            ..small_config()
        };
        let ds = generate(&cfg).unwrap();
        for user in &ds.users {
            let routine_support: Vec<usize> = {
                let img = &user.days.iter().find(|d| d.label == Some(Label::Routine)).unwrap().images[0];
                (0..N_ACTIVITIES).filter(|&i| img.activities[i] > 0.0).collect()
            };
            for day in &user.days {
                if day.label != Some(Label::NonRoutine) {
                    continue;
                }
                for img in &day.images {
                    for &i in &routine_support {
                        assert_eq!(img.activities[i], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn outlier_days_differ_from_each_other() {
        // Each non-routine day carries its own novel-activity profile: with
        // full mass shift and no jitter, two outlier days of the same user
        // should not land on the same support.
        let cfg = SyntheticConfig {
            novelty: 1.0,
            routine_jitter: 0.0,
            users: vec![SyntheticUser {
                id: "a".into(),
                days: 12,
                outliers: 6,
            }],
            ..small_config()
        };
        let ds = generate(&cfg).unwrap();
        let supports: Vec<Vec<usize>> = ds.users[0]
            .days
            .iter()
            .filter(|d| d.label == Some(Label::NonRoutine))
            .map(|d| {
                (0..N_ACTIVITIES)
                    .filter(|&i| d.images[0].activities[i] > 0.0)
                    .collect()
            })
            .collect();
        assert_eq!(supports.len(), 6);
        let distinct: std::collections::BTreeSet<&Vec<usize>> = supports.iter().collect();
        assert!(distinct.len() > 1, "all outlier days shared one profile");
    }

    #[test]
    fn outlier_days_sit_farther_from_routine_centre() {
        let ds = generate(&small_config()).unwrap();
        let user = &ds.users[0];
        let signature = |d: &DayRecord| -> Vec<f64> {
            let mut s = vec![0.0; N_ACTIVITIES];
            for img in &d.images {
                for (acc, a) in s.iter_mut().zip(&img.activities) {
                    *acc += a;
                }
            }
            s.iter().map(|x| x / d.images.len() as f64).collect()
        };
        let routine: Vec<Vec<f64>> = user
            .days
            .iter()
            .filter(|d| d.label == Some(Label::Routine))
            .map(signature)
            .collect();
        let centre = crate::numerics::mean_vector(&routine);
        let mean_dist = |days: &[Vec<f64>]| -> f64 {
            days.iter().map(|d| euclidean(d, &centre)).sum::<f64>() / days.len() as f64
        };
        let outlier: Vec<Vec<f64>> = user
            .days
            .iter()
            .filter(|d| d.label == Some(Label::NonRoutine))
            .map(signature)
            .collect();
        assert!(mean_dist(&outlier) > 3.0 * mean_dist(&routine));
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let mut cfg = small_config();
        cfg.users[0].outliers = 20;
        assert!(generate(&cfg).is_err());

        let mut cfg = small_config();
        cfg.users[1].id = "u01".into();
        assert!(generate(&cfg).is_err());

        let cfg = SyntheticConfig {
            support_size: 11,
            ..small_config()
        };
        assert!(generate(&cfg).is_err());

        let cfg = SyntheticConfig {
            novelty: 1.5,
            ..small_config()
        };
        assert!(generate(&cfg).is_err());

        let cfg = SyntheticConfig {
            images_min: 9,
            images_max: 3,
            ..small_config()
        };
        assert!(generate(&cfg).is_err());
    }
}
