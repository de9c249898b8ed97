//! Study corpus: per-user day directories of image-descriptor CSV files,
//! plus a votes file carrying the human ground truth.
//!
//! On disk a corpus looks like
//!
//! ```text
//! corpus/
//!   u01/
//!     2021-06-01.csv      one row per image: ts,a0..a20[,g0..g2047]
//!     2021-06-02.csv
//!     votes.csv           day,v1,v2,v3,v4,v5,v6   with values R or N
//!   u02/
//!     ...
//! ```
//!
//! Every image row carries a timestamp (seconds since local midnight), 21
//! activity scores, and optionally a block of global appearance features.
//! All day files in one corpus must agree on whether the global block is
//! present and how wide it is. The parser reports failures as
//! `path:line: message`.

pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of activity scores per image; fixed by the activity taxonomy.
pub const N_ACTIVITIES: usize = 21;
/// Votes required per labelled day.
pub const N_VOTES: usize = 6;

/// Ground-truth / predicted class of a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Routine,
    NonRoutine,
}

impl Label {
    /// Single-letter code used in votes files.
    pub fn as_code(self) -> &'static str {
        match self {
            Label::Routine => "R",
            Label::NonRoutine => "N",
        }
    }

    pub fn from_code(code: &str) -> Option<Label> {
        match code {
            "R" => Some(Label::Routine),
            "N" => Some(Label::NonRoutine),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Routine => "routine",
            Label::NonRoutine => "non-routine",
        })
    }
}

/// Majority call over exactly [`N_VOTES`] votes. Four or more identical
/// votes decide the day; a three-three split is treated as non-routine
/// (annotator disagreement itself signals an unusual day).
pub fn aggregate_votes(votes: &[Label]) -> Result<Label> {
    if votes.len() != N_VOTES {
        return Err(Error::InvalidInput(format!(
            "expected {N_VOTES} votes, got {}",
            votes.len()
        )));
    }
    let non_routine = votes.iter().filter(|v| **v == Label::NonRoutine).count();
    if non_routine >= N_VOTES / 2 {
        Ok(Label::NonRoutine)
    } else {
        Ok(Label::Routine)
    }
}

/// One image: capture time plus its descriptor blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDescriptor {
    /// Seconds since local midnight.
    pub ts: f64,
    /// Activity scores, length [`N_ACTIVITIES`].
    pub activities: Vec<f64>,
    /// Global appearance features; empty when the corpus has none.
    pub globals: Vec<f64>,
}

/// All images captured on one calendar day, with its ground truth if voted.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub images: Vec<ImageDescriptor>,
    pub label: Option<Label>,
}

/// One participant's days, sorted by date.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDays {
    pub user_id: String,
    pub days: Vec<DayRecord>,
}

impl UserDays {
    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn n_labelled(&self, label: Label) -> usize {
        self.days.iter().filter(|d| d.label == Some(label)).count()
    }
}

/// A whole corpus: users sorted by id, uniform global-feature width.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyDataset {
    pub users: Vec<UserDays>,
    /// Width of the global block (0 when absent).
    pub n_globals: usize,
}

impl StudyDataset {
    pub fn n_days(&self) -> usize {
        self.users.iter().map(|u| u.n_days()).sum()
    }

    pub fn user(&self, id: &str) -> Option<&UserDays> {
        self.users.iter().find(|u| u.user_id == id)
    }
}

/// Splits a header of the form `ts,a0..a20[,g0..g{m-1}]`, returning the
/// global-block width `m`.
fn parse_header(path: &Path, fields: &[&str]) -> Result<usize> {
    let bad = |msg: String| Error::parse(path, 1, msg);
    if fields.first() != Some(&"ts") {
        return Err(bad("header must start with 'ts'".into()));
    }
    if fields.len() < 1 + N_ACTIVITIES {
        return Err(bad(format!(
            "header has {} columns, need at least {}",
            fields.len(),
            1 + N_ACTIVITIES
        )));
    }
    for (i, name) in fields[1..=N_ACTIVITIES].iter().enumerate() {
        if *name != format!("a{i}") {
            return Err(bad(format!("expected column 'a{i}', found '{name}'")));
        }
    }
    let globals = &fields[1 + N_ACTIVITIES..];
    for (i, name) in globals.iter().enumerate() {
        if *name != format!("g{i}") {
            return Err(bad(format!("expected column 'g{i}', found '{name}'")));
        }
    }
    Ok(globals.len())
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("not a number: '{field}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite value: '{field}'")));
    }
    Ok(v)
}

/// Reads one day file. Returns the images (sorted by timestamp) and the
/// global-block width declared by the header.
fn load_day_file(path: &Path) -> Result<(Vec<ImageDescriptor>, usize)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::parse(path, 1, "empty file"));
    };
    let fields: Vec<&str> = header.split(',').collect();
    let n_globals = parse_header(path, &fields)?;
    let width = 1 + N_ACTIVITIES + n_globals;

    let mut images = Vec::new();
    for (i, row) in lines {
        let line = i + 1;
        if row.is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != width {
            return Err(Error::parse(
                path,
                line,
                format!("expected {width} columns, found {}", cells.len()),
            ));
        }
        let ts = parse_f64(path, line, cells[0])?;
        let activities = cells[1..=N_ACTIVITIES]
            .iter()
            .map(|c| parse_f64(path, line, c))
            .collect::<Result<Vec<f64>>>()?;
        let globals = cells[1 + N_ACTIVITIES..]
            .iter()
            .map(|c| parse_f64(path, line, c))
            .collect::<Result<Vec<f64>>>()?;
        images.push(ImageDescriptor {
            ts,
            activities,
            globals,
        });
    }
    if images.is_empty() {
        return Err(Error::parse(path, 1, "day file has no image rows"));
    }
    images.sort_by(|a, b| a.ts.partial_cmp(&b.ts).unwrap());
    Ok((images, n_globals))
}

/// Reads a votes file into a date -> aggregated label map.
fn load_votes(path: &Path) -> Result<BTreeMap<NaiveDate, Label>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::parse(path, 1, "empty file"));
    };
    let want_header: Vec<String> = std::iter::once("day".to_string())
        .chain((1..=N_VOTES).map(|i| format!("v{i}")))
        .collect();
    if header.split(',').collect::<Vec<_>>() != want_header.iter().map(|s| s.as_str()).collect::<Vec<_>>() {
        return Err(Error::parse(
            path,
            1,
            format!("votes header must be '{}'", want_header.join(",")),
        ));
    }

    let mut labels = BTreeMap::new();
    for (i, row) in lines {
        let line = i + 1;
        if row.is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != 1 + N_VOTES {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} columns, found {}", 1 + N_VOTES, cells.len()),
            ));
        }
        let date = NaiveDate::parse_from_str(cells[0].trim(), "%Y-%m-%d")
            .map_err(|_| Error::parse(path, line, format!("bad date: '{}'", cells[0])))?;
        let votes = cells[1..]
            .iter()
            .map(|c| {
                Label::from_code(c.trim())
                    .ok_or_else(|| Error::parse(path, line, format!("bad vote: '{c}' (want R or N)")))
            })
            .collect::<Result<Vec<Label>>>()?;
        let label = aggregate_votes(&votes)?;
        if labels.insert(date, label).is_some() {
            return Err(Error::parse(path, line, format!("duplicate votes for {date}")));
        }
    }
    Ok(labels)
}

/// Loads a corpus directory. Users are subdirectories (sorted by name); each
/// user's days are its `YYYY-MM-DD.csv` files plus an optional `votes.csv`.
pub fn load_corpus(root: &Path) -> Result<StudyDataset> {
    let mut user_dirs: Vec<_> = fs::read_dir(root)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    user_dirs.sort();
    if user_dirs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no user directories under {}",
            root.display()
        )));
    }

    let mut users = Vec::new();
    let mut corpus_globals: Option<usize> = None;
    for dir in user_dirs {
        let user_id = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::InvalidInput(format!("bad user directory name: {}", dir.display())))?
            .to_string();

        let mut day_files: Vec<_> = fs::read_dir(&dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
            .collect();
        day_files.sort();

        let votes_path = dir.join("votes.csv");
        let mut votes = if votes_path.exists() {
            load_votes(&votes_path)?
        } else {
            BTreeMap::new()
        };

        let mut days = Vec::new();
        for file in day_files {
            if file.file_name().and_then(|n| n.to_str()) == Some("votes.csv") {
                continue;
            }
            let stem = file
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default();
            let date = NaiveDate::parse_from_str(stem, "%Y-%m-%d").map_err(|_| {
                Error::InvalidInput(format!(
                    "day file name must be YYYY-MM-DD.csv: {}",
                    file.display()
                ))
            })?;
            let (images, n_globals) = load_day_file(&file)?;
            match corpus_globals {
                None => corpus_globals = Some(n_globals),
                Some(expected) if expected != n_globals => {
                    return Err(Error::InvalidInput(format!(
                        "{}: {} global columns, but the corpus started with {}",
                        file.display(),
                        n_globals,
                        expected
                    )));
                }
                Some(_) => {}
            }
            days.push(DayRecord {
                date,
                images,
                label: votes.remove(&date),
            });
        }
        if days.is_empty() {
            return Err(Error::InvalidInput(format!(
                "user directory {} has no day files",
                dir.display()
            )));
        }
        if let Some((date, _)) = votes.iter().next() {
            return Err(Error::InvalidInput(format!(
                "{}: votes for {} but no matching day file",
                votes_path.display(),
                date
            )));
        }
        days.sort_by_key(|d| d.date);
        users.push(UserDays { user_id, days });
    }

    Ok(StudyDataset {
        users,
        n_globals: corpus_globals.unwrap_or(0),
    })
}

/// Writes a corpus in the directory layout read by [`load_corpus`]. Labelled
/// days are recorded in `votes.csv` as six unanimous votes, so the ground
/// truth survives a round trip. Floats are written in shortest form that
/// parses back to the identical value.
pub fn write_corpus(root: &Path, dataset: &StudyDataset) -> Result<()> {
    for user in &dataset.users {
        let dir = root.join(&user.user_id);
        fs::create_dir_all(&dir)?;

        let mut votes = String::new();
        votes.push_str("day");
        for i in 1..=N_VOTES {
            votes.push_str(&format!(",v{i}"));
        }
        votes.push('\n');
        let mut any_votes = false;

        for day in &user.days {
            let mut out = String::new();
            out.push_str("ts");
            for i in 0..N_ACTIVITIES {
                out.push_str(&format!(",a{i}"));
            }
            for i in 0..dataset.n_globals {
                out.push_str(&format!(",g{i}"));
            }
            out.push('\n');
            for img in &day.images {
                out.push_str(&format!("{}", img.ts));
                for v in &img.activities {
                    out.push_str(&format!(",{v}"));
                }
                for v in &img.globals {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
            fs::write(dir.join(format!("{}.csv", day.date)), out)?;

            if let Some(label) = day.label {
                any_votes = true;
                votes.push_str(&format!(
                    "{}{}\n",
                    day.date,
                    format!(",{}", label.as_code()).repeat(N_VOTES)
                ));
            }
        }
        if any_votes {
            fs::write(dir.join("votes.csv"), votes)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn label_seq(s: &str) -> Vec<Label> {
        s.chars().map(|c| Label::from_code(&c.to_string()).unwrap()).collect()
    }

    #[test]
    fn vote_aggregation_majority_and_ties() {
        assert_eq!(aggregate_votes(&label_seq("RRRRRR")).unwrap(), Label::Routine);
        assert_eq!(aggregate_votes(&label_seq("RRRRRN")).unwrap(), Label::Routine);
        assert_eq!(aggregate_votes(&label_seq("RRRRNN")).unwrap(), Label::Routine);
        assert_eq!(aggregate_votes(&label_seq("RRRNNN")).unwrap(), Label::NonRoutine);
        assert_eq!(aggregate_votes(&label_seq("RRNNNN")).unwrap(), Label::NonRoutine);
        assert_eq!(aggregate_votes(&label_seq("NNNNNN")).unwrap(), Label::NonRoutine);
        assert!(aggregate_votes(&label_seq("RRR")).is_err());
        assert!(aggregate_votes(&label_seq("RRRRRRR")).is_err());
    }

    fn tiny_dataset(n_globals: usize) -> StudyDataset {
        let mut rng = Rng::new(50);
        let mut days = Vec::new();
        for (i, label) in [Label::Routine, Label::NonRoutine, Label::Routine]
            .iter()
            .enumerate()
        {
            let images: Vec<ImageDescriptor> = (0..4)
                .map(|_| {
                    let mut acts = rng.simplex_uniform(N_ACTIVITIES);
                    // Exercise exact float round-trips with awkward values.
                    acts[0] = 0.1 + 0.2;
                    ImageDescriptor {
                        ts: rng.next_f64() * 86_400.0,
                        activities: acts,
                        globals: (0..n_globals).map(|_| rng.normal()).collect(),
                    }
                })
                .collect();
            days.push(DayRecord {
                date: NaiveDate::from_ymd_opt(2021, 6, 1 + i as u32).unwrap(),
                images,
                label: Some(*label),
            });
        }
        StudyDataset {
            users: vec![UserDays {
                user_id: "u01".into(),
                days,
            }],
            n_globals,
        }
    }

    #[test]
    fn corpus_round_trip_is_exact() {
        for n_globals in [0usize, 8] {
            let dir = tempfile::tempdir().unwrap();
            let original = tiny_dataset(n_globals);
            write_corpus(dir.path(), &original).unwrap();
            let mut loaded = load_corpus(dir.path()).unwrap();
            // Loading sorts images by timestamp; apply the same order to the
            // original before comparing bit-for-bit.
            let mut expect = original.clone();
            for user in &mut expect.users {
                for day in &mut user.days {
                    day.images.sort_by(|a, b| a.ts.partial_cmp(&b.ts).unwrap());
                }
            }
            loaded.users[0].days.sort_by_key(|d| d.date);
            assert_eq!(expect, loaded);
        }
    }

    #[test]
    fn parse_errors_name_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let udir = dir.path().join("u01");
        std::fs::create_dir_all(&udir).unwrap();
        let header: String = std::iter::once("ts".to_string())
            .chain((0..N_ACTIVITIES).map(|i| format!("a{i}")))
            .collect::<Vec<_>>()
            .join(",");
        let good_row = format!("1.0{}", ",0.05".repeat(N_ACTIVITIES));
        let bad_row = format!("2.0,oops{}", ",0.05".repeat(N_ACTIVITIES - 1));
        std::fs::write(
            udir.join("2021-06-01.csv"),
            format!("{header}\n{good_row}\n{bad_row}\n"),
        )
        .unwrap();
        let err = load_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("2021-06-01.csv:3"), "{err}");
        assert!(err.contains("oops"), "{err}");
    }

    #[test]
    fn header_must_declare_all_activities() {
        let dir = tempfile::tempdir().unwrap();
        let udir = dir.path().join("u01");
        std::fs::create_dir_all(&udir).unwrap();
        std::fs::write(udir.join("2021-06-01.csv"), "ts,a0,a1\n1.0,0.5,0.5\n").unwrap();
        let err = load_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");
    }

    #[test]
    fn mixed_global_width_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut d0 = tiny_dataset(0);
        d0.users[0].user_id = "u01".into();
        write_corpus(dir.path(), &d0).unwrap();
        let mut d8 = tiny_dataset(8);
        d8.users[0].user_id = "u02".into();
        write_corpus(dir.path(), &d8).unwrap();
        let err = load_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("global columns"), "{err}");
    }

    #[test]
    fn votes_for_missing_day_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let ds = tiny_dataset(0);
        write_corpus(dir.path(), &ds).unwrap();
        let votes = dir.path().join("u01/votes.csv");
        let mut text = std::fs::read_to_string(&votes).unwrap();
        text.push_str("2021-07-15,R,R,R,R,R,R\n");
        std::fs::write(&votes, text).unwrap();
        let err = load_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("no matching day file"), "{err}");
    }

    #[test]
    fn bad_vote_code_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let ds = tiny_dataset(0);
        write_corpus(dir.path(), &ds).unwrap();
        let votes = dir.path().join("u01/votes.csv");
        let text = std::fs::read_to_string(&votes)
            .unwrap()
            .replace("2021-06-02,N", "2021-06-02,X");
        std::fs::write(&votes, text).unwrap();
        let err = load_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("bad vote"), "{err}");
        assert!(err.contains("votes.csv:3"), "{err}");
    }

    #[test]
    fn images_sorted_by_timestamp_on_load() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &tiny_dataset(0)).unwrap();
        let ds = load_corpus(dir.path()).unwrap();
        for day in &ds.users[0].days {
            for pair in day.images.windows(2) {
                assert!(pair[0].ts <= pair[1].ts);
            }
        }
    }

    #[test]
    fn unlabelled_days_load_with_none() {
        let dir = tempfile::tempdir().unwrap();
        let mut ds = tiny_dataset(0);
        ds.users[0].days[1].label = None;
        write_corpus(dir.path(), &ds).unwrap();
        let loaded = load_corpus(dir.path()).unwrap();
        assert_eq!(loaded.users[0].days[1].label, None);
        assert_eq!(loaded.users[0].days[0].label, Some(Label::Routine));
    }
}
