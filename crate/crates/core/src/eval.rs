//! Binary classification metrics for day labels.
//!
//! Both classes are scored symmetrically (precision, recall, F1 each), then
//! combined two ways: `macro` averages the two classes equally, `weighted`
//! averages them by ground-truth support. Degenerate ratios (a class never
//! predicted, or absent from the ground truth) score 0 rather than NaN.

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Confusion counts; `actual` then `predicted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub routine_as_routine: usize,
    pub routine_as_non_routine: usize,
    pub non_routine_as_routine: usize,
    pub non_routine_as_non_routine: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.routine_as_routine
            + self.routine_as_non_routine
            + self.non_routine_as_routine
            + self.non_routine_as_non_routine
    }
}

/// Precision / recall / F1 for one class treated as "positive".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Ground-truth count of this class.
    pub support: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(tp: usize, fp: usize, fn_: usize, support: usize) -> ClassMetrics {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub routine: ClassMetrics,
    pub non_routine: ClassMetrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

impl EvalReport {
    /// Metric columns in report order:
    /// accuracy, weighted F/P/R, macro F/P/R.
    pub fn metric_cells(&self) -> [f64; 7] {
        [
            self.accuracy,
            self.weighted_f1,
            self.weighted_precision,
            self.weighted_recall,
            self.macro_f1,
            self.macro_precision,
            self.macro_recall,
        ]
    }
}

/// Scores predictions against ground truth. The slices must be nonempty and
/// of equal length.
pub fn evaluate(gt: &[Label], pred: &[Label]) -> Result<EvalReport> {
    if gt.is_empty() {
        return Err(Error::InvalidInput("nothing to evaluate".into()));
    }
    if gt.len() != pred.len() {
        return Err(Error::InvalidInput(format!(
            "{} ground-truth labels vs {} predictions",
            gt.len(),
            pred.len()
        )));
    }

    let mut c = Confusion {
        routine_as_routine: 0,
        routine_as_non_routine: 0,
        non_routine_as_routine: 0,
        non_routine_as_non_routine: 0,
    };
    for (g, p) in gt.iter().zip(pred) {
        match (g, p) {
            (Label::Routine, Label::Routine) => c.routine_as_routine += 1,
            (Label::Routine, Label::NonRoutine) => c.routine_as_non_routine += 1,
            (Label::NonRoutine, Label::Routine) => c.non_routine_as_routine += 1,
            (Label::NonRoutine, Label::NonRoutine) => c.non_routine_as_non_routine += 1,
        }
    }

    let routine_support = c.routine_as_routine + c.routine_as_non_routine;
    let non_routine_support = c.non_routine_as_routine + c.non_routine_as_non_routine;
    let routine = class_metrics(
        c.routine_as_routine,
        c.non_routine_as_routine,
        c.routine_as_non_routine,
        routine_support,
    );
    let non_routine = class_metrics(
        c.non_routine_as_non_routine,
        c.routine_as_non_routine,
        c.non_routine_as_routine,
        non_routine_support,
    );

    let total = gt.len() as f64;
    let wr = routine_support as f64 / total;
    let wn = non_routine_support as f64 / total;
    let weighted = |r: f64, n: f64| wr * r + wn * n;

    Ok(EvalReport {
        confusion: c,
        accuracy: ratio(c.routine_as_routine + c.non_routine_as_non_routine, gt.len()),
        routine,
        non_routine,
        macro_precision: 0.5 * (routine.precision + non_routine.precision),
        macro_recall: 0.5 * (routine.recall + non_routine.recall),
        macro_f1: 0.5 * (routine.f1 + non_routine.f1),
        weighted_precision: weighted(routine.precision, non_routine.precision),
        weighted_recall: weighted(routine.recall, non_routine.recall),
        weighted_f1: weighted(routine.f1, non_routine.f1),
    })
}
