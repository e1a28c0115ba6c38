//! Thresholded correctness classification and dataset-level precision.
//!
//! A prediction is correct when every active bound holds: `d <= d_max`,
//! `delta <= delta_max`, `IoU >= iou_min`, `F >= f_min`, `NAD <= nad_max`,
//! `CD <= cd_max`. All comparisons are inclusive so grid endpoints are
//! well-defined and results reproduce bit for bit. `None` bounds encode the
//! unbounded column of the precision tables.

use crate::error::{Error, Result};
use crate::metrics::InstanceEval;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The correctness classifier's configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Maximum translation error in meters, or unbounded.
    pub d_max: Option<f64>,
    /// Maximum rotation error in radians, or unbounded.
    pub delta_max: Option<f64>,
    /// Minimum oriented IoU, or none.
    pub iou_min: Option<f64>,
    /// Minimum reconstruction F-score, or none.
    pub f_min: Option<f64>,
    /// Maximum normalized average distance, or none.
    pub nad_max: Option<f64>,
    /// Maximum chamfer distance in meters, or none.
    pub cd_max: Option<f64>,
    /// The F-score distance threshold (meters) the `f_min` bound refers to.
    pub delta_for_f: f64,
}

impl Thresholds {
    /// No bounds at all; callers must activate at least one.
    pub fn unbounded() -> Self {
        Self {
            d_max: None,
            delta_max: None,
            iou_min: None,
            f_min: None,
            nad_max: None,
            cd_max: None,
            delta_for_f: 0.01,
        }
    }

    /// Joint pose + shape, strict: 5 degrees, 1 cm, F_1cm >= 0.8.
    pub fn strict() -> Self {
        Self {
            d_max: Some(0.01),
            delta_max: Some(5f64.to_radians()),
            f_min: Some(0.8),
            ..Self::unbounded()
        }
    }

    /// Joint pose + shape, lenient: 10 degrees, 2 cm, F_1cm >= 0.6.
    pub fn lenient() -> Self {
        Self {
            d_max: Some(0.02),
            delta_max: Some(10f64.to_radians()),
            f_min: Some(0.6),
            ..Self::unbounded()
        }
    }

    /// Pose only, strict: 5 degrees, 1 cm, F unbounded.
    pub fn pose_strict() -> Self {
        Self {
            f_min: None,
            ..Self::strict()
        }
    }

    /// Pose only, lenient: 10 degrees, 2 cm, F unbounded.
    pub fn pose_lenient() -> Self {
        Self {
            f_min: None,
            ..Self::lenient()
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "strict" => Some(Self::strict()),
            "lenient" => Some(Self::lenient()),
            "pose-strict" => Some(Self::pose_strict()),
            "pose-lenient" => Some(Self::pose_lenient()),
            _ => None,
        }
    }

    /// The names accepted by [`Thresholds::preset`].
    pub const PRESET_NAMES: [&'static str; 4] =
        ["strict", "lenient", "pose-strict", "pose-lenient"];

    pub fn has_active_bound(&self) -> bool {
        self.d_max.is_some()
            || self.delta_max.is_some()
            || self.iou_min.is_some()
            || self.f_min.is_some()
            || self.nad_max.is_some()
            || self.cd_max.is_some()
    }
}

/// Applies the correctness classifier to one evaluated instance.
///
/// Absent predictions are incorrect by definition. For present predictions a
/// NaN field behind an active bound is a [`Error::MissingField`] (the inputs
/// needed for that metric were never supplied), not a silent failure.
pub fn classify_correct(eval: &InstanceEval, thresholds: &Thresholds) -> Result<bool> {
    if !thresholds.has_active_bound() {
        return Err(Error::NoActiveBound);
    }
    if !eval.present {
        return Ok(false);
    }
    let check_upper = |value: f64, bound: Option<f64>, field: &'static str| -> Result<bool> {
        match bound {
            None => Ok(true),
            Some(limit) => {
                if value.is_nan() {
                    Err(Error::MissingField {
                        field,
                        instance_id: eval.instance_id.clone(),
                    })
                } else {
                    Ok(value <= limit)
                }
            }
        }
    };
    let mut ok = check_upper(eval.d, thresholds.d_max, "d")?;
    ok &= check_upper(eval.delta, thresholds.delta_max, "delta")?;
    ok &= check_upper(eval.cd, thresholds.cd_max, "cd")?;
    ok &= check_upper(eval.nad, thresholds.nad_max, "nad")?;
    let check_lower = |value: f64, bound: Option<f64>, field: &'static str| -> Result<bool> {
        match bound {
            None => Ok(true),
            Some(limit) => {
                if value.is_nan() {
                    Err(Error::MissingField {
                        field,
                        instance_id: eval.instance_id.clone(),
                    })
                } else {
                    Ok(value >= limit)
                }
            }
        }
    };
    ok &= check_lower(eval.iou_oriented, thresholds.iou_min, "iou_oriented")?;
    ok &= check_lower(eval.f_score, thresholds.f_min, "f_score")?;
    Ok(ok)
}

/// Per-category slice of a precision report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryPrecision {
    pub correct: usize,
    pub count: usize,
    pub precision: f64,
}

/// Precision over a dataset with per-category breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub overall: f64,
    pub correct: usize,
    pub count: usize,
    pub per_category: BTreeMap<String, CategoryPrecision>,
    pub thresholds: Thresholds,
}

/// Fraction of instances passing the classifier, overall and per category.
pub fn precision(evals: &[InstanceEval], thresholds: &Thresholds) -> Result<PrecisionReport> {
    if evals.is_empty() {
        return Err(Error::EmptyInput("instance evaluations"));
    }
    let mut correct_total = 0usize;
    let mut per_category: BTreeMap<String, CategoryPrecision> = BTreeMap::new();
    for eval in evals {
        let correct = classify_correct(eval, thresholds)?;
        let slot = per_category
            .entry(eval.category.clone())
            .or_insert(CategoryPrecision {
                correct: 0,
                count: 0,
                precision: 0.0,
            });
        slot.count += 1;
        if correct {
            slot.correct += 1;
            correct_total += 1;
        }
    }
    for slot in per_category.values_mut() {
        slot.precision = slot.correct as f64 / slot.count as f64;
    }
    Ok(PrecisionReport {
        overall: correct_total as f64 / evals.len() as f64,
        correct: correct_total,
        count: evals.len(),
        per_category,
        thresholds: *thresholds,
    })
}

/// Which threshold a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Translation error bound in meters.
    D,
    /// Rotation error bound in radians.
    Delta,
    /// Minimum F-score bound.
    F,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::D => "d",
            SweepAxis::Delta => "delta",
            SweepAxis::F => "f",
        }
    }

    /// The default sweep grid: d in [0, 5 cm] step 0.5 cm, delta in
    /// [0, 20 deg] step 1 deg, F in [0, 1] step 0.05.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepAxis::D => (0..=10).map(|i| i as f64 * 0.005).collect(),
            SweepAxis::Delta => (0..=20).map(|i| (i as f64).to_radians()).collect(),
            SweepAxis::F => (0..=20).map(|i| i as f64 * 0.05).collect(),
        }
    }
}

/// Precision as a function of one swept threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Curve {
    /// Error-bound sweeps (d, delta) must be non-decreasing, score sweeps
    /// (f) non-increasing.
    pub fn is_monotone(&self) -> bool {
        let pairs = self.values.windows(2);
        match self.axis {
            SweepAxis::D | SweepAxis::Delta => pairs.clone().all(|w| w[1] >= w[0]),
            SweepAxis::F => pairs.clone().all(|w| w[1] <= w[0]),
        }
    }
}

/// Sweeps one bound of `base` across `grid` (ascending), computing overall
/// precision at each value.
pub fn sweep(
    evals: &[InstanceEval],
    axis: SweepAxis,
    grid: &[f64],
    base: &Thresholds,
) -> Result<Curve> {
    if evals.is_empty() {
        return Err(Error::EmptyInput("instance evaluations"));
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput("sweep grid"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedGrid);
    }
    let mut values = Vec::with_capacity(grid.len());
    for &g in grid {
        let mut thresholds = *base;
        match axis {
            SweepAxis::D => thresholds.d_max = Some(g),
            SweepAxis::Delta => thresholds.delta_max = Some(g),
            SweepAxis::F => thresholds.f_min = Some(g),
        }
        values.push(precision(evals, &thresholds)?.overall);
    }
    Ok(Curve {
        axis,
        grid: grid.to_vec(),
        values,
    })
}

/// Multi-hypothesis precision: an instance counts for `best` if any
/// hypothesis passes and for `worst` only if all do.
pub fn precision_best_worst(
    hypothesis_evals: &[Vec<InstanceEval>],
    thresholds: &Thresholds,
) -> Result<(f64, f64)> {
    if hypothesis_evals.is_empty() {
        return Err(Error::EmptyInput("hypothesis lists"));
    }
    let mut best = 0usize;
    let mut worst = 0usize;
    for hypotheses in hypothesis_evals {
        if hypotheses.is_empty() {
            return Err(Error::EmptyInput("hypotheses for instance"));
        }
        let mut any = false;
        let mut all = true;
        for hypothesis in hypotheses {
            let ok = classify_correct(hypothesis, thresholds)?;
            any |= ok;
            all &= ok;
        }
        best += usize::from(any);
        worst += usize::from(all);
    }
    let n = hypothesis_evals.len() as f64;
    Ok((best as f64 / n, worst as f64 / n))
}
