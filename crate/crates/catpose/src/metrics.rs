//! Per-instance error metrics for categorical pose and shape estimation.
//!
//! Covers translation error `d`, symmetry-aware rotation error `delta`,
//! oriented and axis-aligned box IoU, chamfer distance, normalized average
//! distance, and the reconstruction F-score, plus [`evaluate_instance`]
//! which computes all of them for one ground-truth/prediction pair.
//!
//! The rotation error is the geodesic angle
//! `arccos(clamp((trace(R_gt R_est^T) - 1) / 2))` in `[0, pi]`. For
//! categories with a continuous symmetry about the object up-axis, the
//! rotation error is the angle between the two rotated up-axes, and box IoU
//! is maximized over discrete rotations of the estimated box about its own
//! up-axis.

use crate::error::{Error, Result};
use crate::geometry::{
    aabb_of_points, box_intersection_volume, Aabb, Extents, OrientedBox, RigidTransform,
};
use crate::sampling::{sample_surface, PointSet, TriMesh};
use crate::spatial::NnIndex;
#[cfg(test)]
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Number of discrete up-axis rotations tried when maximizing IoU for
/// symmetric categories.
pub const DEFAULT_SYMMETRY_ROTATIONS: usize = 36;

/// Continuous rotational symmetry class of a category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    /// No symmetry; full geodesic rotation error applies.
    None,
    /// Rotations about the object up-axis (+y) are not errors.
    AxisY,
}

/// Default category-to-symmetry mapping: bottles, bowls, and cans are
/// symmetric about their up-axis; all other categories are not.
pub fn default_symmetry_for_category(category: &str) -> SymmetryClass {
    match category {
        "bottle" | "bowl" | "can" => SymmetryClass::AxisY,
        _ => SymmetryClass::None,
    }
}

/// Every per-instance metric value entering the correctness classifier.
///
/// Fields that could not be computed because their inputs are absent (for
/// example box IoU without predicted extents, or every metric of a missing
/// prediction) hold NaN; `present` distinguishes "prediction evaluated" from
/// "prediction missing entirely".
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEval {
    pub instance_id: String,
    pub category: String,
    pub present: bool,
    /// Translation error in meters.
    pub d: f64,
    /// Rotation error in radians, in `[0, pi]`.
    pub delta: f64,
    pub iou_oriented: f64,
    pub iou_axis_aligned: f64,
    /// Chamfer distance in meters.
    pub cd: f64,
    /// Normalized average distance (dimensionless).
    pub nad: f64,
    pub f_recall: f64,
    pub f_precision: f64,
    pub f_score: f64,
    /// The distance threshold (meters) the F-score was computed at.
    pub fscore_delta: f64,
}

impl InstanceEval {
    /// Placeholder for a ground-truth instance with no prediction; counted
    /// as incorrect by the classifier without raising missing-field errors.
    pub fn absent(instance_id: &str, category: &str, fscore_delta: f64) -> Self {
        Self {
            instance_id: instance_id.to_string(),
            category: category.to_string(),
            present: false,
            d: f64::NAN,
            delta: f64::NAN,
            iou_oriented: f64::NAN,
            iou_axis_aligned: f64::NAN,
            cd: f64::NAN,
            nad: f64::NAN,
            f_recall: f64::NAN,
            f_precision: f64::NAN,
            f_score: f64::NAN,
            fscore_delta,
        }
    }
}

/// Translation error: Euclidean distance between the pose translations.
pub fn translation_error(gt: &RigidTransform, est: &RigidTransform) -> f64 {
    (gt.translation - est.translation).norm()
}

/// Rotation error in radians, honoring the symmetry class.
pub fn rotation_error(gt: &RigidTransform, est: &RigidTransform, sym: SymmetryClass) -> f64 {
    match sym {
        SymmetryClass::None => {
            let relative = gt.rotation * est.rotation.transpose();
            let cos = ((relative.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
            cos.acos()
        }
        SymmetryClass::AxisY => {
            let cos = gt.up_axis().dot(&est.up_axis()).clamp(-1.0, 1.0);
            cos.acos()
        }
    }
}

/// Plain intersection-over-union of two oriented boxes via exact polytope
/// clipping.
pub fn box_iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let intersection = box_intersection_volume(a, b);
    let union = a.volume() + b.volume() - intersection;
    if union <= 0.0 {
        return 0.0;
    }
    (intersection / union).clamp(0.0, 1.0)
}

/// Oriented IoU with symmetry handling, using the default number of up-axis
/// rotations for symmetric categories.
pub fn iou_oriented(gt: &OrientedBox, est: &OrientedBox, sym: SymmetryClass) -> f64 {
    iou_oriented_with_rotations(gt, est, sym, DEFAULT_SYMMETRY_ROTATIONS)
}

/// Oriented IoU maximized over `rotations` discrete spins of the estimated
/// box about its own up-axis when the category is symmetric.
pub fn iou_oriented_with_rotations(
    gt: &OrientedBox,
    est: &OrientedBox,
    sym: SymmetryClass,
    rotations: usize,
) -> f64 {
    match sym {
        SymmetryClass::None => box_iou(gt, est),
        SymmetryClass::AxisY => {
            let rotations = rotations.max(1);
            let mut best = 0.0f64;
            for k in 0..rotations {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / rotations as f64;
                let spun = OrientedBox::new(
                    est.pose.compose(&RigidTransform::rotation_y(angle)),
                    est.extents,
                );
                best = best.max(box_iou(gt, &spun));
            }
            best
        }
    }
}

/// Axis-aligned IoU of the camera-frame bounding boxes of two posed shapes.
pub fn iou_axis_aligned(gt: &PointSet, est: &PointSet) -> Result<f64> {
    let a = aabb_of_points(gt)?;
    let b = aabb_of_points(est)?;
    Ok(aabb_iou(&a, &b))
}

/// IoU of two axis-aligned boxes.
pub fn aabb_iou(a: &Aabb, b: &Aabb) -> f64 {
    let intersection = a.intersection_volume(b);
    let union = a.volume() + b.volume() - intersection;
    if union <= 0.0 {
        // Two degenerate (zero-volume) boxes; treat exact coincidence as 1.
        return if a == b { 1.0 } else { 0.0 };
    }
    (intersection / union).clamp(0.0, 1.0)
}

/// Directed average distance: mean nearest-neighbor distance from each point
/// of `from` into the indexed set.
pub fn average_distance(from: &PointSet, to: &NnIndex) -> Result<f64> {
    if from.is_empty() {
        return Err(Error::EmptyInput("source point set"));
    }
    let sum: f64 = from.iter().map(|p| to.nearest(p).distance).sum();
    Ok(sum / from.len() as f64)
}

/// Chamfer distance: the symmetric mean of the two directed average
/// distances.
pub fn chamfer_distance(s: &PointSet, s_est: &PointSet) -> Result<f64> {
    if s.is_empty() || s_est.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    let idx_s = NnIndex::build(s)?;
    let idx_est = NnIndex::build(s_est)?;
    let forward = average_distance(s, &idx_est)?;
    let backward = average_distance(s_est, &idx_s)?;
    Ok(0.5 * forward + 0.5 * backward)
}

/// Normalized average distance: each directed average distance divided by
/// the diameter of its source set, maximum over both directions.
pub fn nad(s: &PointSet, s_est: &PointSet) -> Result<f64> {
    let diam_s = crate::sampling::diameter(s)?;
    let diam_est = crate::sampling::diameter(s_est)?;
    if !(diam_s > 0.0) || !(diam_est > 0.0) {
        return Err(Error::DegenerateDiameter);
    }
    let idx_s = NnIndex::build(s)?;
    let idx_est = NnIndex::build(s_est)?;
    let forward = average_distance(s, &idx_est)?;
    let backward = average_distance(s_est, &idx_s)?;
    Ok((forward / diam_s).max(backward / diam_est))
}

/// Reconstruction recall, precision, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FScore {
    pub recall: f64,
    pub precision: f64,
    pub score: f64,
}

/// Reconstruction F-score at distance threshold `delta` (strict `< delta`
/// per the Iverson bracket); the score is 0 when precision and recall are
/// both 0.
pub fn f_score(s: &PointSet, s_est: &PointSet, delta: f64) -> Result<FScore> {
    if s.is_empty() || s_est.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    if !(delta > 0.0) {
        return Err(Error::EmptyInput("f-score threshold"));
    }
    let idx_s = NnIndex::build(s)?;
    let idx_est = NnIndex::build(s_est)?;
    let recall =
        s.iter().filter(|p| idx_est.nearest(p).distance < delta).count() as f64 / s.len() as f64;
    let precision = s_est.iter().filter(|p| idx_s.nearest(p).distance < delta).count() as f64
        / s_est.len() as f64;
    Ok(FScore {
        recall,
        precision,
        score: harmonic_mean(precision, recall),
    })
}

fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Which frame reconstruction metrics (CD, NAD, F-score) are computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalFrame {
    /// Posed evaluation: both shapes carried into the camera frame.
    Camera,
    /// Object-frame evaluation, ignoring the poses for reconstruction.
    Canonical,
}

/// Ground-truth side of one evaluation.
pub struct GroundTruthShape<'a> {
    pub mesh: &'a TriMesh,
    pub pose: RigidTransform,
    pub extents: Extents,
    pub symmetry: SymmetryClass,
}

/// Predicted shape: either a mesh (sampled at evaluation time) or a point
/// set (used verbatim).
pub enum ShapeRef<'a> {
    Mesh(&'a TriMesh),
    Points(&'a PointSet),
}

/// Prediction side of one evaluation.
pub struct EstimateShape<'a> {
    pub shape: ShapeRef<'a>,
    pub pose: RigidTransform,
    pub extents: Option<Extents>,
}

/// Per-instance evaluation settings.
#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    /// F-score distance threshold in meters.
    pub fscore_delta: f64,
    /// Surface samples drawn from each mesh.
    pub n_samples: usize,
    /// Sampling seed; the estimate mesh uses `seed ^ 1`.
    pub seed: u64,
    pub frame: EvalFrame,
    /// Up-axis rotations tried for symmetric-category IoU.
    pub symmetry_rotations: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            fscore_delta: 0.01,
            n_samples: crate::sampling::DEFAULT_SAMPLE_COUNT,
            seed: 0,
            frame: EvalFrame::Camera,
            symmetry_rotations: DEFAULT_SYMMETRY_ROTATIONS,
        }
    }
}

/// Derives the per-instance sampling seed from a global seed, independent of
/// evaluation order (FNV-1a over the instance id, XORed into the seed).
pub fn instance_seed(global_seed: u64, instance_id: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in instance_id.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    global_seed ^ hash
}

/// Computes every metric for one ground-truth/prediction pair.
pub fn evaluate_instance(
    instance_id: &str,
    category: &str,
    gt: &GroundTruthShape,
    est: &EstimateShape,
    cfg: &EvalConfig,
) -> Result<InstanceEval> {
    let gt_samples = sample_surface(gt.mesh, cfg.n_samples, cfg.seed)?;
    let est_samples = match est.shape {
        ShapeRef::Mesh(mesh) => sample_surface(mesh, cfg.n_samples, cfg.seed ^ 1)?,
        ShapeRef::Points(points) => {
            if points.is_empty() {
                return Err(Error::EmptyInput("predicted point set"));
            }
            points.clone()
        }
    };

    let d = translation_error(&gt.pose, &est.pose);
    let delta = rotation_error(&gt.pose, &est.pose, gt.symmetry);

    let gt_box = OrientedBox::new(gt.pose, gt.extents);
    let iou_or = match est.extents {
        Some(extents) => iou_oriented_with_rotations(
            &gt_box,
            &OrientedBox::new(est.pose, extents),
            gt.symmetry,
            cfg.symmetry_rotations,
        ),
        None => f64::NAN,
    };

    // Axis-aligned IoU is defined on camera-frame bounding boxes regardless
    // of the reconstruction frame. Mesh bounds come from the vertices.
    let gt_posed_vertices =
        PointSet::new_unchecked(gt.mesh.vertices.iter().map(|v| gt.pose.transform_point(v)).collect());
    let est_posed_vertices = match est.shape {
        ShapeRef::Mesh(mesh) => PointSet::new_unchecked(
            mesh.vertices.iter().map(|v| est.pose.transform_point(v)).collect(),
        ),
        ShapeRef::Points(_) => est.pose.transform_points(&est_samples),
    };
    let iou_aa = iou_axis_aligned(&gt_posed_vertices, &est_posed_vertices)?;

    let (s, s_est) = match cfg.frame {
        EvalFrame::Camera => (
            gt.pose.transform_points(&gt_samples),
            est.pose.transform_points(&est_samples),
        ),
        EvalFrame::Canonical => (gt_samples, est_samples),
    };

    let idx_s = NnIndex::build(&s)?;
    let idx_est = NnIndex::build(&s_est)?;
    let forward: Vec<f64> = s.iter().map(|p| idx_est.nearest(p).distance).collect();
    let backward: Vec<f64> = s_est.iter().map(|p| idx_s.nearest(p).distance).collect();
    let ad_forward = forward.iter().sum::<f64>() / forward.len() as f64;
    let ad_backward = backward.iter().sum::<f64>() / backward.len() as f64;
    let cd = 0.5 * ad_forward + 0.5 * ad_backward;

    let diam_s = crate::sampling::diameter(&s)?;
    let diam_est = crate::sampling::diameter(&s_est)?;
    if !(diam_s > 0.0) || !(diam_est > 0.0) {
        return Err(Error::DegenerateDiameter);
    }
    let nad_value = (ad_forward / diam_s).max(ad_backward / diam_est);

    let recall = forward.iter().filter(|&&d| d < cfg.fscore_delta).count() as f64
        / forward.len() as f64;
    let precision = backward.iter().filter(|&&d| d < cfg.fscore_delta).count() as f64
        / backward.len() as f64;

    Ok(InstanceEval {
        instance_id: instance_id.to_string(),
        category: category.to_string(),
        present: true,
        d,
        delta,
        iou_oriented: iou_or,
        iou_axis_aligned: iou_aa,
        cd,
        nad: nad_value,
        f_recall: recall,
        f_precision: precision,
        f_score: harmonic_mean(precision, recall),
        fscore_delta: cfg.fscore_delta,
    })
}
