//! Rigid-transform algebra, oriented boxes, and the convex-polytope
//! machinery behind exact oriented IoU.
//!
//! Conventions:
//! - Rotations are stored as 3x3 matrices applied as `y = R x` (column
//!   vectors). Unit quaternions appear only at the file-format boundary.
//! - A pose maps points from the object frame to the camera frame.
//! - Object frames follow the ShapeNet alignment: +y is up, the origin is
//!   the center of the canonical axis-aligned bounding box.

mod polytope;

pub use polytope::{box_intersection_volume, ConvexPolytope, HalfSpace};

use crate::error::{Error, Result};
use crate::sampling::PointSet;
use nalgebra::{Matrix3, UnitQuaternion, Vector3};

/// Maximum elementwise deviation of `R^T R` from identity for a matrix to be
/// considered a valid rotation without cleanup.
pub const ROTATION_TOL: f64 = 1e-9;

/// Deviation beyond which a rotation matrix is rejected instead of being
/// re-orthonormalized.
const ROTATION_REJECT_TOL: f64 = 1e-6;

/// A rigid transform (rotation + translation), the pose of one frame in
/// another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    /// The identity transform.
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a transform from a rotation matrix and translation vector.
    ///
    /// The rotation must be orthonormal with determinant +1. Deviations up to
    /// `1e-6` are repaired by polar decomposition; larger ones are rejected
    /// with [`Error::InvalidRotation`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if rotation.iter().any(|x| !x.is_finite()) || translation.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidRotation(
                "non-finite rotation or translation".to_string(),
            ));
        }
        let err = orthonormality_error(&rotation);
        let det = rotation.determinant();
        if err > ROTATION_REJECT_TOL || (det - 1.0).abs() > ROTATION_REJECT_TOL {
            return Err(Error::InvalidRotation(format!(
                "orthonormality error {err:.3e}, determinant {det:.9}"
            )));
        }
        let rotation = if err > ROTATION_TOL {
            orthonormalize_polar(&rotation)?
        } else {
            rotation
        };
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a transform from a unit quaternion given as `(w, x, y, z)`.
    ///
    /// This is the file-format entry point: quaternions whose norm deviates
    /// from 1 by more than `1e-6` are rejected, smaller drift is normalized
    /// away.
    pub fn from_quaternion_wxyz(quat: [f64; 4], translation: Vector3<f64>) -> Result<Self> {
        let [w, x, y, z] = quat;
        if quat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRotation("non-finite quaternion".to_string()));
        }
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > ROTATION_REJECT_TOL {
            return Err(Error::InvalidRotation(format!(
                "quaternion norm {norm:.9} is not 1"
            )));
        }
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(w, x, y, z));
        Self::new(q.to_rotation_matrix().into_inner(), translation)
    }

    /// Serializes the rotation as a unit quaternion `(w, x, y, z)` with
    /// non-negative `w`.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_matrix(&self.rotation);
        let q = if q.w < 0.0 { -q.into_inner() } else { q.into_inner() };
        [q.w, q.i, q.j, q.k]
    }

    /// Rotation of `angle` radians about the x axis.
    pub fn rotation_x(angle: f64) -> Self {
        Self {
            rotation: Matrix3::from(nalgebra::Rotation3::from_axis_angle(
                &Vector3::x_axis(),
                angle,
            )),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation of `angle` radians about the y axis.
    pub fn rotation_y(angle: f64) -> Self {
        Self {
            rotation: Matrix3::from(nalgebra::Rotation3::from_axis_angle(
                &Vector3::y_axis(),
                angle,
            )),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation of `angle` radians about the z axis.
    pub fn rotation_z(angle: f64) -> Self {
        Self {
            rotation: Matrix3::from(nalgebra::Rotation3::from_axis_angle(
                &Vector3::z_axis(),
                angle,
            )),
            translation: Vector3::zeros(),
        }
    }

    /// Pure translation.
    pub fn translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation of `angle` radians about an arbitrary axis (normalized here).
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let axis = nalgebra::Unit::new_normalize(axis);
        Self {
            rotation: Matrix3::from(nalgebra::Rotation3::from_axis_angle(&axis, angle)),
            translation: Vector3::zeros(),
        }
    }

    /// Chains two transforms: applying the result equals applying `other`
    /// first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// The inverse transform, so that `t.compose(&t.inverse())` is identity.
    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Maps a single point into the target frame.
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Maps every point of a set into the target frame.
    pub fn transform_points(&self, pts: &PointSet) -> PointSet {
        PointSet::new_unchecked(pts.iter().map(|p| self.transform_point(p)).collect())
    }

    /// The rotated canonical up axis (+y) in the target frame.
    pub fn up_axis(&self) -> Vector3<f64> {
        self.rotation.column(1).into_owned()
    }
}

/// Maximum elementwise deviation of `R^T R` from the identity.
pub fn orthonormality_error(rotation: &Matrix3<f64>) -> f64 {
    let residual = rotation.transpose() * rotation - Matrix3::identity();
    residual.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Closest rotation matrix in the Frobenius sense, via polar decomposition
/// `R = U V^T` with the sign of the last singular vector fixed so det = +1.
fn orthonormalize_polar(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let svd = m.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => {
            return Err(Error::InvalidRotation(
                "polar decomposition failed".to_string(),
            ))
        }
    };
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * vt;
    }
    Ok(r)
}

/// Full side lengths of a box along its three object axes, all strictly
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extents(Vector3<f64>);

impl Extents {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0 && z > 0.0) || !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonPositiveExtents(x, y, z));
        }
        Ok(Self(Vector3::new(x, y, z)))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        Self::new(v.x, v.y, v.z)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        self.0
    }

    /// Box volume, the product of the side lengths.
    pub fn volume(&self) -> f64 {
        self.0.x * self.0.y * self.0.z
    }

    /// Uniformly scaled extents (used by fixture generators).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_vector(self.0 * factor)
    }
}

/// An oriented bounding box: a canonical box `B(O)` carried to the camera
/// frame by a pose. The box is centered at the object-frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub pose: RigidTransform,
    pub extents: Extents,
}

impl OrientedBox {
    pub fn new(pose: RigidTransform, extents: Extents) -> Self {
        Self { pose, extents }
    }

    /// The eight corners in the target frame. Ordering is the binary
    /// pattern of the sign choices (---, +--, -+-, ++-, --+, +-+, -++, +++).
    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let h = self.extents.as_vector() * 0.5;
        let mut out = [Vector3::zeros(); 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let local = Vector3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            );
            *corner = self.pose.transform_point(&local);
        }
        out
    }

    /// The box volume.
    pub fn volume(&self) -> f64 {
        self.extents.volume()
    }

    /// The six bounding half-spaces with outward normals; a point is inside
    /// the box iff it satisfies all of them.
    pub fn half_spaces(&self) -> [HalfSpace; 6] {
        let h = self.extents.as_vector() * 0.5;
        let mut out = [HalfSpace {
            normal: Vector3::zeros(),
            offset: 0.0,
        }; 6];
        for axis in 0..3 {
            for (side, sign) in [(0usize, -1.0f64), (1, 1.0)] {
                let normal = self.pose.rotation.column(axis).into_owned() * sign;
                let face_point =
                    self.pose.transform_point(&(Vector3::ith(axis, sign * h[axis])));
                out[axis * 2 + side] = HalfSpace {
                    normal,
                    offset: normal.dot(&face_point),
                };
            }
        }
        out
    }

    /// Exact containment test in the target frame.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let local = self.pose.inverse().transform_point(p);
        let h = self.extents.as_vector() * 0.5;
        local.x.abs() <= h.x && local.y.abs() <= h.y && local.z.abs() <= h.z
    }
}

/// An axis-aligned bounding box. Unlike [`OrientedBox`], zero extents are
/// representable (single points, axis-aligned segments).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub center: Vector3<f64>,
    pub extents: Vector3<f64>,
}

impl Aabb {
    pub fn min(&self) -> Vector3<f64> {
        self.center - self.extents * 0.5
    }

    pub fn max(&self) -> Vector3<f64> {
        self.center + self.extents * 0.5
    }

    pub fn volume(&self) -> f64 {
        self.extents.x * self.extents.y * self.extents.z
    }

    /// Volume of the overlap with another axis-aligned box.
    pub fn intersection_volume(&self, other: &Aabb) -> f64 {
        let lo = self.min().sup(&other.min());
        let hi = self.max().inf(&other.max());
        let d = hi - lo;
        if d.x <= 0.0 || d.y <= 0.0 || d.z <= 0.0 {
            0.0
        } else {
            d.x * d.y * d.z
        }
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let lo = self.min();
        let hi = self.max();
        (0..3).all(|i| p[i] >= lo[i] && p[i] <= hi[i])
    }
}

/// Axis-aligned bounding box of a point set (closed: every point is inside).
pub fn aabb_of_points(pts: &PointSet) -> Result<Aabb> {
    let first = *pts.iter().next().ok_or(Error::EmptyInput("point set"))?;
    let (lo, hi) = pts.iter().fold((first, first), |(lo, hi), p| {
        (lo.inf(p), hi.sup(p))
    });
    Ok(Aabb {
        center: (lo + hi) * 0.5,
        extents: hi - lo,
    })
}

/// Axis-aligned bounding box of raw vertex positions.
pub fn aabb_of_vertices(vertices: &[Vector3<f64>]) -> Result<Aabb> {
    let first = *vertices.first().ok_or(Error::EmptyInput("vertex list"))?;
    let (lo, hi) = vertices
        .iter()
        .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    Ok(Aabb {
        center: (lo + hi) * 0.5,
        extents: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_transform_eq(a: &RigidTransform, b: &RigidTransform, tol: f64) {
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.rotation[(i, j)], b.rotation[(i, j)], epsilon = tol);
            }
            assert_abs_diff_eq!(a.translation[i], b.translation[i], epsilon = tol);
        }
    }

    #[test]
    fn compose_identity_is_neutral() {
        let t = RigidTransform::rotation_z(0.3)
            .compose(&RigidTransform::translation(Vector3::new(1.0, 2.0, 3.0)));
        assert_transform_eq(&RigidTransform::identity().compose(&t), &t, 0.0);
        assert_transform_eq(&t.compose(&RigidTransform::identity()), &t, 0.0);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = RigidTransform::from_axis_angle(Vector3::new(1.0, -2.0, 0.5), 1.1)
            .compose(&RigidTransform::translation(Vector3::new(0.2, -0.7, 1.9)));
        assert_transform_eq(&t.compose(&t.inverse()), &RigidTransform::identity(), 1e-9);
        assert_transform_eq(&t.inverse().compose(&t), &RigidTransform::identity(), 1e-9);
    }

    #[test]
    fn rotation_group_composition() {
        let quarter = RigidTransform::rotation_z(FRAC_PI_2);
        let half = quarter.compose(&quarter);
        assert_transform_eq(&half, &RigidTransform::rotation_z(PI), 1e-12);
    }

    #[test]
    fn invert_translation() {
        let t = RigidTransform::translation(Vector3::new(1.0, 2.0, 3.0));
        let inv = t.inverse();
        assert_abs_diff_eq!(inv.translation.x, -1.0);
        assert_abs_diff_eq!(inv.translation.y, -2.0);
        assert_abs_diff_eq!(inv.translation.z, -3.0);
        assert_transform_eq(&t.inverse().inverse(), &t, 1e-15);
    }

    #[test]
    fn transform_points_basics() {
        let pts = PointSet::new(vec![Vector3::new(1.0, 0.0, 0.0)]).unwrap();
        let id = RigidTransform::identity().transform_points(&pts);
        assert_eq!(id.as_slice()[0], Vector3::new(1.0, 0.0, 0.0));

        let lifted = RigidTransform::translation(Vector3::new(0.0, 0.0, 1.0))
            .transform_points(&PointSet::new(vec![Vector3::zeros()]).unwrap());
        assert_eq!(lifted.as_slice()[0], Vector3::new(0.0, 0.0, 1.0));

        let spun = RigidTransform::rotation_z(FRAC_PI_2).transform_points(&pts);
        assert_abs_diff_eq!(spun.as_slice()[0].x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spun.as_slice()[0].y, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn quaternion_round_trip() {
        let t = RigidTransform::from_axis_angle(Vector3::new(0.3, 1.0, -0.2), 0.77)
            .compose(&RigidTransform::translation(Vector3::new(0.1, 0.2, 0.3)));
        let q = t.quaternion_wxyz();
        let back = RigidTransform::from_quaternion_wxyz(q, t.translation).unwrap();
        assert_transform_eq(&t, &back, 1e-12);
    }

    #[test]
    fn bad_quaternion_rejected() {
        let err = RigidTransform::from_quaternion_wxyz([1.0, 1.0, 0.0, 0.0], Vector3::zeros());
        assert!(matches!(err, Err(Error::InvalidRotation(_))));
    }

    #[test]
    fn near_orthonormal_rotation_is_repaired() {
        let mut m = Matrix3::<f64>::identity();
        m[(0, 1)] = 1e-8;
        let t = RigidTransform::new(m, Vector3::zeros()).unwrap();
        assert!(orthonormality_error(&t.rotation) <= ROTATION_TOL);
    }

    #[test]
    fn obb_corners_unit_cube() {
        let cube = OrientedBox::new(
            RigidTransform::identity(),
            Extents::new(1.0, 1.0, 1.0).unwrap(),
        );
        let corners = cube.corners();
        for c in &corners {
            for i in 0..3 {
                assert_abs_diff_eq!(c[i].abs(), 0.5);
            }
        }
        let centroid: Vector3<f64> = corners.iter().sum::<Vector3<f64>>() / 8.0;
        assert_abs_diff_eq!(centroid.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn obb_corners_translated() {
        let boxx = OrientedBox::new(
            RigidTransform::translation(Vector3::new(1.0, 0.0, 0.0)),
            Extents::new(2.0, 2.0, 2.0).unwrap(),
        );
        for c in boxx.corners() {
            assert_abs_diff_eq!((c.x - 1.0).abs(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.y.abs(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.z.abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn obb_corners_rotation_permutes_axes() {
        let boxx = OrientedBox::new(
            RigidTransform::rotation_z(FRAC_PI_2),
            Extents::new(1.0, 2.0, 3.0).unwrap(),
        );
        // Rz(90) maps the (1,2,3) box onto a (2,1,3) box; compare corner sets.
        let expected = OrientedBox::new(
            RigidTransform::identity(),
            Extents::new(2.0, 1.0, 3.0).unwrap(),
        );
        let mut got: Vec<_> = boxx.corners().into_iter().collect();
        for want in expected.corners() {
            let pos = got
                .iter()
                .position(|g| (g - want).norm() < 1e-9)
                .expect("corner should match after axis permutation");
            got.swap_remove(pos);
        }
        assert!(got.is_empty());
    }

    #[test]
    fn obb_corner_spread_matches_extents() {
        let ext = Extents::new(0.3, 0.7, 0.2).unwrap();
        let boxx = OrientedBox::new(
            RigidTransform::from_axis_angle(Vector3::new(1.0, 1.0, 0.3), 0.9),
            ext,
        );
        let corners = boxx.corners();
        let max_dist = corners
            .iter()
            .flat_map(|a| corners.iter().map(move |b| (a - b).norm()))
            .fold(0.0f64, f64::max);
        assert_abs_diff_eq!(max_dist, ext.as_vector().norm(), epsilon = 1e-9);
    }

    #[test]
    fn aabb_of_points_examples() {
        let pts = PointSet::new(vec![Vector3::zeros(), Vector3::new(1.0, 1.0, 1.0)]).unwrap();
        let aabb = aabb_of_points(&pts).unwrap();
        assert_abs_diff_eq!(aabb.center.x, 0.5);
        assert_abs_diff_eq!(aabb.extents.x, 1.0);

        let single = PointSet::new(vec![Vector3::new(2.0, 3.0, 4.0)]).unwrap();
        let aabb = aabb_of_points(&single).unwrap();
        assert_eq!(aabb.extents, Vector3::zeros());

        let seg = PointSet::new(vec![
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
        ])
        .unwrap();
        let aabb = aabb_of_points(&seg).unwrap();
        assert_eq!(aabb.center, Vector3::zeros());
        assert_eq!(aabb.extents, Vector3::new(2.0, 0.0, 0.0));

        assert!(matches!(
            aabb_of_points(&PointSet::new_unchecked(vec![])),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn extents_reject_non_positive() {
        assert!(Extents::new(1.0, 0.0, 1.0).is_err());
        assert!(Extents::new(1.0, -0.1, 1.0).is_err());
        assert!(Extents::new(1.0, f64::NAN, 1.0).is_err());
    }
}
