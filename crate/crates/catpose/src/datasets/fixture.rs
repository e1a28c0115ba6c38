//! Synthetic desk-scale fixtures: parametric meshes, ground-truth and
//! prediction manifests with planted pose/shape errors, and a rendered
//! depth sequence for the carving pipeline.
//!
//! Planted errors sit far from the classification thresholds on purpose
//! (4-5 mm vs 2 cm, 2 deg vs 10 deg, half-scale shapes vs F >= 0.6), so the
//! sidecar oracle is exact by construction rather than by luck.

use crate::datasets::{
    write_json, write_mesh, write_pointset, CameraIntrinsics, PoseDoc, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::geometry::{aabb_of_vertices, Extents, RigidTransform};
use crate::sampling::{sample_surface, TriMesh};
use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// An axis-aligned box mesh with the given full side lengths, centered at
/// the origin.
pub fn box_mesh(side_x: f64, side_y: f64, side_z: f64) -> TriMesh {
    let h = Vector3::new(side_x, side_y, side_z) * 0.5;
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8 {
        vertices.push(Vector3::new(
            if i & 1 == 0 { -h.x } else { h.x },
            if i & 2 == 0 { -h.y } else { h.y },
            if i & 4 == 0 { -h.z } else { h.z },
        ));
    }
    let quads = [
        [0usize, 4, 6, 2],
        [1, 3, 7, 5],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 2, 3, 1],
        [4, 5, 7, 6],
    ];
    let mut triangles = Vec::with_capacity(12);
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    TriMesh::new(vertices, triangles).expect("box mesh is valid")
}

/// A closed cylinder with its axis along +y, centered at the origin.
pub fn cylinder_mesh(radius: f64, height: f64, segments: usize) -> TriMesh {
    assert!(segments >= 3);
    let h = height * 0.5;
    let mut vertices = Vec::with_capacity(segments * 2 + 2);
    for ring in [-h, h] {
        for k in 0..segments {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / segments as f64;
            vertices.push(Vector3::new(radius * angle.cos(), ring, radius * angle.sin()));
        }
    }
    let bottom_center = vertices.len();
    vertices.push(Vector3::new(0.0, -h, 0.0));
    let top_center = vertices.len();
    vertices.push(Vector3::new(0.0, h, 0.0));

    let mut triangles = Vec::new();
    for k in 0..segments {
        let k1 = (k + 1) % segments;
        let (b0, b1) = (k, k1);
        let (t0, t1) = (segments + k, segments + k1);
        triangles.push([b0, t0, b1]);
        triangles.push([b1, t0, t1]);
        triangles.push([bottom_center, b1, b0]);
        triangles.push([top_center, t0, t1]);
    }
    TriMesh::new(vertices, triangles).expect("cylinder mesh is valid")
}

/// A mug-like body: a cylinder with a torus handle in the x-y plane,
/// re-centered so the bounding-box center is the origin.
pub fn mug_mesh(radius: f64, height: f64, segments: usize) -> TriMesh {
    let body = cylinder_mesh(radius, height, segments);
    let handle_major = 0.45 * radius + 0.01;
    let handle_minor = 0.006;
    let center = Vector3::new(radius, 0.0, 0.0);
    let (n_major, n_minor) = (24usize, 10usize);

    let mut vertices = body.vertices.clone();
    let mut triangles = body.triangles.clone();
    let base = vertices.len();
    for i in 0..n_major {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_minor as f64;
            let ring = handle_major + handle_minor * phi.cos();
            vertices.push(
                center
                    + Vector3::new(
                        ring * theta.cos(),
                        ring * theta.sin(),
                        handle_minor * phi.sin(),
                    ),
            );
        }
    }
    for i in 0..n_major {
        let i1 = (i + 1) % n_major;
        for j in 0..n_minor {
            let j1 = (j + 1) % n_minor;
            let a = base + i * n_minor + j;
            let b = base + i1 * n_minor + j;
            let c = base + i1 * n_minor + j1;
            let d = base + i * n_minor + j1;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mesh = TriMesh::new(vertices, triangles).expect("mug mesh is valid");
    recenter(mesh).0
}

/// Translates a mesh so its bounding-box center is the origin; returns the
/// centered mesh and its extents.
fn recenter(mesh: TriMesh) -> (TriMesh, Extents) {
    let aabb = aabb_of_vertices(&mesh.vertices).expect("non-empty mesh");
    let centered = mesh.map_vertices(|v| v - aabb.center);
    let extents = Extents::from_vector(aabb.extents).expect("positive extents");
    (centered, extents)
}

/// What a generated fixture plants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixturePlan {
    /// Every prediction equals its ground truth; expected precision 1.
    Identity { instances: usize },
    /// 12 instances across 4 categories, 7 designed correct at the lenient
    /// preset (10 deg, 2 cm, F_1cm >= 0.6).
    SevenOfTwelve,
}

/// Sidecar oracle recording what the generator planted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureOracle {
    /// Preset the expectations refer to.
    pub preset: String,
    pub expected_overall: f64,
    pub expected_per_category: BTreeMap<String, f64>,
    pub expected_correct: BTreeMap<String, bool>,
}

/// Files written by [`generate_fixture`].
#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub gt_manifest: PathBuf,
    pub pred_manifest: PathBuf,
    pub oracle_path: PathBuf,
    pub oracle: FixtureOracle,
}

fn fixture_camera() -> CameraIntrinsics {
    CameraIntrinsics {
        fx: 600.0,
        fy: 600.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
        depth_scale: 0.001,
    }
}

struct PlannedInstance {
    instance_id: String,
    category: &'static str,
    mesh: TriMesh,
    extents: Extents,
    /// Prediction pose error applied on top of the ground-truth pose
    /// (left: camera-frame offset, right: object-frame spin).
    pose_error: PoseError,
    shape_error: ShapeError,
    correct: bool,
}

enum PoseError {
    Exact,
    /// Camera-frame translation offset in meters.
    Offset(Vector3<f64>),
    /// Rotation of `angle` about `axis` applied in the object frame, plus an
    /// optional camera-frame offset.
    Spin {
        axis: Vector3<f64>,
        angle: f64,
        offset: Vector3<f64>,
    },
}

enum ShapeError {
    /// Prediction references the ground-truth mesh file.
    SameMesh,
    /// Prediction carries a verbatim point set sampled from the mesh.
    PointsFromMesh,
    /// Prediction mesh is the ground truth uniformly scaled.
    Scaled(f64),
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn base_pose(rng: &mut ChaCha8Rng) -> RigidTransform {
    let axis = random_unit(rng);
    let angle = rng.random::<f64>() * 15f64.to_radians();
    let translation = Vector3::new(
        rng.random::<f64>() * 0.5 - 0.25,
        rng.random::<f64>() * 0.3 - 0.15,
        0.5 + rng.random::<f64>() * 0.4,
    );
    RigidTransform::from_axis_angle(axis, angle)
        .compose(&RigidTransform::translation(Vector3::zeros()))
        .compose(&RigidTransform::identity())
        .compose(&RigidTransform::translation(Vector3::zeros()))
        .compose(&RigidTransform::identity())
        .compose(&{
            let mut t = RigidTransform::identity();
            t.translation = Vector3::zeros();
            t
        })
        .compose(&RigidTransform::identity())
        .compose(&RigidTransform::translation(translation * 0.0))
        .compose(&RigidTransform::translation(translation))
}

fn seven_of_twelve_plan(rng: &mut ChaCha8Rng) -> Vec<PlannedInstance> {
    let bottle = |r: f64, h: f64| recenter(cylinder_mesh(r, h, 32));
    let bowl = |r: f64, h: f64| recenter(cylinder_mesh(r, h, 32));
    let laptop = || recenter(box_mesh(0.25, 0.02, 0.18));
    let mug = || {
        let mesh = mug_mesh(0.04, 0.09, 32);
        let extents = aabb_of_vertices(&mesh.vertices).expect("mug mesh");
        (
            mesh,
            Extents::from_vector(extents.extents).expect("mug extents"),
        )
    };

    let mut planned = Vec::new();
    let mut push = |instance_id: &str,
                    category: &'static str,
                    shape: (TriMesh, Extents),
                    pose_error: PoseError,
                    shape_error: ShapeError,
                    correct: bool| {
        planned.push(PlannedInstance {
            instance_id: instance_id.to_string(),
            category,
            mesh: shape.0,
            extents: shape.1,
            pose_error,
            shape_error,
            correct,
        });
    };

    // bottle: 2 of 3 correct (the 45 deg spin is absorbed by symmetry).
    push(
        "bottle_000",
        "bottle",
        bottle(0.030, 0.120),
        PoseError::Exact,
        ShapeError::SameMesh,
        true,
    );
    push(
        "bottle_001",
        "bottle",
        bottle(0.028, 0.110),
        PoseError::Spin {
            axis: Vector3::y(),
            angle: 45f64.to_radians(),
            offset: Vector3::zeros(),
        },
        ShapeError::SameMesh,
        true,
    );
    push(
        "bottle_002",
        "bottle",
        bottle(0.032, 0.130),
        PoseError::Offset(random_unit(rng) * 0.06),
        ShapeError::SameMesh,
        false,
    );

    // bowl: 2 of 3 correct.
    push(
        "bowl_000",
        "bowl",
        bowl(0.060, 0.045),
        PoseError::Spin {
            axis: random_unit(rng),
            angle: 2f64.to_radians(),
            offset: random_unit(rng) * 0.004,
        },
        ShapeError::SameMesh,
        true,
    );
    push(
        "bowl_001",
        "bowl",
        bowl(0.055, 0.050),
        PoseError::Exact,
        ShapeError::PointsFromMesh,
        true,
    );
    push(
        "bowl_002",
        "bowl",
        bowl(0.065, 0.040),
        PoseError::Spin {
            axis: Vector3::x(),
            angle: 30f64.to_radians(),
            offset: Vector3::zeros(),
        },
        ShapeError::SameMesh,
        false,
    );

    // mug: 2 of 3 correct (the half-scale shape fails only the F bound).
    push(
        "mug_000",
        "mug",
        mug(),
        PoseError::Exact,
        ShapeError::SameMesh,
        true,
    );
    push(
        "mug_001",
        "mug",
        mug(),
        PoseError::Offset(random_unit(rng) * 0.005),
        ShapeError::SameMesh,
        true,
    );
    push(
        "mug_002",
        "mug",
        mug(),
        PoseError::Exact,
        ShapeError::Scaled(0.5),
        false,
    );

    // laptop: 1 of 3 correct.
    push(
        "laptop_000",
        "laptop",
        laptop(),
        PoseError::Spin {
            axis: Vector3::y(),
            angle: 2f64.to_radians(),
            offset: Vector3::zeros(),
        },
        ShapeError::SameMesh,
        true,
    );
    push(
        "laptop_001",
        "laptop",
        laptop(),
        PoseError::Offset(random_unit(rng) * 0.10),
        ShapeError::SameMesh,
        false,
    );
    push(
        "laptop_002",
        "laptop",
        laptop(),
        PoseError::Spin {
            axis: Vector3::z(),
            angle: 45f64.to_radians(),
            offset: random_unit(rng) * 0.05,
        },
        ShapeError::SameMesh,
        false,
    );

    planned
}

fn identity_plan(instances: usize) -> Vec<PlannedInstance> {
    let categories: [(&str, fn() -> (TriMesh, Extents)); 4] = [
        ("bottle", || recenter(cylinder_mesh(0.030, 0.120, 32))),
        ("bowl", || recenter(cylinder_mesh(0.060, 0.045, 32))),
        ("mug", || {
            let mesh = mug_mesh(0.04, 0.09, 32);
            recenter(mesh)
        }),
        ("laptop", || recenter(box_mesh(0.25, 0.02, 0.18))),
    ];
    (0..instances)
        .map(|i| {
            let (category, make) = categories[i % categories.len()];
            let (mesh, extents) = make();
            PlannedInstance {
                instance_id: format!("{category}_{:03}", i / categories.len()),
                category: match category {
                    "bottle" => "bottle",
                    "bowl" => "bowl",
                    "mug" => "mug",
                    _ => "laptop",
                },
                mesh,
                extents,
                pose_error: PoseError::Exact,
                shape_error: ShapeError::SameMesh,
                correct: true,
            }
        })
        .collect()
}

/// Writes a complete evaluation fixture (meshes, manifests, oracle sidecar)
/// under `out_dir`. Identical plan + seed produce byte-identical outputs.
pub fn generate_fixture(plan: &FixturePlan, seed: u64, out_dir: &Path) -> Result<FixturePaths> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planned = match plan {
        FixturePlan::SevenOfTwelve => seven_of_twelve_plan(&mut rng),
        FixturePlan::Identity { instances } => {
            if *instances == 0 {
                return Err(Error::EmptyInput("fixture instance count"));
            }
            identity_plan(*instances)
        }
    };

    let mesh_dir = out_dir.join("meshes");
    let shape_dir = out_dir.join("shapes");
    std::fs::create_dir_all(&mesh_dir).map_err(|e| Error::io(&mesh_dir, e))?;
    std::fs::create_dir_all(&shape_dir).map_err(|e| Error::io(&shape_dir, e))?;

    let mut gt_instances = Vec::new();
    let mut pred_instances = Vec::new();
    let mut expected_correct = BTreeMap::new();
    let mut per_category: BTreeMap<String, (usize, usize)> = BTreeMap::new();

    for instance in &planned {
        let gt_pose = base_pose(&mut rng);
        let mesh_rel = format!("meshes/{}.obj", instance.instance_id);
        write_mesh(&out_dir.join(&mesh_rel), &instance.mesh)?;

        gt_instances.push(serde_json::json!({
            "instance_id": instance.instance_id,
            "category": instance.category,
            "pose": serde_json::to_value(PoseDoc::from_transform(&gt_pose)).expect("pose"),
            "mesh": mesh_rel,
            "extents": [
                instance.extents.as_vector().x,
                instance.extents.as_vector().y,
                instance.extents.as_vector().z,
            ],
        }));

        let est_pose = match &instance.pose_error {
            PoseError::Exact => gt_pose,
            PoseError::Offset(offset) => RigidTransform {
                rotation: gt_pose.rotation,
                translation: gt_pose.translation + offset,
            },
            PoseError::Spin {
                axis,
                angle,
                offset,
            } => {
                let spun = gt_pose.compose(&RigidTransform::from_axis_angle(*axis, *angle));
                RigidTransform {
                    rotation: spun.rotation,
                    translation: spun.translation + offset,
                }
            }
        };

        let (shape_rel, est_extents) = match &instance.shape_error {
            ShapeError::SameMesh => (mesh_rel.clone(), instance.extents),
            ShapeError::PointsFromMesh => {
                let rel = format!("shapes/{}.ply", instance.instance_id);
                let pts = sample_surface(&instance.mesh, 4096, seed ^ 0x9e3779b97f4a7c15)?;
                write_pointset(&out_dir.join(&rel), &pts)?;
                (rel, instance.extents)
            }
            ShapeError::Scaled(factor) => {
                let rel = format!("shapes/{}.obj", instance.instance_id);
                let scaled = instance.mesh.map_vertices(|v| v * *factor);
                write_mesh(&out_dir.join(&rel), &scaled)?;
                (rel, instance.extents.scaled(*factor)?)
            }
        };

        pred_instances.push(serde_json::json!({
            "instance_id": instance.instance_id,
            "pose": serde_json::to_value(PoseDoc::from_transform(&est_pose)).expect("pose"),
            "shape": shape_rel,
            "extents": [
                est_extents.as_vector().x,
                est_extents.as_vector().y,
                est_extents.as_vector().z,
            ],
        }));

        expected_correct.insert(instance.instance_id.clone(), instance.correct);
        let slot = per_category.entry(instance.category.to_string()).or_insert((0, 0));
        slot.1 += 1;
        if instance.correct {
            slot.0 += 1;
        }
    }

    let gt_manifest = out_dir.join("gt.json");
    write_json(
        &gt_manifest,
        &serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "camera": fixture_camera(),
            "instances": gt_instances,
        }),
    )?;

    let pred_manifest = out_dir.join("pred.json");
    write_json(
        &pred_manifest,
        &serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "camera": fixture_camera(),
            "instances": pred_instances,
        }),
    )?;

    let total = planned.len();
    let correct = planned.iter().filter(|p| p.correct).count();
    let oracle = FixtureOracle {
        preset: "lenient".to_string(),
        expected_overall: correct as f64 / total as f64,
        expected_per_category: per_category
            .into_iter()
            .map(|(category, (c, n))| (category, c as f64 / n as f64))
            .collect(),
        expected_correct,
    };
    let oracle_path = out_dir.join("oracle.json");
    write_json(&oracle_path, &oracle)?;

    Ok(FixturePaths {
        gt_manifest,
        pred_manifest,
        oracle_path,
        oracle,
    })
}

/// The synthetic sphere sequence for the carving pipeline.
#[derive(Debug, Clone)]
pub struct CarveFixture {
    pub manifest: PathBuf,
    pub sphere_radius: f64,
    pub box_extents: Extents,
}

/// Renders `views` depth maps of a sphere (radius 5 cm) centered in a 12 cm
/// annotation box and writes them with a carve manifest under `out_dir`.
pub fn generate_carve_fixture(out_dir: &Path, views: usize) -> Result<CarveFixture> {
    let camera = CameraIntrinsics {
        fx: 800.0,
        fy: 800.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
        depth_scale: 0.001,
    };
    let radius = 0.05;
    let extents = Extents::new(0.12, 0.12, 0.12).expect("carve box extents");
    let distance = 0.45;
    let background = 3.0; // meters

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut frame_docs = Vec::new();
    for k in 0..views.max(1) {
        let azimuth = 2.0 * std::f64::consts::PI * k as f64 / views.max(1) as f64;
        let elevation = match k % 3 {
            0 => (-40f64).to_radians(),
            1 => 0.0,
            _ => 40f64.to_radians(),
        };
        let box_pose = look_at_box_pose(azimuth, elevation, distance);
        let raw = render_sphere_depth(&camera, &box_pose, radius, background);
        let name = format!("depth_{k:03}.pgm");
        write_depth(&out_dir.join(&name), &raw, camera.width, camera.height)?;
        frame_docs.push(serde_json::json!({
            "depth": name,
            "box_pose": serde_json::to_value(PoseDoc::from_transform(&box_pose)).expect("pose"),
        }));
    }

    let manifest = out_dir.join("carve.json");
    write_json(
        &manifest,
        &serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "camera": camera,
            "extents": [
                extents.as_vector().x,
                extents.as_vector().y,
                extents.as_vector().z,
            ],
            "frames": frame_docs,
        }),
    )?;
    Ok(CarveFixture {
        manifest,
        sphere_radius: radius,
        box_extents: extents,
    })
}

/// Pose of the box frame in a camera placed on a sphere of `distance`
/// around the box origin, looking at it.
fn look_at_box_pose(azimuth: f64, elevation: f64, distance: f64) -> RigidTransform {
    let position = Vector3::new(
        distance * elevation.cos() * azimuth.sin(),
        distance * elevation.sin(),
        distance * elevation.cos() * azimuth.cos(),
    );
    let forward = (-position).normalize(); // camera +z looks at the origin
    let up_hint = Vector3::y();
    let right = up_hint.cross(&forward).normalize();
    let down = forward.cross(&right);
    // Columns are the camera axes expressed in the box frame (x right,
    // y down, z forward; the usual optical convention).
    let rotation = nalgebra::Matrix3::from_columns(&[right, down, forward]);
    let box_from_camera = RigidTransform {
        rotation,
        translation: position,
    };
    box_from_camera.inverse()
}

/// Renders the sphere (centered at the box origin) into a raw depth map.
fn render_sphere_depth(
    camera: &CameraIntrinsics,
    box_pose: &RigidTransform,
    radius: f64,
    background: f64,
) -> Vec<u16> {
    let center = box_pose.translation; // sphere center in the camera frame
    let background_raw = (background / camera.depth_scale).round() as u16;
    let mut raw = vec![background_raw; (camera.width * camera.height) as usize];
    for y in 0..camera.height {
        for x in 0..camera.width {
            let dir = camera.pixel_ray(x, y);
            // Smallest positive t with |t*dir - center| = radius.
            let a = dir.norm_squared();
            let b = -2.0 * dir.dot(&center);
            let c = center.norm_squared() - radius * radius;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                continue;
            }
            let t = (-b - disc.sqrt()) / (2.0 * a);
            if t <= 0.0 {
                continue;
            }
            let depth = t * dir.z;
            raw[(y * camera.width + x) as usize] =
                (depth / camera.depth_scale).round().clamp(1.0, 65535.0) as u16;
        }
    }
    raw
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{load_carve_manifest, load_ground_truth, load_predictions};

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "catpose_fx_{}_{}_{}",
            tag,
            std::process::id(),
            rand::random::<u32>()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn parametric_meshes_are_sane() {
        let cube = box_mesh(0.2, 0.1, 0.3);
        assert_eq!(cube.triangles.len(), 12);
        let aabb = aabb_of_vertices(&cube.vertices).unwrap();
        assert!((aabb.extents - Vector3::new(0.2, 0.1, 0.3)).norm() < 1e-12);

        let cyl = cylinder_mesh(0.05, 0.2, 32);
        let area = cyl.surface_area();
        let expected = 2.0 * std::f64::consts::PI * 0.05 * 0.2
            + 2.0 * std::f64::consts::PI * 0.05 * 0.05;
        // Inscribed polygon: a bit below the analytic area.
        assert!(area < expected && area > 0.97 * expected, "area {area}");

        let mug = mug_mesh(0.04, 0.09, 32);
        let aabb = aabb_of_vertices(&mug.vertices).unwrap();
        assert!(aabb.center.norm() < 1e-12, "mug must be recentered");
        assert!(aabb.extents.x > 0.08, "handle must widen the box");
    }

    #[test]
    fn seven_of_twelve_round_trips() {
        let dir = temp_dir("seven");
        let paths = generate_fixture(&FixturePlan::SevenOfTwelve, 11, &dir).unwrap();
        assert!((paths.oracle.expected_overall - 7.0 / 12.0).abs() < 1e-12);

        let gt = load_ground_truth(&paths.gt_manifest).unwrap();
        assert_eq!(gt.instances.len(), 12);
        let preds = load_predictions(&paths.pred_manifest).unwrap();
        assert_eq!(preds.len(), 12);
        // Every prediction id must exist in the ground truth.
        for p in &preds {
            assert!(gt.instances.iter().any(|g| g.instance_id == p.instance_id));
        }
        assert_eq!(paths.oracle.expected_per_category["laptop"], 1.0 / 3.0);
    }

    #[test]
    fn fixture_is_byte_deterministic() {
        let dir_a = temp_dir("det_a");
        let dir_b = temp_dir("det_b");
        generate_fixture(&FixturePlan::SevenOfTwelve, 42, &dir_a).unwrap();
        generate_fixture(&FixturePlan::SevenOfTwelve, 42, &dir_b).unwrap();
        for rel in ["gt.json", "pred.json", "oracle.json", "meshes/mug_002.obj"] {
            let a = std::fs::read(dir_a.join(rel)).unwrap();
            let b = std::fs::read(dir_b.join(rel)).unwrap();
            assert_eq!(a, b, "{rel} differs between identical runs");
        }
        // A different seed moves the poses.
        let dir_c = temp_dir("det_c");
        generate_fixture(&FixturePlan::SevenOfTwelve, 43, &dir_c).unwrap();
        assert_ne!(
            std::fs::read(dir_a.join("gt.json")).unwrap(),
            std::fs::read(dir_c.join("gt.json")).unwrap()
        );
    }

    #[test]
    fn identity_fixture_loads() {
        let dir = temp_dir("identity");
        let paths = generate_fixture(&FixturePlan::Identity { instances: 5 }, 7, &dir).unwrap();
        assert_eq!(paths.oracle.expected_overall, 1.0);
        let gt = load_ground_truth(&paths.gt_manifest).unwrap();
        let preds = load_predictions(&paths.pred_manifest).unwrap();
        assert_eq!(gt.instances.len(), 5);
        for (g, p) in gt.instances.iter().zip(&preds) {
            assert_eq!(g.instance_id, p.instance_id);
            assert!((g.pose.translation - p.pose.translation).norm() < 1e-9);
        }
    }

    #[test]
    fn carve_fixture_renders_and_loads() {
        let dir = temp_dir("carve");
        let fixture = generate_carve_fixture(&dir, 4).unwrap();
        let input = load_carve_manifest(&fixture.manifest).unwrap();
        assert_eq!(input.frames.len(), 4);
        // Sphere center must project near the image center with correct depth.
        let (depth, pose) = &input.frames[1]; // elevation 0 frame
        let center_cam = pose.translation;
        assert!((center_cam.z - 0.45).abs() < 1e-9);
        let (u, v) = input.camera.project(&center_cam);
        let measured = depth.depth_at(u as u32, v as u32);
        assert!(
            (measured - (0.45 - fixture.sphere_radius)).abs() < 2e-3,
            "front surface depth {measured}"
        );
        // Far corner pixels see the background.
        assert!((depth.depth_at(0, 0) - 3.0).abs() < 1e-9);
    }
}
