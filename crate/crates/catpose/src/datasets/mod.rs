//! Dataset and prediction file interfaces.
//!
//! Everything on disk is deliberately plain: JSON manifests (one document
//! per split, `schema_version` 1), ASCII OBJ meshes, PLY point sets, and
//! 16-bit PGM depth maps. Paths inside manifests are relative to the
//! manifest file. Rotations are serialized as unit quaternions `(w, x, y,
//! z)`, translations in meters.

mod fixture;
mod obj;
mod pgm;
mod ply;

pub use fixture::{
    box_mesh, cylinder_mesh, generate_carve_fixture, generate_fixture, mug_mesh, CarveFixture,
    FixtureOracle, FixturePaths, FixturePlan,
};
pub use obj::{load_mesh, write_mesh};
pub use pgm::{load_depth, write_depth, DepthImage};
pub use ply::{load_pointset, write_pointset};

use crate::error::{Error, Result};
use crate::geometry::{aabb_of_vertices, Extents, RigidTransform};
use crate::metrics::{default_symmetry_for_category, SymmetryClass};
use crate::sampling::{PointSet, TriMesh};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// The manifest schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for the ground-truth extents against the mesh's canonical
/// bounding box, in meters.
const EXTENTS_TOL: f64 = 1e-3;

/// Pinhole camera intrinsics plus the raw-depth-to-meters factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub depth_scale: f64,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < f64::from(self.width)
            && self.cy >= 0.0
            && self.cy < f64::from(self.height)
            && self.depth_scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation {
                instance_id: "camera".to_string(),
                msg: format!("invalid intrinsics {self:?}"),
            })
        }
    }

    /// Projects a camera-frame point to continuous pixel coordinates.
    /// The point must have z > 0.
    pub fn project(&self, p: &Vector3<f64>) -> (f64, f64) {
        (
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        )
    }

    /// The camera-frame ray direction through the center of pixel `(x, y)`.
    pub fn pixel_ray(&self, x: u32, y: u32) -> Vector3<f64> {
        Vector3::new(
            (f64::from(x) + 0.5 - self.cx) / self.fx,
            (f64::from(y) + 0.5 - self.cy) / self.fy,
            1.0,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct PoseDoc {
    /// Unit quaternion (w, x, y, z).
    rotation: [f64; 4],
    /// Meters.
    translation: [f64; 3],
}

impl PoseDoc {
    fn to_transform(&self, instance_id: &str) -> Result<RigidTransform> {
        RigidTransform::from_quaternion_wxyz(
            self.rotation,
            Vector3::new(
                self.translation[0],
                self.translation[1],
                self.translation[2],
            ),
        )
        .map_err(|e| Error::validation(instance_id, e.to_string()))
    }

    fn from_transform(t: &RigidTransform) -> Self {
        Self {
            rotation: t.quaternion_wxyz(),
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GroundTruthInstanceDoc {
    instance_id: String,
    category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetryClass>,
    pose: PoseDoc,
    mesh: String,
    extents: [f64; 3],
    /// Run-length-encoded visibility mask; carried for dataset fidelity,
    /// not consumed by any metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask_rle: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthManifestDoc {
    schema_version: u32,
    camera: CameraIntrinsics,
    instances: Vec<GroundTruthInstanceDoc>,
}

#[derive(Serialize, Deserialize)]
struct PredictionInstanceDoc {
    instance_id: String,
    pose: PoseDoc,
    shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extents: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hypothesis_index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct PredictionManifestDoc {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera: Option<CameraIntrinsics>,
    instances: Vec<PredictionInstanceDoc>,
}

/// One annotated ground-truth object, mesh loaded and validated.
#[derive(Debug, Clone)]
pub struct GroundTruthInstance {
    pub instance_id: String,
    pub category: String,
    pub symmetry: SymmetryClass,
    /// Object pose in the camera frame.
    pub pose: RigidTransform,
    pub mesh_path: PathBuf,
    pub mesh: TriMesh,
    pub extents: Extents,
}

/// A prediction's shape payload.
#[derive(Debug, Clone)]
pub enum ShapeSource {
    /// Sampled at evaluation time.
    Mesh(TriMesh),
    /// Used verbatim, never resampled.
    Points(PointSet),
}

/// One loaded prediction.
#[derive(Debug, Clone)]
pub struct PredictionInstance {
    pub instance_id: String,
    pub pose: RigidTransform,
    pub shape_path: PathBuf,
    pub shape: ShapeSource,
    pub extents: Option<Extents>,
    pub hypothesis_index: Option<usize>,
}

/// A loaded ground-truth split.
#[derive(Debug, Clone)]
pub struct GroundTruthSet {
    pub camera: CameraIntrinsics,
    pub instances: Vec<GroundTruthInstance>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf()
}

/// Loads and validates a ground-truth manifest. Instances come back in
/// manifest order; meshes are loaded eagerly and checked against the stated
/// extents.
pub fn load_ground_truth(manifest_path: &Path) -> Result<GroundTruthSet> {
    let doc: GroundTruthManifestDoc = read_json(manifest_path)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            got: doc.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    doc.camera.validate()?;
    let dir = manifest_dir(manifest_path);
    let mut seen = HashMap::new();
    let mut instances = Vec::with_capacity(doc.instances.len());
    for inst in doc.instances {
        if seen.insert(inst.instance_id.clone(), ()).is_some() {
            return Err(Error::validation(
                &inst.instance_id,
                "duplicate instance_id in ground truth",
            ));
        }
        let mesh_path = dir.join(&inst.mesh);
        if !mesh_path.is_file() {
            return Err(Error::validation(
                &inst.instance_id,
                format!("mesh file missing: {}", mesh_path.display()),
            ));
        }
        let mesh = load_mesh(&mesh_path)?;
        let extents = Extents::new(inst.extents[0], inst.extents[1], inst.extents[2])
            .map_err(|e| Error::validation(&inst.instance_id, e.to_string()))?;
        let aabb = aabb_of_vertices(&mesh.vertices)
            .map_err(|e| Error::validation(&inst.instance_id, e.to_string()))?;
        let deviation = (aabb.extents - extents.as_vector()).abs().max();
        if deviation > EXTENTS_TOL {
            return Err(Error::validation(
                &inst.instance_id,
                format!(
                    "extents deviate {deviation:.4} m from the mesh bounding box {:?}",
                    aabb.extents
                ),
            ));
        }
        let pose = inst.pose.to_transform(&inst.instance_id)?;
        let symmetry = inst
            .symmetry
            .unwrap_or_else(|| default_symmetry_for_category(&inst.category));
        instances.push(GroundTruthInstance {
            instance_id: inst.instance_id,
            category: inst.category,
            symmetry,
            pose,
            mesh_path,
            mesh,
            extents,
        });
    }
    Ok(GroundTruthSet {
        camera: doc.camera,
        instances,
    })
}

/// Loads a prediction manifest. Duplicate ids are only allowed as dense
/// multi-hypothesis blocks (`hypothesis_index` 0..N-1 per instance).
pub fn load_predictions(manifest_path: &Path) -> Result<Vec<PredictionInstance>> {
    let doc: PredictionManifestDoc = read_json(manifest_path)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            got: doc.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    let dir = manifest_dir(manifest_path);
    let mut instances = Vec::with_capacity(doc.instances.len());
    let mut hypothesis_ids: HashMap<String, Vec<usize>> = HashMap::new();
    let mut plain_ids: HashMap<String, usize> = HashMap::new();
    for (position, inst) in doc.instances.into_iter().enumerate() {
        match inst.hypothesis_index {
            Some(h) => hypothesis_ids
                .entry(inst.instance_id.clone())
                .or_default()
                .push(h),
            None => {
                if plain_ids.insert(inst.instance_id.clone(), position).is_some() {
                    return Err(Error::parse(
                        manifest_path,
                        0,
                        format!(
                            "duplicate instance_id `{}` without hypothesis_index",
                            inst.instance_id
                        ),
                    ));
                }
            }
        }
        let shape_path = dir.join(&inst.shape);
        let shape = load_shape(&shape_path)?;
        let extents = match inst.extents {
            Some([x, y, z]) => Some(
                Extents::new(x, y, z)
                    .map_err(|e| Error::validation(&inst.instance_id, e.to_string()))?,
            ),
            None => None,
        };
        let pose = inst.pose.to_transform(&inst.instance_id)?;
        instances.push(PredictionInstance {
            instance_id: inst.instance_id,
            pose,
            shape_path,
            shape,
            extents,
            hypothesis_index: inst.hypothesis_index,
        });
    }
    for (id, mut indices) in hypothesis_ids {
        if plain_ids.contains_key(&id) {
            return Err(Error::validation(
                &id,
                "mixes hypothesis and non-hypothesis entries",
            ));
        }
        indices.sort_unstable();
        if indices.iter().enumerate().any(|(want, &got)| want != got) {
            return Err(Error::validation(
                &id,
                format!("hypothesis_index values {indices:?} are not dense 0..N-1"),
            ));
        }
    }
    Ok(instances)
}

/// Dispatches on file extension: `.obj` meshes, `.ply` point sets.
pub fn load_shape(path: &Path) -> Result<ShapeSource> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("obj") => Ok(ShapeSource::Mesh(load_mesh(path)?)),
        Some("ply") => Ok(ShapeSource::Points(load_pointset(path)?)),
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            msg: format!("unknown shape extension {other:?}"),
        }),
    }
}

/// The rotated canonical up-axis (+y) of every instance, in the camera
/// frame; the raw material for orientation-distribution plots.
pub fn orientation_distribution(gts: &[GroundTruthInstance]) -> Vec<Vector3<f64>> {
    gts.iter().map(|g| g.pose.up_axis()).collect()
}

/// One depth frame posed against the annotated box, as stored in a carve
/// manifest.
#[derive(Debug, Clone)]
pub struct CarveInput {
    pub camera: CameraIntrinsics,
    pub extents: Extents,
    pub frames: Vec<(DepthImage, RigidTransform)>,
}

#[derive(Serialize, Deserialize)]
struct CarveFrameDoc {
    depth: String,
    /// Pose of the annotated box in this frame's camera.
    box_pose: PoseDoc,
}

#[derive(Serialize, Deserialize)]
struct CarveManifestDoc {
    schema_version: u32,
    camera: CameraIntrinsics,
    extents: [f64; 3],
    frames: Vec<CarveFrameDoc>,
}

/// Loads a carve manifest plus all referenced depth maps.
pub fn load_carve_manifest(manifest_path: &Path) -> Result<CarveInput> {
    let doc: CarveManifestDoc = read_json(manifest_path)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            got: doc.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    doc.camera.validate()?;
    let extents = Extents::new(doc.extents[0], doc.extents[1], doc.extents[2])?;
    let dir = manifest_dir(manifest_path);
    let mut frames = Vec::with_capacity(doc.frames.len());
    for (i, frame) in doc.frames.iter().enumerate() {
        let depth_path = dir.join(&frame.depth);
        let depth = load_depth(&depth_path, doc.camera.depth_scale)?;
        if depth.width != doc.camera.width || depth.height != doc.camera.height {
            return Err(Error::validation(
                format!("frame {i}"),
                format!(
                    "depth is {}x{} but camera is {}x{}",
                    depth.width, depth.height, doc.camera.width, doc.camera.height
                ),
            ));
        }
        let pose = frame.box_pose.to_transform(&format!("frame {i}"))?;
        frames.push((depth, pose));
    }
    Ok(CarveInput {
        camera: doc.camera,
        extents,
        frames,
    })
}

/// Writes a ground-truth manifest for externally produced annotations (the
/// carve pipeline's output path).
pub fn write_ground_truth_manifest(
    path: &Path,
    camera: &CameraIntrinsics,
    instances: &[(String, String, RigidTransform, String, Extents)],
) -> Result<()> {
    let doc = GroundTruthManifestDoc {
        schema_version: SCHEMA_VERSION,
        camera: *camera,
        instances: instances
            .iter()
            .map(
                |(instance_id, category, pose, mesh, extents)| GroundTruthInstanceDoc {
                    instance_id: instance_id.clone(),
                    category: category.clone(),
                    symmetry: None,
                    pose: PoseDoc::from_transform(pose),
                    mesh: mesh.clone(),
                    extents: [
                        extents.as_vector().x,
                        extents.as_vector().y,
                        extents.as_vector().z,
                    ],
                    mask_rle: None,
                },
            )
            .collect(),
    };
    write_json(path, &doc)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "catpose_ds_{}_{}_{}",
            tag,
            std::process::id(),
            rand::random::<u32>()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn camera() -> CameraIntrinsics {
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

    fn write_cube_obj(dir: &Path, name: &str, scale: f64) -> String {
        let mesh = crate::testutil::unit_cube_mesh().map_vertices(|v| v * scale);
        write_mesh(&dir.join(name), &mesh).unwrap();
        name.to_string()
    }

    fn gt_manifest_json(dir: &Path, symmetry_override: Option<&str>) -> String {
        let mesh = write_cube_obj(dir, "bottle.obj", 0.1);
        let symmetry = symmetry_override
            .map(|s| format!("\"symmetry\": \"{s}\","))
            .unwrap_or_default();
        format!(
            r#"{{
  "schema_version": 1,
  "camera": {{"fx": 600.0, "fy": 600.0, "cx": 320.0, "cy": 240.0, "width": 640, "height": 480, "depth_scale": 0.001}},
  "instances": [
    {{
      "instance_id": "bottle_000",
      "category": "bottle",
      {symmetry}
      "pose": {{"rotation": [1.0, 0.0, 0.0, 0.0], "translation": [0.0, 0.0, 0.6]}},
      "mesh": "{mesh}",
      "extents": [0.1, 0.1, 0.1]
    }}
  ]
}}"#
        )
    }

    #[test]
    fn minimal_manifest_applies_default_symmetry() {
        let dir = temp_dir("gt");
        let path = dir.join("gt.json");
        std::fs::write(&path, gt_manifest_json(&dir, None)).unwrap();
        let set = load_ground_truth(&path).unwrap();
        assert_eq!(set.instances.len(), 1);
        assert_eq!(set.instances[0].symmetry, SymmetryClass::AxisY);
        assert_abs_diff_eq!(set.instances[0].pose.translation.z, 0.6);
    }

    #[test]
    fn symmetry_override_respected() {
        let dir = temp_dir("sym");
        let path = dir.join("gt.json");
        std::fs::write(&path, gt_manifest_json(&dir, Some("none"))).unwrap();
        let set = load_ground_truth(&path).unwrap();
        assert_eq!(set.instances[0].symmetry, SymmetryClass::None);
    }

    #[test]
    fn missing_mesh_is_validation_error_with_path() {
        let dir = temp_dir("missing");
        let path = dir.join("gt.json");
        std::fs::write(
            &path,
            gt_manifest_json(&dir, None).replace("bottle.obj", "nope.obj"),
        )
        .unwrap();
        match load_ground_truth(&path) {
            Err(Error::Validation { instance_id, msg }) => {
                assert_eq!(instance_id, "bottle_000");
                assert!(msg.contains("nope.obj"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn extents_mesh_mismatch_rejected() {
        let dir = temp_dir("ext");
        let path = dir.join("gt.json");
        std::fs::write(
            &path,
            gt_manifest_json(&dir, None).replace("[0.1, 0.1, 0.1]", "[0.2, 0.1, 0.1]"),
        )
        .unwrap();
        assert!(matches!(
            load_ground_truth(&path),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let dir = temp_dir("ver");
        let path = dir.join("gt.json");
        std::fs::write(
            &path,
            gt_manifest_json(&dir, None).replace("\"schema_version\": 1", "\"schema_version\": 2"),
        )
        .unwrap();
        assert!(matches!(
            load_ground_truth(&path),
            Err(Error::SchemaVersion { got: 2, .. })
        ));
    }

    #[test]
    fn bad_rotation_rejected() {
        let dir = temp_dir("rot");
        let path = dir.join("gt.json");
        std::fs::write(
            &path,
            gt_manifest_json(&dir, None).replace("[1.0, 0.0, 0.0, 0.0]", "[0.9, 0.2, 0.0, 0.0]"),
        )
        .unwrap();
        assert!(matches!(
            load_ground_truth(&path),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn predictions_mesh_and_points() {
        let dir = temp_dir("pred");
        write_cube_obj(&dir, "shape.obj", 0.1);
        let pts = PointSet::new(vec![Vector3::new(0.0, 0.0, 0.0), Vector3::new(0.01, 0.0, 0.0)])
            .unwrap();
        write_pointset(&dir.join("shape.ply"), &pts).unwrap();
        let path = dir.join("pred.json");
        std::fs::write(
            &path,
            r#"{
  "schema_version": 1,
  "instances": [
    {"instance_id": "a", "pose": {"rotation": [1,0,0,0], "translation": [0,0,0.5]}, "shape": "shape.obj", "extents": [0.1, 0.1, 0.1]},
    {"instance_id": "b", "pose": {"rotation": [1,0,0,0], "translation": [0,0,0.5]}, "shape": "shape.ply"}
  ]
}"#,
        )
        .unwrap();
        let preds = load_predictions(&path).unwrap();
        assert_eq!(preds.len(), 2);
        assert!(matches!(preds[0].shape, ShapeSource::Mesh(_)));
        assert!(matches!(preds[1].shape, ShapeSource::Points(_)));
        assert!(preds[1].extents.is_none());
    }

    #[test]
    fn duplicate_prediction_id_rejected() {
        let dir = temp_dir("dup");
        write_cube_obj(&dir, "shape.obj", 0.1);
        let path = dir.join("pred.json");
        let entry = r#"{"instance_id": "a", "pose": {"rotation": [1,0,0,0], "translation": [0,0,0.5]}, "shape": "shape.obj"}"#;
        std::fs::write(
            &path,
            format!(r#"{{"schema_version": 1, "instances": [{entry}, {entry}]}}"#),
        )
        .unwrap();
        assert!(matches!(load_predictions(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn hypothesis_indices_must_be_dense() {
        let dir = temp_dir("hyp");
        write_cube_obj(&dir, "shape.obj", 0.1);
        let path = dir.join("pred.json");
        let entry = |h: usize| {
            format!(
                r#"{{"instance_id": "a", "pose": {{"rotation": [1,0,0,0], "translation": [0,0,0.5]}}, "shape": "shape.obj", "hypothesis_index": {h}}}"#
            )
        };
        std::fs::write(
            &path,
            format!(
                r#"{{"schema_version": 1, "instances": [{}, {}]}}"#,
                entry(0),
                entry(2)
            ),
        )
        .unwrap();
        assert!(matches!(
            load_predictions(&path),
            Err(Error::Validation { .. })
        ));

        std::fs::write(
            &path,
            format!(
                r#"{{"schema_version": 1, "instances": [{}, {}]}}"#,
                entry(0),
                entry(1)
            ),
        )
        .unwrap();
        assert_eq!(load_predictions(&path).unwrap().len(), 2);
    }

    #[test]
    fn orientation_distribution_vectors() {
        let dir = temp_dir("orient");
        let path = dir.join("gt.json");
        std::fs::write(&path, gt_manifest_json(&dir, None)).unwrap();
        let mut set = load_ground_truth(&path).unwrap();
        let ups = orientation_distribution(&set.instances);
        assert_abs_diff_eq!((ups[0] - Vector3::new(0.0, 1.0, 0.0)).norm(), 0.0);

        set.instances[0].pose = RigidTransform::rotation_x(std::f64::consts::FRAC_PI_2);
        let ups = orientation_distribution(&set.instances);
        assert_abs_diff_eq!(
            (ups[0] - Vector3::new(0.0, 0.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(ups[0].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(camera().validate().is_ok());
        let mut bad = camera();
        bad.cx = 700.0;
        assert!(bad.validate().is_err());
        let mut bad = camera();
        bad.depth_scale = 0.0;
        assert!(bad.validate().is_err());
    }
}
