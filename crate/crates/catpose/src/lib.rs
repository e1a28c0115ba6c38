//! Evaluation toolkit for categorical 6D pose and shape estimation.
//!
//! The crate provides:
//! - [`geometry`]: rigid transforms, oriented boxes, and exact convex
//!   polytope clipping for oriented IoU;
//! - [`sampling`]: deterministic area-weighted surface sampling and exact
//!   point-set diameters;
//! - [`spatial`]: an exact nearest-neighbor index;
//! - [`metrics`]: per-instance pose and reconstruction metrics
//!   (translation/rotation error, oriented and axis-aligned IoU, chamfer
//!   distance, NAD, F-score);
//! - [`aggregate`]: thresholded correctness, dataset precision, threshold
//!   sweeps, and multi-hypothesis best/worst precision;
//! - [`datasets`]: JSON manifests, OBJ/PLY/PGM loaders, and synthetic
//!   fixture generation;
//! - [`carve`]: the depth-based voxel-carving annotation pipeline (carve,
//!   marching cubes, Laplacian smoothing, tight boxes).
//!
//! All computations are pure and reentrant; evaluations of distinct
//! instances can run on any number of workers without changing results.

pub mod aggregate;
pub mod carve;
pub mod datasets;
mod error;
pub mod geometry;
pub mod metrics;
pub mod sampling;
pub mod spatial;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::sampling::TriMesh;
    use nalgebra::Vector3;

    /// Unit cube surface as 12 triangles, centered at the origin.
    pub fn unit_cube_mesh() -> TriMesh {
        let mut vertices = Vec::new();
        for i in 0..8 {
            vertices.push(Vector3::new(
                if i & 1 == 0 { -0.5 } else { 0.5 },
                if i & 2 == 0 { -0.5 } else { 0.5 },
                if i & 4 == 0 { -0.5 } else { 0.5 },
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
        let mut triangles = Vec::new();
        for q in quads {
            triangles.push([q[0], q[1], q[2]]);
            triangles.push([q[0], q[2], q[3]]);
        }
        TriMesh::new(vertices, triangles).unwrap()
    }
}
