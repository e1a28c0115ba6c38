//! Shape representations and deterministic surface sampling.
//!
//! Point sets drive every reconstruction metric, so sampling is pinned down
//! hard: a named portable RNG (ChaCha8 seeded via SplitMix64, as implemented
//! by `rand_chacha`'s `seed_from_u64`), area-weighted triangle selection by
//! inverse CDF, and the square-root barycentric mapping. Identical
//! `(mesh, n, seed)` inputs produce bit-identical point lists on every
//! platform, independent of thread count.

mod hull;

use crate::error::{Error, Result};
use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of surface samples used throughout the toolkit unless overridden.
pub const DEFAULT_SAMPLE_COUNT: usize = 10_000;

/// A finite list of 3D points, all coordinates finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vector3<f64>>,
}

impl PointSet {
    /// Builds a point set, rejecting NaN/infinite coordinates.
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::Validation {
                    instance_id: format!("point {i}"),
                    msg: "non-finite coordinate in point set".to_string(),
                });
            }
        }
        Ok(Self { points })
    }

    /// Wraps points already known to be finite (internal producers).
    pub(crate) fn new_unchecked(points: Vec<Vector3<f64>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vector3<f64>> {
        self.points.iter()
    }

    pub fn as_slice(&self) -> &[Vector3<f64>] {
        &self.points
    }
}

/// An indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh, validating index ranges and rejecting triangles with
    /// repeated vertex indices.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (ti, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Validation {
                    instance_id: format!("triangle {ti}"),
                    msg: format!("vertex index out of range (have {})", vertices.len()),
                });
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Validation {
                    instance_id: format!("triangle {ti}"),
                    msg: "repeated vertex index".to_string(),
                });
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn triangle_vertices(&self, i: usize) -> [Vector3<f64>; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(i);
        (b - a).cross(&(c - a)).norm() * 0.5
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// A copy with every vertex mapped by `f`.
    pub fn map_vertices(&self, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
        }
    }
}

/// Samples `n` points uniformly over the mesh surface.
///
/// Triangles are chosen by inverse CDF over cumulative areas; the point
/// within the triangle uses the unbiased mapping
/// `(1 - sqrt(u)) A + sqrt(u)(1 - v) B + sqrt(u) v C`.
/// One ChaCha8 stream seeded from `seed` drives the whole call, so the
/// output is reproducible bit for bit.
pub fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::EmptyInput("sample count"));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for i in 0..mesh.triangles.len() {
        total += mesh.triangle_area(i);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateMesh);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let ti = cumulative
            .partition_point(|&c| c <= target)
            .min(mesh.triangles.len() - 1);
        let [a, b, c] = mesh.triangle_vertices(ti);
        let su = rng.random::<f64>().sqrt();
        let v = rng.random::<f64>();
        points.push(a * (1.0 - su) + b * (su * (1.0 - v)) + c * (su * v));
    }
    Ok(PointSet::new_unchecked(points))
}

/// Maximum pairwise distance of a point set.
///
/// Computed exactly: the candidate pairs are restricted to convex-hull
/// vertices (the maximum is always attained there) and searched
/// exhaustively. Degenerate inputs where no hull exists (coplanar, tiny)
/// fall back to the full quadratic scan.
pub fn diameter(pts: &PointSet) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: pts.len(),
        });
    }
    let candidates: Vec<usize> = match hull::convex_hull_vertices(pts.as_slice()) {
        Some(hull) if pts.len() > 64 => hull,
        _ => (0..pts.len()).collect(),
    };
    let slice = pts.as_slice();
    let mut best = 0.0f64;
    for (i, &a) in candidates.iter().enumerate() {
        for &b in &candidates[i + 1..] {
            let d2 = (slice[a] - slice[b]).norm_squared();
            if d2 > best {
                best = d2;
            }
        }
    }
    Ok(best.sqrt())
}
