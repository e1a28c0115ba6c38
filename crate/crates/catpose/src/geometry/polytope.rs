//! Convex polytopes with half-space clipping and divergence-theorem volume.
//!
//! This is the exact-intersection backend for oriented box IoU: a box is
//! turned into a polytope and successively clipped by the six half-spaces of
//! the other box. Faces are stored as outward-wound (counter-clockwise seen
//! from outside) vertex loops.

use crate::error::{Error, Result};
use crate::geometry::OrientedBox;
use nalgebra::Vector3;
use std::collections::HashMap;

/// Vertex-on-plane classification tolerance, in meters.
const CLIP_EPS: f64 = 1e-9;

/// Intersections thinner than this are reported as empty.
const DEGENERATE_VOLUME: f64 = 1e-15;

/// Face loops may deviate from their plane by at most this much.
const PLANARITY_TOL: f64 = 1e-7;

/// The half-space `{ x : normal . x <= offset }` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

/// A bounded convex polytope with planar, outward-oriented faces.
///
/// The zero-vertex polytope is the canonical empty value; clipping never
/// fails, it just may produce it.
#[derive(Debug, Clone, Default)]
pub struct ConvexPolytope {
    vertices: Vec<Vector3<f64>>,
    faces: Vec<Vec<usize>>,
}

impl ConvexPolytope {
    /// Builds a polytope, repairing global face orientation: if the signed
    /// volume comes out negative every loop is reversed.
    pub fn new(vertices: Vec<Vector3<f64>>, faces: Vec<Vec<usize>>) -> Result<Self> {
        for (fi, face) in faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(Error::InvalidPolytope(format!(
                    "face {fi} has fewer than 3 vertices"
                )));
            }
            if let Some(&bad) = face.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidPolytope(format!(
                    "face {fi} references vertex {bad} out of {}",
                    vertices.len()
                )));
            }
        }
        let mut poly = Self { vertices, faces };
        if poly.signed_volume() < 0.0 {
            for face in &mut poly.faces {
                face.reverse();
            }
        }
        Ok(poly)
    }

    /// The empty polytope.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// The polytope of an oriented box (8 vertices, 6 quad faces).
    pub fn from_box(boxx: &OrientedBox) -> Self {
        let corners = boxx.corners().to_vec();
        // Outward quads in the corner bit-pattern ordering of `corners()`.
        let faces = vec![
            vec![0, 4, 6, 2], // -x
            vec![1, 3, 7, 5], // +x
            vec![0, 1, 5, 4], // -y
            vec![2, 6, 7, 3], // +y
            vec![0, 2, 3, 1], // -z
            vec![4, 5, 7, 6], // +z
        ];
        Self {
            vertices: corners,
            faces,
        }
    }

    /// Clips against `plane`, keeping the side `normal . x <= offset`.
    ///
    /// Returns the (possibly empty) intersection. Vertices within
    /// [`CLIP_EPS`] of the plane are treated as lying on it, which keeps
    /// sliver faces from appearing when a face grazes the plane.
    pub fn clip(&self, plane: &HalfSpace) -> ConvexPolytope {
        if self.is_empty() {
            return ConvexPolytope::empty();
        }
        let dist: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| plane.normal.dot(v) - plane.offset)
            .collect();
        let outside: Vec<bool> = dist.iter().map(|&d| d > CLIP_EPS).collect();
        if !outside.iter().any(|&o| o) {
            return self.clone();
        }
        // Strictly-inside vertices; "on plane" ones survive but cannot anchor
        // an interior edge.
        if !dist.iter().any(|&d| d < -CLIP_EPS) {
            return ConvexPolytope::empty();
        }

        let mut new_vertices: Vec<Vector3<f64>> = Vec::new();
        let mut vertex_map: HashMap<usize, usize> = HashMap::new();
        let mut edge_cut: HashMap<(usize, usize), usize> = HashMap::new();
        let mut on_plane: Vec<usize> = Vec::new();

        let keep = |idx: usize,
                        new_vertices: &mut Vec<Vector3<f64>>,
                        vertex_map: &mut HashMap<usize, usize>,
                        on_plane: &mut Vec<usize>| {
            *vertex_map.entry(idx).or_insert_with(|| {
                new_vertices.push(self.vertices[idx]);
                if dist[idx].abs() <= CLIP_EPS {
                    on_plane.push(new_vertices.len() - 1);
                }
                new_vertices.len() - 1
            })
        };

        let mut faces: Vec<Vec<usize>> = Vec::new();
        for face in &self.faces {
            let mut loop_out: Vec<usize> = Vec::new();
            for (i, &a) in face.iter().enumerate() {
                let b = face[(i + 1) % face.len()];
                if !outside[a] {
                    loop_out.push(keep(a, &mut new_vertices, &mut vertex_map, &mut on_plane));
                }
                // A crossing exists only when one endpoint is strictly inside
                // and the other strictly outside; on-plane endpoints already
                // are the intersection point.
                let strict_in_a = dist[a] < -CLIP_EPS;
                let strict_in_b = dist[b] < -CLIP_EPS;
                if (strict_in_a && outside[b]) || (outside[a] && strict_in_b) {
                    let key = (a.min(b), a.max(b));
                    let cut = *edge_cut.entry(key).or_insert_with(|| {
                        let t = dist[a] / (dist[a] - dist[b]);
                        let p = self.vertices[a] + (self.vertices[b] - self.vertices[a]) * t;
                        new_vertices.push(p);
                        on_plane.push(new_vertices.len() - 1);
                        new_vertices.len() - 1
                    });
                    loop_out.push(cut);
                }
            }
            loop_out.dedup();
            if loop_out.len() >= 3 && loop_out.first() == loop_out.last() {
                loop_out.pop();
            }
            if loop_out.len() >= 3 {
                faces.push(loop_out);
            }
        }

        if faces.is_empty() {
            return ConvexPolytope::empty();
        }

        // Cap: every on-plane vertex lies on the convex section polygon.
        // Order them around their centroid in an in-plane basis chosen so the
        // resulting winding has outward normal `plane.normal`.
        on_plane.sort_unstable();
        on_plane.dedup();
        let mut cap: Vec<usize> = Vec::new();
        for &i in &on_plane {
            if !cap
                .iter()
                .any(|&j| (new_vertices[i] - new_vertices[j]).norm() <= CLIP_EPS)
            {
                cap.push(i);
            }
        }
        if cap.len() >= 3 {
            let centroid: Vector3<f64> =
                cap.iter().map(|&i| new_vertices[i]).sum::<Vector3<f64>>() / cap.len() as f64;
            let u = orthogonal_unit(&plane.normal);
            let w = plane.normal.cross(&u);
            cap.sort_by(|&i, &j| {
                let a = angle_about(&new_vertices[i], &centroid, &u, &w);
                let b = angle_about(&new_vertices[j], &centroid, &u, &w);
                a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
            });
            faces.push(cap);
        }

        ConvexPolytope {
            vertices: new_vertices,
            faces,
        }
    }

    /// Volume by the divergence theorem over fan-triangulated faces.
    ///
    /// Degenerate results below `1e-15 m^3` collapse to zero. Returns
    /// [`Error::InvalidPolytope`] if a face loop leaves its plane by more
    /// than `1e-7 m`.
    pub fn volume(&self) -> Result<f64> {
        if self.is_empty() || self.faces.is_empty() {
            return Ok(0.0);
        }
        for (fi, face) in self.faces.iter().enumerate() {
            let n = newell_normal(&self.vertices, face);
            if n.norm() == 0.0 {
                continue; // zero-area face contributes nothing
            }
            let n = n.normalize();
            let anchor = self.vertices[face[0]];
            for &vi in face {
                let dev = n.dot(&(self.vertices[vi] - anchor)).abs();
                if dev > PLANARITY_TOL {
                    return Err(Error::InvalidPolytope(format!(
                        "face {fi} deviates {dev:.3e} m from its plane"
                    )));
                }
            }
        }
        let v = self.signed_volume();
        if v.abs() < DEGENERATE_VOLUME {
            Ok(0.0)
        } else {
            Ok(v.max(0.0))
        }
    }

    fn signed_volume(&self) -> f64 {
        let mut six_v = 0.0;
        for face in &self.faces {
            let v0 = self.vertices[face[0]];
            for i in 1..face.len() - 1 {
                let v1 = self.vertices[face[i]];
                let v2 = self.vertices[face[i + 1]];
                six_v += v0.dot(&v1.cross(&v2));
            }
        }
        six_v / 6.0
    }
}

/// Exact volume of the intersection of two oriented boxes.
pub fn box_intersection_volume(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let mut poly = ConvexPolytope::from_box(a);
    for plane in b.half_spaces() {
        poly = poly.clip(&plane);
        if poly.is_empty() {
            return 0.0;
        }
    }
    poly.volume().unwrap_or(0.0)
}

fn newell_normal(vertices: &[Vector3<f64>], face: &[usize]) -> Vector3<f64> {
    let mut n = Vector3::zeros();
    for (i, &a) in face.iter().enumerate() {
        let b = face[(i + 1) % face.len()];
        let va = vertices[a];
        let vb = vertices[b];
        n.x += (va.y - vb.y) * (va.z + vb.z);
        n.y += (va.z - vb.z) * (va.x + vb.x);
        n.z += (va.x - vb.x) * (va.y + vb.y);
    }
    n * 0.5
}

fn orthogonal_unit(n: &Vector3<f64>) -> Vector3<f64> {
    let candidate = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    n.cross(&candidate).normalize()
}

fn angle_about(p: &Vector3<f64>, c: &Vector3<f64>, u: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
    let d = p - c;
    d.dot(w).atan2(d.dot(u))
}
