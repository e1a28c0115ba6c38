//! Incremental convex hull (quickhull) over 3D points.
//!
//! Only the hull *vertex set* is consumed (diameter candidate pruning), so
//! faces are throwaway scaffolding. Returns `None` when no non-degenerate
//! initial tetrahedron exists; callers treat that as "use all points".

use nalgebra::Vector3;
use std::collections::HashMap;

struct Face {
    verts: [u32; 3],
    normal: Vector3<f64>,
    offset: f64,
    outside: Vec<u32>,
    alive: bool,
}

impl Face {
    fn dist(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

pub(crate) fn convex_hull_vertices(pts: &[Vector3<f64>]) -> Option<Vec<usize>> {
    if pts.len() < 4 {
        return None;
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let span = hi - lo;
    let scale = span.x.max(span.y).max(span.z);
    if !(scale > 0.0) {
        return None;
    }
    let degeneracy_tol = scale * 1e-10;
    let visibility_eps = scale * 1e-12;

    let seed = initial_tetrahedron(pts, degeneracy_tol)?;
    let interior: Vector3<f64> = seed.iter().map(|&i| pts[i as usize]).sum::<Vector3<f64>>() / 4.0;

    let mut faces: Vec<Face> = Vec::new();
    let mut edge_to_face: HashMap<(u32, u32), u32> = HashMap::new();
    for tri in [
        [seed[0], seed[1], seed[2]],
        [seed[0], seed[1], seed[3]],
        [seed[0], seed[2], seed[3]],
        [seed[1], seed[2], seed[3]],
    ] {
        push_face(pts, &interior, tri, &mut faces, &mut edge_to_face);
    }

    // Initial conflict assignment: each point goes to the first face it is
    // outside of; interior points are dropped for good.
    let seed_set = seed;
    for (pi, p) in pts.iter().enumerate() {
        let pi = pi as u32;
        if seed_set.contains(&pi) {
            continue;
        }
        for face in faces.iter_mut() {
            if face.dist(p) > visibility_eps {
                face.outside.push(pi);
                break;
            }
        }
    }

    let mut pending: Vec<u32> = (0..faces.len() as u32).collect();
    while let Some(fi) = pending.pop() {
        let fi = fi as usize;
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        // Farthest conflict point, lowest index breaking ties.
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let da = faces[fi].dist(&pts[a as usize]);
                let db = faces[fi].dist(&pts[b as usize]);
                da.partial_cmp(&db)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(&a))
            })
            .expect("non-empty conflict list");
        let apex_point = pts[apex as usize];

        // Flood-fill the faces visible from the apex, starting at fi.
        let mut visible: Vec<u32> = vec![fi as u32];
        let mut seen: Vec<bool> = vec![false; faces.len()];
        seen[fi] = true;
        let mut cursor = 0;
        while cursor < visible.len() {
            let current = visible[cursor] as usize;
            cursor += 1;
            let verts = faces[current].verts;
            for k in 0..3 {
                let edge = (verts[(k + 1) % 3], verts[k]);
                if let Some(&nb) = edge_to_face.get(&edge) {
                    let nb = nb as usize;
                    if !seen[nb] && faces[nb].alive && faces[nb].dist(&apex_point) > visibility_eps
                    {
                        seen[nb] = true;
                        visible.push(nb as u32);
                    }
                }
            }
        }

        // Horizon: directed edges of visible faces whose twin face stays.
        let mut horizon: Vec<(u32, u32)> = Vec::new();
        for &vf in &visible {
            let verts = faces[vf as usize].verts;
            for k in 0..3 {
                let a = verts[k];
                let b = verts[(k + 1) % 3];
                match edge_to_face.get(&(b, a)) {
                    Some(&twin) if seen[twin as usize] => {}
                    _ => horizon.push((a, b)),
                }
            }
        }

        // Collect the points to redistribute and retire the visible faces.
        let mut orphans: Vec<u32> = Vec::new();
        for &vf in &visible {
            let face = &mut faces[vf as usize];
            face.alive = false;
            orphans.extend(face.outside.drain(..).filter(|&p| p != apex));
            let verts = face.verts;
            for k in 0..3 {
                let edge = (verts[k], verts[(k + 1) % 3]);
                if edge_to_face.get(&edge) == Some(&vf) {
                    edge_to_face.remove(&edge);
                }
            }
        }

        let first_new = faces.len();
        for (a, b) in horizon {
            push_face(pts, &interior, [a, b, apex], &mut faces, &mut edge_to_face);
        }
        for pi in orphans {
            let p = pts[pi as usize];
            for nf in first_new..faces.len() {
                if faces[nf].dist(&p) > visibility_eps {
                    faces[nf].outside.push(pi);
                    break;
                }
            }
        }
        for nf in first_new..faces.len() {
            if !faces[nf].outside.is_empty() {
                pending.push(nf as u32);
            }
        }
    }

    let mut used: Vec<bool> = vec![false; pts.len()];
    for face in faces.iter().filter(|f| f.alive) {
        for &v in &face.verts {
            used[v as usize] = true;
        }
    }
    Some(used.iter().enumerate().filter(|(_, &u)| u).map(|(i, _)| i).collect())
}

fn push_face(
    pts: &[Vector3<f64>],
    interior: &Vector3<f64>,
    mut verts: [u32; 3],
    faces: &mut Vec<Face>,
    edge_to_face: &mut HashMap<(u32, u32), u32>,
) {
    let a = pts[verts[0] as usize];
    let b = pts[verts[1] as usize];
    let c = pts[verts[2] as usize];
    let mut normal = (b - a).cross(&(c - a));
    // Outward orientation: the tetrahedron centroid must be behind the face.
    if normal.dot(interior) - normal.dot(&a) > 0.0 {
        verts.swap(1, 2);
        normal = -normal;
    }
    let offset = normal.dot(&a);
    let idx = faces.len() as u32;
    for k in 0..3 {
        edge_to_face.insert((verts[k], verts[(k + 1) % 3]), idx);
    }
    faces.push(Face {
        verts,
        normal,
        offset,
        outside: Vec::new(),
        alive: true,
    });
}

/// Picks four affinely independent points: the farthest axis-extreme pair,
/// the point farthest from their line, and the point farthest from the
/// resulting plane.
fn initial_tetrahedron(pts: &[Vector3<f64>], tol: f64) -> Option<[u32; 4]> {
    let mut extremes = [0usize; 6];
    for (pi, p) in pts.iter().enumerate() {
        for axis in 0..3 {
            if p[axis] < pts[extremes[axis * 2]][axis] {
                extremes[axis * 2] = pi;
            }
            if p[axis] > pts[extremes[axis * 2 + 1]][axis] {
                extremes[axis * 2 + 1] = pi;
            }
        }
    }
    let (mut p0, mut p1, mut best) = (extremes[0], extremes[1], -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (pts[a] - pts[b]).norm_squared();
            if d > best {
                best = d;
                p0 = a;
                p1 = b;
            }
        }
    }
    if best.sqrt() <= tol {
        return None;
    }
    let dir = (pts[p1] - pts[p0]).normalize();
    let (mut p2, mut best) = (0usize, -1.0);
    for (pi, p) in pts.iter().enumerate() {
        let d = (p - pts[p0]).cross(&dir).norm();
        if d > best {
            best = d;
            p2 = pi;
        }
    }
    if best <= tol {
        return None;
    }
    let normal = (pts[p1] - pts[p0])
        .cross(&(pts[p2] - pts[p0]))
        .normalize();
    let (mut p3, mut best) = (0usize, -1.0);
    for (pi, p) in pts.iter().enumerate() {
        let d = normal.dot(&(p - pts[p0])).abs();
        if d > best {
            best = d;
            p3 = pi;
        }
    }
    if best <= tol {
        return None;
    }
    Some([p0 as u32, p1 as u32, p2 as u32, p3 as u32])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hull_of_cube_corners_is_all_corners() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vector3::new(
                f64::from(i & 1),
                f64::from((i >> 1) & 1),
                f64::from((i >> 2) & 1),
            ));
        }
        // Interior point must not appear.
        pts.push(Vector3::new(0.5, 0.5, 0.5));
        let hull = convex_hull_vertices(&pts).unwrap();
        assert_eq!(hull, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn hull_contains_all_extreme_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vector3<f64>> = (0..2000)
            .map(|_| {
                Vector3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                )
            })
            .collect();
        let hull = convex_hull_vertices(&pts).unwrap();
        assert!(hull.len() >= 4);
        // Axis extremes are necessarily hull vertices.
        for axis in 0..3 {
            let lo = (0..pts.len())
                .min_by(|&a, &b| pts[a][axis].partial_cmp(&pts[b][axis]).unwrap())
                .unwrap();
            let hi = (0..pts.len())
                .max_by(|&a, &b| pts[a][axis].partial_cmp(&pts[b][axis]).unwrap())
                .unwrap();
            assert!(hull.contains(&lo));
            assert!(hull.contains(&hi));
        }
    }

    #[test]
    fn degenerate_inputs_return_none() {
        let line: Vec<Vector3<f64>> = (0..10).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        assert!(convex_hull_vertices(&line).is_none());
        let plane: Vec<Vector3<f64>> = (0..10)
            .map(|i| Vector3::new(i as f64, (i * i) as f64, 0.0))
            .collect();
        assert!(convex_hull_vertices(&plane).is_none());
        assert!(convex_hull_vertices(&[Vector3::zeros(); 3]).is_none());
    }
}
