//! Exact nearest-neighbor search over point sets.
//!
//! This is the inner loop of CD, NAD, and the F-score, so there is no
//! approximation: queries return exactly the brute-force minimum, with ties
//! broken toward the lowest point index. The tree is a median-split KD-tree
//! with cycling axes and leaf size 16; pruning compares squared distances and
//! keeps the far subtree whenever it could still hold an equal-distance
//! point, which preserves the tie-break contract.

use crate::error::{Error, Result};
use crate::sampling::PointSet;
use nalgebra::Vector3;

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// An immutable exact nearest-neighbor index.
pub struct NnIndex {
    points: Vec<Vector3<f64>>,
    /// Permutation of point indices, partitioned by the tree.
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

/// Result of a nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    /// Index into the original point list.
    pub index: usize,
    /// Euclidean distance to the query.
    pub distance: f64,
}

/// Builds an index over the given points.
pub fn build_index(pts: &PointSet) -> Result<NnIndex> {
    NnIndex::build(pts)
}

impl NnIndex {
    pub fn build(pts: &PointSet) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptyInput("point set for index"));
        }
        let points = pts.as_slice().to_vec();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let len = order.len();
        let root = build_node(&points, &mut order, 0, len, 0, &mut nodes);
        Ok(Self {
            points,
            order,
            nodes,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    /// Exact nearest neighbor of `q`.
    pub fn nearest(&self, q: &Vector3<f64>) -> Nearest {
        let mut best_d2 = f64::INFINITY;
        let mut best_idx = usize::MAX;
        self.search(self.root, q, &mut best_d2, &mut best_idx);
        Nearest {
            index: best_idx,
            distance: best_d2.sqrt(),
        }
    }

    fn search(&self, node: usize, q: &Vector3<f64>, best_d2: &mut f64, best_idx: &mut usize) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &pi in &self.order[start..end] {
                    let pi = pi as usize;
                    let d2 = (self.points[pi] - q).norm_squared();
                    if d2 < *best_d2 || (d2 == *best_d2 && pi < *best_idx) {
                        *best_d2 = d2;
                        *best_idx = pi;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best_d2, best_idx);
                // `<=` so equal-distance candidates on the far side are still
                // visited; required for deterministic tie-breaking.
                if diff * diff <= *best_d2 {
                    self.search(far, q, best_d2, best_idx);
                }
            }
        }
    }
}

fn build_node(
    points: &[Vector3<f64>],
    order: &mut [u32],
    start: usize,
    end: usize,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return nodes.len() - 1;
    }
    let axis = depth % 3;
    let mid = (end - start) / 2;
    let slice = &mut order[start..end];
    slice.select_nth_unstable_by(mid, |&a, &b| {
        let ca = points[a as usize][axis];
        let cb = points[b as usize][axis];
        ca.partial_cmp(&cb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let value = points[slice[mid] as usize][axis];
    let left = build_node(points, order, start, start + mid, depth + 1, nodes);
    let right = build_node(points, order, start + mid, end, depth + 1, nodes);
    nodes.push(Node::Split {
        axis,
        value,
        left,
        right,
    });
    nodes.len() - 1
}

/// Brute-force nearest neighbor with the same arithmetic and tie-breaking as
/// the index; the reference oracle for exactness tests.
pub fn nearest_linear(points: &[Vector3<f64>], q: &Vector3<f64>) -> Nearest {
    let mut best_d2 = f64::INFINITY;
    let mut best_idx = usize::MAX;
    for (pi, p) in points.iter().enumerate() {
        let d2 = (p - q).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best_idx = pi;
        }
    }
    Nearest {
        index: best_idx,
        distance: best_d2.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Vector3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Vector3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                )
            })
            .collect()
    }

    #[test]
    fn single_point_query() {
        let index = NnIndex::build(&PointSet::new(vec![Vector3::zeros()]).unwrap()).unwrap();
        let hit = index.nearest(&Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(hit.index, 0);
        assert_eq!(hit.distance, 1.0);
    }

    #[test]
    fn self_queries_return_zero() {
        let pts = random_points(1000, 1);
        let index = NnIndex::build(&PointSet::new(pts.clone()).unwrap()).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let hit = index.nearest(p);
            assert_eq!(hit.distance, 0.0);
            assert_eq!(hit.index, i);
        }
    }

    #[test]
    fn duplicates_resolve_to_lowest_index() {
        let p = Vector3::new(0.25, -0.5, 0.75);
        let pts = vec![Vector3::new(9.0, 9.0, 9.0), p, p, p];
        let index = NnIndex::build(&PointSet::new(pts).unwrap()).unwrap();
        let hit = index.nearest(&p);
        assert_eq!(hit.distance, 0.0);
        assert_eq!(hit.index, 1);
    }

    #[test]
    fn grid_corner_query() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vector3::new(
                f64::from(i & 1),
                f64::from((i >> 1) & 1),
                f64::from((i >> 2) & 1),
            ));
        }
        let index = NnIndex::build(&PointSet::new(pts).unwrap()).unwrap();
        let hit = index.nearest(&Vector3::new(0.1, 0.1, 0.1));
        assert_eq!(hit.index, 0);
        assert!((hit.distance - 0.03f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matches_linear_scan_on_random_input() {
        let pts = random_points(2000, 2);
        let queries = random_points(200, 3);
        let index = NnIndex::build(&PointSet::new(pts.clone()).unwrap()).unwrap();
        for q in &queries {
            let tree = index.nearest(q);
            let flat = nearest_linear(&pts, q);
            assert_eq!(tree.distance, flat.distance, "distance must be exact");
            assert_eq!(tree.index, flat.index, "tie-break must match");
        }
    }

    #[test]
    fn translation_equivariance() {
        use crate::geometry::RigidTransform;
        let pts = random_points(500, 4);
        let queries = random_points(50, 5);
        let t = RigidTransform::from_axis_angle(Vector3::new(0.2, 1.0, -0.4), 0.9)
            .compose(&RigidTransform::translation(Vector3::new(0.3, -0.1, 2.0)));
        let moved: Vec<Vector3<f64>> = pts.iter().map(|p| t.transform_point(p)).collect();
        let index = NnIndex::build(&PointSet::new(pts).unwrap()).unwrap();
        let moved_index = NnIndex::build(&PointSet::new(moved).unwrap()).unwrap();
        for q in &queries {
            let d0 = index.nearest(q).distance;
            let d1 = moved_index.nearest(&t.transform_point(q)).distance;
            assert!((d0 - d1).abs() <= 1e-9);
        }
    }
}
