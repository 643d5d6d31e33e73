//! Bounding volume hierarchy over mesh triangles.
//!
//! Median split on the longest axis of the node's bounds, leaves hold at
//! most [`LEAF_SIZE`] triangles. Triangle data (v0, e1, e2) is baked into
//! the tree so traversal never touches the mesh.

use crate::error::{Error, Result};
use crate::geometry::{BarycentricWeights, Mesh};
use crate::math::{Aabb, Vec3};

pub const LEAF_SIZE: usize = 4;

/// Minimum ray parameter; avoids self-intersection at the origin.
pub const RAY_T_MIN: f64 = 1e-4;

/// Epsilon on the Moller-Trumbore determinant.
const DET_EPSILON: f64 = 1e-9;

/// Tolerance on barycentric bounds so shared edges register on either
/// adjacent triangle.
const EDGE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: (first, count) into `order`. Internal: left child is
    /// `children`, right child is `children + 1`... stored explicitly.
    kind: NodeKind,
}

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { first: u32, count: u32 },
    Internal { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct TriData {
    v0: Vec3,
    e1: Vec3,
    e2: Vec3,
}

/// Intersection record returned by [`Bvh::raycast_nearest`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub triangle: u32,
    pub t: f64,
    pub weights: BarycentricWeights,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Triangle indices ordered so each leaf owns a contiguous range.
    order: Vec<u32>,
    tris: Vec<TriData>,
}

impl Bvh {
    /// Build over all faces of the mesh. Errors on an empty mesh.
    pub fn build(mesh: &Mesh) -> Result<Bvh> {
        if mesh.faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let tris: Vec<TriData> = (0..mesh.face_count())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                TriData { v0: a, e1: b - a, e2: c - a }
            })
            .collect();
        let centroids: Vec<Vec3> = (0..mesh.face_count())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                (a + b + c) / 3.0
            })
            .collect();
        let tri_bounds: Vec<Aabb> = (0..mesh.face_count())
            .map(|f| Aabb::from_points(mesh.triangle(f)))
            .collect();

        let mut order: Vec<u32> = (0..mesh.face_count() as u32).collect();
        let mut nodes = Vec::new();
        build_recursive(&mut nodes, &mut order, 0, mesh.face_count(), &centroids, &tri_bounds);
        Ok(Bvh { nodes, order, tris })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Tree depth (single leaf = 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Internal { left, right } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// All triangle indices reachable from the root (for structural tests).
    pub fn reachable_triangles(&self) -> Vec<u32> {
        let mut out = self.order.clone();
        out.sort_unstable();
        out
    }

    /// Nearest triangle intersection along the ray, searching
    /// t in (RAY_T_MIN, inf). Exact ties on t break to the lower triangle
    /// id so traversal order cannot influence the result.
    pub fn raycast_nearest(&self, origin: Vec3, direction: Vec3) -> Option<Hit> {
        let inv_dir = Vec3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut best: Option<Hit> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx as usize];
            let t_limit = best.map_or(f64::INFINITY, |h| h.t);
            if node
                .bounds
                .ray_intersect(origin, inv_dir, RAY_T_MIN, t_limit)
                .is_none()
            {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { first, count } => {
                    for &tri_idx in &self.order[first as usize..(first + count) as usize] {
                        if let Some(hit) = intersect_triangle(&self.tris[tri_idx as usize], origin, direction, tri_idx) {
                            let better = match best {
                                None => true,
                                Some(b) => hit.t < b.t || (hit.t == b.t && hit.triangle < b.triangle),
                            };
                            if better {
                                best = Some(hit);
                            }
                        }
                    }
                }
                NodeKind::Internal { left, right } => {
                    // Visit the nearer child first (pop order: push far first).
                    let dl = self.nodes[left as usize]
                        .bounds
                        .ray_intersect(origin, inv_dir, RAY_T_MIN, t_limit);
                    let dr = self.nodes[right as usize]
                        .bounds
                        .ray_intersect(origin, inv_dir, RAY_T_MIN, t_limit);
                    match (dl, dr) {
                        (Some(a), Some(b)) => {
                            if a <= b {
                                stack.push(right);
                                stack.push(left);
                            } else {
                                stack.push(left);
                                stack.push(right);
                            }
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }
}

fn build_recursive(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    first: usize,
    count: usize,
    centroids: &[Vec3],
    tri_bounds: &[Aabb],
) -> u32 {
    let slice = &order[first..first + count];
    let mut bounds = Aabb::empty();
    for &t in slice {
        bounds = bounds.union(&tri_bounds[t as usize]);
    }
    let node_index = nodes.len() as u32;
    nodes.push(Node { bounds, kind: NodeKind::Leaf { first: first as u32, count: count as u32 } });

    if count <= LEAF_SIZE {
        return node_index;
    }

    let axis = bounds.longest_axis();
    let mid = count / 2;
    // Median split on centroid position; tie-break by triangle index keeps
    // the build deterministic.
    order[first..first + count].select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize]
            .axis(axis)
            .partial_cmp(&centroids[b as usize].axis(axis))
            .unwrap()
            .then(a.cmp(&b))
    });

    let left = build_recursive(nodes, order, first, mid, centroids, tri_bounds);
    let right = build_recursive(nodes, order, first + mid, count - mid, centroids, tri_bounds);
    nodes[node_index as usize].kind = NodeKind::Internal { left, right };
    node_index
}

/// Moller-Trumbore intersection returning barycentric weights at the hit.
#[allow(clippy::manual_range_contains)]
fn intersect_triangle(tri: &TriData, origin: Vec3, direction: Vec3, index: u32) -> Option<Hit> {
    let pvec = direction.cross(tri.e2);
    let det = tri.e1.dot(pvec);
    if det.abs() < DET_EPSILON {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri.v0;
    let u = tvec.dot(pvec) * inv_det;
    if u < -EDGE_EPSILON || u > 1.0 + EDGE_EPSILON {
        return None;
    }
    let qvec = tvec.cross(tri.e1);
    let v = direction.dot(qvec) * inv_det;
    if v < -EDGE_EPSILON || u + v > 1.0 + EDGE_EPSILON {
        return None;
    }
    let t = tri.e2.dot(qvec) * inv_det;
    if t <= RAY_T_MIN {
        return None;
    }
    Some(Hit {
        triangle: index,
        t,
        weights: BarycentricWeights::new(1.0 - u - v, u, v),
    })
}

/// Brute-force nearest intersection over every triangle; the reference
/// oracle for BVH traversal.
pub fn raycast_brute_force(mesh: &Mesh, origin: Vec3, direction: Vec3) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.triangle(f);
        let tri = TriData { v0: a, e1: b - a, e2: c - a };
        if let Some(hit) = intersect_triangle(&tri, origin, direction, f as u32) {
            let better = match best {
                None => true,
                Some(bst) => hit.t < bst.t || (hit.t == bst.t && hit.triangle < bst.triangle),
            };
            if better {
                best = Some(hit);
            }
        }
    }
    best
}
