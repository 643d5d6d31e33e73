//! Barycentric coordinates inside a triangle.

use crate::error::{Error, Result};
use crate::math::Vec3;

/// Triangles with less area than this (in m^2) are rejected as degenerate.
pub const DEGENERATE_AREA_THRESHOLD: f64 = 1e-12;

/// Convex-combination weights of a point with respect to a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl BarycentricWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Self {
        BarycentricWeights { w1, w2, w3 }
    }

    /// Reconstruct the point the weights describe.
    pub fn apply(&self, tri: &[Vec3; 3]) -> Vec3 {
        tri[0] * self.w1 + tri[1] * self.w2 + tri[2] * self.w3
    }

    /// True when all weights are nonnegative up to `tol`.
    pub fn is_inside(&self, tol: f64) -> bool {
        self.w1 >= -tol && self.w2 >= -tol && self.w3 >= -tol
    }
}

/// Barycentric coordinates of `p` with respect to `tri`.
///
/// `p` is assumed to lie in (or numerically near) the triangle's plane; the
/// computation projects onto the plane basis, so small out-of-plane error is
/// harmless. Degenerate triangles are rejected.
pub fn barycentric_coordinates(p: Vec3, tri: &[Vec3; 3]) -> Result<BarycentricWeights> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let area = e1.cross(e2).norm() * 0.5;
    if area < DEGENERATE_AREA_THRESHOLD {
        return Err(Error::DegenerateTriangle);
    }
    let d = p - tri[0];
    let d11 = e1.dot(e1);
    let d12 = e1.dot(e2);
    let d22 = e2.dot(e2);
    let dp1 = d.dot(e1);
    let dp2 = d.dot(e2);
    let denom = d11 * d22 - d12 * d12;
    let w2 = (d22 * dp1 - d12 * dp2) / denom;
    let w3 = (d11 * dp2 - d12 * dp1) / denom;
    Ok(BarycentricWeights::new(1.0 - w2 - w3, w2, w3))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Vec3; 3] {
        [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 3.0, 0.0),
        ]
    }

    #[test]
    fn vertex_gets_unit_weight() {
        let t = tri();
        let w = barycentric_coordinates(t[0], &t).unwrap();
        assert!((w.w1 - 1.0).abs() < 1e-12);
        assert!(w.w2.abs() < 1e-12);
        assert!(w.w3.abs() < 1e-12);
    }

    #[test]
    fn centroid_has_equal_weights() {
        let t = tri();
        let c = (t[0] + t[1] + t[2]) / 3.0;
        let w = barycentric_coordinates(c, &t).unwrap();
        assert!((w.w1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.w2 - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.w3 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let t = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        assert!(matches!(
            barycentric_coordinates(Vec3::new(0.5, 0.0, 0.0), &t),
            Err(Error::DegenerateTriangle)
        ));
    }

    // Independent oracle: solve the 2x2 linear system for (w2, w3) in the
    // plane spanned by two in-plane axes, then w1 = 1 - w2 - w3.
    fn solve_2x2_oracle(p: Vec3, t: &[Vec3; 3]) -> (f64, f64, f64) {
        let e1 = t[1] - t[0];
        let e2 = t[2] - t[0];
        // Build an orthonormal in-plane basis and express everything in it.
        let u = e1.normalize_or_zero();
        let n = e1.cross(e2).normalize_or_zero();
        let v = n.cross(u);
        let d = p - t[0];
        let (a1, a2) = (e1.dot(u), e1.dot(v));
        let (b1, b2) = (e2.dot(u), e2.dot(v));
        let (c1, c2) = (d.dot(u), d.dot(v));
        let det = a1 * b2 - a2 * b1;
        let w2 = (c1 * b2 - c2 * b1) / det;
        let w3 = (a1 * c2 - a2 * c1) / det;
        (1.0 - w2 - w3, w2, w3)
    }

    #[test]
    fn interior_point_matches_linear_solve_oracle() {
        let t = [
            Vec3::new(0.2, -0.5, 1.0),
            Vec3::new(1.7, 0.3, 0.4),
            Vec3::new(-0.3, 1.9, -0.8),
        ];
        // A handful of fixed interior combinations.
        let combos = [
            (0.5, 0.25, 0.25),
            (0.1, 0.6, 0.3),
            (0.33, 0.33, 0.34),
            (0.05, 0.05, 0.9),
        ];
        for (a, b, c) in combos {
            let p = t[0] * a + t[1] * b + t[2] * c;
            let w = barycentric_coordinates(p, &t).unwrap();
            let (o1, o2, o3) = solve_2x2_oracle(p, &t);
            assert!((w.w1 - o1).abs() < 1e-10);
            assert!((w.w2 - o2).abs() < 1e-10);
            assert!((w.w3 - o3).abs() < 1e-10);
        }
    }
}
