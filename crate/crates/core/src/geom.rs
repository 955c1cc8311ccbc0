//! Vectors, reflection planes and the equilateral walk container.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Relative tolerance on unit edge lengths.
pub const EDGE_TOLERANCE: f64 = 1e-9;

/// Distance within which a plane is considered to pass through a vertex.
pub const PLANE_INCIDENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    /// Unit vector in the same direction, or `None` for a zero or non-finite vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A reflection plane given by a point on it and a unit normal.
///
/// The normal's sign carries no meaning: `Plane::new(p, u)` and
/// `Plane::new(p, -u)` describe the same plane and reflect identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    point: Vec3,
    normal: Vec3,
}

impl Plane {
    /// Builds a plane, normalizing `normal`.
    pub fn new(point: Vec3, normal: Vec3) -> Result<Self> {
        if !point.is_finite() {
            return Err(Error::Precondition("plane point must be finite".into()));
        }
        let normal = normal
            .normalized()
            .ok_or_else(|| Error::Precondition("plane normal must be nonzero".into()))?;
        Ok(Plane { point, normal })
    }

    /// Caller guarantees `normal` is unit length.
    #[inline]
    pub(crate) fn from_unit(point: Vec3, normal: Vec3) -> Self {
        debug_assert!((normal.norm() - 1.0).abs() < 1e-12);
        Plane { point, normal }
    }

    pub fn point(&self) -> Vec3 {
        self.point
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    /// Signed distance of `p` from the plane (sign depends on the normal orientation).
    #[inline]
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.point).dot(self.normal)
    }
}

/// Mirror image of `p` through `plane`.
#[inline]
pub fn reflect_point(p: Vec3, plane: &Plane) -> Vec3 {
    let d = plane.signed_distance(p);
    p - plane.normal * (2.0 * d)
}

/// Reflects a direction vector (no translation part).
#[inline]
pub(crate) fn reflect_direction(v: Vec3, normal: Vec3) -> Vec3 {
    v - normal * (2.0 * v.dot(normal))
}

/// Equilateral open chain rooted at the origin.
///
/// `vertices[0]` is the origin and consecutive vertices are unit distance apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    vertices: Vec<Vec3>,
}

impl Walk {
    /// Validates and wraps a vertex list.
    pub fn new(vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidWalk(format!(
                "need at least 2 edges, got {}",
                vertices.len().saturating_sub(1)
            )));
        }
        if vertices[0] != Vec3::ZERO {
            return Err(Error::InvalidWalk("first vertex must be the origin".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidWalk(format!("vertex {i} is not finite")));
            }
        }
        for (i, w) in vertices.windows(2).enumerate() {
            let len = w[1].distance(w[0]);
            if (len - 1.0).abs() > EDGE_TOLERANCE {
                return Err(Error::InvalidWalk(format!(
                    "edge {} has length {len}, expected 1",
                    i + 1
                )));
            }
        }
        Ok(Walk { vertices })
    }

    /// Builds a walk by summing unit edge vectors from the origin; edges are normalized first.
    pub fn from_edges<I: IntoIterator<Item = Vec3>>(edges: I) -> Result<Self> {
        let mut vertices = vec![Vec3::ZERO];
        let mut cur = Vec3::ZERO;
        for e in edges {
            let u = e
                .normalized()
                .ok_or_else(|| Error::InvalidWalk("zero-length edge vector".into()))?;
            cur += u;
            vertices.push(cur);
        }
        Walk::new(vertices)
    }

    /// The walk (0,0,0), (1,0,0), ..., (n,0,0).
    pub fn straight(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("need n >= 2 edges, got {n}")));
        }
        Ok(Walk {
            vertices: (0..=n).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect(),
        })
    }

    /// Number of edges.
    #[inline]
    pub fn n(&self) -> usize {
        self.vertices.len() - 1
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec3> {
        self.vertices
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    /// Edge vectors `v_i - v_{i-1}` for `i = 1..=n`.
    pub fn edges(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.vertices.windows(2).map(|w| w[1] - w[0])
    }

    pub fn end(&self) -> Vec3 {
        *self.vertices.last().unwrap()
    }

    pub fn centroid(&self) -> Vec3 {
        centroid(&self.vertices)
    }

    /// Same chain traversed from the far end, translated back to the origin.
    pub fn reversed(&self) -> Walk {
        let end = self.end();
        Walk {
            vertices: self.vertices.iter().rev().map(|&v| v - end).collect(),
        }
    }

    /// Largest deviation of any edge length from 1.
    pub fn max_edge_error(&self) -> f64 {
        self.edges().map(|e| (e.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Rebuilds vertices from normalized edge vectors, removing accumulated drift.
    pub fn renormalize(&mut self) {
        let mut cur = Vec3::ZERO;
        let mut prev = self.vertices[0];
        self.vertices[0] = Vec3::ZERO;
        for i in 1..self.vertices.len() {
            let v = self.vertices[i];
            let e = (v - prev).normalized().unwrap_or(Vec3::X);
            prev = v;
            cur += e;
            self.vertices[i] = cur;
        }
    }

    /// Replaces vertices `i+1..=n` by their mirror images through `plane`.
    pub fn reflect_tail(&self, i: usize, plane: &Plane) -> Result<Walk> {
        let n = self.n();
        if i == 0 || i >= n {
            return Err(Error::Precondition(format!(
                "reflection vertex {i} outside 1..={}",
                n - 1
            )));
        }
        let off = plane.signed_distance(self.vertices[i]).abs();
        if off > PLANE_INCIDENCE_TOLERANCE {
            return Err(Error::Precondition(format!("plane misses vertex {i} by {off:e}")));
        }
        let mut out = self.clone();
        out.reflect_tail_in_place(i, plane);
        Ok(out)
    }

    /// Unchecked in-place tail reflection; the plane is re-anchored at `v_i` exactly.
    pub(crate) fn reflect_tail_in_place(&mut self, i: usize, plane: &Plane) {
        let pivot = self.vertices[i];
        let u = plane.normal();
        for v in &mut self.vertices[i + 1..] {
            let d = (*v - pivot).dot(u);
            *v -= u * (2.0 * d);
        }
    }

    /// Interior angle at vertex `i` between `v_{i-1} - v_i` and `v_{i+1} - v_i`.
    pub fn bend_angle(&self, i: usize) -> Result<f64> {
        if i == 0 || i >= self.n() {
            return Err(Error::Precondition(format!(
                "bend angle index {i} outside 1..={}",
                self.n() - 1
            )));
        }
        Ok(bend_angle_at(&self.vertices, i))
    }
}

/// Bend angle at an interior vertex of a unit-edge polyline (no index check).
#[inline]
pub(crate) fn bend_angle_at(v: &[Vec3], i: usize) -> f64 {
    let a = v[i - 1] - v[i];
    let b = v[i + 1] - v[i];
    angle_between(a, b)
}

/// Angle between two vectors, clamped arccos of the normalized dot product.
#[inline]
pub(crate) fn angle_between(a: Vec3, b: Vec3) -> f64 {
    let denom = (a.norm2() * b.norm2()).sqrt();
    let c = (a.dot(b) / denom).clamp(-1.0, 1.0);
    c.acos()
}

pub fn centroid(points: &[Vec3]) -> Vec3 {
    let mut s = Vec3::ZERO;
    for &p in points {
        s += p;
    }
    s / points.len() as f64
}
