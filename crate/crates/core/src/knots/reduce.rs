//! Triangle-elimination simplification of polygons.
//!
//! A vertex `b` with neighbours `a`, `c` is deleted when no other edge meets
//! the closed triangle `abc`; the straight-line homotopy across the triangle
//! is then an ambient isotopy, so the knot type is unchanged. Intersection
//! tests are conservative: anything within [`TOLERANCE`] counts as a hit.

use crate::geom::Vec3;
use crate::thickness::closest_segment_params;

pub const TOLERANCE: f64 = 1e-9;

struct Tri {
    a: Vec3,
    b: Vec3,
    c: Vec3,
    lo: Vec3,
    hi: Vec3,
    /// Unit normal, `None` for collinear corners.
    normal: Option<Vec3>,
}

impl Tri {
    fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        let pad = Vec3::new(TOLERANCE, TOLERANCE, TOLERANCE);
        let n = (b - a).cross(c - a);
        let normal = if n.norm() > TOLERANCE * (b - a).norm().max((c - a).norm()).max(1.0) {
            n.normalized()
        } else {
            None
        };
        Tri {
            a,
            b,
            c,
            lo: a.min(b).min(c) - pad,
            hi: a.max(b).max(c) + pad,
            normal,
        }
    }

    fn box_misses(&self, p: Vec3, q: Vec3) -> bool {
        let lo = p.min(q);
        let hi = p.max(q);
        hi.x < self.lo.x
            || hi.y < self.lo.y
            || hi.z < self.lo.z
            || lo.x > self.hi.x
            || lo.y > self.hi.y
            || lo.z > self.hi.z
    }

    /// In-plane test with slack, for a point already on the triangle's plane.
    fn contains_planar(&self, x: Vec3, n: Vec3) -> bool {
        [(self.a, self.b), (self.b, self.c), (self.c, self.a)]
            .iter()
            .all(|&(u, w)| {
                let e = w - u;
                e.cross(x - u).dot(n) / e.norm() >= -TOLERANCE
            })
    }

    /// Does segment `pq` (sharing no corner with the triangle) come within tolerance of it?
    fn hits(&self, p: Vec3, q: Vec3) -> bool {
        if self.box_misses(p, q) {
            return false;
        }
        let Some(n) = self.normal else {
            return seg_near(p, q, self.a, self.b) || seg_near(p, q, self.b, self.c);
        };
        let op = n.dot(p - self.a);
        let oq = n.dot(q - self.a);
        if (op > TOLERANCE && oq > TOLERANCE) || (op < -TOLERANCE && oq < -TOLERANCE) {
            return false;
        }
        if op.abs() <= TOLERANCE && oq.abs() <= TOLERANCE {
            return self.contains_planar(p, n)
                || self.contains_planar(q, n)
                || seg_near(p, q, self.a, self.b)
                || seg_near(p, q, self.b, self.c)
                || seg_near(p, q, self.c, self.a);
        }
        let x = if op.abs() <= TOLERANCE {
            p
        } else if oq.abs() <= TOLERANCE {
            q
        } else {
            p + (q - p) * (op / (op - oq))
        };
        self.contains_planar(x, n)
    }

    /// Edge from corner `k` to `p`: it only touches the triangle at `k` unless it
    /// stays in the plane and points into the corner's wedge.
    fn adjacent_hits(&self, k: Vec3, u: Vec3, w: Vec3, p: Vec3) -> bool {
        let d = p - k;
        let Some(n) = self.normal else {
            return false;
        };
        if n.dot(d).abs() > TOLERANCE {
            return false;
        }
        let e1 = u - k;
        let e2 = w - k;
        // Inside the wedge iff d is on the e2 side of e1 and on the e1 side of e2.
        e1.cross(d).dot(n) * e1.cross(e2).dot(n).signum() >= -TOLERANCE * d.norm()
            && e2.cross(d).dot(n) * e2.cross(e1).dot(n).signum() >= -TOLERANCE * d.norm()
    }
}

fn seg_near(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> bool {
    let (s, t) = closest_segment_params(p1, q1, p2, q2);
    let x = p1 + (q1 - p1) * s;
    let y = p2 + (q2 - p2) * t;
    x.distance(y) <= TOLERANCE
}

/// Doubly linked ring of polygon vertices.
struct Ring {
    pts: Vec<Vec3>,
    next: Vec<usize>,
    prev: Vec<usize>,
    alive: usize,
    head: usize,
    closed: bool,
}

impl Ring {
    fn new(pts: Vec<Vec3>, closed: bool) -> Self {
        let m = pts.len();
        Ring {
            next: (0..m).map(|i| (i + 1) % m).collect(),
            prev: (0..m).map(|i| (i + m - 1) % m).collect(),
            alive: m,
            head: 0,
            closed,
            pts,
        }
    }

    fn removable(&self, b: usize) -> bool {
        let a = self.prev[b];
        let c = self.next[b];
        let (pa, pb, pc) = (self.pts[a], self.pts[b], self.pts[c]);
        if pa.distance(pc) <= TOLERANCE {
            return false;
        }
        let tri = Tri::new(pa, pb, pc);
        let last = if self.closed {
            usize::MAX
        } else {
            self.pts.len() - 1
        };
        let mut k = self.next[c];
        let mut before = c;
        // Edges (c, next(c)) .. (prev(a), a); the open arc has no edge from its end.
        while before != a {
            if before != last {
                let (p, q) = (self.pts[before], self.pts[k]);
                let blocked = if before == c && k == a {
                    // Remaining polygon is this triangle's third side.
                    false
                } else if before == c {
                    tri.adjacent_hits(pc, pa, pb, q) || (tri.normal.is_none() && seg_near(q, q, pa, pb))
                } else if k == a {
                    tri.adjacent_hits(pa, pb, pc, p) || (tri.normal.is_none() && seg_near(p, p, pb, pc))
                } else {
                    tri.hits(p, q)
                };
                if blocked {
                    return false;
                }
            }
            before = k;
            k = self.next[k];
        }
        true
    }

    fn remove(&mut self, b: usize) {
        let a = self.prev[b];
        let c = self.next[b];
        self.next[a] = c;
        self.prev[c] = a;
        self.alive -= 1;
        if self.head == b {
            self.head = c;
        }
    }

    fn reduce(&mut self) {
        let fixed_end = if self.closed {
            None
        } else {
            Some(self.pts.len() - 1)
        };
        loop {
            let mut changed = false;
            let mut k = self.head;
            let pass = self.alive;
            for _ in 0..pass {
                if self.alive <= 3 {
                    return;
                }
                let nk = self.next[k];
                let is_end = !self.closed && (k == 0 || Some(k) == fixed_end);
                if !is_end && self.removable(k) {
                    self.remove(k);
                    changed = true;
                }
                k = nk;
            }
            if !changed {
                return;
            }
        }
    }

    fn collect(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.alive);
        let mut k = self.head;
        for _ in 0..self.alive {
            out.push(self.pts[k]);
            k = self.next[k];
        }
        out
    }
}

/// Simplifies a closed polygon without changing its knot type.
pub fn reduce_polygon(vertices: &[Vec3]) -> Vec<Vec3> {
    if vertices.len() <= 3 {
        return vertices.to_vec();
    }
    let mut ring = Ring::new(vertices.to_vec(), true);
    ring.reduce();
    ring.collect()
}

/// Simplifies an open polyline keeping both endpoints fixed.
pub fn reduce_arc(vertices: &[Vec3]) -> Vec<Vec3> {
    if vertices.len() <= 3 {
        return vertices.to_vec();
    }
    let mut ring = Ring::new(vertices.to_vec(), false);
    ring.reduce();
    ring.collect()
}
