//! Planar projections of polygons and their Gauss codes.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::sampler::random_unit;

use super::ClosedPolygon;

/// Projected features closer than this are treated as coincident.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;
pub const MAX_PROJECTION_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    /// Polygon edge passing over.
    pub over: usize,
    /// Polygon edge passing under.
    pub under: usize,
    pub sign: i8,
}

/// One passage through a crossing along the knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussEntry {
    pub crossing: usize,
    pub over: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossingDiagram {
    crossings: Vec<Crossing>,
    gauss: Vec<GaussEntry>,
}

impl CrossingDiagram {
    /// Builds a diagram from a Gauss code and per-crossing signs.
    ///
    /// Every label in `0..signs.len()` must occur exactly twice, once over and once under.
    pub fn from_gauss_code(code: &[(usize, bool)], signs: &[i8]) -> Result<Self> {
        let c = signs.len();
        let mut seen = vec![(0u8, 0u8); c];
        for &(k, over) in code {
            let slot = seen
                .get_mut(k)
                .ok_or_else(|| Error::Domain(format!("crossing label {k} has no sign")))?;
            if over {
                slot.0 += 1;
            } else {
                slot.1 += 1;
            }
        }
        if let Some(k) = seen.iter().position(|&s| s != (1, 1)) {
            return Err(Error::Domain(format!(
                "crossing {k} must appear once over and once under"
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("crossing signs must be +1 or -1".into()));
        }
        let mut crossings = vec![
            Crossing {
                over: 0,
                under: 0,
                sign: 0
            };
            c
        ];
        for (pos, &(k, over)) in code.iter().enumerate() {
            if over {
                crossings[k].over = pos;
            } else {
                crossings[k].under = pos;
            }
            crossings[k].sign = signs[k];
        }
        Ok(CrossingDiagram {
            crossings,
            gauss: code
                .iter()
                .map(|&(crossing, over)| GaussEntry { crossing, over })
                .collect(),
        })
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn gauss_code(&self) -> &[GaussEntry] {
        &self.gauss
    }

    /// Removes Reidemeister I loops and II bigons visible in the Gauss code.
    pub fn simplify(&self) -> CrossingDiagram {
        let mut code: Vec<GaussEntry> = self.gauss.clone();
        let sign = |k: usize| self.crossings[k].sign;
        loop {
            let len = code.len();
            if len == 0 {
                break;
            }
            let mut kill: Option<Vec<usize>> = None;
            for p in 0..len {
                let q = (p + 1) % len;
                if code[p].crossing == code[q].crossing {
                    kill = Some(vec![code[p].crossing]);
                    break;
                }
            }
            if kill.is_none() && len >= 4 {
                let mut pos: HashMap<(usize, bool), usize> = HashMap::with_capacity(len);
                for (i, e) in code.iter().enumerate() {
                    pos.insert((e.crossing, e.over), i);
                }
                for p in 0..len {
                    let q = (p + 1) % len;
                    let (x, y) = (code[p], code[q]);
                    if x.over != y.over || sign(x.crossing) == sign(y.crossing) {
                        continue;
                    }
                    let px = pos[&(x.crossing, !x.over)];
                    let py = pos[&(y.crossing, !y.over)];
                    if (px + 1) % len == py || (py + 1) % len == px {
                        kill = Some(vec![x.crossing, y.crossing]);
                        break;
                    }
                }
            }
            match kill {
                Some(ks) => code.retain(|e| !ks.contains(&e.crossing)),
                None => break,
            }
        }
        let mut relabel: HashMap<usize, usize> = HashMap::new();
        let mut crossings = Vec::new();
        for e in &code {
            relabel.entry(e.crossing).or_insert_with(|| {
                crossings.push(self.crossings[e.crossing]);
                crossings.len() - 1
            });
        }
        CrossingDiagram {
            crossings,
            gauss: code
                .iter()
                .map(|e| GaussEntry {
                    crossing: relabel[&e.crossing],
                    over: e.over,
                })
                .collect(),
        }
    }
}

fn cross2(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn sub2(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn len2(a: (f64, f64)) -> f64 {
    a.0.hypot(a.1)
}

/// Orthonormal `(e1, e2)` with `e1 x e2 = d`.
fn basis(d: Vec3) -> (Vec3, Vec3) {
    let helper = if d.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let e1 = d
        .cross(helper)
        .normalized()
        .expect("helper axis is not parallel to d");
    (e1, d.cross(e1))
}

/// Projection along unit `d`; `None` when the projection is not generic.
pub fn try_project(vertices: &[Vec3], d: Vec3) -> Option<CrossingDiagram> {
    let eps = DEGENERACY_TOLERANCE;
    let m = vertices.len();
    let (e1, e2) = basis(d);
    let p: Vec<(f64, f64)> = vertices.iter().map(|v| (v.dot(e1), v.dot(e2))).collect();
    let z: Vec<f64> = vertices.iter().map(|v| v.dot(d)).collect();
    for i in 0..m {
        for j in i + 1..m {
            if len2(sub2(p[i], p[j])) < eps {
                return None;
            }
        }
    }
    // Adjacent edges must not fold back onto each other.
    for i in 0..m {
        let a = sub2(p[i], p[(i + m - 1) % m]);
        let b = sub2(p[(i + 1) % m], p[i]);
        if cross2(a, b).abs() < eps * len2(a) * len2(b) && a.0 * b.0 + a.1 * b.1 < 0.0 {
            return None;
        }
    }

    // (edge, parameter, crossing id, over)
    let mut passes: Vec<(usize, f64, usize, bool)> = Vec::new();
    let mut crossings = Vec::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for i in 0..m {
        let (a0, a1) = (p[i], p[(i + 1) % m]);
        let r = sub2(a1, a0);
        let lr = len2(r);
        let (ax_lo, ax_hi) = (a0.0.min(a1.0) - eps, a0.0.max(a1.0) + eps);
        let (ay_lo, ay_hi) = (a0.1.min(a1.1) - eps, a0.1.max(a1.1) + eps);
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (b0, b1) = (p[j], p[(j + 1) % m]);
            if b0.0.max(b1.0) < ax_lo
                || b0.0.min(b1.0) > ax_hi
                || b0.1.max(b1.1) < ay_lo
                || b0.1.min(b1.1) > ay_hi
            {
                continue;
            }
            let s = sub2(b1, b0);
            let ls = len2(s);
            let denom = cross2(r, s);
            let qp = sub2(b0, a0);
            if denom.abs() < eps * lr * ls {
                // Parallel: degenerate only if collinear and overlapping.
                if (cross2(qp, r) / lr).abs() < eps {
                    let t0 = (qp.0 * r.0 + qp.1 * r.1) / (lr * lr);
                    let q1 = sub2(b1, a0);
                    let t1 = (q1.0 * r.0 + q1.1 * r.1) / (lr * lr);
                    if t0.max(t1) >= -eps && t0.min(t1) <= 1.0 + eps {
                        return None;
                    }
                }
                continue;
            }
            let t = cross2(qp, s) / denom;
            let u = cross2(qp, r) / denom;
            let (dt, du) = (eps / lr, eps / ls);
            if t < -dt || t > 1.0 + dt || u < -du || u > 1.0 + du {
                continue;
            }
            if t <= dt || t >= 1.0 - dt || u <= du || u >= 1.0 - du {
                return None;
            }
            let zi = z[i] + t * (z[(i + 1) % m] - z[i]);
            let zj = z[j] + u * (z[(j + 1) % m] - z[j]);
            if (zi - zj).abs() < eps {
                return None;
            }
            let x = (a0.0 + t * r.0, a0.1 + t * r.1);
            if points.iter().any(|&y| len2(sub2(x, y)) < eps) {
                return None;
            }
            points.push(x);
            let k = crossings.len();
            let (over, under, od, ud) = if zi > zj { (i, j, r, s) } else { (j, i, s, r) };
            let sign = if cross2(od, ud) > 0.0 { 1 } else { -1 };
            crossings.push(Crossing { over, under, sign });
            passes.push((i, t, k, zi > zj));
            passes.push((j, u, k, zj > zi));
        }
    }
    passes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Some(CrossingDiagram {
        crossings,
        gauss: passes
            .into_iter()
            .map(|(_, _, crossing, over)| GaussEntry { crossing, over })
            .collect(),
    })
}

/// Projects along `direction`, redrawing uniformly random directions while the
/// projection is degenerate.
pub fn project_to_diagram<R: Rng + ?Sized>(
    polygon: &ClosedPolygon,
    direction: Vec3,
    rng: &mut R,
) -> Result<CrossingDiagram> {
    let mut d = direction
        .normalized()
        .ok_or_else(|| Error::Precondition("projection direction must be nonzero".into()))?;
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "projection direction must be unit length, got norm {}",
            direction.norm()
        )));
    }
    for _ in 0..=MAX_PROJECTION_RETRIES {
        if let Some(diagram) = try_project(polygon.vertices(), d) {
            return Ok(diagram);
        }
        d = random_unit(rng);
    }
    Err(Error::DiagramFailure(MAX_PROJECTION_RETRIES))
}
