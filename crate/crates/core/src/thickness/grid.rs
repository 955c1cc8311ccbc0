//! Uniform spatial hash over segment bounding boxes.
//!
//! Each segment's box is padded by `cutoff / 2` and registered in every cell
//! it overlaps. Two segments closer than `cutoff` have overlapping padded
//! boxes, so they share at least one cell; the pair is evaluated only in the
//! cell holding the low corner of the box intersection, which visits every
//! candidate pair exactly once. Cell size is `max(1, cutoff)`, so a padded
//! unit segment touches at most 3 cells per axis.

use std::ops::ControlFlow;

use super::{critical_pair, CriticalPair};
use crate::geom::Vec3;

const AXIS_BIAS: i64 = 1 << 20;

#[inline]
fn cell_coord(x: f64, inv: f64) -> i64 {
    (x * inv).floor() as i64
}

#[inline]
fn pack(ix: i64, iy: i64, iz: i64) -> u64 {
    let m = (1u64 << 21) - 1;
    (((ix + AXIS_BIAS) as u64 & m) << 42)
        | (((iy + AXIS_BIAS) as u64 & m) << 21)
        | ((iz + AXIS_BIAS) as u64 & m)
}

struct Boxes {
    lo: Vec<Vec3>,
    hi: Vec<Vec3>,
}

/// Visits candidate segment pairs `(h, j)`, `j >= h + 2`, whose padded boxes overlap.
fn for_each_candidate<F>(v: &[Vec3], cutoff: f64, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(usize, usize) -> ControlFlow<()>,
{
    let m = v.len().saturating_sub(1);
    if m < 3 {
        return ControlFlow::Continue(());
    }
    let pad = Vec3::new(cutoff / 2.0, cutoff / 2.0, cutoff / 2.0);
    let inv = 1.0 / cutoff.max(1.0);

    let mut boxes = Boxes {
        lo: Vec::with_capacity(m),
        hi: Vec::with_capacity(m),
    };
    let mut entries: Vec<(u64, u32)> = Vec::with_capacity(m * 4);
    for k in 0..m {
        let lo = v[k].min(v[k + 1]) - pad;
        let hi = v[k].max(v[k + 1]) + pad;
        let (x0, x1) = (cell_coord(lo.x, inv), cell_coord(hi.x, inv));
        let (y0, y1) = (cell_coord(lo.y, inv), cell_coord(hi.y, inv));
        let (z0, z1) = (cell_coord(lo.z, inv), cell_coord(hi.z, inv));
        for ix in x0..=x1 {
            for iy in y0..=y1 {
                for iz in z0..=z1 {
                    entries.push((pack(ix, iy, iz), k as u32));
                }
            }
        }
        boxes.lo.push(lo);
        boxes.hi.push(hi);
    }
    entries.sort_unstable();

    let mut start = 0;
    while start < entries.len() {
        let key = entries[start].0;
        let mut end = start + 1;
        while end < entries.len() && entries[end].0 == key {
            end += 1;
        }
        let run = &entries[start..end];
        for (a, &(_, h)) in run.iter().enumerate() {
            let h = h as usize;
            for &(_, j) in &run[a + 1..] {
                let j = j as usize;
                if j < h + 2 {
                    continue;
                }
                let lo = boxes.lo[h].max(boxes.lo[j]);
                let hi = boxes.hi[h].min(boxes.hi[j]);
                if lo.x > hi.x || lo.y > hi.y || lo.z > hi.z {
                    continue;
                }
                if pack(
                    cell_coord(lo.x, inv),
                    cell_coord(lo.y, inv),
                    cell_coord(lo.z, inv),
                ) != key
                {
                    continue;
                }
                visit(h, j)?;
            }
        }
        start = end;
    }
    ControlFlow::Continue(())
}

/// Smallest doubly-critical pair with distance `<= cutoff`, if any.
pub(super) fn min_critical_within(v: &[Vec3], cutoff: f64) -> Option<CriticalPair> {
    let mut best: Option<CriticalPair> = None;
    let _ = for_each_candidate(v, cutoff, |h, j| {
        if let Some(p) = critical_pair(v, h, j) {
            if p.distance <= cutoff && best.is_none_or(|b| p.distance < b.distance) {
                best = Some(p);
            }
        }
        ControlFlow::Continue(())
    });
    best
}

/// `dcsd(v) > cutoff`, exiting on the first violating pair. `cutoff` may be zero.
pub fn dcsd_exceeds(v: &[Vec3], cutoff: f64) -> bool {
    for_each_candidate(v, cutoff, |h, j| match critical_pair(v, h, j) {
        Some(p) if p.distance <= cutoff => ControlFlow::Break(()),
        _ => ControlFlow::Continue(()),
    })
    .is_continue()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thickness::critical_pairs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_polyline(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
        let mut v = vec![Vec3::ZERO];
        for _ in 0..n {
            let d = loop {
                let c = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if let Some(u) = c.normalized() {
                    break u;
                }
            };
            let last = *v.last().unwrap();
            v.push(last + d);
        }
        v
    }

    #[test]
    fn candidates_cover_every_close_pair_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for cutoff in [0.0, 0.2, 1.0, 2.5] {
            let v = random_polyline(60, &mut rng);
            let mut seen = std::collections::HashSet::new();
            let _ = for_each_candidate(&v, cutoff, |h, j| {
                assert!(seen.insert((h, j)), "pair visited twice");
                ControlFlow::Continue(())
            });
            for p in critical_pairs(&v) {
                if p.distance <= cutoff {
                    assert!(seen.contains(&(p.first.segment, p.second.segment)));
                }
            }
        }
    }

    #[test]
    fn exceeds_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v = random_polyline(40, &mut rng);
            let naive = critical_pairs(&v)
                .iter()
                .map(|p| p.distance)
                .fold(f64::INFINITY, f64::min);
            for cutoff in [0.0, 0.1, 0.4, 1.0] {
                assert_eq!(dcsd_exceeds(&v, cutoff), naive > cutoff);
            }
        }
    }
}
