//! Tube accommodation: the short-range bend-angle constraint and the
//! long-range doubly-critical self distance (dcsd).
//!
//! Segments are indexed from zero: segment `k` joins `v_k` and `v_{k+1}`.
//! A pair of points `(x, y)` on non-adjacent segments is doubly critical when
//! `x` locally minimizes the distance to `y` along the chain and vice versa.
//! Because the distance between two points moving on two segments is convex
//! in the segment parameters, such a pair is always the closest pair of its
//! two segments, so the search reduces to one closest-pair computation per
//! segment pair followed by one-sided checks at vertices.

mod grid;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{bend_angle_at, Vec3, Walk};

pub use grid::dcsd_exceeds;

/// Parameters closer than this to a segment end are treated as lying on the vertex.
const VERTEX_SNAP: f64 = 1e-9;

/// Relative slack in the one-sided derivative checks at vertices.
const SLOPE_TOLERANCE: f64 = 1e-12;

/// Tube radius and its minimum admissible bend angle `2 atan(2r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessParams {
    r: f64,
    theta_min: f64,
}

impl ThicknessParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Precondition(format!(
                "tube radius must be finite and nonnegative, got {r}"
            )));
        }
        Ok(ThicknessParams {
            r,
            theta_min: 2.0 * (2.0 * r).atan(),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    /// Distance every doubly-critical pair must exceed.
    pub fn cutoff(&self) -> f64 {
        2.0 * self.r
    }
}

/// A point on the chain: segment index and parameter in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainPoint {
    pub segment: usize,
    pub t: f64,
}

impl ChainPoint {
    pub fn position(&self, vertices: &[Vec3]) -> Vec3 {
        let a = vertices[self.segment];
        let b = vertices[self.segment + 1];
        a + (b - a) * self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPair {
    pub distance: f64,
    pub first: ChainPoint,
    pub second: ChainPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcsdResult {
    /// `f64::INFINITY` when no doubly-critical pair exists (or none within the cutoff).
    pub distance: f64,
    pub witness: Option<(ChainPoint, ChainPoint)>,
}

impl DcsdResult {
    pub const NONE: DcsdResult = DcsdResult {
        distance: f64::INFINITY,
        witness: None,
    };

    fn from_pair(p: Option<CriticalPair>) -> Self {
        match p {
            Some(p) => DcsdResult {
                distance: p.distance,
                witness: Some((p.first, p.second)),
            },
            None => DcsdResult::NONE,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.distance.is_finite()
    }
}

/// Smallest interior bend angle of the walk.
pub fn min_bend_angle(walk: &Walk) -> f64 {
    min_bend_angle_of(walk.vertices())
}

pub(crate) fn min_bend_angle_of(v: &[Vec3]) -> f64 {
    (1..v.len() - 1)
        .map(|i| bend_angle_at(v, i))
        .fold(std::f64::consts::PI, f64::min)
}

/// Parameters `(s, t)` of a closest pair between segments `p1q1` and `p2q2`.
///
/// Parallel segments with overlapping projections have a continuum of closest
/// pairs; the midpoint of the overlap is returned.
pub fn closest_segment_params(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> (f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm2();
    let e = d2.norm2();
    let b = d1.dot(d2);
    let c = d1.dot(r);
    let f = d2.dot(r);
    let denom = a * e - b * b;

    if denom <= 1e-14 * a * e {
        let s0 = -c / a;
        let s1 = (q2 - p1).dot(d1) / a;
        let lo = s0.min(s1).max(0.0);
        let hi = s0.max(s1).min(1.0);
        if lo <= hi {
            let s = 0.5 * (lo + hi);
            let t = ((p1 + d1 * s - p2).dot(d2) / e).clamp(0.0, 1.0);
            return (s, t);
        }
        // Disjoint collinear-ish projections: the closest pair involves an endpoint.
        let candidates = [
            (0.0, (f / e).clamp(0.0, 1.0)),
            (1.0, ((b + f) / e).clamp(0.0, 1.0)),
            ((-c / a).clamp(0.0, 1.0), 0.0),
            (((b - c) / a).clamp(0.0, 1.0), 1.0),
        ];
        return candidates
            .into_iter()
            .min_by(|x, y| {
                let dx = (p1 + d1 * x.0 - p2 - d2 * x.1).norm2();
                let dy = (p1 + d1 * y.0 - p2 - d2 * y.1).norm2();
                dx.total_cmp(&dy)
            })
            .unwrap();
    }

    let mut s = ((b * f - c * e) / denom).clamp(0.0, 1.0);
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

/// True when moving from the witness at `(seg, t)` in every admissible chain
/// direction does not decrease the distance to `other` (first order).
fn is_chain_local_min(v: &[Vec3], seg: usize, t: f64, other: Vec3) -> bool {
    let at_start = t <= VERTEX_SNAP;
    let at_end = t >= 1.0 - VERTEX_SNAP;
    if !at_start && !at_end {
        // Interior: the closest-pair condition already makes the derivative vanish.
        return true;
    }
    let (vi, own) = if at_start { (seg, seg + 1) } else { (seg + 1, seg) };
    let x = v[vi];
    let away = x - other;
    let tol = -SLOPE_TOLERANCE * away.norm().max(1.0);
    if (v[own] - x).dot(away) < tol {
        return false;
    }
    let neighbor = if at_start { vi.checked_sub(1) } else { Some(vi + 1) };
    match neighbor {
        Some(nb) if nb < v.len() => (v[nb] - x).dot(away) >= tol,
        _ => true,
    }
}

/// Doubly-critical pair between segments `h` and `j` of a polyline, if any.
///
/// Works on any polyline (edges need not be unit length). Requires `j >= h + 2`.
pub fn critical_pair(v: &[Vec3], h: usize, j: usize) -> Option<CriticalPair> {
    debug_assert!(j >= h + 2 && j + 1 < v.len());
    let (p1, q1, p2, q2) = (v[h], v[h + 1], v[j], v[j + 1]);
    let (s, t) = closest_segment_params(p1, q1, p2, q2);
    let x = p1 + (q1 - p1) * s;
    let y = p2 + (q2 - p2) * t;
    if !is_chain_local_min(v, h, s, y) || !is_chain_local_min(v, j, t, x) {
        return None;
    }
    Some(CriticalPair {
        distance: x.distance(y),
        first: ChainPoint { segment: h, t: s },
        second: ChainPoint { segment: j, t },
    })
}

fn check_pair_indices(n_segments: usize, h: usize, j: usize) -> Result<()> {
    if h >= j || j >= n_segments {
        return Err(Error::Precondition(format!(
            "segment pair ({h}, {j}) out of range for {n_segments} segments"
        )));
    }
    if j < h + 2 {
        return Err(Error::Precondition(format!(
            "segments {h} and {j} share a vertex"
        )));
    }
    Ok(())
}

/// Doubly-critical distance between segments `h < j` of the walk, or `None`
/// when their closest approach is not a doubly-critical pair.
pub fn segment_pair_critical_distance(walk: &Walk, h: usize, j: usize) -> Result<Option<f64>> {
    check_pair_indices(walk.n(), h, j)?;
    Ok(critical_pair(walk.vertices(), h, j).map(|p| p.distance))
}

/// Polyline variant of [`segment_pair_critical_distance`].
pub fn polyline_pair_critical_distance(v: &[Vec3], h: usize, j: usize) -> Result<Option<f64>> {
    check_pair_indices(v.len().saturating_sub(1), h, j)?;
    Ok(critical_pair(v, h, j).map(|p| p.distance))
}

/// All doubly-critical pairs of a polyline, by brute force over segment pairs.
pub fn critical_pairs(v: &[Vec3]) -> Vec<CriticalPair> {
    let m = v.len().saturating_sub(1);
    let mut out = Vec::new();
    for h in 0..m {
        for j in h + 2..m {
            if let Some(p) = critical_pair(v, h, j) {
                out.push(p);
            }
        }
    }
    out
}

/// Naive O(n^2) doubly-critical self distance of a polyline.
pub fn dcsd_polyline(v: &[Vec3]) -> DcsdResult {
    let best = critical_pairs(v)
        .into_iter()
        .min_by(|a, b| a.distance.total_cmp(&b.distance));
    DcsdResult::from_pair(best)
}

/// Naive O(n^2) doubly-critical self distance.
pub fn dcsd(walk: &Walk) -> DcsdResult {
    dcsd_polyline(walk.vertices())
}

/// Grid-pruned dcsd: exact whenever the true dcsd is at most `cutoff`,
/// `INFINITY` otherwise.
pub fn dcsd_accelerated(walk: &Walk, cutoff: f64) -> Result<DcsdResult> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::Precondition(format!(
            "cutoff must be positive and finite, got {cutoff}"
        )));
    }
    Ok(DcsdResult::from_pair(grid::min_critical_within(
        walk.vertices(),
        cutoff,
    )))
}

/// Whether the walk can accommodate a tube of radius `params.r()`:
/// every bend angle is at least `2 atan(2r)` and dcsd exceeds `2r`.
pub fn accommodates_tube(walk: &Walk, params: &ThicknessParams) -> bool {
    accommodates_tube_of(walk.vertices(), params)
}

pub(crate) fn accommodates_tube_of(v: &[Vec3], params: &ThicknessParams) -> bool {
    if params.theta_min > 0.0 && min_bend_angle_of(v) < params.theta_min {
        return false;
    }
    dcsd_exceeds(v, params.cutoff())
}

/// Reference predicate using the naive dcsd; used to cross-check the fast path.
pub fn accommodates_tube_naive(walk: &Walk, params: &ThicknessParams) -> bool {
    min_bend_angle(walk) >= params.theta_min && dcsd(walk).distance > params.cutoff()
}

/// Debug dump of doubly-critical witnesses, one `h t_h j t_j distance` line each.
pub fn format_witnesses(pairs: &[CriticalPair]) -> String {
    let mut s = String::new();
    for p in pairs {
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            p.first.segment, p.first.t, p.second.segment, p.second.t, p.distance
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Walk whose first and last legs are antiparallel, `gap` apart, joined
    /// by a two-edge bridge.
    pub(crate) fn hairpin(leg: usize, gap: f64) -> Walk {
        let mut v = Vec::new();
        for i in 0..=leg {
            v.push(Vec3::new(i as f64, 0.0, 0.0));
        }
        let reach = (1.0 - (gap / 2.0).powi(2)).sqrt();
        v.push(Vec3::new(leg as f64 + reach, gap / 2.0, 0.0));
        for i in (0..=leg).rev() {
            v.push(Vec3::new(i as f64, gap, 0.0));
        }
        Walk::new(v).unwrap()
    }

    #[test]
    fn theta_min_values() {
        let p = ThicknessParams::new(0.5).unwrap();
        assert_abs_diff_eq!(p.theta_min(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(ThicknessParams::new(0.0).unwrap().theta_min(), 0.0);
        assert!(ThicknessParams::new(-0.1).is_err());
        assert!(ThicknessParams::new(f64::NAN).is_err());
        // The campaign's tabulated angles in degrees, rounded.
        let degrees = [0, 23, 44, 62, 77, 90, 100, 109, 116, 122, 127];
        for (k, d) in degrees.iter().enumerate() {
            let t = ThicknessParams::new(k as f64 / 10.0)
                .unwrap()
                .theta_min()
                .to_degrees();
            assert!((t - *d as f64).abs() < 1.0, "r={} -> {t}", k as f64 / 10.0);
        }
    }

    #[test]
    fn min_bend_angle_cases() {
        assert_abs_diff_eq!(min_bend_angle(&Walk::straight(7).unwrap()), PI, epsilon = 1e-15);
        let w = Walk::new(vec![
            Vec3::ZERO,
            Vec3::X,
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
            Vec3::new(2.0, 2.0, 0.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(min_bend_angle(&w), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn right_angle_corner_is_inclusive_boundary() {
        let w = Walk::new(vec![Vec3::ZERO, Vec3::X, Vec3::new(1.0, 1.0, 0.0)]).unwrap();
        let p = ThicknessParams::new(0.5).unwrap();
        assert!(accommodates_tube(&w, &p));
        assert!(accommodates_tube_naive(&w, &p));
    }

    #[test]
    fn closest_params_skew_and_parallel() {
        let (s, t) = closest_segment_params(
            Vec3::ZERO,
            Vec3::X,
            Vec3::new(0.5, -0.5, 0.3),
            Vec3::new(0.5, 0.5, 0.3),
        );
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-15);

        let (s, t) = closest_segment_params(
            Vec3::ZERO,
            Vec3::X,
            Vec3::new(1.0, 0.5, 0.0),
            Vec3::new(0.0, 0.5, 0.0),
        );
        assert!(s > 0.0 && s < 1.0);
        assert_abs_diff_eq!(s + t, 1.0, epsilon = 1e-12);

        // Collinear, disjoint
        let (s, t) = closest_segment_params(
            Vec3::ZERO,
            Vec3::X,
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        );
        assert_eq!((s, t), (1.0, 1.0));
    }

    #[test]
    fn straight_walk_has_no_critical_pairs() {
        let w = Walk::straight(12).unwrap();
        assert!(critical_pairs(w.vertices()).is_empty());
        assert_eq!(dcsd(&w).distance, f64::INFINITY);
        assert_eq!(dcsd_accelerated(&w, 2.0).unwrap().distance, f64::INFINITY);
        for r in [0.0, 0.3, 1.0, 5.0] {
            assert!(accommodates_tube(&w, &ThicknessParams::new(r).unwrap()));
        }
    }

    #[test]
    fn adjacent_pairs_rejected() {
        let w = Walk::straight(5).unwrap();
        assert!(segment_pair_critical_distance(&w, 1, 2).is_err());
        assert!(segment_pair_critical_distance(&w, 2, 1).is_err());
        assert!(segment_pair_critical_distance(&w, 0, 5).is_err());
        assert!(segment_pair_critical_distance(&w, 0, 2).unwrap().is_none());
    }

    #[test]
    fn hairpin_dcsd() {
        let w = hairpin(3, 0.5);
        let d = dcsd(&w);
        assert_abs_diff_eq!(d.distance, 0.5, epsilon = 1e-12);
        let (a, b) = d.witness.unwrap();
        let recon = a.position(w.vertices()).distance(b.position(w.vertices()));
        assert_abs_diff_eq!(recon, d.distance, epsilon = 1e-9);
        assert_abs_diff_eq!(dcsd_accelerated(&w, 0.6).unwrap().distance, 0.5, epsilon = 1e-12);
        assert!(!accommodates_tube(&w, &ThicknessParams::new(0.3).unwrap()));
        assert!(!accommodates_tube_naive(&w, &ThicknessParams::new(0.3).unwrap()));
    }

    #[test]
    fn self_intersection_reports_zero() {
        // Square-ish loop that passes back through an earlier edge.
        let w = Walk::new(vec![
            Vec3::ZERO,
            Vec3::X,
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.5, 1.0 - 0.75f64.sqrt(), 0.0),
            Vec3::new(0.5, 1.0 - 0.75f64.sqrt() - 1.0, 0.0),
        ])
        .unwrap();
        let d = dcsd(&w);
        assert_abs_diff_eq!(d.distance, 0.0, epsilon = 1e-12);
        assert!(!accommodates_tube(&w, &ThicknessParams::new(0.0).unwrap()));
    }

    #[test]
    fn witness_dump_format() {
        let w = hairpin(2, 0.5);
        let dump = format_witnesses(&critical_pairs(w.vertices()));
        let line = dump.lines().next().unwrap();
        assert_eq!(line.split_whitespace().count(), 5);
    }
}
