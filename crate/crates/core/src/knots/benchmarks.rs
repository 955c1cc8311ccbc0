//! Reference curves with known knot types.

use std::f64::consts::TAU;

use crate::geom::Vec3;

use super::ClosedPolygon;

/// Torus-knot trefoil `((2 + cos 3t) cos 2t, (2 + cos 3t) sin 2t, sin 3t)`.
pub fn trefoil_point(t: f64) -> Vec3 {
    let r = 2.0 + (3.0 * t).cos();
    Vec3::new(r * (2.0 * t).cos(), r * (2.0 * t).sin(), (3.0 * t).sin())
}

/// Figure-eight `((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t, sin 4t)`.
pub fn figure_eight_point(t: f64) -> Vec3 {
    let r = 2.0 + (2.0 * t).cos();
    Vec3::new(r * (3.0 * t).cos(), r * (3.0 * t).sin(), (4.0 * t).sin())
}

fn sample(points: usize, f: impl Fn(f64) -> Vec3) -> Vec<Vec3> {
    (0..points).map(|k| f(TAU * k as f64 / points as f64)).collect()
}

/// Open arc of `f` over `[gap/2, 2π - gap/2]`.
fn sample_arc(points: usize, gap: f64, f: impl Fn(f64) -> Vec3) -> Vec<Vec3> {
    let span = TAU - gap;
    (0..points)
        .map(|k| f(gap / 2.0 + span * k as f64 / (points - 1) as f64))
        .collect()
}

pub fn trefoil_polygon(points: usize) -> ClosedPolygon {
    ClosedPolygon::new(sample(points, trefoil_point)).expect("trefoil samples are distinct")
}

/// Trefoil opened at its outermost point `(3, 0, 0)`.
pub fn trefoil_arc(points: usize, gap: f64) -> Vec<Vec3> {
    sample_arc(points, gap, trefoil_point)
}

pub fn figure_eight_polygon(points: usize) -> ClosedPolygon {
    ClosedPolygon::new(sample(points, figure_eight_point)).expect("figure-eight samples are distinct")
}

pub fn figure_eight_arc(points: usize, gap: f64) -> Vec<Vec3> {
    sample_arc(points, gap, figure_eight_point)
}

/// A non-planar round unknot.
pub fn unknot_polygon(points: usize) -> ClosedPolygon {
    ClosedPolygon::new(sample(points, |t| {
        Vec3::new(t.cos(), t.sin(), 0.3 * (3.0 * t).sin())
    }))
    .expect("unknot samples are distinct")
}

/// Connected sum of two trefoils: two opened copies side by side, separated
/// by the plane `x = 3.5` and joined by two short bridges across it.
pub fn granny_polygon(points_each: usize) -> ClosedPolygon {
    let left = trefoil_arc(points_each, 0.3);
    let right: Vec<Vec3> = left.iter().map(|p| Vec3::new(7.0 - p.x, -p.y, p.z)).collect();
    let mut v = left;
    v.extend(right);
    ClosedPolygon::new(v).expect("summands are disjoint")
}

/// Open trefoil whose end is extended by a tail running half way round the
/// outside (radius 4, plane `z = 0`) to the opposite rim. The straight chord
/// between the ends then cuts through the knotted region.
pub fn trefoil_with_tail(points: usize, tail_points: usize) -> Vec<Vec3> {
    let mut arc = trefoil_arc(points, 0.2);
    let end = *arc.last().expect("non-empty arc");
    let a0 = end.y.atan2(end.x);
    let a1 = std::f64::consts::PI - TAU;
    for k in 1..=tail_points {
        let s = k as f64 / tail_points as f64;
        let a = a0 + (a1 - a0) * s;
        arc.push(Vec3::new(4.0 * a.cos(), 4.0 * a.sin(), end.z * (1.0 - s)));
    }
    arc
}
