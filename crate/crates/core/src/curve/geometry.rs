//! Closed-polygon primitives on complex node lists.

use num_complex::Complex64;
use std::f64::consts::TAU;

type C = Complex64;

fn cross(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper or touching intersection of the closed segments `[a, b]` and `[c, d]`.
pub fn segments_intersect(a: C, b: C, c: C, d: C) -> bool {
    let d1 = cross(d - c, a - c);
    let d2 = cross(d - c, b - c);
    let d3 = cross(b - a, c - a);
    let d4 = cross(b - a, d - a);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: C, q: C, r: C| {
        r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

/// First pair of non-adjacent edges that intersect, if any.
pub fn first_self_intersection(pts: &[C]) -> Option<(usize, usize)> {
    let n = pts.len();
    if n < 4 {
        return None;
    }
    let (mut lo, mut hi) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        lo.push(C::new(a.re.min(b.re), a.im.min(b.im)));
        hi.push(C::new(a.re.max(b.re), a.im.max(b.im)));
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if lo[i].re > hi[j].re || lo[j].re > hi[i].re || lo[i].im > hi[j].im || lo[j].im > hi[i].im {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Winding number of the closed polygon about `z`, as a real number
/// (an integer up to rounding unless `z` lies on the polygon).
pub fn winding_number(pts: &[C], z: C) -> f64 {
    let n = pts.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = pts[i] - z;
        let b = pts[(i + 1) % n] - z;
        total += (b / a).arg();
    }
    total / TAU
}

pub fn distance_to_segment(a: C, b: C, z: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (a + ab * t - z).norm()
}

pub fn distance_to_polygon(pts: &[C], z: C) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| distance_to_segment(pts[i], pts[(i + 1) % n], z))
        .fold(f64::INFINITY, f64::min)
}

/// Shoelace area; positive for counterclockwise polygons.
pub fn signed_area(pts: &[C]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum::<f64>()
}
