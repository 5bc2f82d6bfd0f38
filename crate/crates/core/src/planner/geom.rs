//! Planar geometry predicates for obstacle polygons.

use crate::se2::Vec2;

/// Even-odd ray cast; boundary points count as inside.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if dist_point_segment(p, a, b) < 1e-9 {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            let x_cross = a.x + t * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn dist_point_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Proper or touching intersection of segments ab and cd.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| -> bool {
        orient(p, q, r).abs() < 1e-9
            && r.x >= p.x.min(q.x) - 1e-9
            && r.x <= p.x.max(q.x) + 1e-9
            && r.y >= p.y.min(q.y) - 1e-9
            && r.y <= p.y.max(q.y) + 1e-9
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

pub fn dist_segment_segment(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    dist_point_segment(a, c, d)
        .min(dist_point_segment(b, c, d))
        .min(dist_point_segment(c, a, b))
        .min(dist_point_segment(d, a, b))
}

/// Distance from a point to a polygon: zero inside, boundary distance outside.
pub fn dist_point_polygon(p: Vec2, poly: &[Vec2]) -> f64 {
    if point_in_polygon(p, poly) {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|i| dist_point_segment(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from a segment to a polygon: zero when the segment touches or
/// enters it (an endpoint inside counts).
pub fn dist_segment_polygon(a: Vec2, b: Vec2, poly: &[Vec2]) -> f64 {
    if point_in_polygon(a, poly) || point_in_polygon(b, poly) {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|i| dist_segment_segment(a, b, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// A polygon is simple when no two non-adjacent edges intersect and adjacent
/// edges meet only at their shared vertex.
pub fn polygon_is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a1, a2) = (poly[i], poly[(i + 1) % n]);
        if (a2 - a1).norm() < 1e-12 {
            return false;
        }
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(0.0, 10.0),
        ]
    }

    #[test]
    fn point_in_polygon_basics() {
        let sq = square();
        assert!(point_in_polygon(Vec2::new(5.0, 5.0), &sq));
        assert!(!point_in_polygon(Vec2::new(15.0, 5.0), &sq));
        assert!(point_in_polygon(Vec2::new(10.0, 5.0), &sq)); // boundary
    }

    #[test]
    fn distances() {
        let sq = square();
        assert!((dist_point_polygon(Vec2::new(15.0, 5.0), &sq) - 5.0).abs() < 1e-12);
        assert_eq!(dist_point_polygon(Vec2::new(5.0, 5.0), &sq), 0.0);
        let d = dist_segment_polygon(Vec2::new(12.0, -5.0), Vec2::new(12.0, 15.0), &sq);
        assert!((d - 2.0).abs() < 1e-12);
        assert_eq!(
            dist_segment_polygon(Vec2::new(-5.0, 5.0), Vec2::new(15.0, 5.0), &sq),
            0.0
        );
    }

    #[test]
    fn simplicity() {
        assert!(polygon_is_simple(&square()));
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(0.0, 10.0),
        ];
        assert!(!polygon_is_simple(&bowtie));
    }
}
