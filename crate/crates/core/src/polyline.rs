//! Planar polylines in the `(x, r)` half plane and the simplicity test.

use serde::{Deserialize, Serialize};

/// Orientation tests treat cross products below this magnitude as collinear.
pub const ORIENTATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub r: f64,
}

impl Point {
    pub const fn new(x: f64, r: f64) -> Self {
        Self { x, r }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.r - other.r)
    }
}

fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.r - a.r) - (b.r - a.r) * (c.x - a.x)
}

fn orientation(a: Point, b: Point, c: Point) -> i8 {
    let v = cross(a, b, c);
    if v > ORIENTATION_EPS {
        1
    } else if v < -ORIENTATION_EPS {
        -1
    } else {
        0
    }
}

/// `q` lies in the bounding box of segment `ab` (used once collinearity is known).
fn in_box(a: Point, b: Point, q: Point) -> bool {
    q.x <= a.x.max(b.x) + ORIENTATION_EPS
        && q.x >= a.x.min(b.x) - ORIENTATION_EPS
        && q.r <= a.r.max(b.r) + ORIENTATION_EPS
        && q.r >= a.r.min(b.r) - ORIENTATION_EPS
}

/// Closed-segment intersection test with orientation predicates.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && in_box(p1, p2, q1))
        || (o2 == 0 && in_box(p1, p2, q2))
        || (o3 == 0 && in_box(q1, q2, p1))
        || (o4 == 0 && in_box(q1, q2, p2))
}

/// Consecutive segments `a→b`, `b→c` overlap beyond their shared vertex
/// when the path folds straight back on itself.
fn folds_back(a: Point, b: Point, c: Point) -> bool {
    orientation(a, b, c) == 0 && (a.x - b.x) * (c.x - b.x) + (a.r - b.r) * (c.r - b.r) > 0.0
}

/// A polyline is treated as closed when its last point repeats the first.
pub fn is_closed(points: &[Point]) -> bool {
    points.len() >= 4 && points.first() == points.last()
}

/// First pair of segment indices `(i, j)`, `i < j`, that intersect other than
/// at a shared vertex of adjacent segments.
///
/// Candidate pairs are pruned with a sweep over the segments' x-extents; every
/// surviving pair gets the exact orientation test.
pub fn find_self_intersection(points: &[Point]) -> Option<(usize, usize)> {
    if points.len() < 3 {
        return None;
    }
    let m = points.len() - 1;
    let closed = is_closed(points);
    let seg = |i: usize| (points[i], points[i + 1]);

    for i in 0..m.saturating_sub(1) {
        if folds_back(points[i], points[i + 1], points[i + 2]) {
            return Some((i, i + 1));
        }
    }
    if closed && folds_back(points[m - 1], points[0], points[1]) {
        return Some((0, m - 1));
    }

    let adjacent = |i: usize, j: usize| j == i + 1 || (closed && i == 0 && j == m - 1);

    let mut order: Vec<usize> = (0..m).collect();
    let xmin = |i: usize| points[i].x.min(points[i + 1].x);
    let xmax = |i: usize| points[i].x.max(points[i + 1].x);
    order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)).then(a.cmp(&b)));

    let mut found: Option<(usize, usize)> = None;
    for (k, &a) in order.iter().enumerate() {
        let (a1, a2) = seg(a);
        let a_hi = xmax(a) + ORIENTATION_EPS;
        let (a_rlo, a_rhi) = (a1.r.min(a2.r), a1.r.max(a2.r));
        for &b in &order[k + 1..] {
            if xmin(b) > a_hi {
                break;
            }
            let (b1, b2) = seg(b);
            if b1.r.min(b2.r) > a_rhi + ORIENTATION_EPS || b1.r.max(b2.r) < a_rlo - ORIENTATION_EPS
            {
                continue;
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if adjacent(i, j) {
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) && found.is_none_or(|f| (i, j) < f) {
                found = Some((i, j));
            }
        }
    }
    found
}

/// True iff no two non-adjacent segments of the polyline intersect.
pub fn simplicity_check(points: &[Point]) -> bool {
    find_self_intersection(points).is_none()
}
