//! Static kd-tree for fixed-radius queries.

use super::Point;

/// Balanced kd-tree over a point set, split at the median along the axis of
/// largest spread. Built once; queries are read-only.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Vec<Point>,
    /// Point ids in tree order: the node of a range sits at its middle.
    order: Vec<usize>,
    /// Split axis of the node stored at each position of `order`.
    axis: Vec<u8>,
}

impl NeighborIndex {
    pub fn build(points: &[Point]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axis = vec![0u8; points.len()];
        build_range(points, &mut order, &mut axis);
        Self {
            points: points.to_vec(),
            order,
            axis,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> &Point {
        &self.points[id]
    }

    /// Ids of all points strictly closer than `radius` to `x`, ascending.
    pub fn radius_query(&self, x: &Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_query_into(x, radius, &mut out);
        out
    }

    /// Like `radius_query`, reusing `out`.
    pub fn radius_query_into(&self, x: &Point, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        if radius > 0.0 {
            self.visit(0, self.order.len(), x, radius * radius, out);
            out.sort_unstable();
        }
    }

    fn visit(&self, lo: usize, hi: usize, x: &Point, r2: f64, out: &mut Vec<usize>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let id = self.order[mid];
        let p = &self.points[id];
        if (p - x).norm_squared() < r2 {
            out.push(id);
        }
        let k = self.axis[mid] as usize;
        let diff = x[k] - p[k];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.visit(near.0, near.1, x, r2, out);
        // points across the plane are at least |diff| away
        if diff * diff < r2 {
            self.visit(far.0, far.1, x, r2, out);
        }
    }
}

fn build_range(points: &[Point], order: &mut [usize], axis: &mut [u8]) {
    if order.len() <= 1 {
        if let Some(a) = axis.first_mut() {
            *a = 0;
        }
        return;
    }
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for &i in order.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
    }
    let k = (hi - lo).imax();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| points[a][k].total_cmp(&points[b][k]));
    axis[mid] = k as u8;
    let (left, rest) = order.split_at_mut(mid);
    let (axis_left, axis_rest) = axis.split_at_mut(mid);
    build_range(points, left, axis_left);
    build_range(points, &mut rest[1..], &mut axis_rest[1..]);
}

/// Exhaustive scan with the same strict-radius semantics, ascending ids.
pub fn brute_force_query(points: &[Point], x: &Point, radius: f64) -> Vec<usize> {
    let r2 = radius * radius;
    (0..points.len()).filter(|&i| (points[i] - x).norm_squared() < r2).collect()
}
