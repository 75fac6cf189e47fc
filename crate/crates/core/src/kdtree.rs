//! Static 2-d tree over a point slice.
//!
//! Built once; queries return indices into the original slice. Distance
//! ties are resolved toward the lower index so results match a stable
//! brute-force sort.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

impl Axis {
    fn coord(self, p: Point2) -> f64 {
        match self {
            Axis::X => p.x,
            Axis::Y => p.y,
        }
    }
}

/// Candidate ordered by `(distance², index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point2>,
    /// Implicit balanced tree: the node of `order[lo..hi]` sits at `(lo + hi) / 2`.
    order: Vec<usize>,
    axes: Vec<Axis>,
}

impl KdTree {
    pub fn new(points: &[Point2]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            axes: vec![Axis::X; points.len()],
        };
        tree.build(0, points.len());
        tree
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi <= lo {
            return;
        }
        let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &i in &self.order[lo..hi] {
            let p = self.points[i];
            min_x = min_x.min(p.x);
            max_x = max_x.max(p.x);
            min_y = min_y.min(p.y);
            max_y = max_y.max(p.y);
        }
        let axis = if max_x - min_x >= max_y - min_y {
            Axis::X
        } else {
            Axis::Y
        };
        let mid = (lo + hi) / 2;
        let points = &self.points;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            axis.coord(points[a]).total_cmp(&axis.coord(points[b])).then(a.cmp(&b))
        });
        self.axes[mid] = axis;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Up to `k` nearest indices with their squared distances, ascending.
    pub fn k_nearest(&self, query: Point2, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_recurse(0, self.points.len(), query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2)).collect()
    }

    fn knn_recurse(&self, lo: usize, hi: usize, query: Point2, k: usize, heap: &mut BinaryHeap<Candidate>) {
        if hi <= lo {
            return;
        }
        let mid = (lo + hi) / 2;
        let index = self.order[mid];
        let p = self.points[index];
        let cand = Candidate {
            dist2: p.distance_squared(query),
            index,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().expect("heap holds k items") {
            heap.pop();
            heap.push(cand);
        }

        let axis = self.axes[mid];
        let delta = axis.coord(query) - axis.coord(p);
        let (near, far) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_recurse(near.0, near.1, query, k, heap);
        // `<=` keeps equidistant lower-index points reachable across the plane.
        if heap.len() < k || delta * delta <= heap.peek().map_or(f64::INFINITY, |c| c.dist2) {
            self.knn_recurse(far.0, far.1, query, k, heap);
        }
    }

    pub fn nearest(&self, query: Point2) -> Option<(usize, f64)> {
        self.k_nearest(query, 1).into_iter().next()
    }

    /// Indices with `inner < ‖p - query‖ < outer`, ascending by index.
    pub fn annulus(&self, query: Point2, inner: f64, outer: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.points.is_empty() || !(outer > 0.0) {
            return out;
        }
        let (in2, out2) = (inner * inner, outer * outer);
        self.annulus_recurse(0, self.points.len(), query, in2, out2, outer, &mut out);
        out.sort_unstable();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn annulus_recurse(
        &self,
        lo: usize,
        hi: usize,
        query: Point2,
        in2: f64,
        out2: f64,
        outer: f64,
        out: &mut Vec<usize>,
    ) {
        if hi <= lo {
            return;
        }
        let mid = (lo + hi) / 2;
        let index = self.order[mid];
        let p = self.points[index];
        let d2 = p.distance_squared(query);
        if d2 > in2 && d2 < out2 {
            out.push(index);
        }
        let axis = self.axes[mid];
        let delta = axis.coord(query) - axis.coord(p);
        if delta < outer {
            self.annulus_recurse(lo, mid, query, in2, out2, outer, out);
        }
        if -delta < outer {
            self.annulus_recurse(mid + 1, hi, query, in2, out2, outer, out);
        }
    }
}
