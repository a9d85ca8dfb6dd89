//! Exact k-nearest-neighbour search over 3D points.
//!
//! A plain kd-tree with median splits. Results are ordered by squared
//! Euclidean distance, ties broken by lower point index, so queries are
//! deterministic regardless of build order. On the unit sphere Euclidean
//! order equals angular order.

use crate::geom::{dist2, Vec3};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len() as u32).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the axis of largest extent
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            let p = self.points[i as usize];
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a as usize][axis].total_cmp(&points[b as usize][axis])
        });
        let value = self.points[self.order[mid] as usize][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest points to `query`, closest first.
    pub fn knn(&self, query: Vec3, k: usize) -> Vec<Neighbor> {
        let mut best = Vec::with_capacity(k + 1);
        if k > 0 && !self.points.is_empty() {
            self.search(0, query, k, &mut best);
        }
        best
    }

    pub fn nearest(&self, query: Vec3) -> Option<Neighbor> {
        self.knn(query, 1).into_iter().next()
    }

    fn search(&self, node: usize, q: Vec3, k: usize, best: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        index: i as usize,
                        dist2: dist2(q, self.points[i as usize]),
                    };
                    insert_sorted(best, cand, k);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, k, best);
                // `<=` keeps equal-distance candidates reachable for the
                // index tie-break.
                if best.len() < k || diff * diff <= best[best.len() - 1].dist2 {
                    self.search(far, q, k, best);
                }
            }
        }
    }
}

fn precedes(a: &Neighbor, b: &Neighbor) -> bool {
    a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index)
}

fn insert_sorted(best: &mut Vec<Neighbor>, cand: Neighbor, k: usize) {
    if best.len() == k && !precedes(&cand, &best[k - 1]) {
        return;
    }
    let pos = best
        .iter()
        .position(|b| precedes(&cand, b))
        .unwrap_or(best.len());
    best.insert(pos, cand);
    best.truncate(k);
}

/// Brute-force reference with the same ordering contract.
pub fn knn_brute_force(points: &[Vec3], query: Vec3, k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .iter()
        .enumerate()
        .map(|(index, &p)| Neighbor {
            index,
            dist2: dist2(query, p),
        })
        .collect();
    all.sort_by(|a, b| a.dist2.total_cmp(&b.dist2).then(a.index.cmp(&b.index)));
    all.truncate(k);
    all
}
