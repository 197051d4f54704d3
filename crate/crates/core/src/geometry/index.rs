//! Bounding-volume hierarchy over axis-aligned boxes.
//!
//! Queries are exact: the tree only prunes subtrees whose ∞-norm lower bound already
//! exceeds the best distance found, so results equal a linear scan.

use super::cell::axis_gap;
use super::{Aabb, Domain};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Leaf: range into `order`. Inner: children indices.
    kind: NodeKind,
}

#[derive(Clone, Copy, Debug)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

/// Immutable box set with nearest-distance and point-location queries.
#[derive(Clone, Debug)]
pub struct BoxTree {
    domain: Domain,
    boxes: Vec<Aabb>,
    keys: Vec<u64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl BoxTree {
    /// `keys[i]` tags `boxes[i]`; [`BoxTree::locate`] returns the smallest matching key.
    pub fn new(domain: &Domain, boxes: Vec<Aabb>, keys: Vec<u64>) -> Self {
        assert_eq!(boxes.len(), keys.len());
        let mut tree = BoxTree {
            domain: domain.clone(),
            order: (0..boxes.len()).collect(),
            boxes,
            keys,
            nodes: Vec::new(),
        };
        if !tree.boxes.is_empty() {
            let n = tree.boxes.len();
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let dim = self.domain.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        let mut clo = vec![f64::INFINITY; dim];
        let mut chi = vec![f64::NEG_INFINITY; dim];
        for &b in &self.order[start..end] {
            let bx = &self.boxes[b];
            for i in 0..dim {
                lo[i] = lo[i].min(bx.lo[i]);
                hi[i] = hi[i].max(bx.hi[i]);
                let c = 0.5 * (bx.lo[i] + bx.hi[i]);
                clo[i] = clo[i].min(c);
                chi[i] = chi[i].max(c);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, kind: NodeKind::Leaf { start, end } });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (chi[a] - clo[a]).total_cmp(&(chi[b] - clo[b])))
            .unwrap_or(0);
        if chi[axis] - clo[axis] <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        let boxes = &self.boxes;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let ca = boxes[a].lo[axis] + boxes[a].hi[axis];
            let cb = boxes[b].lo[axis] + boxes[b].hi[axis];
            ca.total_cmp(&cb)
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].kind = NodeKind::Inner { left, right };
        id
    }

    #[inline]
    fn node_gap(&self, node: &Node, x: &[f64]) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..x.len() {
            d = d.max(axis_gap(x[i], node.lo[i], node.hi[i], &self.domain, i));
        }
        d
    }

    /// ∞-norm distance from `x` to the union of the boxes; `+∞` for an empty tree.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.distance_below(x, f64::INFINITY)
    }

    /// `min(distance(x), cutoff)`, pruning everything farther than `cutoff`.
    pub fn distance_below(&self, x: &[f64], cutoff: f64) -> f64 {
        if self.nodes.is_empty() {
            return cutoff;
        }
        let mut best = cutoff;
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        stack.push((0, self.node_gap(&self.nodes[0], x)));
        while let Some((id, bound)) = stack.pop() {
            if bound >= best {
                continue;
            }
            let node = &self.nodes[id];
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &b in &self.order[start..end] {
                        let d = self.boxes[b].distance(x, &self.domain);
                        if d < best {
                            best = d;
                            if best == 0.0 {
                                return 0.0;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.node_gap(&self.nodes[left], x);
                    let dr = self.node_gap(&self.nodes[right], x);
                    // nearer child on top of the stack
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best
    }

    /// Smallest key among boxes that contain `x` (closed boxes, periodic-aware).
    pub fn locate(&self, x: &[f64]) -> Option<u64> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut found: Option<u64> = None;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if self.node_gap(node, x) > 0.0 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &b in &self.order[start..end] {
                        if self.boxes[b].distance(x, &self.domain) == 0.0 {
                            let k = self.keys[b];
                            found = Some(found.map_or(k, |f| f.min(k)));
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        found
    }
}
