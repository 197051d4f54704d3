use serde::{Deserialize, Serialize};

use super::{BoxTree, Cell, Domain};

/// How non-periodic domain faces count when measuring depth inside a cell union.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Faces bound the union like unsafe neighbours.
    #[default]
    Unsafe,
    /// Faces are ignored; only complement cells limit the depth.
    Neutral,
}

/// Signed ∞-norm distance from `x` to `∪cells`, negative inside.
///
/// `complement` must hold the remaining cells of a tiling of `domain`; the depth of an
/// interior point is its distance to the nearest complement cell (or domain face under
/// [`BoundaryPolicy::Unsafe`]). Returns `+∞` when `cells` is empty.
pub fn signed_distance_to_union(x: &[f64], cells: &[Cell], complement: &[Cell], domain: &Domain) -> f64 {
    signed_distance_to_union_with(x, cells, complement, domain, BoundaryPolicy::default())
}

pub fn signed_distance_to_union_with(
    x: &[f64],
    cells: &[Cell],
    complement: &[Cell],
    domain: &Domain,
    policy: BoundaryPolicy,
) -> f64 {
    let nearest = |set: &[Cell]| {
        set.iter()
            .filter_map(|c| c.clipped(domain))
            .map(|b| b.distance(x, domain))
            .fold(f64::INFINITY, f64::min)
    };
    let outside = nearest(cells);
    if outside > 0.0 {
        return outside;
    }
    let mut depth = nearest(complement);
    if policy == BoundaryPolicy::Unsafe {
        depth = depth.min(domain.face_distance(x));
    }
    if depth == 0.0 {
        0.0
    } else {
        -depth
    }
}

/// Indexed signed distance to a fixed cell union. Read-only and shareable across threads.
#[derive(Clone, Debug)]
pub struct UnionDistance {
    domain: Domain,
    members: BoxTree,
    complement: BoxTree,
    policy: BoundaryPolicy,
}

impl UnionDistance {
    pub fn new(domain: &Domain, members: &[Cell], complement: &[Cell], policy: BoundaryPolicy) -> Self {
        UnionDistance {
            domain: domain.clone(),
            members: tree_of(domain, members),
            complement: tree_of(domain, complement),
            policy,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let outside = self.members.distance(x);
        if outside > 0.0 {
            return outside;
        }
        let mut depth = if self.policy == BoundaryPolicy::Unsafe {
            self.domain.face_distance(x)
        } else {
            f64::INFINITY
        };
        depth = self.complement.distance_below(x, depth);
        if depth == 0.0 {
            0.0
        } else {
            -depth
        }
    }
}

fn tree_of(domain: &Domain, cells: &[Cell]) -> BoxTree {
    let mut boxes = Vec::with_capacity(cells.len());
    let mut keys = Vec::with_capacity(cells.len());
    for c in cells {
        if let Some(b) = c.clipped(domain) {
            boxes.push(b);
            keys.push(c.id);
        }
    }
    BoxTree::new(domain, boxes, keys)
}
