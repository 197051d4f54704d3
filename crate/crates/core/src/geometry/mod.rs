//! Cells, partitions and exact ∞-norm signed distances.

mod cell;
mod distance;
mod domain;
mod index;
mod partition;
mod shapes;

pub use cell::{split_cell, Aabb, Cell, Label};
pub use distance::{signed_distance_to_union, signed_distance_to_union_with, BoundaryPolicy, UnionDistance};
pub use domain::Domain;
pub use index::BoxTree;
pub use partition::{volume, CellLocator, Partition};
pub use shapes::UnsafeSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("domain has no dimensions")]
    EmptyDomain,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid bounds on axis {axis}: [{lower}, {upper}]")]
    InvalidBounds { axis: usize, lower: f64, upper: f64 },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}
