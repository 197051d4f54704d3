//! Safe-set verification with recurrent control barrier functions.
//!
//! The unsafe region of a control system is over-approximated on an adaptive partition
//! of ∞-norm cells. Each cell is decided from sampled trajectories at its center, with
//! margins that make the decision hold for the whole cell.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod conditions;
pub mod dynamics;
pub mod geometry;
pub mod oracle;
mod runtime;
pub mod verifier;
