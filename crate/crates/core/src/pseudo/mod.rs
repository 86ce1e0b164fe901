//! Pseudospectra on grids: resolvent-norm fields, membership, level sets and
//! sublevel node sets.

mod contours;
mod field;
mod grid;
mod pruned;

pub use contours::{contours, validate_levels, ContourSet};
pub(crate) use field::nullable_floats;
pub use field::{field, field_direct, field_with, membership, sublevel_points, PseudospectrumField};
pub use grid::GridSpec;
pub use pruned::sublevel_points_pruned;
