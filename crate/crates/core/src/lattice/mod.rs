//! Positions, windows, bit-packed patches and completion from free coordinates.

mod free;
mod geometry;
mod patch;
mod position;

pub use free::{cell_functional, complete_from_free, FreeCoordinateSet, Functionals};
pub use geometry::{Geometry, RowSpan, Triangle};
pub use patch::Patch;
pub use position::{Move, Position};

/// Validated constructor: `bits` lists one value per cell in row-major order.
pub fn patch_from_bits(geometry: Geometry, bits: impl IntoIterator<Item = bool>) -> crate::Result<Patch> {
    Patch::from_cells(geometry, bits)
}

/// `T^a S^b` applied to the window.
pub fn shift_view(patch: &Patch, a: i64, b: i64) -> Patch {
    patch.shift_view(a, b)
}
