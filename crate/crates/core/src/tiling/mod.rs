//! Polyomino tilings of the array aperture.

mod alphabet;
mod cover;
mod dlx;
mod placement;
mod shape;

pub use alphabet::{Alphabet, AlphabetEntry};
pub use cover::{baseline_tiling, vertical_bar_tiling, AggregationVector};
pub use dlx::{count_exact_covers, enumerate_exact_covers, ExactCovers};
pub use placement::{
    build_incidence_matrix, generate_placements, generate_placements_with, IncidenceMatrix, Placement,
};
pub use shape::{Aperture, Orientation, PolyominoShape};
