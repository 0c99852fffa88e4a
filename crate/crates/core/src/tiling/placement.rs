use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::shape::{Aperture, Orientation, PolyominoShape};
use crate::error::{Error, Result};

/// A shape positioned and oriented inside the aperture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    /// Row of the incidence matrix, 0-based.
    pub id: usize,
    pub shape: usize,
    pub orientation: Orientation,
    /// Pixel under the variant's `(0, 0)` corner of its bounding box.
    pub anchor: usize,
    /// Covered pixels, ascending.
    pub pixels: Vec<usize>,
}

/// Every distinct in-aperture placement of every shape.
///
/// Output order is shape (input order), then orientation tag, then anchor
/// pixel. Shapes that fit in no orientation contribute nothing.
pub fn generate_placements(
    aperture: &Aperture,
    shapes: &[PolyominoShape],
    allow_rotations: bool,
    allow_flips: bool,
) -> Result<Vec<Placement>> {
    let allowed = vec![Orientation::allowed(allow_rotations, allow_flips); shapes.len()];
    generate_placements_with(aperture, shapes, &allowed)
}

/// Like [`generate_placements`], with an explicit orientation list per shape.
pub fn generate_placements_with(
    aperture: &Aperture,
    shapes: &[PolyominoShape],
    orientations: &[Vec<Orientation>],
) -> Result<Vec<Placement>> {
    if shapes.is_empty() {
        return Err(Error::Empty("shape alphabet"));
    }
    if orientations.len() != shapes.len() {
        return Err(Error::Dimension(format!(
            "{} orientation lists for {} shapes",
            orientations.len(),
            shapes.len()
        )));
    }
    let mut ids = HashSet::new();
    for s in shapes {
        if !ids.insert(s.id) {
            return Err(Error::DuplicateShape(s.id));
        }
    }

    let (cols, rows) = (aperture.columns() as i32, aperture.rows() as i32);
    let mut out = Vec::new();
    for (shape, allowed) in shapes.iter().zip(orientations) {
        for (orientation, cells) in shape.variants_among(allowed) {
            let h = cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
            let w = cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
            for n0 in 0..=(rows - h) {
                for m0 in 0..=(cols - w) {
                    let mut pixels: Vec<usize> = cells
                        .iter()
                        .map(|&(r, c)| aperture.pixel((m0 + c) as usize, (n0 + r) as usize))
                        .collect();
                    pixels.sort_unstable();
                    out.push(Placement {
                        id: out.len(),
                        shape: shape.id,
                        orientation,
                        anchor: aperture.pixel(m0 as usize, n0 as usize),
                        pixels,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Sparse binary matrix with one row per placement and one column per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    columns: usize,
    rows: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn from_placements(placements: &[Placement], aperture: &Aperture) -> Result<Self> {
        if placements.is_empty() {
            return Err(Error::Empty("placement list"));
        }
        let pixels = aperture.pixel_count();
        let rows = placements
            .iter()
            .enumerate()
            .map(|(k, p)| {
                if let Some(&bad) = p.pixels.iter().find(|&&i| i >= pixels) {
                    return Err(Error::PixelOutOfRange {
                        placement: k,
                        pixel: bad,
                        pixels,
                    });
                }
                let mut row = p.pixels.clone();
                row.sort_unstable();
                row.dedup();
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            columns: pixels,
            rows,
        })
    }

    /// Build directly from sparse rows (used by tests and custom solvers).
    pub fn from_rows(columns: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(rows.len());
        for (k, mut row) in rows.into_iter().enumerate() {
            if let Some(&bad) = row.iter().find(|&&i| i >= columns) {
                return Err(Error::PixelOutOfRange {
                    placement: k,
                    pixel: bad,
                    pixels: columns,
                });
            }
            row.sort_unstable();
            row.dedup();
            clean.push(row);
        }
        Ok(Self { columns, rows: clean })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns
    }

    pub fn row(&self, k: usize) -> &[usize] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn get(&self, k: usize, i: usize) -> bool {
        self.rows[k].binary_search(&i).is_ok()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.columns];
                for &i in row {
                    dense[i] = 1;
                }
                dense
            })
            .collect()
    }
}

pub fn build_incidence_matrix(placements: &[Placement], aperture: &Aperture) -> Result<IncidenceMatrix> {
    IncidenceMatrix::from_placements(placements, aperture)
}
