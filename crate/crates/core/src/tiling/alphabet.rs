use serde::{Deserialize, Serialize};

use super::placement::{generate_placements_with, IncidenceMatrix, Placement};
use super::shape::{Aperture, Orientation, PolyominoShape};
use crate::error::{Error, Result};

/// A set of tile shapes together with the motions each may use.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    entries: Vec<AlphabetEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphabetEntry {
    pub shape: PolyominoShape,
    /// Orientations the shape may take, in tag order.
    pub orientations: Vec<Orientation>,
}

impl AlphabetEntry {
    pub fn new(shape: PolyominoShape, rotations: bool, flips: bool) -> Self {
        Self {
            shape,
            orientations: Orientation::allowed(rotations, flips),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AlphabetFile {
    shape: Vec<ShapeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShapeRecord {
    name: String,
    cells: Vec<[i32; 2]>,
    #[serde(default = "yes")]
    rotations: bool,
    #[serde(default = "yes")]
    flips: bool,
    /// Explicit orientation tags (`quarter_turns + 4 * flipped`); overrides
    /// the two flags when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientations: Option<Vec<usize>>,
}

fn yes() -> bool {
    true
}

impl Alphabet {
    pub fn new(entries: Vec<AlphabetEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("shape alphabet"));
        }
        Ok(Self { entries })
    }

    /// All shapes with rotations and flips enabled; ids are positions.
    pub fn free(shapes: impl IntoIterator<Item = PolyominoShape>) -> Self {
        let entries = shapes
            .into_iter()
            .enumerate()
            .map(|(id, mut shape)| {
                shape.id = id;
                AlphabetEntry::new(shape, true, true)
            })
            .collect();
        Self { entries }
    }

    pub fn p_hexomino() -> Self {
        Self::free([PolyominoShape::p_hexomino(0)])
    }

    pub fn l_hexomino() -> Self {
        Self::free([PolyominoShape::l_hexomino(0)])
    }

    /// P and L hexominoes together, each restricted to the four variants
    /// whose long side stays vertical.
    pub fn p_and_l_hexominoes() -> Self {
        let vertical = Orientation::axis_preserving();
        Self {
            entries: vec![
                AlphabetEntry {
                    shape: PolyominoShape::p_hexomino(0),
                    orientations: vertical.clone(),
                },
                AlphabetEntry {
                    shape: PolyominoShape::l_hexomino(1),
                    orientations: vertical,
                },
            ],
        }
    }

    /// Vertical six-element bars only; tiles an `M x 6k` aperture one way.
    pub fn baseline() -> Self {
        Self {
            entries: vec![AlphabetEntry {
                shape: PolyominoShape::i_hexomino(0),
                orientations: vec![Orientation::IDENTITY],
            }],
        }
    }

    pub fn entries(&self) -> &[AlphabetEntry] {
        &self.entries
    }

    pub fn shapes(&self) -> Vec<PolyominoShape> {
        self.entries.iter().map(|e| e.shape.clone()).collect()
    }

    /// Common tile size, if every shape has the same cell count.
    pub fn uniform_size(&self) -> Option<usize> {
        let first = self.entries[0].shape.size();
        self.entries
            .iter()
            .all(|e| e.shape.size() == first)
            .then_some(first)
    }

    pub fn placements(&self, aperture: &Aperture) -> Result<Vec<Placement>> {
        let shapes = self.shapes();
        let orientations: Vec<_> = self.entries.iter().map(|e| e.orientations.clone()).collect();
        generate_placements_with(aperture, &shapes, &orientations)
    }

    pub fn incidence_matrix(&self, aperture: &Aperture) -> Result<IncidenceMatrix> {
        IncidenceMatrix::from_placements(&self.placements(aperture)?, aperture)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: AlphabetFile =
            toml::from_str(text).map_err(|e| Error::format("shape alphabet", e.to_string()))?;
        let entries = file
            .shape
            .into_iter()
            .enumerate()
            .map(|(id, rec)| {
                let cells: Vec<_> = rec.cells.iter().map(|c| (c[0], c[1])).collect();
                let orientations = match rec.orientations {
                    Some(tags) => tags
                        .into_iter()
                        .map(|t| {
                            Orientation::from_tag(t).ok_or_else(|| {
                                Error::format("shape alphabet", format!("orientation tag {t} not in 0..8"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                    None => Orientation::allowed(rec.rotations, rec.flips),
                };
                Ok(AlphabetEntry {
                    shape: PolyominoShape::new(id, rec.name, &cells)?,
                    orientations,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn to_toml_string(&self) -> String {
        let file = AlphabetFile {
            shape: self
                .entries
                .iter()
                .map(|e| ShapeRecord {
                    name: e.shape.name.clone(),
                    cells: e.shape.cells().iter().map(|&(r, c)| [r, c]).collect(),
                    rotations: true,
                    flips: true,
                    orientations: Some(e.orientations.iter().map(Orientation::tag).collect()),
                })
                .collect(),
        };
        toml::to_string(&file).expect("alphabet serializes")
    }
}
