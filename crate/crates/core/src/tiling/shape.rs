//! Aperture grid and polyomino shapes.
//!
//! Cells are `(row, col)` offsets. Rows run along the vertical (z) axis of the
//! array and columns along the horizontal (y) axis, so an aperture of `M`
//! columns and `N` rows has pixel index `i = m + n * M` (0-based).

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular aperture of `columns x rows` pixels, one per array element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Aperture {
    columns: usize,
    rows: usize,
}

impl Aperture {
    pub fn new(columns: usize, rows: usize) -> Result<Self> {
        if columns == 0 || rows == 0 {
            return Err(Error::Aperture(format!("{columns}x{rows} has no pixels")));
        }
        Ok(Self { columns, rows })
    }

    /// Number of columns `M` (horizontal).
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// Number of rows `N` (vertical).
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn pixel_count(&self) -> usize {
        self.columns * self.rows
    }

    /// 0-based pixel index of column `m`, row `n`.
    #[inline]
    pub fn pixel(&self, m: usize, n: usize) -> usize {
        debug_assert!(m < self.columns && n < self.rows);
        m + n * self.columns
    }

    /// Inverse of [`Aperture::pixel`]: `(m, n)`.
    #[inline]
    pub fn coords(&self, pixel: usize) -> (usize, usize) {
        (pixel % self.columns, pixel / self.columns)
    }
}

impl fmt::Display for Aperture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.columns, self.rows)
    }
}

/// One of the eight rigid motions of the square lattice.
///
/// Variants are visited in tag order: the four quarter turns without a flip,
/// then the four with a mirror flip applied first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Orientation {
    pub flipped: bool,
    /// Counter-clockwise quarter turns, `0..4`.
    pub quarter_turns: u8,
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation {
        flipped: false,
        quarter_turns: 0,
    };

    pub fn all() -> impl Iterator<Item = Orientation> {
        [false, true].into_iter().flat_map(|flipped| {
            (0..4).map(move |quarter_turns| Orientation {
                flipped,
                quarter_turns,
            })
        })
    }

    /// Orientations reachable with the given motions, in tag order.
    pub fn allowed(rotations: bool, flips: bool) -> Vec<Orientation> {
        Orientation::all()
            .filter(|o| (rotations || o.quarter_turns == 0) && (flips || !o.flipped))
            .collect()
    }

    /// Identity, half turn and their mirror images: the motions that keep a
    /// shape's long axis where it was.
    pub fn axis_preserving() -> Vec<Orientation> {
        Orientation::all().filter(|o| o.quarter_turns % 2 == 0).collect()
    }

    /// Dense tag in `0..8`.
    pub fn tag(&self) -> usize {
        usize::from(self.flipped) * 4 + usize::from(self.quarter_turns)
    }

    pub fn from_tag(tag: usize) -> Option<Self> {
        (tag < 8).then_some(Orientation {
            flipped: tag >= 4,
            quarter_turns: (tag % 4) as u8,
        })
    }

    fn apply(&self, (r, c): (i32, i32)) -> (i32, i32) {
        let (mut r, mut c) = if self.flipped { (r, -c) } else { (r, c) };
        for _ in 0..self.quarter_turns {
            (r, c) = (-c, r);
        }
        (r, c)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rot{}{}",
            u32::from(self.quarter_turns) * 90,
            if self.flipped { "+flip" } else { "" }
        )
    }
}

/// An edge-connected set of at least two cells, normalized so that the
/// minimum row and minimum column are both zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyominoShape {
    pub id: usize,
    pub name: String,
    cells: Vec<(i32, i32)>,
}

impl PolyominoShape {
    pub fn new(id: usize, name: impl Into<String>, cells: &[(i32, i32)]) -> Result<Self> {
        let name = name.into();
        let bad = |reason: &str| Error::Shape {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if cells.len() < 2 {
            return Err(bad("a polyomino needs at least two cells"));
        }
        let unique: HashSet<_> = cells.iter().copied().collect();
        if unique.len() != cells.len() {
            return Err(bad("duplicate cells"));
        }
        if !is_connected(&unique) {
            return Err(bad("cells are not edge-connected"));
        }
        Ok(Self {
            id,
            cells: normalize(cells),
            name,
        })
    }

    pub fn cells(&self) -> &[(i32, i32)] {
        &self.cells
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    /// Normalized cell set of the shape under `orientation`.
    pub fn oriented(&self, orientation: Orientation) -> Vec<(i32, i32)> {
        let moved: Vec<_> = self.cells.iter().map(|&c| orientation.apply(c)).collect();
        normalize(&moved)
    }

    /// Distinct oriented variants, in tag order. Orientations that reproduce an
    /// earlier variant's cell set are dropped.
    pub fn variants(&self, rotations: bool, flips: bool) -> Vec<(Orientation, Vec<(i32, i32)>)> {
        self.variants_among(&Orientation::allowed(rotations, flips))
    }

    /// Distinct variants among an explicit orientation list, kept in list order.
    pub fn variants_among(&self, orientations: &[Orientation]) -> Vec<(Orientation, Vec<(i32, i32)>)> {
        let mut seen = HashSet::new();
        orientations
            .iter()
            .filter_map(|&o| {
                let cells = self.oriented(o);
                seen.insert(cells.clone()).then_some((o, cells))
            })
            .collect()
    }

    /// Bounding box `(height, width)` of the normalized cells.
    pub fn extent(&self) -> (usize, usize) {
        extent(&self.cells)
    }

    // Built-in shapes.

    pub fn domino(id: usize) -> Self {
        Self::new(id, "domino", &[(0, 0), (0, 1)]).expect("valid shape")
    }

    pub fn i_tromino(id: usize) -> Self {
        Self::new(id, "I-tromino", &[(0, 0), (0, 1), (0, 2)]).expect("valid shape")
    }

    pub fn l_tromino(id: usize) -> Self {
        Self::new(id, "L-tromino", &[(0, 0), (1, 0), (1, 1)]).expect("valid shape")
    }

    /// Four-cell vertical bar with a 2x2 block over two cells at one end.
    pub fn p_hexomino(id: usize) -> Self {
        Self::new(
            id,
            "P-hexomino",
            &[(0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1)],
        )
        .expect("valid shape")
    }

    /// Five-cell vertical bar with one cell attached beside its end.
    pub fn l_hexomino(id: usize) -> Self {
        Self::new(
            id,
            "L-hexomino",
            &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (4, 1)],
        )
        .expect("valid shape")
    }

    /// Straight vertical bar of six cells.
    pub fn i_hexomino(id: usize) -> Self {
        Self::new(
            id,
            "I-hexomino",
            &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)],
        )
        .expect("valid shape")
    }
}

pub(crate) fn normalize(cells: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let min_r = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let min_c = cells.iter().map(|c| c.1).min().unwrap_or(0);
    let set: BTreeSet<_> = cells.iter().map(|&(r, c)| (r - min_r, c - min_c)).collect();
    set.into_iter().collect()
}

fn extent(cells: &[(i32, i32)]) -> (usize, usize) {
    let h = cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
    let w = cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
    (h as usize, w as usize)
}

fn is_connected(cells: &HashSet<(i32, i32)>) -> bool {
    let Some(&start) = cells.iter().next() else {
        return false;
    };
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some((r, c)) = stack.pop() {
        for next in [(r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)] {
            if cells.contains(&next) && seen.insert(next) {
                stack.push(next);
            }
        }
    }
    seen.len() == cells.len()
}
