use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::shape::Aperture;
use crate::error::{Error, Result};

/// Sub-array membership of every array element.
///
/// `labels[i]` is the 1-based tile id of pixel `i`; ids span exactly `1..=Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AggregationVector {
    aperture: Aperture,
    labels: Vec<u32>,
    tile_count: usize,
    /// Placement id behind each tile (`placements[q - 1]`), empty when the
    /// tiling was not produced from an incidence matrix.
    #[serde(default)]
    placements: Vec<usize>,
}

impl AggregationVector {
    /// Validate and wrap a label vector in pixel order.
    pub fn from_labels(aperture: Aperture, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != aperture.pixel_count() {
            return Err(Error::Tiling(format!(
                "{} labels for a {} aperture",
                labels.len(),
                aperture
            )));
        }
        let q = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut seen = vec![false; q];
        for &l in &labels {
            if l == 0 {
                return Err(Error::Tiling("tile ids start at 1".into()));
            }
            seen[l as usize - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Tiling(format!("tile id {} is unused", missing + 1)));
        }
        Ok(Self {
            aperture,
            labels,
            tile_count: q,
            placements: Vec::new(),
        })
    }

    /// Build from chosen placement rows, labelled in selection order.
    pub(crate) fn from_selection(aperture: Aperture, rows: &[&[usize]], placement_ids: Vec<usize>) -> Self {
        let mut labels = vec![0u32; aperture.pixel_count()];
        for (q, pixels) in rows.iter().enumerate() {
            for &i in pixels.iter() {
                labels[i] = q as u32 + 1;
            }
        }
        debug_assert!(labels.iter().all(|&l| l > 0));
        Self {
            aperture,
            labels,
            tile_count: rows.len(),
            placements: placement_ids,
        }
    }

    pub fn aperture(&self) -> Aperture {
        self.aperture
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn tile_count(&self) -> usize {
        self.tile_count
    }

    pub fn placements(&self) -> &[usize] {
        &self.placements
    }

    /// 1-based tile id of pixel `i`.
    #[inline]
    pub fn tile_of(&self, pixel: usize) -> usize {
        self.labels[pixel] as usize
    }

    pub fn tile_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.tile_count];
        for &l in &self.labels {
            sizes[l as usize - 1] += 1;
        }
        sizes
    }

    /// Pixels of tile `q` (1-based), ascending.
    pub fn members(&self, q: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l as usize == q)
            .map(|(i, _)| i)
            .collect()
    }

    /// Relabel tiles in order of first appearance in pixel order. Two tilings
    /// with the same partition have equal canonical forms.
    pub fn canonical(&self) -> Self {
        let mut map = vec![0u32; self.tile_count + 1];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l as usize] == 0 {
                    next += 1;
                    map[l as usize] = next;
                }
                map[l as usize]
            })
            .collect();
        let mut placements = vec![0; self.placements.len()];
        for (q, &p) in self.placements.iter().enumerate() {
            placements[map[q + 1] as usize - 1] = p;
        }
        Self {
            aperture: self.aperture,
            labels,
            tile_count: self.tile_count,
            placements,
        }
    }

    /// Every tile edge-connected and the ids dense; pixels trivially covered
    /// once because each carries exactly one label.
    pub fn check_tiles_connected(&self) -> bool {
        let a = self.aperture;
        (1..=self.tile_count).all(|q| {
            let members = self.members(q);
            let mut seen = vec![members[0]];
            let mut stack = vec![members[0]];
            while let Some(i) = stack.pop() {
                let (m, n) = a.coords(i);
                let mut nbrs = Vec::with_capacity(4);
                if m > 0 {
                    nbrs.push(a.pixel(m - 1, n));
                }
                if m + 1 < a.columns() {
                    nbrs.push(a.pixel(m + 1, n));
                }
                if n > 0 {
                    nbrs.push(a.pixel(m, n - 1));
                }
                if n + 1 < a.rows() {
                    nbrs.push(a.pixel(m, n + 1));
                }
                for j in nbrs {
                    if self.tile_of(j) == q && !seen.contains(&j) {
                        seen.push(j);
                        stack.push(j);
                    }
                }
            }
            seen.len() == members.len()
        })
    }

    /// Text grid, top row is the highest element row. Tile ids map to
    /// `0-9a-zA-Z` cyclically.
    pub fn to_ascii(&self) -> String {
        const SYMBOLS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
        let a = self.aperture;
        let mut out = String::new();
        for n in (0..a.rows()).rev() {
            for m in 0..a.columns() {
                let l = self.labels[a.pixel(m, n)] as usize;
                out.push(SYMBOLS[l % SYMBOLS.len()] as char);
            }
            out.push('\n');
        }
        out
    }

    /// Numeric grid with the same orientation as [`Self::to_ascii`].
    pub fn to_numeric_grid(&self) -> String {
        let a = self.aperture;
        let width = self.tile_count.to_string().len();
        let mut out = String::new();
        for n in (0..a.rows()).rev() {
            for m in 0..a.columns() {
                if m > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{:>width$}", self.labels[a.pixel(m, n)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Regular tiling by vertical bars of `height` elements, numbered column by
/// column from the bottom.
pub fn vertical_bar_tiling(aperture: &Aperture, height: usize) -> Result<AggregationVector> {
    if height == 0 || !aperture.rows().is_multiple_of(height) {
        return Err(Error::Tiling(format!(
            "{} rows are not divisible into bars of {height}",
            aperture.rows()
        )));
    }
    let per_column = aperture.rows() / height;
    let mut labels = vec![0u32; aperture.pixel_count()];
    for m in 0..aperture.columns() {
        for n in 0..aperture.rows() {
            labels[aperture.pixel(m, n)] = (m * per_column + n / height + 1) as u32;
        }
    }
    AggregationVector::from_labels(*aperture, labels)
}

/// Reference layout of vertical 1x6 clusters.
pub fn baseline_tiling(aperture: &Aperture) -> Result<AggregationVector> {
    vertical_bar_tiling(aperture, 6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_on_8x12_has_sixteen_bars() {
        let a = Aperture::new(8, 12).unwrap();
        let s = baseline_tiling(&a).unwrap();
        assert_eq!(s.tile_count(), 16);
        assert!(s.tile_sizes().iter().all(|&z| z == 6));
        assert!(s.check_tiles_connected());
        // each bar lies in a single column
        for q in 1..=16 {
            let cols: std::collections::HashSet<_> =
                s.members(q).into_iter().map(|i| a.coords(i).0).collect();
            assert_eq!(cols.len(), 1);
        }
    }

    #[test]
    fn baseline_single_column() {
        let a = Aperture::new(1, 6).unwrap();
        let s = baseline_tiling(&a).unwrap();
        assert_eq!(s.labels(), &[1; 6]);
    }

    #[test]
    fn baseline_rejects_indivisible_aperture() {
        let a = Aperture::new(8, 10).unwrap();
        assert!(baseline_tiling(&a).is_err());
    }

    #[test]
    fn label_validation() {
        let a = Aperture::new(2, 1).unwrap();
        assert!(AggregationVector::from_labels(a, vec![1, 3]).is_err());
        assert!(AggregationVector::from_labels(a, vec![0, 1]).is_err());
        assert!(AggregationVector::from_labels(a, vec![1]).is_err());
        assert!(AggregationVector::from_labels(a, vec![2, 1]).is_ok());
    }

    #[test]
    fn canonical_relabelling() {
        let a = Aperture::new(3, 2).unwrap();
        let s = AggregationVector::from_labels(a, vec![3, 3, 1, 2, 2, 1]).unwrap();
        assert_eq!(s.canonical().labels(), &[1, 1, 2, 3, 3, 2]);
    }

    #[test]
    fn ascii_puts_top_row_first() {
        let a = Aperture::new(3, 2).unwrap();
        let s = AggregationVector::from_labels(a, vec![1, 1, 2, 3, 3, 2]).unwrap();
        assert_eq!(s.to_ascii(), "332\n112\n");
    }
}
