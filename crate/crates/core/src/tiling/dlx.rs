//! Algorithm X over dancing links.
//!
//! Columns are pixels, rows are placements. The branching column is the one
//! with the fewest live rows, lowest pixel index on ties; candidate rows are
//! tried in increasing placement order. Backtracking undoes every unlink in
//! reverse, so the structure returns to its initial state after a full run.

use super::cover::AggregationVector;
use super::placement::IncidenceMatrix;
use super::shape::Aperture;

const ROOT: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Links {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    /// Column header of each node (headers point at themselves).
    col: Vec<usize>,
    /// Matrix row of each body node; unused for headers.
    row: Vec<usize>,
    /// Live node count per column header.
    size: Vec<usize>,
}

impl Links {
    fn new(matrix: &IncidenceMatrix) -> Self {
        let columns = matrix.column_count();
        let headers = columns + 1;
        let body: usize = matrix.rows().iter().map(Vec::len).sum();
        let total = headers + body;
        let mut l = Links {
            left: Vec::with_capacity(total),
            right: Vec::with_capacity(total),
            up: Vec::with_capacity(total),
            down: Vec::with_capacity(total),
            col: Vec::with_capacity(total),
            row: Vec::with_capacity(total),
            size: vec![0; headers],
        };
        for h in 0..headers {
            l.left.push(if h == 0 { columns } else { h - 1 });
            l.right.push(if h == columns { 0 } else { h + 1 });
            l.up.push(h);
            l.down.push(h);
            l.col.push(h);
            l.row.push(usize::MAX);
        }
        for (k, pixels) in matrix.rows().iter().enumerate() {
            let first = l.col.len();
            for (j, &pixel) in pixels.iter().enumerate() {
                let node = first + j;
                let c = pixel + 1;
                l.col.push(c);
                l.row.push(k);
                // horizontal ring over this row
                l.left.push(if j == 0 {
                    first + pixels.len() - 1
                } else {
                    node - 1
                });
                l.right.push(if j + 1 == pixels.len() { first } else { node + 1 });
                // append at the bottom of column c
                let last = l.up[c];
                l.up.push(last);
                l.down.push(c);
                l.down[last] = node;
                l.up[c] = node;
                l.size[c] += 1;
            }
        }
        l
    }

    #[inline]
    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.size[self.col[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    #[inline]
    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                self.size[self.col[j]] += 1;
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    #[inline]
    fn cover_row_others(&mut self, r: usize) {
        let mut j = self.right[r];
        while j != r {
            self.cover(self.col[j]);
            j = self.right[j];
        }
    }

    #[inline]
    fn uncover_row_others(&mut self, r: usize) {
        let mut j = self.left[r];
        while j != r {
            self.uncover(self.col[j]);
            j = self.left[j];
        }
    }

    /// Live column with the fewest rows; first in pixel order on ties.
    /// `None` when every column is covered.
    #[inline]
    fn choose_column(&self) -> Option<usize> {
        let mut c = self.right[ROOT];
        if c == ROOT {
            return None;
        }
        let mut best = c;
        let mut best_size = self.size[c];
        while c != ROOT {
            if self.size[c] < best_size {
                best = c;
                best_size = self.size[c];
                if best_size == 0 {
                    break;
                }
            }
            c = self.right[c];
        }
        Some(best)
    }

    fn count(&mut self) -> u64 {
        let Some(c) = self.choose_column() else {
            return 1;
        };
        if self.size[c] == 0 {
            return 0;
        }
        let mut total = 0;
        self.cover(c);
        let mut r = self.down[c];
        while r != c {
            self.cover_row_others(r);
            total += self.count();
            self.uncover_row_others(r);
            r = self.down[r];
        }
        self.uncover(c);
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Descend,
    Backtrack,
    Done,
}

/// Lazy stream of every exact cover of an incidence matrix.
///
/// Each item is an [`AggregationVector`] whose tile ids follow selection
/// depth. The iterator owns its state and is `Send`, so it can be moved to a
/// producer thread.
#[derive(Debug, Clone)]
pub struct ExactCovers {
    links: Links,
    matrix: IncidenceMatrix,
    aperture: Aperture,
    /// Chosen body node per depth.
    stack: Vec<usize>,
    mode: Mode,
}

impl ExactCovers {
    pub fn new(matrix: &IncidenceMatrix, aperture: Aperture) -> Self {
        debug_assert_eq!(matrix.column_count(), aperture.pixel_count());
        Self {
            links: Links::new(matrix),
            matrix: matrix.clone(),
            aperture,
            stack: Vec::new(),
            mode: Mode::Descend,
        }
    }

    /// Placement rows of the current partial selection, in depth order.
    fn selection(&self) -> Vec<usize> {
        self.stack.iter().map(|&n| self.links.row[n]).collect()
    }

    fn emit(&self) -> AggregationVector {
        let ids = self.selection();
        let rows: Vec<&[usize]> = ids.iter().map(|&k| self.matrix.row(k)).collect();
        AggregationVector::from_selection(self.aperture, &rows, ids)
    }

    #[cfg(test)]
    fn links_snapshot(&self) -> Links {
        self.links.clone()
    }
}

impl Iterator for ExactCovers {
    type Item = AggregationVector;

    fn next(&mut self) -> Option<AggregationVector> {
        loop {
            match self.mode {
                Mode::Done => return None,
                Mode::Descend => match self.links.choose_column() {
                    None => {
                        self.mode = Mode::Backtrack;
                        return Some(self.emit());
                    }
                    Some(c) => {
                        if self.links.size[c] == 0 {
                            self.mode = Mode::Backtrack;
                            continue;
                        }
                        self.links.cover(c);
                        let r = self.links.down[c];
                        self.links.cover_row_others(r);
                        self.stack.push(r);
                    }
                },
                Mode::Backtrack => {
                    let Some(r) = self.stack.pop() else {
                        self.mode = Mode::Done;
                        return None;
                    };
                    self.links.uncover_row_others(r);
                    let c = self.links.col[r];
                    let next = self.links.down[r];
                    if next == c {
                        self.links.uncover(c);
                    } else {
                        self.links.cover_row_others(next);
                        self.stack.push(next);
                        self.mode = Mode::Descend;
                    }
                }
            }
        }
    }
}

pub fn enumerate_exact_covers(matrix: &IncidenceMatrix, aperture: Aperture) -> ExactCovers {
    ExactCovers::new(matrix, aperture)
}

/// Number of exact covers, without materializing them.
pub fn count_exact_covers(matrix: &IncidenceMatrix) -> u64 {
    Links::new(matrix).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::{build_incidence_matrix, generate_placements, PolyominoShape};

    fn domino(columns: usize, rows: usize) -> (Aperture, IncidenceMatrix) {
        let a = Aperture::new(columns, rows).unwrap();
        let p = generate_placements(&a, &[PolyominoShape::domino(0)], true, true).unwrap();
        let l = build_incidence_matrix(&p, &a).unwrap();
        (a, l)
    }

    #[test]
    fn domino_3x2_covers() {
        let (a, l) = domino(3, 2);
        let covers: Vec<_> = enumerate_exact_covers(&l, a).collect();
        assert_eq!(covers.len(), 3);
        assert_eq!(count_exact_covers(&l), 3);
        let first = &covers[0];
        assert_eq!(first.labels(), &[1, 1, 2, 3, 3, 2]);
        let mut chosen = first.placements().to_vec();
        chosen.sort_unstable();
        // tau_1, tau_3, tau_7 in 1-based numbering
        assert_eq!(chosen, vec![0, 2, 6]);
    }

    #[test]
    fn domino_2x2_has_two_covers() {
        let (a, l) = domino(2, 2);
        assert_eq!(enumerate_exact_covers(&l, a).count(), 2);
    }

    #[test]
    fn infeasible_instance_yields_nothing() {
        let (a, l) = domino(3, 3);
        assert_eq!(enumerate_exact_covers(&l, a).count(), 0);
        assert_eq!(count_exact_covers(&l), 0);
    }

    #[test]
    fn links_restored_after_full_enumeration() {
        let (a, l) = domino(4, 3);
        let mut it = enumerate_exact_covers(&l, a);
        let before = it.links_snapshot();
        let n = it.by_ref().count();
        assert_eq!(n, 11);
        assert_eq!(it.links_snapshot(), before);
        let mut fresh = Links::new(&l);
        fresh.count();
        assert_eq!(fresh, before);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let (a, l) = domino(4, 4);
        let x: Vec<_> = enumerate_exact_covers(&l, a).collect();
        let y: Vec<_> = enumerate_exact_covers(&l, a).collect();
        assert_eq!(x, y);
        assert_eq!(x.len(), 36);
    }

    #[test]
    fn stream_is_send() {
        fn assert_send<T: Send>() {}
        assert_send::<ExactCovers>();
    }
}
