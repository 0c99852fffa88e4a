use std::collections::BTreeSet;

use proptest::prelude::*;
use tilecap_core::tiling::{
    count_exact_covers, enumerate_exact_covers, Alphabet, AlphabetEntry, Aperture, Orientation,
    PolyominoShape,
};

/// Every subset of rows that partitions the pixels, found by plain
/// include/exclude recursion in row order.
fn subset_search(rows: &[Vec<usize>], pixels: usize) -> BTreeSet<Vec<usize>> {
    fn go(
        k: usize,
        rows: &[Vec<usize>],
        used: &mut Vec<bool>,
        covered: usize,
        chosen: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if covered == used.len() {
            out.insert(chosen.clone());
            return;
        }
        if k == rows.len() {
            return;
        }
        if rows[k].iter().all(|&i| !used[i]) {
            for &i in &rows[k] {
                used[i] = true;
            }
            chosen.push(k);
            go(k + 1, rows, used, covered + rows[k].len(), chosen, out);
            chosen.pop();
            for &i in &rows[k] {
                used[i] = false;
            }
        }
        go(k + 1, rows, used, covered, chosen, out);
    }
    let mut out = BTreeSet::new();
    go(0, rows, &mut vec![false; pixels], 0, &mut Vec::new(), &mut out);
    out
}

fn dlx_sets(alphabet: &Alphabet, a: Aperture) -> Option<(BTreeSet<Vec<usize>>, Vec<Vec<usize>>, u64)> {
    let placements = alphabet.placements(&a).unwrap();
    if placements.is_empty() {
        return None;
    }
    let l = alphabet.incidence_matrix(&a).unwrap();
    let mut sets = BTreeSet::new();
    let mut n = 0;
    for cover in enumerate_exact_covers(&l, a) {
        let mut p = cover.placements().to_vec();
        p.sort_unstable();
        assert!(sets.insert(p), "cover emitted twice");
        n += 1;
    }
    assert_eq!(n, count_exact_covers(&l));
    Some((sets, l.rows().to_vec(), n))
}

fn tromino() -> Alphabet {
    Alphabet::free([PolyominoShape::i_tromino(0), PolyominoShape::l_tromino(1)])
}

fn alphabets() -> Vec<(&'static str, Alphabet)> {
    vec![
        ("domino", Alphabet::free([PolyominoShape::domino(0)])),
        ("tromino", tromino()),
        ("P-hexomino", Alphabet::p_hexomino()),
        (
            "domino+tromino",
            Alphabet::free([PolyominoShape::domino(0), PolyominoShape::l_tromino(1)]),
        ),
    ]
}

#[test]
fn enumerator_matches_subset_search_up_to_twelve_pixels() {
    let mut checked = 0;
    for (name, alphabet) in alphabets() {
        for m in 1..=12 {
            for n in 1..=12 / m {
                let a = Aperture::new(m, n).unwrap();
                let Some((sets, rows, _)) = dlx_sets(&alphabet, a) else {
                    continue;
                };
                let oracle = subset_search(&rows, a.pixel_count());
                assert_eq!(sets, oracle, "{name} on {a}");
                checked += 1;
            }
        }
    }
    assert!(checked > 40);
}

#[test]
fn known_small_counts() {
    let domino = Alphabet::free([PolyominoShape::domino(0)]);
    // domino tilings of 2xn follow the Fibonacci numbers
    for (n, want) in [(1, 1), (2, 2), (3, 3), (4, 5), (5, 8), (6, 13)] {
        let a = Aperture::new(2, n).unwrap();
        assert_eq!(count_exact_covers(&domino.incidence_matrix(&a).unwrap()), want);
    }
    let a = Aperture::new(4, 4).unwrap();
    assert_eq!(count_exact_covers(&domino.incidence_matrix(&a).unwrap()), 36);
}

#[test]
fn baseline_alphabet_has_a_single_tiling() {
    let a = Aperture::new(8, 12).unwrap();
    let l = Alphabet::baseline().incidence_matrix(&a).unwrap();
    let covers: Vec<_> = enumerate_exact_covers(&l, a).collect();
    assert_eq!(covers.len(), 1);
    let reference = tilecap_core::tiling::baseline_tiling(&a).unwrap();
    assert_eq!(covers[0].canonical().labels(), reference.canonical().labels());
}

#[test]
fn three_by_two_domino_first_cover() {
    let a = Aperture::new(3, 2).unwrap();
    let alphabet = Alphabet::free([PolyominoShape::domino(0)]);
    let p = alphabet.placements(&a).unwrap();
    assert_eq!(p.len(), 7);
    let first = enumerate_exact_covers(&alphabet.incidence_matrix(&a).unwrap(), a)
        .next()
        .unwrap();
    assert_eq!(first.labels(), &[1, 1, 2, 3, 3, 2]);
}

fn orientation_subset() -> impl Strategy<Value = Vec<Orientation>> {
    prop::collection::vec(any::<bool>(), 8).prop_filter_map("at least one orientation", |mask| {
        let o: Vec<_> = Orientation::all()
            .zip(mask)
            .filter_map(|(o, keep)| keep.then_some(o))
            .collect();
        (!o.is_empty()).then_some(o)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restricted_orientations_still_match_oracle(
        m in 1usize..=4,
        n in 1usize..=4,
        which in 0usize..3,
        orientations in orientation_subset(),
    ) {
        prop_assume!(m * n <= 12);
        let shape = match which {
            0 => PolyominoShape::domino(0),
            1 => PolyominoShape::l_tromino(0),
            _ => PolyominoShape::i_tromino(0),
        };
        let alphabet = Alphabet::new(vec![AlphabetEntry { shape, orientations }]).unwrap();
        let a = Aperture::new(m, n).unwrap();
        if let Some((sets, rows, _)) = dlx_sets(&alphabet, a) {
            prop_assert_eq!(sets, subset_search(&rows, a.pixel_count()));
        }
    }

    #[test]
    fn covers_are_partitions_into_alphabet_shapes(m in 2usize..=5, n in 2usize..=5) {
        let alphabet = tromino();
        let a = Aperture::new(m, n).unwrap();
        let Ok(l) = alphabet.incidence_matrix(&a) else { return Ok(()) };
        for cover in enumerate_exact_covers(&l, a).take(50) {
            prop_assert!(cover.tile_sizes().iter().all(|&s| s == 3));
            prop_assert!(cover.check_tiles_connected());
            prop_assert_eq!(cover.tile_count() * 3, a.pixel_count());
        }
    }
}
