use std::time::Instant;

use tilecap_core::tiling::{count_exact_covers, Alphabet, Aperture};

fn main() {
    let aperture = Aperture::new(8, 12).unwrap();
    for (name, alphabet) in [
        ("P", Alphabet::p_hexomino()),
        ("L", Alphabet::l_hexomino()),
        ("P+L", Alphabet::p_and_l_hexominoes()),
    ] {
        let start = Instant::now();
        let l = alphabet.incidence_matrix(&aperture).unwrap();
        let t = count_exact_covers(&l);
        println!("{name}: K = {}, T = {t} ({:.2?})", l.row_count(), start.elapsed());
    }
}
