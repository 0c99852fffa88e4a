//! ASCII and SVG pictures of a tiling, colored by tile orientation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use tilecap_core::tiling::{AggregationVector, Alphabet, Aperture};

use crate::output::Provenance;

const PALETTE: &[&str] = &[
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
    "#bab0ac", "#86bcb6", "#d37295", "#a0cbe8", "#ffbe7d", "#8cd17d", "#f1ce63",
];
const UNKNOWN: &str = "#dddddd";
const CELL: usize = 28;

type Pattern = Vec<(usize, usize)>;

fn pattern(a: &Aperture, pixels: &[usize]) -> Pattern {
    let coords: Vec<_> = pixels.iter().map(|&i| a.coords(i)).collect();
    let m0 = coords.iter().map(|c| c.0).min().unwrap_or(0);
    let n0 = coords.iter().map(|c| c.1).min().unwrap_or(0);
    let mut p: Pattern = coords.iter().map(|&(m, n)| (m - m0, n - n0)).collect();
    p.sort_unstable();
    p
}

/// Maps each distinct oriented tile footprint to a color slot and a name.
#[derive(Debug, Clone, Default)]
pub struct OrientationKey {
    slots: BTreeMap<Pattern, (usize, String)>,
}

impl OrientationKey {
    /// Footprints in alphabet order: shape, then orientation tag. Orientations
    /// with identical footprints share the first slot. Later alphabets only
    /// add footprints the earlier ones lack.
    pub fn from_alphabets(alphabets: &[&Alphabet], aperture: &Aperture) -> Self {
        let mut slots = BTreeMap::new();
        for alphabet in alphabets {
            let Ok(placements) = alphabet.placements(aperture) else {
                continue;
            };
            let names: Vec<String> = alphabet.shapes().iter().map(|s| s.name.clone()).collect();
            let mut variants: Vec<_> = placements
                .iter()
                .map(|p| (p.shape, p.orientation.tag(), pattern(aperture, &p.pixels)))
                .collect();
            variants.sort_by_key(|v| (v.0, v.1));
            for (shape, tag, pat) in variants {
                let next = slots.len();
                let name = format!(
                    "{} tag {tag}",
                    names.get(shape).map(String::as_str).unwrap_or("shape")
                );
                slots.entry(pat).or_insert((next, name));
            }
        }
        Self { slots }
    }

    fn slot(&self, a: &Aperture, pixels: &[usize]) -> Option<&(usize, String)> {
        self.slots.get(&pattern(a, pixels))
    }

    fn color(&self, a: &Aperture, pixels: &[usize]) -> &'static str {
        match self.slot(a, pixels) {
            Some((k, _)) => PALETTE[k % PALETTE.len()],
            None => UNKNOWN,
        }
    }
}

/// Text grid with the highest element row first, preceded by `#` metadata.
pub fn ascii(tiling: &AggregationVector, provenance: &Provenance, title: &str) -> String {
    let mut s = provenance.comment_lines("# ");
    let _ = writeln!(
        s,
        "# {title}: {} tiles on {}",
        tiling.tile_count(),
        tiling.aperture()
    );
    s.push_str(&tiling.to_ascii());
    s
}

pub fn svg(tiling: &AggregationVector, key: &OrientationKey, provenance: &Provenance, title: &str) -> String {
    let a = tiling.aperture();
    let (w, h) = (a.columns() * CELL, a.rows() * CELL);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w + 2,
        h + 2,
        w + 2,
        h + 2
    );
    let _ = writeln!(s, "<!--\n{}-->", provenance.comment_lines(""));
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    s.push_str(r#"<g transform="translate(1,1)">"#);
    s.push('\n');
    let members: Vec<Vec<usize>> = (1..=tiling.tile_count()).map(|q| tiling.members(q)).collect();
    // y grows downward, so element row n is drawn at rows - 1 - n
    let y_of = |n: usize| (a.rows() - 1 - n) * CELL;
    for (q, pixels) in members.iter().enumerate() {
        let fill = key.color(&a, pixels);
        let name = key.slot(&a, pixels).map(|s| s.1.as_str()).unwrap_or("unlisted");
        let _ = writeln!(
            s,
            r#"<g fill="{fill}"><title>tile {} ({})</title>"#,
            q + 1,
            escape(name)
        );
        for &i in pixels {
            let (m, n) = a.coords(i);
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}"/>"#,
                m * CELL,
                y_of(n)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str(r##"<g stroke="#222" stroke-width="2" stroke-linecap="square">"##);
    s.push('\n');
    let label = |m: usize, n: usize| tiling.tile_of(a.pixel(m, n));
    for n in 0..a.rows() {
        for m in 0..a.columns() {
            let (x, y) = (m * CELL, y_of(n));
            if m + 1 == a.columns() || label(m, n) != label(m + 1, n) {
                line(&mut s, x + CELL, y, x + CELL, y + CELL);
            }
            if n + 1 == a.rows() || label(m, n) != label(m, n + 1) {
                line(&mut s, x, y, x + CELL, y);
            }
            if m == 0 {
                line(&mut s, x, y, x, y + CELL);
            }
            if n == 0 {
                line(&mut s, x, y + CELL, x + CELL, y + CELL);
            }
        }
    }
    s.push_str("</g>\n");
    s.push_str(r##"<g font-family="monospace" font-size="11" text-anchor="middle" fill="#111">"##);
    s.push('\n');
    for (q, pixels) in members.iter().enumerate() {
        let (m, n) = a.coords(pixels[0]);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            m * CELL + CELL / 2,
            y_of(n) + CELL / 2 + 4,
            q + 1
        );
    }
    s.push_str("</g>\n</g>\n</svg>\n");
    s
}

fn line(s: &mut String, x1: usize, y1: usize, x2: usize, y2: usize) {
    let _ = writeln!(s, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#);
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tilecap_core::tiling::{baseline_tiling, enumerate_exact_covers};

    #[test]
    fn baseline_bars_share_one_color() {
        let a = Aperture::new(8, 12).unwrap();
        let key = OrientationKey::from_alphabets(&[&Alphabet::baseline()], &a);
        let t = baseline_tiling(&a).unwrap();
        let colors: std::collections::HashSet<_> = (1..=t.tile_count())
            .map(|q| key.color(&a, &t.members(q)))
            .collect();
        assert_eq!(colors.len(), 1);
        assert!(!colors.contains(UNKNOWN));
    }

    #[test]
    fn every_p_tile_has_a_known_orientation() {
        let a = Aperture::new(8, 12).unwrap();
        let alphabet = Alphabet::p_hexomino();
        let key = OrientationKey::from_alphabets(&[&alphabet], &a);
        assert_eq!(key.slots.len(), 8);
        let l = alphabet.incidence_matrix(&a).unwrap();
        let t = enumerate_exact_covers(&l, a).next().unwrap();
        for q in 1..=t.tile_count() {
            assert_ne!(key.color(&a, &t.members(q)), UNKNOWN);
        }
        let svg = svg(&t, &key, &Provenance::default(), "first");
        assert_eq!(svg.matches("<rect").count(), 96);
        assert!(svg.ends_with("</svg>\n"));
    }
}
