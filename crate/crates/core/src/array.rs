//! Planar array geometry, analytic element pattern and sub-array weight
//! expansion.
//!
//! The array lies in the `(y, z)` plane with boresight along `+x`. Directions
//! use the physics convention: `theta` is the polar angle from `+z`, `phi` the
//! azimuth from `+x`, so boresight is `(theta, phi) = (90 deg, 0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tiling::AggregationVector;
use crate::units::{db_to_linear, linear_to_db};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Slant polarization of a port. `V` is the -45 deg slant, `H` the +45 deg one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    V,
    H,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::V, Polarization::H];

    pub fn slant(self) -> f64 {
        match self {
            Polarization::V => -PI / 4.0,
            Polarization::H => PI / 4.0,
        }
    }

    /// 0-based port offset: `V -> 0`, `H -> 1`.
    pub fn index(self) -> usize {
        match self {
            Polarization::V => 0,
            Polarization::H => 1,
        }
    }

    /// Unit polarization vector in the local `(theta_hat, phi_hat)` basis.
    pub fn basis_vector(self) -> [f64; 2] {
        let a = self.slant();
        [a.cos(), a.sin()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Element columns `M` along `y`.
    pub columns: usize,
    /// Element rows `N` along `z`.
    pub rows: usize,
    pub spacing_y: f64,
    pub spacing_z: f64,
    pub bs_height: f64,
    pub frequency: f64,
}

impl ArrayGeometry {
    pub fn new(
        columns: usize,
        rows: usize,
        spacing_y: f64,
        spacing_z: f64,
        bs_height: f64,
        frequency: f64,
    ) -> Result<Self> {
        if columns == 0 || rows == 0 {
            return Err(Error::Config("array needs at least one element".into()));
        }
        if !(spacing_y > 0.0 && spacing_z > 0.0 && frequency > 0.0) {
            return Err(Error::Config(
                "element spacings and frequency must be positive".into(),
            ));
        }
        Ok(Self {
            columns,
            rows,
            spacing_y,
            spacing_z,
            bs_height,
            frequency,
        })
    }

    /// Spacings given in wavelengths.
    pub fn from_wavelengths(
        columns: usize,
        rows: usize,
        spacing_y_wl: f64,
        spacing_z_wl: f64,
        bs_height: f64,
        frequency: f64,
    ) -> Result<Self> {
        let wl = SPEED_OF_LIGHT / frequency;
        Self::new(
            columns,
            rows,
            spacing_y_wl * wl,
            spacing_z_wl * wl,
            bs_height,
            frequency,
        )
    }

    pub fn element_count(&self) -> usize {
        self.columns * self.rows
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    /// Element centre `(0, y_m, z_n)` for 0-based `m`, `n`. Columns start at
    /// `y = 0`; rows are centred on the mast height.
    pub fn element_position(&self, m: usize, n: usize) -> Result<[f64; 3]> {
        if m >= self.columns || n >= self.rows {
            return Err(Error::ElementIndex {
                m,
                n,
                columns: self.columns,
                rows: self.rows,
            });
        }
        Ok(self.position_unchecked(m, n))
    }

    #[inline]
    pub(crate) fn position_unchecked(&self, m: usize, n: usize) -> [f64; 3] {
        let y = m as f64 * self.spacing_y;
        let z = self.bs_height + (n as f64 - (self.rows as f64 - 1.0) / 2.0) * self.spacing_z;
        [0.0, y, z]
    }

    /// Positions of all elements in pixel order (`m` fastest).
    pub fn positions(&self) -> Vec<[f64; 3]> {
        (0..self.rows)
            .flat_map(|n| (0..self.columns).map(move |m| (m, n)))
            .map(|(m, n)| self.position_unchecked(m, n))
            .collect()
    }
}

/// Parabolic-in-dB sector element with slant-polarized ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementPattern {
    pub gain_dbi: f64,
    pub beamwidth_azimuth_deg: f64,
    pub beamwidth_elevation_deg: f64,
    pub front_to_back_db: f64,
    pub side_lobe_vertical_db: f64,
}

impl Default for ElementPattern {
    fn default() -> Self {
        Self {
            gain_dbi: 8.0,
            beamwidth_azimuth_deg: 65.0,
            beamwidth_elevation_deg: 65.0,
            front_to_back_db: 30.0,
            side_lobe_vertical_db: 30.0,
        }
    }
}

impl ElementPattern {
    pub fn validate(&self) -> Result<()> {
        let ok = |bw: f64| bw > 0.0 && bw < 180.0;
        if !ok(self.beamwidth_azimuth_deg) || !ok(self.beamwidth_elevation_deg) {
            return Err(Error::Config(
                "element beamwidths must lie in (0, 180) deg".into(),
            ));
        }
        if !(self.gain_dbi.is_finite() && self.front_to_back_db >= 0.0 && self.side_lobe_vertical_db >= 0.0) {
            return Err(Error::Config(
                "element gains must be finite, attenuations non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Power gain in dBi.
    pub fn gain_db(&self, theta: f64, phi: f64) -> f64 {
        let elev = (theta.to_degrees() - 90.0) / self.beamwidth_elevation_deg;
        let az = wrap_degrees(phi.to_degrees()) / self.beamwidth_azimuth_deg;
        let vertical = (12.0 * elev * elev).min(self.side_lobe_vertical_db);
        let horizontal = (12.0 * az * az).min(self.front_to_back_db);
        self.gain_dbi - (vertical + horizontal).min(self.front_to_back_db)
    }

    pub fn gain_linear(&self, theta: f64, phi: f64) -> f64 {
        db_to_linear(self.gain_db(theta, phi))
    }

    /// Far-field of one port as `(theta_hat, phi_hat)` components, amplitude
    /// normalized so that `|e|^2` is the linear power gain.
    pub fn field(&self, theta: f64, phi: f64, port: Polarization) -> [Complex64; 2] {
        let amp = self.gain_linear(theta, phi).sqrt();
        let [t, p] = port.basis_vector();
        [Complex64::new(amp * t, 0.0), Complex64::new(amp * p, 0.0)]
    }
}

pub fn element_field(pattern: &ElementPattern, theta: f64, phi: f64, port: Polarization) -> [Complex64; 2] {
    pattern.field(theta, phi, port)
}

/// Map degrees into `(-180, 180]`.
fn wrap_degrees(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

/// Expand per-tile coefficients (length `Q`) into per-element weights in pixel
/// order: every element takes the coefficient of its tile.
pub fn expand_weights(s: &AggregationVector, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != s.tile_count() {
        return Err(Error::Dimension(format!(
            "{} sub-array coefficients for {} tiles",
            v.len(),
            s.tile_count()
        )));
    }
    Ok(s.labels().iter().map(|&q| v[q as usize - 1]).collect())
}

/// Dual-polarized expansion: `v` holds the `V` block then the `H` block
/// (`2Q` entries), the result the matching `2MN` element weights.
pub fn expand_dual_weights(s: &AggregationVector, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let q = s.tile_count();
    if v.len() != 2 * q {
        return Err(Error::Dimension(format!(
            "{} dual-polarized coefficients for {} tiles",
            v.len(),
            q
        )));
    }
    let mut out = expand_weights(s, &v[..q])?;
    out.extend(expand_weights(s, &v[q..])?);
    Ok(out)
}

/// Radiated field of one beam on port `port`, summed over all elements with
/// the plane-wave phase `k (y sin(theta) sin(phi) + z cos(theta))`.
pub fn far_field(
    geometry: &ArrayGeometry,
    pattern: &ElementPattern,
    weights: &[Complex64],
    theta: f64,
    phi: f64,
    port: Polarization,
) -> Result<[Complex64; 2]> {
    if weights.len() != geometry.element_count() {
        return Err(Error::Dimension(format!(
            "{} weights for {} elements",
            weights.len(),
            geometry.element_count()
        )));
    }
    let k = geometry.wavenumber();
    let (st, ct) = theta.sin_cos();
    let sp = phi.sin();
    let af: Complex64 = geometry
        .positions()
        .iter()
        .zip(weights)
        .map(|(r, &w)| w * Complex64::from_polar(1.0, k * (r[1] * st * sp + r[2] * ct)))
        .sum();
    let e = pattern.field(theta, phi, port);
    Ok([e[0] * af, e[1] * af])
}

/// Horizontal cut at `theta = 90 deg`: `(azimuth deg, power dB)` rows, power
/// relative to isotropic unit excitation.
pub fn azimuth_cut(
    geometry: &ArrayGeometry,
    pattern: &ElementPattern,
    weights: &[Complex64],
    port: Polarization,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let az = -180.0 + 360.0 * i as f64 / (points - 1) as f64;
            let f = far_field(geometry, pattern, weights, PI / 2.0, az.to_radians(), port)?;
            let p = f[0].norm_sqr() + f[1].norm_sqr();
            Ok((az, linear_to_db(p.max(1e-30))))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::{baseline_tiling, Aperture};

    fn reference_geometry() -> ArrayGeometry {
        ArrayGeometry::from_wavelengths(8, 12, 0.5, 0.7, 25.0, 3.5e9).unwrap()
    }

    #[test]
    fn first_column_sits_at_origin() {
        let g = reference_geometry();
        for n in 0..12 {
            assert_eq!(g.element_position(0, n).unwrap()[1], 0.0);
        }
    }

    #[test]
    fn odd_row_count_centre_is_mast_height() {
        let g = ArrayGeometry::new(2, 5, 0.1, 0.1, 17.0, 1e9).unwrap();
        assert_eq!(g.element_position(1, 2).unwrap()[2], 17.0);
    }

    #[test]
    fn positions_match_scalar_formula() {
        let g = reference_geometry();
        let wl = SPEED_OF_LIGHT / 3.5e9;
        for m in 1..=8usize {
            for n in 1..=12usize {
                let y = (m as f64 - 1.0) * 0.5 * wl;
                let z = 25.0 + (n as f64 - 13.0 / 2.0) * 0.7 * wl;
                let p = g.element_position(m - 1, n - 1).unwrap();
                assert!((p[0]).abs() == 0.0);
                assert!((p[1] - y).abs() < 1e-12);
                assert!((p[2] - z).abs() < 1e-12);
            }
        }
        assert!(g.element_position(8, 0).is_err());
        assert!(g.element_position(0, 12).is_err());
    }

    #[test]
    fn boresight_gain_and_half_power_points() {
        let p = ElementPattern::default();
        let bore = p.gain_db(PI / 2.0, 0.0);
        assert!((bore - 8.0).abs() < 1e-12);
        let half_az = (p.beamwidth_azimuth_deg / 2.0).to_radians();
        assert!((p.gain_db(PI / 2.0, half_az) - (bore - 3.0)).abs() < 0.01);
        let half_el = (90.0 + p.beamwidth_elevation_deg / 2.0).to_radians();
        assert!((p.gain_db(half_el, 0.0) - (bore - 3.0)).abs() < 0.01);
        // back lobe floor
        assert!((p.gain_db(PI / 2.0, PI) - (8.0 - 30.0)).abs() < 1e-12);
    }

    #[test]
    fn pattern_symmetric_about_boresight() {
        let p = ElementPattern::default();
        for d in [5.0f64, 20.0, 47.0, 100.0] {
            let r = d.to_radians();
            assert!((p.gain_db(PI / 2.0, r) - p.gain_db(PI / 2.0, -r)).abs() < 1e-12);
            assert!((p.gain_db(PI / 2.0 + r / 2.0, 0.0) - p.gain_db(PI / 2.0 - r / 2.0, 0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn port_power_independent_of_slant() {
        let p = ElementPattern::default();
        let v = p.field(PI / 2.0, 0.0, Polarization::V);
        let h = p.field(PI / 2.0, 0.0, Polarization::H);
        let pv = v[0].norm_sqr() + v[1].norm_sqr();
        let ph = h[0].norm_sqr() + h[1].norm_sqr();
        assert!((pv - ph).abs() < 1e-12);
        assert!((pv - db_to_linear(8.0)).abs() < 1e-9);
        // orthogonal slants
        let dot = v[0] * h[0] + v[1] * h[1];
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn beamwidth_validation() {
        let mut p = ElementPattern::default();
        assert!(p.validate().is_ok());
        p.beamwidth_azimuth_deg = 180.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn expand_all_ones_and_single_tile() {
        let a = Aperture::new(8, 12).unwrap();
        let s = baseline_tiling(&a).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 16];
        assert!(expand_weights(&s, &ones)
            .unwrap()
            .iter()
            .all(|w| *w == Complex64::new(1.0, 0.0)));
        assert!(expand_weights(&s, &ones[..15]).is_err());

        let single = AggregationVector::from_labels(Aperture::new(2, 3).unwrap(), vec![1; 6]).unwrap();
        let v = [Complex64::new(0.3, -0.2)];
        assert_eq!(expand_weights(&single, &v).unwrap(), vec![v[0]; 6]);
    }

    #[test]
    fn expand_vertical_bars_gives_block_constant_columns() {
        let a = Aperture::new(8, 12).unwrap();
        let s = baseline_tiling(&a).unwrap();
        let v: Vec<_> = (0..16).map(|q| Complex64::new(q as f64, -(q as f64))).collect();
        let w = expand_weights(&s, &v).unwrap();
        for n in 0..12 {
            for m in 0..8 {
                let q = m * 2 + n / 6;
                assert_eq!(w[a.pixel(m, n)], v[q]);
            }
        }
    }

    #[test]
    fn broadside_uniform_sum_is_coherent() {
        let g = ArrayGeometry::from_wavelengths(4, 3, 0.5, 0.7, 0.0, 3.5e9).unwrap();
        let p = ElementPattern::default();
        let w = vec![Complex64::new(1.0, 0.0); 12];
        // theta = 90, phi = 0: y sin(theta) sin(phi) = 0, z cos(theta) = 0
        let f = far_field(&g, &p, &w, PI / 2.0, 0.0, Polarization::V).unwrap();
        let e = p.field(PI / 2.0, 0.0, Polarization::V);
        assert!((f[0] - e[0] * 12.0).norm() < 1e-12);
        assert!((f[1] - e[1] * 12.0).norm() < 1e-12);
    }

    #[test]
    fn adjacent_half_wave_elements_differ_by_pi() {
        let g = ArrayGeometry::from_wavelengths(2, 1, 0.5, 0.7, 0.0, 3.5e9).unwrap();
        let p = ElementPattern::default();
        let (theta, phi) = (PI / 2.0, PI / 2.0);
        let a = far_field(
            &g,
            &p,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            theta,
            phi,
            Polarization::H,
        )
        .unwrap();
        let b = far_field(
            &g,
            &p,
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            theta,
            phi,
            Polarization::H,
        )
        .unwrap();
        let ratio = b[0] / a[0];
        assert!((ratio - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
    }
}
