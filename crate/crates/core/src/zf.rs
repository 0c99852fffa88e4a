//! Zero-forcing sub-array coefficients and beam power normalization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{CMatrix, EffectiveChannel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tiling::AggregationVector;

pub const DEFAULT_CONDITION_CAP: f64 = 1e8;

/// `(2Q) x (2U)` coefficients, column `b` serving RX port `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    v: CMatrix,
    /// Factor applied to each column since the raw ZF solve.
    scales: Vec<f64>,
}

impl PrecodingMatrix {
    pub fn from_matrix(v: CMatrix) -> Result<Self> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension("precoder has non-finite entries".into()));
        }
        let scales = vec![1.0; v.ncols()];
        Ok(Self { v, scales })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn beam_count(&self) -> usize {
        self.v.ncols()
    }

    /// Column `b` before any normalization.
    pub fn raw_column(&self, b: usize) -> Vec<Complex64> {
        self.v.column(b).iter().map(|z| z / self.scales[b]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZfOptions {
    pub condition_cap: f64,
}

impl Default for ZfOptions {
    fn default() -> Self {
        Self {
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

/// Minimum-norm right inverse `V = H^H (H H^H)^-1`.
///
/// A square channel is inverted directly; a wide one goes through a QR
/// factorization of `H^H`, so the Gram matrix is never formed. Conditioning
/// is judged by `||H||_F ||V||_F`, which bounds the spectral condition number
/// from above.
pub fn zero_forcing(h: &EffectiveChannel, options: &ZfOptions) -> Result<PrecodingMatrix> {
    let h = h.matrix();
    let (rows, cols) = h.shape();
    if rows == 0 {
        return Err(Error::Empty("effective channel"));
    }
    let singular = Error::IllConditioned {
        condition: f64::INFINITY,
    };
    if rows > cols {
        return Err(singular);
    }
    let v = if rows == cols {
        linalg::inverse(h).ok_or(singular)?
    } else {
        let qr = h.adjoint().qr();
        let eye = CMatrix::identity(rows, rows);
        let r_inv_h = qr.r().adjoint().solve_lower_triangular(&eye).ok_or(singular)?;
        qr.q() * r_inv_h
    };
    let condition = linalg::frobenius(h) * linalg::frobenius(&v);
    if !(condition <= options.condition_cap) {
        return Err(Error::IllConditioned { condition });
    }
    PrecodingMatrix::from_matrix(v)
}

/// Scale every beam so its expanded element weights have unit norm. A tile
/// of `k` elements repeats its coefficient `k` times, so it counts `k`-fold.
pub fn normalize_beams(v: &PrecodingMatrix, s: &AggregationVector) -> Result<PrecodingMatrix> {
    let q = s.tile_count();
    if v.v.nrows() != 2 * q {
        return Err(Error::Dimension(format!(
            "precoder has {} rows, tiling needs {}",
            v.v.nrows(),
            2 * q
        )));
    }
    let sizes = s.tile_sizes();
    let mut out = v.clone();
    for b in 0..v.v.ncols() {
        let col = v.v.column(b);
        let norm_sq: f64 = col
            .iter()
            .enumerate()
            .map(|(k, z)| z.norm_sqr() * sizes[k % q] as f64)
            .sum();
        if !(norm_sq > 0.0) {
            return Err(Error::ZeroColumn(b));
        }
        let scale = 1.0 / norm_sq.sqrt();
        out.v.column_mut(b).scale_mut(scale);
        out.scales[b] *= scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::Aperture;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eff(m: CMatrix) -> EffectiveChannel {
        EffectiveChannel::from_matrix(m)
    }

    #[test]
    fn identity_inverts_to_identity() {
        let v = zero_forcing(&eff(CMatrix::identity(4, 4)), &ZfOptions::default()).unwrap();
        assert!((v.matrix() - CMatrix::identity(4, 4)).camax() < 1e-15);
    }

    #[test]
    fn scaled_identity() {
        let k = c(0.0, 2.0);
        let v = zero_forcing(&eff(CMatrix::identity(3, 3) * k), &ZfOptions::default()).unwrap();
        let expected = CMatrix::identity(3, 3) * (c(1.0, 0.0) / k);
        assert!((v.matrix() - expected).camax() < 1e-15);
    }

    #[test]
    fn wide_channel_right_inverse() {
        let h = CMatrix::from_fn(2, 4, |r, k| {
            c(
                (r * 3 + k) as f64 * 0.37 + 0.1,
                (r as f64 - k as f64) * 0.21 + 0.05 * (k * k) as f64,
            )
        });
        let v = zero_forcing(&eff(h.clone()), &ZfOptions::default()).unwrap();
        assert_eq!(v.matrix().shape(), (4, 2));
        assert!((&h * v.matrix() - CMatrix::identity(2, 2)).camax() < 1e-12);
    }

    #[test]
    fn rank_deficient_rejected() {
        let h = CMatrix::from_fn(2, 2, |_, k| c(1.0 + k as f64, 0.0));
        assert!(matches!(
            zero_forcing(&eff(h), &ZfOptions::default()),
            Err(Error::IllConditioned { .. })
        ));
        let tall = CMatrix::identity(3, 2);
        assert!(zero_forcing(&eff(tall), &ZfOptions::default()).is_err());
    }

    #[test]
    fn cap_is_honoured() {
        let mut h = CMatrix::identity(2, 2);
        h[(1, 1)] = c(1e-5, 0.0);
        assert!(zero_forcing(&eff(h.clone()), &ZfOptions::default()).is_ok());
        let tight = ZfOptions { condition_cap: 1e4 };
        assert!(matches!(
            zero_forcing(&eff(h), &tight),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn normalization_counts_tile_sizes() {
        // two tiles of sizes 1 and 2 on a 3x1 aperture
        let s = AggregationVector::from_labels(Aperture::new(3, 1).unwrap(), vec![1, 2, 2]).unwrap();
        let v = CMatrix::from_column_slice(4, 1, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let p = normalize_beams(&PrecodingMatrix::from_matrix(v).unwrap(), &s).unwrap();
        // norm^2 = 1 + 2 + 0 + 2 = 5
        assert!((p.scales()[0] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((p.raw_column(0)[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unit_columns_unchanged_and_zero_rejected() {
        let s = AggregationVector::from_labels(Aperture::new(2, 1).unwrap(), vec![1, 2]).unwrap();
        let v = PrecodingMatrix::from_matrix(CMatrix::identity(4, 4)).unwrap();
        let p = normalize_beams(&v, &s).unwrap();
        assert!((p.matrix() - CMatrix::identity(4, 4)).camax() < 1e-15);
        let v3 = PrecodingMatrix::from_matrix(CMatrix::identity(4, 4) * c(3.0, 0.0)).unwrap();
        let p3 = normalize_beams(&v3, &s).unwrap();
        assert!(p3.scales().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        let mut z = CMatrix::identity(4, 4);
        z[(2, 2)] = c(0.0, 0.0);
        let pz = PrecodingMatrix::from_matrix(z).unwrap();
        assert!(matches!(normalize_beams(&pz, &s), Err(Error::ZeroColumn(2))));
    }
}
