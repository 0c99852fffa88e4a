//! Small dense complex kernels on the hot path.
//!
//! nalgebra's complex routines are generic over the scalar and run several
//! times slower than the same work on split real/imaginary storage.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::CMatrix;

/// `a * b` through four real products.
pub fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

fn split(m: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inverse of a square matrix by Gauss-Jordan elimination with partial
/// pivoting. `None` when a pivot is exactly zero.
pub fn inverse(h: &CMatrix) -> Option<CMatrix> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "inverse of a non-square matrix");
    // row-major augmented [h | I], real and imaginary parts apart
    let w = 2 * n;
    let mut re = vec![0.0; n * w];
    let mut im = vec![0.0; n * w];
    for r in 0..n {
        for c in 0..n {
            re[r * w + c] = h[(r, c)].re;
            im[r * w + c] = h[(r, c)].im;
        }
        re[r * w + n + r] = 1.0;
    }
    let mut pr = vec![0.0; w];
    let mut pi = vec![0.0; w];
    for k in 0..n {
        let mag = |r: usize| re[r * w + k].powi(2) + im[r * w + k].powi(2);
        let mut p = k;
        for r in k + 1..n {
            if mag(r) > mag(p) {
                p = r;
            }
        }
        let d = mag(p);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        if p != k {
            for c in 0..w {
                re.swap(p * w + c, k * w + c);
                im.swap(p * w + c, k * w + c);
            }
        }
        let (ir, ii) = (re[k * w + k] / d, -im[k * w + k] / d);
        for c in 0..w {
            let (a, b) = (re[k * w + c], im[k * w + c]);
            pr[c] = a * ir - b * ii;
            pi[c] = a * ii + b * ir;
        }
        re[k * w..k * w + w].copy_from_slice(&pr);
        im[k * w..k * w + w].copy_from_slice(&pi);
        for r in (0..n).filter(|&r| r != k) {
            let (fr, fi) = (re[r * w + k], im[r * w + k]);
            if fr == 0.0 && fi == 0.0 {
                continue;
            }
            let rr = &mut re[r * w..r * w + w];
            let ri = &mut im[r * w..r * w + w];
            for c in 0..w {
                rr[c] -= fr * pr[c] - fi * pi[c];
                ri[c] -= fr * pi[c] + fi * pr[c];
            }
        }
    }
    Some(CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(re[r * w + n + c], im[r * w + n + c])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: u64) -> CMatrix {
        // deterministic, well spread entries without an RNG
        CMatrix::from_fn(n, m, |r, c| {
            let x = ((r * 31 + c * 17 + seed as usize * 7) % 97) as f64 / 97.0;
            let y = ((r * 13 + c * 41 + seed as usize * 3) % 89) as f64 / 89.0;
            Complex64::new(x - 0.5, y - 0.5)
        })
    }

    #[test]
    fn product_matches_nalgebra() {
        let a = sample(5, 7, 1);
        let b = sample(7, 3, 2);
        let d = mul(&a, &b) - &a * &b;
        assert!(frobenius(&d) < 1e-13);
    }

    #[test]
    fn inverse_residual() {
        for n in [1, 2, 5, 12] {
            let h = sample(n, n, n as u64) + CMatrix::identity(n, n);
            let v = inverse(&h).unwrap();
            assert!(frobenius(&(&h * &v - CMatrix::identity(n, n))) < 1e-12);
        }
    }

    #[test]
    fn singular_has_no_inverse() {
        let mut h = CMatrix::identity(3, 3);
        h[(2, 2)] = Complex64::new(0.0, 0.0);
        assert!(inverse(&h).is_none());
    }
}
