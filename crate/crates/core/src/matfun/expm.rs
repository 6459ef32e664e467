//! Matrix exponential, the φ₁ function and cheap spectral bounds.

use super::dense::{solve_matrix, Matrix};
use crate::error::Result;

// [13/13] Padé coefficients of exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Scaling threshold for the degree-13 approximant in the 1-norm.
const THETA13: f64 = 5.371920351148152;

/// `e^M` by scaling and squaring with a fixed [13/13] Padé approximant.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    m.check_finite("expm input")?;
    let n = m.dim();
    let norm = m.norm_one();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = m.scale(2f64.powi(-s));
    let b = &PADE13;
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let id = Matrix::identity(n);

    let inner_u = a6.scale(b[13]).axpy(b[11], &a4).axpy(b[9], &a2);
    let u = a.matmul(
        &a6.matmul(&inner_u)
            .axpy(b[7], &a6)
            .axpy(b[5], &a4)
            .axpy(b[3], &a2)
            .axpy(b[1], &id),
    );
    let inner_v = a6.scale(b[12]).axpy(b[10], &a4).axpy(b[8], &a2);
    let v = a6
        .matmul(&inner_v)
        .axpy(b[6], &a6)
        .axpy(b[4], &a4)
        .axpy(b[2], &a2)
        .axpy(b[0], &id);

    let mut r = solve_matrix(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r.check_finite("expm result")?;
    Ok(r)
}

/// Returns `(e^M, φ₁(M))` from one exponential of the augmented matrix
/// `[[M, I], [0, 0]]`, whose upper-right block is φ₁(M). Singular `M` is fine.
pub fn expm_phi1(m: &Matrix) -> Result<(Matrix, Matrix)> {
    m.check_finite("phi1 input")?;
    let d = m.dim();
    let mut aug = Matrix::zeros(2 * d);
    for i in 0..d {
        for j in 0..d {
            aug[(i, j)] = m[(i, j)];
        }
        aug[(i, d + i)] = 1.0;
    }
    let e = expm(&aug)?;
    Ok((e.block(0, 0, d), e.block(0, d, d)))
}

/// φ₁(M) = Σ M^k / (k+1)!, with φ₁(0) = I.
pub fn phi1(m: &Matrix) -> Result<Matrix> {
    expm_phi1(m).map(|(_, p)| p)
}

/// Guaranteed upper bound on the spectral radius: the smallest of
/// `min(‖M^k‖∞, ‖M^k‖₁)^(1/k)` over k = 1, 2, 4, 8.
pub fn spectral_bound(m: &Matrix) -> Result<f64> {
    spectral_bound_below(m, 0.0)
}

/// As [`spectral_bound`], but stops refining once the bound is below `target`.
pub(crate) fn spectral_bound_below(m: &Matrix, target: f64) -> Result<f64> {
    m.check_finite("spectral_bound input")?;
    let mut best = m.norm_inf().min(m.norm_one());
    let mut p = m.clone();
    let mut k = 1i32;
    for _ in 0..3 {
        if best == 0.0 || best < target {
            break;
        }
        p = p.matmul(&p);
        k *= 2;
        let nb = p.norm_inf().min(p.norm_one());
        if nb.is_finite() {
            best = best.min(nb.powf(1.0 / k as f64));
        }
    }
    Ok(best)
}

/// Upper bound on `max |Im λ|` over the eigenvalues of `M`.
///
/// Uses Bendixson's inclusion (imaginary parts are bounded by the spectral
/// radius of the skew part) together with the plain spectral bound.
pub fn oscillation_bound(m: &Matrix) -> Result<f64> {
    let skew = m.axpy(-1.0, &m.transpose()).scale(0.5);
    Ok(spectral_bound(m)?.min(spectral_bound(&skew)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use std::f64::consts::{FRAC_PI_2, LN_2};

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(
            expm(&Matrix::zeros(3))
                .unwrap()
                .max_abs_diff(&Matrix::identity(3)),
            0.0
        );
    }

    #[test]
    fn exp_of_diagonal_logs() {
        let e = expm(&Matrix::diag(&[LN_2, 3f64.ln()])).unwrap();
        assert!(e.max_abs_diff(&Matrix::diag(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn quarter_rotation() {
        let j = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let e = expm(&j.scale(FRAC_PI_2)).unwrap();
        assert!(e.max_abs_diff(&j) < 1e-15);
    }

    #[test]
    fn large_norm_scalar_relative_error() {
        for &z in &[-50.0, -20.0, 7.5, 30.0, 50.0] {
            let e = expm(&Matrix::diag(&[z])).unwrap();
            let rel = (e[(0, 0)] - f64::exp(z)).abs() / f64::exp(z);
            assert!(rel < 1e-13 * f64::exp(z.abs()).max(1.0), "z={z} rel={rel}");
        }
    }

    #[test]
    fn phi1_conventions() {
        assert!(
            phi1(&Matrix::zeros(2))
                .unwrap()
                .max_abs_diff(&Matrix::identity(2))
                < 1e-16
        );
        let p = phi1(&Matrix::diag(&[LN_2])).unwrap();
        assert!((p[(0, 0)] - 1.0 / LN_2).abs() < 1e-15);
    }

    #[test]
    fn nonfinite_input() {
        let bad = Matrix::from_raw(1, vec![f64::NAN]);
        assert_eq!(expm(&bad).unwrap_err(), Error::NonFinite("expm input"));
        assert!(phi1(&bad).is_err());
        assert!(spectral_bound(&bad).is_err());
    }

    #[test]
    fn spectral_bounds() {
        assert_eq!(spectral_bound(&Matrix::zeros(2)).unwrap(), 0.0);
        assert!(spectral_bound(&Matrix::diag(&[3.0, -5.0])).unwrap() >= 5.0);
        // eigenvalues ±7i from λ² + 49 = 0
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[-49.0, 0.0]]).unwrap();
        let b = spectral_bound(&m).unwrap();
        assert!(b >= 7.0 - 1e-12, "{b}");
        assert!(b < 8.0);
    }

    #[test]
    fn oscillation_bound_ignores_real_spectrum() {
        assert_eq!(oscillation_bound(&Matrix::diag(&[-10.0])).unwrap(), 0.0);
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert!((oscillation_bound(&m).unwrap() - 1.0).abs() < 1e-15);
    }
}
