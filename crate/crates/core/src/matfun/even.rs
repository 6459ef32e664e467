//! Even analytic matrix functions evaluated through their power series in the
//! squared argument.
//!
//! Every function here is written as `g(X)` with `X = M²`, so `f(M)` and
//! `f(-M)` go through exactly the same arithmetic. Large arguments are handled
//! by scaling `X` down by powers of four and undoing the scaling with the
//! double-angle identity of the respective function.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use super::dense::{solve_matrix, Matrix};
use super::expm::spectral_bound_below;
use crate::error::{Error, Result};

/// Maximum number of series terms.
pub const SERIES_TERMS: usize = 30;

/// Distance kept from the first pole of `tan z / z` at `|z| = π/2`.
pub const TANC_MARGIN: f64 = 0.05;

/// Which even function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvenKind {
    /// `tanh(z) / z`
    Tanhc,
    /// `tan(z) / z`
    Tanc,
    /// `z coth(z)`
    XCothX,
}

struct Coefficients {
    tanhc: [f64; SERIES_TERMS],
    tanc: [f64; SERIES_TERMS],
    xcothx: [f64; SERIES_TERMS],
    cos: [f64; SERIES_TERMS],
    sinc: [f64; SERIES_TERMS],
}

fn coefficients() -> &'static Coefficients {
    static COEFFS: OnceLock<Coefficients> = OnceLock::new();
    COEFFS.get_or_init(|| {
        // cosh(√X) = Σ X^k/(2k)!, sinh(√X)/√X = Σ X^k/(2k+1)!
        let mut ch = [0.0; SERIES_TERMS];
        let mut sh = [0.0; SERIES_TERMS];
        let mut fact = 1.0;
        for k in 0..SERIES_TERMS {
            if k > 0 {
                fact *= (2 * k) as f64 * (2 * k - 1) as f64;
            }
            ch[k] = 1.0 / fact;
            sh[k] = 1.0 / (fact * (2 * k + 1) as f64);
        }
        // tanhc = sinhc / cosh and z coth z = cosh / sinhc, by series division
        let mut tanhc = [0.0; SERIES_TERMS];
        let mut xcothx = [0.0; SERIES_TERMS];
        for k in 0..SERIES_TERMS {
            let mut t = sh[k];
            let mut g = ch[k];
            for j in 0..k {
                t -= tanhc[j] * ch[k - j];
                g -= xcothx[j] * sh[k - j];
            }
            tanhc[k] = t;
            xcothx[k] = g;
        }
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut tanc = [0.0; SERIES_TERMS];
        let mut cos = [0.0; SERIES_TERMS];
        let mut sinc = [0.0; SERIES_TERMS];
        for k in 0..SERIES_TERMS {
            tanc[k] = sign(k) * tanhc[k];
            cos[k] = sign(k) * ch[k];
            sinc[k] = sign(k) * sh[k];
        }
        Coefficients {
            tanhc,
            tanc,
            xcothx,
            cos,
            sinc,
        }
    })
}

fn small_norm(x: &Matrix) -> f64 {
    x.norm_inf().min(x.norm_one())
}

/// Smallest `s` with `‖X‖ / 4^s ≤ 1/4`, i.e. `‖√X‖ ≲ 1/2` after scaling.
fn reduction_steps(norm: f64) -> i32 {
    let mut s = 0;
    let mut n = norm;
    while n > 0.25 {
        n *= 0.25;
        s += 1;
    }
    s
}

/// Horner evaluation of `Σ c_k X^k`, truncated once the tail is below
/// round-off for the given norm bound of `X`.
fn series(x: &Matrix, norm: f64, c: &[f64; SERIES_TERMS]) -> Matrix {
    let mut terms = SERIES_TERMS;
    let mut pow = 1.0;
    for (k, ck) in c.iter().enumerate().skip(1) {
        pow *= norm;
        if (ck * pow).abs() < 1e-18 {
            terms = k;
            break;
        }
    }
    let mut p = Matrix::scalar(x.dim(), c[terms - 1]);
    for k in (0..terms - 1).rev() {
        p = p.matmul(x).add_diag(c[k]);
    }
    p
}

/// Evaluates `f(M)` given only `X = M²`.
pub fn even_fn_sq(x: &Matrix, kind: EvenKind) -> Result<Matrix> {
    x.check_finite("even function argument")?;
    if kind == EvenKind::Tanc {
        let limit = FRAC_PI_2 - TANC_MARGIN;
        let bound = spectral_bound_below(x, limit * limit)?.sqrt();
        if bound >= limit {
            return Err(Error::ArgumentTooLarge { bound, limit });
        }
    }
    let coeffs = coefficients();
    let norm = small_norm(x);
    let s = reduction_steps(norm);
    let mut xs = x.scale(0.25f64.powi(s));
    let scaled_norm = norm * 0.25f64.powi(s);
    let mut f = match kind {
        EvenKind::Tanhc => series(&xs, scaled_norm, &coeffs.tanhc),
        EvenKind::Tanc => series(&xs, scaled_norm, &coeffs.tanc),
        EvenKind::XCothX => series(&xs, scaled_norm, &coeffs.xcothx),
    };
    for _ in 0..s {
        // c(2z) = c / (1 ± z² c²) for the tanh/tan quotients,
        // g(2z) = (g² + z²) / g for z coth z.
        f = match kind {
            EvenKind::Tanhc => {
                let den = xs.matmul(&f.matmul(&f)).add_diag(1.0);
                solve_matrix(&den, &f)?
            }
            EvenKind::Tanc => {
                let den = xs.matmul(&f.matmul(&f)).scale(-1.0).add_diag(1.0);
                solve_matrix(&den, &f)?
            }
            EvenKind::XCothX => {
                let num = &f.matmul(&f) + &xs;
                solve_matrix(&f, &num)?
            }
        };
        xs = xs.scale(4.0);
    }
    f.check_finite("even function result")?;
    Ok(f)
}

/// `f(M)` for the even function `kind`, computed from `M²`.
pub fn even_fn(m: &Matrix, kind: EvenKind) -> Result<Matrix> {
    m.check_finite("even function argument")?;
    even_fn_sq(&m.matmul(m), kind)
}

/// `(cos √X, sin √X / √X)` for a matrix argument `X`.
pub fn cos_sinc_sq(x: &Matrix) -> Result<(Matrix, Matrix)> {
    x.check_finite("cos/sinc argument")?;
    let coeffs = coefficients();
    let norm = small_norm(x);
    let s = reduction_steps(norm);
    let xs = x.scale(0.25f64.powi(s));
    let scaled_norm = norm * 0.25f64.powi(s);
    let mut c = series(&xs, scaled_norm, &coeffs.cos);
    let mut sc = series(&xs, scaled_norm, &coeffs.sinc);
    for _ in 0..s {
        // sinc(2z) = sinc(z) cos(z), cos(2z) = 2cos²(z) − 1
        sc = sc.matmul(&c);
        c = c.matmul(&c).scale(2.0).add_diag(-1.0);
    }
    c.check_finite("cos result")?;
    sc.check_finite("sinc result")?;
    Ok((c, sc))
}

/// Scalar `tan(√q)/√q`, analytically continued to `q < 0` as `tanh(√-q)/√-q`.
pub fn tanc_of_square(q: f64) -> f64 {
    if q.abs() < 1e-4 {
        1.0 + q * (1.0 / 3.0 + q * (2.0 / 15.0 + q * (17.0 / 315.0)))
    } else if q > 0.0 {
        let z = q.sqrt();
        z.tan() / z
    } else {
        let z = (-q).sqrt();
        z.tanh() / z
    }
}

/// Scalar `√q cot √q`, continued to `q < 0` as `√-q coth √-q`.
pub fn zcotz_of_square(q: f64) -> f64 {
    if q.abs() < 1e-4 {
        1.0 - q * (1.0 / 3.0 + q * (1.0 / 45.0 + q * (2.0 / 945.0)))
    } else if q > 0.0 {
        let z = q.sqrt();
        z / z.tan()
    } else {
        let z = (-q).sqrt();
        z / z.tanh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn known_series_coefficients() {
        let c = coefficients();
        let tanhc = [1.0, -1.0 / 3.0, 2.0 / 15.0, -17.0 / 315.0, 62.0 / 2835.0];
        let xcothx = [1.0, 1.0 / 3.0, -1.0 / 45.0, 2.0 / 945.0, -1.0 / 4725.0];
        for k in 0..5 {
            assert!((c.tanhc[k] - tanhc[k]).abs() < 1e-16, "tanhc {k}");
            assert!((c.xcothx[k] - xcothx[k]).abs() < 1e-16, "xcothx {k}");
        }
    }

    #[test]
    fn all_kinds_are_identity_at_zero() {
        for kind in [EvenKind::Tanhc, EvenKind::Tanc, EvenKind::XCothX] {
            assert_eq!(
                even_fn(&Matrix::zeros(3), kind).unwrap(),
                Matrix::identity(3)
            );
        }
    }

    #[test]
    fn tanc_scalar_values() {
        let v = even_fn(&Matrix::diag(&[FRAC_PI_4]), EvenKind::Tanc).unwrap();
        assert!((v[(0, 0)] - 4.0 / PI).abs() < 1e-14);
        let err = even_fn(&Matrix::diag(&[PI / 2.0]), EvenKind::Tanc).unwrap_err();
        assert!(matches!(err, Error::ArgumentTooLarge { .. }));
    }

    #[test]
    fn scalar_kinds_match_libm() {
        for &z in &[0.05, 0.3, 0.9, 1.4, 2.5, 6.0] {
            let m = Matrix::diag(&[z]);
            let th = even_fn(&m, EvenKind::Tanhc).unwrap()[(0, 0)];
            assert!((th - z.tanh() / z).abs() < 1e-14, "tanhc {z}");
            let xc = even_fn(&m, EvenKind::XCothX).unwrap()[(0, 0)];
            assert!((xc - z / z.tanh()).abs() < 1e-13 * xc.abs(), "xcothx {z}");
            if z < FRAC_PI_2 - TANC_MARGIN {
                let tc = even_fn(&m, EvenKind::Tanc).unwrap()[(0, 0)];
                assert!((tc - z.tan() / z).abs() < 1e-13 * tc.abs(), "tanc {z}");
            }
        }
    }

    #[test]
    fn imaginary_argument_continuation() {
        // M = [[0, w], [-w, 0]] has M² = -w² I, so tanhc(M) = tan(w)/w.
        let w = 1.2;
        let m = Matrix::from_rows(&[&[0.0, w], &[-w, 0.0]]).unwrap();
        let th = even_fn(&m, EvenKind::Tanhc).unwrap();
        assert!((th[(0, 0)] - w.tan() / w).abs() < 1e-13);
        assert!(th[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn cos_sinc_scalar() {
        for &z in &[0.0, 0.4, 1.0, 3.0, 10.0] {
            let (c, s) = cos_sinc_sq(&Matrix::diag(&[z * z])).unwrap();
            assert!((c[(0, 0)] - z.cos()).abs() < 1e-13, "cos {z}");
            let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
            assert!((s[(0, 0)] - sinc).abs() < 1e-13, "sinc {z}");
        }
    }

    #[test]
    fn scalar_helpers() {
        for &q in &[-4.0, -0.5, -1e-6, 0.0, 1e-6, 0.5, 2.0] {
            let t = tanc_of_square(q);
            let g = zcotz_of_square(q);
            assert!((t * g - 1.0).abs() < 1e-14, "q={q}");
        }
        assert!((tanc_of_square(FRAC_PI_4 * FRAC_PI_4) - 4.0 / PI).abs() < 1e-15);
    }
}
