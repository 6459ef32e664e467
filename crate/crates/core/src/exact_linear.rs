//! Exact discretizations of linear constant-coefficient systems and of the
//! driven multidimensional harmonic oscillator `ẍ + Ω²x = a`.
//!
//! All step sizes may be negative or zero: the exact flow is a group.

use crate::error::{Error, Result};
use crate::matfun::{cos_sinc_sq, expm_phi1, Lu, Matrix, Vector};
use crate::model::VectorField;

/// Affine field `ẋ = A x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
    b: Vector,
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        a.check_finite("linear system matrix")?;
        if !b.is_finite() {
            return Err(Error::NonFinite("linear system offset"));
        }
        Ok(LinearSystem { a, b })
    }

    /// `ẋ = A x`
    pub fn homogeneous(a: Matrix) -> Self {
        let d = a.dim();
        LinearSystem {
            a,
            b: Vector::zeros(d),
        }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

impl VectorField for LinearSystem {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn eval(&self, y: &[f64]) -> Result<Vector> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        let out = &self.a.mul_vec(y) + &self.b;
        if !out.is_finite() {
            return Err(Error::NonFinite("linear field value"));
        }
        Ok(out)
    }

    fn jacobian(&self, _y: &[f64]) -> Result<Matrix> {
        Ok(self.a.clone())
    }

    fn linear_part(&self) -> Option<LinearSystem> {
        Some(self.clone())
    }
}

fn check_step(h: f64) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("step size"))
    }
}

/// `xₙ₊₁ = xₙ + h φ₁(hA)(A xₙ + b)`, the exact flow over time `h`.
pub fn exact_step_linear(sys: &LinearSystem, x: &Vector, h: f64) -> Result<Vector> {
    check_step(h)?;
    let f = sys.eval(x.as_slice())?;
    let delta = exact_delta(sys, h)?;
    let out = x + &delta.mul_vec(f.as_slice());
    if !out.is_finite() {
        return Err(Error::NonFinite("exact linear step"));
    }
    Ok(out)
}

/// The matrix time step `Δ = h φ₁(hA) = A⁻¹(e^{hA} − I)`; no inverse is formed.
pub fn exact_delta(sys: &LinearSystem, h: f64) -> Result<Matrix> {
    check_step(h)?;
    let (_, p) = expm_phi1(&sys.a.scale(h))?;
    Ok(p.scale(h))
}

/// `ẍ + Ω² x = a`, written as `ẋ = p`, `ṗ = −Ω² x + a`.
#[derive(Clone, Debug)]
pub struct HarmonicOscillator {
    omega: Matrix,
    omega_sq: Matrix,
    a: Vector,
    symmetric: bool,
}

impl HarmonicOscillator {
    pub fn new(omega: Matrix, a: Vector) -> Result<Self> {
        if omega.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: omega.dim(),
                got: a.dim(),
            });
        }
        omega.check_finite("oscillator frequency matrix")?;
        if !a.is_finite() {
            return Err(Error::NonFinite("oscillator forcing"));
        }
        let symmetric = omega.is_symmetric(1e-13);
        let omega_sq = omega.matmul(&omega);
        Ok(HarmonicOscillator {
            omega,
            omega_sq,
            a,
            symmetric,
        })
    }

    pub fn omega(&self) -> &Matrix {
        &self.omega
    }

    pub fn omega_sq(&self) -> &Matrix {
        &self.omega_sq
    }

    pub fn forcing(&self) -> &Vector {
        &self.a
    }

    /// `Ωᵀ = Ω` within 1e-13.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn dof(&self) -> usize {
        self.omega.dim()
    }

    /// First-order form `(x, p)' = [[0, I], [−Ω², 0]] (x, p) + (0, a)`.
    pub fn first_order(&self) -> LinearSystem {
        let m = self.dof();
        let a = Matrix::from_blocks(
            &Matrix::zeros(m),
            &Matrix::identity(m),
            &self.omega_sq.scale(-1.0),
            &Matrix::zeros(m),
        );
        LinearSystem {
            a,
            b: Vector::concat(&vec![0.0; m], self.a.as_slice()),
        }
    }
}

/// Exact step of the driven oscillator.
///
/// With `X = h²Ω²` the blocks are `cos Ωh = C(X)`, `Ω⁻¹ sin Ωh = h S(X)`,
/// `Ω sin Ωh = h Ω² S(X)` and `2Ω⁻² sin²(Ωh/2) = (h²/2) S(X/4)²`, where
/// `C` and `S` are the cosine and sinc series in the squared argument.
pub fn exact_step_oscillator(
    osc: &HarmonicOscillator,
    x: &Vector,
    p: &Vector,
    h: f64,
) -> Result<(Vector, Vector)> {
    check_step(h)?;
    let m = osc.dof();
    for v in [x, p] {
        if v.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.dim(),
            });
        }
    }
    let forced = osc.a.max_abs() != 0.0;
    if forced {
        // The forcing terms are defined through Ω⁻¹.
        Lu::factor(&osc.omega)?;
    }
    let xq = osc.omega_sq.scale(h * h);
    let (c, s) = cos_sinc_sq(&xq)?;
    let sin_over = s.scale(h);
    let omega_sin = osc.omega_sq.matmul(&s).scale(h);
    let mut x_next = &c.mul_vec(x.as_slice()) + &sin_over.mul_vec(p.as_slice());
    let mut p_next = &c.mul_vec(p.as_slice()) - &omega_sin.mul_vec(x.as_slice());
    if forced {
        let (_, s_half) = cos_sinc_sq(&xq.scale(0.25))?;
        let vers = s_half.matmul(&s_half).scale(0.5 * h * h);
        x_next += &vers.mul_vec(osc.a.as_slice());
        p_next += &sin_over.mul_vec(osc.a.as_slice());
    }
    if !(x_next.is_finite() && p_next.is_finite()) {
        return Err(Error::NonFinite("oscillator step"));
    }
    Ok((x_next, p_next))
}

/// `I = ½⟨p, p⟩ + ½⟨x, Ω²x⟩ − ⟨x, a⟩`, conserved when `Ω` is symmetric.
pub fn oscillator_energy(osc: &HarmonicOscillator, x: &Vector, p: &Vector) -> Result<f64> {
    if !osc.symmetric {
        return Err(Error::NotSymmetric);
    }
    let wx = osc.omega_sq.mul_vec(x.as_slice());
    Ok(0.5 * p.dot(p) + 0.5 * x.dot(&wx) - x.dot(&osc.a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, LN_2, PI};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x)
    }

    #[test]
    fn scalar_linear_steps() {
        let decay = LinearSystem::homogeneous(Matrix::diag(&[-1.0]));
        let y = exact_step_linear(&decay, &v(&[1.0]), LN_2).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);

        let driven = LinearSystem::new(Matrix::diag(&[-1.0]), v(&[1.0])).unwrap();
        let y = exact_step_linear(&driven, &v(&[0.0]), LN_2).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);

        let rot =
            LinearSystem::homogeneous(Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap());
        let y = exact_step_linear(&rot, &v(&[1.0, 0.0]), FRAC_PI_2).unwrap();
        assert!(y[0].abs() < 1e-15 && (y[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_values() {
        let sys = LinearSystem::homogeneous(Matrix::diag(&[1.0]));
        assert!((exact_delta(&sys, 1.0).unwrap()[(0, 0)] - (1f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(exact_delta(&sys, 0.0).unwrap().max_abs(), 0.0);
        let a = Matrix::from_rows(&[&[0.3, -1.2], &[0.7, 0.1]]).unwrap();
        let sys = LinearSystem::homogeneous(a.clone());
        for &h in &[1e-2, 1e-3, -1e-3] {
            let d = exact_delta(&sys, h).unwrap().scale(1.0 / h);
            let dev = d.max_abs_diff(&Matrix::identity(2));
            assert!(dev <= a.norm_inf() * h.abs());
        }
    }

    #[test]
    fn nonfinite_step_rejected() {
        let sys = LinearSystem::homogeneous(Matrix::identity(1));
        assert!(matches!(
            exact_step_linear(&sys, &v(&[1.0]), f64::NAN),
            Err(Error::NonFinite(_))
        ));
        assert!(LinearSystem::new(Matrix::identity(2), v(&[1.0])).is_err());
    }

    #[test]
    fn oscillator_examples() {
        let osc = HarmonicOscillator::new(Matrix::identity(1), v(&[0.0])).unwrap();
        let (x, p) = exact_step_oscillator(&osc, &v(&[1.0]), &v(&[0.0]), FRAC_PI_2).unwrap();
        assert!(x[0].abs() < 1e-15 && (p[0] + 1.0).abs() < 1e-15);

        let forced = HarmonicOscillator::new(Matrix::identity(1), v(&[1.0])).unwrap();
        let (x, p) = exact_step_oscillator(&forced, &v(&[0.0]), &v(&[0.0]), PI).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14 && p[0].abs() < 1e-14);
    }

    #[test]
    fn oscillator_matches_block_exponential() {
        let omega =
            Matrix::from_rows(&[&[1.3, 0.4, 0.0], &[-0.2, 0.9, 0.5], &[0.1, 0.0, 2.0]]).unwrap();
        let a = v(&[0.3, -0.5, 0.8]);
        let osc = HarmonicOscillator::new(omega, a).unwrap();
        let sys = osc.first_order();
        let x = v(&[0.2, -1.0, 0.4]);
        let p = v(&[0.5, 0.1, -0.3]);
        for &h in &[0.1, 0.7, -1.3, 4.0] {
            let (xn, pn) = exact_step_oscillator(&osc, &x, &p, h).unwrap();
            let y =
                exact_step_linear(&sys, &Vector::concat(x.as_slice(), p.as_slice()), h).unwrap();
            let scale = 1.0 + y.max_abs();
            for i in 0..3 {
                assert!((xn[i] - y[i]).abs() < 1e-12 * scale, "h={h}");
                assert!((pn[i] - y[3 + i]).abs() < 1e-12 * scale, "h={h}");
            }
        }
    }

    #[test]
    fn singular_frequency_with_forcing() {
        let osc = HarmonicOscillator::new(Matrix::diag(&[1.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        let err = exact_step_oscillator(&osc, &v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 0.1).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
        // Free motion needs no inverse.
        let free = HarmonicOscillator::new(Matrix::diag(&[1.0, 0.0]), v(&[0.0, 0.0])).unwrap();
        let (x, p) = exact_step_oscillator(&free, &v(&[0.0, 1.0]), &v(&[0.0, 2.0]), 0.5).unwrap();
        assert!((x[1] - 2.0).abs() < 1e-15 && (p[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn energy_values() {
        let osc = HarmonicOscillator::new(Matrix::identity(1), v(&[0.0])).unwrap();
        assert_eq!(
            oscillator_energy(&osc, &v(&[1.0]), &v(&[0.0])).unwrap(),
            0.5
        );
        let forced = HarmonicOscillator::new(Matrix::identity(2), v(&[3.0, -1.0])).unwrap();
        assert_eq!(
            oscillator_energy(&forced, &v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap(),
            0.0
        );
        let skew = HarmonicOscillator::new(
            Matrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap(),
            v(&[0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(
            oscillator_energy(&skew, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap_err(),
            Error::NotSymmetric
        );
    }
}
