//! Discrete gradients of a Hamiltonian and their linearization matrices.
//!
//! Coordinates are ordered `y = (x¹..xᵐ, p¹..pᵐ)`. The coordinate-increment
//! gradient moves one coordinate at a time from `yₙ` to `yₙ₊₁`; the symmetric
//! gradient averages it over both argument orders.

use crate::error::{Error, Result};
use crate::matfun::{Matrix, Vector};
use crate::model::Hamiltonian;

/// Below `LIMIT_RTOL·(1+|yʲ|)` the quotient is replaced by its limit `∂H/∂yʲ`.
pub const LIMIT_RTOL: f64 = 1e-12;

/// Below `QUADRATURE_RTOL·(1+|yʲ|)` the quotient is evaluated as the mean of
/// `∂H/∂yʲ` over the segment (three-point Gauss–Legendre), which is the same
/// number in exact arithmetic but does not divide a rounded difference of
/// energies by a tiny increment.
pub const QUADRATURE_RTOL: f64 = 1e-3;

/// A vector `∇̄H(yₙ, yₙ₊₁)` with `⟨∇̄H, yₙ₊₁ − yₙ⟩ = H(yₙ₊₁) − H(yₙ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGradient {
    pub value: Vector,
}

impl DiscreteGradient {
    pub fn as_slice(&self) -> &[f64] {
        self.value.as_slice()
    }

    /// `|⟨∇̄H, Δy⟩ − ΔH|` for the pair the gradient was built from.
    pub fn identity_residual(
        &self,
        sys: &dyn Hamiltonian,
        y_n: &[f64],
        y_np1: &[f64],
    ) -> Result<f64> {
        let lhs: f64 = self
            .value
            .iter()
            .zip(y_n.iter().zip(y_np1))
            .map(|(g, (a, b))| g * (b - a))
            .sum();
        let rhs = sys.energy(y_np1)? - sys.energy(y_n)?;
        Ok((lhs - rhs).abs())
    }
}

/// `A`, `B = Aᵀ` and `R = A − B` from the Hessian at the reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationTriple {
    pub a: Matrix,
    pub b: Matrix,
    pub r: Matrix,
}

fn check_pair(sys: &dyn Hamiltonian, y_n: &[f64], y_np1: &[f64]) -> Result<()> {
    let d = 2 * sys.dof();
    for y in [y_n, y_np1] {
        if y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("discrete gradient argument"));
        }
    }
    Ok(())
}

// Nodes and weights of Gauss–Legendre quadrature on [0, 1].
const GL_NODES: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GL_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Increment gradient written into `out`; `point` is scratch of length `2m`.
pub(crate) fn increment_into(
    sys: &dyn Hamiltonian,
    y_n: &[f64],
    y_np1: &[f64],
    point: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    point.copy_from_slice(y_n);
    let mut h_prev = sys.energy(point)?;
    for j in 0..y_n.len() {
        let from = y_n[j];
        let to = y_np1[j];
        let inc = to - from;
        let scale = 1.0 + from.abs();
        if inc.abs() < LIMIT_RTOL * scale {
            out[j] = sys.gradient(point)?[j];
            point[j] = to;
            if inc != 0.0 {
                h_prev = sys.energy(point)?;
            }
        } else if inc.abs() < QUADRATURE_RTOL * scale {
            let mut acc = 0.0;
            for (s, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                point[j] = from + s * inc;
                acc += w * sys.gradient(point)?[j];
            }
            out[j] = acc;
            point[j] = to;
            h_prev = sys.energy(point)?;
        } else {
            point[j] = to;
            let h_next = sys.energy(point)?;
            out[j] = (h_next - h_prev) / inc;
            h_prev = h_next;
        }
        if !out[j].is_finite() {
            return Err(Error::NonFinite("discrete gradient"));
        }
    }
    Ok(())
}

/// Symmetric gradient written into `out`; `tmp` and `point` are scratch.
pub(crate) fn symmetric_into(
    sys: &dyn Hamiltonian,
    y_n: &[f64],
    y_np1: &[f64],
    point: &mut [f64],
    tmp: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    increment_into(sys, y_n, y_np1, point, out)?;
    increment_into(sys, y_np1, y_n, point, tmp)?;
    for (o, t) in out.iter_mut().zip(tmp.iter()) {
        *o = 0.5 * (*o + t);
    }
    Ok(())
}

/// Coordinate-increment discrete gradient.
pub fn increment_gradient(
    sys: &dyn Hamiltonian,
    y_n: &Vector,
    y_np1: &Vector,
) -> Result<DiscreteGradient> {
    check_pair(sys, y_n.as_slice(), y_np1.as_slice())?;
    let d = y_n.dim();
    let mut point = vec![0.0; d];
    let mut out = vec![0.0; d];
    increment_into(sys, y_n.as_slice(), y_np1.as_slice(), &mut point, &mut out)?;
    Ok(DiscreteGradient {
        value: Vector::from_vec(out),
    })
}

/// `½[∇̄H(yₙ, yₙ₊₁) + ∇̄H(yₙ₊₁, yₙ)]`, invariant under swapping the arguments.
pub fn symmetric_gradient(
    sys: &dyn Hamiltonian,
    y_n: &Vector,
    y_np1: &Vector,
) -> Result<DiscreteGradient> {
    check_pair(sys, y_n.as_slice(), y_np1.as_slice())?;
    let d = y_n.dim();
    let mut point = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    let mut out = vec![0.0; d];
    symmetric_into(
        sys,
        y_n.as_slice(),
        y_np1.as_slice(),
        &mut point,
        &mut tmp,
        &mut out,
    )?;
    Ok(DiscreteGradient {
        value: Vector::from_vec(out),
    })
}

/// Splits a Hessian into `A` (strict lower part plus half the diagonal),
/// `B = Aᵀ` and `R = A − B`.
pub fn linearization_from_hessian(hess: &Matrix) -> LinearizationTriple {
    let d = hess.dim();
    let mut a = Matrix::zeros(d);
    for i in 0..d {
        for k in 0..i {
            a[(i, k)] = hess[(i, k)];
        }
        a[(i, i)] = 0.5 * hess[(i, i)];
    }
    let b = a.transpose();
    let r = &a - &b;
    LinearizationTriple { a, b, r }
}

/// Linearization matrices of the increment gradient at `ȳ`:
/// `∇̄H(yₙ, yₙ₊₁) ≈ ∇H(ȳ) + A νₙ₊₁ + B νₙ` with `ν = y − ȳ`.
pub fn linearization_matrices(
    sys: &dyn Hamiltonian,
    y_bar: &Vector,
) -> Result<LinearizationTriple> {
    let d = 2 * sys.dof();
    if y_bar.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y_bar.dim(),
        });
    }
    if !y_bar.is_finite() {
        return Err(Error::NonFinite("linearization point"));
    }
    let hess = sys.hessian(y_bar.as_slice())?.full();
    hess.check_finite("Hessian")?;
    Ok(linearization_from_hessian(&hess))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NonSeparable, Pendulum, QuadraticHamiltonian};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x)
    }

    #[test]
    fn coincident_points_give_gradient() {
        let y = v(&[0.7, -0.3]);
        let g = increment_gradient(&NonSeparable, &y, &y).unwrap();
        assert_eq!(g.value, NonSeparable.gradient(y.as_slice()).unwrap());
        let s = symmetric_gradient(&Pendulum, &y, &y).unwrap();
        assert_eq!(s.value, Pendulum.gradient(y.as_slice()).unwrap());
    }

    #[test]
    fn quadratic_hand_example() {
        let osc = QuadraticHamiltonian::harmonic(1);
        let g = increment_gradient(&osc, &v(&[0.0, 0.0]), &v(&[2.0, 2.0])).unwrap();
        assert_eq!(g.value.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn pendulum_identity() {
        let (a, b) = (v(&[0.0, 1.0]), v(&[0.1, 0.9]));
        for g in [
            increment_gradient(&Pendulum, &a, &b).unwrap(),
            symmetric_gradient(&Pendulum, &a, &b).unwrap(),
        ] {
            assert!(
                g.identity_residual(&Pendulum, a.as_slice(), b.as_slice())
                    .unwrap()
                    < 1e-14
            );
        }
    }

    #[test]
    fn swap_symmetry_is_bit_exact() {
        let (a, b) = (v(&[0.4, -1.1]), v(&[-0.2, 0.6]));
        let s1 = symmetric_gradient(&NonSeparable, &a, &b).unwrap();
        let s2 = symmetric_gradient(&NonSeparable, &b, &a).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn four_point_formula() {
        let h = |x: f64, p: f64| NonSeparable.energy(&[x, p]).unwrap();
        let (x0, p0, x1, p1) = (0.3, -0.8, 0.9, 0.25);
        let s = symmetric_gradient(&NonSeparable, &v(&[x0, p0]), &v(&[x1, p1])).unwrap();
        let gp = (h(x1, p1) + h(x0, p1) - h(x1, p0) - h(x0, p0)) / (2.0 * (p1 - p0));
        let gx = (h(x1, p1) + h(x1, p0) - h(x0, p1) - h(x0, p0)) / (2.0 * (x1 - x0));
        assert!((s.value[0] - gx).abs() < 1e-14);
        assert!((s.value[1] - gp).abs() < 1e-14);
    }

    #[test]
    fn small_increments_use_quadrature_consistently() {
        // Increments straddling the quadrature threshold give nearly equal values.
        let y = v(&[1.0, 0.5]);
        let below = v(&[1.0 + 1.99e-3, 0.5]);
        let above = v(&[1.0 + 2.01e-3, 0.5]);
        let gb = increment_gradient(&Pendulum, &y, &below).unwrap();
        let ga = increment_gradient(&Pendulum, &y, &above).unwrap();
        assert!((gb.value[0] - ga.value[0]).abs() < 1e-5);
        assert!(
            gb.identity_residual(&Pendulum, y.as_slice(), below.as_slice())
                .unwrap()
                < 1e-16
        );
    }

    #[test]
    fn diagonal_hessian_triple() {
        let t = linearization_from_hessian(&Matrix::diag(&[2.0, -4.0, 6.0]));
        assert_eq!(t.a, Matrix::diag(&[1.0, -2.0, 3.0]));
        assert_eq!(t.a, t.b);
        assert_eq!(t.r.max_abs(), 0.0);
    }

    #[test]
    fn mixed_term_triple() {
        let eps = 0.3;
        let q = Matrix::from_rows(&[&[1.0, eps], &[eps, 1.0]]).unwrap();
        let sys = QuadraticHamiltonian::new(q, Vector::zeros(2)).unwrap();
        let t = linearization_matrices(&sys, &v(&[0.1, 0.2])).unwrap();
        let expected = Matrix::from_rows(&[&[0.0, -eps], &[eps, 0.0]]).unwrap();
        assert_eq!(t.r, expected);
    }
}
