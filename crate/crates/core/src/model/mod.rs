//! Problem definitions: vector fields with Jacobians, canonical Hamiltonian
//! systems with their derivative blocks, and reference-point policies.

mod problems;

pub use problems::{
    registry, CoupledLinear, HenonHeiles, Kepler, NonSeparable, Pendulum, Problem,
    QuadraticHamiltonian, Quartic, PROBLEM_NAMES,
};

use crate::error::{Error, Result};
use crate::exact_linear::LinearSystem;
use crate::matfun::{Matrix, Vector};

/// Autonomous vector field `ẏ = F(y)` with its Jacobian.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> Result<Vector>;
    fn jacobian(&self, y: &[f64]) -> Result<Matrix>;

    /// Returns `(A, b)` when the field is affine, `F(y) = A y + b`.
    fn linear_part(&self) -> Option<LinearSystem> {
        None
    }
}

/// Second derivatives of `H(x, p)`; `xp[(i, k)] = ∂²H/∂xⁱ∂pᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianBlocks {
    pub xx: Matrix,
    pub xp: Matrix,
    pub pp: Matrix,
}

impl HessianBlocks {
    /// Full Hessian in the ordering `y = (x, p)`.
    pub fn full(&self) -> Matrix {
        Matrix::from_blocks(&self.xx, &self.xp, &self.xp.transpose(), &self.pp)
    }
}

/// Canonical Hamiltonian system with `m` degrees of freedom.
///
/// States are `y = (x¹..xᵐ, p¹..pᵐ)`. The gradient is returned in the same
/// ordering, `(H_x, H_p)`.
pub trait Hamiltonian: Send + Sync {
    fn dof(&self) -> usize;
    fn energy(&self, y: &[f64]) -> Result<f64>;
    fn gradient(&self, y: &[f64]) -> Result<Vector>;
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks>;

    /// `true` when `H = T(p) + V(x)`, i.e. `H_xp ≡ 0`.
    fn is_separable(&self) -> bool {
        false
    }

    /// Affine form of the Hamiltonian field when `H` is quadratic.
    fn linear_part(&self) -> Option<LinearSystem> {
        None
    }
}

/// A problem handed to the step maps: a plain vector field or a Hamiltonian.
#[derive(Clone, Copy)]
pub enum System<'a> {
    Field(&'a dyn VectorField),
    Hamiltonian(&'a dyn Hamiltonian),
}

impl<'a> System<'a> {
    pub fn dim(&self) -> usize {
        match self {
            System::Field(f) => f.dim(),
            System::Hamiltonian(h) => 2 * h.dof(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<Vector> {
        match self {
            System::Field(f) => f.eval(y),
            System::Hamiltonian(h) => hamiltonian_field(*h, y),
        }
    }

    pub fn jacobian(&self, y: &[f64]) -> Result<Matrix> {
        match self {
            System::Field(f) => f.jacobian(y),
            System::Hamiltonian(h) => hamiltonian_jacobian(*h, y),
        }
    }

    pub fn linear_part(&self) -> Option<LinearSystem> {
        match self {
            System::Field(f) => f.linear_part(),
            System::Hamiltonian(h) => h.linear_part(),
        }
    }

    pub fn hamiltonian(&self) -> Option<&'a dyn Hamiltonian> {
        match self {
            System::Field(_) => None,
            System::Hamiltonian(h) => Some(*h),
        }
    }
}

/// The Hamiltonian vector field as a [`VectorField`].
pub struct HamiltonianField<'a>(pub &'a dyn Hamiltonian);

impl VectorField for HamiltonianField<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dof()
    }
    fn eval(&self, y: &[f64]) -> Result<Vector> {
        hamiltonian_field(self.0, y)
    }
    fn jacobian(&self, y: &[f64]) -> Result<Matrix> {
        hamiltonian_jacobian(self.0, y)
    }
    fn linear_part(&self) -> Option<LinearSystem> {
        self.0.linear_part()
    }
}

/// `S = [[0, I], [-I, 0]]` of size `2m`.
pub fn canonical_structure(m: usize) -> Matrix {
    let mut s = Matrix::zeros(2 * m);
    for i in 0..m {
        s[(i, m + i)] = 1.0;
        s[(m + i, i)] = -1.0;
    }
    s
}

fn check_state(sys: &dyn Hamiltonian, y: &[f64]) -> Result<()> {
    if y.len() != 2 * sys.dof() {
        return Err(Error::DimensionMismatch {
            expected: 2 * sys.dof(),
            got: y.len(),
        });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("state"));
    }
    Ok(())
}

/// `F(y) = S ∇H(y) = (H_p, −H_x)`.
pub fn hamiltonian_field(sys: &dyn Hamiltonian, y: &[f64]) -> Result<Vector> {
    check_state(sys, y)?;
    let m = sys.dof();
    let g = sys.gradient(y)?;
    let g = g.as_slice();
    let mut f = Vec::with_capacity(2 * m);
    f.extend_from_slice(&g[m..]);
    f.extend(g[..m].iter().map(|v| -v));
    Vector::new(f)
}

/// `F'(y) = [[H_px, H_pp], [−H_xx, −H_xp]] = S H_yy`.
pub fn hamiltonian_jacobian(sys: &dyn Hamiltonian, y: &[f64]) -> Result<Matrix> {
    check_state(sys, y)?;
    let h = sys.hessian(y)?;
    let out = Matrix::from_blocks(
        &h.xp.transpose(),
        &h.pp,
        &h.xx.scale(-1.0),
        &h.xp.scale(-1.0),
    );
    out.check_finite("Hamiltonian Jacobian")?;
    Ok(out)
}

/// Rule choosing the linearization point `ȳ` of a step.
#[derive(Clone, Debug, PartialEq)]
pub enum RefPolicy {
    /// `ȳ = yₙ`
    Current,
    /// `ȳ = yₙ₊₁`
    Next,
    /// `ȳ = (yₙ + yₙ₊₁)/2`
    Midpoint,
    /// A fixed point, typically an equilibrium.
    Fixed(Vector),
}

impl RefPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RefPolicy::Current => "current",
            RefPolicy::Next => "next",
            RefPolicy::Midpoint => "midpoint",
            RefPolicy::Fixed(_) => "fixed",
        }
    }

    /// Whether `ȳ` depends on the unknown `yₙ₊₁`.
    pub fn depends_on_next(&self) -> bool {
        matches!(self, RefPolicy::Next | RefPolicy::Midpoint)
    }
}

/// Resolves the reference point; `y_next` may be an iterate of an implicit solve.
pub fn resolve_reference(policy: &RefPolicy, y_n: &Vector, y_next: &Vector) -> Result<Vector> {
    if y_n.dim() != y_next.dim() {
        return Err(Error::DimensionMismatch {
            expected: y_n.dim(),
            got: y_next.dim(),
        });
    }
    match policy {
        RefPolicy::Current => Ok(y_n.clone()),
        RefPolicy::Next => Ok(y_next.clone()),
        RefPolicy::Midpoint => Ok(y_n.midpoint(y_next)),
        RefPolicy::Fixed(p) => {
            if p.dim() != y_n.dim() {
                Err(Error::DimensionMismatch {
                    expected: y_n.dim(),
                    got: p.dim(),
                })
            } else {
                Ok(p.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x)
    }

    #[test]
    fn structure_matrix_identities() {
        for m in 1..4 {
            let s = canonical_structure(m);
            assert_eq!(s.transpose(), s.scale(-1.0));
            assert_eq!(s.matmul(&s), Matrix::scalar(2 * m, -1.0));
        }
    }

    #[test]
    fn field_examples() {
        let osc = QuadraticHamiltonian::harmonic(1);
        assert_eq!(
            hamiltonian_field(&osc, &[1.0, 0.0]).unwrap().as_slice(),
            &[0.0, -1.0]
        );
        let pend = Pendulum;
        let f = hamiltonian_field(&pend, &[FRAC_PI_2, 2.0]).unwrap();
        assert_eq!(f.as_slice(), &[2.0, -1.0]);
        assert_eq!(
            hamiltonian_field(&pend, &[0.0, 0.0]).unwrap().as_slice(),
            &[0.0, -0.0]
        );
    }

    #[test]
    fn jacobian_examples() {
        let rot = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let osc = QuadraticHamiltonian::harmonic(1);
        assert_eq!(hamiltonian_jacobian(&osc, &[0.3, -2.0]).unwrap(), rot);
        assert_eq!(hamiltonian_jacobian(&Pendulum, &[0.0, 0.7]).unwrap(), rot);
    }

    #[test]
    fn jacobian_is_structure_times_hessian() {
        let sys = NonSeparable;
        let y = [0.4, -1.3];
        let j = hamiltonian_jacobian(&sys, &y).unwrap();
        let sh = canonical_structure(1).matmul(&sys.hessian(&y).unwrap().full());
        assert!(j.max_abs_diff(&sh) < 1e-15);
    }

    #[test]
    fn reference_policies() {
        let a = v(&[0.0, 0.0]);
        let b = v(&[2.0, 4.0]);
        assert_eq!(
            resolve_reference(&RefPolicy::Midpoint, &a, &b).unwrap(),
            v(&[1.0, 2.0])
        );
        assert_eq!(resolve_reference(&RefPolicy::Current, &a, &b).unwrap(), a);
        assert_eq!(resolve_reference(&RefPolicy::Next, &a, &b).unwrap(), b);
        let fixed = RefPolicy::Fixed(v(&[1.0, 1.0]));
        assert_eq!(resolve_reference(&fixed, &a, &b).unwrap(), v(&[1.0, 1.0]));
        let bad = RefPolicy::Fixed(v(&[1.0]));
        assert!(matches!(
            resolve_reference(&bad, &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(resolve_reference(&RefPolicy::Current, &a, &v(&[1.0])).is_err());
    }

    #[test]
    fn state_dimension_checked() {
        assert!(matches!(
            hamiltonian_field(&Pendulum, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            hamiltonian_field(&Pendulum, &[f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }
}
