//! Built-in problems, each with analytic first and second derivatives.

use super::{Hamiltonian, HessianBlocks};
use crate::error::{Error, Result};
use crate::exact_linear::LinearSystem;
use crate::matfun::{Matrix, Vector};

/// `H = ½p² − cos x`
#[derive(Clone, Copy, Debug, Default)]
pub struct Pendulum;

impl Hamiltonian for Pendulum {
    fn dof(&self) -> usize {
        1
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        Ok(0.5 * y[1] * y[1] - y[0].cos())
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        Ok(Vector::from_vec(vec![y[0].sin(), y[1]]))
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        Ok(HessianBlocks {
            xx: Matrix::diag(&[y[0].cos()]),
            xp: Matrix::zeros(1),
            pp: Matrix::identity(1),
        })
    }
    fn is_separable(&self) -> bool {
        true
    }
}

/// `H = ½p² + ¼x⁴ + ½x²`
#[derive(Clone, Copy, Debug, Default)]
pub struct Quartic;

impl Hamiltonian for Quartic {
    fn dof(&self) -> usize {
        1
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        let x2 = y[0] * y[0];
        Ok(0.5 * y[1] * y[1] + 0.25 * x2 * x2 + 0.5 * x2)
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        let x = y[0];
        Ok(Vector::from_vec(vec![x * x * x + x, y[1]]))
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        Ok(HessianBlocks {
            xx: Matrix::diag(&[3.0 * y[0] * y[0] + 1.0]),
            xp: Matrix::zeros(1),
            pp: Matrix::identity(1),
        })
    }
    fn is_separable(&self) -> bool {
        true
    }
}

/// Hénon–Heiles: `H = ½(p₁²+p₂²) + ½(x₁²+x₂²) + x₁²x₂ − x₂³/3`
#[derive(Clone, Copy, Debug, Default)]
pub struct HenonHeiles;

impl Hamiltonian for HenonHeiles {
    fn dof(&self) -> usize {
        2
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        let (x1, x2, p1, p2) = (y[0], y[1], y[2], y[3]);
        Ok(
            0.5 * (p1 * p1 + p2 * p2) + 0.5 * (x1 * x1 + x2 * x2) + x1 * x1 * x2
                - x2 * x2 * x2 / 3.0,
        )
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        let (x1, x2, p1, p2) = (y[0], y[1], y[2], y[3]);
        Ok(Vector::from_vec(vec![
            x1 + 2.0 * x1 * x2,
            x2 + x1 * x1 - x2 * x2,
            p1,
            p2,
        ]))
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        let (x1, x2) = (y[0], y[1]);
        Ok(HessianBlocks {
            xx: Matrix::from_raw(2, vec![1.0 + 2.0 * x2, 2.0 * x1, 2.0 * x1, 1.0 - 2.0 * x2]),
            xp: Matrix::zeros(2),
            pp: Matrix::identity(2),
        })
    }
    fn is_separable(&self) -> bool {
        true
    }
}

/// Minimum distance from the attracting centre accepted by [`Kepler`].
pub const KEPLER_MIN_RADIUS: f64 = 1e-8;

/// Planar Kepler problem, `H = ½‖p‖² − 1/‖x‖`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kepler;

impl Kepler {
    fn radius(y: &[f64]) -> Result<f64> {
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if r < KEPLER_MIN_RADIUS {
            Err(Error::DomainViolation(format!(
                "Kepler radius {r:e} below {KEPLER_MIN_RADIUS:e}"
            )))
        } else {
            Ok(r)
        }
    }

    /// Periapsis state of the orbit with semi-major axis 1 and eccentricity `e`.
    pub fn periapsis_state(e: f64) -> Vector {
        Vector::from_vec(vec![1.0 - e, 0.0, 0.0, ((1.0 + e) / (1.0 - e)).sqrt()])
    }
}

impl Hamiltonian for Kepler {
    fn dof(&self) -> usize {
        2
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        let r = Self::radius(y)?;
        Ok(0.5 * (y[2] * y[2] + y[3] * y[3]) - 1.0 / r)
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        let r = Self::radius(y)?;
        let r3 = r * r * r;
        Ok(Vector::from_vec(vec![y[0] / r3, y[1] / r3, y[2], y[3]]))
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        let r = Self::radius(y)?;
        let r3 = r * r * r;
        let r5 = r3 * r * r;
        let (x1, x2) = (y[0], y[1]);
        let xx = Matrix::from_raw(
            2,
            vec![
                1.0 / r3 - 3.0 * x1 * x1 / r5,
                -3.0 * x1 * x2 / r5,
                -3.0 * x1 * x2 / r5,
                1.0 / r3 - 3.0 * x2 * x2 / r5,
            ],
        );
        Ok(HessianBlocks {
            xx,
            xp: Matrix::zeros(2),
            pp: Matrix::identity(2),
        })
    }
    fn is_separable(&self) -> bool {
        true
    }
}

/// Quadratic Hamiltonian `H = gᵀy + ½ yᵀ Q y` with symmetric `Q`.
///
/// Its Hamiltonian field is affine, which makes it the reference case for
/// exactness checks.
#[derive(Clone, Debug)]
pub struct QuadraticHamiltonian {
    q: Matrix,
    g: Vector,
}

impl QuadraticHamiltonian {
    pub fn new(q: Matrix, g: Vector) -> Result<Self> {
        if !q.dim().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: q.dim() + 1,
                got: q.dim(),
            });
        }
        if g.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: q.dim(),
                got: g.dim(),
            });
        }
        if !q.is_symmetric(1e-13 * q.max_abs().max(1.0)) {
            return Err(Error::NotSymmetric);
        }
        Ok(QuadraticHamiltonian { q, g })
    }

    /// `H = ½‖p‖² + ½‖x‖²` with `m` degrees of freedom.
    pub fn harmonic(m: usize) -> Self {
        QuadraticHamiltonian {
            q: Matrix::identity(2 * m),
            g: Vector::zeros(2 * m),
        }
    }

    /// `H = ½‖p‖² + ½⟨x, Ω² x⟩ − ⟨x, a⟩`.
    pub fn oscillator(omega_sq: &Matrix, a: &Vector) -> Result<Self> {
        let m = omega_sq.dim();
        let q = Matrix::from_blocks(
            omega_sq,
            &Matrix::zeros(m),
            &Matrix::zeros(m),
            &Matrix::identity(m),
        );
        let mut g = Vector::zeros(2 * m);
        for i in 0..m {
            g[i] = -a[i];
        }
        QuadraticHamiltonian::new(q, g)
    }

    pub fn hessian_matrix(&self) -> &Matrix {
        &self.q
    }
}

impl Hamiltonian for QuadraticHamiltonian {
    fn dof(&self) -> usize {
        self.q.dim() / 2
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        let qy = self.q.mul_vec(y);
        Ok(self
            .g
            .as_slice()
            .iter()
            .zip(y)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + 0.5 * qy.as_slice().iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        Ok(&self.q.mul_vec(y) + &self.g)
    }
    fn hessian(&self, _y: &[f64]) -> Result<HessianBlocks> {
        let m = self.dof();
        Ok(HessianBlocks {
            xx: self.q.block(0, 0, m),
            xp: self.q.block(0, m, m),
            pp: self.q.block(m, m, m),
        })
    }
    fn is_separable(&self) -> bool {
        let m = self.dof();
        self.q.block(0, m, m).max_abs() == 0.0
    }
    fn linear_part(&self) -> Option<LinearSystem> {
        // F(y) = S (Q y + g)
        let m = self.dof();
        let s = super::canonical_structure(m);
        let a = s.matmul(&self.q);
        let b = s.mul_vec(self.g.as_slice());
        LinearSystem::new(a, b).ok()
    }
}

/// Two coupled oscillators, `Ω² = [[2, −1], [−1, 2]]`.
#[derive(Clone, Debug)]
pub struct CoupledLinear(QuadraticHamiltonian);

impl CoupledLinear {
    pub fn omega_sq() -> Matrix {
        Matrix::from_raw(2, vec![2.0, -1.0, -1.0, 2.0])
    }
}

impl Default for CoupledLinear {
    fn default() -> Self {
        CoupledLinear(
            QuadraticHamiltonian::oscillator(&CoupledLinear::omega_sq(), &Vector::zeros(2))
                .expect("coupled oscillator is well formed"),
        )
    }
}

impl Hamiltonian for CoupledLinear {
    fn dof(&self) -> usize {
        2
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        self.0.energy(y)
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        self.0.gradient(y)
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        self.0.hessian(y)
    }
    fn is_separable(&self) -> bool {
        true
    }
    fn linear_part(&self) -> Option<LinearSystem> {
        self.0.linear_part()
    }
}

/// `H = ½p²/(1+x²) + ½x²`, a system with `H_xp ≠ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonSeparable;

impl Hamiltonian for NonSeparable {
    fn dof(&self) -> usize {
        1
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        let (x, p) = (y[0], y[1]);
        Ok(0.5 * p * p / (1.0 + x * x) + 0.5 * x * x)
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        let (x, p) = (y[0], y[1]);
        let w = 1.0 + x * x;
        Ok(Vector::from_vec(vec![-p * p * x / (w * w) + x, p / w]))
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        let (x, p) = (y[0], y[1]);
        let w = 1.0 + x * x;
        // d/dx [−p² x w⁻²] = −p² (w⁻² − 4x² w⁻³)
        let hxx = -p * p * (1.0 / (w * w) - 4.0 * x * x / (w * w * w)) + 1.0;
        let hxp = -2.0 * p * x / (w * w);
        let hpp = 1.0 / w;
        Ok(HessianBlocks {
            xx: Matrix::diag(&[hxx]),
            xp: Matrix::diag(&[hxp]),
            pp: Matrix::diag(&[hpp]),
        })
    }
}

/// Registry names, in listing order.
pub const PROBLEM_NAMES: [&str; 6] = [
    "pendulum",
    "quartic",
    "henon-heiles",
    "kepler",
    "coupled-linear",
    "nonseparable",
];

/// A named registry entry with a default initial state and the equilibria at
/// which the gradient vanishes exactly in floating point.
pub struct Problem {
    pub name: &'static str,
    pub description: &'static str,
    pub system: Box<dyn Hamiltonian>,
    pub default_y0: Vector,
    pub equilibria: Vec<Vector>,
}

impl Problem {
    pub fn dof(&self) -> usize {
        self.system.dof()
    }
}

/// Looks up a built-in problem by name.
pub fn registry(name: &str) -> Option<Problem> {
    let v = |x: &[f64]| Vector::from_slice(x);
    let p = match name {
        "pendulum" => Problem {
            name: "pendulum",
            description: "H = p^2/2 - cos x",
            system: Box::new(Pendulum),
            default_y0: v(&[2.0, 0.0]),
            equilibria: vec![v(&[0.0, 0.0])],
        },
        "quartic" => Problem {
            name: "quartic",
            description: "H = p^2/2 + x^4/4 + x^2/2",
            system: Box::new(Quartic),
            default_y0: v(&[1.0, 0.0]),
            equilibria: vec![v(&[0.0, 0.0])],
        },
        "henon-heiles" => Problem {
            name: "henon-heiles",
            description: "H = |p|^2/2 + |x|^2/2 + x1^2 x2 - x2^3/3",
            system: Box::new(HenonHeiles),
            default_y0: v(&[0.1, 0.0, 0.0, 0.3]),
            equilibria: vec![v(&[0.0, 0.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0, 0.0])],
        },
        "kepler" => Problem {
            name: "kepler",
            description: "H = |p|^2/2 - 1/|x| (planar)",
            system: Box::new(Kepler),
            default_y0: Kepler::periapsis_state(0.6),
            equilibria: vec![],
        },
        "coupled-linear" => Problem {
            name: "coupled-linear",
            description: "H = |p|^2/2 + <x, W x>/2, W = [[2,-1],[-1,2]]",
            system: Box::new(CoupledLinear::default()),
            default_y0: v(&[1.0, 0.0, 0.0, 0.5]),
            equilibria: vec![v(&[0.0, 0.0, 0.0, 0.0])],
        },
        "nonseparable" => Problem {
            name: "nonseparable",
            description: "H = p^2/(2(1+x^2)) + x^2/2",
            system: Box::new(NonSeparable),
            default_y0: v(&[0.5, 0.5]),
            equilibria: vec![v(&[0.0, 0.0])],
        },
        _ => return None,
    };
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(h: &dyn Hamiltonian, y: &[f64]) -> Vec<f64> {
        let eps = 1e-6;
        (0..y.len())
            .map(|j| {
                let mut a = y.to_vec();
                let mut b = y.to_vec();
                a[j] += eps;
                b[j] -= eps;
                (h.energy(&a).unwrap() - h.energy(&b).unwrap()) / (2.0 * eps)
            })
            .collect()
    }

    fn fd_hessian(h: &dyn Hamiltonian, y: &[f64]) -> Matrix {
        let eps = 1e-6;
        let n = y.len();
        let mut out = Matrix::zeros(n);
        for j in 0..n {
            let mut a = y.to_vec();
            let mut b = y.to_vec();
            a[j] += eps;
            b[j] -= eps;
            let ga = h.gradient(&a).unwrap();
            let gb = h.gradient(&b).unwrap();
            for i in 0..n {
                out[(i, j)] = (ga[i] - gb[i]) / (2.0 * eps);
            }
        }
        out
    }

    #[test]
    fn registry_derivatives_match_finite_differences() {
        let states: [&[f64]; 3] = [
            &[0.3, -0.7, 0.9, 0.2],
            &[1.1, 0.4, -0.5, 1.3],
            &[-0.6, 0.8, 0.1, -0.4],
        ];
        for name in PROBLEM_NAMES {
            let prob = registry(name).unwrap();
            let n = 2 * prob.dof();
            for s in states {
                let y = &s[..n];
                let g = prob.system.gradient(y).unwrap();
                for (a, b) in g.iter().zip(fd_gradient(prob.system.as_ref(), y)) {
                    assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{name} grad");
                }
                let hess = prob.system.hessian(y).unwrap();
                assert!(hess.xx.is_symmetric(1e-13) && hess.pp.is_symmetric(1e-13));
                let full = hess.full();
                let fd = fd_hessian(prob.system.as_ref(), y);
                assert!(
                    full.max_abs_diff(&fd) <= 1e-5 * (1.0 + full.max_abs()),
                    "{name} hess"
                );
            }
        }
    }

    #[test]
    fn equilibria_have_exactly_zero_gradient() {
        for name in PROBLEM_NAMES {
            let prob = registry(name).unwrap();
            for e in &prob.equilibria {
                assert_eq!(
                    prob.system.gradient(e.as_slice()).unwrap().max_abs(),
                    0.0,
                    "{name}"
                );
            }
        }
    }

    #[test]
    fn kepler_domain_guard() {
        let err = Kepler.energy(&[0.0, 1e-9, 1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::DomainViolation(_)));
        let y0 = Kepler::periapsis_state(0.6);
        assert!((Kepler.energy(y0.as_slice()).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn separability_flags() {
        assert!(Pendulum.is_separable());
        assert!(!NonSeparable.is_separable());
        let h = NonSeparable.hessian(&[0.5, 1.0]).unwrap();
        assert!(h.xp.max_abs() > 0.0);
    }

    #[test]
    fn unknown_name() {
        assert!(registry("double-pendulum").is_none());
    }
}
