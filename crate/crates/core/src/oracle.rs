//! Independent reference solutions, convergence-order fits, energy-drift
//! measurement and the local-exactness probe.
//!
//! The reference integrator is a classical fourth-order Runge–Kutta method
//! and shares no code with the schemes it is used to check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact_linear::{exact_step_linear, LinearSystem};
use crate::integrators::{integrate, step, Rule, Scheme, SolverConfig};
use crate::matfun::{expm_phi1, Matrix, Vector};
use crate::model::{
    Hamiltonian, HessianBlocks, QuadraticHamiltonian, RefPolicy, System, VectorField,
};

pub use crate::integrators::Trajectory;

/// Maximum number of step halvings of [`reference_solve`].
pub const MAX_HALVINGS: usize = 22;

/// Smallest accepted target tolerance of [`reference_solve`].
pub const MIN_REFERENCE_TOL: f64 = 1e-13;

/// Tolerance of the references behind [`convergence_order`].
pub const ORDER_REFERENCE_TOL: f64 = 1e-13;

/// Minimum number of step sizes for an order fit.
pub const MIN_STEP_SIZES: usize = 4;

/// Errors above this are treated as pre-asymptotic and left out of the fit.
pub const PRE_ASYMPTOTIC_ERROR: f64 = 0.5;

/// Largest fit residual, in decades, of a reliable order estimate.
pub const RELIABLE_FIT_RESIDUAL: f64 = 0.1;

/// Displacement of the finite-difference stencil of the probe.
pub const PROBE: f64 = 1e-4;

/// Initial number of reference steps per unit time.
const REFERENCE_STEPS_PER_UNIT: f64 = 10.0;

/// Slope of `log error` against `log h`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    pub slope: f64,
    /// `(h, global error)` for every step size, including a discarded one.
    pub errors: Vec<(f64, f64)>,
    /// Root-mean-square residual of the fit in decades.
    pub fit_residual: f64,
    /// The largest step size, when it was left out as pre-asymptotic.
    pub discarded: Option<f64>,
    pub reliable: bool,
}

fn rk4(sys: System<'_>, y0: &Vector, t: f64, n: usize) -> Result<Vector> {
    let h = t / n as f64;
    let d = y0.dim();
    let mut y = y0.clone();
    let mut carry = vec![0.0; d];
    for _ in 0..n {
        let k1 = sys.eval(y.as_slice())?;
        let k2 = sys.eval(y.axpy(0.5 * h, &k1).as_slice())?;
        let k3 = sys.eval(y.axpy(0.5 * h, &k2).as_slice())?;
        let k4 = sys.eval(y.axpy(h, &k3).as_slice())?;
        // Kahan-compensated y += h/6 (k1 + 2k2 + 2k3 + k4)
        for i in 0..d {
            let inc = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) - carry[i];
            let next = y[i] + inc;
            carry[i] = (next - y[i]) - inc;
            y[i] = next;
        }
    }
    if !y.is_finite() {
        return Err(Error::NonFinite("reference solution"));
    }
    Ok(y)
}

/// State at time `t` starting from `y0`.
///
/// Affine problems use the closed-form flow. Otherwise the fourth-order
/// Runge–Kutta solution is refined by halving the step until two successive
/// refinements agree to `target_tol (max(1, ‖y‖))` in the max norm.
pub fn reference_solve(sys: System<'_>, y0: &Vector, t: f64, target_tol: f64) -> Result<Vector> {
    if !(target_tol >= MIN_REFERENCE_TOL && target_tol.is_finite()) {
        return Err(Error::Config(format!(
            "reference tolerance must be at least {MIN_REFERENCE_TOL:e}, got {target_tol:e}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("reference end time"));
    }
    if y0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: y0.dim(),
        });
    }
    if t == 0.0 {
        return Ok(y0.clone());
    }
    if let Some(lin) = sys.linear_part() {
        return exact_step_linear(&lin, y0, t);
    }
    let mut n = (t.abs() * REFERENCE_STEPS_PER_UNIT).ceil().max(8.0) as usize;
    let mut prev = rk4(sys, y0, t, n)?;
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let cur = rk4(sys, y0, t, n)?;
        gap = (&cur - &prev).max_abs();
        if gap <= target_tol * cur.max_abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        iterations: MAX_HALVINGS,
        residual: gap,
    })
}

fn steps_for(t: f64, h: f64) -> Result<usize> {
    let n = (t / h).round();
    if n.is_nan() || n < 1.0 || (n * h - t).abs() > 1e-9 * t.abs() {
        return Err(Error::Config(format!(
            "end time {t} is not a positive multiple of step {h}"
        )));
    }
    Ok(n as usize)
}

/// Least-squares fit of `log₁₀ e = a + p log₁₀ h`; returns `(p, rms residual)`.
fn fit_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(h, _)| h.abs().log10()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    (slope, (ss / n).sqrt())
}

/// Fits the order of `scheme` from endpoint errors at time `t` against
/// [`reference_solve`], one run per step size (run concurrently).
pub fn convergence_order(
    scheme: &Scheme,
    sys: System<'_>,
    y0: &Vector,
    t: f64,
    h_list: &[f64],
    cfg: &SolverConfig,
) -> Result<OrderEstimate> {
    if h_list.len() < MIN_STEP_SIZES {
        return Err(Error::Config(format!("need ≥ {MIN_STEP_SIZES} step sizes")));
    }
    let counts = h_list
        .iter()
        .map(|&h| steps_for(t, h))
        .collect::<Result<Vec<_>>>()?;
    let reference = reference_solve(sys, y0, t, ORDER_REFERENCE_TOL)?;
    let errors = h_list
        .par_iter()
        .zip(counts.par_iter())
        .map(|(&h, &n)| {
            let traj = integrate(scheme, sys, y0, &vec![h; n], cfg)?;
            let end = traj.last().expect("nonempty trajectory");
            Ok((h, (end - &reference).norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(&(h, _)) = errors.iter().find(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::DomainViolation(format!(
            "global error at h = {h} is not positive"
        )));
    }
    let largest =
        errors.iter().copied().fold(
            (0.0, 0.0),
            |acc: (f64, f64), p| if p.0.abs() > acc.0.abs() { p } else { acc },
        );
    let discarded = (largest.1 > PRE_ASYMPTOTIC_ERROR).then_some(largest.0);
    let kept: Vec<(f64, f64)> = errors
        .iter()
        .copied()
        .filter(|p| Some(p.0) != discarded)
        .collect();
    let (slope, fit_residual) = fit_slope(&kept);
    Ok(OrderEstimate {
        slope,
        errors,
        fit_residual,
        discarded,
        reliable: fit_residual <= RELIABLE_FIT_RESIDUAL,
    })
}

/// `max |H(yₙ) − H(y₀)| / max(1, |H(y₀)|)` together with the maximizing index.
///
/// Uses the energies stored in the trajectory when present. A state whose
/// energy cannot be evaluated yields NaN.
pub fn energy_drift_argmax(traj: &Trajectory, sys: &dyn Hamiltonian) -> (f64, usize) {
    let energies: Vec<f64> = match &traj.energies {
        Some(e) => e.clone(),
        None => traj
            .states
            .iter()
            .map(|y| sys.energy(y.as_slice()).unwrap_or(f64::NAN))
            .collect(),
    };
    let Some(&e0) = energies.first() else {
        return (0.0, 0);
    };
    let scale = e0.abs().max(1.0);
    let mut best = (0.0, 0);
    for (n, e) in energies.iter().enumerate() {
        let d = (e - e0).abs() / scale;
        if d.is_nan() {
            return (f64::NAN, n);
        }
        if d > best.0 {
            best = (d, n);
        }
    }
    best
}

/// Maximum relative energy drift along a trajectory.
pub fn energy_drift(traj: &Trajectory, sys: &dyn Hamiltonian) -> f64 {
    energy_drift_argmax(traj, sys).0
}

/// The field linearized at a point, paired with the original problem.
///
/// The step coefficients are built from `jacobian`, which comes from the
/// original problem at the scheme's reference point; the rule itself sees
/// only the linearized field. The pair does not advertise itself as affine,
/// so the schemes take their general path.
struct Linearized<'a> {
    lin: LinearSystem,
    orig: System<'a>,
}

impl VectorField for Linearized<'_> {
    fn dim(&self) -> usize {
        self.lin.dim()
    }
    fn eval(&self, y: &[f64]) -> Result<Vector> {
        self.lin.eval(y)
    }
    fn jacobian(&self, y: &[f64]) -> Result<Matrix> {
        self.orig.jacobian(y)
    }
}

/// Second-order Taylor polynomial of a Hamiltonian, with second
/// derivatives taken from the original, as for [`Linearized`].
struct Taylor<'a> {
    quad: QuadraticHamiltonian,
    orig: &'a dyn Hamiltonian,
}

impl Hamiltonian for Taylor<'_> {
    fn dof(&self) -> usize {
        self.quad.dof()
    }
    fn energy(&self, y: &[f64]) -> Result<f64> {
        self.quad.energy(y)
    }
    fn gradient(&self, y: &[f64]) -> Result<Vector> {
        self.quad.gradient(y)
    }
    fn hessian(&self, y: &[f64]) -> Result<HessianBlocks> {
        self.orig.hessian(y)
    }
    fn is_separable(&self) -> bool {
        self.orig.is_separable()
    }
}

/// The scheme with its reference point frozen at `y_bar`. A fixed reference
/// stays where it is, so schemes tied to another point are probed honestly.
fn frozen_scheme(scheme: &Scheme, y_bar: &Vector) -> Result<Scheme> {
    if !scheme.locally_exact {
        return Ok(scheme.clone());
    }
    let policy = match &scheme.policy {
        RefPolicy::Fixed(p) => RefPolicy::Fixed(p.clone()),
        _ => RefPolicy::Fixed(y_bar.clone()),
    };
    let rule = match scheme.rule {
        Rule::ExponentialEuler => Rule::ExplicitEuler,
        r => r,
    };
    Scheme::locally_exact(rule, policy)
}

/// Distance between the linearization of `scheme` at `y_bar` and the exact
/// discretization `ξ₊ = e^{hF'}ξ + hφ₁(hF')F(ȳ)` of the linearized equation.
///
/// The scheme, with its reference point frozen at `y_bar`, is applied to
/// the problem linearized at `y_bar`, with its coefficient taken from the
/// original problem at the reference point; the resulting affine step map is
/// recovered by central differences of size [`PROBE`]. Returns the largest
/// entrywise deviation of its matrix and offset.
pub fn local_exactness_probe(
    scheme: &Scheme,
    sys: System<'_>,
    y_bar: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    if y_bar.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: y_bar.dim(),
        });
    }
    let frozen = frozen_scheme(scheme, y_bar)?;
    let fp = sys.jacobian(y_bar.as_slice())?;
    let f = sys.eval(y_bar.as_slice())?;

    let field;
    let taylor;
    let lin_sys = if sys.linear_part().is_some() {
        sys
    } else {
        match sys.hamiltonian() {
            Some(hs) => {
                let q = hs.hessian(y_bar.as_slice())?.full();
                let g = &hs.gradient(y_bar.as_slice())? - &q.mul_vec(y_bar.as_slice());
                taylor = Taylor {
                    quad: QuadraticHamiltonian::new(q, g)?,
                    orig: hs,
                };
                System::Hamiltonian(&taylor)
            }
            None => {
                let b = &f - &fp.mul_vec(y_bar.as_slice());
                field = Linearized {
                    lin: LinearSystem::new(fp.clone(), b)?,
                    orig: sys,
                };
                System::Field(&field)
            }
        }
    };

    let phi = |y: &Vector| step(&frozen, lin_sys, y, h, cfg).map(|r| r.y_next);
    let d = y_bar.dim();
    let offset = &phi(y_bar)? - y_bar;
    let mut jac = Matrix::zeros(d);
    let mut probe = y_bar.clone();
    for j in 0..d {
        probe[j] = y_bar[j] + PROBE;
        let plus = phi(&probe)?;
        probe[j] = y_bar[j] - PROBE;
        let minus = phi(&probe)?;
        probe[j] = y_bar[j];
        for i in 0..d {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * PROBE);
        }
    }
    let (e, phi1) = expm_phi1(&fp.scale(h))?;
    let exact_offset = phi1.mul_vec(f.as_slice()).scale(h);
    Ok(jac
        .max_abs_diff(&e)
        .max((&offset - &exact_offset).max_abs()))
}
