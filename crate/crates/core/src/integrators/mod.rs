//! Step maps: classical one-step rules, their locally exact modifications,
//! and energy-preserving discrete-gradient schemes, plus the implicit solver
//! and trajectory integration.
//!
//! Every rule has the form `yₙ₊₁ − yₙ = δ(ȳ) Ψ(yₙ, yₙ₊₁)`, where the
//! classical baseline uses `δ = h` and the locally exact variant chooses the
//! matrix `δ(ȳ)` so that the linearization at `ȳ` is the exact flow of the
//! linearized equation.

mod coef;
mod scheme;
mod solver;

pub use coef::{
    delta_general, gr1d_delta, grmulti_theta, psi_delta, theta_form_defect, STEP_GUARD,
};
pub use scheme::{Gr1dVariant, GrMultiVariant, Predictor, Rule, Scheme, SolverConfig};
pub use solver::solve_implicit;
use solver::solve_split;

use std::cell::{Cell, RefCell};

use crate::disgrad::{increment_into, symmetric_into};
use crate::error::{Error, Result};
use crate::exact_linear::LinearSystem;
use crate::matfun::{expm_phi1, Lu, Matrix, Vector};
use crate::model::{resolve_reference, Hamiltonian, RefPolicy, System};
use coef::Coef;

/// `φ₁(M)v`, by its Taylor series with matrix-vector products when `‖M‖ ≤ 1`.
fn phi1_apply(m: &Matrix, v: &Vector) -> Vector {
    if m.norm_inf() > 1.0 {
        return match expm_phi1(m) {
            Ok((_, phi)) => phi.mul_vec(v.as_slice()),
            Err(_) => Vector::from_vec(vec![f64::NAN; v.dim()]),
        };
    }
    let mut term = v.clone();
    let mut sum = v.clone();
    for k in 2..30 {
        term = m.mul_vec(term.as_slice()).scale(1.0 / k as f64);
        sum += &term;
        if term.max_abs() <= 1e-17 * sum.max_abs() {
            break;
        }
    }
    sum
}

/// Outcome of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub y_next: Vector,
    /// Newton updates performed; 0 for explicit rules.
    pub iterations: usize,
    /// Final residual norm of the implicit equation; 0 for explicit rules.
    pub residual: f64,
    /// Spectral bound of the argument `hF'/2` of tan/tanh coefficients, 0 if none.
    pub theta_spectral_arg: f64,
}

/// `Ψ(yₙ, yₙ₊₁)` of the classical rule underlying `rule`.
pub fn psi(rule: Rule, sys: System<'_>, y: &Vector, z: &Vector) -> Result<Vector> {
    match rule {
        Rule::ExplicitEuler | Rule::ExponentialEuler => sys.eval(y.as_slice()),
        Rule::ImplicitEuler => sys.eval(z.as_slice()),
        Rule::ImplicitMidpoint => sys.eval(y.midpoint(z).as_slice()),
        Rule::Trapezoidal => {
            let a = sys.eval(y.as_slice())?;
            let b = sys.eval(z.as_slice())?;
            Ok(a.midpoint(&b))
        }
        _ => Err(Error::InvalidScheme(format!(
            "{} is a discrete-gradient rule without a Ψ map",
            rule.name()
        ))),
    }
}

fn check_inputs(sys: System<'_>, y: &Vector, h: f64) -> Result<()> {
    if y.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: y.dim(),
        });
    }
    if !y.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("step size"));
    }
    if h == 0.0 {
        return Err(Error::DomainViolation("step size must be nonzero".into()));
    }
    Ok(())
}

/// Initial guess for an implicit step.
pub fn predict(sys: System<'_>, y: &Vector, h: f64, predictor: Predictor) -> Result<Vector> {
    let f = sys.eval(y.as_slice())?;
    if predictor == Predictor::ExponentialEuler {
        if let Ok(j) = sys.jacobian(y.as_slice()) {
            let next = y + &phi1_apply(&j.scale(h), &f).scale(h);
            if next.is_finite() {
                return Ok(next);
            }
        }
    }
    Ok(y.axpy(h, &f))
}

/// One step of `scheme` from `y` with step size `h` (negative allowed).
pub fn step(
    scheme: &Scheme,
    sys: System<'_>,
    y: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<StepReport> {
    scheme.validate()?;
    let policy = if scheme.locally_exact {
        Some(&scheme.policy)
    } else {
        None
    };
    match scheme.rule {
        Rule::Gr1dSymmetric
        | Rule::Gr1dIncrement
        | Rule::GrMultiSymmetric
        | Rule::GrMultiIncrement
        | Rule::GrMultiSeparable => {
            let ham = sys.hamiltonian().ok_or_else(|| {
                Error::InvalidScheme(format!("{} needs a Hamiltonian system", scheme.rule.name()))
            })?;
            match scheme.rule {
                Rule::Gr1dSymmetric => step_gr_1d(ham, Gr1dVariant::Symmetric, policy, y, h, cfg),
                Rule::Gr1dIncrement => step_gr_1d(ham, Gr1dVariant::Increment, policy, y, h, cfg),
                Rule::GrMultiSymmetric => {
                    step_gr_multi(ham, GrMultiVariant::Symmetric, policy, y, h, cfg)
                }
                Rule::GrMultiIncrement => {
                    step_gr_multi(ham, GrMultiVariant::Increment, policy, y, h, cfg)
                }
                _ => step_gr_multi(ham, GrMultiVariant::Separable, policy, y, h, cfg),
            }
        }
        rule => step_psi(rule, policy, sys, y, h, cfg),
    }
}

/// Classical rules and their locally exact modifications.
fn step_psi(
    rule: Rule,
    policy: Option<&RefPolicy>,
    sys: System<'_>,
    y: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<StepReport> {
    check_inputs(sys, y, h)?;
    cfg.validate()?;
    if let Some(lin) = sys.linear_part() {
        return step_psi_affine(rule, policy.is_some(), &lin, y, h);
    }
    let coef_at = |y_bar: &Vector| -> Result<(Coef, f64)> {
        let fp = sys.jacobian(y_bar.as_slice())?;
        let (d, arg) = psi_delta(rule, &fp, h)?;
        Ok((Coef::Full(d), arg))
    };
    let frozen = match policy {
        None => Some((Coef::Scalar(h), 0.0)),
        Some(p) if !p.depends_on_next() => Some(coef_at(&resolve_reference(p, y, y)?)?),
        Some(_) => None,
    };

    let explicit = matches!(rule, Rule::ExplicitEuler | Rule::ExponentialEuler);
    if let (true, Some((c, arg))) = (explicit, &frozen) {
        let f = sys.eval(y.as_slice())?;
        let y_next = y + &c.apply(f.as_slice());
        if !y_next.is_finite() {
            return Err(Error::NonFinite("explicit step"));
        }
        return Ok(StepReport {
            y_next,
            iterations: 0,
            residual: 0.0,
            theta_spectral_arg: *arg,
        });
    }

    let last_arg = Cell::new(frozen.as_ref().map_or(0.0, |(_, a)| *a));
    let live = RefCell::new(None);
    let mut residual = |z: &Vector, probe: bool| -> Result<Vector> {
        let ps = psi(rule, sys, y, z)?;
        with_coef(
            &frozen,
            &live,
            probe,
            || coef_at(&resolve_reference(policy.unwrap(), y, z)?),
            &last_arg,
            |c| Ok(&(z - y) - &c.apply(ps.as_slice())),
        )
    };
    let guess = predict(sys, y, h, cfg.predictor)?;
    let (y_next, iterations, res) = solve_split(&mut residual, guess, cfg)?;
    Ok(StepReport {
        y_next,
        iterations,
        residual: res,
        theta_spectral_arg: last_arg.get(),
    })
}

/// Step for affine fields `F(y) = Ay + b`, where the coefficient is the same
/// at every reference point and `Ψ(y, z) = A(αy + βz) + b`.
///
/// A locally exact rule's map `(I − βδA)⁻¹((I + αδA)y + δb)` equals
/// `e^{hA}y + hφ₁(hA)b` identically; it is evaluated in that form because
/// `I ± ½δA` cancels when `hA` has large negative eigenvalues. The coefficient
/// is still formed so the step guards apply.
fn step_psi_affine(
    rule: Rule,
    locally_exact: bool,
    lin: &LinearSystem,
    y: &Vector,
    h: f64,
) -> Result<StepReport> {
    if !locally_exact {
        let delta = Matrix::scalar(lin.dim(), h);
        return affine_psi_map(rule, &delta, lin, y).map(|y_next| StepReport {
            y_next,
            iterations: 0,
            residual: 0.0,
            theta_spectral_arg: 0.0,
        });
    }
    let (_, arg) = psi_delta(rule, lin.a(), h)?;
    let (e, p) = expm_phi1(&lin.a().scale(h))?;
    let y_next = &e.mul_vec(y.as_slice()) + &p.mul_vec(lin.b().as_slice()).scale(h);
    if !y_next.is_finite() {
        return Err(Error::NonFinite("affine step"));
    }
    Ok(StepReport {
        y_next,
        iterations: 0,
        residual: 0.0,
        theta_spectral_arg: arg,
    })
}

/// `(I − βδA) z = (I + αδA) y + δb`, solved for `z`.
fn affine_psi_map(rule: Rule, delta: &Matrix, lin: &LinearSystem, y: &Vector) -> Result<Vector> {
    let a = lin.a();
    let (alpha, beta) = match rule {
        Rule::ExplicitEuler | Rule::ExponentialEuler => (1.0, 0.0),
        Rule::ImplicitEuler => (0.0, 1.0),
        _ => (0.5, 0.5),
    };
    let da = delta.matmul(a);
    let rhs = &(y + &da.scale(alpha).mul_vec(y.as_slice())) + &delta.mul_vec(lin.b().as_slice());
    let y_next = if beta == 0.0 {
        rhs
    } else {
        let lhs = da.scale(-beta).add_diag(1.0);
        Lu::factor(&lhs)?.solve_vec(rhs.as_slice())
    };
    if !y_next.is_finite() {
        return Err(Error::NonFinite("affine step"));
    }
    Ok(y_next)
}

/// Applies the step coefficient: the frozen one if the policy does not look
/// at the next state, otherwise the one at the live iterate. Jacobian probes
/// reuse the coefficient of the last regular evaluation, which drops only the
/// small dependence of the coefficient on the iterate from the Jacobian.
fn with_coef<T>(
    frozen: &Option<(Coef, f64)>,
    live: &RefCell<Option<Coef>>,
    probe: bool,
    compute: impl FnOnce() -> Result<(Coef, f64)>,
    last_arg: &Cell<f64>,
    apply: impl FnOnce(&Coef) -> Result<T>,
) -> Result<T> {
    if let Some((c, _)) = frozen {
        return apply(c);
    }
    if !probe || live.borrow().is_none() {
        let (c, arg) = compute()?;
        last_arg.set(arg);
        *live.borrow_mut() = Some(c);
    }
    apply(live.borrow().as_ref().expect("coefficient set"))
}

fn check_hamiltonian(sys: &dyn Hamiltonian, y: &Vector, h: f64) -> Result<()> {
    check_inputs(System::Hamiltonian(sys), y, h)
}

/// Solves `yₙ₊₁ − yₙ = θ(ȳ) S ∇̄H(yₙ, yₙ₊₁)` with the coefficient returned by
/// `coef_at`, recomputed from the live iterate when `ȳ` depends on `yₙ₊₁`.
fn solve_gradient_scheme<C>(
    sys: &dyn Hamiltonian,
    symmetric: bool,
    policy: Option<&RefPolicy>,
    coef_at: C,
    y: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<StepReport>
where
    C: Fn(&Vector) -> Result<(Coef, f64)>,
{
    cfg.validate()?;
    let m = sys.dof();
    let frozen = match policy {
        None => Some((Coef::Scalar(h), 0.0)),
        Some(p) if !p.depends_on_next() => Some(coef_at(&resolve_reference(p, y, y)?)?),
        Some(_) => None,
    };
    let last_arg = Cell::new(frozen.as_ref().map_or(0.0, |(_, a)| *a));
    let scratch = RefCell::new((vec![0.0; 2 * m], vec![0.0; 2 * m], vec![0.0; 2 * m]));
    let live = RefCell::new(None);
    let mut residual = |z: &Vector, probe: bool| -> Result<Vector> {
        let mut guard = scratch.borrow_mut();
        let (point, tmp, g) = &mut *guard;
        if symmetric {
            symmetric_into(sys, y.as_slice(), z.as_slice(), point, tmp, g)?;
        } else {
            increment_into(sys, y.as_slice(), z.as_slice(), point, g)?;
        }
        // S ∇̄H = (∇̄_p H, −∇̄_x H)
        tmp[..m].copy_from_slice(&g[m..]);
        for i in 0..m {
            tmp[m + i] = -g[i];
        }
        with_coef(
            &frozen,
            &live,
            probe,
            || coef_at(&resolve_reference(policy.unwrap(), y, z)?),
            &last_arg,
            |c| Ok(&(z - y) - &c.apply(tmp)),
        )
    };
    let guess = predict(System::Hamiltonian(sys), y, h, cfg.predictor)?;
    let (y_next, iterations, res) = solve_split(&mut residual, guess, cfg)?;
    if cfg!(debug_assertions) {
        // Round-off scale of H: the size of its terms, not of their sum.
        let e0 = sys.energy(y.as_slice())?;
        let e1 = sys.energy(y_next.as_slice())?;
        let scale = 1.0 + e0.abs() + y.max_abs() * sys.gradient(y.as_slice())?.max_abs();
        debug_assert!(
            (e1 - e0).abs() <= 1e-8 * scale,
            "discrete-gradient step changed the energy from {e0} to {e1}"
        );
    }
    Ok(StepReport {
        y_next,
        iterations,
        residual: res,
        theta_spectral_arg: last_arg.get(),
    })
}

/// One-degree-of-freedom discrete-gradient step with scalar `δ`.
///
/// `policy = None` gives the baseline `δ = h`; `Fixed` at an equilibrium is
/// MOD-GR, `Current` is GR-LEX and `Midpoint` is GR-SLEX.
pub fn step_gr_1d(
    sys: &dyn Hamiltonian,
    variant: Gr1dVariant,
    policy: Option<&RefPolicy>,
    y: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<StepReport> {
    if sys.dof() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: 2 * sys.dof(),
        });
    }
    check_hamiltonian(sys, y, h)?;
    let coef_at = |y_bar: &Vector| -> Result<(Coef, f64)> {
        let (d, arg) = gr1d_delta(sys, variant, y_bar, h)?;
        Ok((Coef::Scalar(d), arg))
    };
    solve_gradient_scheme(
        sys,
        variant == Gr1dVariant::Symmetric,
        policy,
        coef_at,
        y,
        h,
        cfg,
    )
}

/// Multidimensional discrete-gradient step `yₙ₊₁ − yₙ = θ S ∇̄H`.
pub fn step_gr_multi(
    sys: &dyn Hamiltonian,
    variant: GrMultiVariant,
    policy: Option<&RefPolicy>,
    y: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<StepReport> {
    check_hamiltonian(sys, y, h)?;
    if variant == GrMultiVariant::Separable && !sys.is_separable() {
        let mixed = sys.hessian(y.as_slice())?.xp.max_abs();
        return Err(Error::NotSeparable(mixed));
    }
    let coef_at = |y_bar: &Vector| -> Result<(Coef, f64)> {
        let (theta, arg) = grmulti_theta(sys, variant, y_bar, h)?;
        Ok((Coef::Full(theta), arg))
    };
    let symmetric = variant != GrMultiVariant::Increment;
    solve_gradient_scheme(sys, symmetric, policy, coef_at, y, h, cfg)
}

/// States, times and per-step diagnostics of an integration run.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    /// Energy at every state when the problem is Hamiltonian.
    pub energies: Option<Vec<f64>>,
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&Vector> {
        self.states.last()
    }
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Config("empty step schedule".into()));
    }
    if let Some(i) = schedule.iter().position(|h| *h == 0.0 || !h.is_finite()) {
        return Err(Error::Config(format!(
            "step {i} of the schedule is zero or non-finite"
        )));
    }
    Ok(())
}

/// Integrates over `schedule`, stopping at the first failing step.
///
/// Returns the states reached so far together with the error, if any, so a
/// caller can still emit the partial run.
pub fn integrate_partial(
    scheme: &Scheme,
    sys: System<'_>,
    y0: &Vector,
    schedule: &[f64],
    cfg: &SolverConfig,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory::default();
    if let Err(e) = check_schedule(schedule)
        .and_then(|_| scheme.validate())
        .and_then(|_| cfg.validate())
    {
        return (traj, Some(e));
    }
    let ham = sys.hamiltonian();
    let mut energies = Vec::new();
    if let Some(hs) = ham {
        match hs.energy(y0.as_slice()) {
            Ok(e) => energies.push(e),
            Err(e) => return (traj, Some(e)),
        }
    }
    traj.times.reserve(schedule.len() + 1);
    traj.states.reserve(schedule.len() + 1);
    traj.reports.reserve(schedule.len());
    traj.times.push(0.0);
    traj.states.push(y0.clone());
    // Compensated summation of the step sizes.
    let (mut t, mut carry) = (0.0f64, 0.0f64);
    let mut failure = None;
    for (n, &h) in schedule.iter().enumerate() {
        let y = traj.states.last().expect("nonempty");
        let report = match step(scheme, sys, y, h, cfg) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(Error::StepFailed {
                    index: n,
                    source: Box::new(e),
                });
                break;
            }
        };
        if let Some(hs) = ham {
            match hs.energy(report.y_next.as_slice()) {
                Ok(e) => energies.push(e),
                Err(e) => {
                    failure = Some(Error::StepFailed {
                        index: n,
                        source: Box::new(e),
                    });
                    break;
                }
            }
        }
        let dh = h - carry;
        let tn = t + dh;
        carry = (tn - t) - dh;
        t = tn;
        traj.times.push(t);
        traj.states.push(report.y_next.clone());
        traj.reports.push(report);
    }
    if ham.is_some() {
        traj.energies = Some(energies);
    }
    (traj, failure)
}

/// Integrates over `schedule`; a failing step aborts with its index.
pub fn integrate(
    scheme: &Scheme,
    sys: System<'_>,
    y0: &Vector,
    schedule: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    match integrate_partial(scheme, sys, y0, schedule, cfg) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}
