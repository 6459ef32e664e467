//! Seeded randomized property suites behind `geodint verify`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disgrad::{increment_gradient, linearization_matrices, symmetric_gradient};
use crate::error::{Error, Result};
use crate::exact_linear::{exact_step_linear, LinearSystem};
use crate::integrators::{
    grmulti_theta, integrate, step, theta_form_defect, GrMultiVariant, Rule, Scheme, SolverConfig,
};
use crate::matfun::{even_fn, expm, phi1, EvenKind, Matrix, Vector};
use crate::model::{registry, Hamiltonian, QuadraticHamiltonian, RefPolicy, System, PROBLEM_NAMES};
use crate::oracle::local_exactness_probe;

/// Named property suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Linear,
    LocalExactness,
    ThetaForm,
    GradientIdentity,
    Reversibility,
    FixedPoints,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Linear,
        Suite::LocalExactness,
        Suite::ThetaForm,
        Suite::GradientIdentity,
        Suite::Reversibility,
        Suite::FixedPoints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Linear => "linear",
            Suite::LocalExactness => "local-exactness",
            Suite::ThetaForm => "theta-form",
            Suite::GradientIdentity => "gradient-identity",
            Suite::Reversibility => "reversibility",
            Suite::FixedPoints => "fixed-points",
        }
    }
}

/// How a measured value is compared with its limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Above(f64),
}

/// One property: the worst value over its samples against a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    /// Set when a sample failed with an error instead of producing a value.
    pub error: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && match self.bound {
                Bound::AtMost(l) => self.value <= l,
                Bound::Above(l) => self.value > l,
            }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let bound = match self.bound {
            Bound::AtMost(l) => format!("<= {l:e}"),
            Bound::Above(l) => format!("> {l:e}"),
        };
        match &self.error {
            Some(e) => write!(f, "{verdict} {}: error: {e}", self.name),
            None => write!(f, "{verdict} {}: {:.3e} ({bound})", self.name, self.value),
        }
    }
}

/// Outcome of a suite run.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Accumulates the worst sample of one property.
struct Tracker {
    check: Check,
}

impl Tracker {
    fn at_most(name: impl Into<String>, limit: f64) -> Self {
        Tracker::new(name, Bound::AtMost(limit))
    }

    fn above(name: impl Into<String>, limit: f64) -> Self {
        Tracker::new(name, Bound::Above(limit))
    }

    fn new(name: impl Into<String>, bound: Bound) -> Self {
        let value = match bound {
            Bound::AtMost(_) => 0.0,
            Bound::Above(_) => f64::INFINITY,
        };
        Tracker {
            check: Check {
                name: name.into(),
                value,
                bound,
                error: None,
            },
        }
    }

    fn record(&mut self, sample: Result<f64>) {
        match sample {
            Ok(v) => {
                let worse = match self.check.bound {
                    Bound::AtMost(_) => v > self.check.value || v.is_nan(),
                    Bound::Above(_) => v < self.check.value || v.is_nan(),
                };
                if worse {
                    self.check.value = v;
                }
            }
            Err(e) => {
                if self.check.error.is_none() {
                    self.check.error = Some(e.to_string());
                }
            }
        }
    }

    fn finish(self) -> Check {
        self.check
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vector {
    Vector::from_vec((0..d).map(|_| rng.gen_range(-r..=r)).collect())
}

fn uniform_mat(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let data = (0..d * d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    Matrix::new(d, data).expect("finite entries")
}

fn symmetric_mat(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let m = uniform_mat(rng, d);
    (&m + &m.transpose()).scale(0.5)
}

/// Random quadratic Hamiltonian with `‖S Q‖∞ ≤ 2`; every other one separable.
fn random_quadratic(rng: &mut ChaCha8Rng, m: usize, separable: bool) -> QuadraticHamiltonian {
    let mut q = symmetric_mat(rng, 2 * m);
    if separable {
        for i in 0..m {
            for k in 0..m {
                q[(i, m + k)] = 0.0;
                q[(m + k, i)] = 0.0;
            }
        }
    }
    let scale = rng.gen_range(0.5..=2.0) / q.norm_inf().max(1e-3);
    let g = uniform_vec(rng, 2 * m, 1.0);
    QuadraticHamiltonian::new(q.scale(scale), g).expect("symmetric by construction")
}

/// Locally exact Ψ-class schemes at every policy, plus exponential Euler.
fn psi_schemes(fixed: &Vector) -> Vec<Scheme> {
    let mut out = vec![Scheme::exponential_euler()];
    for rule in [
        Rule::ExplicitEuler,
        Rule::ImplicitEuler,
        Rule::ImplicitMidpoint,
        Rule::Trapezoidal,
    ] {
        for policy in all_policies(fixed) {
            out.push(Scheme::locally_exact(rule, policy).expect("valid"));
        }
    }
    out
}

fn all_policies(fixed: &Vector) -> [RefPolicy; 4] {
    [
        RefPolicy::Current,
        RefPolicy::Next,
        RefPolicy::Midpoint,
        RefPolicy::Fixed(fixed.clone()),
    ]
}

/// Discrete-gradient rules applicable to a Hamiltonian.
pub fn gradient_rules(sys: &dyn Hamiltonian) -> Vec<Rule> {
    let mut rules = Vec::new();
    if sys.dof() == 1 {
        rules.extend([Rule::Gr1dSymmetric, Rule::Gr1dIncrement]);
    }
    rules.extend([Rule::GrMultiSymmetric, Rule::GrMultiIncrement]);
    if sys.is_separable() {
        rules.push(Rule::GrMultiSeparable);
    }
    rules
}

/// Every scheme that applies to `sys`: classical and locally exact at each
/// policy, with `fixed` as the fixed reference point.
pub fn all_schemes(sys: &dyn Hamiltonian, fixed: &Vector) -> Vec<Scheme> {
    let mut out = psi_schemes(fixed);
    for rule in [
        Rule::ExplicitEuler,
        Rule::ImplicitEuler,
        Rule::ImplicitMidpoint,
        Rule::Trapezoidal,
    ] {
        out.push(Scheme::classical(rule).expect("valid"));
    }
    for rule in gradient_rules(sys) {
        out.push(Scheme::classical(rule).expect("valid"));
        for policy in all_policies(fixed) {
            out.push(Scheme::locally_exact(rule, policy).expect("valid"));
        }
    }
    out
}

fn relative_gap(a: &Vector, b: &Vector) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1.0)
}

fn endpoint_error(
    scheme: &Scheme,
    sys: System<'_>,
    lin: &LinearSystem,
    y0: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let steps = 100;
    let traj = integrate(scheme, sys, y0, &vec![h; steps], cfg)?;
    let exact = exact_step_linear(lin, y0, h * steps as f64)?;
    Ok(relative_gap(traj.last().expect("nonempty"), &exact))
}

/// Every locally exact scheme reproduces the flow of random linear systems
/// over 100 steps: 20 fields for the Ψ-class rules and 20 quadratic
/// Hamiltonians for the discrete-gradient rules.
fn suite_linear(rng: &mut ChaCha8Rng) -> Vec<Check> {
    const TOL: f64 = 1e-10;
    let cfg = SolverConfig::default();
    let mut trackers: Vec<(String, Tracker)> = Vec::new();
    let mut track = |label: String, sample: Result<f64>| {
        let idx = match trackers.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                trackers.push((
                    label.clone(),
                    Tracker::at_most(format!("{label} 100-step endpoint vs closed form"), TOL),
                ));
                trackers.len() - 1
            }
        };
        trackers[idx].1.record(sample);
    };
    for _ in 0..20 {
        let d = rng.gen_range(1..=6);
        let a = uniform_mat(rng, d);
        let a = a.scale(rng.gen_range(0.5..=2.0) / a.norm_inf().max(1e-3));
        let lin = LinearSystem::new(a, uniform_vec(rng, d, 1.0)).expect("finite");
        let y0 = uniform_vec(rng, d, 1.0);
        let h = rng.gen_range(0.05..=0.5);
        let fixed = uniform_vec(rng, d, 1.0);
        for scheme in psi_schemes(&fixed) {
            let policy = if scheme.rule == Rule::ExponentialEuler {
                "current"
            } else {
                scheme.policy.name()
            };
            track(
                format!("{}/le@{policy}", scheme.rule.name()),
                endpoint_error(&scheme, System::Field(&lin), &lin, &y0, h, &cfg),
            );
        }
    }
    for k in 0..20 {
        let m = rng.gen_range(1..=3);
        let quad = random_quadratic(rng, m, k % 2 == 0);
        let lin = quad.linear_part().expect("affine");
        let y0 = uniform_vec(rng, 2 * m, 1.0);
        let h = rng.gen_range(0.05..=0.5);
        let fixed = uniform_vec(rng, 2 * m, 1.0);
        for rule in gradient_rules(&quad) {
            for policy in all_policies(&fixed) {
                let scheme = Scheme::locally_exact(rule, policy).expect("valid");
                track(
                    scheme.label(),
                    endpoint_error(&scheme, System::Hamiltonian(&quad), &lin, &y0, h, &cfg),
                );
            }
        }
    }
    trackers.into_iter().map(|(_, t)| t.finish()).collect()
}

/// Sample points for the probes, near the bottom of each potential well
/// where the linearization oscillates with frequency close to one.
fn probe_points(rng: &mut ChaCha8Rng, name: &str, count: usize) -> Vec<Vector> {
    let (d, r) = match name {
        "pendulum" => (2, 0.5),
        _ => (4, 0.3),
    };
    (0..count).map(|_| uniform_vec(rng, d, r)).collect()
}

/// Probe defects: at most 1e-6 for every locally exact scheme at its
/// reference point, above 1e-3 for every classical baseline, at h = 0.3.
fn suite_local_exactness(rng: &mut ChaCha8Rng) -> Vec<Check> {
    const H: f64 = 0.3;
    const EXACT: f64 = 1e-6;
    const GAP: f64 = 1e-3;
    let cfg = SolverConfig::default();
    let mut checks = Vec::new();
    for name in ["pendulum", "henon-heiles"] {
        let prob = registry(name).expect("registered");
        let sys = prob.system.as_ref();
        let points = probe_points(rng, name, 5);
        let mut le: Vec<Scheme> = vec![Scheme::exponential_euler()];
        let mut classical = Vec::new();
        let mut rules = vec![
            Rule::ExplicitEuler,
            Rule::ImplicitEuler,
            Rule::ImplicitMidpoint,
            Rule::Trapezoidal,
        ];
        rules.extend(gradient_rules(sys));
        for rule in rules {
            classical.push(Scheme::classical(rule).expect("valid"));
            for policy in [RefPolicy::Current, RefPolicy::Next, RefPolicy::Midpoint] {
                le.push(Scheme::locally_exact(rule, policy).expect("valid"));
            }
        }
        for scheme in &le {
            let mut t = Tracker::at_most(format!("{name} {} probe defect", scheme.label()), EXACT);
            for y in &points {
                t.record(local_exactness_probe(
                    scheme,
                    System::Hamiltonian(sys),
                    y,
                    H,
                    &cfg,
                ));
            }
            checks.push(t.finish());
        }
        // A fixed reference is exact at its own point.
        for eq in &prob.equilibria {
            let mut t = Tracker::at_most(
                format!("{name} fixed reference at equilibrium, all rules"),
                EXACT,
            );
            for scheme in all_schemes(sys, eq)
                .into_iter()
                .filter(|s| s.locally_exact && matches!(s.policy, RefPolicy::Fixed(_)))
            {
                t.record(local_exactness_probe(
                    &scheme,
                    System::Hamiltonian(sys),
                    eq,
                    H,
                    &cfg,
                ));
            }
            checks.push(t.finish());
        }
        for scheme in &classical {
            let mut t = Tracker::above(format!("{name} {} probe defect", scheme.label()), GAP);
            for y in &points {
                t.record(local_exactness_probe(
                    scheme,
                    System::Hamiltonian(sys),
                    y,
                    H,
                    &cfg,
                ));
            }
            checks.push(t.finish());
        }
    }
    checks
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, Q)` with `M = Q diag(λ) Qᵀ`.
pub fn jacobi_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let d = m.dim();
    let mut a = m.clone();
    let mut q = Matrix::identity(d);
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * m.max_abs().max(1e-300) {
            break;
        }
        for p in 0..d {
            for r in p + 1..d {
                if a[(p, r)] == 0.0 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * a[(p, r)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akr) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..d {
                    let (apk, ark) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                for k in 0..d {
                    let (qkp, qkr) = (q[(k, p)], q[(k, r)]);
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    ((0..d).map(|i| a[(i, i)]).collect(), q)
}

/// `Q f(Λ) Qᵀ` for a symmetric matrix.
pub fn spectral_apply(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let (lambda, q) = jacobi_eigen(m);
    let fl = Matrix::diag(&lambda.iter().map(|&l| f(l)).collect::<Vec<_>>());
    q.matmul(&fl).matmul(&q.transpose())
}

fn tanhc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.tanh() / x
    }
}

fn tanc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.tan() / x
    }
}

fn xcothx(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x / x.tanh()
    }
}

fn phi1_scalar(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

/// θ-form and small-step limit of θ on random quadratic Hamiltonians, plus
/// the matrix-function identities the coefficients rest on.
fn suite_theta_form(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut form = Tracker::at_most(
        "theta-form defect |theta^T - S^-1 theta S| over 50 Hessians",
        1e-10,
    );
    let mut limit = Tracker::at_most("|theta/h - I| at h = 1e-6", 1e-5);
    for k in 0..50 {
        let m = rng.gen_range(1..=3);
        let quad = random_quadratic(rng, m, k % 2 == 0);
        let y = uniform_vec(rng, 2 * m, 1.0);
        let h = rng.gen_range(0.05..=0.5);
        let mut variants = vec![GrMultiVariant::Symmetric, GrMultiVariant::Increment];
        if quad.is_separable() {
            variants.push(GrMultiVariant::Separable);
        }
        for v in variants {
            form.record(grmulti_theta(&quad, v, &y, h).map(|(t, _)| theta_form_defect(&t)));
            let small = 1e-6;
            limit.record(
                grmulti_theta(&quad, v, &y, small)
                    .map(|(t, _)| t.scale(1.0 / small).max_abs_diff(&Matrix::identity(2 * m))),
            );
        }
    }
    let mut recip = Tracker::at_most("tanhc(M) xcothx(M) = I", 1e-12);
    let mut eig = Tracker::at_most(
        "expm, phi1, tanhc, tanc, xcothx vs eigendecomposition",
        1e-10,
    );
    for _ in 0..50 {
        let d = rng.gen_range(1..=5);
        let s = symmetric_mat(rng, d);
        let s = s.scale(rng.gen_range(0.1..=1.4) / s.norm_inf().max(1e-3));
        recip.record((|| {
            let prod = even_fn(&s, EvenKind::Tanhc)?.matmul(&even_fn(&s, EvenKind::XCothX)?);
            Ok(prod.max_abs_diff(&Matrix::identity(d)))
        })());
        eig.record((|| {
            let pairs: [(Matrix, Matrix); 5] = [
                (expm(&s)?, spectral_apply(&s, f64::exp)),
                (phi1(&s)?, spectral_apply(&s, phi1_scalar)),
                (even_fn(&s, EvenKind::Tanhc)?, spectral_apply(&s, tanhc)),
                (even_fn(&s, EvenKind::Tanc)?, spectral_apply(&s, tanc)),
                (even_fn(&s, EvenKind::XCothX)?, spectral_apply(&s, xcothx)),
            ];
            Ok(pairs
                .iter()
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max))
        })());
    }
    vec![form.finish(), limit.finish(), recip.finish(), eig.finish()]
}

/// A random state in the domain of the named problem.
fn random_state(rng: &mut ChaCha8Rng, name: &str, d: usize) -> Vector {
    let mut y = uniform_vec(rng, d, 1.0);
    if name == "kepler" {
        let r = rng.gen_range(0.5..=2.0);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        y[0] = r * phi.cos();
        y[1] = r * phi.sin();
    }
    y
}

/// Discrete-gradient identity on 10³ random pairs per problem with
/// separations from 1e-14 to 1, and the linearization triple identities.
fn suite_gradient_identity(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut checks = Vec::new();
    for name in PROBLEM_NAMES {
        let prob = registry(name).expect("registered");
        let sys = prob.system.as_ref();
        let d = 2 * sys.dof();
        let mut ident = Tracker::at_most(format!("{name} <grad H, dy> = dH on 1000 pairs"), 1e-12);
        let mut triple =
            Tracker::at_most(format!("{name} A + B = Hessian, R antisymmetric"), 1e-13);
        for _ in 0..1000 {
            let y = random_state(rng, name, d);
            let dir = uniform_vec(rng, d, 1.0);
            let scale = 10f64.powf(rng.gen_range(-14.0..=0.0));
            let z = y.axpy(scale, &dir);
            ident.record((|| {
                let scale_h = sys.energy(y.as_slice())?.abs().max(1.0);
                let inc = increment_gradient(sys, &y, &z)?.identity_residual(
                    sys,
                    y.as_slice(),
                    z.as_slice(),
                )?;
                let sym = symmetric_gradient(sys, &y, &z)?.identity_residual(
                    sys,
                    y.as_slice(),
                    z.as_slice(),
                )?;
                Ok(inc.max(sym) / scale_h)
            })());
        }
        for _ in 0..20 {
            let y = random_state(rng, name, d);
            triple.record((|| {
                let t = linearization_matrices(sys, &y)?;
                let hess = sys.hessian(y.as_slice())?.full();
                let sum = (&t.a + &t.b).max_abs_diff(&hess);
                let anti = (&t.r + &t.r.transpose()).max_abs();
                let diff = (&t.a - &t.b).max_abs_diff(&t.r);
                Ok(sum.max(anti).max(diff))
            })());
        }
        checks.push(ident.finish());
        checks.push(triple.finish());
    }
    checks
}

/// Forward-then-backward steps of the symmetric schemes return the state.
fn suite_reversibility(rng: &mut ChaCha8Rng) -> Vec<Check> {
    const H: f64 = 0.2;
    let cfg = SolverConfig::default();
    let mut checks = Vec::new();
    for (name, r) in [("pendulum", 1.5), ("henon-heiles", 0.4)] {
        let prob = registry(name).expect("registered");
        let sys = System::Hamiltonian(prob.system.as_ref());
        let d = sys.dim();
        let slex = if d == 2 {
            Scheme::gr_slex()
        } else {
            Scheme::locally_exact(Rule::GrMultiSymmetric, RefPolicy::Midpoint).expect("valid")
        };
        let mid =
            Scheme::locally_exact(Rule::ImplicitMidpoint, RefPolicy::Midpoint).expect("valid");
        for scheme in [slex, mid] {
            let mut t = Tracker::at_most(
                format!(
                    "{name} {} step(-h) after step(h), 100 states",
                    scheme.label()
                ),
                1e-10,
            );
            for _ in 0..100 {
                let y = uniform_vec(rng, d, r);
                t.record((|| {
                    let fwd = step(&scheme, sys, &y, H, &cfg)?;
                    let back = step(&scheme, sys, &fwd.y_next, -H, &cfg)?;
                    Ok((&back.y_next - &y).max_abs())
                })());
            }
            checks.push(t.finish());
        }
    }
    checks
}

/// Every scheme stays at every registered equilibrium for 10³ steps of 0.5.
fn suite_fixed_points(_rng: &mut ChaCha8Rng) -> Vec<Check> {
    let cfg = SolverConfig::default();
    let mut checks = Vec::new();
    for name in PROBLEM_NAMES {
        let prob = registry(name).expect("registered");
        let sys = prob.system.as_ref();
        for eq in &prob.equilibria {
            let mut t = Tracker::at_most(
                format!(
                    "{name} equilibrium {:?}, every scheme, 1000 steps",
                    eq.as_slice()
                ),
                1e-12,
            );
            for scheme in all_schemes(sys, eq) {
                t.record(
                    integrate(&scheme, System::Hamiltonian(sys), eq, &[0.5; 1000], &cfg)
                        .map(|traj| {
                            traj.states
                                .iter()
                                .map(|y| (y - eq).max_abs())
                                .fold(0.0, f64::max)
                        })
                        .map_err(|e| Error::InvalidScheme(format!("{}: {e}", scheme.label()))),
                );
            }
            checks.push(t.finish());
        }
    }
    checks
}

/// Runs a suite with the given seed.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        Suite::Linear => suite_linear(&mut rng),
        Suite::LocalExactness => suite_local_exactness(&mut rng),
        Suite::ThetaForm => suite_theta_form(&mut rng),
        Suite::GradientIdentity => suite_gradient_identity(&mut rng),
        Suite::Reversibility => suite_reversibility(&mut rng),
        Suite::FixedPoints => suite_fixed_points(&mut rng),
    };
    SuiteReport {
        suite,
        seed,
        checks,
    }
}
