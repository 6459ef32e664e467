//! Step coefficients `δ` and `θ` of the locally exact schemes.

use std::f64::consts::PI;

use super::scheme::{Gr1dVariant, GrMultiVariant, Rule};
use crate::disgrad::linearization_from_hessian;
use crate::error::{Error, Result};
use crate::matfun::{
    even_fn_sq, expm, expm_phi1, solve_matrix, spectral_bound, spectral_bound_below,
    tanc_of_square, zcotz_of_square, EvenKind, Matrix, Vector,
};
use crate::model::{canonical_structure, hamiltonian_jacobian, Hamiltonian};

/// Largest accepted `h·ω` for tan/tanh/coth-based coefficients, where `ω`
/// bounds the oscillation frequencies of the linearization.
pub const STEP_GUARD: f64 = PI - 0.1;

/// Tolerance of the internal θ-form consistency check.
const THETA_FORM_TOL: f64 = 1e-10;

/// A step coefficient: a multiple of the identity or a full matrix.
pub(crate) enum Coef {
    Scalar(f64),
    Full(Matrix),
}

impl Coef {
    pub(crate) fn apply(&self, v: &[f64]) -> Vector {
        match self {
            Coef::Scalar(s) => Vector::from_vec(v.iter().map(|x| s * x).collect()),
            Coef::Full(m) => m.mul_vec(v),
        }
    }
}

/// Rejects steps with `|h|·ω ≥ STEP_GUARD`, where `ω` is the smaller of the
/// spectral bound of `F'` and that of its skew part (which bounds the
/// imaginary parts of the eigenvalues). Returns a bound on the spectral
/// radius of `hF'/2`, refined only as far as the guard needs.
fn oscillation_guard(fp: &Matrix, h: f64) -> Result<f64> {
    let target = STEP_GUARD / h.abs();
    let rho = spectral_bound_below(fp, target)?;
    if rho < target {
        return Ok(0.5 * h.abs() * rho);
    }
    let skew = fp.axpy(-1.0, &fp.transpose()).scale(0.5);
    let osc = rho.min(spectral_bound(&skew)?);
    let bound = h.abs() * osc;
    if bound >= STEP_GUARD {
        return Err(Error::ArgumentTooLarge {
            bound,
            limit: STEP_GUARD,
        });
    }
    Ok(0.5 * h.abs() * rho)
}

/// `h·tanhc(hF'/2) = 2F'⁻¹ tanh(hF'/2)`, evaluated from `(hF'/2)²`.
fn half_tanh_delta(fp: &Matrix, h: f64) -> Result<(Matrix, f64)> {
    let arg = oscillation_guard(fp, h)?;
    let x = fp.matmul(fp).scale(0.25 * h * h);
    Ok((even_fn_sq(&x, EvenKind::Tanhc)?.scale(h), arg))
}

/// `δ = (e^{hF'} − I)(F' + Ψ̄₂(e^{hF'} − I))⁻¹`, the locally exact coefficient
/// of `yₙ₊₁ − yₙ = δ Ψ(yₙ, yₙ₊₁)` where `Ψ̄₂` is `∂Ψ/∂yₙ₊₁` on the diagonal.
pub fn delta_general(psi2_bar: &Matrix, fp: &Matrix, h: f64) -> Result<Matrix> {
    if psi2_bar.dim() != fp.dim() {
        return Err(Error::DimensionMismatch {
            expected: fp.dim(),
            got: psi2_bar.dim(),
        });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("step size"));
    }
    let em1 = expm(&fp.scale(h))?.add_diag(-1.0);
    let bracket = fp + &psi2_bar.matmul(&em1);
    // δ·M = E − I  ⇔  Mᵀ δᵀ = (E − I)ᵀ
    Ok(solve_matrix(&bracket.transpose(), &em1.transpose())?.transpose())
}

/// Closed-form locally exact `δ` of a Ψ-class rule and the recorded
/// spectral argument (0 when there is no tan/tanh factor).
pub fn psi_delta(rule: Rule, fp: &Matrix, h: f64) -> Result<(Matrix, f64)> {
    match rule {
        Rule::ExplicitEuler | Rule::ExponentialEuler => {
            let (_, phi) = expm_phi1(&fp.scale(h))?;
            Ok((phi.scale(h), 0.0))
        }
        Rule::ImplicitEuler => {
            let (_, phi) = expm_phi1(&fp.scale(-h))?;
            Ok((phi.scale(h), 0.0))
        }
        Rule::ImplicitMidpoint | Rule::Trapezoidal => half_tanh_delta(fp, h),
        _ => Err(Error::InvalidScheme(format!(
            "{} has no Ψ-class coefficient",
            rule.name()
        ))),
    }
}

/// Scalar `δ` of the one-degree-of-freedom discrete-gradient schemes at `ȳ`:
/// `(2/ω) tan(hω/2)` (symmetric) or `2/(ω cot(hω/2) + H_xp)` (increment),
/// with `ω² = H_xx H_pp − H_xp²` continued to `ω² < 0` through tanh/coth.
pub fn gr1d_delta(
    sys: &dyn Hamiltonian,
    variant: Gr1dVariant,
    y_bar: &Vector,
    h: f64,
) -> Result<(f64, f64)> {
    let hb = sys.hessian(y_bar.as_slice())?;
    let (hxx, hxp, hpp) = (hb.xx[(0, 0)], hb.xp[(0, 0)], hb.pp[(0, 0)]);
    let w2 = hxx * hpp - hxp * hxp;
    if !w2.is_finite() {
        return Err(Error::NonFinite("frequency"));
    }
    let q = 0.25 * h * h * w2;
    if q > 0.0 {
        let bound = h.abs() * w2.sqrt();
        if bound >= STEP_GUARD {
            return Err(Error::ArgumentTooLarge {
                bound,
                limit: STEP_GUARD,
            });
        }
    }
    let arg = q.abs().sqrt();
    let delta = match variant {
        Gr1dVariant::Symmetric => h * tanc_of_square(q),
        Gr1dVariant::Increment => {
            let den = zcotz_of_square(q) + 0.5 * h * hxp;
            let threshold = 1e-14 * (1.0 + (0.5 * h * hxp).abs());
            if den.abs() <= threshold {
                return Err(Error::SingularMatrix {
                    pivot: den,
                    threshold,
                });
            }
            h / den
        }
    };
    Ok((delta, arg))
}

/// `‖θᵀ − S⁻¹θS‖_max`; zero exactly for matrices of θ-form
/// `[[δ, −σ], [ρ, δᵀ]]` with `ρ`, `σ` antisymmetric.
pub fn theta_form_defect(theta: &Matrix) -> f64 {
    let d = theta.dim();
    let m = d / 2;
    // (S⁻¹θS)ᵢⱼ = σᵢσⱼ θ_{π(i)π(j)}, with π swapping the halves and σ = ±1 on them.
    let swap = |i: usize| if i < m { i + m } else { i - m };
    let sign = |i: usize| if i < m { 1.0 } else { -1.0 };
    let mut worst = 0f64;
    for i in 0..d {
        for j in 0..d {
            let conj = sign(i) * sign(j) * theta[(swap(i), swap(j))];
            worst = worst.max((theta[(j, i)] - conj).abs());
        }
    }
    worst
}

/// Matrix `θ` of the multidimensional discrete-gradient schemes at `ȳ`:
///
/// * symmetric: `2F'⁻¹ tanh(hF'/2)`;
/// * increment: `2(SR + F' coth(hF'/2))⁻¹`;
/// * separable: `diag(δ, δᵀ)` with `δ = h tanc(hΩ/2)`, `Ω² = H_pp H_xx`.
pub fn grmulti_theta(
    sys: &dyn Hamiltonian,
    variant: GrMultiVariant,
    y_bar: &Vector,
    h: f64,
) -> Result<(Matrix, f64)> {
    let m = sys.dof();
    let (theta, arg) = match variant {
        GrMultiVariant::Symmetric => {
            let fp = hamiltonian_jacobian(sys, y_bar.as_slice())?;
            half_tanh_delta(&fp, h)?
        }
        GrMultiVariant::Increment => {
            let fp = hamiltonian_jacobian(sys, y_bar.as_slice())?;
            let arg = oscillation_guard(&fp, h)?;
            let x = fp.matmul(&fp).scale(0.25 * h * h);
            let coth = even_fn_sq(&x, EvenKind::XCothX)?.scale(2.0 / h);
            let hess = sys.hessian(y_bar.as_slice())?.full();
            let r = linearization_from_hessian(&hess).r;
            let bracket = &canonical_structure(m).matmul(&r) + &coth;
            let two = Matrix::scalar(2 * m, 2.0);
            (solve_matrix(&bracket, &two)?, arg)
        }
        GrMultiVariant::Separable => {
            let hb = sys.hessian(y_bar.as_slice())?;
            let x = hb.pp.matmul(&hb.xx).scale(0.25 * h * h);
            // A norm bound suffices here; even_fn_sq applies the guard itself.
            let arg = spectral_bound_below(&x, f64::INFINITY)?.sqrt();
            let delta = even_fn_sq(&x, EvenKind::Tanc)?.scale(h);
            let zero = Matrix::zeros(m);
            (
                Matrix::from_blocks(&delta, &zero, &zero, &delta.transpose()),
                arg,
            )
        }
    };
    theta.check_finite("theta")?;
    let defect = theta_form_defect(&theta);
    if defect > THETA_FORM_TOL {
        return Err(Error::ThetaFormViolation(defect));
    }
    Ok((theta, arg))
}
