//! Simplified Newton iteration for the implicit step equations.

use super::scheme::SolverConfig;
use crate::error::{Error, Result};
use crate::matfun::{Lu, Matrix, Vector};

/// The finite-difference Jacobian is rebuilt every this many iterations.
const JACOBIAN_REFRESH: usize = 5;

/// Maximum number of step halvings in the damping line search.
const MAX_HALVINGS: usize = 6;

/// A residual map; the flag marks finite-difference probes, for which the
/// map may reuse state-dependent coefficients from its last regular call.
pub(crate) type SplitResidual<'a> = dyn FnMut(&Vector, bool) -> Result<Vector> + 'a;

fn fd_jacobian(residual: &mut SplitResidual<'_>, y: &Vector, r: &Vector) -> Result<Lu> {
    let d = y.dim();
    let mut data = vec![0.0; d * d];
    let mut probe = y.clone();
    for j in 0..d {
        let eta = f64::EPSILON.sqrt() * y[j].abs().max(1.0);
        probe[j] = y[j] + eta;
        let eta = probe[j] - y[j];
        let rj = residual(&probe, true)?;
        probe[j] = y[j];
        for i in 0..d {
            data[i * d + j] = (rj[i] - r[i]) / eta;
        }
    }
    let jac = Matrix::new(d, data)?;
    Lu::factor(&jac)
}

/// Solves `r(y) = 0` starting from `guess`.
///
/// Uses `y ← y − λ J̃⁻¹ r(y)` with a forward-difference Jacobian `J̃`
/// refreshed every few iterations (and whenever the line search stalls) and
/// `λ` halved until the residual decreases. Converged when
/// `‖r‖ ≤ tol (1 + ‖y‖)`. Returns `(y, iterations, ‖r‖)`.
pub fn solve_implicit<R>(
    mut residual: R,
    guess: Vector,
    cfg: &SolverConfig,
) -> Result<(Vector, usize, f64)>
where
    R: FnMut(&Vector) -> Result<Vector>,
{
    solve_split(&mut |y: &Vector, _| residual(y), guess, cfg)
}

/// As [`solve_implicit`], with Jacobian probes flagged to the residual map.
pub(crate) fn solve_split(
    residual: &mut SplitResidual<'_>,
    guess: Vector,
    cfg: &SolverConfig,
) -> Result<(Vector, usize, f64)> {
    cfg.validate()?;
    let mut y = guess;
    let mut r = residual(&y, false)?;
    let mut rn = r.norm();
    let mut lu: Option<Lu> = None;
    let mut since_refresh = 0;
    for k in 0..cfg.max_iter {
        if rn <= cfg.tol * (1.0 + y.norm()) {
            return Ok((y, k, rn));
        }
        if lu.is_none() || since_refresh >= JACOBIAN_REFRESH {
            lu = Some(fd_jacobian(residual, &y, &r).map_err(|e| match e {
                Error::SingularMatrix { .. } => Error::NoConvergence {
                    iterations: k,
                    residual: rn,
                },
                other => other,
            })?);
            since_refresh = 0;
        }
        let dy = lu.as_ref().expect("factored").solve_vec(r.as_slice());
        let mut lambda = 1.0;
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = y.axpy(-lambda, &dy);
            match residual(&trial, false) {
                Ok(rt) => {
                    let tn = rt.norm();
                    if tn.is_finite() && tn < rn {
                        accepted = Some((trial, rt, tn));
                        break;
                    }
                }
                Err(e) => last_err = Some(e),
            }
            lambda *= 0.5;
        }
        since_refresh += 1;
        match accepted {
            Some((trial, rt, tn)) => {
                y = trial;
                r = rt;
                rn = tn;
            }
            None => {
                if since_refresh == 1 {
                    // A fresh Jacobian could not reduce the residual.
                    if let Some(e) = last_err {
                        if !matches!(e, Error::NonFinite(_)) {
                            return Err(e);
                        }
                    }
                    return Err(Error::NoConvergence {
                        iterations: k + 1,
                        residual: rn,
                    });
                }
                since_refresh = JACOBIAN_REFRESH;
            }
        }
    }
    if rn <= cfg.tol * (1.0 + y.norm()) {
        return Ok((y, cfg.max_iter, rn));
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        residual: rn,
    })
}
