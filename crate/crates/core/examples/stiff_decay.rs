//! Locally exact midpoint on a stiff linear equation: exact decay at a step
//! where the classical rule only stays bounded.

use geodint::exact_linear::LinearSystem;
use geodint::integrators::{integrate, Rule, Scheme, SolverConfig};
use geodint::matfun::{Matrix, Vector};
use geodint::model::{RefPolicy, System};

fn main() -> geodint::Result<()> {
    let lin = LinearSystem::homogeneous(Matrix::diag(&[-10.0]));
    let y0 = Vector::from_slice(&[1.0]);
    let cfg = SolverConfig::default();
    let exact = integrate(
        &Scheme::locally_exact(Rule::ImplicitMidpoint, RefPolicy::Midpoint)?,
        System::Field(&lin),
        &y0,
        &[1.0; 8],
        &cfg,
    )?;
    let classical = integrate(
        &Scheme::classical(Rule::ImplicitMidpoint)?,
        System::Field(&lin),
        &y0,
        &[1.0; 8],
        &cfg,
    )?;
    println!(
        "{:>2} {:>14} {:>14} {:>14}",
        "n", "exp(-10n)", "locally exact", "classical"
    );
    for n in 0..=8 {
        println!(
            "{n:>2} {:>14.6e} {:>14.6e} {:>14.6e}",
            (-10.0 * n as f64).exp(),
            exact.states[n][0],
            classical.states[n][0]
        );
    }
    Ok(())
}
