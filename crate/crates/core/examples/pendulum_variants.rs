//! The discrete-gradient family on the pendulum: baseline, frozen at the
//! equilibrium, at the current point and at the midpoint.

use geodint::integrators::{integrate, Scheme, SolverConfig};
use geodint::matfun::Vector;
use geodint::model::{Pendulum, System};
use geodint::oracle::{energy_drift, reference_solve};

fn main() -> geodint::Result<()> {
    let sys = System::Hamiltonian(&Pendulum);
    let y0 = Vector::from_slice(&[2.0, 0.0]);
    let (h, steps) = (0.1, 100);
    let reference = reference_solve(sys, &y0, h * steps as f64, 1e-13)?;
    let cfg = SolverConfig::default();
    let schemes = [
        ("GR", Scheme::gr()),
        ("MOD-GR", Scheme::mod_gr(Vector::zeros(2))),
        ("GR-LEX", Scheme::gr_lex()),
        ("GR-SLEX", Scheme::gr_slex()),
    ];
    println!("pendulum, y0 = (2, 0), h = {h}, T = {}", h * steps as f64);
    for (name, scheme) in schemes {
        let traj = integrate(&scheme, sys, &y0, &vec![h; steps], &cfg)?;
        let err = (traj.last().unwrap() - &reference).norm();
        println!(
            "{name:>8}: endpoint error {err:.3e}, energy drift {:.1e}",
            energy_drift(&traj, &Pendulum)
        );
    }
    Ok(())
}
