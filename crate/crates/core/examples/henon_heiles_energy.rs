//! Energy conservation of the multidimensional schemes on Hénon–Heiles.

use geodint::integrators::{integrate, Rule, Scheme, SolverConfig};
use geodint::matfun::Vector;
use geodint::model::{Hamiltonian, HenonHeiles, RefPolicy, System};
use geodint::oracle::energy_drift_argmax;

fn main() -> geodint::Result<()> {
    let y0 = Vector::from_slice(&[0.1, 0.0, 0.0, 0.3]);
    println!("H(y0) = {:.12}", HenonHeiles.energy(y0.as_slice())?);
    let cfg = SolverConfig::default();
    let schedule = vec![0.05; 20_000];
    for rule in [
        Rule::GrMultiSymmetric,
        Rule::GrMultiIncrement,
        Rule::GrMultiSeparable,
    ] {
        for scheme in [
            Scheme::classical(rule)?,
            Scheme::locally_exact(rule, RefPolicy::Midpoint)?,
        ] {
            let traj = integrate(
                &scheme,
                System::Hamiltonian(&HenonHeiles),
                &y0,
                &schedule,
                &cfg,
            )?;
            let (drift, at) = energy_drift_argmax(&traj, &HenonHeiles);
            println!("{:<28} drift {drift:.2e} at step {at}", scheme.label());
        }
    }
    let midpoint = Scheme::classical(Rule::ImplicitMidpoint)?;
    let traj = integrate(
        &midpoint,
        System::Hamiltonian(&HenonHeiles),
        &y0,
        &schedule,
        &cfg,
    )?;
    println!(
        "{:<28} drift {:.2e}",
        midpoint.label(),
        energy_drift_argmax(&traj, &HenonHeiles).0
    );
    Ok(())
}
