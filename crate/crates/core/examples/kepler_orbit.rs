//! An eccentric Kepler orbit with the symmetric discrete gradient at the
//! midpoint; the energy is kept while the orbit precesses.

use geodint::integrators::{integrate, Rule, Scheme, SolverConfig};
use geodint::model::{Kepler, RefPolicy, System};
use geodint::oracle::energy_drift;

fn main() -> geodint::Result<()> {
    let y0 = Kepler::periapsis_state(0.6);
    let scheme = Scheme::locally_exact(Rule::GrMultiSymmetric, RefPolicy::Midpoint)?;
    let traj = integrate(
        &scheme,
        System::Hamiltonian(&Kepler),
        &y0,
        &vec![0.01; 10_000],
        &SolverConfig::default(),
    )?;
    for (t, y) in traj.times.iter().zip(&traj.states).step_by(1000) {
        let r = y[0].hypot(y[1]);
        println!("t = {t:>6.2}  r = {r:.6}");
    }
    println!(
        "energy drift over {} steps: {:.2e}",
        traj.len() - 1,
        energy_drift(&traj, &Kepler)
    );
    Ok(())
}
