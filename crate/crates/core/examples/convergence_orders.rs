//! Observed orders of the discrete-gradient family from endpoint errors.

use geodint::integrators::{Scheme, SolverConfig};
use geodint::matfun::Vector;
use geodint::model::{Pendulum, System};
use geodint::oracle::convergence_order;

fn main() -> geodint::Result<()> {
    let y0 = Vector::from_slice(&[2.0, 0.0]);
    let hs = [0.2, 0.1, 0.05, 0.025];
    for (name, scheme) in [
        ("GR", Scheme::gr()),
        ("GR-LEX", Scheme::gr_lex()),
        ("GR-SLEX", Scheme::gr_slex()),
    ] {
        let est = convergence_order(
            &scheme,
            System::Hamiltonian(&Pendulum),
            &y0,
            2.0,
            &hs,
            &SolverConfig::default(),
        )?;
        println!(
            "{name}: slope {:.3}, fit residual {:.1e}",
            est.slope, est.fit_residual
        );
        for (h, e) in est.errors {
            println!("  h = {h:<6} error {e:.3e}");
        }
    }
    Ok(())
}
