//! Probing local exactness: the linearized step map against the exact
//! discretization of the linearized equation.

use geodint::integrators::{Rule, Scheme, SolverConfig};
use geodint::matfun::Vector;
use geodint::model::{Pendulum, RefPolicy, System};
use geodint::oracle::local_exactness_probe;

fn main() -> geodint::Result<()> {
    let y_bar = Vector::from_slice(&[0.4, -0.2]);
    let cfg = SolverConfig::default();
    for h in [0.1, 0.3, 0.5] {
        println!("h = {h}");
        for rule in [
            Rule::ExplicitEuler,
            Rule::ImplicitMidpoint,
            Rule::Gr1dSymmetric,
            Rule::GrMultiIncrement,
        ] {
            let le = Scheme::locally_exact(rule, RefPolicy::Current)?;
            let classical = Scheme::classical(rule)?;
            let d_le = local_exactness_probe(&le, System::Hamiltonian(&Pendulum), &y_bar, h, &cfg)?;
            let d_cl =
                local_exactness_probe(&classical, System::Hamiltonian(&Pendulum), &y_bar, h, &cfg)?;
            println!(
                "  {:<16} locally exact {d_le:.1e}  classical {d_cl:.1e}",
                rule.name()
            );
        }
    }
    Ok(())
}
