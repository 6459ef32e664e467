//! Discrete gradients and their defining identity `<g, Δy> = ΔH`.

use geodint::disgrad::{increment_gradient, linearization_matrices, symmetric_gradient};
use geodint::matfun::Vector;
use geodint::model::{Hamiltonian, HenonHeiles};

fn main() -> geodint::Result<()> {
    let y = Vector::from_slice(&[0.2, -0.1, 0.3, 0.05]);
    let z = Vector::from_slice(&[0.25, -0.05, 0.28, 0.1]);
    let dh = HenonHeiles.energy(z.as_slice())? - HenonHeiles.energy(y.as_slice())?;
    println!("H(z) - H(y) = {dh:.15}");
    for (name, g) in [
        ("increment", increment_gradient(&HenonHeiles, &y, &z)?),
        ("symmetric", symmetric_gradient(&HenonHeiles, &y, &z)?),
    ] {
        let dot = g.value.dot(&(&z - &y));
        println!("{name:>9}: g = {:?}, <g, z - y> = {dot:.15}", g.as_slice());
    }
    let t = linearization_matrices(&HenonHeiles, &y)?;
    println!(
        "R = (A - B) is antisymmetric: |R + R^T| = {:.1e}",
        (&t.r + &t.r.transpose()).max_abs()
    );
    Ok(())
}
