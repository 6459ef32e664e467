//! Closed-form flows of linear systems and of the driven oscillator.

use geodint::exact_linear::{
    exact_step_linear, exact_step_oscillator, oscillator_energy, HarmonicOscillator, LinearSystem,
};
use geodint::matfun::{Matrix, Vector};

fn main() -> geodint::Result<()> {
    // Damped oscillator x'' + 0.2x' + x = 1 written as a first-order system.
    let lin = LinearSystem::new(
        Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, -0.2]])?,
        Vector::from_slice(&[0.0, 1.0]),
    )?;
    let mut y = Vector::from_slice(&[0.0, 0.0]);
    for n in 1..=5 {
        y = exact_step_linear(&lin, &y, 2.0)?;
        println!("t = {:>4}: x = {:>10.6}, v = {:>10.6}", 2 * n, y[0], y[1]);
    }

    // Coupled undamped oscillators with a constant force.
    let omega = Matrix::from_rows(&[&[1.2, 0.3], &[0.3, 0.8]])?;
    let osc = HarmonicOscillator::new(omega, Vector::from_slice(&[0.1, -0.2]))?;
    let mut x = Vector::from_slice(&[1.0, 0.0]);
    let mut p = Vector::from_slice(&[0.0, 0.5]);
    let e0 = oscillator_energy(&osc, &x, &p)?;
    for _ in 0..1000 {
        (x, p) = exact_step_oscillator(&osc, &x, &p, 0.37)?;
    }
    let e1 = oscillator_energy(&osc, &x, &p)?;
    println!("oscillator energy after 1000 steps: {e1:.15} (start {e0:.15})");
    Ok(())
}
