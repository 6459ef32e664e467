//! Supplying a user-defined Hamiltonian: a Duffing oscillator
//! `H = p²/2 + x²/2 − x⁴/8`, integrated with GR-SLEX.

use geodint::integrators::{integrate, Scheme, SolverConfig};
use geodint::matfun::{Matrix, Vector};
use geodint::model::{Hamiltonian, HessianBlocks, System};
use geodint::oracle::energy_drift;

struct Duffing;

impl Hamiltonian for Duffing {
    fn dof(&self) -> usize {
        1
    }
    fn energy(&self, y: &[f64]) -> geodint::Result<f64> {
        Ok(0.5 * y[1] * y[1] + 0.5 * y[0] * y[0] - 0.125 * y[0].powi(4))
    }
    fn gradient(&self, y: &[f64]) -> geodint::Result<Vector> {
        Ok(Vector::from_slice(&[y[0] - 0.5 * y[0].powi(3), y[1]]))
    }
    fn hessian(&self, y: &[f64]) -> geodint::Result<HessianBlocks> {
        Ok(HessianBlocks {
            xx: Matrix::diag(&[1.0 - 1.5 * y[0] * y[0]]),
            xp: Matrix::zeros(1),
            pp: Matrix::identity(1),
        })
    }
    fn is_separable(&self) -> bool {
        true
    }
}

fn main() -> geodint::Result<()> {
    let y0 = Vector::from_slice(&[0.8, 0.0]);
    let traj = integrate(
        &Scheme::gr_slex(),
        System::Hamiltonian(&Duffing),
        &y0,
        &vec![0.2; 5000],
        &SolverConfig::default(),
    )?;
    let end = traj.last().unwrap();
    println!(
        "after {} steps: x = {:.6}, p = {:.6}",
        traj.len() - 1,
        end[0],
        end[1]
    );
    println!("energy drift: {:.2e}", energy_drift(&traj, &Duffing));
    Ok(())
}
