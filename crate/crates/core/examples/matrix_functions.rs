//! The matrix-function kernel: `expm`, `φ₁` and the even functions behind the
//! locally exact coefficients.

use geodint::matfun::{even_fn, expm_phi1, EvenKind, Matrix};

fn show(name: &str, m: &Matrix) {
    println!("{name}:");
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:>12.8}")).collect();
        println!("  [{}]", row.join(" "));
    }
}

fn main() -> geodint::Result<()> {
    // Harmonic oscillator generator: e^{hA} is a rotation.
    let h = 0.5;
    let a = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]])?.scale(h);
    let (e, phi) = expm_phi1(&a)?;
    show("exp(hA)", &e);
    show("phi1(hA)", &phi);
    println!("cos h = {:.8}, sin h = {:.8}", h.cos(), h.sin());

    // tanh(z)/z of a skew matrix is tan(w)/w times the identity.
    let half = a.scale(0.5);
    show("tanhc(hA/2)", &even_fn(&half, EvenKind::Tanhc)?);
    println!("tan(h/2)/(h/2) = {:.8}", (h / 2.0).tan() / (h / 2.0));

    let s = Matrix::from_rows(&[&[0.3, 0.2], &[0.2, -0.4]])?;
    let t = even_fn(&s, EvenKind::Tanhc)?;
    let c = even_fn(&s, EvenKind::XCothX)?;
    show("tanhc(S) xcothx(S)", &t.matmul(&c));
    show("tanc(S)", &even_fn(&s, EvenKind::Tanc)?);
    Ok(())
}
