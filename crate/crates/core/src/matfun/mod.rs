//! Dense matrix-function kernel: linear solves, `expm`, `φ₁`, the even
//! functions `tanh z / z`, `tan z / z`, `z coth z`, and spectral bounds.

mod dense;
mod even;
mod expm;

pub use dense::{inverse, solve, solve_matrix, Lu, Matrix, Vector, SINGULAR_PIVOT_RTOL};
pub use even::{
    cos_sinc_sq, even_fn, even_fn_sq, tanc_of_square, zcotz_of_square, EvenKind, SERIES_TERMS,
    TANC_MARGIN,
};
pub(crate) use expm::spectral_bound_below;
pub use expm::{expm, expm_phi1, oscillation_bound, phi1, spectral_bound};
