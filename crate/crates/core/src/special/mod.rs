//! Real-argument special functions used by the stationary-law solution.

mod gamma;
mod hyp2f1;

pub use gamma::{digamma, ln_gamma_signed, pochhammer, psi_over_gamma, rgamma};
pub use hyp2f1::{
    hyp2f1, hyp2f1_on_branch, hyp2f1_series, select_branch, Branch, Hyp2F1Eval, INTEGER_TOL,
};

/// `Some(n)` when x lies within `tol` of the nonpositive integer −n.
pub(crate) fn nonpositive_integer(x: f64, tol: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= tol {
        Some((-r) as u64)
    } else {
        None
    }
}
