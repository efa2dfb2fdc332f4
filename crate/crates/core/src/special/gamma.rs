use std::f64::consts::PI;

use super::nonpositive_integer;
use crate::error::{Error, Result};

/// Rising factorial (a)_k = a(a+1)···(a+k−1), with (a)_0 = 1.
pub fn pochhammer(a: f64, k: u64) -> f64 {
    (0..k).map(|i| a + i as f64).product()
}

/// B_{2j}/(2j) for j = 1..8.
const ASYMPTOTIC: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// ψ(x) = Γ'(x)/Γ(x).
///
/// Shifts x above 10 with ψ(x+1) = ψ(x) + 1/x, then applies the asymptotic
/// expansion ln x − 1/(2x) − Σ B_{2j}/(2j x^{2j}). Negative arguments go
/// through the reflection ψ(x) = ψ(1−x) − π cot(πx).
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Ok(x);
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole {
            function: "digamma",
            x,
        });
    }
    if x < 0.0 {
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut acc = 0.0;
    let mut x = x;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut p = inv2;
    for c in ASYMPTOTIC {
        series += c * p;
        p *= inv2;
    }
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// (ln|Γ(x)|, sign Γ(x)). Errors at the poles.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole {
            function: "gamma",
            x,
        });
    }
    let (lg, sign) = libm::lgamma_r(x);
    Ok((lg, sign as f64))
}

/// 1/Γ(x), which is entire: zero at the nonpositive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x.abs() < 170.0 {
        let g = libm::tgamma(x);
        if g.is_finite() && g != 0.0 {
            return 1.0 / g;
        }
    }
    let (lg, sign) = libm::lgamma_r(x);
    sign as f64 * (-lg).exp()
}

/// ψ(x)/Γ(x), continued through the poles: at x = −j it equals (−1)^{j+1} j!.
pub fn psi_over_gamma(x: f64) -> f64 {
    if let Some(j) = nonpositive_integer(x, 0.0) {
        let fact = libm::tgamma(j as f64 + 1.0);
        return if j % 2 == 0 { -fact } else { fact };
    }
    digamma(x).expect("not a pole") * rgamma(x)
}
