//! Gauss hypergeometric function ₂F₁(a, b; c; x) for real parameters and
//! real x < 1.
//!
//! Branches:
//! - terminating: a or b is a nonpositive integer, exact polynomial;
//! - series: |x| < 1, with the Pfaff transform for x < −1/2;
//! - connection: x ≤ −1 with a − b ∉ ℤ, via the 1/x expansion
//!   (Abramowitz–Stegun 15.3.7);
//! - logarithmic: x ≤ −1 with a − b ∈ ℤ (A&S 15.3.13–14, DLMF 15.8.8).

use serde::{Deserialize, Serialize};

use super::gamma::{digamma, ln_gamma_signed, rgamma};
use super::nonpositive_integer;
use crate::error::{ensure_finite, Error, Result};

/// Distance to an integer below which a parameter is treated as that integer.
pub const INTEGER_TOL: f64 = 1e-12;

const SERIES_EPS: f64 = 1e-17;
const MAX_TERMS: usize = 10_000_000;
const MAX_LOG_TERMS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "series")]
    Series,
    #[serde(rename = "terminating")]
    Terminating,
    #[serde(rename = "connection_15_3_7")]
    Connection,
    #[serde(rename = "logarithmic_15_3_13")]
    Logarithmic,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Series => "series",
            Branch::Terminating => "terminating",
            Branch::Connection => "connection_15_3_7",
            Branch::Logarithmic => "logarithmic_15_3_13",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyp2F1Eval {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x: f64,
    pub branch: Branch,
    pub value: f64,
}

/// Parameters after validation, with near-integers snapped.
#[derive(Debug, Clone, Copy)]
struct Params {
    a: f64,
    b: f64,
    c: f64,
    /// Degree of the polynomial when the series terminates.
    degree: Option<u64>,
    /// |a − b| when it is an integer.
    int_diff: Option<u64>,
}

fn params(a: f64, b: f64, c: f64) -> Result<Params> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    ensure_finite("c", c)?;
    if nonpositive_integer(c, INTEGER_TOL).is_some() {
        return Err(Error::Pole {
            function: "hyp2f1 (c is a nonpositive integer)",
            x: c,
        });
    }
    let (mut a, mut b) = (a, b);
    let na = nonpositive_integer(a, INTEGER_TOL);
    let nb = nonpositive_integer(b, INTEGER_TOL);
    if let Some(n) = na {
        a = -(n as f64);
    }
    if let Some(n) = nb {
        b = -(n as f64);
    }
    let degree = match (na, nb) {
        (Some(p), Some(q)) => Some(p.min(q)),
        (p, q) => p.or(q),
    };
    let d = a - b;
    let int_diff = if (d - d.round()).abs() <= INTEGER_TOL {
        // snap the larger parameter onto lo + m
        let m = d.round().abs() as u64;
        if d >= 0.0 {
            a = b + m as f64;
        } else {
            b = a + m as f64;
        }
        Some(m)
    } else {
        None
    };
    Ok(Params {
        a,
        b,
        c,
        degree,
        int_diff,
    })
}

/// Plain Gauss series Σ (a)_k (b)_k / ((c)_k k!) z^k.
fn gauss_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let num = (a + kf) * (b + kf);
        if num == 0.0 {
            return Ok(sum);
        }
        term *= num / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        // Require the term ratio to have settled below one before trusting a
        // small term.
        let ratio = ((a + kf + 1.0) * (b + kf + 1.0) / ((c + kf + 1.0) * (kf + 2.0)) * z).abs();
        if term.abs() <= SERIES_EPS * sum.abs() && ratio < 1.0 {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::DivergentRegion { x: z })
}

/// Series route valid for every z < 1: the Pfaff transform
/// F(a,b;c;z) = (1−z)^{−a} F(a, c−b; c; z/(z−1)) maps z < −1/2 into (1/3, 1).
fn series_route(p: &Params, z: f64) -> Result<f64> {
    if p.degree.is_some() {
        return gauss_series(p.a, p.b, p.c, z);
    }
    if z >= 1.0 {
        return Err(Error::DivergentRegion { x: z });
    }
    if z >= -0.5 {
        return gauss_series(p.a, p.b, p.c, z);
    }
    // the smaller parameter in the prefactor keeps the transformed series
    // convergent as z/(z−1) → 1
    let (lo, hi) = if p.a <= p.b { (p.a, p.b) } else { (p.b, p.a) };
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-lo) * gauss_series(lo, p.c - hi, p.c, w)?)
}

/// Γ(n1)Γ(n2) / (Γ(d1)Γ(d2)); zero when a denominator sits on a pole.
fn gamma_ratio(n1: f64, n2: f64, d1: f64, d2: f64) -> Result<f64> {
    if rgamma(d1) == 0.0 || rgamma(d2) == 0.0 {
        return Ok(0.0);
    }
    let (l1, s1) = ln_gamma_signed(n1)?;
    let (l2, s2) = ln_gamma_signed(n2)?;
    let (l3, s3) = ln_gamma_signed(d1)?;
    let (l4, s4) = ln_gamma_signed(d2)?;
    Ok(s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp())
}

/// A&S 15.3.7 restricted to real x < 0.
fn connection(p: &Params, x: f64) -> Result<f64> {
    let (a, b, c) = (p.a, p.b, p.c);
    let w = 1.0 / x;
    let mut value = 0.0;
    let g1 = gamma_ratio(c, b - a, b, c - a)?;
    if g1 != 0.0 {
        let inner = params(a, a - c + 1.0, a - b + 1.0)?;
        value += g1 * (-x).powf(-a) * series_route(&inner, w)?;
    }
    let g2 = gamma_ratio(c, a - b, a, c - b)?;
    if g2 != 0.0 {
        let inner = params(b, b - c + 1.0, b - a + 1.0)?;
        value += g2 * (-x).powf(-b) * series_route(&inner, w)?;
    }
    Ok(value)
}

/// ln|(a)_k| and its sign.
fn ln_pochhammer(a: f64, k: u64) -> Result<(f64, f64)> {
    let (l1, s1) = ln_gamma_signed(a + k as f64)?;
    let (l0, s0) = ln_gamma_signed(a)?;
    Ok((l1 - l0, s1 * s0))
}

fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Integer-difference formula (DLMF 15.8.8 times Γ(c)) for real x ≤ −1.
///
/// With lo = min(a, b), hi = lo + m:
///
/// ```text
/// F/Γ(c) = (−x)^{−lo}/Γ(hi) Σ_{k<m} (lo)_k (m−k−1)!/(k! Γ(c−lo−k)) x^{−k}
///        + (−x)^{−lo}/Γ(lo) Σ_{k≥0} (hi)_k/(k!(k+m)!) (−1)^k x^{−k−m}
///            · [ln(−x) + ψ(k+1) + ψ(k+m+1) − ψ(hi+k) − ψ(c−hi−k)] / Γ(c−hi−k)
/// ```
///
/// where ψ(y)/Γ(y) is continued through the poles of Γ.
fn logarithmic(p: &Params, m: u64, x: f64) -> Result<f64> {
    let (lo, hi) = if p.a <= p.b { (p.a, p.b) } else { (p.b, p.a) };
    let c = p.c;
    let neg = -x;
    let ln_neg = neg.ln();
    let pre = neg.powf(-lo);

    let mut finite = 0.0;
    let mut xk = 1.0;
    for k in 0..m {
        let poch = super::gamma::pochhammer(lo, k);
        finite += poch * libm::tgamma((m - k) as f64) / libm::tgamma(k as f64 + 1.0)
            * rgamma(c - lo - k as f64)
            * xk;
        xk /= x;
    }
    finite *= rgamma(hi);

    // (−1)^k x^{−k−m} = (−1)^m |x|^{−k−m} for x < 0
    let sign_m = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let ln_abs = neg.ln();
    let mut series = 0.0;
    let mut small = 0;
    let mut converged = false;
    for k in 0..MAX_LOG_TERMS {
        let kf = k as f64;
        let y = c - hi - kf;
        let (lp, sp) = ln_pochhammer(hi, k)?;
        let ln_coef = lp - ln_factorial(k) - ln_factorial(k + m) - (kf + m as f64) * ln_abs;
        // ln|1/Γ(y)| grows factorially; keep it in the exponent
        let (ln_rg, sign_rg, weight) = if let Some(j) = nonpositive_integer(y, INTEGER_TOL) {
            // −ψ(y)/Γ(y) → (−1)^j j! at the pole; 1/Γ(y) kills the log part
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (ln_factorial(j), sign, 1.0)
        } else {
            let (lg, sg) = ln_gamma_signed(y)?;
            let l = ln_neg + digamma(kf + 1.0)? + digamma(kf + m as f64 + 1.0)? - digamma(hi + kf)?;
            (-lg, sg, l - digamma(y)?)
        };
        let term = sp * sign_m * sign_rg * weight * (ln_coef + ln_rg).exp();
        series += term;
        if k > m && term.abs() <= SERIES_EPS * series.abs().max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 3 {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
        if !term.is_finite() {
            break;
        }
    }
    if !converged && neg > 1.0 {
        return Err(Error::DivergentRegion { x });
    }
    series *= rgamma(lo);

    let (lgc, sgc) = ln_gamma_signed(c)?;
    Ok(sgc * lgc.exp() * pre * (finite + series))
}

fn check_branch(p: &Params, x: f64, branch: Branch) -> Result<()> {
    let fail = |reason: &str| {
        Err(Error::BranchNotApplicable {
            branch: branch.name(),
            reason: reason.to_string(),
        })
    };
    match branch {
        Branch::Terminating if p.degree.is_none() => {
            fail("neither a nor b is a nonpositive integer")
        }
        Branch::Series if p.degree.is_none() && x >= 1.0 => fail("series diverges for x >= 1"),
        Branch::Connection if x >= 0.0 => fail("needs x < 0"),
        Branch::Connection if p.int_diff.is_some() => fail("a - b is an integer"),
        Branch::Logarithmic if p.int_diff.is_none() => fail("a - b is not an integer"),
        Branch::Logarithmic if p.degree.is_some() => fail("series terminates"),
        Branch::Logarithmic if x > -1.0 => fail("needs x <= -1"),
        _ => Ok(()),
    }
}

/// Evaluates on a chosen branch, for overlap checks and for finite-difference
/// stencils that must not straddle a branch switch.
///
/// The series branch accepts every x < 1 (via the Pfaff transform); the
/// connection branch every x < 0.
pub fn hyp2f1_on_branch(a: f64, b: f64, c: f64, x: f64, branch: Branch) -> Result<f64> {
    ensure_finite("x", x)?;
    let p = params(a, b, c)?;
    check_branch(&p, x, branch)?;
    match branch {
        Branch::Terminating | Branch::Series => series_route(&p, x),
        Branch::Connection => connection(&p, x),
        Branch::Logarithmic => logarithmic(&p, p.int_diff.expect("checked"), x),
    }
}

/// The branch [`hyp2f1`] selects for these inputs.
pub fn select_branch(a: f64, b: f64, c: f64, x: f64) -> Result<Branch> {
    ensure_finite("x", x)?;
    let p = params(a, b, c)?;
    Ok(if p.degree.is_some() {
        Branch::Terminating
    } else if x >= 1.0 {
        return Err(Error::DivergentRegion { x });
    } else if x > -1.0 {
        Branch::Series
    } else if p.int_diff.is_some() {
        Branch::Logarithmic
    } else {
        Branch::Connection
    })
}

/// ₂F₁(a, b; c; x) with automatic branch selection.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<Hyp2F1Eval> {
    let branch = select_branch(a, b, c, x)?;
    let value = hyp2f1_on_branch(a, b, c, x, branch)?;
    Ok(Hyp2F1Eval {
        a,
        b,
        c,
        x,
        branch,
        value,
    })
}

/// The defining power series, for |z| < 1 or a terminating parameter.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    let p = params(a, b, c)?;
    if p.degree.is_none() && z.abs() >= 1.0 {
        return Err(Error::DivergentRegion { x: z });
    }
    series_route(&p, z)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// ₂F₁(1/2, −4/κ; 3/2; x) for κ = p/q, from 40-digit reference evaluations.
    const STATIONARY_FAMILY: &[(u32, u32, f64, f64)] = &[
        (6, 5, -0.3, 1.4101256598815853517),
        (6, 5, -0.9, 2.8196391600658166603),
        (6, 5, -1.0, 3.1503729719714072913),
        (6, 5, -4.0, 36.780983868003350232),
        (6, 5, -10000.0, 2811399747435.9596037),
        (3, 1, -0.5, 1.2325694930223444075),
        (3, 1, -1.5, 1.7500629859726303801),
        (3, 1, -30.0, 28.033107860756874909),
        (3, 1, -10000.0, 58774.554367125586275),
        (5, 1, -0.9, 1.229488306772476118),
        (5, 1, -4.0, 1.9298242323607916623),
        (6, 1, -1.0, 1.204950925664989099),
        (6, 1, -30.0, 4.5484342657323036849),
        (8, 3, -0.3, 1.156527762589020168),
        (8, 3, -1.0, 1.5679519622087868022),
        (8, 3, -1.5, 1.8970368260303310127),
        (8, 3, -4.0, 3.9042921150331851959),
        (8, 3, -30.0, 45.402537566106516885),
        (8, 3, -10000.0, 250075.02268122137397),
        (8, 5, -1.5, 3.2278836363629734127),
        (8, 5, -30.0, 929.60570675169727526),
        (8, 5, -10000.0, 1667291760.4360885113),
        (8, 7, -4.0, 45.937772983613894813),
        (8, 7, -10000.0, 12505834427192.725669),
        (15, 2, -0.5, 1.0835489934497731749),
        (15, 2, -10000.0, 65.810276535264461547),
        (2, 1, -0.3, 1.218),
        (2, 1, -10000.0, 20006667.666666666667),
        (4, 1, -30.0, 11.0),
    ];

    fn family(p: u32, q: u32) -> (f64, f64, f64) {
        (0.5, -4.0 * q as f64 / p as f64, 1.5)
    }

    #[test]
    fn matches_reference_values() {
        for &(p, q, x, want) in STATIONARY_FAMILY {
            let (a, b, c) = family(p, q);
            let got = hyp2f1(a, b, c, x).unwrap();
            assert_relative_eq!(got.value, want, max_relative = 1e-11);
        }
    }

    #[test]
    fn general_parameters() {
        let table = [
            (
                0.3,
                0.7,
                1.9,
                -2.5,
                0.84431083537101491248,
                Branch::Connection,
            ),
            (0.3, 0.7, 1.9, -0.75, 0.93429825423364962892, Branch::Series),
            (
                -0.25,
                1.75,
                0.6,
                -3.0,
                1.9063049389818898001,
                Branch::Logarithmic,
            ),
            (
                1.2,
                2.2,
                3.5,
                -7.0,
                0.15666332468544045221,
                Branch::Logarithmic,
            ),
            (
                0.5,
                1.5,
                2.5,
                -2.0,
                0.69116536356909266132,
                Branch::Logarithmic,
            ),
            (
                2.5,
                0.5,
                1.25,
                -20.0,
                0.12515912725885134552,
                Branch::Logarithmic,
            ),
            (0.1, 0.2, 0.3, 0.6, 1.0614632815035053766, Branch::Series),
        ];
        for (a, b, c, x, want, branch) in table {
            let got = hyp2f1(a, b, c, x).unwrap();
            assert_eq!(got.branch, branch, "({a},{b},{c},{x})");
            assert_relative_eq!(got.value, want, max_relative = 1e-11);
        }
    }

    #[test]
    fn branch_selection() {
        assert_eq!(
            select_branch(0.5, -1.0, 1.5, -100.0).unwrap(),
            Branch::Terminating
        );
        assert_eq!(
            select_branch(0.5, -4.0 / 3.0, 1.5, -0.5).unwrap(),
            Branch::Series
        );
        assert_eq!(
            select_branch(0.5, -4.0 / 3.0, 1.5, -1.0).unwrap(),
            Branch::Connection
        );
        assert_eq!(
            select_branch(0.5, -1.5, 1.5, -1.0).unwrap(),
            Branch::Logarithmic
        );
        // near-integer difference is routed to the log branch
        assert_eq!(
            select_branch(0.5, -1.5 + 1e-13, 1.5, -3.0).unwrap(),
            Branch::Logarithmic
        );
        assert!(matches!(
            hyp2f1(0.5, 0.3, 1.5, 1.0),
            Err(Error::DivergentRegion { .. })
        ));
        assert!(matches!(
            hyp2f1(0.5, 0.3, -2.0, -0.5),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn value_at_zero_is_one() {
        for (a, b, c) in [(0.5, -4.0 / 3.0, 1.5), (2.0, 3.0, 0.5), (-3.0, 1.5, 2.5)] {
            assert_eq!(hyp2f1(a, b, c, 0.0).unwrap().value, 1.0);
        }
    }

    #[test]
    fn terminating_polynomials() {
        for x in [-4.0, -1.0, -0.25, 0.0, 0.5, 3.0] {
            let v = hyp2f1(0.5, -1.0, 1.5, x).unwrap();
            assert_eq!(v.branch, Branch::Terminating);
            assert_relative_eq!(v.value, 1.0 - x / 3.0, max_relative = 1e-15);
        }
        assert_relative_eq!(
            hyp2f1_series(0.5, -2.0, 1.5, -2.0).unwrap(),
            47.0 / 15.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            hyp2f1(0.5, -4.0 / 4.0, 1.5, -4.0).unwrap().value,
            7.0 / 3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn terminating_matches_pochhammer_coefficients() {
        use crate::special::pochhammer;
        let (a, c) = (0.5, 1.5);
        for n in 1..6u64 {
            let b = -(n as f64);
            for x in [-3.0f64, -0.7, 0.4] {
                let explicit: f64 = (0..=n)
                    .map(|k| {
                        pochhammer(a, k) * pochhammer(b, k)
                            / (pochhammer(c, k) * pochhammer(1.0, k))
                            * x.powi(k as i32)
                    })
                    .sum();
                assert_relative_eq!(
                    hyp2f1(a, b, c, x).unwrap().value,
                    explicit,
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn series_and_connection_agree_on_overlap() {
        for kappa in [3.0, 5.0, 6.0, 1.2, 7.5] {
            let b = -4.0 / kappa;
            for x in [-0.5, -0.6, -0.8, -0.95] {
                let s = hyp2f1_on_branch(0.5, b, 1.5, x, Branch::Series).unwrap();
                let c = hyp2f1_on_branch(0.5, b, 1.5, x, Branch::Connection).unwrap();
                assert_relative_eq!(s, c, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn series_and_logarithmic_agree_for_x_at_most_minus_one() {
        for (p, q) in [(8u32, 3u32), (8, 5), (8, 7)] {
            let (a, b, c) = family(p, q);
            for x in [-1.0, -1.3, -2.0, -3.0] {
                let s = hyp2f1_on_branch(a, b, c, x, Branch::Series).unwrap();
                let l = hyp2f1_on_branch(a, b, c, x, Branch::Logarithmic).unwrap();
                assert_relative_eq!(s, l, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn forced_branches_reject_misuse() {
        assert!(hyp2f1_on_branch(0.5, -1.5, 1.5, -2.0, Branch::Connection).is_err());
        assert!(hyp2f1_on_branch(0.5, -1.4, 1.5, -2.0, Branch::Logarithmic).is_err());
        assert!(hyp2f1_on_branch(0.5, -1.5, 1.5, -0.5, Branch::Logarithmic).is_err());
        assert!(hyp2f1_on_branch(0.5, -1.4, 1.5, -0.5, Branch::Terminating).is_err());
        assert!(hyp2f1_series(0.5, -1.4, 1.5, -1.0).is_err());
    }

    #[test]
    fn slope_of_first_solution() {
        // T(1+κT²)^{−4/κ} ₂F₁(1/2, −4/κ; 3/2; −κT²) / T → κ/(κ+8)
        for kappa in [2.0, 4.0, 3.0, 8.0 / 3.0, 6.0] {
            let t: f64 = 1e3;
            let x = -kappa * t * t;
            let f = hyp2f1(0.5, -4.0 / kappa, 1.5, x).unwrap().value;
            let slope = (1.0 + kappa * t * t).powf(-4.0 / kappa) * f;
            assert_relative_eq!(slope, kappa / (kappa + 8.0), max_relative = 2e-5);
        }
    }

    proptest! {
        #[test]
        fn symmetric_in_a_and_b(a in -2.3f64..3.1, b in -2.7f64..2.9, x in -50.0f64..0.9) {
            let c = 1.37;
            let f = hyp2f1(a, b, c, x);
            let g = hyp2f1(b, a, c, x);
            match (f, g) {
                (Ok(f), Ok(g)) => {
                    let scale = f.value.abs().max(1e-8);
                    prop_assert!((f.value - g.value).abs() <= 1e-9 * scale, "{} vs {}", f.value, g.value);
                }
                (Err(_), Err(_)) => {}
                (f, g) => prop_assert!(false, "asymmetric outcome {:?} {:?}", f, g),
            }
        }
    }
}
