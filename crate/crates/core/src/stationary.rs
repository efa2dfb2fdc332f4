//! The stationary law of T, ρ(T) = C (1 + κT²)^{−4/κ}, the general solution
//! of the stationary forward equation, and the law of the argument.
//!
//! With T = tan φ/√κ the density becomes cos^{2m−2}φ (m = 4/κ), and with
//! w = π/2 − φ the upper tail of the law is (C/√κ)·H(w), where
//! H(w) = ∫₀^w sin^{2m−2}s ds. For m < 1 the integrand is singular at 0 and H is
//! integrated in v = w^{2m−1}, where it becomes (sin w / w)^{2m−2}/(2m−1).

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::kappa::Kappa;
use crate::quadrature::integrate;
use crate::rng::path_rng;
use crate::special::{hyp2f1, hyp2f1_on_branch, ln_gamma_signed, select_branch, Branch};

const PANELS: usize = 128;
const ABS_TOL: f64 = 1e-16;
const REL_TOL: f64 = 1e-14;

/// Closed-form stationary law for a subcritical κ.
///
/// Immutable after construction; the cumulative tail table is built once.
#[derive(Debug, Clone)]
pub struct StationaryLaw {
    kappa: Kappa,
    m: f64,
    c: f64,
    /// `h[k]` = H(k·π/(2·PANELS)).
    h: Vec<f64>,
}

fn non_normalizable(kappa: Kappa) -> Error {
    Error::NonNormalizable {
        kappa: kappa.value(),
        exponent: kappa.tail_exponent(),
    }
}

/// ∫_a^b sin^{2m−2}s ds for 0 ≤ a ≤ b ≤ π/2.
fn h_piece(m: f64, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let e = 2.0 * m - 2.0;
    if m >= 1.0 {
        return Ok(integrate(|s| s.sin().powf(e), a, b, ABS_TOL, REL_TOL)?.value);
    }
    let p = 2.0 * m - 1.0;
    let inv = 1.0 / p;
    let f = |v: f64| {
        let w = v.powf(inv);
        let sinc = if w < 1e-8 { 1.0 } else { w.sin() / w };
        sinc.powf(e) * inv
    };
    Ok(integrate(f, a.powf(p), b.powf(p), ABS_TOL, REL_TOL)?.value)
}

impl StationaryLaw {
    /// Fails with `NonNormalizable` for κ ≥ 8.
    pub fn new(kappa: Kappa) -> Result<Self> {
        if !kappa.is_subcritical() {
            return Err(non_normalizable(kappa));
        }
        let m = kappa.exponent();
        let dw = FRAC_PI_2 / PANELS as f64;
        let mut h = Vec::with_capacity(PANELS + 1);
        h.push(0.0);
        let mut acc = 0.0;
        for k in 0..PANELS {
            let hi = if k + 1 == PANELS {
                FRAC_PI_2
            } else {
                (k + 1) as f64 * dw
            };
            acc += h_piece(m, k as f64 * dw, hi)?;
            h.push(acc);
        }
        // ∫ℝ (1+κT²)^{−m} dT = (2/√κ)·H(π/2)
        let c = kappa.sqrt() / (2.0 * acc);
        Ok(Self { kappa, m, c, h })
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// m = 4/κ.
    pub fn exponent(&self) -> f64 {
        self.m
    }

    /// The normalizing constant C.
    pub fn normalization(&self) -> f64 {
        self.c
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.c * (1.0 + self.kappa.value() * t * t).powf(-self.m)
    }

    /// H(w) for w ∈ [0, π/2].
    fn tail_h(&self, w: f64) -> f64 {
        let dw = FRAC_PI_2 / PANELS as f64;
        let k = ((w / dw) as usize).min(PANELS);
        let base = k as f64 * dw;
        if k == PANELS || w <= base {
            return self.h[k];
        }
        self.h[k] + h_piece(self.m, base, w).expect("smooth panel integrand")
    }

    /// P(T > |t|).
    fn upper_tail(&self, t: f64) -> f64 {
        let w = (1.0f64).atan2(self.kappa.sqrt() * t.abs());
        self.c / self.kappa.sqrt() * self.tail_h(w)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        let tail = self.upper_tail(t);
        if t >= 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    /// Density of D = √κ·T, which is (C/√κ)(1 + D²)^{−4/κ}.
    pub fn pdf_cot(&self, d: f64) -> f64 {
        self.c / self.kappa.sqrt() * (1.0 + d * d).powf(-self.m)
    }

    pub fn cdf_cot(&self, d: f64) -> f64 {
        self.cdf(d / self.kappa.sqrt())
    }

    /// Inverse cdf by bisection on the tail table.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
        }
        if p == 0.5 {
            return Ok(0.0);
        }
        let tail = p.min(1.0 - p);
        let target = tail * self.kappa.sqrt() / self.c;
        let k = self.h.partition_point(|&v| v <= target).clamp(1, PANELS);
        let dw = FRAC_PI_2 / PANELS as f64;
        // bisect in v = w^{2m−1} when m < 1, where H is close to linear
        let p_exp = if self.m < 1.0 {
            2.0 * self.m - 1.0
        } else {
            1.0
        };
        let to_w = |v: f64| v.powf(1.0 / p_exp);
        let (mut lo, mut hi) = (
            ((k - 1) as f64 * dw).powf(p_exp),
            (k as f64 * dw).min(FRAC_PI_2).powf(p_exp),
        );
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tail_h(to_w(mid)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = to_w(0.5 * (lo + hi));
        let t = 1.0 / (self.kappa.sqrt() * w.tan());
        Ok(if p > 0.5 { t } else { -t })
    }

    /// `n` draws by inversion; deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = path_rng(seed, 0);
        (0..n)
            .map(|_| {
                let mut p: f64 = rng.random();
                while p == 0.0 {
                    p = rng.random();
                }
                self.quantile(p).expect("p in (0, 1)")
            })
            .collect()
    }

    /// Density of θ = arccot(√κ·T) on (0, π): (C/√κ)·sin^{8/κ−2}θ.
    pub fn argument_pdf(&self, theta: f64) -> f64 {
        if !(theta > 0.0 && theta < PI) {
            return 0.0;
        }
        self.c / self.kappa.sqrt() * theta.sin().powf(2.0 * self.m - 2.0)
    }

    pub fn argument_cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= PI {
            return 1.0;
        }
        // θ ≤ θ₀ ⇔ cot θ ≥ cot θ₀
        1.0 - self.cdf_cot(1.0 / theta.tan())
    }

    /// Writes `T,pdf,cdf` rows.
    pub fn write_curve_csv<W: Write>(&self, grid: &[f64], mut w: W) -> io::Result<()> {
        writeln!(w, "T,pdf,cdf")?;
        for &t in grid {
            writeln!(w, "{t},{},{}", self.pdf(t), self.cdf(t))?;
        }
        Ok(())
    }

    /// Writes `theta,argument_pdf` rows.
    pub fn write_argument_csv<W: Write>(&self, grid: &[f64], mut w: W) -> io::Result<()> {
        writeln!(w, "theta,argument_pdf")?;
        for &theta in grid {
            writeln!(w, "{theta},{}", self.argument_pdf(theta))?;
        }
        Ok(())
    }
}

/// C by quadrature.
pub fn normalization(kappa: Kappa) -> Result<f64> {
    Ok(StationaryLaw::new(kappa)?.normalization())
}

/// C from C⁻¹ = (1/√κ)·√π·Γ(m − 1/2)/Γ(m).
pub fn normalization_closed_form(kappa: Kappa) -> Result<f64> {
    if !kappa.is_subcritical() {
        return Err(non_normalizable(kappa));
    }
    let m = kappa.exponent();
    let (lg_num, _) = ln_gamma_signed(m - 0.5)?;
    let (lg_den, _) = ln_gamma_signed(m)?;
    let inverse = PI.sqrt() / kappa.sqrt() * (lg_num - lg_den).exp();
    Ok(1.0 / inverse)
}

const A: f64 = 0.5;
const C: f64 = 1.5;

fn q(t: f64, kappa: Kappa) -> f64 {
    (1.0 + kappa.value() * t * t).powf(-kappa.exponent())
}

/// T·(1+κT²)^{−4/κ}·₂F₁(1/2, −4/κ; 3/2; −κT²), the odd fundamental solution.
pub fn first_solution(t: f64, kappa: Kappa) -> Result<f64> {
    ensure_finite("T", t)?;
    let x = -kappa.value() * t * t;
    let f = hyp2f1(A, -kappa.exponent(), C, x)?.value;
    Ok(t * q(t, kappa) * f)
}

fn first_solution_on(t: f64, kappa: Kappa, branch: Branch) -> Result<f64> {
    let x = -kappa.value() * t * t;
    let f = hyp2f1_on_branch(A, -kappa.exponent(), C, x, branch)?;
    Ok(t * q(t, kappa) * f)
}

/// C₁·T(1+κT²)^{−4/κ}·₂F₁(1/2, −4/κ; 3/2; −κT²) + 2C₂(1+κT²)^{−4/κ}.
pub fn general_solution(t: f64, kappa: Kappa, c1: f64, c2: f64) -> Result<f64> {
    ensure_finite("T", t)?;
    let first = if c1 == 0.0 {
        0.0
    } else {
        c1 * first_solution(t, kappa)?
    };
    Ok(first + 2.0 * c2 * q(t, kappa))
}

/// ½ρ'' + 4T/(1+κT²)·ρ' + (4 − 4κT²)/(1+κT²)²·ρ for the general solution.
///
/// The even part uses exact derivatives; the odd part uses 5-point central
/// differences, with every stencil point on the branch chosen at T.
pub fn kfe_residual(kappa: Kappa, t: f64, c1: f64, c2: f64) -> Result<f64> {
    ensure_finite("T", t)?;
    let k = kappa.value();
    let m = kappa.exponent();
    let s = 1.0 + k * t * t;
    let apply = |r: f64, r1: f64, r2: f64| {
        0.5 * r2 + 4.0 * t / s * r1 + (4.0 - 4.0 * k * t * t) / (s * s) * r
    };

    let mut residual = 0.0;
    if c2 != 0.0 {
        let q0 = s.powf(-m);
        let q1 = -8.0 * t * s.powf(-m - 1.0);
        let q2 = s.powf(-m - 2.0) * (-8.0 * s + 16.0 * k * (m + 1.0) * t * t);
        residual += 2.0 * c2 * apply(q0, q1, q2);
    }
    if c1 != 0.0 {
        let h = 1e-4 * t.abs().max(1.0);
        let nodes = [t - 2.0 * h, t - h, t, t + h, t + 2.0 * h];
        let mut branch = select_branch(A, -m, C, -k * t * t)?;
        let x_nearest = -k * nodes.iter().map(|v| v * v).fold(f64::INFINITY, f64::min);
        if branch == Branch::Logarithmic && x_nearest > -1.0 {
            branch = Branch::Series;
        }
        let mut g = [0.0; 5];
        for (gi, &ti) in g.iter_mut().zip(&nodes) {
            *gi = first_solution_on(ti, kappa, branch)?;
        }
        let g1 = (g[0] - 8.0 * g[1] + 8.0 * g[3] - g[4]) / (12.0 * h);
        let g2 = (-g[0] + 16.0 * g[1] - 30.0 * g[2] + 16.0 * g[3] - g[4]) / (12.0 * h * h);
        residual += c1 * apply(g[2], g1, g2);
    }
    Ok(residual)
}

/// One row of the κ = 8 phase-transition scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub kappa: f64,
    /// Tail exponent 8/κ of the speed density.
    pub exponent: f64,
    pub normalizable: bool,
    /// C⁻¹ when finite.
    pub c_inverse: Option<f64>,
}

pub fn phase_scan(kappas: &[Kappa]) -> Result<Vec<PhaseRow>> {
    kappas
        .iter()
        .map(|&kappa| {
            let normalizable = kappa.is_subcritical();
            let c_inverse = if normalizable {
                Some(1.0 / normalization(kappa)?)
            } else {
                None
            };
            Ok(PhaseRow {
                kappa: kappa.value(),
                exponent: kappa.tail_exponent(),
                normalizable,
                c_inverse,
            })
        })
        .collect()
}

/// Writes `kappa,exponent,normalizable,C_inverse`; `inf` marks divergence.
pub fn write_phase_csv<W: Write>(rows: &[PhaseRow], mut w: W) -> io::Result<()> {
    writeln!(w, "kappa,exponent,normalizable,C_inverse")?;
    for r in rows {
        let ci = r.c_inverse.map_or("inf".to_string(), |v| v.to_string());
        writeln!(w, "{},{},{},{ci}", r.kappa, r.exponent, r.normalizable)?;
    }
    Ok(())
}

/// Large-T slope of the first solution when ₂F₁ terminates (4/κ an
/// integer): T·q·₂F₁ ~ T/(1 + 8/κ).
pub fn first_solution_slope(kappa: Kappa) -> f64 {
    1.0 / (1.0 + 8.0 / kappa.value())
}
