use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Result};

/// The SLE parameter κ > 0.
///
/// A κ built from a ratio keeps the exact fraction so that exponents such as
/// 4/κ are formed from integers, which makes the integer-difference test in the
/// hypergeometric engine exact for values like κ = 8/3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    value: f64,
    ratio: Option<(u32, u32)>,
}

/// The phase boundary between a finite and an infinite stationary measure.
pub const CRITICAL_KAPPA: f64 = 8.0;

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        ensure_positive("kappa", value)?;
        Ok(Self { value, ratio: None })
    }

    /// κ = numerator / denominator.
    pub fn from_ratio(numerator: u32, denominator: u32) -> Result<Self> {
        if numerator == 0 || denominator == 0 {
            return Err(invalid("kappa", "ratio terms must be positive"));
        }
        Ok(Self {
            value: numerator as f64 / denominator as f64,
            ratio: Some((numerator, denominator)),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ratio(&self) -> Option<(u32, u32)> {
        self.ratio
    }

    pub fn sqrt(&self) -> f64 {
        self.value.sqrt()
    }

    /// m = 4/κ, the exponent of the stationary density.
    pub fn exponent(&self) -> f64 {
        match self.ratio {
            Some((p, q)) => (4 * q as u64) as f64 / p as f64,
            None => 4.0 / self.value,
        }
    }

    /// 8/κ, the decay exponent of the speed density in |x|.
    pub fn tail_exponent(&self) -> f64 {
        match self.ratio {
            Some((p, q)) => (8 * q as u64) as f64 / p as f64,
            None => 8.0 / self.value,
        }
    }

    /// κ < 8: the speed measure is finite.
    pub fn is_subcritical(&self) -> bool {
        match self.ratio {
            Some((p, q)) => (p as u64) < 8 * q as u64,
            None => self.value < CRITICAL_KAPPA,
        }
    }
}

impl std::fmt::Display for Kappa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.ratio {
            Some((p, 1)) => write!(f, "{p}"),
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl std::str::FromStr for Kappa {
    type Err = crate::error::Error;

    /// Accepts decimal values (`2.5`) and fractions (`8/3`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p
                .trim()
                .parse::<u32>()
                .map_err(|e| invalid("kappa", e.to_string()))?;
            let q = q
                .trim()
                .parse::<u32>()
                .map_err(|e| invalid("kappa", e.to_string()))?;
            return Self::from_ratio(p, q);
        }
        let v = s
            .parse::<f64>()
            .map_err(|e| invalid("kappa", e.to_string()))?;
        Self::new(v)
    }
}
