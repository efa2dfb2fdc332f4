//! The one-dimensional diffusion dT = −4T/(1+κT²) du + dB̃ and its classical
//! scale/speed description.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, invalid, Result};
use crate::kappa::Kappa;
use crate::rng::Noise;
use crate::time_change::{DiffusionPath, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub kappa: Kappa,
    pub t0: f64,
    pub du: f64,
    pub u_max: f64,
    pub noise: Noise,
}

impl DiffusionSpec {
    /// Started at T0 = 0 with driver stream `path` of `seed`.
    pub fn new(kappa: Kappa, du: f64, u_max: f64, seed: u64, path: u64) -> Self {
        Self {
            kappa,
            t0: 0.0,
            du,
            u_max,
            noise: Noise::brownian(seed, path),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("T0", self.t0)?;
        ensure_positive("du", self.du)?;
        ensure_positive("u_max", self.u_max)?;
        if self.u_max < self.du {
            return Err(invalid("u_max", "must be at least du"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.u_max / self.du) * (1.0 - 1e-12)).ceil() as usize
    }

    /// Runs the Euler–Maruyama recursion, calling `visit(k, T_k)` for every
    /// grid point including the start.
    pub fn integrate<F: FnMut(usize, f64)>(&self, mut visit: F) -> Result<()> {
        self.validate()?;
        let mut noise = self.noise.stream();
        let mut t = self.t0;
        visit(0, t);
        for k in 1..=self.steps() {
            t += self.du * drift_t(t, self.kappa) + noise.increment(self.du);
            visit(k, t);
        }
        Ok(())
    }

    pub fn simulate(&self) -> Result<DiffusionPath> {
        self.validate()?;
        let n = self.steps();
        let mut values = Vec::with_capacity(n + 1);
        self.integrate(|_, t| values.push(t))?;
        Ok(DiffusionPath {
            kappa: self.kappa,
            u: (0..=n).map(|k| k as f64 * self.du).collect(),
            values,
            origin: Origin::DirectSde,
            seed: self.noise.seed(),
        })
    }

    pub fn terminal(&self) -> Result<f64> {
        let mut last = self.t0;
        self.integrate(|_, t| last = t)?;
        Ok(last)
    }

    /// Trapezoidal time average of `f` along the path, without storing it.
    /// Equal to [`ergodic_average`] of [`Self::simulate`].
    pub fn ergodic_average<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.validate()?;
        let n = self.steps();
        let mut sum = 0.0;
        self.integrate(|k, t| {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            sum += w * f(t);
        })?;
        Ok(sum / n as f64)
    }
}

pub fn simulate_t(spec: &DiffusionSpec) -> Result<DiffusionPath> {
    spec.simulate()
}

/// −4T/(1+κT²).
#[inline]
pub fn drift_t(t: f64, kappa: Kappa) -> f64 {
    -4.0 * t / (1.0 + kappa.value() * t * t)
}

/// sup |drift_t| = 2/√κ, attained at T = ±1/√κ.
pub fn drift_bound(kappa: Kappa) -> f64 {
    2.0 / kappa.sqrt()
}

/// s'(x) = (1+κx²)^{4/κ}.
pub fn scale_density(x: f64, kappa: Kappa) -> f64 {
    ((kappa.value() * x * x).ln_1p() * kappa.exponent()).exp()
}

/// m(x) = 1/s'(x) = (1+κx²)^{−4/κ} (σ = 1; constants go to normalization).
pub fn speed_density(x: f64, kappa: Kappa) -> f64 {
    (-(kappa.value() * x * x).ln_1p() * kappa.exponent()).exp()
}

/// Whether ∫ m(x) dx < ∞, i.e. 8/κ > 1.
pub fn speed_integrable(kappa: Kappa) -> bool {
    kappa.is_subcritical()
}

/// −2·drift_t(x)·x, which tends to 8/κ as |x| → ∞. The power-law convergence
/// rate towards stationarity needs this limit to exceed 1.
pub fn drift_tail_coefficient(x: f64, kappa: Kappa) -> f64 {
    -2.0 * drift_t(x, kappa) * x
}

/// Z_u(f) = (1/u)∫₀ᵘ f(T_s) ds by the trapezoidal rule over the path's grid.
pub fn ergodic_average<F: Fn(f64) -> f64>(path: &DiffusionPath, f: F) -> f64 {
    let n = path.values.len();
    if n == 1 {
        return f(path.values[0]);
    }
    let mut integral = 0.0;
    for k in 1..n {
        let h = path.u[k] - path.u[k - 1];
        integral += 0.5 * h * (f(path.values[k - 1]) + f(path.values[k]));
    }
    integral / (path.u[n - 1] - path.u[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift_t(0.0, k(4.0)), 0.0);
        assert_abs_diff_eq!(drift_t(0.5, k(4.0)), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(drift_t(-1.0, k(1.0)), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn silent_step_by_hand() {
        let spec = DiffusionSpec {
            kappa: k(4.0),
            t0: 1.0,
            du: 0.1,
            u_max: 0.1,
            noise: Noise::Silent,
        };
        let p = spec.simulate().unwrap();
        assert_eq!(p.values.len(), 2);
        assert_abs_diff_eq!(p.values[1], 0.92, epsilon = 1e-15);

        let spec = DiffusionSpec {
            t0: 0.0,
            u_max: 5.0,
            ..spec
        };
        assert!(spec.simulate().unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = DiffusionSpec::new(k(4.0), 1e-3, 2.0, 17, 0);
        assert_eq!(spec.simulate().unwrap(), spec.simulate().unwrap());
        assert_eq!(
            spec.terminal().unwrap(),
            spec.simulate().unwrap().last_value()
        );
    }

    #[test]
    fn rejects_bad_spec() {
        let mut spec = DiffusionSpec::new(k(4.0), 1e-3, 2.0, 17, 0);
        spec.du = 0.0;
        assert!(spec.simulate().is_err());
        spec.du = 1.0;
        spec.u_max = 0.5;
        assert!(spec.simulate().is_err());
        spec.u_max = f64::NAN;
        assert!(spec.simulate().is_err());
    }

    #[test]
    fn scale_and_speed_examples() {
        assert_eq!(scale_density(0.0, k(4.0)), 1.0);
        assert_abs_diff_eq!(scale_density(1.0, k(4.0)), 5.0, epsilon = 1e-13);
        assert_abs_diff_eq!(scale_density(1.0, k(2.0)), 9.0, epsilon = 1e-13);
        assert_eq!(speed_density(0.0, k(4.0)), 1.0);
        assert_abs_diff_eq!(speed_density(1.0, k(4.0)), 0.2, epsilon = 1e-15);
        assert!(!speed_integrable(k(8.0)));
        assert!(speed_integrable(k(7.9)));
    }

    #[test]
    fn drift_bound_is_attained() {
        for kv in [0.5, 2.0, 4.0, 6.0, 10.0] {
            let kappa = k(kv);
            let b = drift_bound(kappa);
            assert_abs_diff_eq!(drift_t(-1.0 / kappa.sqrt(), kappa), b, epsilon = 1e-14);
            let max = (-20_000..=20_000)
                .map(|i| drift_t(i as f64 * 1e-3, kappa).abs())
                .fold(0.0, f64::max);
            assert!(max <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tail_coefficient_limit() {
        for kv in [2.0, 4.0, 8.0, 10.0] {
            let c = drift_tail_coefficient(1e6, k(kv));
            assert_abs_diff_eq!(c, 8.0 / kv, epsilon = 1e-9);
            assert_eq!(c > 1.0, kv < 8.0);
        }
    }

    #[test]
    fn ergodic_average_examples() {
        let ramp = DiffusionPath {
            kappa: k(4.0),
            u: (0..=100).map(|i| i as f64 / 100.0).collect(),
            values: (0..=100).map(|i| i as f64 / 100.0).collect(),
            origin: Origin::DirectSde,
            seed: None,
        };
        assert_abs_diff_eq!(ergodic_average(&ramp, |t| t), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ergodic_average(&ramp, |_| 1.0), 1.0, epsilon = 1e-14);

        let spec = DiffusionSpec::new(k(3.0), 1e-2, 20.0, 5, 1);
        let stored = ergodic_average(&spec.simulate().unwrap(), |t| t.abs().min(1.0));
        let streamed = spec.ergodic_average(|t| t.abs().min(1.0)).unwrap();
        assert_abs_diff_eq!(stored, streamed, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn drift_is_odd_and_bounded(t in -1e3f64..1e3, kv in 0.1f64..20.0) {
            let kappa = k(kv);
            prop_assert_eq!(drift_t(-t, kappa), -drift_t(t, kappa));
            prop_assert!(drift_t(t, kappa).abs() <= drift_bound(kappa) * (1.0 + 1e-12));
        }

        #[test]
        fn scale_times_speed_is_one(x in -1e3f64..1e3, kv in 0.1f64..20.0) {
            let kappa = k(kv);
            let prod = scale_density(x, kappa) * speed_density(x, kappa);
            prop_assert!((prod - 1.0).abs() < 1e-12);
        }
    }
}
