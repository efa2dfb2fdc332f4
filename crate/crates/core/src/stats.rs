//! Empirical distribution tools: ECDF, Kolmogorov–Smirnov distances, histograms.

use std::io::{self, Write};

use crate::error::{invalid, Result};

/// A nonempty, finite, sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sample", "must be nonempty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("sample", format!("contains non-finite value {v}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Applies `f` to every value; `f` must map into finite reals.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Index just past the last value ≤ x.
    fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    /// Distinct values with the index range of their ties.
    fn runs(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        let v = &self.values;
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= v.len() {
                return None;
            }
            let start = i;
            while i < v.len() && v[i] == v[start] {
                i += 1;
            }
            Some((v[start], start, i))
        })
    }
}

/// Fraction of the sample ≤ x.
pub fn ecdf(sample: &Sample, x: f64) -> f64 {
    sample.count_le(x) as f64 / sample.len() as f64
}

/// sup |ECDF − F| for a continuous reference cdf, taking both one-sided gaps
/// at every distinct sample value.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &Sample, cdf: F) -> f64 {
    let n = sample.len() as f64;
    sample
        .runs()
        .map(|(v, start, end)| {
            let f = cdf(v);
            (end as f64 / n - f).abs().max((f - start as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// sup over pooled values of |ECDF₁ − ECDF₂|.
pub fn ks_two_sample(a: &Sample, b: &Sample) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let v = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= v {
            i += 1;
        }
        while j < xb.len() && xb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `(center, density)` per bin on [lo, hi], with density = count/(n·width);
/// hi itself falls in the last bin.
pub fn histogram(sample: &Sample, lo: f64, hi: f64, bins: usize) -> Result<Vec<(f64, f64)>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(
            "range",
            format!("need finite lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if bins == 0 {
        return Err(invalid("bins", "must be at least 1"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in sample.values() {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let scale = 1.0 / (sample.len() as f64 * width);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &c)| (lo + (k as f64 + 0.5) * width, c as f64 * scale))
        .collect())
}

/// Writes `center,density` rows.
pub fn write_histogram_csv<W: Write>(bars: &[(f64, f64)], mut w: W) -> io::Result<()> {
    writeln!(w, "center,density")?;
    for (c, d) in bars {
        writeln!(w, "{c},{d}")?;
    }
    Ok(())
}
