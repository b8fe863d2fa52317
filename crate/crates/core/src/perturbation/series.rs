//! Truncated formal power series in `√ħ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An order in powers of `√ħ`, counted in half-units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfOrder(pub usize);

impl fmt::Display for HalfOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Coefficients `c_h` of `Σ_h c_h ħ^{h/2}` for `h = 0..=max_half_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSeries {
    pub coefficients: Vec<f64>,
    /// Contraction patterns contributing at each order.
    pub term_counts: Vec<usize>,
}

/// One row of a series table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub order: String,
    pub half_order: usize,
    pub coefficient: f64,
    pub terms: usize,
}

impl PerturbationSeries {
    pub fn new(coefficients: Vec<f64>, term_counts: Vec<usize>) -> Self {
        debug_assert_eq!(coefficients.len(), term_counts.len());
        PerturbationSeries { coefficients, term_counts }
    }

    pub fn max_half_order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn coefficient(&self, order: HalfOrder) -> f64 {
        self.coefficients.get(order.0).copied().unwrap_or(0.0)
    }

    pub fn records(&self) -> Vec<SeriesRecord> {
        self.coefficients
            .iter()
            .zip(&self.term_counts)
            .enumerate()
            .map(|(h, (c, t))| SeriesRecord {
                order: HalfOrder(h).to_string(),
                half_order: h,
                coefficient: *c,
                terms: *t,
            })
            .collect()
    }

    /// Largest scaled coefficient difference, order by order.
    pub fn max_scaled_diff(&self, other: &PerturbationSeries) -> f64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| crate::report::scaled_diff(*a, *b))
            .fold(0.0, |acc, d| if d.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(d) })
    }
}

/// `log g` as a formal series; `g_0` must be positive.
pub fn series_log(g: &[f64]) -> Result<Vec<f64>> {
    let Some(&g0) = g.first() else {
        return Ok(Vec::new());
    };
    if !(g0 > 0.0) {
        return Err(Error::NonPositiveConstantTerm(g0));
    }
    let mut f = vec![0.0; g.len()];
    f[0] = g0.ln();
    for n in 1..g.len() {
        let mut acc = 0.0;
        for k in 1..n {
            acc += k as f64 * f[k] * g[n - k];
        }
        f[n] = (g[n] - acc / n as f64) / g0;
    }
    Ok(f)
}

/// `exp f` as a formal series.
pub fn series_exp(f: &[f64]) -> Vec<f64> {
    if f.is_empty() {
        return Vec::new();
    }
    let mut e = vec![0.0; f.len()];
    e[0] = f[0].exp();
    for n in 1..f.len() {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += k as f64 * f[k] * e[n - k];
        }
        e[n] = acc / n as f64;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_order_display() {
        assert_eq!(HalfOrder(0).to_string(), "0");
        assert_eq!(HalfOrder(3).to_string(), "3/2");
        assert_eq!(HalfOrder(4).to_string(), "2");
    }

    #[test]
    fn exp_of_linear() {
        let e = series_exp(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(e, vec![1.0, 1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn log_rejects_non_positive() {
        assert!(matches!(series_log(&[0.0, 1.0]), Err(Error::NonPositiveConstantTerm(_))));
    }

    proptest! {
        #[test]
        fn log_exp_round_trip(f in prop::collection::vec(-2.0f64..2.0, 1..7)) {
            let back = series_log(&series_exp(&f)).unwrap();
            for (a, b) in f.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
