use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Serializable conformal metric profile `ρ(x)` used by the mesh builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Flat,
    /// `offset + gradient · x`.
    Affine { offset: f64, gradient: Vec<f64> },
    /// `base + Σ terms`.
    Modulated { base: f64, terms: Vec<ProfileTerm> },
    /// [`ProfileSpec::striped`] for a grid with `rows` rows.
    Striped { rows: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileTerm {
    /// `amplitude · cos(2π k · x)`.
    Cosine { amplitude: f64, wavevector: Vec<f64> },
    /// `amplitude · exp(-(x[axis] - center)² / width)`.
    Ridge {
        amplitude: f64,
        axis: usize,
        center: f64,
        width: f64,
    },
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Flat
    }
}

impl ProfileTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ProfileTerm::Cosine { amplitude, wavevector } => {
                let phase: f64 = wavevector.iter().zip(x).map(|(k, x)| k * x).sum();
                amplitude * (2.0 * PI * phase).cos()
            }
            ProfileTerm::Ridge { amplitude, axis, center, width } => {
                let t = x.get(*axis).copied().unwrap_or(0.0) - center;
                amplitude * (-t * t / width).exp()
            }
        }
    }
}

impl ProfileSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ProfileSpec::Flat => 1.0,
            ProfileSpec::Affine { offset, gradient } => {
                offset + gradient.iter().zip(x).map(|(g, x)| g * x).sum::<f64>()
            }
            ProfileSpec::Modulated { base, terms } => {
                base + terms.iter().map(|t| t.eval(x)).sum::<f64>()
            }
            ProfileSpec::Striped { rows } => ProfileSpec::striped(*rows).eval(x),
        }
    }

    /// Profile with short vertical edges inside a grid and long edges next to
    /// the bottom and top boundary rows, so that interface nodes sit far from
    /// the boundary while horizontal neighbours stay close.
    pub fn striped(rows: usize) -> Self {
        let last = rows.saturating_sub(1) as f64;
        ProfileSpec::Modulated {
            base: 1.0,
            terms: vec![
                ProfileTerm::Cosine { amplitude: 0.5, wavevector: vec![0.0, 1.0] },
                ProfileTerm::Ridge { amplitude: 2.0, axis: 1, center: 0.5, width: 0.1 },
                ProfileTerm::Ridge { amplitude: 2.0, axis: 1, center: last - 0.5, width: 0.1 },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_matches_formula() {
        let p = ProfileSpec::Affine { offset: 1.0, gradient: vec![1.0] };
        assert_eq!(p.eval(&[0.5]), 1.5);
    }

    #[test]
    fn striped_shape() {
        let p = ProfileSpec::striped(5);
        assert!((p.eval(&[0.0, 0.5]) - 2.5).abs() < 1e-3);
        assert!(p.eval(&[0.0, 1.5]) < 0.6);
        assert!((p.eval(&[0.0, 2.0]) - 1.5).abs() < 1e-3);
    }
}
