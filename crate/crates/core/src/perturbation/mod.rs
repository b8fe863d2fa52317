//! Perturbative expansion of the regularized effective action and partition
//! function in powers of `√ħ`.
//!
//! A vertex of power `k` carries `ħ^{(k-2)/2}`. The expectation of
//! `exp(-S_int)` under the Gaussian measure is expanded in vertex counts and
//! contracted pattern by pattern; the effective action is the formal
//! logarithm of that series plus the classical term `S₀[φ^η]`.

pub mod engine;
pub mod interaction;
pub mod series;
pub mod wick;

pub use engine::{
    effective_action, effective_action_series, partition, partition_series, GaussianModel, PerturbationOptions,
};
pub use interaction::{vertex_terms, Coupling, InteractionSpec, Redefinition, Vertex, VertexTerms};
pub use series::{series_exp, series_log, HalfOrder, PerturbationSeries, SeriesRecord};
pub use wick::{count_by_pairs, wick_pairings, ContractionPattern, DEFAULT_LEG_CAP};
