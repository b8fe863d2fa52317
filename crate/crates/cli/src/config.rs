//! Scenario configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use quasiloc_core::averaging::{EuclideanKernelSpec, KernelProfile, RadialProfile};
use quasiloc_core::mesh::{CutSpec, MeshSpec};
use quasiloc_core::perturbation::{Coupling, InteractionSpec, Redefinition};
use quasiloc_core::quadrature::QuadratureOptions;
use quasiloc_core::OperatorSpec;

/// A scenario file: everything needed to run the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub label: String,
    pub mesh: MeshSpec,
    pub cut: CutSpec,
    #[serde(default = "OperatorSpec::massless")]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub interaction: Vec<CouplingEntry>,
    #[serde(default = "uniform_kernel")]
    pub kernel: KernelProfile,
    /// Cutoffs at which the mesh suites run.
    pub lambdas: Vec<f64>,
    /// Cutoffs for the sweep suite; defaults to `lambdas`.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub eta: EtaSpec,
    /// Highest order in `ħ`, a multiple of 1/2.
    #[serde(default = "default_max_order")]
    pub max_order: f64,
    /// Suites to run; all when absent.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default)]
    pub seed: u64,
    /// Randomized trials per quadratic-form identity.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub redefinitions: Vec<Redefinition>,
    #[serde(default)]
    pub euclidean: EuclideanConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn uniform_kernel() -> KernelProfile {
    KernelProfile::Uniform
}

fn default_max_order() -> f64 {
    2.0
}

fn default_trials() -> usize {
    100
}

/// One power of the interaction: either `value` (uniform) or `nodes`
/// (`[node, value]` pairs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub power: usize,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub nodes: Option<Vec<(usize, f64)>>,
}

/// Boundary data `η`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EtaSpec {
    #[default]
    Zero,
    /// Explicit `[node, value]` pairs on boundary nodes.
    Nodes { values: Vec<(usize, f64)> },
    /// `offset + gradient · x` on every boundary node.
    Affine { offset: f64, gradient: Vec<f64> },
}

/// Continuum kernel checked by the Euclidean suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclideanConfig {
    pub dim: usize,
    pub alphas: Vec<f64>,
    /// Shells when absent.
    #[serde(default)]
    pub radial_profiles: Option<Vec<RadialProfile>>,
    pub lambdas: Vec<f64>,
    #[serde(default = "default_quadrature_order")]
    pub order: usize,
    #[serde(default = "default_quadrature_tolerance")]
    pub tolerance: f64,
}

fn default_quadrature_order() -> usize {
    QuadratureOptions::default().order
}

fn default_quadrature_tolerance() -> f64 {
    QuadratureOptions::default().tolerance
}

impl Default for EuclideanConfig {
    fn default() -> Self {
        EuclideanConfig {
            dim: 3,
            alphas: vec![0.5, 0.5],
            radial_profiles: None,
            lambdas: vec![1.0, 2.0],
            order: default_quadrature_order(),
            tolerance: default_quadrature_tolerance(),
        }
    }
}

impl EuclideanConfig {
    pub fn spec(&self) -> EuclideanKernelSpec {
        EuclideanKernelSpec {
            dim: self.dim,
            alphas: self.alphas.clone(),
            radial_profiles: self
                .radial_profiles
                .clone()
                .unwrap_or_else(|| vec![RadialProfile::Shell; self.alphas.len()]),
        }
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions { order: self.order, tolerance: self.tolerance }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Report directory, relative to the working directory.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Configs shipped with the binary, addressable by name.
pub const BUNDLED: [(&str, &str); 4] = [
    ("path9_cubic", include_str!("../configs/path9_cubic.toml")),
    ("path5_quartic", include_str!("../configs/path5_quartic.toml")),
    ("grid5_cubic_quartic", include_str!("../configs/grid5_cubic_quartic.toml")),
    ("grid5_local_couplings", include_str!("../configs/grid5_local_couplings.toml")),
];

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads `source`, which is a path or the name of a bundled config. Mesh
    /// files are resolved relative to the config file.
    pub fn load(source: &str) -> anyhow::Result<Self> {
        let path = Path::new(source);
        let (text, base) = if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
            (text, path.parent().map(Path::to_path_buf))
        } else if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == source) {
            (text.to_string(), None)
        } else {
            anyhow::bail!("no config file or bundled config named {source:?}");
        };
        let mut config = Self::parse(&text).map_err(|e| anyhow::anyhow!("{source}: {e}"))?;
        if let (MeshSpec::File { path }, Some(base)) = (&mut config.mesh, base) {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        Ok(config)
    }

    pub fn interaction_spec(&self) -> anyhow::Result<InteractionSpec> {
        let mut spec = InteractionSpec::free();
        for entry in &self.interaction {
            if spec.couplings.contains_key(&entry.power) {
                anyhow::bail!("power {} appears twice in the interaction", entry.power);
            }
            let coupling = match (&entry.value, &entry.nodes) {
                (Some(v), None) => Coupling::Constant(*v),
                (None, Some(nodes)) => Coupling::PerNode(nodes.clone()),
                _ => anyhow::bail!("power {}: give exactly one of `value` and `nodes`", entry.power),
            };
            spec.couplings.insert(entry.power, coupling);
        }
        spec.validate()?;
        Ok(spec)
    }

    /// `max_order` in half-units of `ħ`.
    pub fn max_half_order(&self) -> anyhow::Result<usize> {
        half_order(self.max_order)
    }
}

pub fn half_order(max_order: f64) -> anyhow::Result<usize> {
    let h = 2.0 * max_order;
    if !(h >= 0.0 && h.fract() == 0.0 && h <= 64.0) {
        anyhow::bail!("max_order must be a non-negative multiple of 1/2, got {max_order}");
    }
    Ok(h as usize)
}
