//! Polynomial self-interactions and their vertices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::averaging::KernelMatrix;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// A coupling constant, uniform or given per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Constant(f64),
    /// `(node, value)` pairs; nodes not listed have coupling zero.
    PerNode(Vec<(usize, f64)>),
}

impl Coupling {
    pub fn at(&self, node: usize) -> f64 {
        match self {
            Coupling::Constant(t) => *t,
            Coupling::PerNode(values) => values.iter().find(|(v, _)| *v == node).map_or(0.0, |(_, t)| *t),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coupling::Constant(t) => *t == 0.0,
            Coupling::PerNode(values) => values.iter().all(|(_, t)| *t == 0.0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Coupling::Constant(t) => vec![*t],
            Coupling::PerNode(values) => values.iter().map(|(_, t)| *t).collect(),
        }
    }
}

/// `S_int[φ] = Σ_k Σ_p t_k(p) vol(p) φ(p)^k` for powers `k ≥ 3`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSpec {
    pub couplings: BTreeMap<usize, Coupling>,
}

impl InteractionSpec {
    pub fn free() -> Self {
        InteractionSpec::default()
    }

    pub fn with(mut self, power: usize, coupling: Coupling) -> Self {
        self.couplings.insert(power, coupling);
        self
    }

    pub fn constant(power: usize, t: f64) -> Self {
        InteractionSpec::free().with(power, Coupling::Constant(t))
    }

    pub fn validate(&self) -> Result<()> {
        for (&k, c) in &self.couplings {
            if k < 3 {
                return Err(Error::InvalidInput(format!(
                    "coupling power {k} is not supported; powers start at 3"
                )));
            }
            if c.values().iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidInput(format!("coupling t_{k} is not finite")));
            }
        }
        Ok(())
    }

    /// Powers with a nonzero coupling, ascending.
    pub fn active_powers(&self) -> Vec<usize> {
        self.couplings.iter().filter(|(_, c)| !c.is_zero()).map(|(k, _)| *k).collect()
    }

    pub fn max_power(&self) -> Option<usize> {
        self.active_powers().last().copied()
    }

    pub fn is_free(&self) -> bool {
        self.active_powers().is_empty()
    }

    pub fn coupling(&self, power: usize, node: usize) -> f64 {
        self.couplings.get(&power).map_or(0.0, |c| c.at(node))
    }
}

/// One interaction vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    /// Order in `√ħ`, that is `k - 2`.
    pub half_order: usize,
    pub node: usize,
    pub power: usize,
    /// `t_k(p) vol(p)`.
    pub weight: f64,
    /// Nonzero entries of the averaging row carried by every leg.
    pub row: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexTerms {
    pub vertices: Vec<Vertex>,
    /// Set when the vertex region itself is empty.
    pub region_empty: bool,
}

/// Vertices of the regularized interaction on `region`.
pub fn vertex_terms(
    mesh: &Mesh,
    interaction: &InteractionSpec,
    region: &[usize],
    kernel: &KernelMatrix,
) -> Result<VertexTerms> {
    interaction.validate()?;
    if kernel.node_count() != mesh.node_count() {
        return Err(Error::DimensionMismatch("kernel size differs from the mesh".into()));
    }
    let mut vertices = Vec::new();
    for &p in region {
        for k in interaction.active_powers() {
            let t = interaction.coupling(k, p);
            if t == 0.0 {
                continue;
            }
            let row = (0..mesh.node_count())
                .filter(|&q| kernel.matrix[(p, q)] != 0.0)
                .map(|q| (q, kernel.matrix[(p, q)]))
                .collect();
            vertices.push(Vertex {
                half_order: k - 2,
                node: p,
                power: k,
                weight: t * mesh.volume(p),
                row,
            });
        }
    }
    Ok(VertexTerms {
        vertices,
        region_empty: region.is_empty(),
    })
}

/// A redefinition `t_k → t_k(Λ)` of the couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Redefinition {
    Identity,
    /// `t_k → t_k + c Λ`.
    Shift { power: usize, c: f64 },
    /// `t_k → factor · t_k`.
    Scale { power: usize, factor: f64 },
    /// `t_k(p) → t_k(p) + δ(p)`.
    PerNode { power: usize, values: Vec<(usize, f64)> },
}

impl Redefinition {
    /// The redefined couplings at cutoff `lambda` on a mesh with `nodes` nodes.
    pub fn apply(&self, spec: &InteractionSpec, lambda: f64, nodes: usize) -> InteractionSpec {
        let mut out = spec.clone();
        let per_node = |power: usize, f: &dyn Fn(usize, f64) -> f64| -> Coupling {
            Coupling::PerNode((0..nodes).map(|p| (p, f(p, spec.coupling(power, p)))).collect())
        };
        match self {
            Redefinition::Identity => {}
            Redefinition::Shift { power, c } => {
                let c = match spec.couplings.get(power) {
                    None | Some(Coupling::Constant(_)) => Coupling::Constant(spec.coupling(*power, 0) + c * lambda),
                    Some(Coupling::PerNode(_)) => per_node(*power, &|_, t| t + c * lambda),
                };
                out.couplings.insert(*power, c);
            }
            Redefinition::Scale { power, factor } => {
                if let Some(c) = spec.couplings.get(power) {
                    let scaled = match c {
                        Coupling::Constant(t) => Coupling::Constant(t * factor),
                        Coupling::PerNode(v) => Coupling::PerNode(v.iter().map(|(p, t)| (*p, t * factor)).collect()),
                    };
                    out.couplings.insert(*power, scaled);
                }
            }
            Redefinition::PerNode { power, values } => {
                let delta = Coupling::PerNode(values.clone());
                out.couplings.insert(*power, per_node(*power, &|p, t| t + delta.at(p)));
            }
        }
        out
    }
}
