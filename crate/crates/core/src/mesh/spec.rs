//! Declarative mesh and cut descriptions.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{build_annulus_mesh, build_grid_mesh, build_interval_mesh, cut_along_interface, read_mesh, Cut, Mesh};
use super::profile::ProfileSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSpec {
    Interval {
        interior: usize,
        spacing: f64,
        #[serde(default)]
        profile: ProfileSpec,
    },
    Grid {
        nx: usize,
        ny: usize,
        spacing: f64,
        #[serde(default)]
        profile: ProfileSpec,
    },
    Annulus {
        rings: usize,
        angular: usize,
        inner: f64,
        outer: f64,
        #[serde(default)]
        profile: ProfileSpec,
    },
    /// A mesh in the text format of [`read_mesh`].
    File { path: PathBuf },
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSpec::Interval { interior, spacing, profile } => {
                build_interval_mesh(*interior, *spacing, |x| profile.eval(x))
            }
            MeshSpec::Grid { nx, ny, spacing, profile } => build_grid_mesh(*nx, *ny, *spacing, |x| profile.eval(x)),
            MeshSpec::Annulus { rings, angular, inner, outer, profile } => {
                build_annulus_mesh(*rings, *angular, *inner, *outer, |x| profile.eval(x))
            }
            MeshSpec::File { path } => read_mesh(&std::fs::read_to_string(path)?),
        }
    }
}

/// Which interior nodes form the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CutSpec {
    /// Explicit node ids.
    Nodes { nodes: Vec<usize> },
    /// Nodes whose coordinate `axis` equals `value` (to 1e-9).
    Coordinate { axis: usize, value: f64 },
}

impl CutSpec {
    pub fn apply(&self, mesh: &Mesh) -> Result<Cut> {
        match self {
            CutSpec::Nodes { nodes } => {
                if let Some(v) = nodes.iter().find(|&&v| v >= mesh.node_count()) {
                    return Err(Error::InvalidInput(format!("interface node {v} is not in the mesh")));
                }
                cut_along_interface(mesh, |v, _| nodes.contains(&v))
            }
            CutSpec::Coordinate { axis, value } => {
                if *axis >= mesh.dim() {
                    return Err(Error::InvalidInput(format!("axis {axis} exceeds mesh dimension {}", mesh.dim())));
                }
                cut_along_interface(mesh, |_, x| (x[*axis] - value).abs() <= 1e-9)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_from_json() {
        let m: MeshSpec = serde_json::from_str(r#"{"kind":"interval","interior":7,"spacing":1.0}"#).unwrap();
        let mesh = m.build().unwrap();
        assert_eq!(mesh.node_count(), 9);
        let c: CutSpec = serde_json::from_str(r#"{"kind":"coordinate","axis":0,"value":4.0}"#).unwrap();
        assert_eq!(c.apply(&mesh).unwrap().interface(), &[4]);
        assert!(CutSpec::Nodes { nodes: vec![20] }.apply(&mesh).is_err());
        assert!(serde_json::from_str::<MeshSpec>(r#"{"kind":"interval","interior":7,"spacing":1.0,"x":1}"#).is_err());
    }
}
