//! Discrete manifolds with boundary.
//!
//! A [`Mesh`] is a weighted graph. Every edge carries a conductance (the
//! weight entering the quadratic form) and a length (used for geodesic
//! distances). Every node carries a volume and an interior/boundary flag.

mod builders;
mod cut;
mod io;
mod profile;
mod spec;

pub use builders::{build_annulus_mesh, build_grid_mesh, build_interval_mesh};
pub use cut::{cut_along_interface, lambda_one, trim_side, Cut, Part, Side};
pub use io::{read_mesh, write_mesh};
pub use profile::{ProfileSpec, ProfileTerm};
pub use spec::{CutSpec, MeshSpec};

use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use petgraph::visit::NodeFiltered;

use crate::error::{Error, Result};

/// Slack used when comparing geodesic distances against radii.
pub const GEOMETRIC_TOLERANCE: f64 = 1e-12;

/// Whether `d` is at most `r`, up to [`GEOMETRIC_TOLERANCE`].
pub fn within(d: f64, r: f64) -> bool {
    d <= r + GEOMETRIC_TOLERANCE * r.abs().max(1.0)
}

/// Whether `d` is at least `r`, up to [`GEOMETRIC_TOLERANCE`].
pub fn at_least(d: f64, r: f64) -> bool {
    d >= r - GEOMETRIC_TOLERANCE * r.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub length: f64,
}

impl Edge {
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Role of a node in the Dirichlet problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    Interior,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    label: String,
    dim: usize,
    positions: Vec<Vec<f64>>,
    volumes: Vec<f64>,
    roles: Vec<NodeRole>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    graph: UnGraph<(), f64>,
}

impl Mesh {
    /// Builds and validates a mesh.
    ///
    /// Requires positive volumes, weights and lengths, no self loops or
    /// duplicate edges, at least one interior node, and a connected interior
    /// subgraph.
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        positions: Vec<Vec<f64>>,
        volumes: Vec<f64>,
        roles: Vec<NodeRole>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let n = positions.len();
        if dim == 0 {
            return Err(Error::InvalidMesh("dimension must be positive".into()));
        }
        if volumes.len() != n || roles.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} positions, {} volumes, {} roles",
                n,
                volumes.len(),
                roles.len()
            )));
        }
        for (i, p) in positions.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "node {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidMesh(format!("node {i} has a non-finite coordinate")));
            }
        }
        for (i, &v) in volumes.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidMesh(format!("node {i} has volume {v}")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::BTreeSet::new();
        let mut graph = UnGraph::<(), f64>::with_capacity(n, edges.len());
        for _ in 0..n {
            graph.add_node(());
        }
        for (k, e) in edges.iter().enumerate() {
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidMesh(format!("edge {k} references a missing node")));
            }
            if e.a == e.b {
                return Err(Error::InvalidMesh(format!("edge {k} is a self loop at node {}", e.a)));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidMesh(format!("edge {k} has weight {}", e.weight)));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::InvalidMesh(format!("edge {k} has length {}", e.length)));
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(Error::InvalidMesh(format!(
                    "duplicate edge between {} and {}",
                    e.a, e.b
                )));
            }
            adjacency[e.a].push((e.b, k));
            adjacency[e.b].push((e.a, k));
            graph.add_edge(NodeIndex::new(e.a), NodeIndex::new(e.b), e.length);
        }
        let mesh = Mesh {
            label: label.into(),
            dim,
            positions,
            volumes,
            roles,
            edges,
            adjacency,
            graph,
        };
        let interior = mesh.interior_nodes();
        if interior.is_empty() {
            return Err(Error::InvalidMesh("mesh has no interior nodes".into()));
        }
        let mask: Vec<bool> = mesh.roles.iter().map(|r| *r == NodeRole::Interior).collect();
        if mesh.components(&mask).len() != 1 {
            return Err(Error::InvalidMesh("interior subgraph is not connected".into()));
        }
        Ok(mesh)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, node: usize) -> &[f64] {
        &self.positions[node]
    }

    pub fn volume(&self, node: usize) -> f64 {
        self.volumes[node]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.roles[node] == NodeRole::Boundary
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `node` as `(neighbour, edge index)` pairs.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Whether the edge contributes to the quadratic form.
    ///
    /// Edges joining two boundary nodes only carry geometry: their energy is
    /// a constant of the Dirichlet data and is dropped.
    pub fn is_energy_edge(&self, edge: &Edge) -> bool {
        !(self.is_boundary(edge.a) && self.is_boundary(edge.b))
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Connected components of the subgraph induced by `mask`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut uf = UnionFind::<usize>::new(n);
        for e in &self.edges {
            if mask[e.a] && mask[e.b] {
                uf.union(e.a, e.b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in (0..n).filter(|&i| mask[i]) {
            groups.entry(uf.find(i)).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }

    /// Geodesic distances from `source` along edge lengths, restricted to
    /// nodes allowed by `mask` (all nodes when `None`). Unreachable nodes get
    /// `f64::INFINITY`.
    pub fn distances_from(&self, source: usize, mask: Option<&[bool]>) -> Vec<f64> {
        let n = self.node_count();
        let mut out = vec![f64::INFINITY; n];
        let map = match mask {
            None => petgraph::algo::dijkstra(&self.graph, NodeIndex::new(source), None, |e| {
                *e.weight()
            }),
            Some(mask) => {
                if !mask[source] {
                    return out;
                }
                let filtered = NodeFiltered::from_fn(&self.graph, |v: NodeIndex| mask[v.index()]);
                petgraph::algo::dijkstra(&filtered, NodeIndex::new(source), None, |e| *e.weight())
            }
        };
        for (k, d) in map {
            out[k.index()] = d;
        }
        out
    }

    /// Distance from every node to the nearest node of `sources`.
    pub fn distances_to_set(&self, sources: &[usize], mask: Option<&[bool]>) -> Vec<f64> {
        let mut best = vec![f64::INFINITY; self.node_count()];
        for &s in sources {
            for (b, d) in best.iter_mut().zip(self.distances_from(s, mask)) {
                *b = b.min(d);
            }
        }
        best
    }

    pub fn geodesic_distance(&self, p: usize, q: usize) -> f64 {
        self.distances_from(p, None)[q]
    }

    /// Distance of every node to the boundary.
    pub fn boundary_distances(&self) -> Result<Vec<f64>> {
        let boundary = self.boundary_nodes();
        if boundary.is_empty() {
            return Err(Error::NoBoundary);
        }
        Ok(self.distances_to_set(&boundary, None))
    }

    /// Interior nodes at distance at least `1/Λ` from the boundary.
    ///
    /// An empty result is allowed and means the deformed region is empty.
    pub fn trim_to_deformed(&self, lambda: f64) -> Result<Vec<usize>> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("Λ must be positive, got {lambda}")));
        }
        let d = self.boundary_distances()?;
        let r = 1.0 / lambda;
        Ok(self
            .interior_nodes()
            .into_iter()
            .filter(|&p| at_least(d[p], r))
            .collect())
    }

    /// The same mesh with node `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Mesh> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("relabeling is not a permutation of the nodes".into()));
        }
        let mut positions = vec![Vec::new(); n];
        let mut volumes = vec![0.0; n];
        let mut roles = vec![NodeRole::Interior; n];
        for v in 0..n {
            positions[perm[v]] = self.positions[v].clone();
            volumes[perm[v]] = self.volumes[v];
            roles[perm[v]] = self.roles[v];
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { a: perm[e.a], b: perm[e.b], ..*e })
            .collect();
        Mesh::new(self.label.clone(), self.dim, positions, volumes, roles, edges)
    }

    /// Node coordinates rendered for diagnostics.
    pub fn describe_node(&self, node: usize) -> String {
        let coords: Vec<String> = self.positions[node].iter().map(|x| format!("{x}")).collect();
        format!("{}({})", node, coords.join(","))
    }
}
