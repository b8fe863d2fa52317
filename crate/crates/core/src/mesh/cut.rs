use serde::{Deserialize, Serialize};

use super::{at_least, Edge, Mesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Where a node sits relative to a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Interior(Side),
    Interface,
    Boundary(Side),
}

/// Decomposition of a mesh along an interior separator Σ.
///
/// The interior minus Σ splits into a left part `L` (the component holding
/// the lowest-numbered node) and a right part `R` (everything else). Each
/// boundary node belongs to exactly one side.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    interface: Vec<usize>,
    interior: [Vec<usize>; 2],
    boundary: [Vec<usize>; 2],
    parts: Vec<Part>,
}

fn slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl Cut {
    /// Builds a cut from explicit node sets and checks it against the mesh.
    ///
    /// Either side interior may be empty; the interface may not.
    pub fn from_parts(
        mesh: &Mesh,
        interface: Vec<usize>,
        left: Vec<usize>,
        right: Vec<usize>,
        boundary_left: Vec<usize>,
        boundary_right: Vec<usize>,
    ) -> Result<Cut> {
        let n = mesh.node_count();
        let mut parts: Vec<Option<Part>> = vec![None; n];
        let groups = [
            (&interface, Part::Interface, false),
            (&left, Part::Interior(Side::Left), false),
            (&right, Part::Interior(Side::Right), false),
            (&boundary_left, Part::Boundary(Side::Left), true),
            (&boundary_right, Part::Boundary(Side::Right), true),
        ];
        for (nodes, part, boundary) in groups {
            for &v in nodes.iter() {
                if v >= n {
                    return Err(Error::InconsistentCut(format!("node {v} is not in the mesh")));
                }
                if mesh.is_boundary(v) != boundary {
                    return Err(Error::InconsistentCut(format!("node {v} has the wrong role")));
                }
                if parts[v].replace(part).is_some() {
                    return Err(Error::InconsistentCut(format!("node {v} is listed twice")));
                }
            }
        }
        let parts: Vec<Part> = parts
            .into_iter()
            .enumerate()
            .map(|(v, p)| p.ok_or_else(|| Error::InconsistentCut(format!("node {v} is unassigned"))))
            .collect::<Result<_>>()?;
        if interface.is_empty() {
            return Err(Error::NotSeparator("interface is empty".into()));
        }
        for e in mesh.edges() {
            if !mesh.is_energy_edge(e) {
                continue;
            }
            let (pa, pb) = (parts[e.a], parts[e.b]);
            let side_of = |p: Part| match p {
                Part::Interior(s) | Part::Boundary(s) => Some(s),
                Part::Interface => None,
            };
            if let (Some(sa), Some(sb)) = (side_of(pa), side_of(pb)) {
                if sa != sb {
                    return Err(Error::NotSeparator(format!(
                        "edge {}-{} joins the two sides without crossing the interface",
                        e.a, e.b
                    )));
                }
            }
        }
        let sorted = |mut v: Vec<usize>| {
            v.sort_unstable();
            v
        };
        Ok(Cut {
            interface: sorted(interface),
            interior: [sorted(left), sorted(right)],
            boundary: [sorted(boundary_left), sorted(boundary_right)],
            parts,
        })
    }

    pub fn interface(&self) -> &[usize] {
        &self.interface
    }

    pub fn interior(&self, side: Side) -> &[usize] {
        &self.interior[slot(side)]
    }

    pub fn boundary(&self, side: Side) -> &[usize] {
        &self.boundary[slot(side)]
    }

    pub fn part(&self, node: usize) -> Part {
        self.parts[node]
    }

    /// Nodes of the side submesh: `L_i ∪ Σ ∪ Y_i`, sorted.
    pub fn side_nodes(&self, side: Side) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .interior(side)
            .iter()
            .chain(&self.interface)
            .chain(self.boundary(side))
            .copied()
            .collect();
        v.sort_unstable();
        v
    }

    pub fn side_mask(&self, side: Side) -> Vec<bool> {
        let mut m = vec![false; self.parts.len()];
        for v in self.side_nodes(side) {
            m[v] = true;
        }
        m
    }

    /// Boundary of the side submesh: `Y_i` followed by `Σ`.
    pub fn side_boundary(&self, side: Side) -> Vec<usize> {
        self.boundary(side).iter().chain(&self.interface).copied().collect()
    }

    /// The same cut with the two labels exchanged.
    pub fn swapped(&self) -> Cut {
        let flip = |p: Part| match p {
            Part::Interior(s) => Part::Interior(s.other()),
            Part::Boundary(s) => Part::Boundary(s.other()),
            Part::Interface => Part::Interface,
        };
        Cut {
            interface: self.interface.clone(),
            interior: [self.interior[1].clone(), self.interior[0].clone()],
            boundary: [self.boundary[1].clone(), self.boundary[0].clone()],
            parts: self.parts.iter().map(|&p| flip(p)).collect(),
        }
    }

    /// Fraction of an edge's energy assigned to `side`.
    ///
    /// Interface-interface edges are shared half and half; every other
    /// energy edge belongs entirely to the side of its non-interface
    /// endpoint. The two fractions always sum to one on energy edges.
    pub fn edge_share(&self, mesh: &Mesh, edge: &Edge, side: Side) -> f64 {
        if !mesh.is_energy_edge(edge) {
            return 0.0;
        }
        match (self.parts[edge.a], self.parts[edge.b]) {
            (Part::Interface, Part::Interface) => 0.5,
            (Part::Interior(s) | Part::Boundary(s), _) | (_, Part::Interior(s) | Part::Boundary(s)) => {
                if s == side {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Fraction of a node's mass term assigned to `side`.
    pub fn mass_share(&self, node: usize, side: Side) -> f64 {
        match self.parts[node] {
            Part::Interface => 0.5,
            Part::Interior(s) if s == side => 1.0,
            _ => 0.0,
        }
    }

    /// Split of each interface node's operator diagonal into left and right
    /// shares, aligned with [`Cut::interface`].
    pub fn diagonal_split(&self, mesh: &Mesh, mass_squared: f64) -> Vec<(f64, f64)> {
        self.interface
            .iter()
            .map(|&s| {
                let mut shares = [0.0; 2];
                for side in Side::BOTH {
                    let mut d = 0.5 * mass_squared * mesh.volume(s);
                    for &(_, k) in mesh.neighbors(s) {
                        let e = &mesh.edges()[k];
                        d += self.edge_share(mesh, e, side) * e.weight;
                    }
                    shares[slot(side)] = d;
                }
                (shares[0], shares[1])
            })
            .collect()
    }
}

/// Cuts the mesh along the interior nodes picked by `selector`.
///
/// Boundary nodes picked by the selector are ignored. A boundary node next to
/// one side joins that side; one next to both is an error. Boundary nodes next
/// to neither side take the side of the nearest assigned boundary node along
/// boundary edges, preferring left on ties and when none is reachable.
pub fn cut_along_interface(
    mesh: &Mesh,
    selector: impl Fn(usize, &[f64]) -> bool,
) -> Result<Cut> {
    let n = mesh.node_count();
    let interface: Vec<usize> = mesh
        .interior_nodes()
        .into_iter()
        .filter(|&v| selector(v, mesh.position(v)))
        .collect();
    if interface.is_empty() {
        return Err(Error::NotSeparator("selector picked no interior nodes".into()));
    }
    let mut mask = vec![false; n];
    for v in mesh.interior_nodes() {
        mask[v] = true;
    }
    for &v in &interface {
        mask[v] = false;
    }
    let comps = mesh.components(&mask);
    if comps.len() < 2 {
        return Err(Error::NotSeparator(format!(
            "interior minus interface has {} component(s)",
            comps.len()
        )));
    }
    let left = comps[0].clone();
    let mut right: Vec<usize> = comps[1..].concat();
    right.sort_unstable();

    let mut label: Vec<Option<Side>> = vec![None; n];
    for &v in &left {
        label[v] = Some(Side::Left);
    }
    for &v in &right {
        label[v] = Some(Side::Right);
    }
    let boundary = mesh.boundary_nodes();
    let mut bside: Vec<Option<Side>> = vec![None; n];
    for &b in &boundary {
        let mut touches = [false; 2];
        for &(w, _) in mesh.neighbors(b) {
            if !mesh.is_boundary(w) {
                match label[w] {
                    Some(Side::Left) => touches[0] = true,
                    Some(Side::Right) => touches[1] = true,
                    None => {}
                }
            }
        }
        bside[b] = match touches {
            [true, true] => {
                return Err(Error::NotSeparator(format!(
                    "boundary node {} touches both sides",
                    mesh.describe_node(b)
                )))
            }
            [true, false] => Some(Side::Left),
            [false, true] => Some(Side::Right),
            [false, false] => None,
        };
    }
    loop {
        let mut updates = Vec::new();
        for &b in &boundary {
            if bside[b].is_some() {
                continue;
            }
            let mut found: Option<Side> = None;
            for &(w, _) in mesh.neighbors(b) {
                match bside[w] {
                    Some(Side::Left) => found = Some(Side::Left),
                    Some(Side::Right) if found.is_none() => found = Some(Side::Right),
                    _ => {}
                }
            }
            if let Some(s) = found {
                updates.push((b, s));
            }
        }
        if updates.is_empty() {
            break;
        }
        for (b, s) in updates {
            bside[b] = Some(s);
        }
    }
    let mut bl = Vec::new();
    let mut br = Vec::new();
    for &b in &boundary {
        match bside[b].unwrap_or(Side::Left) {
            Side::Left => bl.push(b),
            Side::Right => br.push(b),
        }
    }
    Cut::from_parts(mesh, interface, left, right, bl, br)
}

/// `Λ₁ = 1 / min d(Σ, ∂M)`.
pub fn lambda_one(mesh: &Mesh, cut: &Cut) -> Result<f64> {
    let d = mesh.boundary_distances()?;
    let min = cut
        .interface()
        .iter()
        .map(|&s| d[s])
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::InvalidMesh("interface is not connected to the boundary".into()));
    }
    Ok(1.0 / min)
}

/// Side interior nodes at distance at least `1/Λ` from `Σ ∪ Y_i`, measured
/// inside the side submesh.
pub fn trim_side(mesh: &Mesh, cut: &Cut, side: Side, lambda: f64) -> Result<Vec<usize>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("Λ must be positive, got {lambda}")));
    }
    let mask = cut.side_mask(side);
    let d = mesh.distances_to_set(&cut.side_boundary(side), Some(&mask));
    let r = 1.0 / lambda;
    Ok(cut
        .interior(side)
        .iter()
        .copied()
        .filter(|&p| at_least(d[p], r))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid_mesh, build_interval_mesh};

    #[test]
    fn path_cut() {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        let cut = cut_along_interface(&m, |v, _| v == 2).unwrap();
        assert_eq!(cut.interior(Side::Left), &[1]);
        assert_eq!(cut.interior(Side::Right), &[3]);
        assert_eq!(cut.boundary(Side::Left), &[0]);
        assert_eq!(cut.boundary(Side::Right), &[4]);
        assert_eq!(lambda_one(&m, &cut).unwrap(), 0.5);
        assert_eq!(cut.diagonal_split(&m, 0.0), vec![(1.0, 1.0)]);
    }

    #[test]
    fn non_separator_rejected() {
        let m = build_grid_mesh(5, 5, 1.0, |_| 1.0).unwrap();
        let err = cut_along_interface(&m, |v, _| v == 12).unwrap_err();
        assert!(matches!(err, Error::NotSeparator(_)));
    }

    #[test]
    fn grid_middle_column() {
        let m = build_grid_mesh(5, 5, 1.0, |_| 1.0).unwrap();
        let cut = cut_along_interface(&m, |_, x| x[0] == 2.0).unwrap();
        assert_eq!(cut.interface(), &[7, 12, 17]);
        assert_eq!(cut.interior(Side::Left), &[6, 11, 16]);
        assert!(cut.boundary(Side::Left).contains(&0));
        assert!(cut.boundary(Side::Right).contains(&4));
        let split = cut.diagonal_split(&m, 0.3);
        let whole: Vec<f64> = cut
            .interface()
            .iter()
            .map(|&s| {
                m.neighbors(s).iter().map(|&(_, k)| m.edges()[k].weight).sum::<f64>()
                    + 0.3 * m.volume(s)
            })
            .collect();
        for ((l, r), w) in split.iter().zip(whole) {
            assert!((l + r - w).abs() < 1e-14);
        }
    }

    #[test]
    fn swap_exchanges_sides() {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        let cut = cut_along_interface(&m, |v, _| v == 2).unwrap();
        let s = cut.swapped();
        assert_eq!(s.interior(Side::Left), cut.interior(Side::Right));
        assert_eq!(s.swapped(), cut);
    }

    #[test]
    fn side_trim() {
        let m = build_interval_mesh(7, 1.0, |_| 1.0).unwrap();
        let cut = cut_along_interface(&m, |v, _| v == 4).unwrap();
        assert_eq!(trim_side(&m, &cut, Side::Left, 1.0).unwrap(), vec![1, 2, 3]);
        assert_eq!(trim_side(&m, &cut, Side::Left, 0.9).unwrap(), vec![2]);
    }
}
