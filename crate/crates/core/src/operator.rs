//! Discrete Dirichlet operator `Δ + m²`.
//!
//! The quadratic form is `½ Σ_e w_e (φ_a - φ_b)² + ½ m² Σ_p vol(p) φ(p)²`
//! over energy edges and free nodes. Its matrix is split into blocks indexed
//! by free nodes `I` and fixed (Dirichlet) nodes `B`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Cut, Mesh, Side};

/// Any finite `m²` is accepted; positivity of the spectrum is checked at
/// assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub mass_squared: f64,
}

impl OperatorSpec {
    pub fn massless() -> Self {
        OperatorSpec { mass_squared: 0.0 }
    }

    pub fn with_mass_squared(mass_squared: f64) -> Self {
        OperatorSpec { mass_squared }
    }
}

/// Eigenpairs of `A ψ = λ V ψ`, with `V` the diagonal of free-node volumes.
/// Eigenvectors are `V`-orthonormal columns, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    node_count: usize,
    free: Vec<usize>,
    fixed: Vec<usize>,
    interior_matrix: DMatrix<f64>,
    boundary_coupling: DMatrix<f64>,
    boundary_matrix: DMatrix<f64>,
    volumes: DVector<f64>,
    mass_squared: f64,
}

fn check_spec(spec: &OperatorSpec) -> Result<()> {
    if spec.mass_squared.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("mass squared must be finite, got {}", spec.mass_squared)))
    }
}

impl OperatorMatrix {
    fn build(
        mesh: &Mesh,
        spec: &OperatorSpec,
        free: Vec<usize>,
        fixed: Vec<usize>,
        edge_factor: impl Fn(usize) -> f64,
        mass_factor: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        check_spec(spec)?;
        let n = mesh.node_count();
        let nf = free.len();
        let total = nf + fixed.len();
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in free.iter().chain(&fixed).enumerate() {
            slot[v] = i;
        }
        let mut k = DMatrix::<f64>::zeros(total, total);
        for (idx, e) in mesh.edges().iter().enumerate() {
            let f = edge_factor(idx);
            if f == 0.0 || slot[e.a] == usize::MAX || slot[e.b] == usize::MAX {
                continue;
            }
            let (a, b) = (slot[e.a], slot[e.b]);
            let w = f * e.weight;
            k[(a, a)] += w;
            k[(b, b)] += w;
            k[(a, b)] -= w;
            k[(b, a)] -= w;
        }
        for (i, &v) in free.iter().chain(&fixed).enumerate() {
            let c = mass_factor(v);
            if c != 0.0 {
                k[(i, i)] += c * spec.mass_squared * mesh.volume(v);
            }
        }
        let volumes = DVector::from_iterator(nf, free.iter().map(|&v| mesh.volume(v)));
        let op = OperatorMatrix {
            node_count: n,
            interior_matrix: k.view((0, 0), (nf, nf)).into_owned(),
            boundary_coupling: k.view((0, nf), (nf, total - nf)).into_owned(),
            boundary_matrix: k.view((nf, nf), (total - nf, total - nf)).into_owned(),
            free,
            fixed,
            volumes,
            mass_squared: spec.mass_squared,
        };
        if nf > 0 && Cholesky::new(op.interior_matrix.clone()).is_none() {
            let smallest = op.smallest_eigenvalue().unwrap_or(f64::NAN);
            return Err(Error::NonPositiveSpectrum { smallest });
        }
        Ok(op)
    }

    /// Whole-mesh operator: interior nodes free, boundary nodes fixed.
    pub fn assemble(mesh: &Mesh, spec: &OperatorSpec) -> Result<Self> {
        let edges = mesh.edges();
        OperatorMatrix::build(
            mesh,
            spec,
            mesh.interior_nodes(),
            mesh.boundary_nodes(),
            |k| if mesh.is_energy_edge(&edges[k]) { 1.0 } else { 0.0 },
            |v| if mesh.is_boundary(v) { 0.0 } else { 1.0 },
        )
    }

    /// Side operator: `L_i` free, `Y_i ∪ Σ` fixed. Interface-interface edges
    /// and interface mass terms enter with weight one half.
    pub fn assemble_side(mesh: &Mesh, spec: &OperatorSpec, cut: &Cut, side: Side) -> Result<Self> {
        let edges = mesh.edges();
        OperatorMatrix::build(
            mesh,
            spec,
            cut.interior(side).to_vec(),
            cut.side_boundary(side),
            |k| cut.edge_share(mesh, &edges[k], side),
            |v| cut.mass_share(v, side),
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Mesh ids of the free nodes, in matrix order.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    /// Mesh ids of the fixed nodes, in matrix order.
    pub fn fixed_nodes(&self) -> &[usize] {
        &self.fixed
    }

    pub fn interior_matrix(&self) -> &DMatrix<f64> {
        &self.interior_matrix
    }

    pub fn boundary_coupling(&self) -> &DMatrix<f64> {
        &self.boundary_coupling
    }

    pub fn boundary_matrix(&self) -> &DMatrix<f64> {
        &self.boundary_matrix
    }

    pub fn mass_squared(&self) -> f64 {
        self.mass_squared
    }

    pub fn free_volumes(&self) -> &DVector<f64> {
        &self.volumes
    }

    /// `½ xᵀ K x` for a field given on all mesh nodes; nodes outside the
    /// operator are ignored.
    pub fn energy(&self, field: &[f64]) -> f64 {
        let xi = DVector::from_iterator(self.free.len(), self.free.iter().map(|&v| field[v]));
        let xb = DVector::from_iterator(self.fixed.len(), self.fixed.iter().map(|&v| field[v]));
        0.5 * (xi.dot(&(&self.interior_matrix * &xi))
            + 2.0 * xi.dot(&(&self.boundary_coupling * &xb))
            + xb.dot(&(&self.boundary_matrix * &xb)))
    }

    /// Generalized eigenpairs of the interior block.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let n = self.free.len();
        let s = self.volumes.map(|v| 1.0 / v.sqrt());
        let mut m = self.interior_matrix.clone();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] *= s[i] * s[j];
            }
        }
        let m = 0.5 * (&m + m.transpose());
        let eps = f64::EPSILON;
        let max_iterations = 1000 * n.max(1);
        let eig = SymmetricEigen::try_new(m, eps, max_iterations).ok_or(Error::EigenNotConverged {
            size: n,
            eps,
            max_iterations,
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = DMatrix::zeros(n, n);
        for (c, &k) in order.iter().enumerate() {
            for i in 0..n {
                vectors[(i, c)] = s[i] * eig.eigenvectors[(i, k)];
            }
        }
        Ok(Spectrum { values, vectors })
    }

    /// Smallest eigenvalue of `A ψ = λ V ψ`.
    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        if self.free.is_empty() {
            return Err(Error::InvalidInput("operator has no free nodes".into()));
        }
        Ok(self.spectrum()?.values[0])
    }

    /// Nonzero entries of the interior block as `row col value` lines, with
    /// rows and columns given by mesh node id.
    pub fn interior_coo(&self) -> String {
        let mut out = String::new();
        for j in 0..self.free.len() {
            for i in 0..self.free.len() {
                let v = self.interior_matrix[(i, j)];
                if v != 0.0 {
                    out.push_str(&format!("{} {} {}\n", self.free[i], self.free[j], v));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid_mesh, build_interval_mesh, cut_along_interface};
    use approx::assert_abs_diff_eq;

    #[test]
    fn path_matrix() {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert_eq!(op.interior_matrix(), &expected);
        assert_eq!(op.boundary_coupling()[(0, 0)], -1.0);
        assert_eq!(op.boundary_coupling()[(2, 1)], -1.0);
    }

    #[test]
    fn path_smallest_eigenvalue() {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        assert_abs_diff_eq!(op.smallest_eigenvalue().unwrap(), 2.0 - 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn mass_shifts_spectrum() {
        let m = build_grid_mesh(5, 4, 0.7, |x| 1.0 + 0.2 * x[0]).unwrap();
        let a = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        let b = OperatorMatrix::assemble(&m, &OperatorSpec::with_mass_squared(0.3)).unwrap();
        let (sa, sb) = (a.spectrum().unwrap(), b.spectrum().unwrap());
        for k in 0..sa.values.len() {
            assert_abs_diff_eq!(sb.values[k], sa.values[k] + 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn side_operators_sum_to_whole() {
        let m = build_grid_mesh(5, 5, 1.0, |x| 1.0 + 0.1 * x[1]).unwrap();
        let cut = cut_along_interface(&m, |_, x| x[0] == 2.0).unwrap();
        let spec = OperatorSpec::with_mass_squared(0.4);
        let whole = OperatorMatrix::assemble(&m, &spec).unwrap();
        let l = OperatorMatrix::assemble_side(&m, &spec, &cut, Side::Left).unwrap();
        let r = OperatorMatrix::assemble_side(&m, &spec, &cut, Side::Right).unwrap();
        let field: Vec<f64> = (0..m.node_count()).map(|i| ((i * 7) % 5) as f64 - 1.5).collect();
        assert_abs_diff_eq!(whole.energy(&field), l.energy(&field) + r.energy(&field), epsilon = 1e-12);
    }

    #[test]
    fn single_node_with_mass() {
        let m = build_interval_mesh(1, 1.0, |_| 1.0).unwrap();
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::with_mass_squared(1.0)).unwrap();
        assert_eq!(op.interior_matrix()[(0, 0)], 3.0);
        assert_abs_diff_eq!(op.smallest_eigenvalue().unwrap(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn massless_flat_rows_sum_to_zero() {
        let m = build_grid_mesh(5, 5, 1.0, |_| 1.0).unwrap();
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        for i in 0..op.free_nodes().len() {
            let s = op.interior_matrix().row(i).sum() + op.boundary_coupling().row(i).sum();
            assert_eq!(s, 0.0);
            assert_eq!(op.interior_matrix()[(i, i)], 4.0);
        }
    }

    #[test]
    fn negative_mass_checked_against_spectrum() {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        assert!(OperatorMatrix::assemble(&m, &OperatorSpec::with_mass_squared(-0.5)).is_ok());
        let err = OperatorMatrix::assemble(&m, &OperatorSpec::with_mass_squared(-0.7)).unwrap_err();
        assert!(matches!(err, Error::NonPositiveSpectrum { smallest } if smallest < 0.0));
    }

    #[test]
    fn coo_lists_nonzeros() {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        assert_eq!(op.interior_coo().lines().count(), 7);
    }
}
