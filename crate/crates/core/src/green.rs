//! Green's functions, Poisson kernels and Dirichlet-to-Neumann operators,
//! and their behaviour under cutting.
//!
//! For a block operator `K = [[K_II, K_IB], [K_BI, K_BB]]` the Green's
//! function is `G = K_II⁻¹`, the Poisson kernel `P = -G K_IB` and the DtN
//! operator the Schur complement `D = K_BB - K_BI G K_IB`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{Cut, Mesh, Side};
use crate::operator::{OperatorMatrix, OperatorSpec};
use crate::report::{max_abs_diff, scaled_diff, VerificationRecord};

pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (&m + m.transpose())
}

#[derive(Debug, Clone)]
pub struct GreenBundle {
    node_count: usize,
    free: Vec<usize>,
    fixed: Vec<usize>,
    free_slot: Vec<Option<usize>>,
    fixed_slot: Vec<Option<usize>>,
    green: DMatrix<f64>,
    poisson: DMatrix<f64>,
    dtn: DMatrix<f64>,
}

impl GreenBundle {
    pub fn new(op: &OperatorMatrix) -> Result<Self> {
        let chol = Cholesky::new(op.interior_matrix().clone()).ok_or_else(|| {
            Error::NonPositiveSpectrum { smallest: op.smallest_eigenvalue().unwrap_or(f64::NAN) }
        })?;
        let a = op.interior_matrix();
        let inv = chol.inverse();
        // One step of iterative refinement: G + G (I - A G).
        let residual = DMatrix::identity(a.nrows(), a.ncols()) - a * &inv;
        let green = symmetrize(&inv + &inv * residual);
        let poisson = -(&green * op.boundary_coupling());
        let dtn = symmetrize(op.boundary_matrix() + op.boundary_coupling().transpose() * &poisson);
        let n = op.node_count();
        let mut free_slot = vec![None; n];
        let mut fixed_slot = vec![None; n];
        for (i, &v) in op.free_nodes().iter().enumerate() {
            free_slot[v] = Some(i);
        }
        for (i, &v) in op.fixed_nodes().iter().enumerate() {
            fixed_slot[v] = Some(i);
        }
        Ok(GreenBundle {
            node_count: n,
            free: op.free_nodes().to_vec(),
            fixed: op.fixed_nodes().to_vec(),
            free_slot,
            fixed_slot,
            green,
            poisson,
            dtn,
        })
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    pub fn fixed_nodes(&self) -> &[usize] {
        &self.fixed
    }

    /// Row of `node` in [`GreenBundle::green`], if it is free.
    pub fn free_index(&self, node: usize) -> Option<usize> {
        self.free_slot.get(node).copied().flatten()
    }

    /// `G` indexed by free nodes.
    pub fn green(&self) -> &DMatrix<f64> {
        &self.green
    }

    /// `P` with rows indexed by free nodes and columns by fixed nodes.
    pub fn poisson(&self) -> &DMatrix<f64> {
        &self.poisson
    }

    /// `D` indexed by fixed nodes.
    pub fn dtn(&self) -> &DMatrix<f64> {
        &self.dtn
    }

    /// `G` on all mesh nodes, zero outside the free nodes.
    pub fn green_full(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.node_count, self.node_count);
        for (i, &a) in self.free.iter().enumerate() {
            for (j, &b) in self.free.iter().enumerate() {
                g[(a, b)] = self.green[(i, j)];
            }
        }
        g
    }

    /// Poisson kernel for the fixed nodes `columns`, on all mesh nodes: the
    /// harmonic extension on free nodes, the identity on `columns`, zero
    /// elsewhere.
    pub fn poisson_full(&self, columns: &[usize]) -> Result<DMatrix<f64>> {
        let mut p = DMatrix::zeros(self.node_count, columns.len());
        for (c, &y) in columns.iter().enumerate() {
            let k = self.fixed_slot[y]
                .ok_or_else(|| Error::InvalidInput(format!("node {y} is not a fixed node")))?;
            for (i, &a) in self.free.iter().enumerate() {
                p[(a, c)] = self.poisson[(i, k)];
            }
            p[(y, c)] = 1.0;
        }
        Ok(p)
    }

    /// Harmonic extension of Dirichlet data read from `eta` at the fixed
    /// nodes. The result equals `eta` on fixed nodes and is zero on nodes
    /// outside the operator.
    pub fn background(&self, eta: &[f64]) -> Vec<f64> {
        let eb = DVector::from_iterator(self.fixed.len(), self.fixed.iter().map(|&y| eta[y]));
        let inner = &self.poisson * eb;
        let mut out = vec![0.0; self.node_count];
        for (i, &a) in self.free.iter().enumerate() {
            out[a] = inner[i];
        }
        for &y in &self.fixed {
            out[y] = eta[y];
        }
        out
    }

    /// `S₀[φ^η] = ½ ηᵀ D η` over the fixed nodes.
    pub fn boundary_energy(&self, eta: &[f64]) -> f64 {
        let eb = DVector::from_iterator(self.fixed.len(), self.fixed.iter().map(|&y| eta[y]));
        0.5 * eb.dot(&(&self.dtn * &eb))
    }

    fn fixed_indices(&self, nodes: &[usize]) -> Result<Vec<usize>> {
        nodes
            .iter()
            .map(|&v| {
                self.fixed_slot
                    .get(v)
                    .copied()
                    .flatten()
                    .ok_or_else(|| Error::InvalidInput(format!("node {v} is not a fixed node")))
            })
            .collect()
    }

    /// Block `D_AB` of the DtN operator, by mesh node ids.
    pub fn dtn_block(&self, rows: &[usize], cols: &[usize]) -> Result<DMatrix<f64>> {
        let (ri, ci) = (self.fixed_indices(rows)?, self.fixed_indices(cols)?);
        Ok(DMatrix::from_fn(ri.len(), ci.len(), |i, j| self.dtn[(ri[i], ci[j])]))
    }

    /// `-η_aᵀ D_AB η_b` for disjoint boundary subsets `a` and `b`.
    pub fn cross_form(&self, a: &[usize], eta_a: &[f64], b: &[usize], eta_b: &[f64]) -> Result<f64> {
        if a.iter().any(|v| b.contains(v)) {
            return Err(Error::OverlappingSubsets);
        }
        if eta_a.len() != a.len() || eta_b.len() != b.len() {
            return Err(Error::DimensionMismatch("boundary data length differs from subset".into()));
        }
        let d = self.dtn_block(a, b)?;
        // Summed in a canonical pair order so that swapping the arguments
        // reproduces the value bit for bit.
        let mut terms: Vec<((usize, usize), f64)> = Vec::with_capacity(a.len() * b.len());
        for (i, &p) in a.iter().enumerate() {
            for (j, &q) in b.iter().enumerate() {
                terms.push(((p.min(q), p.max(q)), (eta_a[i] * eta_b[j]) * d[(i, j)]));
            }
        }
        terms.sort_by_key(|t| t.0);
        Ok(-terms.iter().map(|t| t.1).sum::<f64>())
    }
}

/// Region over which the quadratic form is summed.
#[derive(Debug, Clone, Copy)]
pub enum Domain<'a> {
    Whole,
    Side(&'a Cut, Side),
}

/// `S₀[φ]` by direct edge and node sums.
///
/// On a side domain interface-interface edges and interface mass terms carry
/// weight one half, so the two sides add up to the whole-mesh form.
pub fn quadratic_form_s0(mesh: &Mesh, spec: &OperatorSpec, domain: Domain<'_>, field: &[f64]) -> f64 {
    let mut kinetic = 0.0;
    for e in mesh.edges() {
        let f = match domain {
            Domain::Whole => {
                if mesh.is_energy_edge(e) {
                    1.0
                } else {
                    0.0
                }
            }
            Domain::Side(cut, side) => cut.edge_share(mesh, e, side),
        };
        if f != 0.0 {
            let d = field[e.a] - field[e.b];
            kinetic += f * e.weight * d * d;
        }
    }
    let mut mass = 0.0;
    for v in 0..mesh.node_count() {
        let f = match domain {
            Domain::Whole => {
                if mesh.is_boundary(v) {
                    0.0
                } else {
                    1.0
                }
            }
            Domain::Side(cut, side) => cut.mass_share(v, side),
        };
        if f != 0.0 {
            mass += f * mesh.volume(v) * field[v] * field[v];
        }
    }
    0.5 * kinetic + 0.5 * spec.mass_squared * mass
}

/// Whole-mesh and side Green's data for a cut.
#[derive(Debug, Clone)]
pub struct SplitGreen {
    cut: Cut,
    whole: GreenBundle,
    sides: [GreenBundle; 2],
    interface_green: DMatrix<f64>,
    interface_green_block: DMatrix<f64>,
}

fn slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl SplitGreen {
    pub fn new(mesh: &Mesh, spec: &OperatorSpec, cut: &Cut) -> Result<Self> {
        let whole = GreenBundle::new(&OperatorMatrix::assemble(mesh, spec)?)?;
        let left = GreenBundle::new(&OperatorMatrix::assemble_side(mesh, spec, cut, Side::Left)?)?;
        let right = GreenBundle::new(&OperatorMatrix::assemble_side(mesh, spec, cut, Side::Right)?)?;
        let sigma = cut.interface();
        let sum = left.dtn_block(sigma, sigma)? + right.dtn_block(sigma, sigma)?;
        let interface_green = symmetrize(
            Cholesky::new(sum)
                .ok_or(Error::NonPositiveSpectrum { smallest: f64::NAN })?
                .inverse(),
        );
        let g = whole.green_full();
        let interface_green_block =
            DMatrix::from_fn(sigma.len(), sigma.len(), |i, j| g[(sigma[i], sigma[j])]);
        Ok(SplitGreen {
            cut: cut.clone(),
            whole,
            sides: [left, right],
            interface_green,
            interface_green_block,
        })
    }

    pub fn cut(&self) -> &Cut {
        &self.cut
    }

    pub fn whole(&self) -> &GreenBundle {
        &self.whole
    }

    pub fn side(&self, side: Side) -> &GreenBundle {
        &self.sides[slot(side)]
    }

    /// `G_ΣΣ = (D_l + D_r)⁻¹` restricted to the interface.
    pub fn interface_green(&self) -> &DMatrix<f64> {
        &self.interface_green
    }

    /// `G_ΣΣ` read off the whole-mesh Green's function.
    pub fn interface_green_block(&self) -> &DMatrix<f64> {
        &self.interface_green_block
    }

    /// Interface block `D_i(Σ)` of a side's DtN operator.
    /// DtN block onto `target` for the whole mesh (`None`) or a side.
    ///
    /// Targets must be fixed nodes of the chosen operator: `Σ` and `Y_i` on
    /// a side, any boundary subset on the whole mesh.
    pub fn dtn(&self, side: Option<Side>, target: &[usize]) -> Result<DMatrix<f64>> {
        match side {
            None => self.whole.dtn_block(target, target),
            Some(s) => self.side(s).dtn_block(target, target),
        }
    }

    pub fn interface_dtn(&self, side: Side) -> DMatrix<f64> {
        let s = self.cut.interface();
        self.side(side).dtn_block(s, s).expect("interface nodes are fixed on each side")
    }

    /// Side Poisson kernel towards the interface, on all mesh nodes.
    pub fn interface_poisson(&self, side: Side) -> DMatrix<f64> {
        self.side(side)
            .poisson_full(self.cut.interface())
            .expect("interface nodes are fixed on each side")
    }

    /// Linear coefficient `b` of the interface field in `S_{l,Σ} + S_{r,Σ}`:
    /// `b = -Σ_i D_i^{ΣY} η_{Y_i}`.
    pub fn interface_linear_term(&self, eta: &[f64]) -> DVector<f64> {
        let s = self.cut.interface();
        let mut b = DVector::zeros(s.len());
        for side in Side::BOTH {
            let y = self.cut.boundary(side);
            if y.is_empty() {
                continue;
            }
            let d = self.side(side).dtn_block(s, y).expect("side boundary is fixed");
            let ey = DVector::from_iterator(y.len(), y.iter().map(|&v| eta[v]));
            b -= d * ey;
        }
        b
    }
}

/// `(D_l(Σ) + D_r(Σ)) G_ΣΣ = I` with `G_ΣΣ` read off the whole inverse, and
/// agreement of the two routes to `G_ΣΣ`.
pub fn verify_dtn_sum(split: &SplitGreen, mesh_id: &str) -> Vec<VerificationRecord> {
    let sum = split.interface_dtn(Side::Left) + split.interface_dtn(Side::Right);
    let product = sum * split.interface_green_block();
    let eye = DMatrix::<f64>::identity(product.nrows(), product.ncols());
    vec![
        VerificationRecord::new(
            "dtn-sum",
            mesh_id,
            max_abs_diff(product.iter(), eye.iter()),
            IDENTITY_TOLERANCE,
        ),
        VerificationRecord::new(
            "interface-green-routes",
            mesh_id,
            max_abs_diff(split.interface_green().iter(), split.interface_green_block().iter()),
            IDENTITY_TOLERANCE,
        ),
    ]
}

/// `D(Y_i, M) - D(Y_i, M_i)` on `y`, from two bundles that both fix `y`.
pub fn dtn_difference(whole: &GreenBundle, side: &GreenBundle, y: &[usize]) -> Result<DMatrix<f64>> {
    Ok(whole.dtn_block(y, y)? - side.dtn_block(y, y)?)
}

/// Largest entry of the DtN difference along a refinement sequence, and
/// whether it stays bounded: the finest level may not exceed `growth` times
/// the coarsest.
pub fn verify_dtn_difference(
    levels: &[(&str, &SplitGreen)],
    side: Side,
    growth: f64,
) -> Result<Vec<VerificationRecord>> {
    let mut out = Vec::new();
    let mut norms = Vec::new();
    for (id, split) in levels {
        let d = dtn_difference(split.whole(), split.side(side), split.cut().boundary(side))?;
        let norm = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        out.push(VerificationRecord::new(
            format!("dtn-difference-{}", side.name()),
            *id,
            norm,
            f64::INFINITY,
        ));
        norms.push(norm);
    }
    if let (Some(first), Some(last)) = (norms.first(), norms.last()) {
        let id = levels.last().map(|l| l.0).unwrap_or("");
        out.push(VerificationRecord::check(
            "dtn-difference-bounded",
            id,
            *last <= growth * first.max(f64::MIN_POSITIVE),
        ));
    }
    Ok(out)
}

/// Green's gluing on every pair of side nodes:
/// `G(p, q) = δ_ij G_i(p, q) + (P_i G_ΣΣ P_jᵀ)(p, q)`.
pub fn verify_green_gluing(split: &SplitGreen, mesh_id: &str) -> Vec<VerificationRecord> {
    let g = split.whole().green_full();
    let gs = split.interface_green();
    let p = [split.interface_poisson(Side::Left), split.interface_poisson(Side::Right)];
    let gi = [split.side(Side::Left).green_full(), split.side(Side::Right).green_full()];
    let nodes = [split.cut().side_nodes(Side::Left), split.cut().side_nodes(Side::Right)];
    let mut same: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let pgp = &p[i] * gs * p[j].transpose();
            for &a in &nodes[i] {
                for &b in &nodes[j] {
                    let mut rhs = pgp[(a, b)];
                    if i == j {
                        rhs += gi[i][(a, b)];
                    }
                    let d = (g[(a, b)] - rhs).abs();
                    let acc = if i == j { &mut same } else { &mut cross };
                    *acc = if d.is_nan() { f64::NAN } else { acc.max(d) };
                }
            }
        }
    }
    vec![
        VerificationRecord::new("green-gluing-same-side", mesh_id, same, IDENTITY_TOLERANCE),
        VerificationRecord::new("green-gluing-cross-side", mesh_id, cross, IDENTITY_TOLERANCE),
    ]
}

/// Randomized checks of the quadratic-form identities.
///
/// * `S₀[ψ + φ^η] = S₀[ψ] + S₀[φ^{η_l}] + S₀[φ^{η_r}] - S_{l,r}(η_l, η_r)`,
/// * `S₀[φ; M] = S₀[φ; M_l] + S₀[φ; M_r]` for arbitrary fields,
/// * `S₀[φ^η] = ½ ηᵀ D η` (edge sums against the Schur complement),
/// * `S₀[φ^η + ψ] = S₀[φ^η] + S₀[ψ]` for `ψ` vanishing on the boundary,
/// * edge sums against the assembled side matrices.
pub fn verify_quadratic_decomposition(
    mesh: &Mesh,
    spec: &OperatorSpec,
    cut: &Cut,
    trials: usize,
    seed: u64,
) -> Result<Vec<VerificationRecord>> {
    let whole_op = OperatorMatrix::assemble(mesh, spec)?;
    let whole = GreenBundle::new(&whole_op)?;
    let sides = [
        OperatorMatrix::assemble_side(mesh, spec, cut, Side::Left)?,
        OperatorMatrix::assemble_side(mesh, spec, cut, Side::Right)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.node_count();
    let boundary = mesh.boundary_nodes();
    let mut split_res: f64 = 0.0;
    let mut dtn_res: f64 = 0.0;
    let mut dirichlet_res: f64 = 0.0;
    let mut matrix_res: f64 = 0.0;
    let mut interface_res: f64 = 0.0;
    let (yl, yr) = (cut.boundary(Side::Left), cut.boundary(Side::Right));
    for _ in 0..trials {
        let phi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = quadratic_form_s0(mesh, spec, Domain::Whole, &phi);
        let parts: Vec<f64> = Side::BOTH
            .iter()
            .map(|&side| quadratic_form_s0(mesh, spec, Domain::Side(cut, side), &phi))
            .collect();
        split_res = split_res.max(scaled_diff(s, parts[0] + parts[1]));
        for (k, op) in sides.iter().enumerate() {
            matrix_res = matrix_res.max(scaled_diff(op.energy(&phi), parts[k]));
        }
        matrix_res = matrix_res.max(scaled_diff(whole_op.energy(&phi), s));

        let bg = whole.background(&phi);
        let eta = DVector::from_iterator(boundary.len(), boundary.iter().map(|&y| phi[y]));
        let schur = 0.5 * eta.dot(&(whole.dtn_block(&boundary, &boundary)? * &eta));
        let s_bg = quadratic_form_s0(mesh, spec, Domain::Whole, &bg);
        dtn_res = dtn_res.max(scaled_diff(s_bg, schur));

        let mut psi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for &y in &boundary {
            psi[y] = 0.0;
        }
        let sum: Vec<f64> = bg.iter().zip(&psi).map(|(a, b)| a + b).collect();
        let lhs = quadratic_form_s0(mesh, spec, Domain::Whole, &sum);
        let rhs = s_bg + quadratic_form_s0(mesh, spec, Domain::Whole, &psi);
        dirichlet_res = dirichlet_res.max(scaled_diff(lhs, rhs));

        let mut eta_l = vec![0.0; n];
        let mut eta_r = vec![0.0; n];
        for &y in yl {
            eta_l[y] = phi[y];
        }
        for &y in yr {
            eta_r[y] = phi[y];
        }
        let s_l = quadratic_form_s0(mesh, spec, Domain::Whole, &whole.background(&eta_l));
        let s_r = quadratic_form_s0(mesh, spec, Domain::Whole, &whole.background(&eta_r));
        let s_psi = quadratic_form_s0(mesh, spec, Domain::Whole, &psi);
        let cross = if yl.is_empty() || yr.is_empty() {
            0.0
        } else {
            let el: Vec<f64> = yl.iter().map(|&y| phi[y]).collect();
            let er: Vec<f64> = yr.iter().map(|&y| phi[y]).collect();
            whole.cross_form(yl, &el, yr, &er)?
        };
        let defect = lhs - s_psi - s_l - s_r + cross;
        interface_res = interface_res.max(defect.abs() / 1f64.max(lhs.abs()));
    }
    let id = mesh.label();
    Ok(vec![
        VerificationRecord::new("quadratic-interface-split", id, interface_res, DECOMPOSITION_TOLERANCE),
        VerificationRecord::new("quadratic-split", id, split_res, DECOMPOSITION_TOLERANCE),
        VerificationRecord::new("quadratic-dtn", id, dtn_res, DECOMPOSITION_TOLERANCE),
        VerificationRecord::new("quadratic-dirichlet-shift", id, dirichlet_res, DECOMPOSITION_TOLERANCE),
        VerificationRecord::new("quadratic-matrix-vs-edges", id, matrix_res, DECOMPOSITION_TOLERANCE),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_interval_mesh, cut_along_interface};
    use approx::assert_abs_diff_eq;

    fn path5() -> (Mesh, Cut) {
        let m = build_interval_mesh(3, 1.0, |_| 1.0).unwrap();
        let c = cut_along_interface(&m, |v, _| v == 2).unwrap();
        (m, c)
    }

    #[test]
    fn path_green_is_exact() {
        let (m, _) = path5();
        let b = GreenBundle::new(&OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[3.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 3.0]) / 4.0;
        assert_abs_diff_eq!(b.green(), &expected, epsilon = 1e-15);
    }

    #[test]
    fn path_background_and_energy() {
        let (m, _) = path5();
        let spec = OperatorSpec::massless();
        let b = GreenBundle::new(&OperatorMatrix::assemble(&m, &spec).unwrap()).unwrap();
        let phi = b.background(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        for (x, e) in phi.iter().zip([1.0, 0.75, 0.5, 0.25, 0.0]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(quadratic_form_s0(&m, &spec, Domain::Whole, &phi), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(b.boundary_energy(&[1.0, 0.0, 0.0, 0.0, 0.0]), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn path_cross_form() {
        let (m, _) = path5();
        let b = GreenBundle::new(&OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap()).unwrap();
        assert_abs_diff_eq!(b.cross_form(&[0], &[1.0], &[4], &[1.0]).unwrap(), 0.25, epsilon = 1e-15);
        assert!(matches!(
            b.cross_form(&[0], &[1.0], &[0], &[1.0]),
            Err(Error::OverlappingSubsets)
        ));
    }

    #[test]
    fn path_interface_dtn() {
        let (m, c) = path5();
        let s = SplitGreen::new(&m, &OperatorSpec::massless(), &c).unwrap();
        assert_abs_diff_eq!(s.interface_dtn(Side::Left)[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.interface_dtn(Side::Right)[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.interface_green()[(0, 0)], 1.0, epsilon = 1e-15);
        let g = s.whole().green_full();
        let p = s.interface_poisson(Side::Left);
        let q = s.interface_poisson(Side::Right);
        assert_abs_diff_eq!(g[(1, 3)], p[(1, 0)] * q[(3, 0)], epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 3)], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 1)], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn path_identities_hold() {
        let (m, c) = path5();
        let spec = OperatorSpec::with_mass_squared(0.1);
        let s = SplitGreen::new(&m, &spec, &c).unwrap();
        for r in verify_dtn_sum(&s, "p5").into_iter().chain(verify_green_gluing(&s, "p5")) {
            assert!(r.passed, "{r:?}");
        }
        for r in verify_quadratic_decomposition(&m, &spec, &c, 20, 1).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn green_inverts_operator() {
        let m = crate::mesh::build_grid_mesh(5, 6, 0.8, |x| 1.0 + 0.3 * x[0]).unwrap();
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::with_mass_squared(0.2)).unwrap();
        let b = GreenBundle::new(&op).unwrap();
        let prod = op.interior_matrix() * b.green();
        let eye = DMatrix::<f64>::identity(prod.nrows(), prod.ncols());
        assert!(max_abs_diff(prod.iter(), eye.iter()) <= 1e-12);
    }

    #[test]
    fn constant_data_extends_to_constant() {
        let m = crate::mesh::build_grid_mesh(6, 5, 1.0, |x| 1.0 + 0.2 * x[1]).unwrap();
        let b = GreenBundle::new(&OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap()).unwrap();
        for v in b.background(&vec![1.0; m.node_count()]) {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn empty_side_dtn_is_diagonal_share() {
        let m = build_interval_mesh(1, 1.0, |_| 1.0).unwrap();
        let cut = Cut::from_parts(&m, vec![1], vec![], vec![], vec![0], vec![2]).unwrap();
        let spec = OperatorSpec::with_mass_squared(0.6);
        let s = SplitGreen::new(&m, &spec, &cut).unwrap();
        assert_abs_diff_eq!(s.interface_dtn(Side::Left)[(0, 0)], 1.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.dtn(Some(Side::Right), &[1]).unwrap()[(0, 0)], 1.3, epsilon = 1e-15);
    }

    #[test]
    fn dtn_difference_path_refinement() {
        let mut splits = Vec::new();
        for (n, h) in [(3, 1.0), (7, 0.5), (15, 0.25)] {
            let m = build_interval_mesh(n, h, |_| 1.0).unwrap();
            let mid = (n + 1) / 2;
            let c = cut_along_interface(&m, |v, _| v == mid).unwrap();
            splits.push(SplitGreen::new(&m, &OperatorSpec::massless(), &c).unwrap());
        }
        let levels: Vec<(&str, &SplitGreen)> = splits.iter().map(|s| ("path", s)).collect();
        let recs = verify_dtn_difference(&levels, Side::Left, 2.0).unwrap();
        for r in &recs[..3] {
            assert_abs_diff_eq!(r.max_residual, 0.25, epsilon = 1e-12);
        }
        assert!(recs[3].passed);
        let whole = splits[0].whole();
        let d = dtn_difference(whole, whole, &[0]).unwrap();
        assert_eq!(d[(0, 0)], 0.0);
    }

    #[test]
    fn cross_form_is_symmetric() {
        let m = crate::mesh::build_grid_mesh(5, 5, 1.0, |x| 1.0 + 0.1 * x[0] * x[1]).unwrap();
        let c = cut_along_interface(&m, |_, x| x[0] == 2.0).unwrap();
        let b = GreenBundle::new(&OperatorMatrix::assemble(&m, &OperatorSpec::with_mass_squared(0.3)).unwrap()).unwrap();
        let (yl, yr) = (c.boundary(Side::Left), c.boundary(Side::Right));
        let el: Vec<f64> = (0..yl.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let er: Vec<f64> = (0..yr.len()).map(|i| (i as f64 * 0.91).cos()).collect();
        let a = b.cross_form(yl, &el, yr, &er).unwrap();
        let z = b.cross_form(yr, &er, yl, &el).unwrap();
        assert_eq!(a, z);
        assert_eq!(b.cross_form(yl, &el, yr, &vec![0.0; yr.len()]).unwrap(), 0.0);
    }

    #[test]
    fn maximum_principle_on_path() {
        let m = build_interval_mesh(6, 0.5, |x| 1.0 + x[0]).unwrap();
        let b = GreenBundle::new(&OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap()).unwrap();
        for v in b.poisson().iter() {
            assert!(*v >= 0.0);
        }
        for i in 0..b.poisson().nrows() {
            assert_abs_diff_eq!(b.poisson().row(i).sum(), 1.0, epsilon = 1e-13);
        }
    }
}
