//! Averaging kernels on meshes and the regularized Green's function.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{SplitGreen, IDENTITY_TOLERANCE};
use crate::mesh::{lambda_one, trim_side, within, Cut, Mesh, Side};
use crate::operator::OperatorMatrix;
use crate::report::VerificationRecord;

/// Radial weight of a mesh kernel, as a function of `d(p, q) Λ / α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelProfile {
    /// Constant weight on the closed ball.
    Uniform,
    /// `(1 - r²)^power`.
    Bump { power: u32 },
    /// `1 - r`.
    Cone,
    /// Product of the kernels of `parts`, each on a ball of radius `α / Λ`.
    Composed { parts: Vec<KernelPart> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPart {
    pub profile: KernelProfile,
    pub alpha: f64,
}

impl KernelProfile {
    fn weight(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        match self {
            KernelProfile::Uniform => 1.0,
            KernelProfile::Bump { power } => (1.0 - r * r).powi(*power as i32),
            KernelProfile::Cone => 1.0 - r,
            KernelProfile::Composed { .. } => unreachable!("composed kernels are built as products"),
        }
    }

    fn validate(&self) -> Result<()> {
        if let KernelProfile::Composed { parts } = self {
            if parts.is_empty() {
                return Err(Error::InvalidInput("composed kernel needs at least one part".into()));
            }
            if parts.iter().any(|p| !(p.alpha > 0.0 && p.alpha <= 1.0)) {
                return Err(Error::InvalidInput("kernel scales must lie in (0, 1]".into()));
            }
            let total: f64 = parts.iter().map(|p| p.alpha).sum();
            if total > 1.0 + 1e-12 {
                return Err(Error::InvalidInput(format!("kernel scales sum to {total} > 1")));
            }
            for p in parts {
                p.profile.validate()?;
            }
        }
        Ok(())
    }

    /// Short name used in reports.
    pub fn name(&self) -> String {
        match self {
            KernelProfile::Uniform => "uniform".into(),
            KernelProfile::Bump { power } => format!("bump{power}"),
            KernelProfile::Cone => "cone".into(),
            KernelProfile::Composed { parts } => {
                let names: Vec<String> = parts.iter().map(|p| format!("{}@{}", p.profile.name(), p.alpha)).collect();
                format!("composed[{}]", names.join(","))
            }
        }
    }
}

/// Row-stochastic averaging matrix `H` with rows supported in geodesic
/// balls of radius `1/Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub matrix: DMatrix<f64>,
    pub lambda: f64,
    pub support_radius: f64,
    /// Rows that carry a kernel; after restriction to a submesh, rows of
    /// nodes outside it are zero and marked `false`.
    pub rows_defined: Vec<bool>,
}

impl KernelMatrix {
    /// Identity kernel on `n` nodes.
    pub fn identity(n: usize, lambda: f64) -> Self {
        KernelMatrix {
            matrix: DMatrix::identity(n, n),
            lambda,
            support_radius: 1.0 / lambda,
            rows_defined: vec![true; n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.matrix.nrows()
    }

    /// Whether the matrix is exactly the identity.
    pub fn is_identity(&self) -> bool {
        let n = self.node_count();
        (0..n).all(|i| (0..n).all(|j| self.matrix[(i, j)] == if i == j { 1.0 } else { 0.0 }))
    }

    /// Largest `|Σ_q H(p, q) - 1|` over defined rows.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.node_count())
            .filter(|&p| self.rows_defined[p])
            .map(|p| (self.matrix.row(p).sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest geodesic distance between a node and a column carrying
    /// weight in its row.
    pub fn max_support_distance(&self, mesh: &Mesh) -> f64 {
        (0..self.node_count())
            .into_par_iter()
            .map(|p| {
                let d = mesh.distances_from(p, None);
                (0..self.node_count())
                    .filter(|&q| self.matrix[(p, q)] != 0.0)
                    .map(|q| d[q])
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `(H f)(p)` on all nodes.
    pub fn apply(&self, field: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(field);
        (&self.matrix * v).iter().copied().collect()
    }
}

fn single_kernel(mesh: &Mesh, radius: f64, profile: &KernelProfile) -> DMatrix<f64> {
    let n = mesh.node_count();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let d = mesh.distances_from(p, None);
            let mut row = vec![0.0; n];
            for q in 0..n {
                if within(d[q], radius) {
                    row[q] = profile.weight(d[q] / radius) * mesh.volume(q);
                }
            }
            let total: f64 = row.iter().sum();
            if total > 0.0 && total.is_finite() {
                for w in &mut row {
                    *w /= total;
                }
            } else {
                row.iter_mut().for_each(|w| *w = 0.0);
                row[p] = 1.0;
            }
            row
        })
        .collect();
    DMatrix::from_fn(n, n, |p, q| rows[p][q])
}

fn kernel_matrix(mesh: &Mesh, radius: f64, profile: &KernelProfile) -> DMatrix<f64> {
    match profile {
        KernelProfile::Composed { parts } => parts
            .iter()
            .map(|part| kernel_matrix(mesh, radius * part.alpha, &part.profile))
            .reduce(|a, b| a * b)
            .expect("composed kernel has parts"),
        _ => single_kernel(mesh, radius, profile),
    }
}

/// Averaging kernel `H_ω^Λ` on `mesh`: `H(p, q) ∝ ω(d(p, q) Λ) vol(q)` on the
/// closed geodesic ball of radius `1/Λ`, rows normalized. A row whose ball
/// carries no weight falls back to the identity row.
///
/// With a cut present, `Λ` must exceed `Λ₁`.
pub fn build_mesh_kernel(
    mesh: &Mesh,
    lambda: f64,
    profile: &KernelProfile,
    cut: Option<&Cut>,
) -> Result<KernelMatrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("Λ must be positive, got {lambda}")));
    }
    profile.validate()?;
    if let Some(cut) = cut {
        check_lambda_one(mesh, cut, lambda)?;
    }
    let radius = 1.0 / lambda;
    Ok(KernelMatrix {
        matrix: kernel_matrix(mesh, radius, profile),
        lambda,
        support_radius: radius,
        rows_defined: vec![true; mesh.node_count()],
    })
}

/// Fails unless `Λ > Λ₁`.
pub fn check_lambda_one(mesh: &Mesh, cut: &Cut, lambda: f64) -> Result<()> {
    let l1 = lambda_one(mesh, cut)?;
    if lambda > l1 {
        Ok(())
    } else {
        Err(Error::LambdaBelowLambdaOne { lambda, lambda_one: l1 })
    }
}

/// Kernel of a submesh: rows of `nodes` keep only columns in `nodes` and are
/// renormalized; rows that lose no weight are copied unchanged. Rows of
/// other nodes are zero.
pub fn restrict_kernel_to_submesh(kernel: &KernelMatrix, nodes: &[usize]) -> Result<KernelMatrix> {
    let n = kernel.node_count();
    let mut mask = vec![false; n];
    for &v in nodes {
        if v >= n {
            return Err(Error::InvalidInput(format!("node {v} is not in the mesh")));
        }
        mask[v] = true;
    }
    let mut matrix = DMatrix::zeros(n, n);
    for &p in nodes {
        let row = kernel.matrix.row(p);
        let lost = (0..n).any(|q| !mask[q] && row[q] != 0.0);
        if !lost {
            matrix.row_mut(p).copy_from(&row);
            continue;
        }
        let kept: f64 = (0..n).filter(|&q| mask[q]).map(|q| row[q]).sum();
        if kept <= 0.0 {
            return Err(Error::ZeroRowMass { node: p });
        }
        for q in (0..n).filter(|&q| mask[q]) {
            matrix[(p, q)] = row[q] / kept;
        }
    }
    Ok(KernelMatrix {
        matrix,
        lambda: kernel.lambda,
        support_radius: kernel.support_radius,
        rows_defined: mask,
    })
}

/// `G^Λ = H_a G H_bᵀ`.
pub fn regularized_green(a: &KernelMatrix, b: &KernelMatrix, green: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = green.nrows();
    if green.ncols() != n || a.node_count() != n || b.node_count() != n {
        return Err(Error::DimensionMismatch(format!(
            "kernels of size {} and {} against a {}x{} Green's matrix",
            a.node_count(),
            b.node_count(),
            n,
            green.ncols()
        )));
    }
    Ok(&a.matrix * green * b.matrix.transpose())
}

/// `G^Λ` from the spectral sum `Σ_λ (H_a ψ_λ)(H_b ψ_λ)ᵀ / λ`.
pub fn spectral_regularized_green(op: &OperatorMatrix, a: &KernelMatrix, b: &KernelMatrix) -> Result<DMatrix<f64>> {
    let n = op.node_count();
    if a.node_count() != n || b.node_count() != n {
        return Err(Error::DimensionMismatch("kernel size differs from the mesh".into()));
    }
    let spectrum = op.spectrum()?;
    let free = op.free_nodes();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..spectrum.values.len() {
        let mut psi = nalgebra::DVector::zeros(n);
        for (i, &v) in free.iter().enumerate() {
            psi[v] = spectrum.vectors[(i, k)];
        }
        let (ha, hb) = (&a.matrix * &psi, &b.matrix * &psi);
        out += (ha * hb.transpose()) / spectrum.values[k];
    }
    Ok(out)
}

/// Whole and restricted side kernels together with the deformed side
/// regions `M_{i,Λ}`.
#[derive(Debug, Clone)]
pub struct DeformedSplit {
    whole: KernelMatrix,
    sides: [KernelMatrix; 2],
    regions: [Vec<usize>; 2],
}

fn slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl DeformedSplit {
    /// Restricts `kernel` to both side submeshes and checks that restricted
    /// rows agree with the whole kernel on the deformed regions.
    pub fn new(mesh: &Mesh, cut: &Cut, kernel: &KernelMatrix) -> Result<Self> {
        check_lambda_one(mesh, cut, kernel.lambda)?;
        let left = restrict_kernel_to_submesh(kernel, &cut.side_nodes(Side::Left))?;
        let right = restrict_kernel_to_submesh(kernel, &cut.side_nodes(Side::Right))?;
        let regions = [
            trim_side(mesh, cut, Side::Left, kernel.lambda)?,
            trim_side(mesh, cut, Side::Right, kernel.lambda)?,
        ];
        let split = DeformedSplit {
            whole: kernel.clone(),
            sides: [left, right],
            regions,
        };
        if !split.rows_agree() {
            return Err(Error::InvalidInput(
                "restricted kernels differ from the whole kernel on the deformed regions".into(),
            ));
        }
        Ok(split)
    }

    /// Whether every restricted row equals the whole row on `M_{i,Λ}`.
    pub fn rows_agree(&self) -> bool {
        Side::BOTH.iter().all(|&s| {
            self.regions[slot(s)]
                .iter()
                .all(|&p| self.sides[slot(s)].matrix.row(p) == self.whole.matrix.row(p))
        })
    }

    pub fn lambda(&self) -> f64 {
        self.whole.lambda
    }

    pub fn whole(&self) -> &KernelMatrix {
        &self.whole
    }

    pub fn side(&self, side: Side) -> &KernelMatrix {
        &self.sides[slot(side)]
    }

    /// `M_{i,Λ}`.
    pub fn region(&self, side: Side) -> &[usize] {
        &self.regions[slot(side)]
    }
}

/// Deformed Green's decomposition on `M_{i,Λ} × M_{j,Λ}`:
/// `H G Hᵀ = δ_ij H_i G_i H_iᵀ + (H_i P_i) G_ΣΣ (H_j P_j)ᵀ`.
pub fn verify_deformed_gluing(
    split: &SplitGreen,
    deformed: &DeformedSplit,
    mesh_id: &str,
) -> Result<Vec<VerificationRecord>> {
    let whole = split.whole().green_full();
    let g = regularized_green(deformed.whole(), deformed.whole(), &whole)?;
    let gs = split.interface_green();
    let hp: Vec<DMatrix<f64>> = Side::BOTH
        .iter()
        .map(|&s| &deformed.side(s).matrix * split.interface_poisson(s))
        .collect();
    let gi: Vec<DMatrix<f64>> = Side::BOTH
        .iter()
        .map(|&s| {
            let h = deformed.side(s);
            regularized_green(h, h, &split.side(s).green_full())
        })
        .collect::<Result<_>>()?;
    let mut same: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for (i, si) in Side::BOTH.iter().enumerate() {
        for (j, sj) in Side::BOTH.iter().enumerate() {
            let coupled = &hp[i] * gs * hp[j].transpose();
            for &p in deformed.region(*si) {
                for &q in deformed.region(*sj) {
                    let mut rhs = coupled[(p, q)];
                    if i == j {
                        rhs += gi[i][(p, q)];
                    }
                    let d = (g[(p, q)] - rhs).abs();
                    let acc = if i == j { &mut same } else { &mut cross };
                    *acc = if d.is_nan() { f64::NAN } else { acc.max(d) };
                }
            }
        }
    }
    Ok(vec![
        VerificationRecord::new("deformed-gluing-same-side", mesh_id, same, IDENTITY_TOLERANCE),
        VerificationRecord::new("deformed-gluing-cross-side", mesh_id, cross, IDENTITY_TOLERANCE),
        VerificationRecord::check("restricted-kernel-rows", mesh_id, deformed.rows_agree()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::GreenBundle;
    use crate::mesh::{build_grid_mesh, build_interval_mesh, cut_along_interface};
    use crate::operator::OperatorSpec;

    fn path(n_interior: usize) -> Mesh {
        build_interval_mesh(n_interior, 1.0, |_| 1.0).unwrap()
    }

    #[test]
    fn small_radius_gives_identity() {
        let m = build_grid_mesh(5, 5, 0.25, |_| 1.0).unwrap();
        let k = build_mesh_kernel(&m, 5.0, &KernelProfile::Uniform, None).unwrap();
        assert!(k.is_identity());
    }

    #[test]
    fn unit_path_uniform_rows() {
        let m = path(3);
        let k = build_mesh_kernel(&m, 1.0, &KernelProfile::Uniform, None).unwrap();
        let v = m.volumes();
        for p in 1..4 {
            let total = v[p - 1] + v[p] + v[p + 1];
            for q in 0..5 {
                let expect = if q + 1 >= p && q <= p + 1 { v[q] / total } else { 0.0 };
                assert!((k.matrix[(p, q)] - expect).abs() < 1e-15);
            }
        }
        assert!(k.row_sum_defect() < 1e-12);
        assert!(k.max_support_distance(&m) <= 1.0);
    }

    #[test]
    fn truncated_ball_at_boundary() {
        let m = path(3);
        let k = build_mesh_kernel(&m, 0.5, &KernelProfile::Cone, None).unwrap();
        assert!(k.row_sum_defect() < 1e-12);
        assert_eq!(k.matrix[(0, 3)], 0.0);
        assert!(k.matrix[(0, 1)] > 0.0);
    }

    #[test]
    fn lambda_one_enforced() {
        let m = path(3);
        let cut = cut_along_interface(&m, |v, _| v == 2).unwrap();
        let err = build_mesh_kernel(&m, 0.5, &KernelProfile::Uniform, Some(&cut)).unwrap_err();
        assert!(err.to_string().contains("Λ below Λ₁"));
        assert!(build_mesh_kernel(&m, 0.51, &KernelProfile::Uniform, Some(&cut)).is_ok());
    }

    #[test]
    fn restriction_rules() {
        let m = path(7);
        let cut = cut_along_interface(&m, |v, _| v == 4).unwrap();
        let k = build_mesh_kernel(&m, 1.0, &KernelProfile::Uniform, Some(&cut)).unwrap();
        let left = restrict_kernel_to_submesh(&k, &cut.side_nodes(Side::Left)).unwrap();
        assert_eq!(left.matrix.row(2), k.matrix.row(2));
        assert!((left.matrix.row(4).sum() - 1.0).abs() < 1e-15);
        assert_eq!(left.matrix[(4, 5)], 0.0);
        assert!(!left.rows_defined[6]);
        let all: Vec<usize> = (0..m.node_count()).collect();
        assert_eq!(restrict_kernel_to_submesh(&k, &all).unwrap(), k);
    }

    #[test]
    fn zero_row_mass_detected() {
        let mut k = KernelMatrix::identity(5, 1.0);
        k.matrix[(1, 1)] = 0.0;
        k.matrix[(1, 2)] = 1.0;
        assert!(matches!(restrict_kernel_to_submesh(&k, &[0, 1]), Err(Error::ZeroRowMass { node: 1 })));
    }

    #[test]
    fn spectral_oracle_on_path() {
        let m = path(3);
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        let g = GreenBundle::new(&op).unwrap().green_full();
        let k = build_mesh_kernel(&m, 1.0, &KernelProfile::Uniform, None).unwrap();
        let direct = regularized_green(&k, &k, &g).unwrap();
        let spectral = spectral_regularized_green(&op, &k, &k).unwrap();
        assert!((direct[(2, 2)] - spectral[(2, 2)]).abs() < 1e-12);
        assert!((&direct - direct.transpose()).amax() < 1e-15);
        let id = KernelMatrix::identity(5, 1.0);
        assert_eq!(regularized_green(&id, &id, &g).unwrap(), g);
    }

    #[test]
    fn far_pair_unchanged_on_flat_path() {
        let m = path(7);
        let op = OperatorMatrix::assemble(&m, &OperatorSpec::massless()).unwrap();
        let g = GreenBundle::new(&op).unwrap().green_full();
        let k = build_mesh_kernel(&m, 1.0, &KernelProfile::Uniform, None).unwrap();
        let gl = regularized_green(&k, &k, &g).unwrap();
        assert!((gl[(2, 6)] - g[(2, 6)]).abs() < 1e-14);
        assert!(gl[(4, 4)] < g[(4, 4)]);
    }

    #[test]
    fn deformed_gluing_on_path_and_grid() {
        let spec = OperatorSpec::with_mass_squared(0.1);
        let m = path(7);
        let cut = cut_along_interface(&m, |v, _| v == 4).unwrap();
        let split = SplitGreen::new(&m, &spec, &cut).unwrap();
        for profile in [KernelProfile::Uniform, KernelProfile::Bump { power: 2 }] {
            let k = build_mesh_kernel(&m, 1.0 / 1.5, &profile, Some(&cut)).unwrap();
            let d = DeformedSplit::new(&m, &cut, &k).unwrap();
            assert!(!d.region(Side::Left).is_empty());
            for r in verify_deformed_gluing(&split, &d, "path9").unwrap() {
                assert!(r.passed, "{r:?}");
            }
        }
        let g = {
            let rho = crate::mesh::ProfileSpec::striped(5);
            build_grid_mesh(5, 5, 1.0, move |x| rho.eval(x))
        }.unwrap();
        let cut = cut_along_interface(&g, |_, x| (x[0] - 2.0).abs() < 1e-9).unwrap();
        let split = SplitGreen::new(&g, &spec, &cut).unwrap();
        let k = build_mesh_kernel(&g, 1.2, &KernelProfile::Cone, Some(&cut)).unwrap();
        let d = DeformedSplit::new(&g, &cut, &k).unwrap();
        for r in verify_deformed_gluing(&split, &d, "grid5").unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn composed_kernel_is_product() {
        let m = path(7);
        let parts = vec![
            KernelPart { profile: KernelProfile::Uniform, alpha: 0.5 },
            KernelPart { profile: KernelProfile::Uniform, alpha: 0.5 },
        ];
        let k = build_mesh_kernel(&m, 0.5, &KernelProfile::Composed { parts }, None).unwrap();
        let single = build_mesh_kernel(&m, 1.0, &KernelProfile::Uniform, None).unwrap();
        assert!((&k.matrix - &single.matrix * &single.matrix).amax() < 1e-15);
        assert!(k.max_support_distance(&m) <= 2.0);
        assert!(k.row_sum_defect() < 1e-12);
    }

    #[test]
    fn profile_serde() {
        let p: KernelProfile = serde_json::from_str(r#"{"kind":"bump","power":3}"#).unwrap();
        assert_eq!(p, KernelProfile::Bump { power: 3 });
        assert!(serde_json::from_str::<KernelProfile>(r#"{"kind":"shell"}"#).is_err());
    }
}
