//! Gluing of regularized partition functions along an interface.
//!
//! The glued object integrates the interface values `η_Σ` against the
//! Gaussian weight built from the two side Dirichlet-to-Neumann operators.
//! Every vertex leg at `p ∈ M_{i,Λ}` sees the field
//! `H_i(ψ_i + φ_i^{η_i} + P_i η_Σ)`, with `ψ_l`, `ψ_r` and `η_Σ` independent.
//! Pairings between legs therefore use the propagator
//! `δ_ij H_i G_i H_iᵀ + (H_i P_i) G_ΣΣ (H_j P_j)ᵀ`, and unpaired legs see the
//! shifted background `H_i(φ_i^{η_i} + P_i G_ΣΣ b)` where `b` is the linear
//! term of the interface forms.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::averaging::{
    build_mesh_kernel, regularized_green, verify_deformed_gluing, DeformedSplit, KernelMatrix, KernelProfile,
};
use crate::error::{Error, Result};
use crate::green::{SplitGreen, IDENTITY_TOLERANCE};
use crate::mesh::{Cut, Mesh, Side};
use crate::operator::OperatorSpec;
use crate::perturbation::{
    effective_action, effective_action_series, GaussianModel, InteractionSpec, PerturbationOptions,
    series_exp, PerturbationSeries, Redefinition,
};
use crate::report::{max_abs_diff, scaled_diff, VerificationRecord};

/// Everything needed to glue two regularized theories.
#[derive(Debug, Clone)]
pub struct GluingScenario {
    pub label: String,
    pub mesh: Mesh,
    pub cut: Cut,
    pub operator: OperatorSpec,
    pub interaction: InteractionSpec,
    pub kernel: KernelProfile,
    pub lambda: f64,
    /// Dirichlet data on all nodes; only boundary entries are read.
    pub eta: Vec<f64>,
    pub options: PerturbationOptions,
}

/// Precomputed Green's data and kernels of a scenario.
#[derive(Debug, Clone)]
pub struct GluingContext {
    scenario: GluingScenario,
    split: SplitGreen,
    kernel: KernelMatrix,
    deformed: DeformedSplit,
    region: Vec<usize>,
    eta: Vec<f64>,
}

impl GluingContext {
    pub fn new(scenario: &GluingScenario) -> Result<Self> {
        let mesh = &scenario.mesh;
        if scenario.eta.len() != mesh.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "boundary data has {} entries, mesh has {} nodes",
                scenario.eta.len(),
                mesh.node_count()
            )));
        }
        let kernel = build_mesh_kernel(mesh, scenario.lambda, &scenario.kernel, Some(&scenario.cut))?;
        let deformed = DeformedSplit::new(mesh, &scenario.cut, &kernel)?;
        let split = SplitGreen::new(mesh, &scenario.operator, &scenario.cut)?;
        let mut region: Vec<usize> = Side::BOTH.iter().flat_map(|&s| deformed.region(s).to_vec()).collect();
        region.sort_unstable();
        let eta = (0..mesh.node_count())
            .map(|v| if mesh.is_boundary(v) { scenario.eta[v] } else { 0.0 })
            .collect();
        Ok(GluingContext {
            scenario: scenario.clone(),
            split,
            kernel,
            deformed,
            region,
            eta,
        })
    }

    pub fn scenario(&self) -> &GluingScenario {
        &self.scenario
    }

    pub fn split(&self) -> &SplitGreen {
        &self.split
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn deformed(&self) -> &DeformedSplit {
        &self.deformed
    }

    /// `M_{l,Λ} ∪ M_{r,Λ}`, sorted.
    pub fn region(&self) -> &[usize] {
        &self.region
    }

    /// `M_Λ`: interior nodes at least `1/Λ` from the boundary.
    pub fn full_region(&self) -> Result<Vec<usize>> {
        self.scenario.mesh.trim_to_deformed(self.scenario.lambda)
    }

    fn side_of(&self, p: usize) -> Side {
        if self.deformed.region(Side::Left).binary_search(&p).is_ok() {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Whole-mesh model on `sites`.
    pub fn whole_model(&self, sites: &[usize]) -> Result<GaussianModel> {
        GaussianModel::regularized(&self.scenario.mesh, self.split.whole(), Some(&self.kernel), sites, &self.eta)
    }

    /// `G_ΣΣ b`: the interface mean of the glued Gaussian.
    fn interface_mean(&self) -> DVector<f64> {
        self.split.interface_green() * self.split.interface_linear_term(&self.eta)
    }

    /// Vertex fields assembled from the sides: `H_i(φ_i^{η_i} + P_i G_ΣΣ b)`
    /// on every node of side `i`.
    fn side_means(&self) -> [DVector<f64>; 2] {
        let x = self.interface_mean();
        Side::BOTH.map(|s| {
            let phi = DVector::from_vec(self.split.side(s).background(&self.eta));
            &self.deformed.side(s).matrix * (phi + self.split.interface_poisson(s) * &x)
        })
    }

    /// The glued model on `M_{l,Λ} ∪ M_{r,Λ}`.
    pub fn glued_model(&self) -> Result<GaussianModel> {
        let sides = Side::BOTH;
        let hp: Vec<DMatrix<f64>> =
            sides.iter().map(|&s| &self.deformed.side(s).matrix * self.split.interface_poisson(s)).collect();
        let gi: Vec<DMatrix<f64>> = sides
            .iter()
            .map(|&s| {
                let h = self.deformed.side(s);
                regularized_green(h, h, &self.split.side(s).green_full())
            })
            .collect::<Result<_>>()?;
        let gs = self.split.interface_green();
        let means = self.side_means();
        let idx = |s: Side| if s == Side::Left { 0 } else { 1 };
        let n = self.region.len();
        let mut cov = DMatrix::zeros(n, n);
        for (a, &p) in self.region.iter().enumerate() {
            let i = idx(self.side_of(p));
            for (b, &q) in self.region.iter().enumerate() {
                let j = idx(self.side_of(q));
                let mut c = (hp[i].row(p) * gs * hp[j].row(q).transpose())[(0, 0)];
                if i == j {
                    c += gi[i][(p, q)];
                }
                cov[(a, b)] = c;
            }
        }
        let mean = self.region.iter().map(|&p| means[idx(self.side_of(p))][p]).collect();
        let b = self.split.interface_linear_term(&self.eta);
        let prefactor = self.split.side(Side::Left).boundary_energy(&self.eta)
            + self.split.side(Side::Right).boundary_energy(&self.eta)
            - 0.5 * b.dot(&(gs * &b));
        GaussianModel::new(
            prefactor,
            self.region.clone(),
            self.region.iter().map(|&p| self.scenario.mesh.volume(p)).collect(),
            mean,
            cov,
        )
    }
}

/// Effective action of the glued object.
pub fn glued_series(ctx: &GluingContext) -> Result<PerturbationSeries> {
    effective_action(&ctx.glued_model()?, &ctx.scenario.interaction, ctx.scenario.options)
}

/// Effective action of the whole mesh with vertices on `M_{l,Λ} ∪ M_{r,Λ}`.
pub fn whole_series(ctx: &GluingContext) -> Result<PerturbationSeries> {
    effective_action(&ctx.whole_model(ctx.region())?, &ctx.scenario.interaction, ctx.scenario.options)
}

/// Results of a gluing check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    pub whole: PerturbationSeries,
    pub glued: PerturbationSeries,
    /// Scaled residual per half-order.
    pub residuals: Vec<f64>,
    pub records: Vec<VerificationRecord>,
}

impl GluingReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }
}

fn order_residuals(a: &PerturbationSeries, b: &PerturbationSeries) -> Vec<f64> {
    a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| scaled_diff(*x, *y)).collect()
}

/// Number of parameter steps per slab node in the widening sweep.
const WIDENING_STEPS: [usize; 2] = [8, 16];

/// Glued versus whole coefficients order by order, plus the interface,
/// shift, swap and widening checks.
pub fn verify_gluing_theorem(ctx: &GluingContext) -> Result<GluingReport> {
    let id = ctx.scenario.label.as_str();
    let mut records = Vec::new();
    let routes = max_abs_diff(
        ctx.split.interface_green().iter(),
        ctx.split.interface_green_block().iter(),
    );
    records.push(VerificationRecord::new("interface-green-routes", id, routes, IDENTITY_TOLERANCE));
    records.extend(verify_deformed_gluing(&ctx.split, &ctx.deformed, id)?);

    let whole = whole_series(ctx)?;
    let glued = glued_series(ctx)?;
    let residuals = order_residuals(&whole, &glued);
    for (h, r) in residuals.iter().enumerate() {
        records.push(VerificationRecord::new(format!("gluing-order-{h}"), id, *r, IDENTITY_TOLERANCE));
    }
    // The same comparison for Z = exp(-W).
    let z = |s: &PerturbationSeries| series_exp(&s.coefficients.iter().map(|c| -c).collect::<Vec<_>>());
    for (h, (a, b)) in z(&whole).iter().zip(&z(&glued)).enumerate() {
        records.push(VerificationRecord::new(
            format!("gluing-partition-order-{h}"),
            id,
            scaled_diff(*a, *b),
            IDENTITY_TOLERANCE,
        ));
    }

    records.extend(shift_identity(ctx, &whole)?);
    records.push(swap_symmetry(ctx, &glued)?);
    records.extend(widening_sweep(ctx, &whole)?);

    Ok(GluingReport {
        whole,
        glued,
        residuals,
        records,
    })
}

/// Legs evaluated at `H(φ^{η_l} + φ^{η_r})` against legs evaluated at the
/// side backgrounds shifted through the interface.
fn shift_identity(ctx: &GluingContext, whole: &PerturbationSeries) -> Result<Vec<VerificationRecord>> {
    let id = ctx.scenario.label.as_str();
    let model = ctx.whole_model(ctx.region())?;
    let means = ctx.side_means();
    let shifted: Vec<f64> = ctx
        .region
        .iter()
        .map(|&p| means[if ctx.side_of(p) == Side::Left { 0 } else { 1 }][p])
        .collect();
    let mean_residual = max_abs_diff(model.mean.iter(), shifted.iter());
    let mut alt = model.clone();
    alt.mean = shifted;
    let series = effective_action(&alt, &ctx.scenario.interaction, ctx.scenario.options)?;
    let series_residual = order_residuals(whole, &series).into_iter().fold(0.0, f64::max);
    Ok(vec![
        VerificationRecord::new("shift-identity-background", id, mean_residual, IDENTITY_TOLERANCE),
        VerificationRecord::new("shift-identity-series", id, series_residual, IDENTITY_TOLERANCE),
    ])
}

fn swap_symmetry(ctx: &GluingContext, glued: &PerturbationSeries) -> Result<VerificationRecord> {
    let mut swapped = ctx.scenario.clone();
    swapped.cut = ctx.scenario.cut.swapped();
    let other = glued_series(&GluingContext::new(&swapped)?)?;
    let r = order_residuals(glued, &other).into_iter().fold(0.0, f64::max);
    Ok(VerificationRecord::new("swap-symmetry", ctx.scenario.label.as_str(), r, IDENTITY_TOLERANCE))
}

/// Slab nodes `M_Λ \ (M_{l,Λ} ∪ M_{r,Λ})`, farthest from the interface first.
fn slab(ctx: &GluingContext) -> Result<Vec<usize>> {
    let mesh = &ctx.scenario.mesh;
    let d = mesh.distances_to_set(ctx.scenario.cut.interface(), None);
    let mut nodes: Vec<usize> = ctx.full_region()?.into_iter().filter(|p| ctx.region.binary_search(p).is_err()).collect();
    nodes.sort_by(|a, b| d[*b].total_cmp(&d[*a]).then(a.cmp(b)));
    Ok(nodes)
}

/// Series for the vertex region `M_Λ` with slab node `j` weighted by
/// `clamp(s - j, 0, 1)`.
fn widened_series(
    ctx: &GluingContext,
    full: &[usize],
    slab: &[usize],
    s: f64,
) -> Result<PerturbationSeries> {
    let weights = full
        .iter()
        .map(|p| match slab.iter().position(|q| q == p) {
            Some(j) => (s - j as f64).clamp(0.0, 1.0),
            None => 1.0,
        })
        .collect();
    let model = ctx.whole_model(full)?.with_site_weights(weights)?;
    effective_action(&model, &ctx.scenario.interaction, ctx.scenario.options)
}

/// Widening the vertex region from `M_{l,Λ} ∪ M_{r,Λ}` to `M_Λ` through a
/// monotone family of weighted regions.
fn widening_sweep(ctx: &GluingContext, whole: &PerturbationSeries) -> Result<Vec<VerificationRecord>> {
    let id = ctx.scenario.label.as_str();
    let full = ctx.full_region()?;
    let slab = slab(ctx)?;
    let target = effective_action(&ctx.whole_model(&full)?, &ctx.scenario.interaction, ctx.scenario.options)?;
    let start = widened_series(ctx, &full, &slab, 0.0)?;
    let end = widened_series(ctx, &full, &slab, slab.len() as f64)?;
    let mut jumps = Vec::new();
    for steps in WIDENING_STEPS {
        let n = steps * slab.len();
        let mut prev = start.clone();
        let mut jump: f64 = 0.0;
        for k in 1..=n {
            let next = widened_series(ctx, &full, &slab, k as f64 / steps as f64)?;
            jump = jump.max(order_residuals(&prev, &next).into_iter().fold(0.0, f64::max));
            prev = next;
        }
        jumps.push(jump);
    }
    let start_residual = order_residuals(whole, &start).into_iter().fold(0.0, f64::max);
    let end_residual = order_residuals(&target, &end).into_iter().fold(0.0, f64::max);
    // Coefficients are polynomial in the weights, so halving the step must
    // roughly halve the largest jump.
    let continuous = jumps[1] <= 0.75 * jumps[0] + 1e-12;
    Ok(vec![
        VerificationRecord::new("widening-start", id, start_residual, IDENTITY_TOLERANCE),
        VerificationRecord::new("widening-final", id, end_residual, IDENTITY_TOLERANCE),
        VerificationRecord::new("widening-continuity", id, if continuous { 0.0 } else { jumps[1] }, 0.0),
    ])
}

/// Gluing residuals after redefining the couplings. For the identity
/// redefinition the report must reproduce the original one exactly.
pub fn renormalization_commutes(
    scenario: &GluingScenario,
    redefinition: &Redefinition,
) -> Result<Vec<VerificationRecord>> {
    let id = scenario.label.as_str();
    let base = verify_gluing_core(scenario)?;
    let mut redefined = scenario.clone();
    redefined.interaction = redefinition.apply(&scenario.interaction, scenario.lambda, scenario.mesh.node_count());
    let after = verify_gluing_core(&redefined)?;
    let mut records: Vec<VerificationRecord> = after
        .iter()
        .enumerate()
        .map(|(h, r)| VerificationRecord::new(format!("renormalized-gluing-order-{h}"), id, *r, IDENTITY_TOLERANCE))
        .collect();
    if *redefinition == Redefinition::Identity {
        records.push(VerificationRecord::check("renormalization-identity", id, base == after));
    }
    Ok(records)
}

fn verify_gluing_core(scenario: &GluingScenario) -> Result<Vec<f64>> {
    let ctx = GluingContext::new(scenario)?;
    Ok(order_residuals(&whole_series(&ctx)?, &glued_series(&ctx)?))
}

/// One cutoff of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    /// `M_Λ`.
    pub region: Vec<usize>,
    /// `|M_Λ|`.
    pub region_size: usize,
    /// `|M_{l,Λ} ∪ M_{r,Λ}|`.
    pub glued_region_size: usize,
    /// Whether the kernel is exactly the identity.
    pub saturated: bool,
    pub whole: Vec<f64>,
    pub glued: Vec<f64>,
    pub max_residual: f64,
    /// `G^Λ(p, p)` for every interior node.
    pub green_diagonal: Vec<f64>,
    /// For saturated kernels: whether the `M_Λ` series equals the bare one
    /// bit for bit.
    pub matches_bare: Option<bool>,
}

/// Coefficients and gluing residuals across cutoffs.
pub fn lambda_sweep(scenario: &GluingScenario, lambdas: &[f64]) -> Result<Vec<SweepRow>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let mut s = scenario.clone();
            s.lambda = lambda;
            let ctx = GluingContext::new(&s)?;
            let whole = whole_series(&ctx)?;
            let glued = glued_series(&ctx)?;
            let residual = order_residuals(&whole, &glued).into_iter().fold(0.0, f64::max);
            let g = regularized_green(ctx.kernel(), ctx.kernel(), &ctx.split.whole().green_full())?;
            let saturated = ctx.kernel().is_identity();
            let matches_bare = if saturated {
                let reg = effective_action_series(&s.mesh, ctx.split.whole(), Some(ctx.kernel()), &s.interaction, &ctx.eta, s.options)?;
                let bare = effective_action_series(&s.mesh, ctx.split.whole(), None, &s.interaction, &ctx.eta, s.options)?;
                Some(reg == bare)
            } else {
                None
            };
            let region = ctx.full_region()?;
            Ok(SweepRow {
                lambda,
                region_size: region.len(),
                region,
                glued_region_size: ctx.region().len(),
                saturated,
                whole: whole.coefficients,
                glued: glued.coefficients,
                max_residual: residual,
                green_diagonal: s.mesh.interior_nodes().iter().map(|&p| g[(p, p)]).collect(),
                matches_bare,
            })
        })
        .collect()
}
