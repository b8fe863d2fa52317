//! Verification suites run by the CLI.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use quasiloc_core::averaging::{
    build_mesh_kernel, compose_kernels, extract_profile_f, radial_green, regularized_green, sphere_average,
    spectral_regularized_green, verify_deformed_gluing, DeformedSplit, RadialProfile,
};
use quasiloc_core::gluing::{lambda_sweep, renormalization_commutes, verify_gluing_theorem, GluingContext, GluingScenario};
use quasiloc_core::green::{verify_dtn_sum, verify_green_gluing, verify_quadratic_decomposition, SplitGreen};
use quasiloc_core::mesh::lambda_one;
use quasiloc_core::perturbation::{
    count_by_pairs, series_exp, series_log, wick_pairings, InteractionSpec, PerturbationOptions, DEFAULT_LEG_CAP,
};
use quasiloc_core::{Cut, Mesh, OperatorMatrix, VerificationRecord};

use crate::config::{EtaSpec, ScenarioConfig};

pub struct SuiteInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub const SUITES: [SuiteInfo; 7] = [
    SuiteInfo {
        name: "green-identities",
        description: "DtN sum identity, Green's gluing relations and quadratic-form decompositions",
    },
    SuiteInfo {
        name: "euclidean-averaging",
        description: "sphere averages of the fundamental solution, profile f(1) = 0, kernel composition",
    },
    SuiteInfo {
        name: "regularization",
        description: "mesh kernels, finiteness of regularized Green's functions, spectral cross-check, saturation",
    },
    SuiteInfo {
        name: "deformed-gluing",
        description: "representation of the regularized Green's function on the deformed halves",
    },
    SuiteInfo {
        name: "gluing-theorem",
        description: "glued versus whole regularized effective action, region widening, coupling redefinitions",
    },
    SuiteInfo {
        name: "lambda-sweep",
        description: "coefficients and gluing residuals across a grid of cutoffs",
    },
    SuiteInfo {
        name: "wick-combinatorics",
        description: "pairing counts against double factorials, formal log/exp round trip",
    },
];

pub fn is_suite(name: &str) -> bool {
    SUITES.iter().any(|s| s.name == name)
}

/// A validated scenario, ready to run.
pub struct Prepared {
    pub config: ScenarioConfig,
    pub mesh: Mesh,
    pub cut: Cut,
    pub lambda_one: f64,
    pub split: SplitGreen,
    pub interaction: InteractionSpec,
    pub eta: Vec<f64>,
    pub options: PerturbationOptions,
    pub seed: u64,
}

pub fn eta_values(spec: &EtaSpec, mesh: &Mesh) -> anyhow::Result<Vec<f64>> {
    let n = mesh.node_count();
    let mut eta = vec![0.0; n];
    match spec {
        EtaSpec::Zero => {}
        EtaSpec::Nodes { values } => {
            for &(v, x) in values {
                if v >= n || !mesh.is_boundary(v) {
                    anyhow::bail!("η given at node {v}, which is not a boundary node");
                }
                eta[v] = x;
            }
        }
        EtaSpec::Affine { offset, gradient } => {
            if gradient.len() != mesh.dim() {
                anyhow::bail!("η gradient has {} entries, mesh dimension is {}", gradient.len(), mesh.dim());
            }
            for v in mesh.boundary_nodes() {
                eta[v] = offset + gradient.iter().zip(mesh.position(v)).map(|(g, x)| g * x).sum::<f64>();
            }
        }
    }
    Ok(eta)
}

impl Prepared {
    pub fn new(config: ScenarioConfig, max_half_order: usize, seed: u64) -> anyhow::Result<Self> {
        let mesh = config.mesh.build()?.with_label(config.label.clone());
        let cut = config.cut.apply(&mesh)?;
        let lambda_one = lambda_one(&mesh, &cut)?;
        if config.lambdas.is_empty() {
            anyhow::bail!("`lambdas` must list at least one cutoff");
        }
        for &lambda in config.lambdas.iter().chain(config.sweep.iter().flatten()) {
            quasiloc_core::averaging::check_lambda_one(&mesh, &cut, lambda)?;
        }
        let split = SplitGreen::new(&mesh, &config.operator, &cut)?;
        let interaction = config.interaction_spec()?;
        for (power, c) in &interaction.couplings {
            if let quasiloc_core::perturbation::Coupling::PerNode(values) = c {
                if let Some((v, _)) = values.iter().find(|(v, _)| *v >= mesh.node_count()) {
                    anyhow::bail!("coupling of power {power} given at node {v}, outside the mesh");
                }
            }
        }
        let eta = eta_values(&config.eta, &mesh)?;
        let e = &config.euclidean;
        e.spec().validate()?;
        if e.lambdas.is_empty() || e.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            anyhow::bail!("euclidean cutoffs must be positive");
        }
        if config.trials == 0 {
            anyhow::bail!("`trials` must be positive");
        }
        let options = PerturbationOptions { max_half_order, leg_cap: DEFAULT_LEG_CAP };
        Ok(Prepared { config, mesh, cut, lambda_one, split, interaction, eta, options, seed })
    }

    fn scenario(&self, lambda: f64) -> GluingScenario {
        GluingScenario {
            label: self.mesh_id(lambda),
            mesh: self.mesh.clone(),
            cut: self.cut.clone(),
            operator: self.config.operator,
            interaction: self.interaction.clone(),
            kernel: self.config.kernel.clone(),
            lambda,
            eta: self.eta.clone(),
            options: self.options,
        }
    }

    fn mesh_id(&self, lambda: f64) -> String {
        format!("{}/Λ={lambda}", self.config.label)
    }
}

/// One row of `series.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub lambda: f64,
    pub half_order: usize,
    pub order: String,
    pub whole: f64,
    pub glued: f64,
    pub residual: f64,
    pub terms: usize,
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCsvRow {
    pub lambda: f64,
    pub region_size: usize,
    pub glued_region_size: usize,
    pub saturated: bool,
    pub max_residual: f64,
    pub min_green_diagonal: f64,
    pub max_green_diagonal: f64,
    pub matches_bare: String,
}

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub records: Vec<VerificationRecord>,
    pub series: Vec<SeriesRow>,
    pub sweep: Vec<SweepCsvRow>,
}

pub fn run_suite(name: &str, p: &Prepared) -> anyhow::Result<SuiteOutput> {
    match name {
        "green-identities" => green_identities(p),
        "euclidean-averaging" => euclidean_averaging(p),
        "regularization" => regularization(p),
        "deformed-gluing" => deformed_gluing(p),
        "gluing-theorem" => gluing_theorem(p),
        "lambda-sweep" => sweep(p),
        "wick-combinatorics" => wick(p),
        other => anyhow::bail!("unknown suite {other:?}"),
    }
}

fn records(records: Vec<VerificationRecord>) -> SuiteOutput {
    SuiteOutput { records, ..Default::default() }
}

fn green_identities(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let id = p.config.label.as_str();
    let mut out = verify_dtn_sum(&p.split, id);
    out.extend(verify_green_gluing(&p.split, id));
    out.extend(verify_quadratic_decomposition(&p.mesh, &p.config.operator, &p.cut, p.config.trials, p.seed)?);
    Ok(records(out))
}

fn euclidean_averaging(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let e = &p.config.euclidean;
    let spec = e.spec();
    let opts = e.quadrature();
    let mut out = Vec::new();
    let spec_id = format!("n={},α={:?}", e.dim, e.alphas);
    for &lambda in &e.lambdas {
        let id = format!("{spec_id}/Λ={lambda}");
        // A single shell reproduces Newton's theorem: G outside, G(radius) inside.
        if spec.alphas.len() == 1 && spec.radial_profiles[0] == RadialProfile::Shell {
            let radius = spec.alphas[0] / lambda;
            let mut worst: f64 = 0.0;
            for s in [0.0, 0.3, 0.7, 1.5, 3.0] {
                let r = s * radius;
                let mut x = vec![0.0; e.dim];
                x[0] = r;
                let got = sphere_average(e.dim, &x, lambda, &spec, opts)?;
                let want = radial_green(e.dim, r.max(radius));
                worst = worst.max((got - want).abs());
            }
            out.push(VerificationRecord::new("newton-shell", id.clone(), worst, 1e-8));
        }
        let f = extract_profile_f(e.dim, lambda, &spec, &[0.0, 0.25, 0.5, 0.75, 1.0], opts)?;
        out.push(VerificationRecord::new("profile-f-at-one", id.clone(), f.f[4].abs(), 2.0 * opts.tolerance));
        out.push(VerificationRecord::check("profile-f-finite", id, f.f.iter().all(|v| v.is_finite())));
    }
    if spec.alphas.len() > 1 {
        let c = compose_kernels(&spec, opts)?;
        let norm = c.normalization(opts)?;
        out.push(VerificationRecord::new("composition-normalization", spec_id.clone(), (norm - 1.0).abs(), 1e-8));
        let total: f64 = spec.alphas.iter().sum();
        let beyond = [1.001, 1.1, 2.0].iter().all(|s| c.law.pdf(total * s).map_or(true, |d| d == 0.0));
        out.push(VerificationRecord::check(
            "composition-support",
            spec_id,
            c.support_radius <= total * (1.0 + 1e-12) && beyond,
        ));
    }
    Ok(records(out))
}

fn regularization(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let op = OperatorMatrix::assemble(&p.mesh, &p.config.operator)?;
    let g = p.split.whole().green_full();
    let saturation = 1.0 / p.mesh.min_edge_length();
    let mut out = Vec::new();
    for &lambda in &p.config.lambdas {
        let id = p.mesh_id(lambda);
        let k = build_mesh_kernel(&p.mesh, lambda, &p.config.kernel, Some(&p.cut))?;
        out.push(VerificationRecord::new("kernel-row-sums", id.clone(), k.row_sum_defect(), 1e-12));
        out.push(VerificationRecord::check(
            "kernel-support",
            id.clone(),
            quasiloc_core::mesh::within(k.max_support_distance(&p.mesh), 1.0 / lambda),
        ));
        let gl = regularized_green(&k, &k, &g)?;
        out.push(VerificationRecord::check("regularized-green-finite", id.clone(), gl.iter().all(|v| v.is_finite())));
        let sp = spectral_regularized_green(&op, &k, &k)?;
        let d = quasiloc_core::report::max_abs_diff(gl.iter(), sp.iter());
        out.push(VerificationRecord::new("spectral-vs-product", id.clone(), d, 1e-12));
        if lambda > saturation {
            out.push(VerificationRecord::check("saturated-kernel", id.clone(), k.is_identity()));
            out.push(VerificationRecord::check("saturated-green", id, gl == g));
        }
    }
    Ok(records(out))
}

fn deformed_gluing(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let mut out = Vec::new();
    for &lambda in &p.config.lambdas {
        let id = p.mesh_id(lambda);
        let k = build_mesh_kernel(&p.mesh, lambda, &p.config.kernel, Some(&p.cut))?;
        let deformed = DeformedSplit::new(&p.mesh, &p.cut, &k)?;
        out.push(VerificationRecord::check("restricted-rows-agree", id.clone(), deformed.rows_agree()));
        out.extend(verify_deformed_gluing(&p.split, &deformed, &id)?);
    }
    Ok(records(out))
}

fn gluing_theorem(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    for &lambda in &p.config.lambdas {
        let scenario = p.scenario(lambda);
        let report = verify_gluing_theorem(&GluingContext::new(&scenario)?)?;
        for (h, r) in report.whole.records().into_iter().enumerate() {
            out.series.push(SeriesRow {
                lambda,
                half_order: r.half_order,
                order: r.order,
                whole: r.coefficient,
                glued: report.glued.coefficients[h],
                residual: report.residuals[h],
                terms: r.terms,
            });
        }
        out.records.extend(report.records);
        for redefinition in &p.config.redefinitions {
            out.records.extend(renormalization_commutes(&scenario, redefinition)?);
        }
    }
    Ok(out)
}

fn sweep(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let lambdas = p.config.sweep.as_ref().unwrap_or(&p.config.lambdas);
    let rows = lambda_sweep(&p.scenario(lambdas[0]), lambdas)?;
    let mut out = SuiteOutput::default();
    for row in rows {
        let id = p.mesh_id(row.lambda);
        out.records.push(VerificationRecord::new("sweep-gluing", id.clone(), row.max_residual, 1e-10));
        if let Some(m) = row.matches_bare {
            out.records.push(VerificationRecord::check("sweep-saturation", id, m));
        }
        let (lo, hi) = row
            .green_diagonal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        out.sweep.push(SweepCsvRow {
            lambda: row.lambda,
            region_size: row.region_size,
            glued_region_size: row.glued_region_size,
            saturated: row.saturated,
            max_residual: row.max_residual,
            min_green_diagonal: lo,
            max_green_diagonal: hi,
            matches_bare: row.matches_bare.map_or_else(String::new, |m| m.to_string()),
        });
    }
    Ok(out)
}

fn wick(p: &Prepared) -> anyhow::Result<SuiteOutput> {
    let mut out = Vec::new();
    for two_m in [2usize, 4, 6, 8] {
        let double_factorial: i128 = (1..two_m as i128).step_by(2).product();
        let spread = count_by_pairs(&wick_pairings(&vec![1; two_m], DEFAULT_LEG_CAP)?)[two_m / 2];
        let single = count_by_pairs(&wick_pairings(&[two_m], DEFAULT_LEG_CAP)?)[two_m / 2];
        out.push(VerificationRecord::check(
            format!("wick-pairings-{two_m}"),
            "combinatorics",
            *spread.numer() == double_factorial && spread.is_integer() && spread == single,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..p.config.trials {
        let len = rng.random_range(1..8);
        let f: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
        for (a, b) in f.iter().zip(&series_log(&series_exp(&f))?) {
            worst = worst.max((a - b).abs() / (1.0 + a.abs()));
        }
    }
    out.push(VerificationRecord::new("log-exp-round-trip", "combinatorics", worst, 1e-12));
    Ok(records(out))
}
