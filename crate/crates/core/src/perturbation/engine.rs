//! Gaussian expectation of the exponentiated interaction, order by order.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::interaction::InteractionSpec;
use super::series::{series_exp, series_log, PerturbationSeries};
use super::wick::{wick_pairings, ContractionPattern, DEFAULT_LEG_CAP};
use crate::averaging::KernelMatrix;
use crate::error::{Error, Result};
use crate::green::GreenBundle;
use crate::mesh::Mesh;

/// Truncation and leg cap of a perturbative computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationOptions {
    /// Highest order computed, in half-units of `√ħ`.
    pub max_half_order: usize,
    pub leg_cap: usize,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        PerturbationOptions {
            max_half_order: 4,
            leg_cap: DEFAULT_LEG_CAP,
        }
    }
}

/// The field seen by the vertices: `X(s) = mean(s) + ξ(s)` at each vertex
/// site, with `ξ` centred Gaussian of covariance `covariance`, plus the
/// order-zero term of the effective action.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    pub prefactor: f64,
    /// Mesh node of each site.
    pub sites: Vec<usize>,
    pub volumes: Vec<f64>,
    /// Weight multiplying each site's vertices; 1 for a sharp region.
    pub site_weights: Vec<f64>,
    pub mean: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianModel {
    pub fn new(
        prefactor: f64,
        sites: Vec<usize>,
        volumes: Vec<f64>,
        mean: Vec<f64>,
        covariance: DMatrix<f64>,
    ) -> Result<Self> {
        let n = sites.len();
        if volumes.len() != n || mean.len() != n || covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} sites with {} volumes, {} means and a {}x{} covariance",
                volumes.len(),
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        Ok(GaussianModel {
            prefactor,
            sites,
            volumes,
            site_weights: vec![1.0; n],
            mean,
            covariance,
        })
    }

    /// Regularized theory on `region`: mean `H φ^η`, covariance `H G Hᵀ`,
    /// prefactor `S₀[φ^η]`. Without a kernel the bare `φ^η` and `G` are used.
    pub fn regularized(
        mesh: &Mesh,
        bundle: &GreenBundle,
        kernel: Option<&KernelMatrix>,
        region: &[usize],
        eta: &[f64],
    ) -> Result<Self> {
        let n = mesh.node_count();
        if eta.len() != n {
            return Err(Error::DimensionMismatch(format!("boundary data has {} entries, mesh has {n} nodes", eta.len())));
        }
        let phi = DVector::from_vec(bundle.background(eta));
        let g = bundle.green_full();
        let (field, cov) = match kernel {
            Some(k) => {
                if k.node_count() != n {
                    return Err(Error::DimensionMismatch("kernel size differs from the mesh".into()));
                }
                (&k.matrix * &phi, &k.matrix * &g * k.matrix.transpose())
            }
            None => (phi, g),
        };
        GaussianModel::new(
            bundle.boundary_energy(eta),
            region.to_vec(),
            region.iter().map(|&p| mesh.volume(p)).collect(),
            region.iter().map(|&p| field[p]).collect(),
            DMatrix::from_fn(region.len(), region.len(), |i, j| cov[(region[i], region[j])]),
        )
    }

    pub fn with_site_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.sites.len() {
            return Err(Error::DimensionMismatch("one weight per site is required".into()));
        }
        self.site_weights = weights;
        Ok(self)
    }

    /// Coefficients of `E[exp(-S_int)]` with the pattern count per order.
    pub fn interaction_moments(
        &self,
        interaction: &InteractionSpec,
        opts: PerturbationOptions,
    ) -> Result<(Vec<f64>, Vec<usize>)> {
        interaction.validate()?;
        let powers = interaction.active_powers();
        let site_coupling = |k: usize| -> Vec<f64> {
            self.sites
                .iter()
                .enumerate()
                .map(|(s, &p)| interaction.coupling(k, p) * self.volumes[s] * self.site_weights[s])
                .collect()
        };
        let couplings: Vec<(usize, Vec<f64>)> = powers.iter().map(|&k| (k, site_coupling(k))).collect();
        let mut coeffs = vec![0.0; opts.max_half_order + 1];
        let mut counts = vec![0usize; opts.max_half_order + 1];
        coeffs[0] = 1.0;
        counts[0] = 1;
        for h in 1..=opts.max_half_order {
            for multiset in vertex_multisets(&powers, h) {
                let expanded: Vec<usize> = multiset.iter().flat_map(|&(k, n)| std::iter::repeat(k).take(n)).collect();
                let patterns = wick_pairings(&expanded, opts.leg_cap)?;
                let mut prefactor = Ratio::from_integer(if expanded.len() % 2 == 0 { 1i128 } else { -1 });
                for &(_, n) in &multiset {
                    prefactor /= (1..=n as i128).product::<i128>();
                }
                let vertex_couplings: Vec<&[f64]> = expanded
                    .iter()
                    .map(|k| couplings.iter().find(|(p, _)| p == k).expect("power is active").1.as_slice())
                    .collect();
                let values: Vec<f64> = patterns
                    .par_iter()
                    .map(|pat| {
                        let factor = (prefactor * pat.multiplicity).to_f64().expect("multiplicity fits in f64");
                        factor * self.pattern_sum(pat, &vertex_couplings)
                    })
                    .collect();
                coeffs[h] += values.iter().sum::<f64>();
                counts[h] += patterns.len();
            }
        }
        Ok((coeffs, counts))
    }

    /// `Σ_{sites} Π_v c_v(s_v) X-moments` for one pattern, factorized over
    /// the connected components of its link graph.
    fn pattern_sum(&self, pat: &ContractionPattern, couplings: &[&[f64]]) -> f64 {
        let m = pat.powers.len();
        let ns = self.sites.len();
        let local: Vec<Vec<f64>> = (0..m)
            .map(|v| {
                (0..ns)
                    .map(|s| {
                        couplings[v][s]
                            * self.mean[s].powi(pat.unpaired[v] as i32)
                            * self.covariance[(s, s)].powi(pat.loops[v] as i32)
                    })
                    .collect()
            })
            .collect();
        let mut total = 1.0;
        for comp in link_components(m, &pat.links) {
            let links: Vec<(usize, usize, i32)> = pat
                .links
                .iter()
                .filter(|l| comp.contains(&l.0))
                .map(|&(v, w, n)| {
                    let (a, b) = (comp.iter().position(|&x| x == v).unwrap(), comp.iter().position(|&x| x == w).unwrap());
                    (a, b, n as i32)
                })
                .collect();
            let factors: Vec<&[f64]> = comp.iter().map(|&v| local[v].as_slice()).collect();
            total *= self.component_sum(&factors, &links);
            if total == 0.0 {
                break;
            }
        }
        total
    }

    fn component_sum(&self, factors: &[&[f64]], links: &[(usize, usize, i32)]) -> f64 {
        let ns = self.sites.len();
        if factors.len() == 1 {
            return factors[0].iter().sum();
        }
        let partial: Vec<f64> = (0..ns)
            .into_par_iter()
            .map(|s0| {
                let mut assignment = vec![s0; factors.len()];
                self.nested(factors, links, 1, factors[0][s0], &mut assignment)
            })
            .collect();
        partial.iter().sum()
    }

    fn nested(
        &self,
        factors: &[&[f64]],
        links: &[(usize, usize, i32)],
        depth: usize,
        acc: f64,
        assignment: &mut Vec<usize>,
    ) -> f64 {
        if acc == 0.0 {
            return 0.0;
        }
        if depth == factors.len() {
            return acc;
        }
        let mut sum = 0.0;
        for s in 0..self.sites.len() {
            assignment[depth] = s;
            let mut term = acc * factors[depth][s];
            for &(a, b, n) in links {
                if a.max(b) == depth {
                    term *= self.covariance[(assignment[a], assignment[b])].powi(n);
                }
            }
            sum += self.nested(factors, links, depth + 1, term, assignment);
        }
        sum
    }
}

/// Vertex-count assignments `(power, count)` with `Σ count (power - 2) = h`.
fn vertex_multisets(powers: &[usize], h: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(powers: &[usize], h: usize, current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        match powers.split_first() {
            None => {
                if h == 0 {
                    out.push(current.clone());
                }
            }
            Some((&k, rest)) => {
                let step = k - 2;
                for n in 0..=h / step {
                    if n > 0 {
                        current.push((k, n));
                    }
                    go(rest, h - n * step, current, out);
                    if n > 0 {
                        current.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(powers, h, &mut Vec::new(), &mut out);
    out
}

fn link_components(m: usize, links: &[(usize, usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(v, w, _) in links {
        let (a, b) = (find(&mut parent, v), find(&mut parent, w));
        parent[a.max(b)] = a.min(b);
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for v in 0..m {
        let r = find(&mut parent, v);
        match comps.iter_mut().find(|c| c[0] == r) {
            Some(c) => c.push(v),
            None => comps.push(vec![v]),
        }
    }
    comps
}

/// `W = S₀ - log E[exp(-S_int)]`, order by order.
pub fn effective_action(
    model: &GaussianModel,
    interaction: &InteractionSpec,
    opts: PerturbationOptions,
) -> Result<PerturbationSeries> {
    let (moments, counts) = model.interaction_moments(interaction, opts)?;
    let mut w: Vec<f64> = series_log(&moments)?.into_iter().map(|c| -c).collect();
    w[0] += model.prefactor;
    Ok(PerturbationSeries::new(w, counts))
}

/// `Z = exp(-W)` as a formal series.
pub fn partition(
    model: &GaussianModel,
    interaction: &InteractionSpec,
    opts: PerturbationOptions,
) -> Result<PerturbationSeries> {
    let w = effective_action(model, interaction, opts)?;
    let neg: Vec<f64> = w.coefficients.iter().map(|c| -c).collect();
    Ok(PerturbationSeries::new(series_exp(&neg), w.term_counts))
}

fn default_region(mesh: &Mesh, kernel: Option<&KernelMatrix>) -> Result<Vec<usize>> {
    match kernel {
        Some(k) => mesh.trim_to_deformed(k.lambda),
        None => Ok(mesh.interior_nodes()),
    }
}

/// Regularized effective action on `M_Λ`; without a kernel, the bare theory
/// on all interior nodes.
pub fn effective_action_series(
    mesh: &Mesh,
    bundle: &GreenBundle,
    kernel: Option<&KernelMatrix>,
    interaction: &InteractionSpec,
    eta: &[f64],
    opts: PerturbationOptions,
) -> Result<PerturbationSeries> {
    let region = default_region(mesh, kernel)?;
    effective_action(&GaussianModel::regularized(mesh, bundle, kernel, &region, eta)?, interaction, opts)
}

/// Regularized partition function; see [`effective_action_series`].
pub fn partition_series(
    mesh: &Mesh,
    bundle: &GreenBundle,
    kernel: Option<&KernelMatrix>,
    interaction: &InteractionSpec,
    eta: &[f64],
    opts: PerturbationOptions,
) -> Result<PerturbationSeries> {
    let region = default_region(mesh, kernel)?;
    partition(&GaussianModel::regularized(mesh, bundle, kernel, &region, eta)?, interaction, opts)
}
