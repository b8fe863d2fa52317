//! Radial averaging of the Euclidean fundamental solution.
//!
//! Everything here works with radial functions. Averaging a radial `F` over
//! the sphere of radius `a` around a point at distance `ρ` from the origin is
//! a one-dimensional integral over the new radius `u ∈ [|ρ - a|, ρ + a]`
//! against the transition density
//! `f_n(u | ρ, a) = c_n (1 - μ²)^{(n-3)/2} u / (ρ a)`, with
//! `μ = (u² - ρ² - a²) / (2 ρ a)` and `c_n = S_{n-2} / S_{n-1}`. The same
//! density describes the length of a sum of two randomly oriented vectors,
//! which is how kernels are composed.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{breakpoints, checked, integrate_panels, integrate_panels_clustered, QuadratureOptions};

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Area `S_{n-1}` of the unit sphere in `R^n`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimension must be at least 2, got {dim}")))
    }
}

/// Fundamental solution of `-Δ` as a function of the radius.
pub fn radial_green(dim: usize, r: f64) -> f64 {
    if dim == 2 {
        -r.ln() / (2.0 * PI)
    } else {
        r.powi(2 - dim as i32) / ((dim as f64 - 2.0) * unit_sphere_area(dim))
    }
}

/// `G(x) = |x|^{2-n} / ((n-2) S_{n-1})`, or `-ln|x| / (2π)` in the plane.
pub fn fundamental_solution(dim: usize, x: &[f64]) -> Result<f64> {
    check_dim(dim)?;
    if x.len() != dim {
        return Err(Error::DimensionMismatch(format!("point has {} coordinates, expected {dim}", x.len())));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::OnDiagonalSingularity);
    }
    Ok(radial_green(dim, r))
}

/// Radial weight of an averaging kernel on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialProfile {
    /// Uniform measure on the unit sphere.
    Shell,
    /// Constant weight on the unit ball.
    UniformBall,
    /// `(1 - r²)^power`.
    Bump { power: u32 },
    /// `1 - r`.
    Cone,
}

impl RadialProfile {
    /// Unnormalized weight at `r ∈ [0, 1]`; `None` for the shell, which is a
    /// measure rather than a function.
    pub fn shape(&self, r: f64) -> Option<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Some(0.0);
        }
        match self {
            RadialProfile::Shell => None,
            RadialProfile::UniformBall => Some(1.0),
            RadialProfile::Bump { power } => Some((1.0 - r * r).powi(*power as i32)),
            RadialProfile::Cone => Some(1.0 - r),
        }
    }

    /// `∫₀¹ shape(r) r^{n-1} dr`.
    fn moment(&self, dim: usize) -> f64 {
        let order = 8 + dim + 2 * match self {
            RadialProfile::Bump { power } => *power as usize,
            _ => 1,
        };
        integrate_panels(|r| self.shape(r).unwrap_or(0.0) * r.powi(dim as i32 - 1), &[0.0, 1.0], order)
    }

    /// Normalized weight `ω(r)` with `S_{n-1} ∫ r^{n-1} ω(r) dr = 1`.
    pub fn omega(&self, dim: usize, r: f64) -> Option<f64> {
        let s = self.shape(r)?;
        Some(s / (unit_sphere_area(dim) * self.moment(dim)))
    }
}

/// Law of the length of a random displacement.
#[derive(Clone)]
pub enum RadialLaw {
    Atom(f64),
    Density(Arc<DensityLaw>),
}

/// Probability density of a radius on `[0, support]`.
pub struct DensityLaw {
    pdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    support: f64,
    kinks: Vec<f64>,
}

impl std::fmt::Debug for RadialLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadialLaw::Atom(a) => write!(f, "Atom({a})"),
            RadialLaw::Density(d) => write!(f, "Density(support {}, {} kinks)", d.support, d.kinks.len()),
        }
    }
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|x| x.is_finite() && *x >= 0.0);
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1.0));
    v
}

impl RadialLaw {
    /// Law of `α R` where `R` follows `profile` in dimension `dim`.
    pub fn of_profile(profile: RadialProfile, alpha: f64, dim: usize) -> RadialLaw {
        if profile == RadialProfile::Shell {
            return RadialLaw::Atom(alpha);
        }
        let z = profile.moment(dim);
        RadialLaw::Density(Arc::new(DensityLaw {
            pdf: Box::new(move |r| {
                let s = r / alpha;
                if !(0.0..=1.0).contains(&s) {
                    return 0.0;
                }
                profile.shape(s).unwrap_or(0.0) * s.powi(dim as i32 - 1) / (alpha * z)
            }),
            support: alpha,
            kinks: vec![0.0, alpha],
        }))
    }

    /// Largest attainable radius.
    pub fn support(&self) -> f64 {
        match self {
            RadialLaw::Atom(a) => *a,
            RadialLaw::Density(d) => d.support,
        }
    }

    /// Radii where the law is not smooth (atoms, support ends, kinks).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            RadialLaw::Atom(a) => vec![*a],
            RadialLaw::Density(d) => d.kinks.clone(),
        }
    }

    /// Density at `r`; `None` for an atom.
    pub fn pdf(&self, r: f64) -> Option<f64> {
        match self {
            RadialLaw::Atom(_) => None,
            RadialLaw::Density(d) => Some((d.pdf)(r)),
        }
    }

    /// Law of `c R`.
    pub fn scaled(&self, c: f64) -> RadialLaw {
        match self {
            RadialLaw::Atom(a) => RadialLaw::Atom(a * c),
            RadialLaw::Density(d) => {
                let inner = d.clone();
                RadialLaw::Density(Arc::new(DensityLaw {
                    pdf: Box::new(move |r| (inner.pdf)(r / c) / c),
                    support: d.support * c,
                    kinks: d.kinks.iter().map(|k| k * c).collect(),
                }))
            }
        }
    }

    /// Total mass, by quadrature for densities.
    pub fn mass(&self, order: usize) -> f64 {
        match self {
            RadialLaw::Atom(_) => 1.0,
            RadialLaw::Density(d) => {
                let panels = breakpoints(0.0, d.support, d.kinks.iter().copied());
                integrate_panels_clustered(|r| (d.pdf)(r), &panels, order)
            }
        }
    }
}

/// `f_n(u | ρ, a)`: density of `|ρ ê + a ĥ|` over `u` for a uniformly random
/// direction `ĥ`.
pub fn transition_density(dim: usize, u: f64, rho: f64, a: f64) -> f64 {
    if rho <= 0.0 || a <= 0.0 || u < (rho - a).abs() || u > rho + a {
        return 0.0;
    }
    let cn = unit_sphere_area(dim - 1) / unit_sphere_area(dim);
    let ang = if dim == 3 {
        1.0
    } else {
        // 1 - μ² in factored form, so it does not cancel near the endpoints.
        let lo = (rho - a).abs();
        let hi = rho + a;
        let one_minus_mu2 = (u - lo) * (u + lo) * (hi - u) * (hi + u) / (2.0 * rho * a).powi(2);
        if one_minus_mu2 <= 0.0 {
            return 0.0;
        }
        one_minus_mu2.powf((dim as f64 - 3.0) / 2.0)
    };
    cn * ang * u / (rho * a)
}

/// Mean of a radial `F` over the sphere of radius `a` centred at distance
/// `ρ` from the origin. `kinks` lists radii where `F` is not smooth.
fn sphere_mean(dim: usize, f: &dyn Fn(f64) -> f64, kinks: &[f64], rho: f64, a: f64, order: usize) -> f64 {
    if rho == 0.0 || a == 0.0 {
        return f(rho.max(a));
    }
    let panels = breakpoints((rho - a).abs(), rho + a, kinks.iter().copied());
    integrate_panels_clustered(|u| f(u) * transition_density(dim, u, rho, a), &panels, order)
}

/// Mean of `F(|ρ ê + R ĥ|)` with `R` drawn from `law`.
fn law_mean(dim: usize, law: &RadialLaw, f: &dyn Fn(f64) -> f64, kinks: &[f64], rho: f64, order: usize) -> f64 {
    match law {
        RadialLaw::Atom(a) => sphere_mean(dim, f, kinks, rho, *a, order),
        RadialLaw::Density(d) => {
            let extra = kinks.iter().flat_map(|k| [(rho - k).abs(), rho + k]);
            let panels = breakpoints(0.0, d.support, d.kinks.iter().copied().chain(extra));
            integrate_panels_clustered(
                |r| (d.pdf)(r) * sphere_mean(dim, f, kinks, rho, r, order),
                &panels,
                order,
            )
        }
    }
}

fn combine_kinks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push((x - y).abs());
            out.push(x + y);
        }
    }
    dedup_sorted(out)
}

/// `F_k(ρ)` where `F_0 = G` and `F_j` is `F_{j-1}` averaged with `laws[j-1]`.
fn nested_average(dim: usize, laws: &[RadialLaw], kinks: &[Vec<f64>], rho: f64, order: usize) -> f64 {
    match laws.split_last() {
        None => radial_green(dim, rho),
        Some((last, rest)) => {
            let inner = |u: f64| nested_average(dim, rest, kinks, u, order);
            law_mean(dim, last, &inner, &kinks[rest.len()], rho, order)
        }
    }
}

fn kink_table(laws: &[RadialLaw]) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0]];
    for law in laws {
        let next = combine_kinks(table.last().expect("table is non-empty"), &law.kinks());
        table.push(next);
    }
    table
}

/// Kernel data for Euclidean averaging: one profile per scale `α_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclideanKernelSpec {
    pub dim: usize,
    pub alphas: Vec<f64>,
    pub radial_profiles: Vec<RadialProfile>,
}

impl EuclideanKernelSpec {
    /// `k` shells with the given scales.
    pub fn spheres(dim: usize, alphas: &[f64]) -> Self {
        EuclideanKernelSpec {
            dim,
            alphas: alphas.to_vec(),
            radial_profiles: vec![RadialProfile::Shell; alphas.len()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.alphas.is_empty() || self.alphas.len() != self.radial_profiles.len() {
            return Err(Error::InvalidInput(format!(
                "need one profile per scale, got {} scales and {} profiles",
                self.alphas.len(),
                self.radial_profiles.len()
            )));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(Error::InvalidInput("scales must lie in (0, 1]".into()));
        }
        let total: f64 = self.alphas.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!("scales sum to {total} > 1")));
        }
        Ok(())
    }

    fn laws(&self, lambda: f64) -> Vec<RadialLaw> {
        self.alphas
            .iter()
            .zip(&self.radial_profiles)
            .map(|(a, p)| RadialLaw::of_profile(*p, a / lambda, self.dim))
            .collect()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("Λ must be positive, got {lambda}")))
    }
}

/// Averaged fundamental solution at radius `r` for explicit laws.
pub fn average_with_laws(dim: usize, r: f64, laws: &[RadialLaw], opts: QuadratureOptions) -> Result<f64> {
    check_dim(dim)?;
    if laws.is_empty() {
        if r == 0.0 {
            return Err(Error::OnDiagonalSingularity);
        }
        return Ok(radial_green(dim, r));
    }
    let kinks = kink_table(laws);
    checked(opts, |order| nested_average(dim, laws, &kinks, r, order))
}

/// `H_α^Λ(G)(x)`: the fundamental solution averaged successively over the
/// kernels of `spec`, each scaled to radius `α_i / Λ`.
pub fn sphere_average(
    dim: usize,
    x: &[f64],
    lambda: f64,
    spec: &EuclideanKernelSpec,
    opts: QuadratureOptions,
) -> Result<f64> {
    spec.validate()?;
    check_lambda(lambda)?;
    if spec.dim != dim || x.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim}, kernel dimension {}, point with {} coordinates",
            spec.dim,
            x.len()
        )));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    average_with_laws(dim, r, &spec.laws(lambda), opts)
}

/// The profile `f` on `[0, 1]`, sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationProfile {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
}

/// `f(t) = Λ^{2-n} [H(G)(√t / Λ) - G(1/Λ)]` at each sample `t ∈ [0, 1]`.
pub fn extract_profile_f(
    dim: usize,
    lambda: f64,
    spec: &EuclideanKernelSpec,
    samples: &[f64],
    opts: QuadratureOptions,
) -> Result<DeformationProfile> {
    if let Some(t) = samples.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidInput(format!("sample {t} lies outside [0, 1]")));
    }
    spec.validate()?;
    check_lambda(lambda)?;
    let laws = spec.laws(lambda);
    let edge = radial_green(dim, 1.0 / lambda);
    let scale = lambda.powi(2 - dim as i32);
    let f = samples
        .iter()
        .map(|t| Ok(scale * (average_with_laws(dim, t.sqrt() / lambda, &laws, opts)? - edge)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeformationProfile { t: samples.to_vec(), f })
}

/// Radial law of a composition of kernels, in units where `Λ = 1`.
#[derive(Debug, Clone)]
pub struct ComposedProfile {
    pub dim: usize,
    pub law: RadialLaw,
    pub support_radius: f64,
}

impl ComposedProfile {
    /// `ω(r)` with unit normalization; `None` for a bare shell.
    pub fn omega(&self, r: f64) -> Option<f64> {
        let p = self.law.pdf(r)?;
        if r == 0.0 {
            return Some(if p == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Some(p / (unit_sphere_area(self.dim) * r.powi(self.dim as i32 - 1)))
    }

    /// `S_{n-1} ∫ r^{n-1} ω(r) dr`.
    pub fn normalization(&self, opts: QuadratureOptions) -> Result<f64> {
        checked(opts, |order| self.law.mass(order))
    }

    /// Averaged fundamental solution with this single composed kernel.
    pub fn average_green(&self, r: f64, lambda: f64, opts: QuadratureOptions) -> Result<f64> {
        check_lambda(lambda)?;
        average_with_laws(self.dim, r, &[self.law.scaled(1.0 / lambda)], opts)
    }
}

fn compose_two(dim: usize, a: &RadialLaw, b: &RadialLaw, order: usize) -> RadialLaw {
    let kinks = dedup_sorted(
        combine_kinks(&a.kinks(), &b.kinks())
            .into_iter()
            .chain([0.0, a.support() + b.support()])
            .collect(),
    );
    let support = a.support() + b.support();
    let pdf: Box<dyn Fn(f64) -> f64 + Send + Sync> = match (a.clone(), b.clone()) {
        (RadialLaw::Atom(s), RadialLaw::Atom(t)) => Box::new(move |r| transition_density(dim, r, s, t)),
        (RadialLaw::Atom(s), RadialLaw::Density(q)) | (RadialLaw::Density(q), RadialLaw::Atom(s)) => {
            Box::new(move |r| atom_density_pdf(dim, s, &q, r, order))
        }
        (RadialLaw::Density(p), RadialLaw::Density(q)) => Box::new(move |r| {
            let extra = q.kinks.iter().flat_map(|k| [(r - k).abs(), r + k]);
            let panels = breakpoints(0.0, p.support, p.kinks.iter().copied().chain(extra));
            integrate_panels_clustered(|s| (p.pdf)(s) * atom_density_pdf(dim, s, &q, r, order), &panels, order)
        }),
    };
    RadialLaw::Density(Arc::new(DensityLaw { pdf, support, kinks }))
}

/// Density at `r` of `|s ê + T ĥ|` with `T` drawn from `q`.
fn atom_density_pdf(dim: usize, s: f64, q: &DensityLaw, r: f64, order: usize) -> f64 {
    if s <= 0.0 {
        return (q.pdf)(r);
    }
    let lo = (r - s).abs();
    let hi = (r + s).min(q.support);
    if hi <= lo {
        return 0.0;
    }
    let panels = breakpoints(lo, hi, q.kinks.iter().copied());
    integrate_panels_clustered(|t| (q.pdf)(t) * transition_density(dim, r, s, t), &panels, order)
}

/// Composition of the kernels in `spec` into one radial law (at `Λ = 1`).
pub fn compose_kernels(spec: &EuclideanKernelSpec, opts: QuadratureOptions) -> Result<ComposedProfile> {
    spec.validate()?;
    let laws = spec.laws(1.0);
    let mut law = laws[0].clone();
    for next in &laws[1..] {
        law = compose_two(spec.dim, &law, next, opts.order);
    }
    Ok(ComposedProfile {
        dim: spec.dim,
        support_radius: law.support(),
        law,
    })
}

/// Largest `j ≤ j_max` whose `j`-th difference quotients of `f` on `[a, b]`
/// stay bounded when the step shrinks from `h` to `h/4`.
pub fn smoothness_order(f: impl Fn(f64) -> f64, a: f64, b: f64, j_max: usize, h: f64) -> usize {
    let quotient = |j: usize, h: f64| -> f64 {
        let steps = ((b - a) / h).floor() as usize;
        let mut best: f64 = 0.0;
        for i in 0..=steps.saturating_sub(j) {
            let x = a + i as f64 * h;
            let mut diff = 0.0;
            let mut binom = 1.0;
            for k in 0..=j {
                let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
                diff += sign * binom * f(x + k as f64 * h);
                binom = binom * (j - k) as f64 / (k + 1) as f64;
            }
            best = best.max((diff / h.powi(j as i32)).abs());
        }
        best
    };
    let mut order = 0;
    for j in 1..=j_max {
        let (q1, q2) = (quotient(j, h), quotient(j, h / 4.0));
        if q2 <= 2.0 * q1 + 1e-9 {
            order = j;
        } else {
            break;
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const Q: QuadratureOptions = QuadratureOptions { order: 24, tolerance: 1e-10 };

    #[test]
    fn sphere_areas() {
        assert_abs_diff_eq!(unit_sphere_area(2), 2.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_sphere_area(3), 4.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_sphere_area(4), 2.0 * PI * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_sphere_area(5), 8.0 * PI * PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn fundamental_values() {
        assert_abs_diff_eq!(fundamental_solution(3, &[1.0, 0.0, 0.0]).unwrap(), 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert_eq!(fundamental_solution(2, &[0.0, 1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            fundamental_solution(4, &[2.0, 0.0, 0.0, 0.0]).unwrap(),
            1.0 / (16.0 * PI * PI),
            epsilon = 1e-15
        );
        assert!(matches!(fundamental_solution(3, &[0.0; 3]), Err(Error::OnDiagonalSingularity)));
    }

    #[test]
    fn transition_density_normalized() {
        for dim in [2, 3, 4, 5] {
            let (rho, a) = (0.7, 0.4);
            let m = integrate_panels_clustered(|u| transition_density(dim, u, rho, a), &[0.3, 1.1], 32);
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn newton_shell_three_dims() {
        let spec = EuclideanKernelSpec::spheres(3, &[1.0]);
        let lambda = 2.0;
        let out = sphere_average(3, &[0.9, 0.0, 0.0], lambda, &spec, Q).unwrap();
        assert_abs_diff_eq!(out, radial_green(3, 0.9), epsilon = 1e-10);
        let inside = sphere_average(3, &[0.1, 0.2, 0.0], lambda, &spec, Q).unwrap();
        assert_abs_diff_eq!(inside, lambda / (4.0 * PI), epsilon = 1e-10);
    }

    #[test]
    fn newton_shell_plane() {
        let spec = EuclideanKernelSpec::spheres(2, &[1.0]);
        let lambda = 3.0;
        let inside = sphere_average(2, &[0.1, 0.05], lambda, &spec, Q).unwrap();
        assert_abs_diff_eq!(inside, lambda.ln() / (2.0 * PI), epsilon = 1e-9);
    }

    #[test]
    fn single_shell_profile_vanishes() {
        let spec = EuclideanKernelSpec::spheres(3, &[1.0]);
        let p = extract_profile_f(3, 1.5, &spec, &[0.0, 0.3, 0.7, 1.0], Q).unwrap();
        for v in p.f {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
        }
        assert!(extract_profile_f(3, 1.5, &spec, &[1.2], Q).is_err());
    }

    #[test]
    fn ball_law_has_unit_mass() {
        for p in [RadialProfile::UniformBall, RadialProfile::Bump { power: 2 }, RadialProfile::Cone] {
            for dim in [2, 3] {
                let law = RadialLaw::of_profile(p, 0.6, dim);
                assert_abs_diff_eq!(law.mass(32), 1.0, epsilon = 1e-12);
                let omega_int = integrate_panels(
                    |r| unit_sphere_area(dim) * r.powi(dim as i32 - 1) * p.omega(dim, r).unwrap(),
                    &[0.0, 1.0],
                    32,
                );
                assert_abs_diff_eq!(omega_int, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_shells_compose_in_closed_form() {
        let spec = EuclideanKernelSpec::spheres(3, &[0.5, 0.3]);
        let c = compose_kernels(&spec, Q).unwrap();
        assert_abs_diff_eq!(c.law.pdf(0.5).unwrap(), 0.5 / (2.0 * 0.5 * 0.3), epsilon = 1e-14);
        assert_eq!(c.law.pdf(0.1).unwrap(), 0.0);
        assert_eq!(c.law.pdf(0.81).unwrap(), 0.0);
        assert_abs_diff_eq!(c.normalization(Q).unwrap(), 1.0, epsilon = 1e-10);
        assert!(c.support_radius <= 0.8 + 1e-15);
    }

    #[test]
    fn composition_in_plane_is_normalized() {
        let spec = EuclideanKernelSpec::spheres(2, &[0.5, 0.4]);
        let c = compose_kernels(&spec, Q).unwrap();
        assert_abs_diff_eq!(c.normalization(Q).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn three_fold_composition() {
        let spec = EuclideanKernelSpec {
            dim: 3,
            alphas: vec![0.3, 0.3, 0.3],
            radial_profiles: vec![RadialProfile::Shell, RadialProfile::UniformBall, RadialProfile::Shell],
        };
        let c = compose_kernels(&spec, QuadratureOptions { order: 16, tolerance: 1e-8 }).unwrap();
        assert_abs_diff_eq!(c.normalization(QuadratureOptions { order: 16, tolerance: 1e-8 }).unwrap(), 1.0, epsilon = 1e-8);
        assert_eq!(c.law.pdf(0.95).unwrap(), 0.0);
    }

    #[test]
    fn composed_kernel_matches_nested_average() {
        let spec = EuclideanKernelSpec::spheres(3, &[0.5, 0.5]);
        let c = compose_kernels(&spec, Q).unwrap();
        for r in [0.0, 0.2, 0.6, 1.3] {
            let nested = sphere_average(3, &[r, 0.0, 0.0], 1.0, &spec, Q).unwrap();
            let single = c.average_green(r, 1.0, Q).unwrap();
            assert_abs_diff_eq!(nested, single, epsilon = 1e-9);
        }
    }

    #[test]
    fn composition_of_one_is_identity() {
        let spec = EuclideanKernelSpec {
            dim: 3,
            alphas: vec![0.7],
            radial_profiles: vec![RadialProfile::Bump { power: 2 }],
        };
        let c = compose_kernels(&spec, Q).unwrap();
        let direct = RadialLaw::of_profile(RadialProfile::Bump { power: 2 }, 0.7, 3);
        for r in [0.1, 0.4, 0.69] {
            assert_eq!(c.law.pdf(r), direct.pdf(r));
        }
    }

    #[test]
    fn two_sphere_profile() {
        let spec = EuclideanKernelSpec::spheres(3, &[0.5, 0.5]);
        let t = [0.0, 0.25, 0.5, 1.0];
        let a = extract_profile_f(3, 2.0, &spec, &t, Q).unwrap();
        let b = extract_profile_f(3, 5.0, &spec, &t, Q).unwrap();
        let c = compose_kernels(&spec, Q).unwrap();
        for k in 0..t.len() {
            assert_abs_diff_eq!(a.f[k], b.f[k], epsilon = 1e-9);
            let r = t[k].sqrt() / 2.0;
            let oracle = 2.0f64.powi(-1) * (c.average_green(r, 2.0, Q).unwrap() - radial_green(3, 0.5));
            assert_abs_diff_eq!(a.f[k], oracle, epsilon = 1e-9);
        }
        assert!(a.f[3].abs() <= 2e-10);
        // Mean of 1/(4πρ) against the density ρ/(2ab) on [0, a + b].
        assert_abs_diff_eq!(a.f[0], 1.0 / (4.0 * PI), epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(EuclideanKernelSpec::spheres(3, &[0.7, 0.7]).validate().is_err());
        assert!(EuclideanKernelSpec::spheres(3, &[0.0]).validate().is_err());
        assert!(EuclideanKernelSpec::spheres(1, &[1.0]).validate().is_err());
    }

    #[test]
    fn shell_average_has_a_kink() {
        let g = |r: f64| radial_green(3, r.max(1.0));
        assert_eq!(smoothness_order(g, 0.5, 1.5, 3, 0.01), 1);
        assert_eq!(smoothness_order(|x| x * x * x, 0.0, 1.0, 3, 0.01), 3);
    }
}
