//! Composite Gauss–Legendre quadrature on panels.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

fn rule(order: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(order)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(order.max(2)).expect("order is positive");
            let gl = GaussLegendre::new(n);
            let mut pairs: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Sorted, deduplicated breakpoints inside `[a, b]`, including both ends.
pub fn breakpoints(a: f64, b: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let tol = 1e-13 * (b - a).abs().max(1.0);
    let mut pts: Vec<f64> = interior
        .into_iter()
        .filter(|x| x.is_finite() && *x > a + tol && *x < b - tol)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| (*x - *y).abs() <= tol);
    pts
}

/// Plain Gauss–Legendre on each panel `[p_k, p_{k+1}]`.
pub fn integrate_panels(f: impl Fn(f64) -> f64, panels: &[f64], order: usize) -> f64 {
    let r = rule(order);
    let mut total = 0.0;
    for w in panels.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        total += half * r.iter().map(|(x, wt)| wt * f(mid + half * x)).sum::<f64>();
    }
    total
}

/// Gauss–Legendre after the substitution `x = a + (b - a)(1 - cos πu)/2` on
/// each panel. The map clusters nodes at panel ends, which removes inverse
/// square-root endpoint singularities.
pub fn integrate_panels_clustered(f: impl Fn(f64) -> f64, panels: &[f64], order: usize) -> f64 {
    use std::f64::consts::PI;
    let r = rule(order);
    let mut total = 0.0;
    for w in panels.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut s = 0.0;
        for (x, wt) in r.iter() {
            let u = 0.5 * (x + 1.0);
            let t = 0.5 * (1.0 - (PI * u).cos());
            let jac = 0.5 * PI * (PI * u).sin() * (b - a) * 0.5;
            s += wt * jac * f(a + (b - a) * t);
        }
        total += s;
    }
    total
}

/// Order and tolerance for refinement-checked quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub order: usize,
    pub tolerance: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { order: 24, tolerance: 1e-10 }
    }
}

/// Most times [`checked`] doubles the order before giving up.
const MAX_DOUBLINGS: usize = 3;

/// Evaluates `f` at `order`, `2 order`, ... and accepts the first value that
/// agrees with its predecessor to `tolerance` (relative to `max(1, |value|)`).
pub fn checked(opts: QuadratureOptions, f: impl Fn(usize) -> f64) -> Result<f64> {
    let mut order = opts.order;
    let mut coarse = f(order);
    let mut last = (coarse, f64::NAN);
    for _ in 0..MAX_DOUBLINGS {
        order *= 2;
        let fine = f(order);
        let change = (fine - coarse).abs();
        if change.is_finite() && change <= opts.tolerance * fine.abs().max(1.0) {
            return Ok(fine);
        }
        last = (fine, change);
        coarse = fine;
    }
    Err(Error::QuadratureNotConverged {
        order,
        estimate: last.0,
        change: last.1,
    })
}
