use std::f64::consts::PI;

use super::{Edge, Mesh, NodeRole};
use crate::error::{Error, Result};

fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("spacing must be positive, got {h}")))
    }
}

fn profile_value(rho: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    let v = rho(x);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("metric profile is {v} at {x:?}")))
    }
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Interval `[0, (n_interior + 1) h]` with a boundary node at each end.
///
/// Edge conductance is `ρ(mid)/h`, edge length `h ρ(mid)`, node volume `h ρ(x)`.
pub fn build_interval_mesh(
    n_interior: usize,
    spacing: f64,
    rho: impl Fn(&[f64]) -> f64,
) -> Result<Mesh> {
    check_spacing(spacing)?;
    if n_interior == 0 {
        return Err(Error::InvalidInput("interval needs at least one interior node".into()));
    }
    let n = n_interior + 2;
    let positions: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * spacing]).collect();
    let mut volumes = Vec::with_capacity(n);
    for p in &positions {
        volumes.push(spacing * profile_value(&rho, p)?);
    }
    let roles = (0..n)
        .map(|i| if i == 0 || i == n - 1 { NodeRole::Boundary } else { NodeRole::Interior })
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let r = profile_value(&rho, &midpoint(&positions[i], &positions[i + 1]))?;
        edges.push(Edge { a: i, b: i + 1, weight: r / spacing, length: spacing * r });
    }
    Mesh::new(format!("interval-{n}"), 1, positions, volumes, roles, edges)
}

/// Rectangular `nx × ny` grid with spacing `h`; the outer ring is boundary.
///
/// Node `(i, j)` has index `j * nx + i` and position `(i h, j h)`. In two
/// dimensions the conductance `h^{n-2} ρ` reduces to `ρ(mid)`.
pub fn build_grid_mesh(
    nx: usize,
    ny: usize,
    spacing: f64,
    rho: impl Fn(&[f64]) -> f64,
) -> Result<Mesh> {
    check_spacing(spacing)?;
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidInput(format!(
            "grid {nx}x{ny} has no interior nodes; both sides need at least 3 nodes"
        )));
    }
    let idx = |i: usize, j: usize| j * nx + i;
    let mut positions = Vec::with_capacity(nx * ny);
    let mut roles = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            positions.push(vec![i as f64 * spacing, j as f64 * spacing]);
            let edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
            roles.push(if edge { NodeRole::Boundary } else { NodeRole::Interior });
        }
    }
    let mut volumes = Vec::with_capacity(nx * ny);
    for p in &positions {
        volumes.push(spacing * spacing * profile_value(&rho, p)?);
    }
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let a = idx(i, j);
            let mut push = |b: usize| -> Result<()> {
                let r = profile_value(&rho, &midpoint(&positions[a], &positions[b]))?;
                edges.push(Edge { a, b, weight: r, length: spacing * r });
                Ok(())
            };
            if i + 1 < nx {
                push(idx(i + 1, j))?;
            }
            if j + 1 < ny {
                push(idx(i, j + 1))?;
            }
        }
    }
    Mesh::new(format!("grid-{nx}x{ny}"), 2, positions, volumes, roles, edges)
}

/// Polar finite-volume annulus between radii `r_inner` and `r_outer`.
///
/// There are `n_rings + 2` rings of `n_angular` nodes; the innermost and
/// outermost rings are boundary. Node `(k, j)` has index `k * n_angular + j`.
pub fn build_annulus_mesh(
    n_rings: usize,
    n_angular: usize,
    r_inner: f64,
    r_outer: f64,
    rho: impl Fn(&[f64]) -> f64,
) -> Result<Mesh> {
    if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "annulus radii must satisfy 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
        )));
    }
    if n_rings == 0 || n_angular < 3 {
        return Err(Error::InvalidInput(format!(
            "annulus needs at least one interior ring and three angular nodes, got {n_rings}, {n_angular}"
        )));
    }
    let levels = n_rings + 2;
    let dr = (r_outer - r_inner) / (levels - 1) as f64;
    let dt = 2.0 * PI / n_angular as f64;
    let idx = |k: usize, j: usize| k * n_angular + j;
    let radius = |k: usize| r_inner + k as f64 * dr;
    let mut positions = Vec::with_capacity(levels * n_angular);
    let mut roles = Vec::with_capacity(levels * n_angular);
    let mut volumes = Vec::with_capacity(levels * n_angular);
    for k in 0..levels {
        for j in 0..n_angular {
            let (r, t) = (radius(k), j as f64 * dt);
            let p = vec![r * t.cos(), r * t.sin()];
            volumes.push(r * dr * dt * profile_value(&rho, &p)?);
            positions.push(p);
            roles.push(if k == 0 || k == levels - 1 { NodeRole::Boundary } else { NodeRole::Interior });
        }
    }
    let mut edges = Vec::new();
    for k in 0..levels {
        for j in 0..n_angular {
            let a = idx(k, j);
            let b = idx(k, (j + 1) % n_angular);
            let r = radius(k);
            let t = (j as f64 + 0.5) * dt;
            let rv = profile_value(&rho, &[r * t.cos(), r * t.sin()])?;
            edges.push(Edge { a, b, weight: rv * dr / (r * dt), length: rv * r * dt });
            if k + 1 < levels {
                let b = idx(k + 1, j);
                let rm = r + 0.5 * dr;
                let t = j as f64 * dt;
                let rv = profile_value(&rho, &[rm * t.cos(), rm * t.sin()])?;
                edges.push(Edge { a, b, weight: rv * rm * dt / dr, length: rv * dr });
            }
        }
    }
    Mesh::new(
        format!("annulus-{levels}x{n_angular}"),
        2,
        positions,
        volumes,
        roles,
        edges,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_profile_weights() {
        let m = build_interval_mesh(3, 1.0, |x| 1.0 + x[0]).unwrap();
        let w: Vec<f64> = m.edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1.5, 2.5, 3.5, 4.5]);
    }

    #[test]
    fn grid_counts() {
        let m = build_grid_mesh(5, 5, 1.0, |_| 1.0).unwrap();
        assert_eq!(m.node_count(), 25);
        assert_eq!(m.interior_nodes().len(), 9);
        assert_eq!(m.edges().len(), 40);
        assert!(build_grid_mesh(2, 5, 1.0, |_| 1.0).is_err());
    }

    #[test]
    fn annulus_counts() {
        let m = build_annulus_mesh(3, 12, 1.0, 2.0, |_| 1.0).unwrap();
        assert_eq!(m.node_count(), 60);
        assert_eq!(m.interior_nodes().len(), 36);
        assert_eq!(m.edges().len(), 60 + 48);
    }

    #[test]
    fn rejects_non_positive_profile() {
        assert!(build_interval_mesh(3, 1.0, |x| x[0] - 1.0).is_err());
    }
}
