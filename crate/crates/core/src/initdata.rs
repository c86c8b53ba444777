//! Initial hypersurfaces: coordinate slices, cosine-perturbed slices and
//! geodesic spheres whose center is displaced from the origin.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GraphSurface;
use crate::grid::Grid;
use crate::numeric::bisect;
use crate::warp::{WarpKind, WarpModel};

const ROOT_TOL: f64 = 1e-12;

/// The coordinate slice `r = s`.
pub fn slice(model: Arc<WarpModel>, grid: Arc<Grid>, s: f64) -> Result<GraphSurface> {
    let cells = grid.cells();
    GraphSurface::new(vec![s; cells], model, grid, 0.0)
}

/// `r(theta) = s + amplitude * cos(mode * theta)`.
pub fn perturbed_slice(
    model: Arc<WarpModel>,
    grid: Arc<Grid>,
    s: f64,
    amplitude: f64,
    mode: u32,
) -> Result<GraphSurface> {
    if mode == 0 {
        return Err(Error::Parameter("perturbation mode must be >= 1".into()));
    }
    let k = f64::from(mode);
    let r = grid
        .theta()
        .iter()
        .map(|&t| s + amplitude * (k * t).cos())
        .collect();
    GraphSurface::new(r, model, grid, 0.0)
}

/// Geodesic sphere of radius `rho` centered at distance `d` from the origin
/// on the ray `theta = 0`, written as a graph over the origin.
///
/// The radial function solves the law of cosines of the ambient space form at
/// every node:
/// hyperbolic `cosh rho = cosh r cosh d - sinh r sinh d cos(theta)`,
/// spherical `cos rho = cos r cos d + sin r sin d cos(theta)`.
pub fn offcenter_sphere(
    model: Arc<WarpModel>,
    grid: Arc<Grid>,
    rho: f64,
    d: f64,
) -> Result<GraphSurface> {
    if !(rho > 0.0) || !(d >= 0.0) {
        return Err(Error::Parameter(format!(
            "need rho > 0 and d >= 0, got rho = {rho}, d = {d}"
        )));
    }
    if d >= rho {
        return Err(Error::Geometry(format!(
            "origin lies outside the sphere (d = {d} >= rho = {rho})"
        )));
    }
    if d == 0.0 {
        return slice(model, grid, rho);
    }
    let kind = model.kind();
    let residual: Box<dyn Fn(f64, f64) -> f64> = match kind {
        WarpKind::Hyperbolic => {
            let (ch_d, sh_d, ch_rho) = (d.cosh(), d.sinh(), rho.cosh());
            Box::new(move |r: f64, c: f64| r.cosh() * ch_d - r.sinh() * sh_d * c - ch_rho)
        }
        WarpKind::SphericalCap => {
            if d + rho >= std::f64::consts::FRAC_PI_2 {
                return Err(Error::Geometry(format!(
                    "sphere leaves the hemisphere (d + rho = {})",
                    d + rho
                )));
            }
            let (c_d, s_d, c_rho) = (d.cos(), d.sin(), rho.cos());
            Box::new(move |r: f64, c: f64| c_rho - (r.cos() * c_d + r.sin() * s_d * c))
        }
        other => {
            return Err(Error::Geometry(format!(
                "off-center spheres are only generated in space forms of curvature +-1, not {}",
                other.name()
            )))
        }
    };
    // The residual is negative at r = 0 (inside the ball) and nonnegative
    // at r = rho + d by the triangle inequality.
    let hi = rho + d;
    let r = grid
        .theta()
        .iter()
        .map(|&t| {
            let c = t.cos();
            bisect(
                |r| residual(r, c),
                0.0,
                hi,
                ROOT_TOL * 1e-3,
                "law-of-cosines root",
            )
            .map_err(|e| Error::Geometry(e.to_string()))
        })
        .collect::<Result<Vec<f64>>>()?;
    GraphSurface::new(r, model, grid, 0.0)
}
