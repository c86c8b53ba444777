//! Pointwise geometry of a star-shaped axisymmetric graph `r = r(theta)`.
//!
//! With `phi' = r'/lambda(r)` and `v = sqrt(1 + phi'^2)`, the Weingarten map
//! of the graph is `h^i_j = (lambda' delta^i_j - g~^{ik} phi_{;kj}) / (lambda v)`
//! where `g~^{ij} = sigma^{ij} - phi^i phi^j / v^2` and `;` is the covariant
//! derivative of the round sphere. For axisymmetric `phi` the spherical Hessian
//! is `diag(phi'', cot(theta) phi', ..., cot(theta) phi')` and `g~` is
//! `diag(1/v^2, 1, ..., 1)` in the same frame, so the Weingarten map is
//! diagonal with
//!
//! ```text
//! kappa_1 = (lambda' - phi'' / v^2) / (lambda v)          (meridian)
//! kappa_2 = (lambda' - cot(theta) phi') / (lambda v)      (multiplicity n - 1)
//! ```
//!
//! `phi''` is evaluated by the chain rule from the grid derivatives of `r`,
//! `phi'' = r''/lambda - lambda' r'^2 / lambda^2`, so only even data (`r`) is
//! ever differenced across the poles.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numeric::binomial;
use crate::warp::WarpModel;

/// Radii below this oscillation are treated as an exact coordinate slice.
const SLICE_SNAP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct GraphSurface {
    r: Vec<f64>,
    model: Arc<WarpModel>,
    grid: Arc<Grid>,
    time: f64,
}

impl GraphSurface {
    pub fn new(r: Vec<f64>, model: Arc<WarpModel>, grid: Arc<Grid>, time: f64) -> Result<Self> {
        if r.len() != grid.cells() {
            return Err(Error::Size {
                expected: grid.cells(),
                actual: r.len(),
            });
        }
        if model.n() != grid.dim() {
            return Err(Error::Parameter(format!(
                "model dimension {} does not match grid dimension {}",
                model.n(),
                grid.dim()
            )));
        }
        for (i, &ri) in r.iter().enumerate() {
            if !ri.is_finite() {
                return Err(Error::NonFinite {
                    what: "radius",
                    node: Some(i),
                });
            }
            if !model.contains(ri) {
                let (a, b) = model.domain();
                return Err(Error::Domain {
                    r: ri,
                    a,
                    b,
                    node: Some(i),
                });
            }
        }
        Ok(GraphSurface {
            r,
            model,
            grid,
            time,
        })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn model(&self) -> &Arc<WarpModel> {
        &self.model
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    /// Same model and grid, new radii and time.
    pub fn with_radii(&self, r: Vec<f64>, time: f64) -> Result<Self> {
        GraphSurface::new(r, self.model.clone(), self.grid.clone(), time)
    }

    pub fn r_min(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max r - min r`.
    pub fn oscillation(&self) -> f64 {
        self.r_max() - self.r_min()
    }

    pub fn mean_radius(&self) -> f64 {
        self.r.iter().sum::<f64>() / self.r.len() as f64
    }
}

/// Centered `r'` and `r''` into the buffers; exact zeros for (numerically)
/// constant data so that slices stay exactly umbilic.
pub(crate) fn radial_derivatives(grid: &Grid, r: &[f64], r1: &mut [f64], r2: &mut [f64]) {
    let (lo, hi) = r
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if hi - lo <= SLICE_SNAP * hi.abs().max(1.0) {
        r1.fill(0.0);
        r2.fill(0.0);
    } else {
        grid.d1_into(r, r1);
        grid.d2_into(r, r2);
    }
}

/// Graph kinematics and principal curvatures at one node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeGeometry {
    pub phi1: f64,
    pub phi2: f64,
    pub v: f64,
    pub k1: f64,
    pub k2: f64,
}

impl NodeGeometry {
    #[inline]
    pub(crate) fn new(lam: f64, dlam: f64, r1: f64, r2: f64, cot: f64, n: usize) -> Self {
        let phi1 = r1 / lam;
        // chain rule through phi' = r' / lambda(r)
        let phi2 = r2 / lam - dlam * r1 * r1 / (lam * lam);
        let v2 = 1.0 + phi1 * phi1;
        let v = v2.sqrt();
        let k1 = (dlam - phi2 / v2) / (lam * v);
        let k2 = if n == 1 {
            k1
        } else {
            (dlam - cot * phi1) / (lam * v)
        };
        NodeGeometry {
            phi1,
            phi2,
            v,
            k1,
            k2,
        }
    }
}

/// The principal curvatures of an axisymmetric point: `k1` once and `k2`
/// with multiplicity `n - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiKappa {
    pub k1: f64,
    pub k2: f64,
    pub n: usize,
}

impl AxiKappa {
    pub fn new(k1: f64, k2: f64, n: usize) -> Self {
        AxiKappa { k1, k2, n }
    }

    pub fn umbilic(k: f64, n: usize) -> Self {
        AxiKappa { k1: k, k2: k, n }
    }

    /// The full n-tuple.
    pub fn expand(&self) -> Vec<f64> {
        let mut v = vec![self.k2; self.n];
        v[0] = self.k1;
        v
    }

    /// `sigma_j` of the `n - 1` copies of `k2` alone.
    fn sigma_rest(&self, j: isize) -> f64 {
        if j < 0 {
            return 0.0;
        }
        let j = j as usize;
        binomial(self.n - 1, j) * self.k2.powi(j as i32)
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.n {
            return Err(Error::Index { k, n: self.n });
        }
        Ok(())
    }

    pub fn sigma(&self, k: usize) -> Result<f64> {
        self.check_k(k)?;
        let k = k as isize;
        Ok(self.sigma_rest(k) + self.k1 * self.sigma_rest(k - 1))
    }

    pub fn h(&self, k: usize) -> Result<f64> {
        Ok(self.sigma(k)? / binomial(self.n, k))
    }

    pub fn in_cone(&self, k: usize) -> Result<bool> {
        self.check_k(k)?;
        for j in 1..=k {
            if self.sigma(j)? <= 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn cone_error(&self, k: usize) -> Error {
        Error::ConeViolation {
            node: None,
            k,
            kappa: vec![self.k1, self.k2],
        }
    }

    /// `F = n H_k / H_{k-1}`.
    pub fn speed_function(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::Index { k, n: self.n });
        }
        if !self.in_cone(k)? {
            return Err(self.cone_error(k));
        }
        Ok(self.n as f64 * self.h(k)? / self.h(k - 1)?)
    }

    /// `F` together with `dF/dkappa_1`, the derivative along the meridian
    /// curvature.
    pub fn speed_function_with_meridian_derivative(&self, k: usize) -> Result<(f64, f64)> {
        let f = self.speed_function(k)?;
        let n = self.n;
        let c = n as f64 * binomial(n, k - 1) / binomial(n, k);
        let sk = self.sigma(k)?;
        let skm1 = self.sigma(k - 1)?;
        let ki = k as isize;
        let dsk = self.sigma_rest(ki - 1);
        let dskm1 = self.sigma_rest(ki - 2);
        let df = c * (dsk * skm1 - sk * dskm1) / (skm1 * skm1);
        Ok((f, df))
    }
}

/// `F = n H_k / H_{k-1}` and `dF/dkappa_1` for axisymmetric tuples with the
/// binomial weights precomputed; the hot path of the flow.
#[derive(Debug, Clone)]
pub(crate) struct QuotientKernel {
    k: usize,
    /// Membership in `Gamma_cone` is required (`cone >= k`).
    cone: usize,
    /// `C(n-1, j)` for `j = 0..=n`.
    rest: Vec<f64>,
    c: f64,
}

impl QuotientKernel {
    pub(crate) fn new(n: usize, k: usize, cone: usize) -> Result<Self> {
        if k == 0 || k > n || cone > n {
            return Err(Error::Index { k: k.max(cone), n });
        }
        Ok(QuotientKernel {
            k,
            cone: cone.max(k),
            rest: (0..=n).map(|j| binomial(n - 1, j)).collect(),
            c: n as f64 * binomial(n, k - 1) / binomial(n, k),
        })
    }

    /// `None` outside the cone.
    #[inline]
    pub(crate) fn eval(&self, k1: f64, k2: f64) -> Option<(f64, f64)> {
        // rest_j = C(n-1, j) k2^j; sigma_j = rest_j + k1 rest_{j-1}
        let mut p_prev = 0.0; // rest_{j-1}
        let mut p = 1.0; // rest_j / C(n-1, j), i.e. k2^j
        let mut sig = [1.0, 0.0];
        let mut dsig = [0.0, 0.0];
        for j in 1..=self.cone {
            let rest_prev = if j == 1 { 1.0 } else { p_prev };
            p *= k2;
            let rest = self.rest[j] * p;
            let s = rest + k1 * rest_prev;
            if !(s > 0.0) {
                return None;
            }
            if j == self.k - 1 {
                sig[0] = s;
                dsig[0] = rest_prev;
            }
            if j == self.k {
                sig[1] = s;
                dsig[1] = rest_prev;
            }
            p_prev = rest;
        }
        let f = self.c * sig[1] / sig[0];
        let df = self.c * (dsig[1] * sig[0] - sig[1] * dsig[0]) / (sig[0] * sig[0]);
        Some((f, df))
    }
}

/// Elementary symmetric polynomial `sigma_k` of an arbitrary tuple.
pub fn sigma_k(kappas: &[f64], k: usize) -> Result<f64> {
    let n = kappas.len();
    if k > n {
        return Err(Error::Index { k, n });
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in kappas {
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    Ok(e[k])
}

/// Normalized `H_k = sigma_k / C(n, k)`.
pub fn h_k(kappas: &[f64], k: usize) -> Result<f64> {
    Ok(sigma_k(kappas, k)? / binomial(kappas.len(), k))
}

/// Membership in `Gamma_k`: `sigma_j > 0` for `j = 1..=k`.
pub fn cone_check(kappas: &[f64], k: usize) -> bool {
    k <= kappas.len() && (1..=k).all(|j| sigma_k(kappas, j).is_ok_and(|s| s > 0.0))
}

/// `F = n H_k / H_{k-1}` for an arbitrary tuple in `Gamma_k`.
pub fn speed_function(kappas: &[f64], k: usize) -> Result<f64> {
    let n = kappas.len();
    if k == 0 || k > n {
        return Err(Error::Index { k, n });
    }
    if !cone_check(kappas, k) {
        return Err(Error::ConeViolation {
            node: None,
            k,
            kappa: kappas.to_vec(),
        });
    }
    Ok(n as f64 * h_k(kappas, k)? / h_k(kappas, k - 1)?)
}

/// Per-node kinematic and curvature data of a graph.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub n: usize,
    pub lambda: Vec<f64>,
    pub dlambda: Vec<f64>,
    pub ddlambda: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub kappa1: Vec<f64>,
    /// Parallel curvature; equal to `kappa1` when `n = 1` (unused there).
    pub kappa2: Vec<f64>,
    pub mean: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl CurvatureField {
    pub fn compute(surface: &GraphSurface) -> Result<Self> {
        let grid = surface.grid();
        let model = surface.model();
        let n = surface.n();
        let cells = grid.cells();
        let r = surface.r();

        let mut r1 = vec![0.0; cells];
        let mut r2 = vec![0.0; cells];
        radial_derivatives(grid, r, &mut r1, &mut r2);

        let mut field = CurvatureField {
            n,
            lambda: Vec::with_capacity(cells),
            dlambda: Vec::with_capacity(cells),
            ddlambda: Vec::with_capacity(cells),
            v: Vec::with_capacity(cells),
            u: Vec::with_capacity(cells),
            phi1: Vec::with_capacity(cells),
            phi2: Vec::with_capacity(cells),
            kappa1: Vec::with_capacity(cells),
            kappa2: Vec::with_capacity(cells),
            mean: Vec::with_capacity(cells),
            sigma2: Vec::with_capacity(cells),
        };
        let cot = grid.cot();
        let nf = n as f64;
        for i in 0..cells {
            let jet = model.eval(r[i]).map_err(|e| e.at_node(i))?;
            let (lam, dlam) = (jet.lambda, jet.d1);
            let NodeGeometry {
                phi1,
                phi2,
                v,
                k1,
                k2,
            } = NodeGeometry::new(lam, dlam, r1[i], r2[i], cot[i], n);
            let mean = k1 + (nf - 1.0) * k2;
            // sigma_2 of (k1, k2 x (n-1))
            let sigma2 = (nf - 1.0) * k1 * k2 + binomial(n - 1, 2) * k2 * k2;
            field.lambda.push(lam);
            field.dlambda.push(dlam);
            field.ddlambda.push(jet.d2);
            field.v.push(v);
            field.u.push(lam / v);
            field.phi1.push(phi1);
            field.phi2.push(phi2);
            field.kappa1.push(k1);
            field.kappa2.push(k2);
            field.mean.push(mean);
            field.sigma2.push(sigma2);
        }
        for (i, k) in field.kappa1.iter().enumerate() {
            if !k.is_finite() || !field.kappa2[i].is_finite() {
                return Err(Error::NonFinite {
                    what: "principal curvature",
                    node: Some(i),
                });
            }
        }
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn kappa(&self, i: usize) -> AxiKappa {
        AxiKappa::new(self.kappa1[i], self.kappa2[i], self.n)
    }

    /// `H_k` at every node.
    pub fn h_k(&self, k: usize) -> Result<Vec<f64>> {
        (0..self.len()).map(|i| self.kappa(i).h(k)).collect()
    }

    /// The speed's curvature function `F = n H_k / H_{k-1}` at every node.
    pub fn curvature_function(&self, k: usize) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| self.kappa(i).speed_function(k).map_err(|e| e.at_node(i)))
            .collect()
    }

    /// Length of the second fundamental form, `sqrt(k1^2 + (n-1) k2^2)`.
    pub fn second_fundamental_norm(&self, i: usize) -> f64 {
        let nf = self.n as f64;
        if self.n == 1 {
            self.kappa1[i].abs()
        } else {
            (self.kappa1[i].powi(2) + (nf - 1.0) * self.kappa2[i].powi(2)).sqrt()
        }
    }

    /// Smallest principal curvature over all nodes and directions.
    pub fn kappa_min(&self) -> f64 {
        let k1 = self.kappa1.iter().copied().fold(f64::INFINITY, f64::min);
        if self.n == 1 {
            k1
        } else {
            self.kappa2.iter().copied().fold(k1, f64::min)
        }
    }

    /// `min (kappa - 1)`; nonnegative iff the surface is horo-convex.
    pub fn horoconvexity_margin(&self) -> f64 {
        self.kappa_min() - 1.0
    }
}

/// `(v, u, phi')` at every node.
pub fn kinematics(surface: &GraphSurface) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let f = CurvatureField::compute(surface)?;
    Ok((f.v, f.u, f.phi1))
}

/// `(kappa_1, kappa_2)` at every node.
pub fn principal_curvatures(surface: &GraphSurface) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = CurvatureField::compute(surface)?;
    Ok((f.kappa1, f.kappa2))
}
