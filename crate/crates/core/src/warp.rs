//! Warping factors `lambda(r)` of the ambient metric `dr^2 + lambda(r)^2 sigma`
//! on `(a, b) x S^n`, together with the radial primitives used by enclosed
//! volume integrals.
//!
//! Four families are supported: the spherical cap (`sin r`), hyperbolic space
//! (`sinh r`), Euclidean space (`r`) and the anti-de-Sitter Schwarzschild
//! manifolds, where `lambda` is only known through
//! `lambda'^2 = 1 + lambda^2 - m lambda^{1-n}` and is tabulated from an ODE
//! solve. The AdS-Schwarzschild radial coordinate is normalized so that the
//! horizon sits at `r = 0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::numeric::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpKind {
    SphericalCap,
    Hyperbolic,
    Euclidean,
    AdsSchwarzschild,
}

impl WarpKind {
    pub fn name(self) -> &'static str {
        match self {
            WarpKind::SphericalCap => "spherical_cap",
            WarpKind::Hyperbolic => "hyperbolic",
            WarpKind::Euclidean => "euclidean",
            WarpKind::AdsSchwarzschild => "ads_schwarzschild",
        }
    }
}

/// `lambda` and its first three radial derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Dense uniform samples of `(lambda, lambda')` on `[0, r_max]`.
///
/// Values between samples come from cubic Hermite interpolation using the
/// exact ODE derivatives at the nodes (`lambda'` for `lambda`, `lambda''` for
/// `lambda'`), which is C^1 and fourth-order accurate.
#[derive(Debug, Clone)]
pub struct WarpTable {
    h: f64,
    lambda: Vec<f64>,
    dlambda: Vec<f64>,
}

impl WarpTable {
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Iterates `(r, lambda, lambda')` over the samples.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.lambda
            .iter()
            .zip(&self.dlambda)
            .enumerate()
            .map(move |(j, (&l, &dl))| (j as f64 * self.h, l, dl))
    }
}

#[derive(Debug, Clone)]
pub struct WarpModel {
    kind: WarpKind,
    n: usize,
    m: f64,
    a: f64,
    b: f64,
    /// `lambda(a)`; nonzero only for AdS-Schwarzschild with `m > 0`.
    lambda_a: f64,
    table: Option<WarpTable>,
}

const TABLE_BUDGET: f64 = 1e-9;
const TABLE_MIN_SPACING: f64 = 1.0 / 16384.0;

impl WarpModel {
    pub fn spherical_cap(n: usize) -> Result<Self> {
        Self::closed_form(WarpKind::SphericalCap, n, FRAC_PI_2)
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::closed_form(WarpKind::Hyperbolic, n, f64::INFINITY)
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::closed_form(WarpKind::Euclidean, n, f64::INFINITY)
    }

    fn closed_form(kind: WarpKind, n: usize, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("dimension n must be at least 1".into()));
        }
        Ok(WarpModel {
            kind,
            n,
            m: 0.0,
            a: 0.0,
            b,
            lambda_a: 0.0,
            table: None,
        })
    }

    /// Builds the anti-de-Sitter Schwarzschild model with mass `m` on
    /// `(0, r_max)`, horizon at `r = 0`.
    ///
    /// The horizon value `lambda_0` solves `1 + lambda^2 - m lambda^{1-n} = 0`.
    /// Since `lambda' = 0` there, the first-order relation is degenerate at the
    /// horizon; the table is instead integrated from the equivalent regular
    /// second-order equation `lambda'' = lambda + m (n-1)/2 lambda^{-n}` with
    /// `(lambda, lambda') = (lambda_0, 0)`, for which the defining relation is
    /// a conserved quantity. `m = 0` is accepted and yields `sinh`.
    pub fn ads_schwarzschild(n: usize, m: f64, r_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter("AdS-Schwarzschild requires n >= 2".into()));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::Parameter(format!("mass m = {m} must be >= 0")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Parameter(format!("r_max = {r_max} must be > 0")));
        }
        let lambda0 = ads_horizon(n, m)?;
        let rhs = AdsRhs { n, m };
        let start = if m == 0.0 { (0.0, 1.0) } else { (lambda0, 0.0) };

        let mut h = 1.0 / 64.0;
        let mut coarse = rhs.tabulate(start, h, r_max)?;
        let table = loop {
            let fine = rhs.tabulate(start, h / 2.0, r_max)?;
            let err = interpolation_defect(&coarse, &fine, &rhs);
            if err <= TABLE_BUDGET {
                break fine;
            }
            if h / 2.0 <= TABLE_MIN_SPACING {
                return Err(Error::Convergence {
                    what: "AdS-Schwarzschild table",
                    detail: format!("interpolation defect {err:e} at spacing {h}"),
                });
            }
            h /= 2.0;
            coarse = fine;
        };

        Ok(WarpModel {
            kind: WarpKind::AdsSchwarzschild,
            n,
            m,
            a: 0.0,
            b: r_max,
            lambda_a: lambda0,
            table: Some(table),
        })
    }

    pub fn kind(&self) -> WarpKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `lambda(a)`: the horizon value for AdS-Schwarzschild, zero otherwise.
    pub fn horizon_lambda(&self) -> f64 {
        self.lambda_a
    }

    pub fn table(&self) -> Option<&WarpTable> {
        self.table.as_ref()
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.a && r < self.b
    }

    fn check(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(Error::Domain {
                r,
                a: self.a,
                b: self.b,
                node: None,
            })
        }
    }

    /// Whether `lambda'' >= 0` holds on the whole domain.
    pub fn nonnegative_radial_curvature(&self) -> bool {
        !matches!(self.kind, WarpKind::SphericalCap)
    }

    pub fn eval(&self, r: f64) -> Result<Jet> {
        self.check(r)?;
        Ok(match self.kind {
            WarpKind::SphericalCap => {
                let (s, c) = r.sin_cos();
                Jet {
                    lambda: s,
                    d1: c,
                    d2: -s,
                    d3: -c,
                }
            }
            WarpKind::Hyperbolic => {
                // One exponential instead of two; exp_m1 keeps sinh accurate near 0.
                let em1 = r.exp_m1();
                let inv = 1.0 / (1.0 + em1);
                let s = 0.5 * (em1 + em1 * inv);
                let c = s + inv;
                Jet {
                    lambda: s,
                    d1: c,
                    d2: s,
                    d3: c,
                }
            }
            WarpKind::Euclidean => Jet {
                lambda: r,
                d1: 1.0,
                d2: 0.0,
                d3: 0.0,
            },
            WarpKind::AdsSchwarzschild => {
                let table = self.table.as_ref().expect("AdS model carries a table");
                let rhs = AdsRhs {
                    n: self.n,
                    m: self.m,
                };
                let (lambda, d1) = table.interpolate(r, &rhs);
                let (d2, d3) = rhs.higher(lambda, d1);
                Jet { lambda, d1, d2, d3 }
            }
        })
    }

    /// `Lambda(s) = int_a^s lambda' lambda^n`, i.e. the radial part of the
    /// weighted volume `int_Omega lambda' dN`. Exact for every family since
    /// the integrand is `d/ds lambda^{n+1}/(n+1)`.
    pub fn weighted_volume_primitive(&self, s: f64) -> Result<f64> {
        if s == self.a {
            return Ok(0.0);
        }
        let jet = self.eval(s)?;
        Ok(self.lambda_power_primitive(jet.lambda))
    }

    fn lambda_power_primitive(&self, lambda: f64) -> f64 {
        let p = self.n as i32 + 1;
        (lambda.powi(p) - self.lambda_a.powi(p)) / p as f64
    }

    /// `K(s) = int_a^s lambda' lambda'' lambda^{n-1}`, the radial part of
    /// `int_Omega lambda' lambda'' / lambda dN`.
    pub fn curvature_weight_primitive(&self, s: f64) -> Result<f64> {
        if s == self.a {
            return Ok(0.0);
        }
        let jet = self.eval(s)?;
        let big_lambda = self.lambda_power_primitive(jet.lambda);
        Ok(match self.kind {
            WarpKind::Euclidean => 0.0,
            WarpKind::Hyperbolic => big_lambda,
            WarpKind::SphericalCap => -big_lambda,
            WarpKind::AdsSchwarzschild => {
                // lambda'' = lambda + c lambda^{-n}, so the integrand splits
                // into lambda' lambda^n + c lambda'/lambda.
                let c = self.m * (self.n as f64 - 1.0) / 2.0;
                if c == 0.0 {
                    big_lambda
                } else {
                    big_lambda + c * (jet.lambda / self.lambda_a).ln()
                }
            }
        })
    }
}

/// Horizon value of `lambda`: the positive root of `1 + x^2 - m x^{1-n}`.
/// Zero when `m = 0`.
pub fn ads_horizon(n: usize, m: f64) -> Result<f64> {
    if m == 0.0 {
        return Ok(0.0);
    }
    let e = 1 - n as i32;
    let p = |x: f64| {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            1.0 + x * x - m * x.powi(e)
        }
    };
    // p increases in x and p(m^{1/(n-1)}) = m^{2/(n-1)} > 0.
    let hi = m.powf(1.0 / (n as f64 - 1.0));
    bisect(p, 0.0, hi, 0.0, "AdS-Schwarzschild horizon")
}

#[derive(Debug, Clone, Copy)]
struct AdsRhs {
    n: usize,
    m: f64,
}

impl AdsRhs {
    fn accel(&self, lambda: f64) -> f64 {
        if self.m == 0.0 {
            lambda
        } else {
            lambda + 0.5 * self.m * (self.n as f64 - 1.0) * lambda.powi(-(self.n as i32))
        }
    }

    /// `(lambda'', lambda''')` from differentiating the defining relation.
    fn higher(&self, lambda: f64, d1: f64) -> (f64, f64) {
        let d2 = self.accel(lambda);
        let nf = self.n as f64;
        let d3 = if self.m == 0.0 {
            d1
        } else {
            (1.0 - 0.5 * self.m * nf * (nf - 1.0) * lambda.powi(-(self.n as i32) - 1)) * d1
        };
        (d2, d3)
    }

    fn f(&self, y: [f64; 2]) -> [f64; 2] {
        [y[1], self.accel(y[0])]
    }

    /// Integrates from `r = 0` with adaptive Dormand-Prince 5(4), landing
    /// exactly on each multiple of `h` up to `r_max`.
    fn tabulate(&self, start: (f64, f64), h: f64, r_max: f64) -> Result<WarpTable> {
        let count = (r_max / h).ceil() as usize + 1;
        let mut lambda = Vec::with_capacity(count);
        let mut dlambda = Vec::with_capacity(count);
        let mut y = [start.0, start.1];
        lambda.push(y[0]);
        dlambda.push(y[1]);
        let mut step = h.min(1e-6 + 1e-3 * h);
        for _ in 1..count {
            let mut remaining = h;
            while remaining > 0.0 {
                let trial = step.min(remaining);
                let (y_new, err) = dopri_step(self, y, trial);
                let scale = 1e-15 + 1e-13 * y_new[0].abs().max(y_new[1].abs());
                let ratio = err / scale;
                if ratio <= 1.0 {
                    y = y_new;
                    remaining -= trial;
                    if remaining < 1e-15 * h {
                        remaining = 0.0;
                    }
                }
                let grow = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                step = trial * grow;
                if step < 1e-18 {
                    return Err(Error::Convergence {
                        what: "AdS-Schwarzschild ODE",
                        detail: format!("step size underflow near lambda = {}", y[0]),
                    });
                }
            }
            if !(y[0].is_finite() && y[1].is_finite()) {
                return Err(Error::Convergence {
                    what: "AdS-Schwarzschild ODE",
                    detail: "non-finite state".into(),
                });
            }
            lambda.push(y[0]);
            dlambda.push(y[1]);
        }
        Ok(WarpTable { h, lambda, dlambda })
    }
}

fn dopri_step(rhs: &AdsRhs, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // Difference between the fifth- and fourth-order weights.
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs.f(y);
    for s in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            ys[0] += h * C[s][j] * kj[0];
            ys[1] += h * C[s][j] * kj[1];
        }
        k[s + 1] = rhs.f(ys);
    }
    // The last stage point is the fifth-order solution (FSAL).
    let mut y5 = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        y5[0] += h * C[5][j] * kj[0];
        y5[1] += h * C[5][j] * kj[1];
    }
    let mut err = [0.0f64; 2];
    for (j, kj) in k.iter().enumerate() {
        err[0] += h * E[j] * kj[0];
        err[1] += h * E[j] * kj[1];
    }
    (y5, err[0].abs().max(err[1].abs()))
}

fn hermite(t: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

impl WarpTable {
    fn interpolate(&self, r: f64, rhs: &AdsRhs) -> (f64, f64) {
        let last = self.lambda.len() - 2;
        let j = ((r / self.h).floor() as usize).min(last);
        let t = (r - j as f64 * self.h) / self.h;
        let (l0, l1) = (self.lambda[j], self.lambda[j + 1]);
        let (d0, d1) = (self.dlambda[j], self.dlambda[j + 1]);
        let lambda = hermite(t, self.h, l0, l1, d0, d1);
        let dlambda = hermite(t, self.h, d0, d1, rhs.accel(l0), rhs.accel(l1));
        (lambda, dlambda)
    }
}

/// Largest scaled mismatch between the coarse table interpolated at its
/// interval midpoints and the fine table's samples there. The first interval
/// is skipped: for very small masses the solution varies on the scale of the
/// horizon value there, which no fixed spacing resolves.
fn interpolation_defect(coarse: &WarpTable, fine: &WarpTable, rhs: &AdsRhs) -> f64 {
    let mut worst = 0.0f64;
    for j in 1..coarse.lambda.len() - 1 {
        let r = (j as f64 + 0.5) * coarse.h;
        let (l, dl) = coarse.interpolate(r, rhs);
        let (lf, dlf) = (fine.lambda[2 * j + 1], fine.dlambda[2 * j + 1]);
        worst = worst
            .max((l - lf).abs() / lf.abs().max(1.0))
            .max((dl - dlf).abs() / dlf.abs().max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spherical_cap_values() {
        let m = WarpModel::spherical_cap(2).unwrap();
        let j = m.eval(PI / 6.0).unwrap();
        assert!((j.lambda - 0.5).abs() < 1e-15);
        assert!((j.d1 - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(m.eval(FRAC_PI_2).is_err());
        assert!(m.eval(0.0).is_err());
    }

    #[test]
    fn horizon_values() {
        let l = ads_horizon(2, 1.0).unwrap();
        assert!((l - 0.682_327_803_828_019_3).abs() < 1e-14);
        // 1 + x^2 - 2 x^{-2} = 0  <=>  x^4 + x^2 - 2 = 0  <=>  x = 1
        assert!((ads_horizon(3, 2.0).unwrap() - 1.0).abs() < 1e-14);
        // x^4 + x^2 - 4 = 0
        let expected = ((-1.0 + 17f64.sqrt()) / 2.0).sqrt();
        assert!((ads_horizon(3, 4.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.249_621_067_687_653).abs() < 1e-14);
    }

    #[test]
    fn euclidean_primitives() {
        let m = WarpModel::euclidean(2).unwrap();
        assert!((m.weighted_volume_primitive(2.0).unwrap() - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(m.curvature_weight_primitive(2.0).unwrap(), 0.0);
        assert_eq!(m.weighted_volume_primitive(0.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_primitives() {
        let m = WarpModel::hyperbolic(2).unwrap();
        let expected = 0.541_022_612_206_541_5;
        assert!((m.weighted_volume_primitive(1.0).unwrap() - expected).abs() < 1e-14);
        assert!((m.curvature_weight_primitive(1.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn ads_rejects_bad_parameters() {
        assert!(WarpModel::ads_schwarzschild(1, 1.0, 3.0).is_err());
        assert!(WarpModel::ads_schwarzschild(2, -1.0, 3.0).is_err());
        assert!(WarpModel::ads_schwarzschild(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn ads_domain_error() {
        let m = WarpModel::ads_schwarzschild(2, 1.0, 2.0).unwrap();
        assert!(matches!(m.eval(2.5), Err(Error::Domain { .. })));
        assert!(matches!(m.eval(-0.1), Err(Error::Domain { .. })));
    }
}
