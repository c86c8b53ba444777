//! Cell-centered grid in the polar angle of `S^n` for axisymmetric data.
//!
//! Nodes sit at `theta_i = (i + 1/2) pi / N`, so the poles are never nodes.
//! Ghost values are filled by even reflection across `theta = 0` and
//! `theta = pi`. For `n = 1` the base is the full circle `[0, 2 pi)` and the
//! grid is periodic.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::sphere_area;

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    theta: Vec<f64>,
    dtheta: f64,
    weights: Vec<f64>,
    cot: Vec<f64>,
}

impl Grid {
    pub fn new(cells: usize, n: usize) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::Parameter(format!(
                "grid needs at least {MIN_CELLS} cells, got {cells}"
            )));
        }
        if n == 0 {
            return Err(Error::Parameter("sphere dimension must be >= 1".into()));
        }
        let span = if n == 1 { 2.0 * PI } else { PI };
        let dtheta = span / cells as f64;
        let theta: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * dtheta).collect();
        let weights = if n == 1 {
            vec![dtheta; cells]
        } else {
            // Exact measure of each zone {theta_{i-1/2} < theta < theta_{i+1/2}}
            // of S^n, so constants integrate to |S^n| up to rounding.
            let omega = sphere_area(n - 1);
            (0..cells)
                .map(|i| {
                    let lo = i as f64 * dtheta;
                    let hi = (i as f64 + 1.0) * dtheta;
                    omega * (sin_power_primitive(n - 1, hi) - sin_power_primitive(n - 1, lo))
                })
                .collect()
        };
        let cot = theta.iter().map(|t| t.cos() / t.sin()).collect();
        Ok(Grid {
            n,
            theta,
            dtheta,
            weights,
            cot,
        })
    }

    pub fn cells(&self) -> usize {
        self.theta.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `cot(theta_i)`, used by the parallel principal curvature.
    pub(crate) fn cot(&self) -> &[f64] {
        &self.cot
    }

    pub fn periodic(&self) -> bool {
        self.n == 1
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.cells() {
            return Err(Error::Size {
                expected: self.cells(),
                actual: f.len(),
            });
        }
        Ok(())
    }

    #[inline]
    fn neighbors(&self, f: &[f64], i: usize) -> (f64, f64) {
        let len = f.len();
        let left = if i > 0 {
            f[i - 1]
        } else if self.periodic() {
            f[len - 1]
        } else {
            f[0]
        };
        let right = if i + 1 < len {
            f[i + 1]
        } else if self.periodic() {
            f[0]
        } else {
            f[len - 1]
        };
        (left, right)
    }

    /// Centered first derivative in `theta`.
    pub fn d1(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut out = vec![0.0; f.len()];
        self.d1_into(f, &mut out);
        Ok(out)
    }

    /// Centered second derivative in `theta`.
    pub fn d2(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut out = vec![0.0; f.len()];
        self.d2_into(f, &mut out);
        Ok(out)
    }

    pub(crate) fn d1_into(&self, f: &[f64], out: &mut [f64]) {
        let inv = 0.5 / self.dtheta;
        for (i, o) in out.iter_mut().enumerate() {
            let (l, r) = self.neighbors(f, i);
            *o = (r - l) * inv;
        }
    }

    pub(crate) fn d2_into(&self, f: &[f64], out: &mut [f64]) {
        let inv = 1.0 / (self.dtheta * self.dtheta);
        for (i, o) in out.iter_mut().enumerate() {
            let (l, r) = self.neighbors(f, i);
            *o = (r - 2.0 * f[i] + l) * inv;
        }
    }

    /// Quadrature of an axisymmetric function over `S^n`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.integrate_unchecked(f))
    }

    pub(crate) fn integrate_unchecked(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Total measure assigned by the quadrature.
    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Antiderivative of `sin^p` vanishing at 0.
fn sin_power_primitive(p: usize, x: f64) -> f64 {
    match p {
        0 => x,
        1 => 1.0 - x.cos(),
        _ => {
            let pf = p as f64;
            -x.sin().powi(p as i32 - 1) * x.cos() / pf
                + (pf - 1.0) / pf * sin_power_primitive(p - 2, x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.theta().iter().map(|&t| f(t)).collect()
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid::new(8, 2).is_err());
        assert!(Grid::new(32, 0).is_err());
    }

    #[test]
    fn nodes_avoid_poles() {
        let g = Grid::new(16, 2).unwrap();
        assert!(g.theta()[0] > 0.0 && g.theta()[15] < PI);
        assert!((g.theta()[0] - PI / 32.0).abs() < 1e-15);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let g = Grid::new(64, 2).unwrap();
        let f = vec![3.25; 64];
        assert!(g.d1(&f).unwrap().iter().all(|&x| x == 0.0));
        assert!(g.d2(&f).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn size_mismatch() {
        let g = Grid::new(32, 2).unwrap();
        assert_eq!(
            g.d1(&[1.0; 31]),
            Err(Error::Size {
                expected: 32,
                actual: 31
            })
        );
        assert!(g.integrate(&[0.0; 33]).is_err());
    }

    #[test]
    fn total_measure_is_sphere_area() {
        for n in 1..=5 {
            let g = Grid::new(100, n).unwrap();
            let exact = sphere_area(n);
            assert!((g.total_measure() - exact).abs() < 1e-12 * exact, "n = {n}");
        }
    }

    #[test]
    fn integrates_odd_function_to_zero() {
        let g = Grid::new(512, 2).unwrap();
        let f = map(&g, f64::cos);
        assert!(g.integrate(&f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cos_squared_integral() {
        // 2 pi int_0^pi cos^2 sin = 4 pi / 3
        let mut errs = vec![];
        for cells in [64, 128] {
            let g = Grid::new(cells, 2).unwrap();
            let f = map(&g, |t| t.cos().powi(2));
            errs.push((g.integrate(&f).unwrap() - 4.0 * PI / 3.0).abs());
        }
        assert!(errs[0] < 1e-2);
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn derivative_of_cosine() {
        let mut errs = vec![];
        for cells in [256, 512] {
            let g = Grid::new(cells, 2).unwrap();
            let d = g.d1(&map(&g, f64::cos)).unwrap();
            let e = g
                .theta()
                .iter()
                .zip(&d)
                .map(|(t, d)| (d + t.sin()).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] <= 1e-4, "{}", errs[0]);
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn second_derivative_of_cos_2theta() {
        let mut errs = vec![];
        for cells in [128, 256] {
            let g = Grid::new(cells, 2).unwrap();
            let d = g.d2(&map(&g, |t| (2.0 * t).cos())).unwrap();
            let e = g
                .theta()
                .iter()
                .zip(&d)
                .map(|(t, d)| (d + 4.0 * (2.0 * t).cos()).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn periodic_circle() {
        let g = Grid::new(128, 1).unwrap();
        let d = g.d1(&map(&g, f64::sin)).unwrap();
        let e = g
            .theta()
            .iter()
            .zip(&d)
            .map(|(t, d)| (d - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(e < 1e-3);
        assert!((g.total_measure() - 2.0 * PI).abs() < 1e-13);
    }
}
