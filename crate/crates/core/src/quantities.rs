//! Global functionals of a graph, the discrete forms of the Minkowski and
//! `sigma_2` integral identities, slice profiles and the inequality audit.
//!
//! Surface integrals use the graph area element `dmu = v lambda^n dsigma`;
//! enclosed-region integrals `int_Omega f dN` reduce to `int_{S^n} P(r) dsigma`
//! with the radial primitives supplied by the warp model.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CurvatureField, GraphSurface};
use crate::numeric::{bisect, sphere_area};
use crate::warp::{WarpKind, WarpModel};

/// All global functionals of one surface, from a single curvature pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub area: f64,
    /// `int_Omega lambda' dN`
    pub weighted_volume: f64,
    /// `int_Sigma lambda' dmu`
    pub weighted_area: f64,
    /// `int_Sigma H lambda' dmu`
    pub mean_weighted: f64,
    /// `2n int_Omega lambda' lambda'' / lambda dN`
    pub curvature_volume: f64,
    /// `mean_weighted - curvature_volume`
    pub q: f64,
    /// `int_Sigma (n lambda' - H u) dmu`, zero in the continuum.
    pub minkowski_residual: f64,
    /// Left minus right side of the `sigma_2` integral identity.
    pub sigma2_residual: f64,
    /// `int_Sigma (n lambda'/H - u) dmu`; `None` unless mean-convex.
    pub hk_deficit: Option<f64>,
    /// `int_Sigma (2 sigma_2 u - (n-1) H lambda') dmu`.
    pub min2_gap: f64,
}

impl Functionals {
    pub fn evaluate(surface: &GraphSurface, field: &CurvatureField) -> Result<Self> {
        let grid = surface.grid();
        let model = surface.model();
        let n = surface.n();
        let nf = n as f64;
        let cells = grid.cells();
        let w = grid.weights();

        let mut acc = Functionals {
            area: 0.0,
            weighted_volume: 0.0,
            weighted_area: 0.0,
            mean_weighted: 0.0,
            curvature_volume: 0.0,
            q: 0.0,
            minkowski_residual: 0.0,
            sigma2_residual: 0.0,
            hk_deficit: Some(0.0),
            min2_gap: 0.0,
        };
        let mut s2_lhs = 0.0;
        let mut s2_rhs = 0.0;
        #[allow(clippy::needless_range_loop)] // parallel per-node arrays
        for i in 0..cells {
            let r = surface.r()[i];
            let (lam, dlam, ddlam) = (field.lambda[i], field.dlambda[i], field.ddlambda[i]);
            let (v, u, h) = (field.v[i], field.u[i], field.mean[i]);
            let dmu = w[i] * v * lam.powi(n as i32);
            acc.area += dmu;
            acc.weighted_volume += w[i] * model.weighted_volume_primitive(r)?;
            acc.curvature_volume += w[i] * model.curvature_weight_primitive(r)?;
            acc.weighted_area += dlam * dmu;
            acc.mean_weighted += h * dlam * dmu;
            acc.minkowski_residual += (nf * dlam - h * u) * dmu;

            let lhs = (nf - 1.0) * h * dlam - 2.0 * field.sigma2[i] * u;
            // -(n-1) [lambda''/lambda + (1 - lambda'^2)/lambda^2] lambda |grad r|^2 <d_r, nu>
            // with |grad r|^2 = 1 - 1/v^2 and <d_r, nu> = 1/v.
            let coeff = ddlam / lam + (1.0 - dlam * dlam) / (lam * lam);
            let grad2 = field.phi1[i] * field.phi1[i] / (v * v);
            let rhs = -(nf - 1.0) * coeff * lam * grad2 / v;
            s2_lhs += lhs * dmu;
            s2_rhs += rhs * dmu;

            acc.hk_deficit = match acc.hk_deficit {
                Some(d) if h > 0.0 => Some(d + (nf * dlam / h - u) * dmu),
                _ => None,
            };
        }
        acc.curvature_volume *= 2.0 * nf;
        acc.q = acc.mean_weighted - acc.curvature_volume;
        acc.sigma2_residual = s2_lhs - s2_rhs;
        acc.min2_gap = -s2_lhs;
        Ok(acc)
    }

    pub fn of(surface: &GraphSurface) -> Result<Self> {
        let field = CurvatureField::compute(surface)?;
        Functionals::evaluate(surface, &field)
    }
}

pub fn area(surface: &GraphSurface) -> Result<f64> {
    Ok(Functionals::of(surface)?.area)
}

pub fn weighted_volume(surface: &GraphSurface) -> Result<f64> {
    let grid = surface.grid();
    let model = surface.model();
    let p = surface
        .r()
        .iter()
        .map(|&r| model.weighted_volume_primitive(r))
        .collect::<Result<Vec<f64>>>()?;
    grid.integrate(&p)
}

pub fn weighted_area(surface: &GraphSurface) -> Result<f64> {
    Ok(Functionals::of(surface)?.weighted_area)
}

pub fn mean_weighted(surface: &GraphSurface) -> Result<f64> {
    Ok(Functionals::of(surface)?.mean_weighted)
}

pub fn curvature_volume(surface: &GraphSurface) -> Result<f64> {
    let grid = surface.grid();
    let model = surface.model();
    let p = surface
        .r()
        .iter()
        .map(|&r| model.curvature_weight_primitive(r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(2.0 * surface.n() as f64 * grid.integrate(&p)?)
}

pub fn minkowski_residual(surface: &GraphSurface) -> Result<f64> {
    Ok(Functionals::of(surface)?.minkowski_residual)
}

pub fn sigma2_identity_residual(surface: &GraphSurface) -> Result<f64> {
    Ok(Functionals::of(surface)?.sigma2_residual)
}

/// `int_Sigma (n lambda'/H - u) dmu`, requiring `H > 0` everywhere.
pub fn heintze_karcher_deficit(surface: &GraphSurface) -> Result<f64> {
    let field = CurvatureField::compute(surface)?;
    require_mean_convex(&field)?;
    Ok(Functionals::evaluate(surface, &field)?
        .hk_deficit
        .expect("mean-convex surfaces have a deficit"))
}

fn require_mean_convex(field: &CurvatureField) -> Result<()> {
    match field.mean.iter().position(|&h| h <= 0.0) {
        Some(node) => Err(Error::MeanConvexity {
            node,
            h: field.mean[node],
        }),
        None => Ok(()),
    }
}

/// Rates of change of the weighted volume, the area and `int H lambda'`
/// predicted by the first-variation formulas for a normal speed `speed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationRates {
    pub weighted_volume: f64,
    pub area: f64,
    pub mean_weighted: f64,
    pub curvature_volume: f64,
}

pub fn variation_rates(
    surface: &GraphSurface,
    field: &CurvatureField,
    speed: &[f64],
) -> Result<VariationRates> {
    let grid = surface.grid();
    if speed.len() != grid.cells() {
        return Err(Error::Size {
            expected: grid.cells(),
            actual: speed.len(),
        });
    }
    let n = surface.n();
    let nf = n as f64;
    let mut out = VariationRates {
        weighted_volume: 0.0,
        area: 0.0,
        mean_weighted: 0.0,
        curvature_volume: 0.0,
    };
    for (i, &f) in speed.iter().enumerate() {
        let (lam, dlam, ddlam) = (field.lambda[i], field.dlambda[i], field.ddlambda[i]);
        let dmu = grid.weights()[i] * field.v[i] * lam.powi(n as i32);
        let h = field.mean[i];
        out.weighted_volume += dlam * f * dmu;
        out.area += h * f * dmu;
        // <grad lambda', nu> = lambda'' <d_r, nu> = (lambda''/lambda) u
        let normal_grad = ddlam / lam * field.u[i];
        out.mean_weighted += (2.0 * field.sigma2[i] * dlam + 2.0 * h * normal_grad) * f * dmu;
        out.curvature_volume += 2.0 * nf * dlam * ddlam / lam * f * dmu;
    }
    Ok(out)
}

/// Slice values `A(s)`, `W(s)` and `Q(s)` on a ladder of radii.
#[derive(Debug, Clone)]
pub struct SliceProfile {
    model: Arc<WarpModel>,
    n: usize,
    s: Vec<f64>,
    area: Vec<f64>,
    wvol: Vec<f64>,
    q: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceValues {
    pub area: f64,
    pub weighted_volume: f64,
    pub q: f64,
}

/// Closed-form slice values at radius `s`.
pub fn slice_values(model: &WarpModel, s: f64) -> Result<SliceValues> {
    let n = model.n();
    let nf = n as f64;
    let omega = sphere_area(n);
    let jet = model.eval(s)?;
    Ok(SliceValues {
        area: omega * jet.lambda.powi(n as i32),
        weighted_volume: omega * model.weighted_volume_primitive(s)?,
        q: nf * omega * jet.d1 * jet.d1 * jet.lambda.powi(n as i32 - 1)
            - 2.0 * nf * omega * model.curvature_weight_primitive(s)?,
    })
}

impl SliceProfile {
    /// Tabulates the profile on `samples` (strictly increasing radii inside
    /// the model's domain).
    pub fn build(model: Arc<WarpModel>, samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Parameter(
                "slice profile needs at least two radii".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "slice radii must be strictly increasing".into(),
            ));
        }
        let mut area = Vec::with_capacity(samples.len());
        let mut wvol = Vec::with_capacity(samples.len());
        let mut q = Vec::with_capacity(samples.len());
        for &s in samples {
            let sv = slice_values(&model, s)?;
            area.push(sv.area);
            wvol.push(sv.weighted_volume);
            q.push(sv.q);
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&area) || !increasing(&wvol) {
            return Err(Error::Geometry(
                "slice area and weighted volume must increase with the radius".into(),
            ));
        }
        // dQ/ds = n(n-1)|S^n| lambda'^3 lambda^{n-2} >= 0 for every model.
        let tol = 1e-12 * q.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if q.windows(2).any(|w| w[1] < w[0] - tol) {
            return Err(Error::Geometry("slice functional Q is not monotone".into()));
        }
        Ok(SliceProfile {
            n: model.n(),
            model,
            s: samples.to_vec(),
            area,
            wvol,
            q,
        })
    }

    /// Uniform ladder of `count` radii on `[lo, hi]`.
    pub fn uniform(model: Arc<WarpModel>, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(Error::Parameter(format!(
                "invalid ladder [{lo}, {hi}] with {count} samples"
            )));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let samples: Vec<f64> = (0..count).map(|j| lo + j as f64 * step).collect();
        SliceProfile::build(model, &samples)
    }

    pub fn model(&self) -> &Arc<WarpModel> {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radii(&self) -> &[f64] {
        &self.s
    }

    pub fn areas(&self) -> &[f64] {
        &self.area
    }

    pub fn weighted_volumes(&self) -> &[f64] {
        &self.wvol
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    /// Radius of the slice whose `which` value equals `target`.
    fn invert(&self, table: &[f64], target: f64, pick: fn(&SliceValues) -> f64) -> Result<f64> {
        let (lo, hi) = (table[0], *table.last().unwrap());
        if !(target >= lo && target <= hi) {
            return Err(Error::Range {
                value: target,
                lo,
                hi,
            });
        }
        let j = table
            .partition_point(|&x| x <= target)
            .clamp(1, table.len() - 1);
        let (s0, s1) = (self.s[j - 1], self.s[j]);
        let model = &self.model;
        bisect(
            |s| {
                slice_values(model, s)
                    .map(|sv| pick(&sv) - target)
                    .unwrap_or(f64::NAN)
            },
            s0,
            s1,
            0.0,
            "slice profile inversion",
        )
    }

    /// Radius of the slice with area `area`.
    pub fn radius_for_area(&self, area: f64) -> Result<f64> {
        self.invert(&self.area, area, |sv| sv.area)
    }

    /// Radius of the slice with weighted volume `wvol`.
    pub fn radius_for_weighted_volume(&self, wvol: f64) -> Result<f64> {
        self.invert(&self.wvol, wvol, |sv| sv.weighted_volume)
    }

    /// `xi_1 = Q o A^{-1}`.
    pub fn xi1(&self, area: f64) -> Result<f64> {
        let s = self.radius_for_area(area)?;
        Ok(slice_values(&self.model, s)?.q)
    }

    /// `xi_0 = Q o W^{-1}`.
    pub fn xi0(&self, wvol: f64) -> Result<f64> {
        let s = self.radius_for_weighted_volume(wvol)?;
        Ok(slice_values(&self.model, s)?.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`
    pub gap: f64,
    pub slack: f64,
    /// Whether the hypotheses of the inequality hold for this surface.
    pub applicable: bool,
    /// Comparison lines are reported but are not the claims under audit.
    pub informational: bool,
    pub notes: String,
}

impl InequalityRecord {
    fn new(name: &'static str, lhs: f64, rhs: f64, slack: f64) -> Self {
        InequalityRecord {
            name,
            lhs,
            rhs,
            gap: lhs - rhs,
            slack,
            applicable: true,
            informational: false,
            notes: String::new(),
        }
    }

    /// `gap >= -slack`.
    pub fn holds(&self) -> bool {
        self.gap >= -self.slack
    }
}

/// Default discretization slack `max(1e-9, 10 dtheta^2 |lhs|)`.
pub fn default_slack(dtheta: f64, lhs: f64) -> f64 {
    (10.0 * dtheta * dtheta * lhs.abs()).max(1e-9)
}

/// Evaluates the weighted Minkowski and isoperimetric type inequalities on a
/// mean-convex graph:
///
/// 1. `Q >= xi_1(|Sigma|)`
/// 2. `Q >= xi_0(int_Omega lambda')`
/// 3. hyperbolic: `int H lambda' - n(n+1) W >= n |S^n|^{2/(n+1)} ((n+1) W)^{(n-1)/(n+1)}`
/// 4. hyperbolic, horo-convex: `int lambda' dmu >= sqrt(((n+1)W)^2 + |S^n|^{2/(n+1)} ((n+1)W)^{2n/(n+1)})`
/// 5. the inverse mean curvature flow comparison bound, as information.
///
/// Here `Q = int H lambda' - 2n int_Omega lambda' lambda''/lambda` and `W` is
/// the weighted volume.
pub fn inequality_report(
    surface: &GraphSurface,
    profile: &SliceProfile,
) -> Result<Vec<InequalityRecord>> {
    let model = surface.model();
    if model.kind() != profile.model().kind() || model.n() != profile.n() {
        return Err(Error::Parameter(
            "slice profile was built for a different ambient model".into(),
        ));
    }
    let field = CurvatureField::compute(surface)?;
    require_mean_convex(&field)?;
    let f = Functionals::evaluate(surface, &field)?;
    let dtheta = surface.grid().dtheta();
    let n = surface.n();
    let nf = n as f64;
    let omega = sphere_area(n);
    let kind = model.kind();
    let claimed_model = matches!(kind, WarpKind::Hyperbolic | WarpKind::AdsSchwarzschild);

    let mut out = Vec::new();

    let mut rec = InequalityRecord::new(
        "q_vs_xi1_area",
        f.q,
        profile.xi1(f.area)?,
        default_slack(dtheta, f.q),
    );
    rec.applicable = claimed_model;
    if !claimed_model {
        rec.notes = format!(
            "claimed only for hyperbolic and AdS-Schwarzschild, not {}",
            kind.name()
        );
    }
    out.push(rec);

    let mut rec = InequalityRecord::new(
        "q_vs_xi0_weighted_volume",
        f.q,
        profile.xi0(f.weighted_volume)?,
        default_slack(dtheta, f.q),
    );
    rec.applicable = claimed_model;
    if !claimed_model {
        rec.notes = format!(
            "claimed only for hyperbolic and AdS-Schwarzschild, not {}",
            kind.name()
        );
    }
    out.push(rec);

    let w_scaled = (nf + 1.0) * f.weighted_volume;
    let shifted = f.mean_weighted - nf * (nf + 1.0) * f.weighted_volume;

    if kind == WarpKind::Hyperbolic {
        let rhs = nf * omega.powf(2.0 / (nf + 1.0)) * w_scaled.powf((nf - 1.0) / (nf + 1.0));
        out.push(InequalityRecord::new(
            "hyperbolic_weighted_minkowski",
            shifted,
            rhs,
            default_slack(dtheta, shifted),
        ));

        let margin = field.horoconvexity_margin();
        let rhs = (w_scaled * w_scaled
            + omega.powf(2.0 / (nf + 1.0)) * w_scaled.powf(2.0 * nf / (nf + 1.0)))
        .sqrt();
        let mut rec = InequalityRecord::new(
            "horoconvex_weighted_isoperimetric",
            f.weighted_area,
            rhs,
            default_slack(dtheta, f.weighted_area),
        );
        rec.applicable = margin >= 0.0;
        rec.notes = format!("horo-convexity margin {margin:.6e}");
        out.push(rec);
    }

    if claimed_model {
        let horizon_area = omega * model.horizon_lambda().powi(n as i32);
        let e = (nf - 1.0) / nf;
        let rhs = nf * omega.powf(1.0 / nf) * (f.area.powf(e) - horizon_area.powf(e));
        let mut rec = InequalityRecord::new(
            if kind == WarpKind::Hyperbolic {
                "imcf_comparison_hyperbolic"
            } else {
                "imcf_comparison_horizon"
            },
            shifted,
            rhs,
            default_slack(dtheta, shifted),
        );
        rec.informational = true;
        rec.notes = format!("horizon area {horizon_area:.6e}");
        out.push(rec);
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::initdata;
    use std::f64::consts::PI;

    fn hyperbolic(cells: usize) -> (Arc<WarpModel>, Arc<Grid>) {
        (
            Arc::new(WarpModel::hyperbolic(2).unwrap()),
            Arc::new(Grid::new(cells, 2).unwrap()),
        )
    }

    #[test]
    fn hyperbolic_slice_functionals() {
        let (m, g) = hyperbolic(1024);
        let s = initdata::slice(m, g, 1.0).unwrap();
        let f = Functionals::of(&s).unwrap();
        let (sh, ch) = (1.0f64.sinh(), 1.0f64.cosh());
        assert!((f.area - 4.0 * PI * sh * sh).abs() < 1e-12 * f.area);
        assert!((f.area - 17.355_387_381_771_44).abs() < 1e-10);
        assert!((f.weighted_volume - 6.798_690_655_736_121).abs() < 1e-10);
        assert!((f.mean_weighted - 70.328_171_425_947_3).abs() < 1e-9);
        assert!((f.curvature_volume - 27.194_762_622_944_48).abs() < 1e-9);
        assert!((f.mean_weighted - 8.0 * PI * ch * ch * sh).abs() < 1e-10);
        assert!(f.minkowski_residual.abs() < 1e-12);
        assert!(f.sigma2_residual.abs() < 1e-12);
        assert!(f.hk_deficit.unwrap().abs() < 1e-12);
    }

    #[test]
    fn euclidean_curvature_volume_vanishes() {
        let m = Arc::new(WarpModel::euclidean(2).unwrap());
        let g = Arc::new(Grid::new(64, 2).unwrap());
        let s = initdata::perturbed_slice(m, g, 2.0, 0.3, 3).unwrap();
        assert_eq!(curvature_volume(&s).unwrap(), 0.0);
    }

    #[test]
    fn weighted_volume_monotone_in_radius() {
        let (m, g) = hyperbolic(64);
        let a = initdata::perturbed_slice(m.clone(), g.clone(), 1.0, 0.1, 2).unwrap();
        let bumped: Vec<f64> = a.r().iter().map(|r| r + 0.01).collect();
        let b = a.with_radii(bumped, 0.0).unwrap();
        assert!(weighted_volume(&b).unwrap() > weighted_volume(&a).unwrap());
        // Limit of small slices.
        let tiny = initdata::slice(m, g, 1e-6).unwrap();
        assert!(weighted_volume(&tiny).unwrap() < 1e-16);
    }

    #[test]
    fn single_functionals_agree_with_bundle() {
        let (m, g) = hyperbolic(128);
        let s = initdata::perturbed_slice(m, g, 1.0, 0.1, 2).unwrap();
        let f = Functionals::of(&s).unwrap();
        assert_eq!(weighted_volume(&s).unwrap(), f.weighted_volume);
        assert!((curvature_volume(&s).unwrap() - f.curvature_volume).abs() < 1e-12);
        assert_eq!(area(&s).unwrap(), f.area);
        assert_eq!(heintze_karcher_deficit(&s).unwrap(), f.hk_deficit.unwrap());
    }

    #[test]
    fn deficit_positive_off_slices() {
        let (m, g) = hyperbolic(512);
        let s = initdata::perturbed_slice(m, g, 1.0, 0.1, 2).unwrap();
        assert!(heintze_karcher_deficit(&s).unwrap() > 0.0);
    }

    #[test]
    fn deficit_requires_mean_convexity() {
        // A deep mode-6 ripple on a small slice makes H negative somewhere.
        let m = Arc::new(WarpModel::euclidean(2).unwrap());
        let g = Arc::new(Grid::new(256, 2).unwrap());
        let s = initdata::perturbed_slice(m, g, 1.0, 0.3, 8).unwrap();
        assert!(matches!(
            heintze_karcher_deficit(&s),
            Err(Error::MeanConvexity { .. })
        ));
    }

    #[test]
    fn xi0_at_unit_slice() {
        let (m, _) = hyperbolic(16);
        let p = SliceProfile::uniform(m, 0.05, 3.0, 200).unwrap();
        let w = 4.0 * PI * 1.0f64.sinh().powi(3) / 3.0;
        let q = p.xi0(w).unwrap();
        assert!((q - 43.133_408_803_002_82).abs() < 1e-9, "{q}");
    }

    #[test]
    fn profile_round_trips() {
        for model in [
            WarpModel::hyperbolic(2).unwrap(),
            WarpModel::euclidean(3).unwrap(),
            WarpModel::spherical_cap(2).unwrap(),
        ] {
            let hi = if model.kind() == WarpKind::SphericalCap {
                1.5
            } else {
                3.0
            };
            let p = SliceProfile::uniform(Arc::new(model), 0.1, hi, 100).unwrap();
            for (j, &s) in p.radii().iter().enumerate() {
                let q = p.q_values()[j];
                let scale = q.abs().max(1.0);
                assert!(
                    (q - p.xi1(p.areas()[j]).unwrap()).abs() < 1e-8 * scale,
                    "s = {s}"
                );
                assert!((q - p.xi0(p.weighted_volumes()[j]).unwrap()).abs() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn xi_out_of_range() {
        let (m, _) = hyperbolic(16);
        let p = SliceProfile::uniform(m, 0.5, 1.5, 20).unwrap();
        assert!(matches!(p.xi1(1e6), Err(Error::Range { .. })));
        assert!(matches!(p.xi0(0.0), Err(Error::Range { .. })));
    }

    #[test]
    fn profile_rejects_bad_ladders() {
        let (m, _) = hyperbolic(16);
        assert!(SliceProfile::build(m.clone(), &[1.0]).is_err());
        assert!(SliceProfile::build(m, &[1.0, 0.5]).is_err());
    }
}
