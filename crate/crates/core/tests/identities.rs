//! Discrete integral identities (Minkowski, the sigma_2 identity,
//! Heintze-Karcher, Min2) and first-variation formulas, checked for exact
//! equality cases and for second-order convergence on smooth data.

mod common;

use std::sync::Arc;

use common::rel;
use warpflow_core::monitors::refinement_order;
use warpflow_core::quantities::{self, variation_rates, Functionals};
use warpflow_core::{flow, initdata, CurvatureField, GraphSurface, Grid, WarpModel};

fn models() -> Vec<Arc<WarpModel>> {
    vec![
        Arc::new(WarpModel::hyperbolic(2).unwrap()),
        Arc::new(WarpModel::spherical_cap(2).unwrap()),
        Arc::new(WarpModel::euclidean(2).unwrap()),
        Arc::new(WarpModel::ads_schwarzschild(2, 1.0, 4.0).unwrap()),
        Arc::new(WarpModel::hyperbolic(3).unwrap()),
        Arc::new(WarpModel::ads_schwarzschild(3, 2.0, 4.0).unwrap()),
    ]
}

fn perturbed(model: &Arc<WarpModel>, cells: usize) -> GraphSurface {
    let grid = Arc::new(Grid::new(cells, model.n()).unwrap());
    let s = if model.domain().1 < 2.0 { 0.7 } else { 1.2 };
    initdata::perturbed_slice(model.clone(), grid, s, 0.1, 2).unwrap()
}

#[test]
fn identities_vanish_on_slices() {
    for model in models() {
        let grid = Arc::new(Grid::new(64, model.n()).unwrap());
        let s = initdata::slice(model.clone(), grid, 1.1 * 0.7).unwrap();
        let f = Functionals::of(&s).unwrap();
        assert!(
            f.minkowski_residual.abs() < 1e-12 * f.area,
            "{:?}",
            model.kind()
        );
        assert!(f.sigma2_residual.abs() < 1e-12 * f.area);
        assert!(f.hk_deficit.unwrap().abs() < 1e-12 * f.area);
        assert!(f.min2_gap.abs() < 1e-12 * f.area);
    }
}

#[test]
fn minkowski_and_sigma2_converge_at_second_order() {
    for model in models() {
        let values: Vec<(f64, f64, f64)> = [256, 512, 1024]
            .iter()
            .map(|&cells| {
                let f = Functionals::of(&perturbed(&model, cells)).unwrap();
                (f.minkowski_residual, f.sigma2_residual, f.area)
            })
            .collect();
        let mink = refinement_order(values[0].0, values[1].0, values[2].0);
        let sig = refinement_order(values[0].1, values[1].1, values[2].1);
        let label = format!("{:?} n={}", model.kind(), model.n());
        assert!(mink >= 1.8, "{label}: Minkowski order {mink}");
        assert!(sig >= 1.8, "{label}: sigma_2 order {sig}");
        assert!(values[2].0.abs() <= 1e-3 * values[2].2, "{label}");
        assert!(values[2].1.abs() <= 1e-3 * values[2].2, "{label}");
    }
}

#[test]
fn euclidean_ripple_minkowski() {
    let model = Arc::new(WarpModel::euclidean(2).unwrap());
    let grid = Arc::new(Grid::new(1024, 2).unwrap());
    let s = initdata::perturbed_slice(model, grid, 2.0, 0.3, 3).unwrap();
    let f = Functionals::of(&s).unwrap();
    assert!(f.minkowski_residual.abs() <= 1e-3 * f.area);
}

#[test]
fn heintze_karcher_and_min2_signs() {
    for model in models() {
        let f = Functionals::of(&perturbed(&model, 512)).unwrap();
        let label = format!("{:?} n={}", model.kind(), model.n());
        assert!(f.hk_deficit.unwrap() > 1e-6, "{label}: {:?}", f.hk_deficit);
        // Min2 is strict exactly when the Ricci coefficient is positive,
        // i.e. in AdS-Schwarzschild with m > 0; otherwise it is an identity.
        if model.mass() > 0.0 {
            assert!(f.min2_gap > 1e-4, "{label}: {}", f.min2_gap);
        } else {
            assert!(f.min2_gap.abs() < 1e-4 * f.area, "{label}: {}", f.min2_gap);
        }
    }
}

/// Central difference of the functionals when every node moves normally
/// with speed `speed`, i.e. `r -> r + eps * speed * v`.
fn numerical_rates(surface: &GraphSurface, speed: &[f64], eps: f64) -> [f64; 4] {
    let field = CurvatureField::compute(surface).unwrap();
    let moved = |sign: f64| {
        let r = surface
            .r()
            .iter()
            .zip(speed)
            .zip(&field.v)
            .map(|((r, s), v)| r + sign * eps * s * v)
            .collect();
        Functionals::of(&surface.with_radii(r, 0.0).unwrap()).unwrap()
    };
    let (p, m) = (moved(1.0), moved(-1.0));
    let d = |a: f64, b: f64| (a - b) / (2.0 * eps);
    [
        d(p.weighted_volume, m.weighted_volume),
        d(p.area, m.area),
        d(p.mean_weighted, m.mean_weighted),
        d(p.curvature_volume, m.curvature_volume),
    ]
}

#[test]
fn first_variation_formulas() {
    for model in models() {
        let surface = perturbed(&model, 1024);
        let field = CurvatureField::compute(&surface).unwrap();
        let area = Functionals::evaluate(&surface, &field).unwrap().area;
        let theta = surface.grid().theta().to_vec();
        let directions = [
            flow::speed(&surface, 1).unwrap(),
            theta.iter().map(|t| 0.3 + t.cos()).collect::<Vec<f64>>(),
        ];
        for dir in &directions {
            let predicted = variation_rates(&surface, &field, dir).unwrap();
            let observed = numerical_rates(&surface, dir, 1e-5);
            let pairs = [
                (predicted.weighted_volume, observed[0], "weighted volume"),
                (predicted.area, observed[1], "area"),
                (predicted.mean_weighted, observed[2], "int H lambda'"),
                (predicted.curvature_volume, observed[3], "curvature volume"),
            ];
            for (p, o, what) in pairs {
                // Rates that vanish identically (area under the Euclidean
                // flow) are compared on the scale of the surface.
                let scale = p.abs().max(o.abs()).max(1e-3 * area);
                assert!(
                    (p - o).abs() < 2e-3 * scale,
                    "{:?} n={} {what}: predicted {p}, observed {o}",
                    model.kind(),
                    model.n()
                );
            }
        }
    }
}

#[test]
fn wrappers_agree() {
    let model = Arc::new(WarpModel::ads_schwarzschild(2, 1.0, 4.0).unwrap());
    let s = perturbed(&model, 256);
    let f = Functionals::of(&s).unwrap();
    assert!(rel(quantities::weighted_volume(&s).unwrap(), f.weighted_volume) < 1e-14);
    assert!(
        rel(
            quantities::curvature_volume(&s).unwrap(),
            f.curvature_volume
        ) < 1e-14
    );
    assert_eq!(
        quantities::minkowski_residual(&s).unwrap(),
        f.minkowski_residual
    );
    assert_eq!(
        quantities::heintze_karcher_deficit(&s).unwrap(),
        f.hk_deficit.unwrap()
    );
}
