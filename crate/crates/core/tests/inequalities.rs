//! Geometric inequalities: equality on centered slices, strictness away from
//! them, and the slice-profile comparison functions.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::rel;
use warpflow_core::quantities::{inequality_report, slice_values};
use warpflow_core::{initdata, GraphSurface, Grid, InequalityRecord, SliceProfile, WarpModel};

fn hyperbolic() -> Arc<WarpModel> {
    Arc::new(WarpModel::hyperbolic(2).unwrap())
}

fn grid(cells: usize) -> Arc<Grid> {
    Arc::new(Grid::new(cells, 2).unwrap())
}

fn find<'a>(report: &'a [InequalityRecord], name: &str) -> &'a InequalityRecord {
    report
        .iter()
        .find(|r| r.name == name)
        .unwrap_or_else(|| panic!("no record {name}"))
}

const CLAIMS: [&str; 4] = [
    "q_vs_xi1_area",
    "q_vs_xi0_weighted_volume",
    "hyperbolic_weighted_minkowski",
    "horoconvex_weighted_isoperimetric",
];

#[test]
fn hyperbolic_slice_is_an_equality_case() {
    let m = hyperbolic();
    let profile = SliceProfile::uniform(m.clone(), 0.05, 3.0, 300).unwrap();
    let s = initdata::slice(m, grid(1024), 1.0).unwrap();
    let report = inequality_report(&s, &profile).unwrap();

    let target = 8.0 * PI * 1.0f64.sinh(); // 29.53602749...
    let mink = find(&report, "hyperbolic_weighted_minkowski");
    assert!(rel(mink.lhs, target) < 1e-3 && rel(mink.rhs, target) < 1e-3);
    assert!(mink.gap.abs() / mink.rhs <= 1e-3);

    let iso = find(&report, "horoconvex_weighted_isoperimetric");
    assert!(iso.applicable);
    assert!(iso.gap.abs() / iso.rhs <= 1e-3);
    // int lambda' dmu on the slice: 4 pi sinh^2 cosh
    assert!(rel(iso.lhs, 4.0 * PI * 1.0f64.sinh().powi(2) * 1.0f64.cosh()) < 1e-12);

    for name in CLAIMS {
        let r = find(&report, name);
        assert!(r.holds(), "{name}: {r:?}");
        assert!(r.gap.abs() <= 1e-9 * r.lhs.abs(), "{name}: {r:?}");
    }
}

#[test]
fn centered_sphere_matches_slice_report() {
    let m = hyperbolic();
    let profile = SliceProfile::uniform(m.clone(), 0.05, 3.0, 300).unwrap();
    let centered = initdata::offcenter_sphere(m.clone(), grid(512), 1.0, 0.0).unwrap();
    let iso = inequality_report(&centered, &profile).unwrap();
    let iso = find(&iso, "horoconvex_weighted_isoperimetric");
    assert!(iso.gap.abs() <= 1e-3 * iso.rhs);
}

fn assert_strict(surface: &GraphSurface, profile: &SliceProfile, label: &str) {
    let report = inequality_report(surface, profile).unwrap();
    for name in CLAIMS {
        let r = find(&report, name);
        assert!(r.applicable, "{label} {name}: {}", r.notes);
        assert!(
            r.gap > 10.0 * r.slack,
            "{label} {name}: gap {} slack {}",
            r.gap,
            r.slack
        );
    }
}

#[test]
fn displaced_and_perturbed_surfaces_are_strict() {
    let m = hyperbolic();
    let profile = SliceProfile::uniform(m.clone(), 0.05, 3.0, 300).unwrap();
    let off = initdata::offcenter_sphere(m.clone(), grid(1024), 1.0, 0.3).unwrap();
    assert_strict(&off, &profile, "off-center");
    let pert = initdata::perturbed_slice(m, grid(1024), 1.0, 0.1, 2).unwrap();
    assert_strict(&pert, &profile, "perturbed");
}

#[test]
fn displaced_sphere_area_is_isometry_invariant() {
    // The displaced sphere is congruent to the centered one, so its area,
    // and hence xi_1 of it, equals the slice values.
    let m = hyperbolic();
    let profile = SliceProfile::uniform(m.clone(), 0.05, 3.0, 300).unwrap();
    let off = initdata::offcenter_sphere(m.clone(), grid(1024), 1.0, 0.3).unwrap();
    let report = inequality_report(&off, &profile).unwrap();
    let xi1 = find(&report, "q_vs_xi1_area");
    let q1 = slice_values(&m, 1.0).unwrap().q;
    assert!(rel(xi1.rhs, q1) < 1e-6, "{} vs {q1}", xi1.rhs);
}

#[test]
fn ads_inequalities_hold_strictly() {
    let m = Arc::new(WarpModel::ads_schwarzschild(2, 1.0, 4.0).unwrap());
    let profile = SliceProfile::uniform(m.clone(), 0.02, 3.5, 300).unwrap();
    let s = initdata::perturbed_slice(m.clone(), grid(512), 1.0, 0.1, 2).unwrap();
    let report = inequality_report(&s, &profile).unwrap();
    for name in ["q_vs_xi1_area", "q_vs_xi0_weighted_volume"] {
        let r = find(&report, name);
        assert!(r.applicable && r.gap > 10.0 * r.slack, "{name}: {r:?}");
    }
    let info = find(&report, "imcf_comparison_horizon");
    assert!(info.informational);
    let slice = initdata::slice(m, grid(128), 1.0).unwrap();
    for r in inequality_report(&slice, &profile).unwrap() {
        if !r.informational {
            assert!(r.gap.abs() <= 1e-9 * r.lhs.abs(), "{r:?}");
        }
    }
}

#[test]
fn unclaimed_models_are_flagged() {
    let m = Arc::new(WarpModel::spherical_cap(2).unwrap());
    let profile = SliceProfile::uniform(m.clone(), 0.05, 1.5, 200).unwrap();
    let s = initdata::perturbed_slice(m, grid(256), 0.8, 0.05, 2).unwrap();
    let report = inequality_report(&s, &profile).unwrap();
    assert_eq!(report.len(), 2);
    assert!(report.iter().all(|r| !r.applicable && !r.notes.is_empty()));
}

#[test]
fn profile_round_trips() {
    let cases: Vec<(Arc<WarpModel>, f64, f64)> = vec![
        (hyperbolic(), 0.05, 3.0),
        (Arc::new(WarpModel::hyperbolic(3).unwrap()), 0.05, 2.5),
        (
            Arc::new(WarpModel::ads_schwarzschild(2, 1.0, 4.0).unwrap()),
            0.01,
            3.8,
        ),
        (
            Arc::new(WarpModel::ads_schwarzschild(3, 2.0, 4.0).unwrap()),
            0.01,
            3.8,
        ),
    ];
    for (m, lo, hi) in cases {
        let profile = SliceProfile::uniform(m.clone(), lo, hi, 200).unwrap();
        let radii = profile.radii().to_vec();
        for (i, &s) in radii.iter().enumerate() {
            let v = slice_values(&m, s).unwrap();
            let scale = v.q.abs().max(1.0);
            assert!(
                (v.q - profile.xi1(v.area).unwrap()).abs() <= 1e-8 * scale,
                "{:?} s={s}",
                m.kind()
            );
            assert!((v.q - profile.xi0(v.weighted_volume).unwrap()).abs() <= 1e-8 * scale);
            if i > 0 {
                assert!(profile.q_values()[i] > profile.q_values()[i - 1]);
            }
        }
        // Between ladder points as well.
        let mid = 0.5 * (radii[10] + radii[11]);
        let v = slice_values(&m, mid).unwrap();
        assert!((v.q - profile.xi1(v.area).unwrap()).abs() <= 1e-8 * v.q.abs().max(1.0));
    }
}

#[test]
fn xi0_reference_value() {
    let m = hyperbolic();
    let profile = SliceProfile::uniform(m, 0.05, 3.0, 100).unwrap();
    let w = 4.0 * PI * 1.0f64.sinh().powi(3) / 3.0;
    // 8 pi cosh^2 sinh - 16 pi sinh^3 / 3 at s = 1
    let q =
        8.0 * PI * 1.0f64.cosh().powi(2) * 1.0f64.sinh() - 16.0 * PI * 1.0f64.sinh().powi(3) / 3.0;
    assert!((profile.xi0(w).unwrap() - q).abs() < 1e-9 * q);
    assert!((q - 43.13340880300282).abs() < 1e-10);
    assert!(profile.xi0(1e6).is_err());
}
