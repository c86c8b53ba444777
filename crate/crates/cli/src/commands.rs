//! The four subcommands. Each returns the process exit status on success
//! (0 all audits pass, 2 some audit failed) and a [`CliError`] otherwise.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use warpflow_core::flow::StopReason;
use warpflow_core::monitors::{audit_monotone, certify_convergence, refinement_order};
use warpflow_core::quantities::{inequality_report, slice_values, Functionals};
use warpflow_core::{
    evolve, ConvergenceCertificate, CurvatureField, DiagnosticsRecord, Direction, Error,
    FlowFailure, GraphSurface, InequalityRecord, MonotoneVerdict, WarpKind,
};

use crate::config::{Config, SweepTarget};
use crate::error::CliError;
use crate::output;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_AUDIT: i32 = 2;

/// One pass/fail verdict of a run or check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Audit {
    pub name: String,
    pub pass: bool,
    /// The audited quantity (worst violation, residual, infimum...).
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Audit {
    fn new(name: impl Into<String>, pass: bool, value: f64, threshold: f64) -> Self {
        Audit {
            name: name.into(),
            pass,
            value,
            threshold,
            index: None,
            note: String::new(),
        }
    }

    fn from_verdict(v: MonotoneVerdict) -> Self {
        let dir = match v.direction {
            Direction::Nondecreasing => "nondecreasing",
            Direction::Nonincreasing => "nonincreasing",
        };
        Audit {
            name: format!("{}_{dir}", v.key),
            pass: v.pass,
            value: v.worst_violation,
            threshold: v.slack,
            index: v.index,
            note: String::new(),
        }
    }

    /// Every applicable claim of an inequality report holds.
    fn inequalities(name: &str, report: &[InequalityRecord]) -> Self {
        let claims = report.iter().filter(|r| r.applicable && !r.informational);
        let worst = claims
            .clone()
            .map(|r| r.gap + r.slack)
            .fold(f64::INFINITY, f64::min);
        let failing: Vec<&str> = claims.filter(|r| !r.holds()).map(|r| r.name).collect();
        let mut a = Audit::new(name, failing.is_empty(), worst, 0.0);
        if !failing.is_empty() {
            a.note = format!("violated: {}", failing.join(", "));
        }
        a
    }
}

fn exit_status(audits: &[Audit]) -> i32 {
    if audits.iter().all(|a| a.pass) {
        EXIT_PASS
    } else {
        EXIT_AUDIT
    }
}

/// Extremes of the a-priori monitors over a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorBounds {
    pub f_max_sup: f64,
    pub f_min_inf: f64,
    pub grad_max_sup: f64,
    pub a_norm_max_sup: f64,
    pub kappa_min_inf: f64,
    pub speed_max_sup: f64,
}

impl MonitorBounds {
    fn of(trace: &[DiagnosticsRecord]) -> Self {
        let sup = |f: fn(&DiagnosticsRecord) -> f64| {
            trace.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
        };
        let inf =
            |f: fn(&DiagnosticsRecord) -> f64| trace.iter().map(f).fold(f64::INFINITY, f64::min);
        MonitorBounds {
            f_max_sup: sup(|r| r.f_max),
            f_min_inf: inf(|r| r.f_min),
            grad_max_sup: sup(|r| r.grad_max),
            a_norm_max_sup: sup(|r| r.a_norm_max),
            kappa_min_inf: inf(|r| r.kappa_min),
            speed_max_sup: sup(|r| r.speed_max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub model: &'static str,
    pub n: usize,
    pub k: usize,
    pub cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub converged: bool,
    pub stop_reason: Option<StopReason>,
    pub steps: usize,
    pub final_time: f64,
    pub records: usize,
    pub certificate: Option<ConvergenceCertificate>,
    pub monitors: Option<MonitorBounds>,
    pub audits: Vec<Audit>,
    pub initial_inequality_report: Vec<InequalityRecord>,
    pub inequality_report: Vec<InequalityRecord>,
    pub error: Option<String>,
    pub pass: bool,
}

/// Everything one flow experiment produces, before anything is written.
#[derive(Debug)]
pub struct RunResult {
    pub summary: RunSummary,
    pub trace: Vec<DiagnosticsRecord>,
    pub final_surface: Option<GraphSurface>,
    pub failure: Option<Box<FlowFailure>>,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        match &self.failure {
            Some(_) => 3,
            None => exit_status(&self.summary.audits),
        }
    }
}

/// Evolves the configured surface on `cells` nodes and audits the trace.
///
/// Setup errors are returned as `Err`; a flow that aborts midway still
/// yields a result carrying the partial trace and the failure.
pub fn run_experiment(
    config: &Config,
    cells: usize,
    seed: Option<u64>,
) -> Result<RunResult, CliError> {
    let model = config.model()?;
    let grid = config.grid_with(cells)?;
    let initial = config.surface(model.clone(), grid)?;
    let flow = &config.flow;
    let profile = config.slice_profile(model.clone(), Some(&initial))?;
    let initial_report = inequality_report(&initial, &profile)?;

    let mut summary = RunSummary {
        command: "run",
        model: model.kind().name(),
        n: model.n(),
        k: flow.k,
        cells,
        seed,
        converged: false,
        stop_reason: None,
        steps: 0,
        final_time: initial.time(),
        records: 0,
        certificate: None,
        monitors: None,
        audits: Vec::new(),
        initial_inequality_report: initial_report,
        inequality_report: Vec::new(),
        error: None,
        pass: false,
    };

    let outcome = match evolve(&initial, flow) {
        Ok(o) => o,
        Err(failure) => {
            summary.steps = failure.steps;
            summary.final_time = failure.last.time();
            summary.records = failure.trace.len();
            summary.error = Some(failure.to_string());
            if !failure.trace.is_empty() {
                summary.monitors = Some(MonitorBounds::of(&failure.trace));
            }
            return Ok(RunResult {
                summary,
                trace: failure.trace.clone(),
                final_surface: Some(failure.last.clone()),
                failure: Some(failure),
            });
        }
    };

    let trace = outcome.trace;
    let audit = &config.audit;
    let first = trace[0];
    let mut audits = Vec::new();
    let mut monotone = |key: &str, dir: Direction, scale: f64| -> Result<(), CliError> {
        let slack = audit.monotone_slack * scale.abs().max(f64::MIN_POSITIVE);
        audits.push(Audit::from_verdict(audit_monotone(
            &trace, key, dir, slack,
        )?));
        Ok(())
    };
    monotone(
        "weighted_volume",
        Direction::Nondecreasing,
        first.weighted_volume,
    )?;
    if flow.k == 1 && model.nonnegative_radial_curvature() {
        monotone("area", Direction::Nondecreasing, first.area)?;
        monotone("Q", Direction::Nonincreasing, first.q)?;
    }
    if model.kind() == WarpKind::SphericalCap {
        let inf = trace
            .iter()
            .map(|r| r.kappa_min)
            .fold(f64::INFINITY, f64::min);
        audits.push(Audit::new("strict_convexity", inf > 0.0, inf, 0.0));
    }

    let cert = certify_convergence(
        &trace,
        &outcome.surface,
        &profile,
        flow.stop_osc_tol,
        flow.stop_speed_tol,
    )?;
    if audit.require_convergence {
        let residual = cert
            .area_residual
            .max(cert.weighted_volume_residual)
            .max(cert.q_residual);
        let mut a = Audit::new(
            "convergence",
            cert.certified && residual <= audit.certify_tol,
            residual,
            audit.certify_tol,
        );
        a.note = format!("osc {:e}, speed {:e}", cert.osc, cert.speed_max);
        audits.push(a);
    }

    let final_report = inequality_report(&outcome.surface, &profile)?;
    audits.push(Audit::inequalities(
        "inequalities_initial",
        &summary.initial_inequality_report,
    ));
    audits.push(Audit::inequalities("inequalities_final", &final_report));

    summary.converged = outcome.stop == StopReason::Converged;
    summary.stop_reason = Some(outcome.stop);
    summary.steps = outcome.steps;
    summary.final_time = outcome.surface.time();
    summary.records = trace.len();
    summary.certificate = Some(cert);
    summary.monitors = Some(MonitorBounds::of(&trace));
    summary.pass = audits.iter().all(|a| a.pass);
    summary.audits = audits;
    summary.inequality_report = final_report;
    Ok(RunResult {
        summary,
        trace,
        final_surface: Some(outcome.surface),
        failure: None,
    })
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_run(config: &Config, result: &RunResult, out_dir: &Path) -> Result<(), CliError> {
    prepare_dir(out_dir)?;
    output::write_trace(&out_dir.join(&config.output.trace_csv), &result.trace)?;
    output::write_json(&out_dir.join(&config.output.summary_json), &result.summary)
}

pub fn cmd_run(config: &Config, out_dir: &Path, seed: Option<u64>) -> Result<i32, CliError> {
    let result = run_experiment(config, config.grid.cells, seed)?;
    write_run(config, &result, out_dir)?;
    match result.failure {
        Some(failure) => Err(CliError::Flow(failure)),
        None => Ok(exit_status(&result.summary.audits)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub command: &'static str,
    pub model: &'static str,
    pub n: usize,
    pub k: usize,
    pub cells: usize,
    pub functionals: Functionals,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub horoconvexity_margin: f64,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub minkowski_relative: f64,
    pub sigma2_relative: f64,
    pub inequality_report: Vec<InequalityRecord>,
    pub audits: Vec<Audit>,
    pub pass: bool,
}

/// Static audit of the configured surface on `cells` nodes.
pub fn check_surface(config: &Config, cells: usize) -> Result<CheckReport, CliError> {
    let model = config.model()?;
    let grid = config.grid_with(cells)?;
    let surface = config.surface(model.clone(), grid)?;
    let field = CurvatureField::compute(&surface)?;
    let f = Functionals::evaluate(&surface, &field)?;
    let k = config.flow.k;
    let tol = config.audit.identity_tol;
    let mut audits = Vec::new();

    let minkowski_relative = f.minkowski_residual.abs() / f.area;
    let sigma2_relative = f.sigma2_residual.abs() / f.area;
    audits.push(Audit::new(
        "minkowski_identity",
        minkowski_relative <= tol,
        minkowski_relative,
        tol,
    ));
    audits.push(Audit::new(
        "sigma2_identity",
        sigma2_relative <= tol,
        sigma2_relative,
        tol,
    ));

    let (f_min, f_max) = match field.curvature_function(k) {
        Ok(values) => {
            audits.push(Audit::new("speed_cone", true, 0.0, 0.0));
            (
                Some(values.iter().copied().fold(f64::INFINITY, f64::min)),
                Some(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            )
        }
        Err(e @ Error::ConeViolation { .. }) => {
            let mut a = Audit::new("speed_cone", false, 1.0, 0.0);
            a.note = e.to_string();
            audits.push(a);
            (None, None)
        }
        Err(e) => return Err(e.into()),
    };

    let mut report = Vec::new();
    match f.hk_deficit {
        Some(deficit) => {
            let slack = warpflow_core::quantities::default_slack(surface.grid().dtheta(), f.area);
            audits.push(Audit::new(
                "heintze_karcher",
                deficit >= -slack,
                deficit,
                -slack,
            ));
            let profile = config.slice_profile(model.clone(), Some(&surface))?;
            report = inequality_report(&surface, &profile)?;
            audits.push(Audit::inequalities("inequalities", &report));
        }
        None => {
            let mut a = Audit::new(
                "mean_convexity",
                false,
                field.mean.iter().copied().fold(f64::INFINITY, f64::min),
                0.0,
            );
            a.note = "H <= 0 somewhere; inequalities not evaluated".into();
            audits.push(a);
        }
    }
    let kappa_max = field
        .kappa1
        .iter()
        .chain(&field.kappa2)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckReport {
        command: "check",
        model: model.kind().name(),
        n: model.n(),
        k,
        cells,
        functionals: f,
        kappa_min: field.kappa_min(),
        kappa_max,
        horoconvexity_margin: field.horoconvexity_margin(),
        f_min,
        f_max,
        minkowski_relative,
        sigma2_relative,
        inequality_report: report,
        pass: audits.iter().all(|a| a.pass),
        audits,
    })
}

pub fn cmd_check(config: &Config, out_dir: &Path) -> Result<i32, CliError> {
    let report = check_surface(config, config.grid.cells)?;
    prepare_dir(out_dir)?;
    output::write_json(&out_dir.join(&config.output.report_json), &report)?;
    Ok(exit_status(&report.audits))
}

/// One ladder row: slice values and the comparison-function round trips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub s: f64,
    pub area: f64,
    pub weighted_volume: f64,
    pub q: f64,
    pub xi1_residual: f64,
    pub xi0_residual: f64,
}

pub fn profile_rows(config: &Config) -> Result<Vec<ProfileRow>, CliError> {
    let model = config.model()?;
    let profile = config.slice_profile(model.clone(), None)?;
    profile
        .radii()
        .iter()
        .map(|&s| {
            let v = slice_values(&model, s)?;
            Ok(ProfileRow {
                s,
                area: v.area,
                weighted_volume: v.weighted_volume,
                q: v.q,
                xi1_residual: v.q - profile.xi1(v.area)?,
                xi0_residual: v.q - profile.xi0(v.weighted_volume)?,
            })
        })
        .collect()
}

pub fn cmd_slice_profile(config: &Config, out_dir: &Path) -> Result<i32, CliError> {
    let rows = profile_rows(config)?;
    prepare_dir(out_dir)?;
    output::write_profile(&out_dir.join(&config.output.profile_csv), &rows)?;
    Ok(EXIT_PASS)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepLevel {
    pub cells: usize,
    pub values: BTreeMap<&'static str, f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub target: SweepTarget,
    pub levels: Vec<SweepLevel>,
    /// Observed order of each quantity from every consecutive triple.
    pub orders: BTreeMap<&'static str, Vec<f64>>,
}

fn level_dir(out_dir: &Path, cells: usize) -> PathBuf {
    out_dir.join(format!("N{cells}"))
}

fn sweep_member(
    config: &Config,
    cells: usize,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<SweepLevel, CliError> {
    let dir = level_dir(out_dir, cells);
    let mut values = BTreeMap::new();
    match config.sweep.command {
        SweepTarget::Run => {
            let result = run_experiment(config, cells, seed)?;
            write_run(config, &result, &dir)?;
            if let Some(s) = &result.final_surface {
                let f = Functionals::of(s)?;
                values.insert("limit_radius", s.mean_radius());
                values.insert("area", f.area);
                values.insert("weighted_volume", f.weighted_volume);
                values.insert("Q", f.q);
            }
            values.insert("steps", result.summary.steps as f64);
            Ok(SweepLevel {
                cells,
                values,
                pass: result.exit_code() == EXIT_PASS,
                error: result.summary.error.clone(),
            })
        }
        SweepTarget::Check => {
            let report = check_surface(config, cells)?;
            prepare_dir(&dir)?;
            output::write_json(&dir.join(&config.output.report_json), &report)?;
            let f = &report.functionals;
            values.insert("minkowski_residual", f.minkowski_residual);
            values.insert("sigma2_residual", f.sigma2_residual);
            values.insert("area", f.area);
            values.insert("weighted_volume", f.weighted_volume);
            values.insert("Q", f.q);
            values.insert("kappa_min", report.kappa_min);
            if let Some(d) = f.hk_deficit {
                values.insert("hk_deficit", d);
            }
            Ok(SweepLevel {
                cells,
                values,
                pass: report.pass,
                error: None,
            })
        }
    }
}

/// Runs the refinement ladder `N, 2N, 4N, ...` with one thread per level.
pub fn sweep(config: &Config, out_dir: &Path, seed: Option<u64>) -> Result<SweepReport, CliError> {
    let cells: Vec<usize> = (0..config.sweep.levels)
        .map(|j| config.grid.cells << j)
        .collect();
    let results: Vec<Result<SweepLevel, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&c| scope.spawn(move || sweep_member(config, c, out_dir, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep member panicked"))
            .collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut orders = BTreeMap::new();
    for &key in levels[0].values.keys() {
        let series: Option<Vec<f64>> = levels.iter().map(|l| l.values.get(key).copied()).collect();
        if let Some(series) = series {
            let p = series
                .windows(3)
                .map(|w| refinement_order(w[0], w[1], w[2]))
                .collect();
            orders.insert(key, p);
        }
    }
    Ok(SweepReport {
        command: "sweep",
        target: config.sweep.command,
        levels,
        orders,
    })
}

pub fn cmd_sweep(config: &Config, out_dir: &Path, seed: Option<u64>) -> Result<i32, CliError> {
    let report = sweep(config, out_dir, seed)?;
    prepare_dir(out_dir)?;
    output::write_json(&out_dir.join(&config.output.sweep_json), &report)?;
    Ok(if report.levels.iter().all(|l| l.pass) {
        EXIT_PASS
    } else {
        EXIT_AUDIT
    })
}
