//! Time stepping of the constrained inverse curvature flow
//! `dx/dt = (n/F - u/lambda') nu` with `F = n H_k / H_{k-1}`.
//!
//! For a graph the normal speed `S = n/F - u/lambda'` moves the radial
//! function by `dr/dt = S v`, which is the scalar parabolic equation in
//! `phi = int dr/lambda` multiplied through by `lambda`. It is integrated with
//! classical RK4 under a parabolic step restriction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    radial_derivatives, AxiKappa, CurvatureField, GraphSurface, NodeGeometry, QuotientKernel,
};
use crate::quantities::Functionals;
use crate::warp::WarpKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    /// Index of the curvature quotient `F = n H_k / H_{k-1}`.
    pub k: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub stop_speed_tol: f64,
    pub stop_osc_tol: f64,
    pub record_every: usize,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            k: 1,
            cfl: 0.4,
            t_end: 50.0,
            stop_speed_tol: 1e-8,
            stop_osc_tol: 1e-6,
            record_every: 100,
            max_steps: 10_000_000,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::Index { k: self.k, n });
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Parameter(format!(
                "cfl = {} must lie in (0, 1]",
                self.cfl
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Parameter(format!(
                "t_end = {} must be >= 0",
                self.t_end
            )));
        }
        if !(self.stop_speed_tol > 0.0 && self.stop_osc_tol > 0.0) {
            return Err(Error::Parameter(
                "stopping tolerances must be positive".into(),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// One sample of the monitored functionals and a-priori quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub area: f64,
    pub weighted_volume: f64,
    pub weighted_area: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "F_max")]
    pub f_max: f64,
    #[serde(rename = "F_min")]
    pub f_min: f64,
    pub grad_max: f64,
    #[serde(rename = "A_norm_max")]
    pub a_norm_max: f64,
    pub kappa_min: f64,
    pub speed_max: f64,
    pub minkowski_residual: f64,
    pub hk_deficit: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 13] = [
        "time",
        "area",
        "weighted_volume",
        "weighted_area",
        "Q",
        "F_max",
        "F_min",
        "grad_max",
        "A_norm_max",
        "kappa_min",
        "speed_max",
        "minkowski_residual",
        "hk_deficit",
    ];

    pub fn values(&self) -> [f64; 13] {
        [
            self.time,
            self.area,
            self.weighted_volume,
            self.weighted_area,
            self.q,
            self.f_max,
            self.f_min,
            self.grad_max,
            self.a_norm_max,
            self.kappa_min,
            self.speed_max,
            self.minkowski_residual,
            self.hk_deficit,
        ]
    }

    /// Looks a column up by its CSV name.
    pub fn get(&self, key: &str) -> Option<f64> {
        Self::COLUMNS
            .iter()
            .position(|c| *c == key)
            .map(|i| self.values()[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|x| x.is_finite())
    }

    pub fn measure(surface: &GraphSurface, k: usize) -> Result<Self> {
        let mut rhs = Rhs::new(surface, k)?;
        let mut out = StageBuffers::new(surface.grid().cells());
        let info = rhs.eval(surface.r(), &mut out)?;
        DiagnosticsRecord::from_parts(surface, &out.f, info.speed_max)
    }

    fn from_parts(surface: &GraphSurface, fvals: &[f64], speed_max: f64) -> Result<Self> {
        let field = CurvatureField::compute(surface)?;
        let f = Functionals::evaluate(surface, &field)?;
        let fmax = fvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let fmin = fvals.iter().copied().fold(f64::INFINITY, f64::min);
        let grad_max = field.phi1.iter().map(|p| p.abs()).fold(0.0, f64::max);
        let a_norm_max = (0..field.len())
            .map(|i| field.second_fundamental_norm(i))
            .fold(0.0, f64::max);
        Ok(DiagnosticsRecord {
            time: surface.time(),
            area: f.area,
            weighted_volume: f.weighted_volume,
            weighted_area: f.weighted_area,
            q: f.q,
            f_max: fmax,
            f_min: fmin,
            grad_max,
            a_norm_max,
            kappa_min: field.kappa_min(),
            speed_max,
            minkowski_residual: f.minkowski_residual,
            hk_deficit: f.hk_deficit.unwrap_or(f64::NAN),
        })
    }
}

/// Per-node outputs of one right-hand-side evaluation.
struct StageBuffers {
    /// `dr/dt = S v`
    rate: Vec<f64>,
    speed: Vec<f64>,
    f: Vec<f64>,
}

impl StageBuffers {
    fn new(cells: usize) -> Self {
        StageBuffers {
            rate: vec![0.0; cells],
            speed: vec![0.0; cells],
            f: vec![0.0; cells],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct StageInfo {
    speed_max: f64,
    /// Largest theta-theta diffusion coefficient.
    diffusion_max: f64,
}

/// Right-hand side of `dr/dt = S v` with its scratch space, so that the
/// RK4 stages allocate nothing.
struct Rhs<'a> {
    surface: &'a GraphSurface,
    kernel: QuotientKernel,
    k: usize,
    r1: Vec<f64>,
    r2: Vec<f64>,
}

impl<'a> Rhs<'a> {
    fn new(surface: &'a GraphSurface, k: usize) -> Result<Self> {
        let n = surface.n();
        // Spherical caps must stay strictly convex, i.e. in Gamma_n.
        let cone = if surface.model().kind() == WarpKind::SphericalCap {
            n
        } else {
            k
        };
        let cells = surface.grid().cells();
        Ok(Rhs {
            surface,
            kernel: QuotientKernel::new(n, k, cone)?,
            k,
            r1: vec![0.0; cells],
            r2: vec![0.0; cells],
        })
    }

    fn eval(&mut self, r: &[f64], out: &mut StageBuffers) -> Result<StageInfo> {
        let model = self.surface.model();
        let grid = self.surface.grid();
        let n = grid.dim();
        let nf = n as f64;
        radial_derivatives(grid, r, &mut self.r1, &mut self.r2);
        let cot = grid.cot();
        let mut speed_max = 0.0f64;
        let mut diffusion_max = 0.0f64;
        for i in 0..r.len() {
            let jet = model.eval(r[i]).map_err(|e| e.at_node(i))?;
            let (lam, dlam) = (jet.lambda, jet.d1);
            let g = NodeGeometry::new(lam, dlam, self.r1[i], self.r2[i], cot[i], n);
            let Some((f, df1)) = self.kernel.eval(g.k1, g.k2) else {
                return Err(self.cone_error(i, g.k1, g.k2));
            };
            let v = g.v;
            let s = nf / f - lam / (v * dlam);
            let d = nf * df1 / (lam * lam * v * v * f * f);
            if !s.is_finite() || !d.is_finite() {
                return Err(Error::NonFinite {
                    what: "flow speed",
                    node: Some(i),
                });
            }
            out.rate[i] = s * v;
            out.speed[i] = s;
            out.f[i] = f;
            speed_max = speed_max.max(s.abs());
            diffusion_max = diffusion_max.max(d);
        }
        Ok(StageInfo {
            speed_max,
            diffusion_max,
        })
    }

    fn cone_error(&self, i: usize, k1: f64, k2: f64) -> Error {
        let n = self.surface.n();
        let kappa = AxiKappa::new(k1, k2, n);
        let k = if kappa.in_cone(self.k).unwrap_or(false) {
            n
        } else {
            self.k
        };
        Error::ConeViolation {
            node: Some(i),
            k,
            kappa: vec![k1, k2],
        }
    }

    fn dt(&self, info: &StageInfo, cfl: f64) -> f64 {
        let h = self.surface.grid().dtheta();
        cfl * h * h / info.diffusion_max
    }

    /// RK4 from `r` with the first stage already in `stages[0]`; the result
    /// goes to `next`.
    fn rk4(
        &mut self,
        r: &[f64],
        dt: f64,
        stages: &mut [StageBuffers; 4],
        tmp: &mut [f64],
        next: &mut [f64],
    ) -> Result<()> {
        let [k1, k2, k3, k4] = stages;
        for (j, t) in tmp.iter_mut().enumerate() {
            *t = r[j] + 0.5 * dt * k1.rate[j];
        }
        self.eval(tmp, k2)?;
        for (j, t) in tmp.iter_mut().enumerate() {
            *t = r[j] + 0.5 * dt * k2.rate[j];
        }
        self.eval(tmp, k3)?;
        for (j, t) in tmp.iter_mut().enumerate() {
            *t = r[j] + dt * k3.rate[j];
        }
        self.eval(tmp, k4)?;
        let (a, b) = self.surface.model().domain();
        for j in 0..r.len() {
            let x =
                r[j] + dt / 6.0 * (k1.rate[j] + 2.0 * k2.rate[j] + 2.0 * k3.rate[j] + k4.rate[j]);
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    what: "radius",
                    node: Some(j),
                });
            }
            if !(x > a && x < b) {
                return Err(Error::Domain {
                    r: x,
                    a,
                    b,
                    node: Some(j),
                });
            }
            next[j] = x;
        }
        Ok(())
    }
}

fn stage_buffers(cells: usize) -> [StageBuffers; 4] {
    std::array::from_fn(|_| StageBuffers::new(cells))
}

/// Normal speed `n/F - u/lambda'` at every node.
pub fn speed(surface: &GraphSurface, k: usize) -> Result<Vec<f64>> {
    let mut rhs = Rhs::new(surface, k)?;
    let mut out = StageBuffers::new(surface.grid().cells());
    rhs.eval(surface.r(), &mut out)?;
    Ok(out.speed)
}

/// Largest stable explicit step, `cfl dtheta^2 / max D` with
/// `D = n F_{kappa_1} / (lambda^2 v^2 F^2)`.
pub fn cfl_dt(surface: &GraphSurface, k: usize, cfl: f64) -> Result<f64> {
    let mut rhs = Rhs::new(surface, k)?;
    let mut out = StageBuffers::new(surface.grid().cells());
    let info = rhs.eval(surface.r(), &mut out)?;
    Ok(rhs.dt(&info, cfl))
}

/// One RK4 step of size `dt` (negative `dt` integrates backwards).
pub fn step(surface: &GraphSurface, k: usize, dt: f64) -> Result<GraphSurface> {
    let cells = surface.grid().cells();
    let mut rhs = Rhs::new(surface, k)?;
    let mut stages = stage_buffers(cells);
    let mut tmp = vec![0.0; cells];
    let mut next = vec![0.0; cells];
    rhs.eval(surface.r(), &mut stages[0])?;
    rhs.rk4(surface.r(), dt, &mut stages, &mut tmp, &mut next)?;
    surface.with_radii(next, surface.time() + dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    TimeLimit,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub surface: GraphSurface,
    pub trace: Vec<DiagnosticsRecord>,
    pub steps: usize,
    pub stop: StopReason,
}

impl FlowOutcome {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

/// A run that aborted, with everything recorded up to the failure.
#[derive(Debug, Clone)]
pub struct FlowFailure {
    pub error: Error,
    pub trace: Vec<DiagnosticsRecord>,
    /// Last surface that passed all checks.
    pub last: GraphSurface,
    pub steps: usize,
}

impl fmt::Display for FlowFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "flow aborted after {} steps at t = {}: {}",
            self.steps,
            self.last.time(),
            self.error
        )
    }
}

impl std::error::Error for FlowFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Runs the flow until convergence, `t_end` or `max_steps`.
///
/// Convergence means `max |S| < stop_speed_tol` and `osc r < stop_osc_tol`.
/// A record is taken at the start, every `record_every` steps and at the end.
pub fn evolve(
    initial: &GraphSurface,
    config: &FlowConfig,
) -> std::result::Result<FlowOutcome, Box<FlowFailure>> {
    let mut trace: Vec<DiagnosticsRecord> = Vec::new();
    let mut steps = 0usize;
    let mut time = initial.time();
    let mut r = initial.r().to_vec();
    let surface_at = |r: &[f64], time: f64| initial.with_radii(r.to_vec(), time);
    let fail = |error: Error, trace: Vec<DiagnosticsRecord>, r: &[f64], time: f64, steps: usize| {
        Box::new(FlowFailure {
            error,
            trace,
            last: surface_at(r, time).unwrap_or_else(|_| initial.clone()),
            steps,
        })
    };

    if let Err(e) = config.validate(initial.n()) {
        return Err(fail(e, trace, &r, time, 0));
    }
    let mut rhs = match Rhs::new(initial, config.k) {
        Ok(x) => x,
        Err(e) => return Err(fail(e, trace, &r, time, 0)),
    };
    let cells = r.len();
    let mut stages = stage_buffers(cells);
    let mut tmp = vec![0.0; cells];
    let mut next = vec![0.0; cells];

    loop {
        let info = match rhs.eval(&r, &mut stages[0]) {
            Ok(x) => x,
            Err(e) => return Err(fail(e, trace, &r, time, steps)),
        };
        let (lo, hi) = r
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let converged = info.speed_max < config.stop_speed_tol && hi - lo < config.stop_osc_tol;
        let stop = if converged {
            Some(StopReason::Converged)
        } else if time >= config.t_end {
            Some(StopReason::TimeLimit)
        } else if steps >= config.max_steps {
            Some(StopReason::StepLimit)
        } else {
            None
        };

        if steps.is_multiple_of(config.record_every) || stop.is_some() {
            let rec = surface_at(&r, time)
                .and_then(|s| DiagnosticsRecord::from_parts(&s, &stages[0].f, info.speed_max));
            let rec = match rec {
                Ok(x) => x,
                Err(e) => return Err(fail(e, trace, &r, time, steps)),
            };
            if trace.last().is_none_or(|last| last.time != rec.time) {
                trace.push(rec);
            }
            if !rec.is_finite() {
                let column = rec
                    .values()
                    .iter()
                    .position(|x| !x.is_finite())
                    .unwrap_or(0);
                let error = Error::NonFinite {
                    what: DiagnosticsRecord::COLUMNS[column],
                    node: None,
                };
                return Err(fail(error, trace, &r, time, steps));
            }
        }
        if let Some(stop) = stop {
            let surface =
                surface_at(&r, time).map_err(|e| fail(e, trace.clone(), &r, time, steps))?;
            return Ok(FlowOutcome {
                surface,
                trace,
                steps,
                stop,
            });
        }

        let dt = rhs.dt(&info, config.cfl).min(config.t_end - time);
        if let Err(e) = rhs.rk4(&r, dt, &mut stages, &mut tmp, &mut next) {
            return Err(fail(e, trace, &r, time, steps));
        }
        std::mem::swap(&mut r, &mut next);
        time += dt;
        steps += 1;
    }
}
