//! Experiment configuration files (TOML). Every section rejects unknown
//! keys so that typos fail loudly.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use warpflow_core::{initdata, FlowConfig, GraphSurface, Grid, SliceProfile, WarpKind, WarpModel};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub ambient: Ambient,
    #[serde(default)]
    pub flow: FlowConfig,
    pub grid: GridSpec,
    pub init: InitSpec,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub audit: AuditSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    pub kind: WarpKind,
    pub n: usize,
    /// Mass; AdS-Schwarzschild only.
    #[serde(default)]
    pub m: Option<f64>,
    /// Outer end of the tabulated radial range; AdS-Schwarzschild only.
    #[serde(default)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Slice { s: f64 },
    Perturbed { s: f64, amplitude: f64, mode: u32 },
    Offcenter { rho: f64, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub trace_csv: String,
    pub summary_json: String,
    pub report_json: String,
    pub profile_csv: String,
    pub sweep_json: String,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            trace_csv: "trace.csv".into(),
            summary_json: "summary.json".into(),
            report_json: "report.json".into(),
            profile_csv: "profile.csv".into(),
            sweep_json: "sweep.json".into(),
        }
    }
}

/// Radii ladder of the slice profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_profile_count")]
    pub count: usize,
}

fn default_profile_count() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSpec {
    /// Monotonicity slack relative to the initial value of each series.
    pub monotone_slack: f64,
    /// Relative tolerance for matching the final functionals with the
    /// limit slice.
    pub certify_tol: f64,
    /// Identity residuals relative to the area (check).
    pub identity_tol: f64,
    /// Whether a run that stops before converging fails the audit.
    pub require_convergence: bool,
}

impl Default for AuditSpec {
    fn default() -> Self {
        AuditSpec {
            monotone_slack: 1e-6,
            certify_tol: 1e-4,
            identity_tol: 1e-3,
            require_convergence: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    Run,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub command: SweepTarget,
    /// Number of grid doublings starting from `grid.N`.
    pub levels: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            command: SweepTarget::Check,
            levels: 3,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let a = &self.ambient;
        let ads = a.kind == WarpKind::AdsSchwarzschild;
        if !ads && (a.m.is_some() || a.r_max.is_some()) {
            return Err(CliError::Config(format!(
                "ambient.m and ambient.r_max apply only to ads_schwarzschild, not {}",
                a.kind.name()
            )));
        }
        if ads && a.m.is_none() {
            return Err(CliError::Config(
                "ads_schwarzschild requires ambient.m".into(),
            ));
        }
        self.flow
            .validate(a.n)
            .map_err(|e| CliError::Config(format!("[flow] {e}")))?;
        if let Some(p) = &self.profile {
            if p.lo.partial_cmp(&p.hi) != Some(std::cmp::Ordering::Less) || p.count < 2 {
                return Err(CliError::Config(
                    "[profile] needs lo < hi and count >= 2".into(),
                ));
            }
        }
        if self.sweep.levels < 3 {
            return Err(CliError::Config(
                "[sweep] levels must be >= 3 to estimate an order".into(),
            ));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Arc<WarpModel>, CliError> {
        let a = &self.ambient;
        let model = match a.kind {
            WarpKind::SphericalCap => WarpModel::spherical_cap(a.n),
            WarpKind::Hyperbolic => WarpModel::hyperbolic(a.n),
            WarpKind::Euclidean => WarpModel::euclidean(a.n),
            WarpKind::AdsSchwarzschild => {
                WarpModel::ads_schwarzschild(a.n, a.m.unwrap_or(0.0), a.r_max.unwrap_or(4.0))
            }
        };
        // Bad ambient parameters are configuration mistakes.
        model
            .map(Arc::new)
            .map_err(|e| CliError::Config(format!("[ambient] {e}")))
    }

    pub fn grid_with(&self, cells: usize) -> Result<Arc<Grid>, CliError> {
        Grid::new(cells, self.ambient.n)
            .map(Arc::new)
            .map_err(|e| CliError::Config(format!("[grid] {e}")))
    }

    pub fn surface(
        &self,
        model: Arc<WarpModel>,
        grid: Arc<Grid>,
    ) -> Result<GraphSurface, CliError> {
        let s = match self.init {
            InitSpec::Slice { s } => initdata::slice(model, grid, s),
            InitSpec::Perturbed { s, amplitude, mode } => {
                initdata::perturbed_slice(model, grid, s, amplitude, mode)
            }
            InitSpec::Offcenter { rho, d } => initdata::offcenter_sphere(model, grid, rho, d),
        };
        Ok(s?)
    }

    /// The configured ladder, or one spanning the surface with a margin.
    pub fn slice_profile(
        &self,
        model: Arc<WarpModel>,
        surface: Option<&GraphSurface>,
    ) -> Result<SliceProfile, CliError> {
        let (a, b) = model.domain();
        let (lo, hi, count) = match (self.profile, surface) {
            (Some(p), _) => (p.lo, p.hi, p.count),
            (None, Some(s)) => {
                let lo = (0.5 * s.r_min()).max(a + 1e-3);
                let hi = (s.r_max() + 1.0).min(b - 1e-3);
                (lo, hi, default_profile_count())
            }
            (None, None) => {
                let hi = if b.is_finite() { b - 1e-3 } else { 3.0 };
                (a + 1e-2, hi, default_profile_count())
            }
        };
        Ok(SliceProfile::uniform(model, lo, hi, count)?)
    }
}
