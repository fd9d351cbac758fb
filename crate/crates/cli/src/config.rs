//! Problem configuration: a single JSON document, overridable from the
//! command line, resolved into the core objects before any numerics run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use hessian_kk_core::classify::{ArParams, LimitProbe};
use hessian_kk_core::expr::Expr;
use hessian_kk_core::pohozaev::ScanGrid;
use hessian_kk_core::radial::{CollocationSettings, EigenGrid, SolveBranch};
use hessian_kk_core::transform::{
    FFamily, GFamily, GrowthPair, TransformSettings, F_EXPR_VARS, G_EXPR_VARS,
};

/// Fatal CLI error carrying its process exit code:
/// 2 validation, 3 numeric, 4 non-convergence.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

/// Map a core error arising after validation to a process exit code.
pub fn runtime_error(err: hessian_kk_core::Error) -> CliError {
    use hessian_kk_core::Error::*;
    let code = match err {
        Convergence { .. } => 4,
        Domain(_) | Numeric(_) | Range(_) => 3,
    };
    CliError {
        code,
        message: err.to_string(),
    }
}

pub const WORKFLOWS: [&str; 6] = [
    "verify-identity",
    "transform",
    "classify",
    "solve",
    "eigen",
    "pohozaev",
];

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FSpec {
    Zero,
    PowerExp {
        p: f64,
    },
    PowerLaw {
        c: f64,
        q: f64,
    },
    ExpCritical {
        b0: f64,
        alpha0: f64,
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        exponent: Option<f64>,
    },
    Expr {
        expr: String,
    },
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GSpec {
    #[default]
    Zero,
    Const { value: f64 },
    Linear { slope: f64 },
    Poly { coeffs: Vec<f64> },
    Expr { expr: String },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArSpec {
    Sobolev { theta: f64, m: f64 },
    TrudingerMoser { vartheta: f64, r1: f64, r2: f64, z0: f64 },
    TrudingerMoserPrimitive { l: f64, m: f64 },
}

impl ArSpec {
    pub fn to_params(&self) -> ArParams {
        match self {
            ArSpec::Sobolev { theta, m } => ArParams::Sobolev {
                theta: *theta,
                m: *m,
            },
            ArSpec::TrudingerMoser { vartheta, r1, r2, z0 } => ArParams::TrudingerMoser {
                vartheta: *vartheta,
                r1: *r1,
                r2: *r2,
                z0: *z0,
            },
            ArSpec::TrudingerMoserPrimitive { l, m } => ArParams::TrudingerMoserPrimitive {
                l: *l,
                m: *m,
            },
        }
    }
}

fn default_probe_z0() -> f64 {
    1.0
}
fn default_probe_rho() -> f64 {
    2.0
}
fn default_probe_points() -> usize {
    40
}
fn default_probe_window() -> usize {
    5
}
fn default_spread_tol() -> f64 {
    1e-3
}
fn default_zero_tol() -> f64 {
    1e-9
}
fn default_diverge_factor() -> f64 {
    10.0
}
fn default_margin_min() -> f64 {
    1e-6
}
fn default_shells() -> usize {
    32
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default = "default_probe_z0")]
    pub z0: f64,
    #[serde(default = "default_probe_rho")]
    pub rho: f64,
    #[serde(default = "default_probe_points")]
    pub points: usize,
    #[serde(default = "default_probe_window")]
    pub window: usize,
    #[serde(default = "default_spread_tol")]
    pub spread_tol: f64,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default = "default_diverge_factor")]
    pub diverge_factor: f64,
    #[serde(default = "default_margin_min")]
    pub margin_min: f64,
    #[serde(default = "default_shells")]
    pub shells: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            z0: default_probe_z0(),
            rho: default_probe_rho(),
            points: default_probe_points(),
            window: default_probe_window(),
            spread_tol: default_spread_tol(),
            zero_tol: default_zero_tol(),
            diverge_factor: default_diverge_factor(),
            margin_min: default_margin_min(),
            shells: default_shells(),
        }
    }
}

impl ProbeSpec {
    pub fn to_probe(&self, points: Option<usize>) -> LimitProbe {
        let shells = self.shells.max(1);
        LimitProbe {
            z0: self.z0,
            rho: self.rho,
            points: points.unwrap_or(self.points),
            window: self.window,
            spread_tol: self.spread_tol,
            zero_tol: self.zero_tol,
            diverge_factor: self.diverge_factor,
            margin_min: self.margin_min,
            x_samples: if shells == 1 {
                vec![0.5]
            } else {
                (0..shells)
                    .map(|j| j as f64 / (shells - 1) as f64)
                    .collect()
            },
        }
    }
}

fn default_grid() -> usize {
    1024
}
fn default_branch() -> String {
    "auto".to_string()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_branch")]
    pub branch: String,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            grid: default_grid(),
            branch: default_branch(),
        }
    }
}

impl SolverSpec {
    pub fn to_branch(&self) -> Result<SolveBranch, CliError> {
        match self.branch.as_str() {
            "auto" => Ok(SolveBranch::Auto),
            "fixed-point" => Ok(SolveBranch::FixedPoint),
            "shooting" => Ok(SolveBranch::Shooting),
            other => Err(CliError::validation(format!(
                "solver.branch must be auto | fixed-point | shooting, got '{other}'"
            ))),
        }
    }
}

fn default_s_min() -> f64 {
    -50.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    #[serde(default = "default_s_min")]
    pub s_min: f64,
}

impl Default for TransformSpec {
    fn default() -> Self {
        TransformSpec {
            s_min: default_s_min(),
        }
    }
}

fn default_colloc_r_min() -> f64 {
    0.05
}
fn default_colloc_r_max() -> f64 {
    0.95
}
fn default_colloc_count() -> usize {
    24
}
fn default_colloc_dirs() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CollocSpec {
    #[serde(default = "default_colloc_r_min")]
    pub r_min: f64,
    #[serde(default = "default_colloc_r_max")]
    pub r_max: f64,
    #[serde(default = "default_colloc_count")]
    pub count: usize,
    #[serde(default = "default_colloc_dirs")]
    pub directions: usize,
}

impl Default for CollocSpec {
    fn default() -> Self {
        CollocSpec {
            r_min: default_colloc_r_min(),
            r_max: default_colloc_r_max(),
            count: default_colloc_count(),
            directions: default_colloc_dirs(),
        }
    }
}

impl CollocSpec {
    pub fn to_settings(&self, seed: u64) -> Result<CollocationSettings, CliError> {
        if !(0.0 < self.r_min && self.r_min < self.r_max && self.r_max < 1.0) {
            return Err(CliError::validation(
                "collocation needs 0 < r_min < r_max < 1",
            ));
        }
        if self.count < 2 {
            return Err(CliError::validation("collocation needs count >= 2"));
        }
        let radii = (0..self.count)
            .map(|i| {
                let w = i as f64 / (self.count - 1) as f64;
                self.r_min * (1.0 - w) + self.r_max * w
            })
            .collect();
        Ok(CollocationSettings {
            radii,
            directions: self.directions,
            seed,
        })
    }
}

fn default_scan_z_min() -> f64 {
    -1e4
}
fn default_scan_z_max() -> f64 {
    -1e-3
}
fn default_scan_points() -> usize {
    60
}
fn default_scan_shells() -> usize {
    16
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default = "default_scan_z_min")]
    pub z_min: f64,
    #[serde(default = "default_scan_z_max")]
    pub z_max: f64,
    #[serde(default = "default_scan_points")]
    pub z_points: usize,
    #[serde(default = "default_scan_shells")]
    pub shells: usize,
    /// also dump the sampled densities as CSV
    #[serde(default = "default_true")]
    pub csv: bool,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            z_min: default_scan_z_min(),
            z_max: default_scan_z_max(),
            z_points: default_scan_points(),
            shells: default_scan_shells(),
            csv: true,
        }
    }
}

impl ScanSpec {
    pub fn to_grid(&self) -> ScanGrid {
        ScanGrid {
            z_min: self.z_min,
            z_max: self.z_max,
            z_points: self.z_points,
            shells: self.shells,
        }
    }
}

fn default_tables_z_min() -> f64 {
    -10.0
}
fn default_tables_z_max() -> f64 {
    -0.01
}
fn default_tables_points() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TablesSpec {
    #[serde(default = "default_tables_z_min")]
    pub z_min: f64,
    #[serde(default = "default_tables_z_max")]
    pub z_max: f64,
    #[serde(default = "default_tables_points")]
    pub points: usize,
}

impl Default for TablesSpec {
    fn default() -> Self {
        TablesSpec {
            z_min: default_tables_z_min(),
            z_max: default_tables_z_max(),
            points: default_tables_points(),
        }
    }
}

impl TablesSpec {
    pub fn ladder(&self) -> Result<Vec<f64>, CliError> {
        if !(self.z_min < self.z_max && self.z_max < 0.0 && self.points >= 2) {
            return Err(CliError::validation(
                "tables need z_min < z_max < 0 and points >= 2",
            ));
        }
        let ratio = (self.z_min / self.z_max).powf(1.0 / (self.points as f64 - 1.0));
        Ok((0..self.points)
            .map(|j| self.z_max * ratio.powi(j as i32))
            .collect())
    }
}

fn default_cases() -> usize {
    100
}
fn default_identity_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySpec {
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_identity_tol")]
    pub tolerance: f64,
}

impl Default for IdentitySpec {
    fn default() -> Self {
        IdentitySpec {
            cases: default_cases(),
            tolerance: default_identity_tol(),
        }
    }
}

fn default_eigen_cells() -> usize {
    1024
}
fn default_quotient_cells() -> usize {
    512
}
fn default_shooting_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    #[serde(default = "default_eigen_cells")]
    pub cells: usize,
    #[serde(default = "default_quotient_cells")]
    pub quotient_cells: usize,
    #[serde(default = "default_shooting_step")]
    pub shooting_step: f64,
}

impl Default for EigenSpec {
    fn default() -> Self {
        EigenSpec {
            cells: default_eigen_cells(),
            quotient_cells: default_quotient_cells(),
            shooting_step: default_shooting_step(),
        }
    }
}

impl EigenSpec {
    pub fn grid(&self) -> EigenGrid {
        EigenGrid {
            cells: self.cells,
            ..Default::default()
        }
    }

    pub fn quotient_grid(&self) -> EigenGrid {
        EigenGrid {
            cells: self.quotient_cells,
            ..Default::default()
        }
    }
}

/// The whole problem configuration.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// optional; must agree with the command-line workflow when present
    #[serde(default)]
    pub workflow: Option<String>,
    pub n: usize,
    pub k: usize,
    pub f: FSpec,
    #[serde(default)]
    pub g: GSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub big_lambda1: Option<f64>,
    #[serde(default)]
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub ar: Vec<ArSpec>,
    #[serde(default)]
    pub transform: TransformSpec,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub collocation: CollocSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub tables: TablesSpec,
    #[serde(default)]
    pub identity: IdentitySpec,
    #[serde(default)]
    pub eigen: EigenSpec,
}

impl Config {
    pub fn f_family(&self) -> Result<FFamily, CliError> {
        Ok(match &self.f {
            FSpec::Zero => FFamily::Zero,
            FSpec::PowerExp { p } => FFamily::PowerExp { p: *p, k: self.k },
            FSpec::PowerLaw { c, q } => FFamily::PowerLaw { c: *c, q: *q },
            FSpec::ExpCritical {
                b0,
                alpha0,
                gamma,
                exponent,
            } => FFamily::ExpCritical {
                b0: *b0,
                alpha0: *alpha0,
                gamma: *gamma,
                exponent: exponent.unwrap_or((self.n as f64 + 2.0) / self.n as f64),
            },
            FSpec::Expr { expr } => FFamily::Expr(
                Expr::parse(expr, &F_EXPR_VARS)
                    .map_err(|e| CliError::validation(format!("f expression: {e}")))?,
            ),
        })
    }

    pub fn g_family(&self) -> Result<GFamily, CliError> {
        Ok(match &self.g {
            GSpec::Zero => GFamily::Zero,
            GSpec::Const { value } => GFamily::Const(*value),
            GSpec::Linear { slope } => GFamily::Linear(*slope),
            GSpec::Poly { coeffs } => GFamily::Poly(coeffs.clone()),
            GSpec::Expr { expr } => GFamily::Expr(
                Expr::parse(expr, &G_EXPR_VARS)
                    .map_err(|e| CliError::validation(format!("g expression: {e}")))?,
            ),
        })
    }

    pub fn growth_pair(&self) -> Result<GrowthPair, CliError> {
        GrowthPair::new(self.n, self.k, self.f_family()?, self.g_family()?)
            .map_err(|e| CliError::validation(format!("growth pair: {e}")))
    }

    pub fn transform_settings(&self) -> TransformSettings {
        TransformSettings {
            s_min: self.transform.s_min,
            ..Default::default()
        }
    }

    pub fn validate(&self, workflow: &str) -> Result<(), CliError> {
        if !WORKFLOWS.contains(&workflow) {
            return Err(CliError::validation(format!(
                "unknown workflow '{workflow}'; expected one of {}",
                WORKFLOWS.join(", ")
            )));
        }
        if let Some(w) = &self.workflow {
            if w != workflow {
                return Err(CliError::validation(format!(
                    "config names workflow '{w}' but the command line asked for '{workflow}'"
                )));
            }
        }
        if self.k == 0 || self.k > self.n {
            return Err(CliError::validation(format!(
                "need 1 <= k <= n, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        if workflow == "pohozaev" && self.n <= 2 * self.k {
            return Err(CliError::validation(format!(
                "the non-existence scan needs n > 2k, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        // parse expressions and probe the sign hypotheses now so malformed
        // input fails as validation, not mid-run
        self.growth_pair()?;
        if self.solver.grid < 64 {
            return Err(CliError::validation("solver.grid must be at least 64"));
        }
        self.solver.to_branch()?;
        self.collocation.to_settings(self.seed)?;
        self.tables.ladder()?;
        Ok(())
    }
}

/// Apply `--override key.path=value` entries onto the raw JSON document.
pub fn apply_overrides(
    mut doc: serde_json::Value,
    overrides: &[String],
) -> Result<serde_json::Value, CliError> {
    for entry in overrides {
        let (path, raw_value) = entry.split_once('=').ok_or_else(|| {
            CliError::validation(format!("override '{entry}' is not of the form key=value"))
        })?;
        if path.is_empty() {
            return Err(CliError::validation("override key must not be empty"));
        }
        let value: serde_json::Value = serde_json::from_str(raw_value)
            .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
        let segments: Vec<&str> = path.split('.').collect();
        let (last, parents) = segments.split_last().expect("path is nonempty");
        let mut cursor = &mut doc;
        for segment in parents {
            cursor = cursor
                .as_object_mut()
                .ok_or_else(|| {
                    CliError::validation(format!(
                        "override path '{path}' descends into a non-object at '{segment}'"
                    ))
                })?
                .entry(segment.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
        }
        cursor
            .as_object_mut()
            .ok_or_else(|| {
                CliError::validation(format!(
                    "override path '{path}' ends inside a non-object at '{last}'"
                ))
            })?
            .insert(last.to_string(), value);
    }
    Ok(doc)
}
