//! Scenario files and the `kwave` subcommands.
//!
//! A scenario is a JSON object; unknown keys are rejected.
//!
//! ```json
//! {
//!   "n": 2, "t0": 2.0, "x0": 1.0, "dxi": 0.0333, "dtau": 0.0167,
//!   "f": { "type": "gaussian", "amplitude": 1.0, "sigma": 0.1, "center": [0.0, 0.0] },
//!   "h": { "type": "zero" },
//!   "obstacle": { "type": "disk", "center": [0.5, 0.0], "radius": 0.15 },
//!   "query_times": [2.5, 3.0],
//!   "image": { "min": [-2.0, -2.0], "spacing": 0.02, "counts": [200, 200] },
//!   "output_dir": "out"
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GaussianPulse, InitialField, ZeroField};
use crate::frames::LatticeGeometry;
use crate::io::{save_frameset, write_frame, write_pgm};
use crate::kelvin::{size_grid, GridSpec, ProblemSpec};
use crate::minkowski::SpacetimePoint;
use crate::obstacle::ObstacleSpec;
use crate::oracle::{
    compare, convergence_study, run_reference, ComparisonReport, ComparisonWindow,
    ConvergenceReport, ConvergenceScenario, ReferenceConfig,
};
use crate::query::query_frame;
use crate::solver::{run_with, Seeding, SolverOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Zero,
    Gaussian {
        #[serde(default = "unit")]
        amplitude: f64,
        sigma: f64,
        center: Vec<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

impl FieldConfig {
    fn build(&self) -> Arc<dyn InitialField> {
        match self {
            FieldConfig::Zero => Arc::new(ZeroField),
            FieldConfig::Gaussian {
                amplitude,
                sigma,
                center,
            } => Arc::new(GaussianPulse::new(*amplitude, *sigma, center.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstacleConfig {
    Disk { center: Vec<f64>, radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl ObstacleConfig {
    fn build(&self) -> ObstacleSpec {
        match self {
            ObstacleConfig::Disk { center, radius } => ObstacleSpec::Disk {
                center: center.clone(),
                radius: *radius,
            },
            ObstacleConfig::Polygon { vertices } => ObstacleSpec::Polygon {
                vertices: vertices.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApexShift {
    pub x: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageConfig {
    pub min: Vec<f64>,
    pub spacing: f64,
    pub counts: Vec<usize>,
}

impl ImageConfig {
    pub fn geometry(&self) -> LatticeGeometry {
        LatticeGeometry::new(self.counts.clone(), self.min.clone(), self.spacing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryPointConfig {
    pub x: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvergenceConfig {
    /// Solver-only standing wave.
    StandingWave {
        #[serde(default = "three")]
        levels: usize,
        base_cells: usize,
    },
    /// `n = 1` pipeline against the closed form at the listed points.
    Dalembert {
        #[serde(default = "three")]
        levels: usize,
        queries: Vec<QueryPointConfig>,
    },
    /// Pipeline against the reference, both refined together. Uses the
    /// `reference` and `compare` sections.
    Reference {
        #[serde(default = "three")]
        levels: usize,
    },
}

fn three() -> usize {
    3
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub t0: f64,
    pub x0: f64,
    pub dxi: f64,
    pub dtau: f64,
    pub f: FieldConfig,
    #[serde(default = "zero_field")]
    pub h: FieldConfig,
    #[serde(default)]
    pub obstacle: Option<ObstacleConfig>,
    #[serde(default)]
    pub apex_shift: Option<ApexShift>,
    #[serde(default)]
    pub seeding: Seeding,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub query_times: Vec<f64>,
    #[serde(default)]
    pub image: Option<ImageConfig>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
    #[serde(default)]
    pub compare: Option<ComparisonWindow>,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
}

fn zero_field() -> FieldConfig {
    FieldConfig::Zero
}

fn default_output() -> PathBuf {
    PathBuf::from("kwave-out")
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl ScenarioConfig {
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let obstacle = self.obstacle.as_ref().map_or(ObstacleSpec::None, |o| o.build());
        match &self.apex_shift {
            None => ProblemSpec::new(self.n, self.t0, self.x0, self.f.build(), self.h.build(), obstacle),
            Some(shift) => ProblemSpec::with_apex_shift(
                self.n,
                self.t0,
                self.x0,
                self.f.build(),
                self.h.build(),
                obstacle,
                SpacetimePoint::new(&shift.x, shift.t),
            ),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let spec = self.problem_spec()?;
        size_grid(spec.x0(), spec.t0(), self.dxi, self.dtau, self.n)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            seeding: self.seeding,
            stride: self.stride,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(config_err("n", "must be 1, 2 or 3"));
        }
        if !(self.dxi > 0.0) {
            return Err(config_err("dxi", "must be positive"));
        }
        if !(self.dtau > 0.0) {
            return Err(config_err("dtau", "must be positive"));
        }
        if !(self.t0 > self.x0) {
            return Err(config_err(
                "t0",
                format!("t0 > x0 required (t0 = {}, x0 = {})", self.t0, self.x0),
            ));
        }
        for (key, field) in [("f", &self.f), ("h", &self.h)] {
            if let FieldConfig::Gaussian { sigma, center, .. } = field {
                if center.len() != self.n {
                    return Err(config_err(key, format!("center must have {} coordinates", self.n)));
                }
                if !(*sigma > 0.0) {
                    return Err(config_err(key, "sigma must be positive"));
                }
            }
        }
        if let Some(shift) = &self.apex_shift {
            if shift.x.len() != self.n {
                return Err(config_err("apex_shift", format!("x must have {} coordinates", self.n)));
            }
        }
        if self.stride == 0 {
            return Err(config_err("stride", "must be at least 1"));
        }
        let spec = self.problem_spec().map_err(|e| match e {
            Error::InvalidSpec(msg) => {
                let key = if msg.contains("obstacle") || msg.contains("polygon") || msg.contains("disk") {
                    "obstacle"
                } else if msg.contains("support of h") {
                    "h"
                } else if msg.contains("support of f") {
                    "f"
                } else {
                    "t0"
                };
                config_err(key, msg)
            }
            other => other,
        })?;
        let gs = self.grid_spec()?;
        if gs.steps % self.stride != 0 {
            return Err(config_err(
                "stride",
                format!("must divide the step count N = {}", gs.steps),
            ));
        }
        for &t in &self.query_times {
            if !(t >= spec.t0() - spec.apex_shift().t) || !t.is_finite() {
                return Err(config_err("query_times", format!("{t} precedes t0")));
            }
        }
        if let Some(img) = &self.image {
            if img.min.len() != self.n || img.counts.len() != self.n {
                return Err(config_err("image", format!("min and counts need {} entries", self.n)));
            }
            if !(img.spacing > 0.0) || img.counts.contains(&0) {
                return Err(config_err("image", "spacing and counts must be positive"));
            }
        }
        if let Some(r) = &self.reference {
            if !(r.dx > 0.0 && r.dt > 0.0 && r.t_max > self.t0) || r.record_every == 0 {
                return Err(config_err(
                    "reference",
                    "dx, dt, record_every must be positive and t_max > t0",
                ));
            }
        }
        if let Some(w) = &self.compare {
            if !(w.t_max >= w.t_min && w.radius > 0.0) {
                return Err(config_err("compare", "need t_max >= t_min and radius > 0"));
            }
        }
        match &self.convergence {
            Some(ConvergenceConfig::StandingWave { levels, base_cells }) => {
                if *levels < 3 || *base_cells < 2 {
                    return Err(config_err("convergence", "levels >= 3 and base_cells >= 2 required"));
                }
            }
            Some(ConvergenceConfig::Dalembert { levels, queries }) => {
                if *levels < 3 || self.n != 1 || queries.is_empty() {
                    return Err(config_err(
                        "convergence",
                        "dalembert needs n = 1, levels >= 3 and at least one query",
                    ));
                }
            }
            Some(ConvergenceConfig::Reference { levels }) => {
                if *levels < 3 || self.reference.is_none() || self.compare.is_none() {
                    return Err(config_err(
                        "convergence",
                        "reference study needs levels >= 3 plus reference and compare sections",
                    ));
                }
            }
            None => {}
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) => 2,
        Error::Cfl { .. } => 3,
        Error::NumericBlowUp { .. } => 4,
        _ => 1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    /// Total spatial points `M`.
    pub m: usize,
    /// Time steps `N`.
    pub n_steps: usize,
    pub points_per_axis: usize,
    pub xi0: f64,
    pub tau0: f64,
    pub dxi: f64,
    pub dtau: f64,
    pub steps_taken: usize,
    pub frames: usize,
    pub seconds: f64,
    pub threads: usize,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn image_rows_cols(geom: &LatticeGeometry) -> (usize, usize, usize) {
    // (rows, cols, offset of the slice); 3-D exports the middle slice.
    match geom.dims.as_slice() {
        [m] => (1, *m, 0),
        [a, b] => (*a, *b, 0),
        [a, b, c] => (*b, *c, (a / 2) * b * c),
        _ => unreachable!("dimension is validated"),
    }
}

/// Solves, writes `frameset.kwf`, one `frame_XXX.kwf`/`.pgm` pair per query
/// time, and `cost.json`.
pub fn cmd_run(cfg: &ScenarioConfig) -> Result<CostReport> {
    let spec = cfg.problem_spec()?;
    let gs = cfg.grid_spec()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let (frames, cost) = run_with(&spec, &gs, cfg.solver_options())?;
    save_frameset(&cfg.output_dir.join("frameset.kwf"), &frames)?;

    if let Some(img) = &cfg.image {
        let window = img.geometry();
        for (i, &t) in cfg.query_times.iter().enumerate() {
            let values = query_frame(&frames, &spec, t, &window);
            let mut bin = Vec::new();
            write_frame(&mut bin, &window, t, &values)?;
            fs::write(cfg.output_dir.join(format!("frame_{i:03}.kwf")), bin)?;
            let (rows, cols, offset) = image_rows_cols(&window);
            let mut pgm = Vec::new();
            write_pgm(&mut pgm, rows, cols, &values[offset..offset + rows * cols])?;
            fs::write(cfg.output_dir.join(format!("frame_{i:03}.pgm")), pgm)?;
        }
    }

    let report = CostReport {
        m: gs.m_total,
        n_steps: gs.steps,
        points_per_axis: gs.points_per_axis,
        xi0: gs.xi0,
        tau0: gs.tau0,
        dxi: gs.dxi,
        dtau: gs.dtau,
        steps_taken: cost.steps,
        frames: frames.len(),
        seconds: cost.seconds,
        threads: rayon::current_num_threads(),
    };
    write_json(&cfg.output_dir.join("cost.json"), &report)?;
    Ok(report)
}

fn reference_section(cfg: &ScenarioConfig) -> Result<&ReferenceConfig> {
    cfg.reference
        .as_ref()
        .ok_or_else(|| config_err("reference", "section is required for this subcommand"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceSummary {
    pub frames: usize,
    pub dims: Vec<usize>,
    pub dx: f64,
    pub dt: f64,
    pub t_first: f64,
    pub t_last: f64,
}

/// Runs the truncated-box reference; writes `reference.kwf` and
/// `reference.json`.
pub fn cmd_reference(cfg: &ScenarioConfig) -> Result<ReferenceSummary> {
    let spec = cfg.problem_spec()?;
    let frames = run_reference(&spec, reference_section(cfg)?)?;
    fs::create_dir_all(&cfg.output_dir)?;
    save_frameset(&cfg.output_dir.join("reference.kwf"), &frames)?;
    let summary = ReferenceSummary {
        frames: frames.len(),
        dims: frames.geometry.dims.clone(),
        dx: frames.geometry.spacing,
        dt: frames.dt(),
        t_first: frames.times.first().copied().unwrap_or(f64::NAN),
        t_last: frames.times.last().copied().unwrap_or(f64::NAN),
    };
    write_json(&cfg.output_dir.join("reference.json"), &summary)?;
    Ok(summary)
}

/// Runs both solvers and writes `compare.json`.
pub fn cmd_compare(cfg: &ScenarioConfig) -> Result<ComparisonReport> {
    let spec = cfg.problem_spec()?;
    let gs = cfg.grid_spec()?;
    let reference_cfg = reference_section(cfg)?;
    let window = cfg
        .compare
        .clone()
        .ok_or_else(|| config_err("compare", "section is required for this subcommand"))?;
    let (frames, _) = run_with(&spec, &gs, cfg.solver_options())?;
    let reference = run_reference(&spec, reference_cfg)?;
    let report = compare(&frames, &spec, &reference, &window);
    fs::create_dir_all(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("compare.json"), &report)?;
    Ok(report)
}

/// Runs the configured refinement study and writes `convergence.json`.
pub fn cmd_convergence(cfg: &ScenarioConfig) -> Result<ConvergenceReport> {
    let spec = cfg.problem_spec()?;
    let gs = cfg.grid_spec()?;
    let courant = gs.dtau / gs.dxi;
    let study = cfg
        .convergence
        .as_ref()
        .ok_or_else(|| config_err("convergence", "section is required for this subcommand"))?;
    let (scenario, levels) = match study {
        ConvergenceConfig::StandingWave { levels, base_cells } => (
            ConvergenceScenario::StandingWave {
                base_cells: *base_cells,
            },
            *levels,
        ),
        ConvergenceConfig::Dalembert { levels, queries } => (
            ConvergenceScenario::Dalembert {
                spec,
                base_points: gs.points_per_axis,
                courant,
                seeding: cfg.seeding,
                queries: queries.iter().map(|q| SpacetimePoint::new(&q.x, q.t)).collect(),
            },
            *levels,
        ),
        ConvergenceConfig::Reference { levels } => (
            ConvergenceScenario::Reference {
                spec,
                base_points: gs.points_per_axis,
                courant,
                reference: reference_section(cfg)?.clone(),
                window: cfg.compare.clone().expect("validated"),
            },
            *levels,
        ),
    };
    let report = convergence_study(&scenario, levels)?;
    fs::create_dir_all(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("convergence.json"), &report)?;
    Ok(report)
}
