//! Run files: TOML key/value documents with a fixed schema.

use std::path::{Path, PathBuf};

use fysolve_core::basis::{make_grid, Grid1D, GridMapping};
use fysolve_core::fy3::SystemKind;
use fysolve_core::krylov::SolverOptions;
use fysolve_core::twobody::{PotentialSpec, PotentialTerm, Shape};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("missing `{field}`, required by the {task} task")]
    Missing { field: String, task: Task },
}

fn field(name: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: name.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pair,
    Bound3,
    Scatter3,
    Bound4,
    Chains,
    Sweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Pair => "pair",
            Task::Bound3 => "bound3",
            Task::Scatter3 => "scatter3",
            Task::Bound4 => "bound4",
            Task::Chains => "chains",
            Task::Sweep => "sweep",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    #[default]
    Boson,
    Fermion32,
    Fermion12,
}

impl System {
    pub fn kind(self) -> SystemKind {
        match self {
            System::Boson => SystemKind::Boson,
            System::Fermion32 => SystemKind::Fermion32,
            System::Fermion12 => SystemKind::Fermion12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeName {
    Gaussian,
    Yukawa,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub shape: ShapeName,
    /// In the energy unit of the run file.
    pub strength: f64,
    pub range: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingName {
    Uniform,
    #[default]
    Geometric,
    Tangent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub intervals: i64,
    pub max: f64,
    #[serde(default)]
    pub mapping: MappingName,
    /// Width ratio of neighbouring intervals (geometric mapping).
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Length scale of the tangent mapping.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_ratio() -> f64 {
    1.2
}

fn default_scale() -> f64 {
    2.0
}

impl GridConfig {
    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if self.intervals < 1 {
            return Err(field(
                format!("{name}.intervals"),
                format!("{} (need at least 1 interval)", self.intervals),
            ));
        }
        if !(self.max > 0.0 && self.max.is_finite()) {
            return Err(field(
                format!("{name}.max"),
                format!("{} (must be positive)", self.max),
            ));
        }
        match self.mapping {
            MappingName::Geometric if !(self.ratio > 1.0) => Err(field(
                format!("{name}.ratio"),
                format!("{} (must exceed 1)", self.ratio),
            )),
            MappingName::Tangent if !(self.scale > 0.0) => Err(field(
                format!("{name}.scale"),
                format!("{} (must be positive)", self.scale),
            )),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> fysolve_core::error::Result<Grid1D> {
        self.build_with(self.intervals as usize)
    }

    /// Same grid with `n` intervals; a geometric grid keeps its overall
    /// last-to-first width ratio.
    pub fn build_with(&self, n: usize) -> fysolve_core::error::Result<Grid1D> {
        let mapping = match self.mapping {
            MappingName::Uniform => GridMapping::Uniform,
            MappingName::Geometric => {
                let n0 = self.intervals as f64;
                let ratio = if n > 1 && n0 > 1.0 {
                    self.ratio.powf((n0 - 1.0) / (n as f64 - 1.0))
                } else {
                    self.ratio
                };
                GridMapping::Geometric { ratio }
            }
            MappingName::Tangent => GridMapping::Tangent { scale: self.scale },
        };
        make_grid(n, self.max, mapping)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    #[serde(default = "default_quad")]
    pub u: i64,
    #[serde(default = "default_quad")]
    pub v: i64,
}

fn default_quad() -> i64 {
    10
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            u: default_quad(),
            v: default_quad(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    #[serde(default = "default_tol_e")]
    pub tol_e: f64,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_max_inner")]
    pub max_inner: i64,
    #[serde(default = "default_max_outer")]
    pub max_outer: i64,
}

fn default_tol_e() -> f64 {
    SolverOptions::default().tol_e
}

fn default_inner_tol() -> f64 {
    SolverOptions::default().inner_tol
}

fn default_max_inner() -> i64 {
    SolverOptions::default().max_inner as i64
}

fn default_max_outer() -> i64 {
    SolverOptions::default().max_outer as i64
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            tol_e: default_tol_e(),
            inner_tol: default_inner_tol(),
            max_inner: default_max_inner(),
            max_outer: default_max_outer(),
        }
    }
}

impl Solver {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol_e: self.tol_e,
            inner_tol: self.inner_tol,
            max_inner: self.max_inner as usize,
            max_outer: self.max_outer as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Energy {
    /// Starting shift of inverse iteration (bound tasks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guess: Option<f64>,
    /// Breakup threshold for `bound4`; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Total energy of a scattering run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<f64>,
    #[serde(default)]
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<i64>,
    #[serde(default = "default_csv")]
    pub csv: String,
}

fn default_csv() -> String {
    "sweep.csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chains {
    pub n: i64,
    #[serde(default)]
    pub classes: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default)]
    pub system: System,
    /// Value of ħ²/m in the run file's units; energies are divided by it.
    #[serde(default = "default_unit")]
    pub hbar2_over_m: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub potential: Vec<TermConfig>,
    #[serde(default)]
    pub grid: Grids,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub energy: Energy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Chains>,
}

fn default_unit() -> f64 {
    1.0
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML form with every default written out.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.hbar2_over_m > 0.0 && self.hbar2_over_m.is_finite()) {
            return Err(field(
                "hbar2_over_m",
                format!("{} (must be positive)", self.hbar2_over_m),
            ));
        }
        for (i, t) in self.potential.iter().enumerate() {
            if !(t.range > 0.0) {
                return Err(field(
                    format!("potential[{i}].range"),
                    format!("{} (must be positive)", t.range),
                ));
            }
            if !t.strength.is_finite() {
                return Err(field(format!("potential[{i}].strength"), "not finite"));
            }
        }
        for (name, g) in [
            ("grid.x", &self.grid.x),
            ("grid.y", &self.grid.y),
            ("grid.z", &self.grid.z),
        ] {
            if let Some(g) = g {
                g.validate(name)?;
            }
        }
        for (name, q) in [
            ("quadrature.u", self.quadrature.u),
            ("quadrature.v", self.quadrature.v),
        ] {
            if !(1..=64).contains(&q) {
                return Err(field(name, format!("{q} (order must lie in 1..=64)")));
            }
        }
        for (name, t) in [
            ("solver.tol_e", self.solver.tol_e),
            ("solver.inner_tol", self.solver.inner_tol),
        ] {
            if !(t > 0.0) {
                return Err(field(name, format!("{t} (tolerances must be positive)")));
            }
        }
        for (name, m) in [
            ("solver.max_inner", self.solver.max_inner),
            ("solver.max_outer", self.solver.max_outer),
        ] {
            if m < 1 {
                return Err(field(name, format!("{m} (must be at least 1)")));
            }
        }
        if let Some(s) = &self.sweep {
            if let Some(&n) = s.intervals.iter().find(|&&n| n < 1) {
                return Err(field(
                    "sweep.intervals",
                    format!("{n} (need at least 1 interval)"),
                ));
            }
        }
        if let Some(c) = &self.chains {
            if !(2..=8).contains(&c.n) {
                return Err(field("chains.n", format!("{} (must lie in 2..=8)", c.n)));
            }
        }
        Ok(())
    }

    /// Checks that everything `task` needs is present.
    pub fn require(&self, task: Task) -> Result<(), ConfigError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(field(
                    "task",
                    format!("run file declares {t} but the {task} task was requested"),
                ));
            }
        }
        let missing = |f: &str| ConfigError::Missing {
            field: f.into(),
            task,
        };
        let needs_potential = !matches!(task, Task::Chains | Task::Sweep);
        if needs_potential && self.potential.is_empty() {
            return Err(missing("potential"));
        }
        match task {
            Task::Pair => {
                self.grid.x.as_ref().ok_or_else(|| missing("grid.x"))?;
            }
            Task::Bound3 | Task::Scatter3 | Task::Bound4 => {
                self.grid.x.as_ref().ok_or_else(|| missing("grid.x"))?;
                self.grid.y.as_ref().ok_or_else(|| missing("grid.y"))?;
                if task == Task::Bound4 {
                    self.grid.z.as_ref().ok_or_else(|| missing("grid.z"))?;
                    if self.system != System::Boson {
                        return Err(field(
                            "system",
                            "the four-body solver handles identical bosons only",
                        ));
                    }
                }
                if task == Task::Scatter3 {
                    self.energy
                        .scatter
                        .ok_or_else(|| missing("energy.scatter"))?;
                    if self.energy.channel >= self.system.kind().n_amp() {
                        return Err(field(
                            "energy.channel",
                            format!("{} (system has fewer amplitudes)", self.energy.channel),
                        ));
                    }
                } else {
                    self.energy.guess.ok_or_else(|| missing("energy.guess"))?;
                }
            }
            Task::Chains => {
                self.chains.as_ref().ok_or_else(|| missing("chains"))?;
            }
            Task::Sweep => {
                let s = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
                match s.task {
                    Task::Scatter3 => {
                        if s.energies.is_empty() {
                            return Err(missing("sweep.energies"));
                        }
                        let mut inner = self.clone();
                        inner.task = None;
                        inner.energy.scatter = Some(s.energies[0]);
                        inner.require(Task::Scatter3)?;
                    }
                    Task::Pair | Task::Bound3 | Task::Bound4 => {
                        if s.intervals.is_empty() {
                            return Err(missing("sweep.intervals"));
                        }
                        let mut inner = self.clone();
                        inner.task = None;
                        inner.require(s.task)?;
                    }
                    other => return Err(field("sweep.task", format!("{other} cannot be swept"))),
                }
            }
        }
        Ok(())
    }

    /// Potential in internal units (ħ²/m = 1).
    pub fn potential_spec(&self) -> fysolve_core::error::Result<PotentialSpec> {
        let terms = self
            .potential
            .iter()
            .map(|t| {
                let shape = match t.shape {
                    ShapeName::Gaussian => Shape::Gaussian,
                    ShapeName::Yukawa => Shape::Yukawa,
                    ShapeName::Exponential => Shape::Exponential,
                };
                PotentialTerm {
                    amplitudes: t.amplitudes.clone(),
                    ..PotentialTerm::new(shape, t.strength / self.hbar2_over_m, t.range)
                }
            })
            .collect();
        PotentialSpec::new(terms)
    }

    /// Largest potential range, used for the box-size warning.
    pub fn longest_range(&self) -> f64 {
        self.potential.iter().map(|t| t.range).fold(0.0, f64::max)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    RunConfig::parse(&text)
}
