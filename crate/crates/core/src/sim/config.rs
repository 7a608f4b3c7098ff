//! Run configuration in TOML form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amr::{GridSpec, RefinementParams};
use crate::elastic::SourceSpec;
use crate::error::{Error, Result};
use crate::geometry::{GeometrySpec, MaterialLayout};
use crate::riemann::SolverKind;
use crate::solver::SolverConfig;
use crate::state::{COMPONENT_NAMES, NEVOLVED};

/// Outer box and level-0 grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub cells: [usize; 2],
    #[serde(default)]
    pub periodic: [bool; 2],
}

impl DomainConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            lo: self.lo,
            hi: self.hi,
            dims: self.cells,
            periodic: self.periodic,
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|d| x[d] >= self.lo[d] && x[d] <= self.hi[d])
    }
}

/// Numerical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub degree: usize,
    pub cfl: f64,
    pub solver: SolverKind,
    pub eps0: f64,
    pub path_order: usize,
    pub picard_tolerance: f64,
    pub mask_eps: f64,
    pub refinement: RefinementParams,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        DiscretizationConfig {
            degree: s.degree,
            cfl: s.cfl,
            solver: s.solver,
            eps0: s.eps0,
            path_order: s.path_order,
            picard_tolerance: s.picard_tolerance,
            mask_eps: s.mask_eps,
            refinement: RefinementParams::default(),
        }
    }
}

impl DiscretizationConfig {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            degree: self.degree,
            cfl: self.cfl,
            solver: self.solver,
            eps0: self.eps0,
            path_order: self.path_order,
            picard_tolerance: self.picard_tolerance,
            mask_eps: self.mask_eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
}

/// Initial perturbation added to the material state at rest.
///
/// The nine entries of `delta` are (σxx, σyy, σzz, σxy, σyz, σxz, u, v, w)
/// with physical velocities; they are scaled by α when stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Rest,
    /// `delta · exp(−((x − center)·direction)² / halfwidth²)`.
    Gaussian {
        delta: [f64; NEVOLVED],
        center: [f64; 2],
        direction: [f64; 2],
        halfwidth: f64,
    },
    /// `delta · sin(wavevector · x)`.
    Sine {
        delta: [f64; NEVOLVED],
        wavevector: [f64; 2],
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Rest
    }
}

impl InitialCondition {
    /// Perturbation at `x` before α scaling.
    pub fn perturbation(&self, x: [f64; 2]) -> [f64; NEVOLVED] {
        let (delta, s) = match *self {
            InitialCondition::Rest => return [0.0; NEVOLVED],
            InitialCondition::Gaussian {
                delta,
                center,
                direction,
                halfwidth,
            } => {
                let r = (x[0] - center[0]) * direction[0] + (x[1] - center[1]) * direction[1];
                (delta, (-(r * r) / (halfwidth * halfwidth)).exp())
            }
            InitialCondition::Sine { delta, wavevector } => (delta, (wavevector[0] * x[0] + wavevector[1] * x[1]).sin()),
        };
        delta.map(|d| d * s)
    }
}

/// A seismometer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    pub id: String,
    pub position: [f64; 2],
    /// Recorded components; velocities are named `u`, `v`, `w`.
    #[serde(default = "default_components")]
    pub components: Vec<String>,
}

pub fn default_components() -> Vec<String> {
    ["u", "v", "w"]
        .iter()
        .map(|s| s.to_string())
        .chain(COMPONENT_NAMES[..6].iter().map(|s| s.to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Snapshot every this many steps; 0 keeps only the initial and final ones.
    pub snapshot_every: usize,
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("output"),
            snapshot_every: 0,
            snapshots: true,
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub domain: DomainConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    pub time: TimeConfig,
    pub geometry: GeometrySpec,
    pub materials: MaterialLayout,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub receivers: Vec<ReceiverConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

const REQUIRED: [&str; 5] = ["name", "domain", "time", "geometry", "materials"];

impl RunConfig {
    /// Parses and validates a configuration text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
            key: String::from("<document>"),
            message: e.message().to_string(),
        })?;
        for key in REQUIRED {
            if !table.contains_key(key) {
                return Err(Error::config(key, "missing required section"));
            }
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            key: String::from("<document>"),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.grid_spec().validate()?;
        self.discretization.solver_config().validate()?;
        self.discretization.refinement.validate()?;
        if !(self.time.t_end >= 0.0) {
            return Err(Error::config("time.t_end", "must be non-negative"));
        }
        self.geometry.profile.validate()?;
        self.materials.validate()?;
        if let Some(s) = &self.source {
            s.validate()?;
            if !self.domain.contains(s.location) {
                return Err(Error::config("source.location", "outside the domain box"));
            }
        }
        if let InitialCondition::Gaussian { halfwidth, .. } = self.initial {
            if !(halfwidth > 0.0) {
                return Err(Error::config("initial.halfwidth", "must be positive"));
            }
        }
        let mut ids = std::collections::HashSet::new();
        for (k, r) in self.receivers.iter().enumerate() {
            if !self.domain.contains(r.position) {
                return Err(Error::config(format!("receivers[{k}].position"), "outside the domain box"));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(Error::config(format!("receivers[{k}].id"), "duplicate receiver id"));
            }
            for c in &r.components {
                if component_index(c).is_none() {
                    return Err(Error::config(
                        format!("receivers[{k}].components"),
                        format!("unknown component `{c}`"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Recorded quantity behind a component name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Stored state entry.
    Stored(usize),
    /// Physical velocity along an axis.
    Velocity(usize),
}

pub fn component_index(name: &str) -> Option<Component> {
    match name {
        "u" => Some(Component::Velocity(0)),
        "v" => Some(Component::Velocity(1)),
        "w" => Some(Component::Velocity(2)),
        _ => COMPONENT_NAMES.iter().position(|c| *c == name).map(Component::Stored),
    }
}
