//! Experiment configuration: TOML with one table per section.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Direction, IntegratorConfig};
use crate::hj::Grid;
use crate::model::{Family, HamiltonianModel, MonotoneSign, TrigPotential, TrigTerm, MAX_DIM};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub attractor: AttractorSection,
    #[serde(default)]
    pub structure: StructureSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialTerm {
    pub freq: Vec<i32>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    pub lambda: f64,
    #[serde(default = "minus")]
    pub monotone_sign: MonotoneSign,
    #[serde(default = "one")]
    pub kinetic_scale: f64,
    pub dim: usize,
    #[serde(default)]
    pub potential: Vec<PotentialTerm>,
}

fn minus() -> MonotoneSign {
    MonotoneSign::Minus
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    /// Previously solved grid function to reuse instead of solving.
    pub u_file: Option<PathBuf>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 256, u_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_final: f64,
    pub direction: Direction,
    pub blow_up_radius: f64,
    pub equilibrium_tol: f64,
    pub stop_at_equilibrium: bool,
    pub energy_projection: bool,
    pub initial: Option<InitialPoint>,
}

impl Default for FlowSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: d.max_step,
            t_final: d.t_final,
            direction: d.direction,
            blow_up_radius: d.blow_up_radius,
            equilibrium_tol: d.equilibrium_tol,
            stop_at_equilibrium: d.stop_at_equilibrium,
            energy_projection: d.energy_projection,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttractorSection {
    pub delta: f64,
    pub n_samples: usize,
    pub seed: Option<u64>,
    /// Flow time; defaults to `20/λ`.
    pub t: Option<f64>,
    pub energy_band: bool,
    pub cluster_factor: f64,
    pub retraction_samples: usize,
    pub retraction_steps: usize,
}

impl Default for AttractorSection {
    fn default() -> Self {
        Self {
            delta: 0.5,
            n_samples: 1000,
            seed: None,
            t: None,
            energy_band: true,
            cluster_factor: 5.0,
            retraction_samples: 0,
            retraction_steps: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StructureSection {
    pub eps: f64,
    pub tol_struct: f64,
    pub seed_density: usize,
    pub t_max: f64,
}

impl Default for StructureSection {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            tol_struct: crate::structure::TOL_STRUCT,
            seed_density: 16,
            t_max: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    pub density: usize,
    /// Defaults to twice `P(0, U)` at the constant lower bound.
    pub p_radius: Option<f64>,
    pub u_min: Option<f64>,
    pub u_max: Option<f64>,
    /// `(e, U)` pairs for the coercivity table.
    pub requests: Vec<(f64, f64)>,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            density: 8,
            p_radius: None,
            u_min: None,
            u_max: None,
            requests: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates every section.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.model()?;
        self.grid()?;
        self.integrator().validate().map_err(|e| Error::Config(format!("flow: {e}")))?;
        if let Some(init) = &self.flow.initial {
            if init.x.len() != self.model.dim || init.p.len() != self.model.dim {
                return Err(Error::Config("flow.initial: x and p must have model.dim entries".into()));
            }
        }
        let a = &self.attractor;
        if !(a.delta > 0.0) || !a.delta.is_finite() {
            return Err(Error::Config(format!("attractor.delta must be > 0, got {}", a.delta)));
        }
        if let Some(t) = a.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("attractor.t must be > 0, got {t}")));
            }
        }
        if !(a.cluster_factor > 0.0) {
            return Err(Error::Config("attractor.cluster_factor must be > 0".into()));
        }
        let s = &self.structure;
        if !(s.eps > 0.0 && s.tol_struct > 0.0 && s.t_max > 0.0) || s.seed_density < 2 {
            return Err(Error::Config(
                "structure: eps, tol_struct, t_max must be > 0 and seed_density >= 2".into(),
            ));
        }
        if self.check.density < 8 {
            return Err(Error::Config(format!("check.density must be >= 8, got {}", self.check.density)));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<HamiltonianModel> {
        let m = &self.model;
        if m.dim == 0 || m.dim > MAX_DIM {
            return Err(Error::Config(format!("model.dim must be 1 or 2, got {}", m.dim)));
        }
        let mut terms = Vec::with_capacity(m.potential.len());
        for t in &m.potential {
            if t.freq.len() != m.dim {
                return Err(Error::Config(format!(
                    "model.potential: frequency {:?} needs {} entries",
                    t.freq, m.dim
                )));
            }
            let mut term = TrigTerm::cos(&t.freq, t.amplitude);
            term.phase = t.phase;
            terms.push(term);
        }
        if terms.is_empty() {
            terms.push(TrigTerm::cos(&vec![0; m.dim], 0.0));
        }
        let potential = TrigPotential::new(m.dim, terms).map_err(|e| Error::Config(format!("model: {e}")))?;
        HamiltonianModel::new(m.family, m.lambda, m.monotone_sign, potential, m.kinetic_scale)
            .map_err(|e| Error::Config(format!("model: {e}")))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.model.dim, self.grid.n).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let f = &self.flow;
        IntegratorConfig {
            rel_tol: f.rel_tol,
            abs_tol: f.abs_tol,
            max_step: f.max_step,
            t_final: f.t_final,
            direction: f.direction,
            blow_up_radius: f.blow_up_radius,
            equilibrium_tol: f.equilibrium_tol,
            stop_at_equilibrium: f.stop_at_equilibrium,
            energy_projection: f.energy_projection,
        }
    }

    /// Mandatory for the commands that sample.
    pub fn seed(&self) -> Result<u64> {
        self.attractor
            .seed
            .ok_or_else(|| Error::Config("attractor.seed is required for sampling runs".into()))
    }

    pub fn attractor_time(&self) -> f64 {
        self.attractor.t.unwrap_or(20.0 / self.model.lambda)
    }
}
