//! Scenario configuration: JSON schema, defaults and validation.
//!
//! Every field is optional in the file; omitted values fall back to the
//! reference parameter set (porosities 0.2 / 0.01 / 0.1, fracture porosity 1,
//! natural-fracture and vug permeabilities 1e-12 / 1e-13 um^2, resolved
//! fracture permeability 8.2606e-8 um^2, c = 1.4504e-8 kPa^-1, mu = 8e-3
//! Pa*s, u0 = 2.0684e7 kPa, B0 = 1.1, sigma = 1/h_min^2). The default domain
//! is 4572 m x 4572 m (15000 ft a side). The matrix permeability has no
//! reference value and defaults to a constant 1e-11 um^2.
//!
//! Quantities are used in these units directly, without conversion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub domain: DomainConfig,
    pub fluid: FluidConfig,
    pub continua: ContinuaConfig,
    pub fractures: Vec<FractureConfig>,
    pub exchange: ExchangeConfig,
    pub boundary: BoundaryConfig,
    pub wells: Vec<WellConfig>,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    pub basis: BasisConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    /// box size in meters
    pub extent: [f64; 2],
    /// fine lattice cells
    pub fine: [usize; 2],
    /// coarse blocks
    pub coarse: [usize; 2],
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            extent: [4572.0, 4572.0],
            fine: [64, 64],
            coarse: [8, 8],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidConfig {
    /// kPa^-1
    pub compressibility: f64,
    /// Pa*s
    pub viscosity: f64,
    /// m^3/m^3
    pub fvf_ref: f64,
    /// kPa
    pub ref_pressure: f64,
}

impl Default for FluidConfig {
    fn default() -> Self {
        FluidConfig {
            compressibility: 1.4504e-8,
            viscosity: 8e-3,
            fvf_ref: 1.1,
            ref_pressure: 2.0684e7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PermeabilitySpec {
    Constant { value: f64 },
    Synthetic { seed: u64, contrast: f64, base: f64 },
    Csv { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuumConfig {
    pub porosity: f64,
    pub permeability: PermeabilitySpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuaConfig {
    pub matrix: ContinuumConfig,
    pub fracture: ContinuumConfig,
    pub vug: ContinuumConfig,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        ContinuumConfig {
            porosity: 0.2,
            permeability: PermeabilitySpec::Constant { value: 1e-11 },
        }
    }
}

impl Default for ContinuaConfig {
    fn default() -> Self {
        ContinuaConfig {
            matrix: ContinuumConfig::default(),
            fracture: ContinuumConfig {
                porosity: 0.01,
                permeability: PermeabilitySpec::Constant { value: 1e-12 },
            },
            vug: ContinuumConfig {
                porosity: 0.1,
                permeability: PermeabilitySpec::Constant { value: 1e-13 },
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FractureConfig {
    /// polyline vertices (m)
    pub points: Vec<[f64; 2]>,
    /// aperture (m)
    pub aperture: f64,
    /// intrinsic permeability (um^2)
    pub permeability: f64,
    pub porosity: f64,
}

impl Default for FractureConfig {
    fn default() -> Self {
        FractureConfig {
            points: Vec::new(),
            aperture: 0.01,
            permeability: 8.2606e-8,
            porosity: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExchangeConfig {
    /// shape factor (m^-2); omitted means 1/h_min^2
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideBc {
    Dirichlet(f64),
    Neumann(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    pub bottom: SideBc,
    pub right: SideBc,
    pub top: SideBc,
    pub left: SideBc,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            bottom: SideBc::Neumann(0.0),
            right: SideBc::Neumann(0.0),
            top: SideBc::Neumann(0.0),
            left: SideBc::Neumann(0.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WellConfig {
    pub x: f64,
    pub y: f64,
    /// m^3/day, positive injects
    pub rate: f64,
    /// "matrix" | "fracture" | "vug"
    pub continuum: String,
}

impl Default for WellConfig {
    fn default() -> Self {
        WellConfig {
            x: 0.0,
            y: 0.0,
            rate: 0.0,
            continuum: "matrix".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// constant pressure everywhere; omitted value means the reference pressure
    Constant { value: Option<f64> },
    /// base + amplitude * exp(-|x - center|^2 / (2 radius^2)) in every continuum
    Bump {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
        base: Option<f64>,
    },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Constant { value: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    /// days
    pub dt: f64,
    /// days
    pub t_end: f64,
    /// "linearized" | "fixed_point"
    pub scheme: String,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            dt: 0.1,
            t_end: 1.0,
            scheme: "linearized".to_string(),
            tolerance: 1e-8,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    /// basis functions per coarse node
    pub count: usize,
    /// optional adaptive rule: keep eigenvalues at or below this threshold
    /// (at least one mode per node)
    pub lambda_threshold: Option<f64>,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig {
            count: 8,
            lambda_threshold: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".to_string(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| err("<config>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = &self.domain;
        if !(d.extent[0] > 0.0 && d.extent[1] > 0.0) {
            return Err(err("domain.extent", "both extents must be positive"));
        }
        if d.fine[0] < 2 || d.fine[1] < 2 {
            return Err(err("domain.fine", "needs at least 2 cells per direction"));
        }
        if d.coarse[0] == 0 || d.coarse[1] == 0 {
            return Err(err("domain.coarse", "needs at least 1 block per direction"));
        }
        for (axis, k) in ["x", "y"].iter().zip(0..) {
            if d.coarse[k] > d.fine[k] || d.fine[k] % d.coarse[k] != 0 {
                return Err(err(
                    "domain.coarse",
                    format!(
                        "coarse blocks must divide fine cells in {axis}: {} does not divide {}",
                        d.coarse[k], d.fine[k]
                    ),
                ));
            }
        }
        if !(self.fluid.compressibility >= 0.0) {
            return Err(err("fluid.compressibility", "must be non-negative"));
        }
        if !(self.fluid.viscosity > 0.0) {
            return Err(err("fluid.viscosity", "must be positive"));
        }
        if !(self.fluid.fvf_ref > 0.0) {
            return Err(err("fluid.fvf_ref", "must be positive"));
        }
        for (name, c) in [
            ("continua.matrix", &self.continua.matrix),
            ("continua.fracture", &self.continua.fracture),
            ("continua.vug", &self.continua.vug),
        ] {
            if !(c.porosity > 0.0 && c.porosity <= 1.0) {
                return Err(err(
                    &format!("{name}.porosity"),
                    format!("must lie in (0, 1], got {}", c.porosity),
                ));
            }
            match &c.permeability {
                PermeabilitySpec::Constant { value } if !(*value > 0.0) => {
                    return Err(err(
                        &format!("{name}.permeability.value"),
                        "must be positive",
                    ));
                }
                PermeabilitySpec::Synthetic { contrast, base, .. } => {
                    if !(*contrast >= 1.0) {
                        return Err(err(
                            &format!("{name}.permeability.contrast"),
                            "must be at least 1",
                        ));
                    }
                    if !(*base > 0.0) {
                        return Err(err(&format!("{name}.permeability.base"), "must be positive"));
                    }
                }
                _ => {}
            }
        }
        for (i, f) in self.fractures.iter().enumerate() {
            let path = format!("fractures[{i}]");
            if f.points.len() < 2 {
                return Err(err(&format!("{path}.points"), "needs at least 2 points"));
            }
            if !(f.aperture > 0.0) {
                return Err(err(&format!("{path}.aperture"), "must be positive"));
            }
            if !(f.permeability > 0.0) {
                return Err(err(&format!("{path}.permeability"), "must be positive"));
            }
            if !(f.porosity > 0.0 && f.porosity <= 1.0) {
                return Err(err(&format!("{path}.porosity"), "must lie in (0, 1]"));
            }
            for p in &f.points {
                if p[0] < 0.0 || p[1] < 0.0 || p[0] > d.extent[0] || p[1] > d.extent[1] {
                    return Err(err(
                        &format!("{path}.points"),
                        format!("point ({}, {}) lies outside the domain", p[0], p[1]),
                    ));
                }
            }
        }
        if let Some(s) = self.exchange.sigma {
            if !(s > 0.0) {
                return Err(err("exchange.sigma", "must be positive"));
            }
        }
        for (i, w) in self.wells.iter().enumerate() {
            let path = format!("wells[{i}]");
            if w.x < 0.0 || w.y < 0.0 || w.x > d.extent[0] || w.y > d.extent[1] {
                return Err(err(&path, "well lies outside the domain"));
            }
            if continuum_index(&w.continuum).is_none() {
                return Err(err(
                    &format!("{path}.continuum"),
                    format!("unknown continuum {:?} (matrix | fracture | vug)", w.continuum),
                ));
            }
        }
        if let InitialConfig::Bump { radius, .. } = &self.initial {
            if !(*radius > 0.0) {
                return Err(err("initial.radius", "must be positive"));
            }
        }
        let t = &self.time;
        if !(t.dt > 0.0) {
            return Err(err("time.dt", "must be positive"));
        }
        if !(t.t_end >= t.dt) {
            return Err(err("time.t_end", "must be at least dt"));
        }
        let n = (t.t_end / t.dt).round();
        if (n * t.dt - t.t_end).abs() > 1e-9 * t.t_end.max(t.dt) {
            return Err(err("time.t_end", "must be a whole number of steps"));
        }
        if t.scheme != "linearized" && t.scheme != "fixed_point" {
            return Err(err(
                "time.scheme",
                format!("unknown scheme {:?} (linearized | fixed_point)", t.scheme),
            ));
        }
        if !(t.tolerance > 0.0) {
            return Err(err("time.tolerance", "must be positive"));
        }
        if t.max_iterations == 0 {
            return Err(err("time.max_iterations", "must be at least 1"));
        }
        if self.basis.count == 0 {
            return Err(err("basis.count", "must be at least 1"));
        }
        if let Some(l) = self.basis.lambda_threshold {
            if !(l >= 0.0) {
                return Err(err("basis.lambda_threshold", "must be non-negative"));
            }
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(err("solver.tolerance", "must be positive"));
        }
        Ok(())
    }

    /// Stable content digest (FNV-1a over the canonical serialization).
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            hash ^= *b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }

    pub fn n_steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round() as usize
    }
}

pub fn continuum_index(name: &str) -> Option<usize> {
    match name {
        "matrix" => Some(0),
        "fracture" => Some(1),
        "vug" => Some(2),
        _ => None,
    }
}

pub const CONTINUUM_NAMES: [&str; 3] = ["matrix", "fracture", "vug"];
