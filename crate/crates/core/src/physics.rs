//! Continuum coefficient fields and constitutive relations: formation volume
//! factor, pressure-dependent mobility, inter-continuum exchange coefficients
//! and the synthetic channelized permeability generator.
//!
//! All quantities follow one fixed unit regime: pressure kPa, compressibility
//! kPa^-1, viscosity Pa*s, permeability um^2, lengths m, time days. Values
//! are used as-is, without conversion.

use crate::geometry::FineMesh;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("fluid state is singular: 1 + c(u - u0) = {denom:e} at u = {pressure:e}")]
    SingularFvf { pressure: f64, denom: f64 },
    #[error("harmonic mean needs positive inputs (got {a:e}, {b:e})")]
    NonPositivePermeability { a: f64, b: f64 },
    #[error("invalid {what}: {value}")]
    Invalid { what: &'static str, value: f64 },
    #[error("permeability file {path}: {what}")]
    PermeabilityFile { path: String, what: String },
}

/// Fluid constants: compressibility c, viscosity mu, formation volume factor
/// at the reference pressure and the reference pressure itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidProperties {
    /// compressibility (kPa^-1), >= 0 (0 models an incompressible fluid)
    pub compressibility: f64,
    /// viscosity (Pa*s)
    pub viscosity: f64,
    /// FVF at reference pressure (m^3/m^3)
    pub fvf_ref: f64,
    /// reference pressure (kPa)
    pub ref_pressure: f64,
}

impl FluidProperties {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.compressibility >= 0.0) {
            return Err(PhysicsError::Invalid {
                what: "compressibility",
                value: self.compressibility,
            });
        }
        if !(self.viscosity > 0.0) {
            return Err(PhysicsError::Invalid {
                what: "viscosity",
                value: self.viscosity,
            });
        }
        if !(self.fvf_ref > 0.0) {
            return Err(PhysicsError::Invalid {
                what: "fvf_ref",
                value: self.fvf_ref,
            });
        }
        Ok(())
    }
}

/// Formation volume factor B(u) = B0 / (1 + c (u - u0)).
pub fn fvf(u: f64, fluid: &FluidProperties) -> Result<f64, PhysicsError> {
    let denom = 1.0 + fluid.compressibility * (u - fluid.ref_pressure);
    if denom <= 0.0 {
        return Err(PhysicsError::SingularFvf { pressure: u, denom });
    }
    Ok(fluid.fvf_ref / denom)
}

/// Mobility multiplier alpha(u) = (1 + c (u - u0)) / mu.
pub fn alpha(u: f64, fluid: &FluidProperties) -> f64 {
    (1.0 + fluid.compressibility * (u - fluid.ref_pressure)) / fluid.viscosity
}

/// Harmonic mean 2ab/(a+b).
pub fn harmonic_mean(a: f64, b: f64) -> Result<f64, PhysicsError> {
    if a <= 0.0 || b <= 0.0 {
        return Err(PhysicsError::NonPositivePermeability { a, b });
    }
    Ok(2.0 * a * b / (a + b))
}

/// The three continua of the flow model, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuum {
    Matrix,
    NaturalFracture,
    Vug,
}

/// Whether a continuum carries a spatial diffusion term or only stores mass
/// and exchanges it with the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuumKind {
    Diffusive,
    StorageOnly,
}

/// Per-continuum coefficients: porosity, a per-triangle permeability field
/// and the derived storage coefficient b = phi c / B0.
#[derive(Debug, Clone)]
pub struct ContinuumParams {
    pub id: Continuum,
    pub kind: ContinuumKind,
    pub porosity: f64,
    /// per-fine-triangle permeability (um^2)
    pub permeability: Vec<f64>,
    /// storage coefficient phi c / B0, cached
    pub storage: f64,
}

impl ContinuumParams {
    pub fn new(
        id: Continuum,
        porosity: f64,
        permeability: Vec<f64>,
        fluid: &FluidProperties,
    ) -> Result<Self, PhysicsError> {
        if !(porosity > 0.0 && porosity <= 1.0) {
            return Err(PhysicsError::Invalid {
                what: "porosity",
                value: porosity,
            });
        }
        for &k in &permeability {
            if !(k > 0.0) {
                return Err(PhysicsError::Invalid {
                    what: "permeability",
                    value: k,
                });
            }
        }
        let kind = match id {
            Continuum::Vug => ContinuumKind::StorageOnly,
            _ => ContinuumKind::Diffusive,
        };
        Ok(ContinuumParams {
            id,
            kind,
            porosity,
            permeability,
            storage: porosity * fluid.compressibility / fluid.fvf_ref,
        })
    }
}

/// Pairwise exchange coefficient fields q^{i,j} = sigma * harm(k^i, k^j) / mu
/// for every unordered continuum pair, one value per fine triangle.
#[derive(Debug, Clone)]
pub struct ExchangeTable {
    pub sigma: f64,
    n_continua: usize,
    /// indexed by unordered pair, see [`ExchangeTable::pair_index`]
    fields: Vec<Vec<f64>>,
}

impl ExchangeTable {
    /// q^{i,j} = sigma * harmonic_mean(k^i, k^j) / mu, per triangle.
    pub fn build(
        params: &[ContinuumParams],
        sigma: f64,
        fluid: &FluidProperties,
    ) -> Result<Self, PhysicsError> {
        let n = params.len();
        let mut fields = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let ki = &params[i].permeability;
                let kj = &params[j].permeability;
                debug_assert_eq!(ki.len(), kj.len());
                let mut q = Vec::with_capacity(ki.len());
                for t in 0..ki.len() {
                    q.push(sigma * harmonic_mean(ki[t], kj[t])? / fluid.viscosity);
                }
                fields.push(q);
            }
        }
        Ok(ExchangeTable {
            sigma,
            n_continua: n,
            fields,
        })
    }

    /// Constant-coefficient table, mostly for small tests.
    pub fn constant(n_continua: usize, n_triangles: usize, q: f64, sigma: f64) -> Self {
        let pairs = n_continua * (n_continua - 1) / 2;
        ExchangeTable {
            sigma,
            n_continua,
            fields: vec![vec![q; n_triangles]; pairs],
        }
    }

    pub fn n_continua(&self) -> usize {
        self.n_continua
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        // position of (lo, hi) in the upper-triangle enumeration
        lo * self.n_continua - lo * (lo + 1) / 2 + (hi - lo - 1)
    }

    /// Per-triangle q^{i,j} field; symmetric in (i, j).
    pub fn q(&self, i: usize, j: usize) -> &[f64] {
        assert_ne!(i, j);
        &self.fields[self.pair_index(i, j)]
    }
}

/// Shape factor rule sigma = 1 / h_min^2.
pub fn sigma_from_mesh(mesh: &FineMesh) -> f64 {
    1.0 / (mesh.h_min * mesh.h_min)
}

/// Deterministic channelized log-permeability field, one value per triangle
/// of a (2*nx*ny)-triangle lattice mesh. The field is base * contrast^g with
/// g normalized to [0, 1], so max/min equals `contrast` exactly.
pub fn synth_permeability(
    seed: u64,
    mesh: &FineMesh,
    base: f64,
    contrast: f64,
) -> Result<Vec<f64>, PhysicsError> {
    if !(contrast >= 1.0) {
        return Err(PhysicsError::Invalid {
            what: "contrast",
            value: contrast,
        });
    }
    if !(base > 0.0) {
        return Err(PhysicsError::Invalid {
            what: "base permeability",
            value: base,
        });
    }
    let nt = mesh.triangles.len();
    if contrast == 1.0 {
        return Ok(vec![base; nt]);
    }
    let mut rng = SplitMix64::new(seed);

    // Smooth background: a few random-direction cosine modes.
    let n_modes = 8;
    let modes: Vec<(f64, f64, f64, f64)> = (0..n_modes)
        .map(|_| {
            let angle = rng.next_f64() * std::f64::consts::TAU;
            let freq = 1.0 + 3.0 * rng.next_f64();
            let phase = rng.next_f64() * std::f64::consts::TAU;
            let amp = 0.3 + 0.7 * rng.next_f64();
            (angle, freq, phase, amp)
        })
        .collect();
    // High-permeability channels: sinusoidal bands across the domain.
    let n_channels = 3 + (rng.next_u64() % 3) as usize;
    let channels: Vec<(f64, f64, f64, f64, f64)> = (0..n_channels)
        .map(|_| {
            let y0 = 0.1 + 0.8 * rng.next_f64();
            let amp = 0.05 + 0.15 * rng.next_f64();
            let freq = 0.5 + 2.0 * rng.next_f64();
            let phase = rng.next_f64() * std::f64::consts::TAU;
            let width = 0.015 + 0.04 * rng.next_f64();
            (y0, amp, freq, phase, width)
        })
        .collect();

    let lx = mesh.extent[0];
    let ly = mesh.extent[1];
    let mut g = Vec::with_capacity(nt);
    for t in 0..nt {
        let [a, b, c] = mesh.triangles[t];
        let x = (mesh.nodes[a][0] + mesh.nodes[b][0] + mesh.nodes[c][0]) / (3.0 * lx);
        let y = (mesh.nodes[a][1] + mesh.nodes[b][1] + mesh.nodes[c][1]) / (3.0 * ly);
        let mut v = 0.0;
        for &(angle, freq, phase, amp) in &modes {
            let s = x * angle.cos() + y * angle.sin();
            v += amp * (std::f64::consts::TAU * freq * s + phase).cos();
        }
        for &(y0, amp, freq, phase, width) in &channels {
            let yc = y0 + amp * (std::f64::consts::TAU * freq * x + phase).sin();
            let d = (y - yc) / width;
            v += 3.0 * (-0.5 * d * d).exp();
        }
        g.push(v);
    }
    let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if gmax == gmin {
        return Ok(vec![base; nt]);
    }
    let lc = contrast.ln();
    Ok(g
        .into_iter()
        .map(|v| base * (lc * (v - gmin) / (gmax - gmin)).exp())
        .collect())
}

/// Per-triangle permeability from a CSV file: one value per line, triangle
/// order, `#`-prefixed comment lines allowed.
pub fn load_permeability_csv(path: &str, n_triangles: usize) -> Result<Vec<f64>, PhysicsError> {
    let text = std::fs::read_to_string(path).map_err(|e| PhysicsError::PermeabilityFile {
        path: path.to_string(),
        what: e.to_string(),
    })?;
    let mut vals = Vec::with_capacity(n_triangles);
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| PhysicsError::PermeabilityFile {
            path: path.to_string(),
            what: format!("line {}: {}", ln + 1, e),
        })?;
        if !(v > 0.0) {
            return Err(PhysicsError::PermeabilityFile {
                path: path.to_string(),
                what: format!("line {}: permeability must be positive, got {v}", ln + 1),
            });
        }
        vals.push(v);
    }
    if vals.len() != n_triangles {
        return Err(PhysicsError::PermeabilityFile {
            path: path.to_string(),
            what: format!("expected {n_triangles} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

/// splitmix64; deterministic regardless of platform or crate versions.
struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
