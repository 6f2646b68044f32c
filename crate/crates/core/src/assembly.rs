//! Coupled P1 operators for the N-continuum system on a conforming fine mesh.
//!
//! Degrees of freedom are continuum-major: dof = continuum * n_nodes + node.
//! Matrix (2-D) integrals use exact P1 element matrices on triangles;
//! resolved fractures contribute 1-D line integrals along their tagged edges,
//! scaled by the fracture aperture. Storage-only continua (vugs) carry no
//! stiffness block. Exchange coupling is lumped nodewise with P1 lumped mass
//! weights, so equal-pressure states are in its kernel exactly.

use crate::geometry::{FineMesh, FractureNetwork, Side};
use crate::linalg::CsrMatrix;
use crate::physics::{alpha, ContinuumKind, ContinuumParams, ExchangeTable, FluidProperties};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("dof {dof} out of range (system has {n_dofs})")]
    DofOutOfRange { dof: usize, n_dofs: usize },
    #[error("well at ({x}, {y}) lies outside the domain")]
    WellOutsideDomain { x: f64, y: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Product-space indexing for the coupled system plus the Dirichlet set.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_nodes: usize,
    pub n_continua: usize,
    dirichlet: BTreeMap<usize, f64>,
}

impl DofMap {
    pub fn new(n_nodes: usize, n_continua: usize) -> Self {
        DofMap {
            n_nodes,
            n_continua,
            dirichlet: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn dof(&self, continuum: usize, node: usize) -> usize {
        continuum * self.n_nodes + node
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.n_continua
    }

    pub fn set_dirichlet(&mut self, dof: usize, value: f64) {
        self.dirichlet.insert(dof, value);
    }

    /// Pin every continuum on the given domain side.
    pub fn set_dirichlet_side(&mut self, mesh: &FineMesh, side: Side, value: f64) {
        for node in mesh.nodes_on_side(side) {
            for c in 0..self.n_continua {
                self.set_dirichlet(self.dof(c, node), value);
            }
        }
    }

    pub fn dirichlet(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.dirichlet.iter().map(|(&d, &v)| (d, v))
    }

    pub fn n_dirichlet(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet.contains_key(&dof)
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs())
            .filter(|d| !self.dirichlet.contains_key(d))
            .collect()
    }

    /// Full-size vector holding the prescribed values, zero at free dofs.
    pub fn lift(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n_dofs()];
        for (&d, &g) in &self.dirichlet {
            v[d] = g;
        }
        v
    }
}

/// How the mobility multiplier is evaluated during stiffness assembly.
#[derive(Clone, Copy)]
pub enum AlphaField<'a> {
    Constant(f64),
    /// alpha from a lagged nodal pressure field (continuum-major layout),
    /// evaluated per triangle from the mean of the three vertex pressures.
    Lagged {
        pressures: &'a [f64],
        fluid: &'a FluidProperties,
    },
}

impl<'a> AlphaField<'a> {
    fn on_triangle(&self, mesh: &FineMesh, n_nodes: usize, continuum: usize, tri: usize) -> f64 {
        match *self {
            AlphaField::Constant(a) => a,
            AlphaField::Lagged { pressures, fluid } => {
                let [a, b, c] = mesh.triangles[tri];
                let base = continuum * n_nodes;
                let mean = (pressures[base + a] + pressures[base + b] + pressures[base + c]) / 3.0;
                alpha(mean, fluid)
            }
        }
    }

    fn on_edge(&self, n_nodes: usize, continuum: usize, nodes: [usize; 2]) -> f64 {
        match *self {
            AlphaField::Constant(a) => a,
            AlphaField::Lagged { pressures, fluid } => {
                let base = continuum * n_nodes;
                let mean = (pressures[base + nodes[0]] + pressures[base + nodes[1]]) / 2.0;
                alpha(mean, fluid)
            }
        }
    }
}

/// P1 triangle gradients: returns (area, grad of each vertex basis).
fn tri_grads(mesh: &FineMesh, t: usize) -> (f64, [[f64; 2]; 3]) {
    let [a, b, c] = mesh.triangles[t];
    let pa = mesh.nodes[a];
    let pb = mesh.nodes[b];
    let pc = mesh.nodes[c];
    let area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let area = 0.5 * area2;
    let g = [
        [(pb[1] - pc[1]) / area2, (pc[0] - pb[0]) / area2],
        [(pc[1] - pa[1]) / area2, (pa[0] - pc[0]) / area2],
        [(pa[1] - pb[1]) / area2, (pb[0] - pa[0]) / area2],
    ];
    (area, g)
}

/// Mass operator: per-continuum triangle integrals with coefficient b^i plus
/// aperture-scaled fracture line integrals with coefficient b_{F,s}, the
/// latter added to every continuum block.
pub fn assemble_mass(
    mesh: &FineMesh,
    params: &[ContinuumParams],
    network: &FractureNetwork,
    fluid: &FluidProperties,
) -> CsrMatrix {
    let n = mesh.n_nodes();
    let nd = n * params.len();
    let mut trip = Vec::new();
    for (ci, p) in params.iter().enumerate() {
        let base = ci * n;
        for t in 0..mesh.triangles.len() {
            let area = mesh.triangle_area(t);
            let m = p.storage * area / 12.0;
            let vs = mesh.triangles[t];
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == j { 2.0 * m } else { m };
                    trip.push((base + vs[i], base + vs[j], v));
                }
            }
        }
        for (f, chain) in network.fractures.iter().zip(&mesh.fracture_edges) {
            let b_f = f.porosity * fluid.compressibility / fluid.fvf_ref;
            for &e in chain {
                let [a, b] = mesh.edges[e].nodes;
                let len = mesh.edge_length(e);
                let m = b_f * f.aperture * len / 6.0;
                trip.push((base + a, base + a, 2.0 * m));
                trip.push((base + b, base + b, 2.0 * m));
                trip.push((base + a, base + b, m));
                trip.push((base + b, base + a, m));
            }
        }
    }
    CsrMatrix::from_triplets(nd, nd, trip)
}

/// Stiffness operator K(w): triangle terms k^i(x) alpha(w^i) for diffusive
/// continua plus aperture-scaled fracture line terms d_s k_{F,s} alpha(w^i)
/// along tagged edges. Storage-only continua contribute nothing.
pub fn assemble_stiffness(
    mesh: &FineMesh,
    params: &[ContinuumParams],
    network: &FractureNetwork,
    alpha_field: AlphaField,
) -> CsrMatrix {
    let n = mesh.n_nodes();
    let nd = n * params.len();
    let mut trip = Vec::new();
    for (ci, p) in params.iter().enumerate() {
        if p.kind != ContinuumKind::Diffusive {
            continue;
        }
        let base = ci * n;
        for t in 0..mesh.triangles.len() {
            let (area, g) = tri_grads(mesh, t);
            let coeff = p.permeability[t] * alpha_field.on_triangle(mesh, n, ci, t) * area;
            let vs = mesh.triangles[t];
            for i in 0..3 {
                for j in 0..3 {
                    let v = coeff * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    trip.push((base + vs[i], base + vs[j], v));
                }
            }
        }
        for (f, chain) in network.fractures.iter().zip(&mesh.fracture_edges) {
            for &e in chain {
                let nodes = mesh.edges[e].nodes;
                let len = mesh.edge_length(e);
                let coeff =
                    f.aperture * f.permeability * alpha_field.on_edge(n, ci, nodes) / len;
                let [a, b] = nodes;
                trip.push((base + a, base + a, coeff));
                trip.push((base + b, base + b, coeff));
                trip.push((base + a, base + b, -coeff));
                trip.push((base + b, base + a, -coeff));
            }
        }
    }
    CsrMatrix::from_triplets(nd, nd, trip)
}

/// Exchange operator: nodewise coupling with P1 lumped weights. For states
/// equal across all continua, Q u = 0 exactly.
pub fn assemble_exchange(mesh: &FineMesh, table: &ExchangeTable) -> CsrMatrix {
    let n = mesh.n_nodes();
    let nc = table.n_continua();
    let nd = n * nc;
    let mut trip = Vec::new();
    for i in 0..nc {
        for j in (i + 1)..nc {
            let q = table.q(i, j);
            for t in 0..mesh.triangles.len() {
                let w = q[t] * mesh.triangle_area(t) / 3.0;
                for &v in &mesh.triangles[t] {
                    let di = i * n + v;
                    let dj = j * n + v;
                    trip.push((di, di, w));
                    trip.push((dj, dj, w));
                    trip.push((di, dj, -w));
                    trip.push((dj, di, -w));
                }
            }
        }
    }
    CsrMatrix::from_triplets(nd, nd, trip)
}

/// A point well: location, rate and the continuum it acts on.
#[derive(Debug, Clone, Copy)]
pub struct PointSource {
    pub x: f64,
    pub y: f64,
    pub rate: f64,
    pub continuum: usize,
}

/// Load specification: per-continuum per-triangle densities, point wells and
/// per-side Neumann influx densities (applied to diffusive continua).
#[derive(Default)]
pub struct LoadSpec<'a> {
    pub densities: Option<&'a [Vec<f64>]>,
    pub wells: &'a [PointSource],
    pub neumann: &'a [(Side, f64)],
}

pub fn assemble_load(
    mesh: &FineMesh,
    params: &[ContinuumParams],
    spec: &LoadSpec,
) -> Result<Vec<f64>, AssemblyError> {
    let n = mesh.n_nodes();
    let mut f = vec![0.0; n * params.len()];
    if let Some(dens) = spec.densities {
        if dens.len() != params.len() {
            return Err(AssemblyError::Dimension(format!(
                "densities for {} continua, expected {}",
                dens.len(),
                params.len()
            )));
        }
        for (ci, d) in dens.iter().enumerate() {
            for t in 0..mesh.triangles.len() {
                let w = d[t] * mesh.triangle_area(t) / 3.0;
                for &v in &mesh.triangles[t] {
                    f[ci * n + v] += w;
                }
            }
        }
    }
    for well in spec.wells {
        if well.continuum >= params.len() {
            return Err(AssemblyError::Dimension(format!(
                "well continuum {} out of range",
                well.continuum
            )));
        }
        let (t, w) = mesh
            .locate(well.x, well.y)
            .ok_or(AssemblyError::WellOutsideDomain {
                x: well.x,
                y: well.y,
            })?;
        let vs = mesh.triangles[t];
        for k in 0..3 {
            f[well.continuum * n + vs[k]] += well.rate * w[k];
        }
    }
    for &(side, flux) in spec.neumann {
        if flux == 0.0 {
            continue;
        }
        for e in 0..mesh.edges.len() {
            let edge = &mesh.edges[e];
            if edge.tris[1].is_some() {
                continue; // interior edge
            }
            let [a, b] = edge.nodes;
            if !(mesh.node_sides[a].contains(side) && mesh.node_sides[b].contains(side)) {
                continue;
            }
            let half = flux * mesh.edge_length(e) / 2.0;
            for (ci, p) in params.iter().enumerate() {
                if p.kind == ContinuumKind::Diffusive {
                    f[ci * n + a] += half;
                    f[ci * n + b] += half;
                }
            }
        }
    }
    Ok(f)
}

/// The outcome of symmetric Dirichlet elimination: the operator and right
/// hand side restricted to free dofs, plus the data to expand solutions back.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub free: Vec<usize>,
    dirichlet: Vec<(usize, f64)>,
    n_dofs: usize,
}

impl ReducedSystem {
    /// Re-insert prescribed values around a free-dof solution.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_dofs];
        for (k, &d) in self.free.iter().enumerate() {
            full[d] = x[k];
        }
        for &(d, g) in &self.dirichlet {
            full[d] = g;
        }
        full
    }
}

/// Symmetric elimination of Dirichlet dofs: rows and columns are removed and
/// their contributions moved to the right hand side.
pub fn apply_dirichlet(
    a: &CsrMatrix,
    rhs: &[f64],
    dofmap: &DofMap,
) -> Result<ReducedSystem, AssemblyError> {
    let nd = dofmap.n_dofs();
    if a.nrows() != nd || a.ncols() != nd || rhs.len() != nd {
        return Err(AssemblyError::Dimension(format!(
            "operator {}x{}, rhs {}, dof map {}",
            a.nrows(),
            a.ncols(),
            rhs.len(),
            nd
        )));
    }
    for (d, _) in dofmap.dirichlet() {
        if d >= nd {
            return Err(AssemblyError::DofOutOfRange { dof: d, n_dofs: nd });
        }
    }
    let free = dofmap.free_dofs();
    let lift = dofmap.lift();
    let correction = a.matvec(&lift);
    let rhs_red: Vec<f64> = free.iter().map(|&d| rhs[d] - correction[d]).collect();
    let matrix = a.select(&free, &free);
    Ok(ReducedSystem {
        matrix,
        rhs: rhs_red,
        free,
        dirichlet: dofmap.dirichlet().collect(),
        n_dofs: nd,
    })
}

/// Coupled energy seminorm |u|_aQ = sqrt(u' (K(alpha=1) + Q) u).
pub fn aq_seminorm(k_unit_alpha: &CsrMatrix, q: &CsrMatrix, u: &[f64]) -> f64 {
    (quadratic_form(k_unit_alpha, u) + quadratic_form(q, u)).max(0.0).sqrt()
}

pub fn quadratic_form(a: &CsrMatrix, u: &[f64]) -> f64 {
    crate::linalg::dot(u, &a.matvec(u))
}

/// b-weighted norm ||u||_b = sqrt(u' M u).
pub fn b_norm(mass: &CsrMatrix, u: &[f64]) -> f64 {
    quadratic_form(mass, u).max(0.0).sqrt()
}
