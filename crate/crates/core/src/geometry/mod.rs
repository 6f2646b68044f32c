//! Conforming fine triangulations with embedded fracture edges.
//!
//! The mesher lays a structured node lattice over the domain box, snaps each
//! fracture polyline to a chain of lattice edges (horizontal, vertical or
//! cell-diagonal steps chosen to track the segment), and then splits every
//! quadrilateral cell along a diagonal. Cells crossed diagonally by a
//! fracture are split along that diagonal, so every fracture is exactly a
//! union of fine edges; all remaining cells use the default diagonal.
//!
//! This lattice mesher is the only triangulation source; importing external
//! meshes is a possible extension, not implemented.

mod coarse;

pub use coarse::{
    build_coarse_grid, neighborhood, partition_of_unity, CoarseGrid, CoarseNeighborhood,
    LocalFractureEdge, LocalSubmesh, PartitionOfUnity,
};

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("fine mesh needs nx, ny >= 2 (got {nx} x {ny})")]
    TooFewCells { nx: usize, ny: usize },
    #[error("fracture {fracture} polyline needs at least 2 points")]
    DegeneratePolyline { fracture: usize },
    #[error("fracture {fracture} has a zero-length segment at point {point}")]
    ZeroLengthSegment { fracture: usize, point: usize },
    #[error("fracture {fracture} point ({x}, {y}) lies outside the domain")]
    OutsideDomain { fracture: usize, x: f64, y: f64 },
    #[error("fracture {fracture} collapses to a single mesh node after snapping; refine the mesh (needs roughly h <= {needed_h:e})")]
    UnresolvedFracture { fracture: usize, needed_h: f64 },
    #[error("fractures {a} and {b} demand conflicting diagonals in cell ({cx}, {cy}); they are too close to distinguish at this resolution, refine the mesh")]
    FractureResolution {
        a: usize,
        b: usize,
        cx: usize,
        cy: usize,
    },
    #[error("fracture invariant violated in fracture {fracture}: {what}")]
    BadFracture { fracture: usize, what: String },
    #[error("coarse dims must divide fine dims: {coarse} does not divide {fine} in {axis}")]
    NonNested {
        axis: char,
        fine: usize,
        coarse: usize,
    },
    #[error("coarse node id {id} out of range (grid has {count} nodes)")]
    NodeOutOfRange { id: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    fn bit(self) -> u8 {
        match self {
            Side::Bottom => 1,
            Side::Right => 2,
            Side::Top => 4,
            Side::Left => 8,
        }
    }
}

/// Set of domain sides a node lies on (corners belong to two).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SideSet(u8);

impl SideSet {
    pub fn contains(self, s: Side) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn insert(&mut self, s: Side) {
        self.0 |= s.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// One resolved fracture: a polyline with hydraulic properties.
#[derive(Debug, Clone)]
pub struct Fracture {
    pub points: Vec<[f64; 2]>,
    /// aperture d_s (m)
    pub aperture: f64,
    /// intrinsic fracture permeability (um^2)
    pub permeability: f64,
    /// fracture porosity (fraction)
    pub porosity: f64,
}

#[derive(Debug, Clone, Default)]
pub struct FractureNetwork {
    pub fractures: Vec<Fracture>,
}

impl FractureNetwork {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for (fi, f) in self.fractures.iter().enumerate() {
            if f.points.len() < 2 {
                return Err(GeometryError::DegeneratePolyline { fracture: fi });
            }
            for (pi, w) in f.points.windows(2).enumerate() {
                let dx = w[1][0] - w[0][0];
                let dy = w[1][1] - w[0][1];
                if dx * dx + dy * dy <= 0.0 {
                    return Err(GeometryError::ZeroLengthSegment {
                        fracture: fi,
                        point: pi,
                    });
                }
            }
            let check = |cond: bool, what: &str| -> Result<(), GeometryError> {
                if cond {
                    Ok(())
                } else {
                    Err(GeometryError::BadFracture {
                        fracture: fi,
                        what: what.to_string(),
                    })
                }
            };
            check(f.aperture > 0.0, "aperture must be positive")?;
            check(f.permeability > 0.0, "permeability must be positive")?;
            check(
                f.porosity > 0.0 && f.porosity <= 1.0,
                "porosity must lie in (0, 1]",
            )?;
        }
        Ok(())
    }
}

/// Which diagonal splits a lattice cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagonal {
    /// lower-left to upper-right
    Main,
    /// lower-right to upper-left
    Anti,
}

#[derive(Debug, Clone)]
pub struct MeshEdge {
    /// node ids, smaller first
    pub nodes: [usize; 2],
    /// adjacent triangles (boundary edges have one)
    pub tris: [Option<usize>; 2],
}

/// Conforming triangulation of the domain box with fracture-edge tagging.
#[derive(Debug, Clone)]
pub struct FineMesh {
    pub extent: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<[f64; 2]>,
    /// counterclockwise node triples
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<MeshEdge>,
    /// per-node set of domain sides
    pub node_sides: Vec<SideSet>,
    /// fracture id -> ordered chain of edge ids
    pub fracture_edges: Vec<Vec<usize>>,
    /// diagonal used in each cell (row-major, cy*nx + cx)
    pub cell_diagonals: Vec<Diagonal>,
    /// the two triangles of each cell
    pub cell_tris: Vec<[usize; 2]>,
    pub h_min: f64,
    edge_lookup: BTreeMap<(usize, usize), usize>,
}

impl FineMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn dx(&self) -> f64 {
        self.extent[0] / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.extent[1] / self.ny as f64
    }

    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        let pc = self.nodes[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].nodes;
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_lookup.get(&key).copied()
    }

    pub fn domain_area(&self) -> f64 {
        self.extent[0] * self.extent[1]
    }

    pub fn nodes_on_side(&self, side: Side) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&n| self.node_sides[n].contains(side))
            .collect()
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        !self.node_sides[n].is_empty()
    }

    /// Triangle containing (x, y) and its barycentric weights.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, [f64; 3])> {
        if x < 0.0 || y < 0.0 || x > self.extent[0] || y > self.extent[1] {
            return None;
        }
        let cx = ((x / self.dx()) as usize).min(self.nx - 1);
        let cy = ((y / self.dy()) as usize).min(self.ny - 1);
        for &t in &self.cell_tris[cy * self.nx + cx] {
            if let Some(w) = self.barycentric(t, x, y) {
                return Some((t, w));
            }
        }
        None
    }

    fn barycentric(&self, t: usize, x: f64, y: f64) -> Option<[f64; 3]> {
        let [a, b, c] = self.triangles[t];
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        let pc = self.nodes[c];
        let area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let w0 = ((pb[0] - x) * (pc[1] - y) - (pc[0] - x) * (pb[1] - y)) / area2;
        let w1 = ((pc[0] - x) * (pa[1] - y) - (pa[0] - x) * (pc[1] - y)) / area2;
        let w2 = 1.0 - w0 - w1;
        let tol = -1e-12;
        if w0 >= tol && w1 >= tol && w2 >= tol {
            Some([w0, w1, w2])
        } else {
            None
        }
    }
}

/// Build the conforming fine triangulation over `[0, extent.x] x [0, extent.y]`.
pub fn build_fine_mesh(
    extent: [f64; 2],
    nx: usize,
    ny: usize,
    network: &FractureNetwork,
) -> Result<FineMesh, GeometryError> {
    if nx < 2 || ny < 2 {
        return Err(GeometryError::TooFewCells { nx, ny });
    }
    network.validate()?;
    let dx = extent[0] / nx as f64;
    let dy = extent[1] / ny as f64;
    let tol = 1e-9 * extent[0].max(extent[1]);
    for (fi, f) in network.fractures.iter().enumerate() {
        for p in &f.points {
            if p[0] < -tol || p[1] < -tol || p[0] > extent[0] + tol || p[1] > extent[1] + tol {
                return Err(GeometryError::OutsideDomain {
                    fracture: fi,
                    x: p[0],
                    y: p[1],
                });
            }
        }
    }

    // Snap polylines to lattice node chains and collect diagonal constraints.
    let mut diag_constraint: BTreeMap<usize, (Diagonal, usize)> = BTreeMap::new();
    let mut fracture_paths: Vec<Vec<(usize, usize)>> = Vec::with_capacity(network.fractures.len());
    for (fi, f) in network.fractures.iter().enumerate() {
        let snapped: Vec<(usize, usize)> = f
            .points
            .iter()
            .map(|p| {
                (
                    ((p[0] / dx).round() as usize).min(nx),
                    ((p[1] / dy).round() as usize).min(ny),
                )
            })
            .collect();
        let mut path: Vec<(usize, usize)> = vec![snapped[0]];
        for w in snapped.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            walk_segment(w[0], w[1], dx, dy, &mut path);
        }
        if path.len() < 2 {
            let len: f64 = f
                .points
                .windows(2)
                .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
                .sum();
            return Err(GeometryError::UnresolvedFracture {
                fracture: fi,
                needed_h: len / 2.0,
            });
        }
        // Diagonal steps fix the containing cell's split.
        for w in path.windows(2) {
            let (i0, j0) = w[0];
            let (i1, j1) = w[1];
            if i0 != i1 && j0 != j1 {
                let cx = i0.min(i1);
                let cy = j0.min(j1);
                let want = if (i1 as isize - i0 as isize) == (j1 as isize - j0 as isize) {
                    Diagonal::Main
                } else {
                    Diagonal::Anti
                };
                let cell = cy * nx + cx;
                match diag_constraint.get(&cell) {
                    Some(&(have, owner)) if have != want => {
                        return Err(GeometryError::FractureResolution {
                            a: owner,
                            b: fi,
                            cx,
                            cy,
                        });
                    }
                    Some(_) => {}
                    None => {
                        diag_constraint.insert(cell, (want, fi));
                    }
                }
            }
        }
        fracture_paths.push(path);
    }

    let mut cell_diagonals = vec![Diagonal::Main; nx * ny];
    for (&cell, &(d, _)) in &diag_constraint {
        cell_diagonals[cell] = d;
    }

    // Nodes.
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([i as f64 * dx, j as f64 * dy]);
        }
    }
    let nid = |i: usize, j: usize| j * (nx + 1) + i;

    // Triangles, two per cell, split along the chosen diagonal.
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let mut cell_tris = Vec::with_capacity(nx * ny);
    for cy in 0..ny {
        for cx in 0..nx {
            let ll = nid(cx, cy);
            let lr = nid(cx + 1, cy);
            let ul = nid(cx, cy + 1);
            let ur = nid(cx + 1, cy + 1);
            let t0 = triangles.len();
            match cell_diagonals[cy * nx + cx] {
                Diagonal::Main => {
                    triangles.push([ll, lr, ur]);
                    triangles.push([ll, ur, ul]);
                }
                Diagonal::Anti => {
                    triangles.push([ll, lr, ul]);
                    triangles.push([lr, ur, ul]);
                }
            }
            cell_tris.push([t0, t0 + 1]);
        }
    }

    // Edges with adjacency.
    let mut edge_lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut edges: Vec<MeshEdge> = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = if a < b { (a, b) } else { (b, a) };
            match edge_lookup.get(&key) {
                Some(&e) => {
                    edges[e].tris[1] = Some(t);
                }
                None => {
                    edge_lookup.insert(key, edges.len());
                    edges.push(MeshEdge {
                        nodes: [key.0, key.1],
                        tris: [Some(t), None],
                    });
                }
            }
        }
    }

    // Fracture chains as edge id lists.
    let mut fracture_edges = Vec::with_capacity(fracture_paths.len());
    for path in &fracture_paths {
        let mut chain = Vec::with_capacity(path.len() - 1);
        for w in path.windows(2) {
            let a = nid(w[0].0, w[0].1);
            let b = nid(w[1].0, w[1].1);
            let key = if a < b { (a, b) } else { (b, a) };
            let e = *edge_lookup
                .get(&key)
                .expect("fracture chain step is a mesh edge by construction");
            chain.push(e);
        }
        fracture_edges.push(chain);
    }

    // Side flags.
    let mut node_sides = vec![SideSet::default(); nodes.len()];
    for j in 0..=ny {
        for i in 0..=nx {
            let n = nid(i, j);
            if j == 0 {
                node_sides[n].insert(Side::Bottom);
            }
            if j == ny {
                node_sides[n].insert(Side::Top);
            }
            if i == 0 {
                node_sides[n].insert(Side::Left);
            }
            if i == nx {
                node_sides[n].insert(Side::Right);
            }
        }
    }

    let mut mesh = FineMesh {
        extent,
        nx,
        ny,
        nodes,
        triangles,
        edges,
        node_sides,
        fracture_edges,
        cell_diagonals,
        cell_tris,
        h_min: 0.0,
        edge_lookup,
    };
    mesh.h_min = (0..mesh.edges.len())
        .map(|e| mesh.edge_length(e))
        .fold(f64::INFINITY, f64::min);
    Ok(mesh)
}

/// Append the lattice walk from `from` to `to` (exclusive of `from`),
/// stepping to the neighbor closest to the straight segment.
fn walk_segment(
    from: (usize, usize),
    to: (usize, usize),
    dx: f64,
    dy: f64,
    path: &mut Vec<(usize, usize)>,
) {
    let p0 = [from.0 as f64 * dx, from.1 as f64 * dy];
    let p1 = [to.0 as f64 * dx, to.1 as f64 * dy];
    let dir = [p1[0] - p0[0], p1[1] - p0[1]];
    let len = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let (mut i, mut j) = from;
    let si: isize = (to.0 as isize - from.0 as isize).signum();
    let sj: isize = (to.1 as isize - from.1 as isize).signum();
    while (i, j) != to {
        let mut candidates: Vec<(usize, usize)> = Vec::with_capacity(3);
        if i != to.0 && j != to.1 {
            candidates.push(((i as isize + si) as usize, (j as isize + sj) as usize));
        }
        if i != to.0 {
            candidates.push(((i as isize + si) as usize, j));
        }
        if j != to.1 {
            candidates.push((i, (j as isize + sj) as usize));
        }
        let mut best = candidates[0];
        let mut best_d = f64::INFINITY;
        for &(ci, cj) in &candidates {
            let c = [ci as f64 * dx, cj as f64 * dy];
            let cross = dir[0] * (c[1] - p0[1]) - dir[1] * (c[0] - p0[0]);
            let d = cross.abs() / len;
            if d < best_d {
                best_d = d;
                best = (ci, cj);
            }
        }
        i = best.0;
        j = best.1;
        path.push((i, j));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_network(points: Vec<[f64; 2]>) -> FractureNetwork {
        FractureNetwork {
            fractures: vec![Fracture {
                points,
                aperture: 0.01,
                permeability: 1.0,
                porosity: 1.0,
            }],
        }
    }

    #[test]
    fn structured_split_counts() {
        let mesh = build_fine_mesh([1.0, 1.0], 2, 2, &FractureNetwork::empty()).unwrap();
        assert_eq!(mesh.n_nodes(), 9);
        assert_eq!(mesh.triangles.len(), 8);
    }

    #[test]
    fn horizontal_fracture_chain() {
        let net = unit_network(vec![[0.0, 0.5], [1.0, 0.5]]);
        let mesh = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap();
        let chain = &mesh.fracture_edges[0];
        assert_eq!(chain.len(), 4);
        for &e in chain {
            let [a, b] = mesh.edges[e].nodes;
            assert!((mesh.nodes[a][1] - 0.5).abs() < 1e-15);
            assert!((mesh.nodes[b][1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn one_point_polyline_is_rejected() {
        let net = unit_network(vec![[0.5, 0.5]]);
        let err = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap_err();
        assert!(matches!(err, GeometryError::DegeneratePolyline { .. }));
    }

    #[test]
    fn fracture_outside_domain_is_rejected() {
        let net = unit_network(vec![[0.0, 0.5], [1.5, 0.5]]);
        let err = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap_err();
        assert!(matches!(err, GeometryError::OutsideDomain { .. }));
    }

    #[test]
    fn sub_cell_fracture_reports_refinement() {
        let net = unit_network(vec![[0.50, 0.50], [0.52, 0.52]]);
        let err = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap_err();
        assert!(matches!(err, GeometryError::UnresolvedFracture { .. }));
    }

    #[test]
    fn diagonal_fracture_forces_cell_diagonals() {
        let net = unit_network(vec![[0.0, 0.0], [1.0, 1.0]]);
        let mesh = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap();
        assert_eq!(mesh.fracture_edges[0].len(), 4);
        for k in 0..4 {
            assert_eq!(mesh.cell_diagonals[k * 4 + k], Diagonal::Main);
        }
        // all chain edges are cell diagonals of length sqrt(2)/4
        for &e in &mesh.fracture_edges[0] {
            assert!((mesh.edge_length(e) - 2f64.sqrt() / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn anti_diagonal_fracture() {
        let net = unit_network(vec![[1.0, 0.0], [0.0, 1.0]]);
        let mesh = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap();
        for &e in &mesh.fracture_edges[0] {
            assert!((mesh.edge_length(e) - 2f64.sqrt() / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn crossing_fractures_at_a_node_are_fine() {
        let net = FractureNetwork {
            fractures: vec![
                Fracture {
                    points: vec![[0.0, 0.0], [1.0, 1.0]],
                    aperture: 0.01,
                    permeability: 1.0,
                    porosity: 1.0,
                },
                Fracture {
                    points: vec![[1.0, 0.0], [0.0, 1.0]],
                    aperture: 0.01,
                    permeability: 1.0,
                    porosity: 1.0,
                },
            ],
        };
        // the X meets exactly at the center node: conforming, no conflict
        let mesh = build_fine_mesh([1.0, 1.0], 2, 2, &net).unwrap();
        assert_eq!(mesh.fracture_edges[0].len(), 2);
        assert_eq!(mesh.fracture_edges[1].len(), 2);
    }

    #[test]
    fn conflicting_diagonals_in_one_cell_are_rejected() {
        let net = FractureNetwork {
            fractures: vec![
                Fracture {
                    points: vec![[0.0, 0.0], [1.0, 1.0]],
                    aperture: 0.01,
                    permeability: 1.0,
                    porosity: 1.0,
                },
                Fracture {
                    points: vec![[0.0, 0.5], [0.5, 0.0]],
                    aperture: 0.01,
                    permeability: 1.0,
                    porosity: 1.0,
                },
            ],
        };
        // both need cell (0,0), with opposite diagonals
        let err = build_fine_mesh([1.0, 1.0], 2, 2, &net).unwrap_err();
        assert!(matches!(err, GeometryError::FractureResolution { .. }));
    }

    #[test]
    fn triangle_areas_sum_to_domain_area() {
        let net = unit_network(vec![[0.0, 0.25], [1.0, 0.75]]);
        let mesh = build_fine_mesh([2.0, 1.0], 8, 4, &net).unwrap();
        let total: f64 = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_area(t))
            .sum();
        assert!((total - mesh.domain_area()).abs() <= 1e-12 * mesh.domain_area());
        for t in 0..mesh.triangles.len() {
            assert!(mesh.triangle_area(t) > 0.0, "triangle {t} not CCW");
        }
    }

    #[test]
    fn chain_passes_through_snapped_vertices() {
        let net = unit_network(vec![[0.1, 0.1], [0.52, 0.26], [0.9, 0.9]]);
        let mesh = build_fine_mesh([1.0, 1.0], 10, 10, &net).unwrap();
        let chain = &mesh.fracture_edges[0];
        // walk the chain, collecting the node sequence
        let mut seq = Vec::new();
        let [a0, b0] = mesh.edges[chain[0]].nodes;
        let [a1, b1] = mesh.edges[chain[1]].nodes;
        let start = if a0 == a1 || a0 == b1 { b0 } else { a0 };
        seq.push(start);
        let mut cur = start;
        for &e in chain.iter() {
            let [a, b] = mesh.edges[e].nodes;
            cur = if a == cur { b } else { a };
            seq.push(cur);
        }
        // snapped vertices in order: (1,1), (5,3), (9,9)
        let want = [
            mesh.node_id(1, 1),
            mesh.node_id(5, 3),
            mesh.node_id(9, 9),
        ];
        let mut pos = 0;
        for &w in &want {
            while pos < seq.len() && seq[pos] != w {
                pos += 1;
            }
            assert!(pos < seq.len(), "snapped vertex missing from chain");
        }
    }

    #[test]
    fn side_flags_cover_boundary() {
        let mesh = build_fine_mesh([1.0, 1.0], 4, 3, &FractureNetwork::empty()).unwrap();
        for n in 0..mesh.n_nodes() {
            let [x, y] = mesh.nodes[n];
            let on_boundary = x == 0.0 || y == 0.0 || x == 1.0 || y == 1.0;
            assert_eq!(!mesh.node_sides[n].is_empty(), on_boundary);
        }
        assert_eq!(mesh.nodes_on_side(Side::Bottom).len(), 5);
        assert_eq!(mesh.nodes_on_side(Side::Left).len(), 4);
        // corner nodes carry both flags
        let corner = mesh.node_id(0, 0);
        assert!(mesh.node_sides[corner].contains(Side::Bottom));
        assert!(mesh.node_sides[corner].contains(Side::Left));
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let mesh = build_fine_mesh([1.0, 1.0], 4, 4, &FractureNetwork::empty()).unwrap();
        let (t, w) = mesh.locate(0.3, 0.7).unwrap();
        let [a, b, c] = mesh.triangles[t];
        let x = w[0] * mesh.nodes[a][0] + w[1] * mesh.nodes[b][0] + w[2] * mesh.nodes[c][0];
        let y = w[0] * mesh.nodes[a][1] + w[1] * mesh.nodes[b][1] + w[2] * mesh.nodes[c][1];
        assert!((x - 0.3).abs() < 1e-14 && (y - 0.7).abs() < 1e-14);
        assert!(mesh.locate(1.5, 0.5).is_none());
    }

    #[test]
    fn h_min_matches_smallest_edge() {
        let mesh = build_fine_mesh([2.0, 1.0], 4, 4, &FractureNetwork::empty()).unwrap();
        assert!((mesh.h_min - 0.25).abs() < 1e-15);
    }
}
