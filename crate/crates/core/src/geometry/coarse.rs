//! Coarse grid overlay, coarse neighborhoods and the partition of unity.

use super::{FineMesh, GeometryError};
use std::collections::BTreeMap;

/// Rectangular coarse grid nested in the fine lattice. Blocks partition the
/// fine triangles; each coarse node knows the blocks it belongs to.
#[derive(Debug, Clone)]
pub struct CoarseGrid {
    pub mx: usize,
    pub my: usize,
    /// coarse node coordinates, row-major (my+1 rows of mx+1)
    pub nodes: Vec<[f64; 2]>,
    /// per-block fine-triangle ids, row-major (my rows of mx)
    pub block_tris: Vec<Vec<usize>>,
    /// per-coarse-node incident block ids
    pub node_blocks: Vec<Vec<usize>>,
    /// fine cells per block in x and y
    pub sx: usize,
    pub sy: usize,
}

impl CoarseGrid {
    pub fn n_nodes(&self) -> usize {
        (self.mx + 1) * (self.my + 1)
    }

    pub fn n_blocks(&self) -> usize {
        self.mx * self.my
    }

    pub fn node_id(&self, gx: usize, gy: usize) -> usize {
        gy * (self.mx + 1) + gx
    }

    pub fn node_coords(&self, id: usize) -> (usize, usize) {
        (id % (self.mx + 1), id / (self.mx + 1))
    }
}

pub fn build_coarse_grid(
    mesh: &FineMesh,
    mx: usize,
    my: usize,
) -> Result<CoarseGrid, GeometryError> {
    if mx == 0 || mx > mesh.nx || mesh.nx % mx != 0 {
        return Err(GeometryError::NonNested {
            axis: 'x',
            fine: mesh.nx,
            coarse: mx,
        });
    }
    if my == 0 || my > mesh.ny || mesh.ny % my != 0 {
        return Err(GeometryError::NonNested {
            axis: 'y',
            fine: mesh.ny,
            coarse: my,
        });
    }
    let sx = mesh.nx / mx;
    let sy = mesh.ny / my;

    let hx = mesh.extent[0] / mx as f64;
    let hy = mesh.extent[1] / my as f64;
    let mut nodes = Vec::with_capacity((mx + 1) * (my + 1));
    for gy in 0..=my {
        for gx in 0..=mx {
            nodes.push([gx as f64 * hx, gy as f64 * hy]);
        }
    }

    let mut block_tris = vec![Vec::with_capacity(2 * sx * sy); mx * my];
    for cy in 0..mesh.ny {
        for cx in 0..mesh.nx {
            let block = (cy / sy) * mx + cx / sx;
            for &t in &mesh.cell_tris[cy * mesh.nx + cx] {
                block_tris[block].push(t);
            }
        }
    }

    let mut node_blocks = vec![Vec::with_capacity(4); (mx + 1) * (my + 1)];
    for gy in 0..=my {
        for gx in 0..=mx {
            let id = gy * (mx + 1) + gx;
            for by in gy.saturating_sub(1)..=gy.min(my - 1) {
                for bx in gx.saturating_sub(1)..=gx.min(mx - 1) {
                    node_blocks[id].push(by * mx + bx);
                }
            }
        }
    }

    Ok(CoarseGrid {
        mx,
        my,
        nodes,
        block_tris,
        node_blocks,
        sx,
        sy,
    })
}

/// A fracture edge restricted into a local submesh.
#[derive(Debug, Clone, Copy)]
pub struct LocalFractureEdge {
    pub fracture: usize,
    /// local node indices
    pub nodes: [usize; 2],
    pub global_edge: usize,
}

/// A submesh of the fine mesh spanned by a set of coarse blocks, with
/// local-to-global node maps and the list of nodes on its boundary.
#[derive(Debug, Clone)]
pub struct LocalSubmesh {
    /// global node ids, ascending; the position is the local index
    pub nodes: Vec<usize>,
    /// global triangle ids
    pub triangles: Vec<usize>,
    /// local node triples, aligned with `triangles`
    pub tri_nodes: Vec<[usize; 3]>,
    /// local indices of nodes on the submesh boundary, ascending
    pub boundary: Vec<usize>,
    pub fracture_edges: Vec<LocalFractureEdge>,
}

impl LocalSubmesh {
    pub fn from_blocks(mesh: &FineMesh, grid: &CoarseGrid, blocks: &[usize]) -> Self {
        let mut triangles: Vec<usize> = blocks
            .iter()
            .flat_map(|&b| grid.block_tris[b].iter().copied())
            .collect();
        triangles.sort_unstable();

        let mut nodes: Vec<usize> = triangles
            .iter()
            .flat_map(|&t| mesh.triangles[t])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();

        let to_local = |g: usize| nodes.binary_search(&g).expect("node in submesh");

        let tri_nodes: Vec<[usize; 3]> = triangles
            .iter()
            .map(|&t| {
                let [a, b, c] = mesh.triangles[t];
                [to_local(a), to_local(b), to_local(c)]
            })
            .collect();

        // Edges seen once bound the submesh.
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tn in &tri_nodes {
            for k in 0..3 {
                let a = tn[k];
                let b = tn[(k + 1) % 3];
                let key = if a < b { (a, b) } else { (b, a) };
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let mut on_boundary = vec![false; nodes.len()];
        for (&(a, b), &cnt) in &edge_count {
            if cnt == 1 {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        let boundary: Vec<usize> = (0..nodes.len()).filter(|&l| on_boundary[l]).collect();

        let tri_set: &[usize] = &triangles;
        let in_tris = |t: usize| tri_set.binary_search(&t).is_ok();
        let mut fracture_edges = Vec::new();
        for (fi, chain) in mesh.fracture_edges.iter().enumerate() {
            for &e in chain {
                let me = &mesh.edges[e];
                let touches = me.tris.iter().flatten().any(|&t| in_tris(t));
                if touches {
                    fracture_edges.push(LocalFractureEdge {
                        fracture: fi,
                        nodes: [to_local(me.nodes[0]), to_local(me.nodes[1])],
                        global_edge: e,
                    });
                }
            }
        }

        LocalSubmesh {
            nodes,
            triangles,
            tri_nodes,
            boundary,
            fracture_edges,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn global_to_local(&self, g: usize) -> Option<usize> {
        self.nodes.binary_search(&g).ok()
    }
}

/// Coarse neighborhood of a coarse node: the union of blocks containing it.
#[derive(Debug, Clone)]
pub struct CoarseNeighborhood {
    pub center: usize,
    pub blocks: Vec<usize>,
    pub submesh: LocalSubmesh,
}

pub fn neighborhood(
    mesh: &FineMesh,
    grid: &CoarseGrid,
    node_id: usize,
) -> Result<CoarseNeighborhood, GeometryError> {
    if node_id >= grid.n_nodes() {
        return Err(GeometryError::NodeOutOfRange {
            id: node_id,
            count: grid.n_nodes(),
        });
    }
    let blocks = grid.node_blocks[node_id].clone();
    let submesh = LocalSubmesh::from_blocks(mesh, grid, &blocks);
    Ok(CoarseNeighborhood {
        center: node_id,
        blocks,
        submesh,
    })
}

/// Piecewise-bilinear hat values of every coarse node at every fine node.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    /// values[coarse node][fine node]
    pub values: Vec<Vec<f64>>,
}

pub fn partition_of_unity(mesh: &FineMesh, grid: &CoarseGrid) -> PartitionOfUnity {
    let sx = grid.sx as f64;
    let sy = grid.sy as f64;
    let mut values = Vec::with_capacity(grid.n_nodes());
    for g in 0..grid.n_nodes() {
        let (gx, gy) = grid.node_coords(g);
        let cx = (gx * grid.sx) as f64;
        let cy = (gy * grid.sy) as f64;
        let mut v = vec![0.0; mesh.n_nodes()];
        for j in 0..=mesh.ny {
            let hy = (1.0 - ((j as f64 - cy) / sy).abs()).max(0.0);
            if hy == 0.0 {
                continue;
            }
            for i in 0..=mesh.nx {
                let hx = (1.0 - ((i as f64 - cx) / sx).abs()).max(0.0);
                if hx != 0.0 {
                    v[mesh.node_id(i, j)] = hx * hy;
                }
            }
        }
        values.push(v);
    }
    PartitionOfUnity { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_fine_mesh, FractureNetwork};

    fn mesh_8x8() -> FineMesh {
        build_fine_mesh([1.0, 1.0], 8, 8, &FractureNetwork::empty()).unwrap()
    }

    #[test]
    fn coarse_grid_counts() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        assert_eq!(grid.n_nodes(), 25);
        assert_eq!(grid.n_blocks(), 16);
        let total: usize = grid.block_tris.iter().map(|b| b.len()).sum();
        assert_eq!(total, mesh.triangles.len());
        // disjointness
        let mut seen = vec![false; mesh.triangles.len()];
        for b in &grid.block_tris {
            for &t in b {
                assert!(!seen[t]);
                seen[t] = true;
            }
        }
    }

    #[test]
    fn single_block_grid() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 1, 1).unwrap();
        assert_eq!(grid.n_blocks(), 1);
        assert_eq!(grid.block_tris[0].len(), mesh.triangles.len());
    }

    #[test]
    fn non_nested_grid_rejected() {
        let mesh = mesh_8x8();
        let err = build_coarse_grid(&mesh, 3, 4).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("3 does not divide") || msg.contains("does not divide"));
    }

    #[test]
    fn node_block_incidence() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        // interior
        assert_eq!(grid.node_blocks[grid.node_id(2, 2)].len(), 4);
        // corner
        assert_eq!(grid.node_blocks[grid.node_id(0, 0)].len(), 1);
        // edge, non-corner
        assert_eq!(grid.node_blocks[grid.node_id(2, 0)].len(), 2);
    }

    #[test]
    fn neighborhood_submesh_is_consistent() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        let nb = neighborhood(&mesh, &grid, grid.node_id(2, 2)).unwrap();
        assert_eq!(nb.blocks.len(), 4);
        // 4x4 fine cells => 5x5 nodes
        assert_eq!(nb.submesh.n_nodes(), 25);
        // boundary of the 2x2-block patch: 16 nodes
        assert_eq!(nb.submesh.boundary.len(), 16);
        // local<->global maps agree
        for (l, &g) in nb.submesh.nodes.iter().enumerate() {
            assert_eq!(nb.submesh.global_to_local(g), Some(l));
        }
        // boundary sorted by global id
        let globals: Vec<usize> = nb.submesh.boundary.iter().map(|&l| nb.submesh.nodes[l]).collect();
        assert!(globals.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn neighborhoods_cover_all_fine_nodes() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 2, 2).unwrap();
        let mut covered = vec![false; mesh.n_nodes()];
        for g in 0..grid.n_nodes() {
            let nb = neighborhood(&mesh, &grid, g).unwrap();
            for &n in &nb.submesh.nodes {
                covered[n] = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn bad_node_id_rejected() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        assert!(neighborhood(&mesh, &grid, grid.n_nodes()).is_err());
    }

    #[test]
    fn partition_of_unity_sums_to_one() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        let pou = partition_of_unity(&mesh, &grid);
        for n in 0..mesh.n_nodes() {
            let sum: f64 = pou.values.iter().map(|v| v[n]).sum();
            assert!((sum - 1.0).abs() <= 1e-14, "sum at node {n}: {sum}");
        }
    }

    #[test]
    fn partition_of_unity_is_nodal() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        let pou = partition_of_unity(&mesh, &grid);
        for g in 0..grid.n_nodes() {
            let (gx, gy) = grid.node_coords(g);
            let fine = mesh.node_id(gx * grid.sx, gy * grid.sy);
            for h in 0..grid.n_nodes() {
                let expect = if g == h { 1.0 } else { 0.0 };
                assert_eq!(pou.values[h][fine], expect);
            }
        }
    }

    #[test]
    fn block_center_hat_values() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        let pou = partition_of_unity(&mesh, &grid);
        // center of block (0,0): fine node (1,1)
        let center = mesh.node_id(1, 1);
        for (gx, gy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let v = pou.values[grid.node_id(gx, gy)][center];
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn pou_vanishes_outside_neighborhood() {
        let mesh = mesh_8x8();
        let grid = build_coarse_grid(&mesh, 4, 4).unwrap();
        let pou = partition_of_unity(&mesh, &grid);
        let g = grid.node_id(1, 1);
        let nb = neighborhood(&mesh, &grid, g).unwrap();
        for n in 0..mesh.n_nodes() {
            if nb.submesh.global_to_local(n).is_none() {
                assert_eq!(pou.values[g][n], 0.0);
            }
        }
        // zero on the submesh boundary as well
        for &l in &nb.submesh.boundary {
            assert_eq!(pou.values[g][nb.submesh.nodes[l]], 0.0);
        }
    }
}
