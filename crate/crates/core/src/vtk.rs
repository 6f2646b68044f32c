//! Legacy VTK (ASCII) export of meshes and nodal fields.
//!
//! The mesh writer emits the triangles plus one line cell per fracture edge,
//! with cell data arrays `block` (coarse block id, -1 on line cells) and
//! `fracture` (fracture id, -1 on triangles). Field writers emit one point
//! data array per continuum. Output is deterministic byte for byte.

use crate::geometry::{CoarseGrid, FineMesh};
use std::io::{self, Write};

pub fn write_mesh<W: Write>(
    w: &mut W,
    mesh: &FineMesh,
    grid: Option<&CoarseGrid>,
) -> io::Result<()> {
    write_header(w, "fracflow mesh")?;
    write_points(w, mesh)?;

    let n_lines: usize = mesh.fracture_edges.iter().map(|c| c.len()).sum();
    let n_cells = mesh.triangles.len() + n_lines;
    let list_len = 4 * mesh.triangles.len() + 3 * n_lines;
    writeln!(w, "CELLS {} {}", n_cells, list_len)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    for chain in &mesh.fracture_edges {
        for &e in chain {
            let [a, b] = mesh.edges[e].nodes;
            writeln!(w, "2 {} {}", a, b)?;
        }
    }
    writeln!(w, "CELL_TYPES {}", n_cells)?;
    for _ in 0..mesh.triangles.len() {
        writeln!(w, "5")?;
    }
    for _ in 0..n_lines {
        writeln!(w, "3")?;
    }

    writeln!(w, "CELL_DATA {}", n_cells)?;
    writeln!(w, "SCALARS block int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    let block_of = grid.map(|g| {
        let mut of = vec![-1i64; mesh.triangles.len()];
        for (b, tris) in g.block_tris.iter().enumerate() {
            for &t in tris {
                of[t] = b as i64;
            }
        }
        of
    });
    for t in 0..mesh.triangles.len() {
        let b = block_of.as_ref().map_or(-1, |of| of[t]);
        writeln!(w, "{}", b)?;
    }
    for _ in 0..n_lines {
        writeln!(w, "-1")?;
    }
    writeln!(w, "SCALARS fracture int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for _ in 0..mesh.triangles.len() {
        writeln!(w, "-1")?;
    }
    for (fi, chain) in mesh.fracture_edges.iter().enumerate() {
        for _ in chain {
            writeln!(w, "{}", fi)?;
        }
    }
    Ok(())
}

/// Nodal fields in continuum-major layout, one named scalar array each.
pub fn write_fields<W: Write>(
    w: &mut W,
    mesh: &FineMesh,
    names: &[&str],
    values: &[f64],
) -> io::Result<()> {
    let n = mesh.n_nodes();
    assert_eq!(values.len(), n * names.len());
    write_header(w, "fracflow fields")?;
    write_points(w, mesh)?;
    writeln!(w, "CELLS {} {}", mesh.triangles.len(), 4 * mesh.triangles.len())?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.triangles.len())?;
    for _ in 0..mesh.triangles.len() {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", n)?;
    for (ci, name) in names.iter().enumerate() {
        writeln!(w, "SCALARS {} double 1", name)?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &values[ci * n..(ci + 1) * n] {
            writeln!(w, "{:e}", v)?;
        }
    }
    Ok(())
}

fn write_header<W: Write>(w: &mut W, title: &str) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    Ok(())
}

fn write_points<W: Write>(w: &mut W, mesh: &FineMesh) -> io::Result<()> {
    writeln!(w, "POINTS {} double", mesh.n_nodes())?;
    for p in &mesh.nodes {
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_coarse_grid, build_fine_mesh, Fracture, FractureNetwork};

    #[test]
    fn mesh_export_structure() {
        let net = FractureNetwork {
            fractures: vec![Fracture {
                points: vec![[0.0, 0.5], [1.0, 0.5]],
                aperture: 0.01,
                permeability: 1.0,
                porosity: 1.0,
            }],
        };
        let mesh = build_fine_mesh([1.0, 1.0], 4, 4, &net).unwrap();
        let grid = build_coarse_grid(&mesh, 2, 2).unwrap();
        let mut buf = Vec::new();
        write_mesh(&mut buf, &mesh, Some(&grid)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("POINTS 25 double"));
        assert!(text.contains("CELLS 36 140")); // 32 triangles + 4 line cells
        assert!(text.contains("SCALARS block int 1"));
        assert!(text.contains("SCALARS fracture int 1"));
    }

    #[test]
    fn field_export_is_deterministic() {
        let mesh = build_fine_mesh([1.0, 1.0], 2, 2, &FractureNetwork::empty()).unwrap();
        let vals: Vec<f64> = (0..mesh.n_nodes()).map(|i| i as f64 * 0.1).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_fields(&mut a, &mesh, &["pressure"], &vals).unwrap();
        write_fields(&mut b, &mesh, &["pressure"], &vals).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("SCALARS pressure double 1"));
    }
}
