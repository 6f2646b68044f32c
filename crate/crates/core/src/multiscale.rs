//! Spectral multiscale coarse spaces for the coupled continuum system.
//!
//! Per coarse neighborhood the pipeline is: solve the coupled steady snapshot
//! problems (one per boundary fine node per unit continuum direction, all
//! continua pinned to delta data on the neighborhood boundary), project the
//! steady operator and the permeability-weighted mass onto the snapshot span,
//! solve the generalized eigenproblem, keep the lowest modes and localize
//! them with the partition of unity into conforming global basis columns.
//! A classical MsFEM space (one coupled harmonic basis per coarse node per
//! continuum, hat-trace boundary data solved block by block) serves as the
//! baseline.
//!
//! Snapshot and spectral problems freeze the mobility at the reference state,
//! so their coefficients are kappa/mu; the online nonlinearity only enters
//! through projected fine operators.

use crate::geometry::{CoarseGrid, CoarseNeighborhood, FineMesh, LocalSubmesh, PartitionOfUnity};
use crate::linalg::{gen_eig_sym, sym_eigen, Cholesky, CsrMatrix, DenseMatrix, LinalgError};
use crate::physics::{ContinuumKind, ContinuumParams, ExchangeTable, FluidProperties};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MultiscaleError {
    #[error("local steady system of neighborhood {neighborhood} is singular ({source}); the submesh is likely disconnected")]
    SingularLocalSystem {
        neighborhood: usize,
        source: LinalgError,
    },
    #[error("requested {requested} basis functions but neighborhood {neighborhood} has only {available} snapshot directions")]
    BasisCountExceedsSnapshots {
        neighborhood: usize,
        requested: usize,
        available: usize,
    },
    #[error("coarse coefficient vector has length {got}, space has dimension {expected}")]
    CoefficientLength { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Coupled steady operator (the spectral form a_omega) and the
/// permeability-weighted mass (s_omega) on a local submesh.
pub struct LocalOperators {
    /// K(alpha = 1/mu) + Q restricted to the submesh
    pub steady: CsrMatrix,
    /// s_omega: (1/mu) sum_i of kappa^i-weighted mass, fracture lines included
    pub spectral_weight: CsrMatrix,
    pub n_loc: usize,
    pub n_continua: usize,
}

fn local_tri_geometry(mesh: &FineMesh, t: usize) -> (f64, [[f64; 2]; 3]) {
    let [a, b, c] = mesh.triangles[t];
    let pa = mesh.nodes[a];
    let pb = mesh.nodes[b];
    let pc = mesh.nodes[c];
    // edge vectors opposite each vertex rotate into the basis gradients
    let e = [
        [pc[0] - pb[0], pc[1] - pb[1]],
        [pa[0] - pc[0], pa[1] - pc[1]],
        [pb[0] - pa[0], pb[1] - pa[1]],
    ];
    let area2 = e[2][0] * (-e[1][1]) - e[2][1] * (-e[1][0]);
    let area = 0.5 * area2;
    let grads = [
        [-e[0][1] / area2, e[0][0] / area2],
        [-e[1][1] / area2, e[1][0] / area2],
        [-e[2][1] / area2, e[2][0] / area2],
    ];
    (area, grads)
}

/// Assemble the coupled steady operator and spectral weight on a submesh.
pub fn assemble_local(
    mesh: &FineMesh,
    sub: &LocalSubmesh,
    params: &[ContinuumParams],
    network: &crate::geometry::FractureNetwork,
    exchange: &ExchangeTable,
    fluid: &FluidProperties,
) -> LocalOperators {
    let n_loc = sub.n_nodes();
    let nc = params.len();
    let nd = n_loc * nc;
    let inv_mu = 1.0 / fluid.viscosity;
    let mut a_trip = Vec::new();
    let mut s_trip = Vec::new();

    for (lt, &t) in sub.triangles.iter().enumerate() {
        let (area, grads) = local_tri_geometry(mesh, t);
        let locs = sub.tri_nodes[lt];
        for (ci, p) in params.iter().enumerate() {
            let base = ci * n_loc;
            // spectral weight: kappa/mu weighted consistent mass
            let sm = p.permeability[t] * inv_mu * area / 12.0;
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == j { 2.0 * sm } else { sm };
                    s_trip.push((base + locs[i], base + locs[j], v));
                }
            }
            // steady stiffness for diffusive continua
            if p.kind == ContinuumKind::Diffusive {
                let coeff = p.permeability[t] * inv_mu * area;
                for i in 0..3 {
                    for j in 0..3 {
                        let v = coeff * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                        a_trip.push((base + locs[i], base + locs[j], v));
                    }
                }
            }
        }
        // lumped exchange coupling
        for i in 0..nc {
            for j in (i + 1)..nc {
                let w = exchange.q(i, j)[t] * area / 3.0;
                for &l in &locs {
                    let di = i * n_loc + l;
                    let dj = j * n_loc + l;
                    a_trip.push((di, di, w));
                    a_trip.push((dj, dj, w));
                    a_trip.push((di, dj, -w));
                    a_trip.push((dj, di, -w));
                }
            }
        }
    }

    for fe in &sub.fracture_edges {
        let f = &network.fractures[fe.fracture];
        let [ga, gb] = [sub.nodes[fe.nodes[0]], sub.nodes[fe.nodes[1]]];
        let pa = mesh.nodes[ga];
        let pb = mesh.nodes[gb];
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        let [la, lb] = fe.nodes;
        for (ci, p) in params.iter().enumerate() {
            let base = ci * n_loc;
            // line mass in s_omega, weight d * kappa_F / mu
            let sm = f.aperture * f.permeability * inv_mu * len / 6.0;
            s_trip.push((base + la, base + la, 2.0 * sm));
            s_trip.push((base + lb, base + lb, 2.0 * sm));
            s_trip.push((base + la, base + lb, sm));
            s_trip.push((base + lb, base + la, sm));
            // line stiffness only for diffusive continua
            if p.kind == ContinuumKind::Diffusive {
                let c = f.aperture * f.permeability * inv_mu / len;
                a_trip.push((base + la, base + la, c));
                a_trip.push((base + lb, base + lb, c));
                a_trip.push((base + la, base + lb, -c));
                a_trip.push((base + lb, base + la, -c));
            }
        }
    }

    LocalOperators {
        steady: CsrMatrix::from_triplets(nd, nd, a_trip),
        spectral_weight: CsrMatrix::from_triplets(nd, nd, s_trip),
        n_loc,
        n_continua: nc,
    }
}

/// Snapshot space of one neighborhood: columns are coupled harmonic fields
/// with delta boundary data, ordered boundary node outer, continuum
/// direction inner.
pub struct SnapshotSpace {
    pub neighborhood: usize,
    /// (nc * n_loc) x (nc * n_boundary) snapshot fields, local dof rows
    pub r: DenseMatrix,
    pub n_loc: usize,
    pub n_continua: usize,
}

impl SnapshotSpace {
    pub fn dim(&self) -> usize {
        self.r.ncols()
    }
}

/// Solve the coupled snapshot problems of a neighborhood: all continua are
/// pinned to delta data on the submesh boundary, interiors solve the coupled
/// steady system with frozen mobility.
pub fn solve_snapshots(
    nb: &CoarseNeighborhood,
    ops: &LocalOperators,
) -> Result<SnapshotSpace, MultiscaleError> {
    let n_loc = ops.n_loc;
    let nc = ops.n_continua;
    let nd = n_loc * nc;
    let sub = &nb.submesh;
    let n_b = sub.boundary.len();

    let mut is_boundary = vec![false; nd];
    for s in 0..nc {
        for &b in &sub.boundary {
            is_boundary[s * n_loc + b] = true;
        }
    }
    let boundary_dofs: Vec<usize> = (0..nd).filter(|&d| is_boundary[d]).collect();
    let interior_dofs: Vec<usize> = (0..nd).filter(|&d| !is_boundary[d]).collect();

    let a_ii = ops.steady.select(&interior_dofs, &interior_dofs).to_dense();
    let a_ib = ops.steady.select(&interior_dofs, &boundary_dofs).to_dense();
    let chol = Cholesky::factor(&a_ii).map_err(|e| MultiscaleError::SingularLocalSystem {
        neighborhood: nb.center,
        source: e,
    })?;
    // interiors for all boundary columns at once: X = -A_II^{-1} A_IB
    let mut x = chol.solve_mat(&a_ib);
    for v in 0..x.ncols() {
        for i in 0..x.nrows() {
            x.set(i, v, -x.get(i, v));
        }
    }

    // boundary dof (s*n_loc + boundary[k]) sits at sorted position s*n_b + k
    let mut r = DenseMatrix::zeros(nd, nc * n_b);
    for k in 0..n_b {
        for s in 0..nc {
            let col = nc * k + s;
            let bcol = s * n_b + k;
            for (row_pos, &d) in interior_dofs.iter().enumerate() {
                r.set(d, col, x.get(row_pos, bcol));
            }
            r.set(s * n_loc + sub.boundary[k], col, 1.0);
        }
    }

    Ok(SnapshotSpace {
        neighborhood: nb.center,
        r,
        n_loc,
        n_continua: nc,
    })
}

/// Spectral basis of one neighborhood: all eigenvalues of the projected
/// problem (ascending) and the first `l_keep` eigenfields on the submesh.
pub struct NeighborhoodBasis {
    pub center: usize,
    pub eigenvalues: Vec<f64>,
    /// (nc * n_loc) x l_keep local fields
    pub fields: DenseMatrix,
}

fn csr_mul_dense(a: &CsrMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut c = DenseMatrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        let bj = b.col(j);
        let cj = c.col_mut(j);
        for r in 0..a.nrows() {
            let (cols, vals) = a.row(r);
            let mut acc = 0.0;
            for (ci, v) in cols.iter().zip(vals) {
                acc += v * bj[*ci];
            }
            cj[r] = acc;
        }
    }
    c
}

/// Condition threshold above which near-dependent snapshot directions are
/// dropped before the generalized eigensolve.
const GRAM_CONDITION_LIMIT: f64 = 1e12;
const GRAM_DROP_TOL: f64 = 1e-12;

/// Solve the local spectral problem on the snapshot span and keep the first
/// `l_keep` modes. The lowest mode is the shared-constant kernel of the
/// steady form; its field is replaced by the exact constant (normalized in
/// the spectral weight) so that global constants are reproduced exactly.
pub fn local_spectral(
    ops: &LocalOperators,
    snapshots: &SnapshotSpace,
    l_keep: usize,
) -> Result<NeighborhoodBasis, MultiscaleError> {
    let r = &snapshots.r;
    let ns = r.ncols();
    if l_keep > ns {
        return Err(MultiscaleError::BasisCountExceedsSnapshots {
            neighborhood: snapshots.neighborhood,
            requested: l_keep,
            available: ns,
        });
    }
    let mut a_p = r.tr_matmul(&csr_mul_dense(&ops.steady, r));
    a_p.symmetrize();
    let mut s_p = r.tr_matmul(&csr_mul_dense(&ops.spectral_weight, r));
    s_p.symmetrize();

    let (s_vals, s_vecs) = sym_eigen(&s_p);
    let smax = s_vals.last().copied().unwrap_or(0.0);
    let smin = s_vals.first().copied().unwrap_or(0.0);
    let (values, coords) = if smin <= smax / GRAM_CONDITION_LIMIT {
        let keep: Vec<usize> = (0..ns)
            .filter(|&k| s_vals[k] >= GRAM_DROP_TOL * smax)
            .collect();
        let v_k = s_vecs.select_cols(&keep);
        let mut a_red = v_k.tr_matmul(&a_p.matmul(&v_k));
        a_red.symmetrize();
        let mut s_red = DenseMatrix::zeros(keep.len(), keep.len());
        for (i, &k) in keep.iter().enumerate() {
            s_red.set(i, i, s_vals[k]);
        }
        let eig = gen_eig_sym(&a_red, &s_red)?;
        (eig.values, v_k.matmul(&eig.vectors))
    } else {
        let eig = gen_eig_sym(&a_p, &s_p)?;
        (eig.values, eig.vectors)
    };
    if l_keep > values.len() {
        return Err(MultiscaleError::BasisCountExceedsSnapshots {
            neighborhood: snapshots.neighborhood,
            requested: l_keep,
            available: values.len(),
        });
    }

    let kept: Vec<usize> = (0..l_keep).collect();
    let mut fields = r.matmul(&coords.select_cols(&kept));

    // exact kernel mode
    if l_keep > 0 && values.len() > 1 && values[0].abs() <= 1e-8 * values[1].abs().max(1e-300) {
        let nd = fields.nrows();
        for i in 0..nd {
            fields.set(i, 0, 1.0);
        }
    }
    // rescale every field to unit max amplitude: spectral-weight
    // normalization can blow amplitudes up by orders of magnitude when the
    // weight is dominated by fracture lines, which wrecks the conditioning
    // of the assembled coarse operators
    for k in 0..fields.ncols() {
        let col = fields.col_mut(k);
        let amp = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if amp > 0.0 {
            for v in col.iter_mut() {
                *v /= amp;
            }
        }
    }

    Ok(NeighborhoodBasis {
        center: snapshots.neighborhood,
        eigenvalues: values,
        fields,
    })
}

/// A coarse approximation space: the prolongation from coarse coefficients to
/// fine coupled fields, its transpose, per-neighborhood eigenvalues and the
/// spectral-gap diagnostic Lambda = min over neighborhoods of the first
/// discarded eigenvalue.
pub struct MultiscaleSpace {
    p: CsrMatrix,
    pt: CsrMatrix,
    /// first column of each coarse node's group, plus the total
    pub col_offsets: Vec<usize>,
    /// all computed eigenvalues per coarse node (empty for MsFEM)
    pub eigenvalues: Vec<Vec<f64>>,
    /// min over neighborhoods of lambda_{L+1}; None when no mode was
    /// discarded anywhere or the space is not spectral
    pub lambda_cut: Option<f64>,
    pub n_fine_dofs: usize,
}

impl MultiscaleSpace {
    pub fn dim(&self) -> usize {
        self.p.ncols()
    }

    pub fn prolongation(&self) -> &CsrMatrix {
        &self.p
    }

    pub fn restriction(&self) -> &CsrMatrix {
        &self.pt
    }

    /// Coarse coefficients -> fine coupled field.
    pub fn downscale(&self, coeffs: &[f64]) -> Result<Vec<f64>, MultiscaleError> {
        if coeffs.len() != self.dim() {
            return Err(MultiscaleError::CoefficientLength {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        Ok(self.p.matvec(coeffs))
    }

    /// P^T A P for symmetric sparse A.
    pub fn project_operator(&self, a: &CsrMatrix) -> DenseMatrix {
        let m = self.dim();
        let nd = self.p.nrows();
        assert_eq!(a.nrows(), nd);
        let mut result = DenseMatrix::zeros(m, m);
        let mut y = vec![0.0; nd];
        let mut touched: Vec<usize> = Vec::new();
        for j in 0..m {
            // y = A p_j, using rows of the symmetric A as its columns
            let (pj_dofs, pj_vals) = self.pt.row(j);
            for (&k, &w) in pj_dofs.iter().zip(pj_vals) {
                let (cols, vals) = a.row(k);
                for (&c, &v) in cols.iter().zip(vals) {
                    if y[c] == 0.0 {
                        touched.push(c);
                    }
                    y[c] += v * w;
                }
            }
            for &d in &touched {
                let yd = y[d];
                if yd != 0.0 {
                    let (cols, vals) = self.p.row(d);
                    for (&ci, &vi) in cols.iter().zip(vals) {
                        result.set(ci, j, result.get(ci, j) + vi * yd);
                    }
                }
                y[d] = 0.0;
            }
            touched.clear();
        }
        result.symmetrize();
        result
    }

    /// P^T f.
    pub fn project_vec(&self, f: &[f64]) -> Vec<f64> {
        self.pt.matvec(f)
    }

    /// Rows of P restricted to an index set (free dofs after elimination).
    pub fn restricted(&self, rows: &[usize]) -> MultiscaleSpace {
        let p = self.p.select_rows(rows);
        let pt = p.transpose();
        MultiscaleSpace {
            p,
            pt,
            col_offsets: self.col_offsets.clone(),
            eigenvalues: self.eigenvalues.clone(),
            lambda_cut: self.lambda_cut,
            n_fine_dofs: rows.len(),
        }
    }
}

/// P^T A P without a space object (small instances, tests).
pub fn galerkin_project(p: &CsrMatrix, a: &CsrMatrix) -> DenseMatrix {
    let pt = p.transpose();
    let mut out = pt.to_dense().matmul(&csr_mul_dense(a, &p.to_dense()));
    out.symmetrize();
    out
}

/// Localize per-neighborhood eigenfields with the partition of unity and
/// assemble the global prolongation, keeping `l_per_node[i]` columns for
/// coarse node i.
pub fn build_space(
    mesh: &FineMesh,
    grid: &CoarseGrid,
    neighborhoods: &[CoarseNeighborhood],
    bases: &[NeighborhoodBasis],
    pou: &PartitionOfUnity,
    l_per_node: &[usize],
) -> Result<MultiscaleSpace, MultiscaleError> {
    let n = mesh.n_nodes();
    let nc = if neighborhoods.is_empty() {
        0
    } else {
        bases[0].fields.nrows() / neighborhoods[0].submesh.n_nodes()
    };
    let nd = n * nc;
    let mut trip = Vec::new();
    let mut col_offsets = Vec::with_capacity(grid.n_nodes() + 1);
    let mut col = 0usize;
    let mut lambda_cut: Option<f64> = None;
    let mut eigenvalues = Vec::with_capacity(bases.len());
    for (nb, basis) in neighborhoods.iter().zip(bases) {
        col_offsets.push(col);
        let l = l_per_node[nb.center];
        if l > basis.fields.ncols() {
            return Err(MultiscaleError::BasisCountExceedsSnapshots {
                neighborhood: nb.center,
                requested: l,
                available: basis.fields.ncols(),
            });
        }
        let chi = &pou.values[nb.center];
        let n_loc = nb.submesh.n_nodes();
        for k in 0..l {
            let field = basis.fields.col(k);
            for (ln, &g) in nb.submesh.nodes.iter().enumerate() {
                let w = chi[g];
                if w != 0.0 {
                    for s in 0..nc {
                        let v = w * field[s * n_loc + ln];
                        if v != 0.0 {
                            trip.push((s * n + g, col + k, v));
                        }
                    }
                }
            }
        }
        col += l;
        if basis.eigenvalues.len() > l {
            let next = basis.eigenvalues[l];
            lambda_cut = Some(match lambda_cut {
                Some(cur) => cur.min(next),
                None => next,
            });
        }
        eigenvalues.push(basis.eigenvalues.clone());
    }
    col_offsets.push(col);
    let p = CsrMatrix::from_triplets(nd, col, trip);
    let pt = p.transpose();
    Ok(MultiscaleSpace {
        p,
        pt,
        col_offsets,
        eigenvalues,
        lambda_cut,
        n_fine_dofs: nd,
    })
}

/// Build snapshot + spectral bases for every coarse node, keeping `l_keep`
/// fields each (capped at the local snapshot dimension). Neighborhoods are
/// independent and solved in parallel.
pub fn build_neighborhood_bases(
    mesh: &FineMesh,
    grid: &CoarseGrid,
    params: &[ContinuumParams],
    network: &crate::geometry::FractureNetwork,
    exchange: &ExchangeTable,
    fluid: &FluidProperties,
    l_keep: usize,
) -> Result<(Vec<CoarseNeighborhood>, Vec<NeighborhoodBasis>), MultiscaleError> {
    type NodeResult = Result<(CoarseNeighborhood, NeighborhoodBasis), MultiscaleError>;
    let n_nodes = grid.n_nodes();
    let mut results: Vec<Option<NodeResult>> = (0..n_nodes).map(|_| None).collect();

    let n_threads = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(n_nodes.max(1));
    let chunk = n_nodes.div_ceil(n_threads);

    std::thread::scope(|scope| {
        for (t, slot) in results.chunks_mut(chunk).enumerate() {
            let start = t * chunk;
            scope.spawn(move || {
                for (off, out) in slot.iter_mut().enumerate() {
                    let id = start + off;
                    let run = || {
                        let nb = crate::geometry::neighborhood(mesh, grid, id)
                            .expect("node id in range");
                        let ops =
                            assemble_local(mesh, &nb.submesh, params, network, exchange, fluid);
                        let snaps = solve_snapshots(&nb, &ops)?;
                        let l = l_keep.min(snaps.dim());
                        let basis = local_spectral(&ops, &snaps, l)?;
                        Ok((nb, basis))
                    };
                    *out = Some(run());
                }
            });
        }
    });

    let mut neighborhoods = Vec::with_capacity(n_nodes);
    let mut bases = Vec::with_capacity(n_nodes);
    for r in results {
        let (nb, basis) = r.expect("all slots filled")?;
        neighborhoods.push(nb);
        bases.push(basis);
    }
    Ok((neighborhoods, bases))
}

/// Classical MsFEM baseline: one coupled harmonic basis per coarse node per
/// continuum direction, solved block by block with hat-trace boundary data.
/// The assembled space has nc columns per coarse node and no spectral data.
pub fn msfem_space(
    mesh: &FineMesh,
    grid: &CoarseGrid,
    params: &[ContinuumParams],
    network: &crate::geometry::FractureNetwork,
    exchange: &ExchangeTable,
    fluid: &FluidProperties,
    pou: &PartitionOfUnity,
) -> Result<MultiscaleSpace, MultiscaleError> {
    let n = mesh.n_nodes();
    let nc = params.len();
    let nd = n * nc;
    let n_coarse = grid.n_nodes();
    let mut columns: Vec<std::collections::BTreeMap<usize, f64>> =
        vec![std::collections::BTreeMap::new(); n_coarse * nc];

    for b in 0..grid.n_blocks() {
        let sub = LocalSubmesh::from_blocks(mesh, grid, &[b]);
        let ops = assemble_local(mesh, &sub, params, network, exchange, fluid);
        let n_loc = sub.n_nodes();
        let ndl = n_loc * nc;
        let mut is_boundary = vec![false; ndl];
        for s in 0..nc {
            for &l in &sub.boundary {
                is_boundary[s * n_loc + l] = true;
            }
        }
        let boundary_dofs: Vec<usize> = (0..ndl).filter(|&d| is_boundary[d]).collect();
        let interior_dofs: Vec<usize> = (0..ndl).filter(|&d| !is_boundary[d]).collect();
        let a_ii = ops.steady.select(&interior_dofs, &interior_dofs).to_dense();
        let a_ib = ops.steady.select(&interior_dofs, &boundary_dofs).to_dense();
        let chol = Cholesky::factor(&a_ii).map_err(|e| MultiscaleError::SingularLocalSystem {
            neighborhood: b,
            source: e,
        })?;
        let n_b = sub.boundary.len();

        // the four corner coarse nodes of this block
        let bx = b % grid.mx;
        let by = b / grid.mx;
        let corners = [
            grid.node_id(bx, by),
            grid.node_id(bx + 1, by),
            grid.node_id(bx, by + 1),
            grid.node_id(bx + 1, by + 1),
        ];

        for &ci in &corners {
            let chi = &pou.values[ci];
            for s in 0..nc {
                // boundary data chi * e_s on the block skeleton
                let mut g = vec![0.0; boundary_dofs.len()];
                for (k, &lb) in sub.boundary.iter().enumerate() {
                    g[s * n_b + k] = chi[sub.nodes[lb]];
                }
                let mut rhs = a_ib.matvec(&g);
                for v in rhs.iter_mut() {
                    *v = -*v;
                }
                let interior = chol.solve_vec(&rhs);
                let col = &mut columns[ci * nc + s];
                for (pos, &d) in interior_dofs.iter().enumerate() {
                    let sc = d / n_loc;
                    let ln = d % n_loc;
                    let v = interior[pos];
                    if v != 0.0 {
                        col.insert(sc * n + sub.nodes[ln], v);
                    }
                }
                for (pos, &d) in boundary_dofs.iter().enumerate() {
                    let sc = d / n_loc;
                    let ln = d % n_loc;
                    let v = g[pos];
                    if v != 0.0 {
                        col.insert(sc * n + sub.nodes[ln], v);
                    }
                }
            }
        }
    }

    let mut trip = Vec::new();
    let mut col_offsets = Vec::with_capacity(n_coarse + 1);
    for ci in 0..n_coarse {
        col_offsets.push(ci * nc);
        for s in 0..nc {
            for (&dof, &v) in &columns[ci * nc + s] {
                trip.push((dof, ci * nc + s, v));
            }
        }
    }
    col_offsets.push(n_coarse * nc);
    let p = CsrMatrix::from_triplets(nd, n_coarse * nc, trip);
    let pt = p.transpose();
    Ok(MultiscaleSpace {
        p,
        pt,
        col_offsets,
        eigenvalues: Vec::new(),
        lambda_cut: None,
        n_fine_dofs: nd,
    })
}
