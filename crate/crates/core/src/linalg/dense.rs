//! Dense column-major matrices, Cholesky factorization and symmetric
//! eigensolvers (cyclic Jacobi).

use super::LinalgError;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>, // column major
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nrows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        self.col_mut(j).copy_from_slice(v);
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj != 0.0 {
                let col = self.col(j);
                for i in 0..self.nrows {
                    y[i] += col[i] * xj;
                }
            }
        }
        y
    }

    pub fn matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, b.nrows);
        let mut c = DenseMatrix::zeros(self.nrows, b.ncols);
        for j in 0..b.ncols {
            let bj = b.col(j);
            let cj = c.col_mut(j);
            for k in 0..self.ncols {
                let bkj = bj[k];
                if bkj != 0.0 {
                    let ak = self.col(k);
                    for i in 0..ak.len() {
                        cj[i] += ak[i] * bkj;
                    }
                }
            }
        }
        c
    }

    /// self^T * b
    pub fn tr_matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.nrows, b.nrows);
        let mut c = DenseMatrix::zeros(self.ncols, b.ncols);
        for j in 0..b.ncols {
            let bj = b.col(j);
            for i in 0..self.ncols {
                let ai = self.col(i);
                let mut acc = 0.0;
                for k in 0..ai.len() {
                    acc += ai[k] * bj[k];
                }
                c.set(i, j, acc);
            }
        }
        c
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn symmetrize(&mut self) {
        assert_eq!(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for i in (j + 1)..self.nrows {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// Keep only the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, cols.len());
        for (new, &old) in cols.iter().enumerate() {
            m.set_col(new, self.col(old));
        }
        m
    }
}

/// Lower-triangular Cholesky factor: A = L L^T.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self, LinalgError> {
        assert_eq!(a.nrows, a.ncols);
        let n = a.nrows;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                let ljk = l.get(j, k);
                d -= ljk * ljk;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
            }
            let dj = d.sqrt();
            l.set(j, j, dj);
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / dj);
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows
    }

    /// Solve L y = b in place.
    pub fn forward_vec(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l.get(i, k) * b[k];
            }
            b[i] = s / self.l.get(i, i);
        }
    }

    /// Solve L^T x = y in place.
    pub fn backward_vec(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l.get(k, i) * b[k];
            }
            b[i] = s / self.l.get(i, i);
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_vec(&mut x);
        self.backward_vec(&mut x);
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = b.clone();
        for j in 0..x.ncols {
            let col = x.col_mut(j);
            self.forward_col(col);
            self.backward_col(col);
        }
        x
    }

    /// L^{-1} B, column by column.
    pub fn forward_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = b.clone();
        for j in 0..x.ncols {
            self.forward_col(x.col_mut(j));
        }
        x
    }

    /// L^{-T} B, column by column.
    pub fn backward_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = b.clone();
        for j in 0..x.ncols {
            self.backward_col(x.col_mut(j));
        }
        x
    }

    fn forward_col(&self, b: &mut [f64]) {
        self.forward_vec(b);
    }

    fn backward_col(&self, b: &mut [f64]) {
        self.backward_vec(b);
    }
}

/// Eigenvalues ascending with matching S-orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

fn off_diag_norm(a: &DenseMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                let v = a.get(i, j);
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues ascending and orthonormal eigenvectors as columns.
pub fn sym_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    assert_eq!(a.nrows, a.ncols);
    let n = a.nrows;
    if n == 0 {
        return (Vec::new(), DenseMatrix::zeros(0, 0));
    }
    let mut m = a.clone();
    m.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    let stop = 1e-15 * scale;

    for _sweep in 0..60 {
        if off_diag_norm(&m) <= stop {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Update rows/columns p and q of m.
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                // Rotation applied from both sides zeroes (p,q) analytically.
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = v.select_cols(&order);
    (values, vectors)
}

/// Rank-revealing Cholesky with full symmetric pivoting. Pivots whose Schur
/// complement falls below `rel_tol` times the largest initial diagonal are
/// treated as linearly dependent directions and left out; solves then act on
/// the selected well-conditioned principal submatrix and return zero for the
/// dropped coordinates. For a numerically positive definite matrix this is
/// an exact (reordered) Cholesky solve.
pub struct PivotedCholesky {
    /// permutation: pivot order, selected columns first
    perm: Vec<usize>,
    /// lower factor of the selected principal submatrix, pivot order
    l: DenseMatrix,
    rank: usize,
    n: usize,
}

impl PivotedCholesky {
    pub fn factor(a: &DenseMatrix, rel_tol: f64) -> PivotedCholesky {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        // fully symmetric working copy, addressed through the permutation so
        // pivoting never moves data
        let mut s = a.clone();
        s.symmetrize();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = rel_tol * (0..n).fold(0.0f64, |m, i| m.max(s.get(i, i)));
        // l is indexed by pivot position
        let mut l = DenseMatrix::zeros(n, n);
        let mut rank = n;
        for k in 0..n {
            let mut best_pos = k;
            let mut best = s.get(perm[k], perm[k]);
            for pos in (k + 1)..n {
                let d = s.get(perm[pos], perm[pos]);
                if d > best {
                    best = d;
                    best_pos = pos;
                }
            }
            if !(best > threshold) || !best.is_finite() {
                rank = k;
                break;
            }
            perm.swap(k, best_pos);
            // already-computed factor rows follow the permutation
            for j in 0..k {
                let t = l.get(k, j);
                l.set(k, j, l.get(best_pos, j));
                l.set(best_pos, j, t);
            }
            let piv = perm[k];
            let d = best.sqrt();
            l.set(k, k, d);
            for pos in (k + 1)..n {
                l.set(pos, k, s.get(perm[pos], piv) / d);
            }
            for pa in (k + 1)..n {
                let la = l.get(pa, k);
                if la != 0.0 {
                    let oa = perm[pa];
                    for pb in (k + 1)..n {
                        let ob = perm[pb];
                        s.set(oa, ob, s.get(oa, ob) - la * l.get(pb, k));
                    }
                }
            }
        }
        let mut lr = DenseMatrix::zeros(rank, rank);
        for j in 0..rank {
            for i in j..rank {
                lr.set(i, j, l.get(i, j));
            }
        }
        PivotedCholesky {
            perm,
            l: lr,
            rank,
            n,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_truncated(&self) -> bool {
        self.rank < self.n
    }

    /// Solve A x = b on the selected columns; dropped coordinates are zero.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let r = self.rank;
        let mut y: Vec<f64> = (0..r).map(|k| b[self.perm[k]]).collect();
        for i in 0..r {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        for i in (0..r).rev() {
            let mut s = y[i];
            for k in (i + 1)..r {
                s -= self.l.get(k, i) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        let mut x = vec![0.0; self.n];
        for k in 0..r {
            x[self.perm[k]] = y[k];
        }
        x
    }
}

/// Generalized symmetric eigenproblem A psi = lambda S psi with S positive
/// definite, via the Cholesky reduction S = L L^T followed by a standard
/// symmetric Jacobi eigensolve. Eigenvectors are S-orthonormal and returned
/// with eigenvalues in ascending order.
pub fn gen_eig_sym(a: &DenseMatrix, s: &DenseMatrix) -> Result<EigenDecomposition, LinalgError> {
    assert_eq!(a.nrows, a.ncols);
    assert_eq!(s.nrows, s.ncols);
    assert_eq!(a.nrows, s.nrows);
    let chol = Cholesky::factor(s)?;
    // C = L^{-1} A L^{-T}
    let z = chol.forward_mat(a); // L^{-1} A
    let mut c = chol.forward_mat(&z.transpose()); // L^{-1} A^T L^{-T} = L^{-1} A L^{-T}
    c.symmetrize();
    let (values, q) = sym_eigen(&c);
    let vectors = chol.backward_mat(&q); // psi = L^{-T} q
    Ok(EigenDecomposition { values, vectors })
}
