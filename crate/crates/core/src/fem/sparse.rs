use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sparsity pattern; `rows[i]` need not be sorted.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col.extend_from_slice(&r);
            row_ptr.push(col.len());
        }
        let nnz = col.len();
        CsrMatrix {
            n,
            row_ptr,
            col,
            val: vec![0.0; nnz],
        }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        r.binary_search(&j).ok().map(|p| p + self.row_ptr[i])
    }

    /// Adds `v` to entry `(i, j)`, which must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.position(i, j).expect("entry outside sparsity pattern");
        self.val[p] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.val[p])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col[p], self.val[p]))
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[p] * x[self.col[p]];
            }
            y[i] = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }

    /// `x^T A y`
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let mut r = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.val[p] * y[self.col[p]];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// `alpha * self + beta * other`; both must share the same pattern.
    pub fn lin_comb(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!(self.col, other.col, "patterns differ");
        let mut out = self.clone();
        for (o, (a, b)) in out.val.iter_mut().zip(self.val.iter().zip(&other.val)) {
            *o = alpha * a + beta * b;
        }
        out
    }

    /// Principal submatrix on the rows and columns listed in `keep`.
    pub fn principal_submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for &old in keep {
            for (j, v) in self.row(old) {
                if map[j] != usize::MAX {
                    col.push(map[j]);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix {
            n: keep.len(),
            row_ptr,
            col,
            val,
        }
    }

    pub fn triplets(&self) -> Vec<Triplet<usize, usize, f64>> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out.push(Triplet::new(i, j, v));
            }
        }
        out
    }

    pub(crate) fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        SparseColMat::try_new_from_triplets(self.n, self.n, &self.triplets())
            .map_err(|e| Error::LinearAlgebra(format!("sparse assembly failed: {e:?}")))
    }
}

#[allow(clippy::large_enum_variant)]
enum Kind {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

/// Sparse direct factorization (Cholesky for SPD systems, LU otherwise).
pub struct SparseFactor {
    n: usize,
    kind: Kind,
}

impl SparseFactor {
    pub fn cholesky(a: &CsrMatrix) -> Result<Self> {
        let m = a.to_faer()?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(SparseFactor {
            n: a.nrows(),
            kind: Kind::Llt(llt),
        })
    }

    pub fn lu(n: usize, triplets: &[Triplet<usize, usize, f64>]) -> Result<Self> {
        let m = SparseColMat::try_new_from_triplets(n, n, triplets)
            .map_err(|e| Error::LinearAlgebra(format!("sparse assembly failed: {e:?}")))?;
        let lu = m
            .sp_lu()
            .map_err(|e| Error::LinearAlgebra(format!("LU factorization failed: {e:?}")))?;
        Ok(SparseFactor { n, kind: Kind::Lu(lu) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let mut m = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.solve_mat(&mut m);
        for (i, x) in b.iter_mut().enumerate() {
            *x = m[(i, 0)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_mat(&self, m: &mut Mat<f64>) {
        match &self.kind {
            Kind::Llt(f) => f.solve_in_place(m.as_mut()),
            Kind::Lu(f) => f.solve_in_place(m.as_mut()),
        }
    }
}
