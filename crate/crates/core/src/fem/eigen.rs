//! Shift-invert block iteration with Rayleigh–Ritz for `K u = lambda M u`.

use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::TriMesh;

use super::sparse::{CsrMatrix, SparseFactor};
use super::FemMatrices;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions {
    /// Residual target for `|K u - lambda M u| / |M u|`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_iter: 500,
            seed: 0x5eed_0001,
        }
    }
}

/// Lowest eigenpairs, ascending, with `M`-orthonormal eigenvectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub bc: BoundaryCondition,
    pub dofs: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

fn residual(k: &CsrMatrix, m: &CsrMatrix, x: &[f64], theta: f64) -> f64 {
    let kx = k.mul(x);
    let mx = m.mul(x);
    let num: f64 = kx
        .iter()
        .zip(&mx)
        .map(|(a, b)| (a - theta * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = mx.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den
}

fn fix_sign(x: &mut [f64]) {
    let mut best = 0.0f64;
    for &v in x.iter() {
        if v.abs() > best.abs() {
            best = v;
        }
    }
    if best < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

struct Block {
    n: usize,
    cols: Vec<Vec<f64>>,
}

impl Block {
    fn to_mat(&self, m: &CsrMatrix) -> Mat<f64> {
        let mut out = Mat::zeros(self.n, self.cols.len());
        for (j, c) in self.cols.iter().enumerate() {
            let mc = m.mul(c);
            for i in 0..self.n {
                out[(i, j)] = mc[i];
            }
        }
        out
    }

    fn from_mat(mat: &Mat<f64>) -> Block {
        let cols = (0..mat.ncols())
            .map(|j| (0..mat.nrows()).map(|i| mat[(i, j)]).collect())
            .collect();
        Block { n: mat.nrows(), cols }
    }
}

/// `M`-orthonormalizes the columns in place (two passes of modified
/// Gram–Schmidt), dropping numerically dependent ones. Columns are also
/// made `M`-orthogonal to `locked`.
fn m_orthonormalize(cols: &mut Vec<Vec<f64>>, m: &CsrMatrix, locked: &[(Vec<f64>, Vec<f64>)]) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut mout: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut c in cols.drain(..) {
        let norm0 = m.inner(&c, &c).max(0.0).sqrt();
        if !(norm0 > 0.0) || !norm0.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for (q, mq) in locked.iter().map(|(a, b)| (a, b)).chain(out.iter().zip(mout.iter())) {
                let d: f64 = c.iter().zip(mq).map(|(a, b)| a * b).sum();
                for (ci, qi) in c.iter_mut().zip(q) {
                    *ci -= d * qi;
                }
            }
        }
        let mc = m.mul(&c);
        let nrm = c.iter().zip(&mc).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
        if nrm <= 1e-10 * norm0 {
            continue;
        }
        let inv = 1.0 / nrm;
        out.push(c.iter().map(|v| v * inv).collect());
        mout.push(mc.iter().map(|v| v * inv).collect());
    }
    *cols = out;
}

struct RawEigs {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    iterations: usize,
}

/// Lowest `nev` eigenpairs of `(k, m)` restricted to the `M`-orthogonal
/// complement of `deflate` (an `M`-normalized vector).
fn block_eigs(
    k: &CsrMatrix,
    m: &CsrMatrix,
    nev: usize,
    deflate: Option<&[f64]>,
    opts: &EigenOptions,
) -> Result<RawEigs> {
    let n = k.nrows();
    let avail = n - usize::from(deflate.is_some());
    if nev == 0 {
        return Ok(RawEigs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
            iterations: 0,
        });
    }
    if nev > avail {
        return Err(invalid(format!(
            "requested {nev} eigenpairs but only {avail} degrees of freedom are available"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let bsize = (nev + 3).min(avail);
    let locked: Vec<(Vec<f64>, Vec<f64>)> = deflate.map(|c| (c.to_vec(), m.mul(c))).into_iter().collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cols: Vec<Vec<f64>> = (0..bsize)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    m_orthonormalize(&mut cols, m, &locked);

    let mut sigma = 1e-3 * k.trace() / m.trace();
    let mut factor = SparseFactor::cholesky(&k.lin_comb(1.0, m, sigma))?;
    let mut reshifts = 0;
    let mut best = vec![f64::INFINITY; nev];

    for it in 1..=opts.max_iter {
        let mut rhs = Block {
            n,
            cols: std::mem::take(&mut cols),
        }
        .to_mat(m);
        factor.solve_mat(&mut rhs);
        let mut y = Block::from_mat(&rhs).cols;
        m_orthonormalize(&mut y, m, &locked);
        if y.len() < nev {
            return Err(Error::LinearAlgebra("search subspace collapsed".into()));
        }
        // Rayleigh–Ritz on span(y).
        let ky: Vec<Vec<f64>> = y.iter().map(|c| k.mul(c)).collect();
        let b = y.len();
        let a = DMatrix::from_fn(b, b, |i, j| {
            let s: f64 = y[i].iter().zip(&ky[j]).map(|(p, q)| p * q).sum();
            let t: f64 = y[j].iter().zip(&ky[i]).map(|(p, q)| p * q).sum();
            0.5 * (s + t)
        });
        let eig = a.symmetric_eigen();
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut new_cols = Vec::with_capacity(b);
        let mut thetas = Vec::with_capacity(b);
        for &j in &order {
            let mut v = vec![0.0; n];
            for (i, yi) in y.iter().enumerate() {
                let c = eig.eigenvectors[(i, j)];
                for (vv, yy) in v.iter_mut().zip(yi) {
                    *vv += c * yy;
                }
            }
            new_cols.push(v);
            thetas.push(eig.eigenvalues[j]);
        }
        let res: Vec<f64> = (0..nev).map(|i| residual(k, m, &new_cols[i], thetas[i])).collect();
        for (b, r) in best.iter_mut().zip(&res) {
            *b = b.min(*r);
        }
        let converged = res.iter().all(|&r| r <= opts.tol);
        cols = new_cols;
        if converged {
            let mut vectors: Vec<Vec<f64>> = cols[..nev].to_vec();
            for v in &mut vectors {
                fix_sign(v);
            }
            return Ok(RawEigs {
                values: thetas[..nev].to_vec(),
                vectors,
                residuals: res,
                iterations: it,
            });
        }
        // Move the shift down toward the spectrum once a Ritz estimate exists.
        let low = thetas[0].max(0.0);
        if reshifts < 4 && low > 0.0 && sigma > 1e-2 * low && it >= 2 {
            sigma = 1e-3 * low;
            factor = SparseFactor::cholesky(&k.lin_comb(1.0, m, sigma))?;
            reshifts += 1;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        best_residuals: best,
    })
}

/// Lowest `k` nonzero Neumann eigenpairs; the constant mode is returned
/// first with eigenvalue zero, so the result holds `k + 1` pairs.
pub fn neumann_eigs(fem: &FemMatrices, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
    let n = fem.mass.nrows();
    let ones = vec![1.0; n];
    let c = 1.0 / fem.mass.inner(&ones, &ones).sqrt();
    let constant = vec![c; n];
    let raw = block_eigs(&fem.stiffness, &fem.mass, k, Some(&constant), opts)?;
    let r0 = residual(&fem.stiffness, &fem.mass, &constant, 0.0);
    let mut eigenvalues = vec![0.0];
    eigenvalues.extend(raw.values);
    let mut residuals = vec![r0];
    residuals.extend(raw.residuals);
    let mut eigenvectors = vec![constant];
    eigenvectors.extend(raw.vectors);
    Ok(Spectrum {
        bc: BoundaryCondition::Neumann,
        dofs: n,
        eigenvalues,
        residuals,
        iterations: raw.iterations,
        eigenvectors,
    })
}

/// Lowest `k` Dirichlet eigenpairs; boundary vertices are eliminated and
/// the eigenvectors are padded with zeros there.
pub fn dirichlet_eigs(mesh: &TriMesh, fem: &FemMatrices, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
    let on = mesh.boundary_vertices();
    let interior: Vec<usize> = (0..mesh.n_vertices()).filter(|&i| !on[i]).collect();
    if k > interior.len() {
        return Err(invalid(format!(
            "requested {k} Dirichlet eigenpairs but the mesh has {} interior vertices",
            interior.len()
        )));
    }
    let ki = fem.stiffness.principal_submatrix(&interior);
    let mi = fem.mass.principal_submatrix(&interior);
    let raw = block_eigs(&ki, &mi, k, None, opts)?;
    let eigenvectors = raw
        .vectors
        .iter()
        .map(|v| {
            let mut full = vec![0.0; mesh.n_vertices()];
            for (&i, &x) in interior.iter().zip(v) {
                full[i] = x;
            }
            full
        })
        .collect();
    Ok(Spectrum {
        bc: BoundaryCondition::Dirichlet,
        dofs: interior.len(),
        eigenvalues: raw.values,
        residuals: raw.residuals,
        iterations: raw.iterations,
        eigenvectors,
    })
}

/// Binary sidecar: `u64` vector length, `u64` count, then the vectors as
/// little-endian `f64`.
pub fn write_eigenvectors(path: &Path, vectors: &[Vec<f64>]) -> Result<()> {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut buf = Vec::with_capacity(16 + 8 * n * vectors.len());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&(vectors.len() as u64).to_le_bytes());
    for v in vectors {
        if v.len() != n {
            return Err(invalid("eigenvectors must share one length"));
        }
        for x in v {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_eigenvectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let word = |i: usize| -> Result<[u8; 8]> {
        buf.get(8 * i..8 * i + 8)
            .map(|s| s.try_into().unwrap())
            .ok_or_else(|| invalid("eigenvector file is truncated"))
    };
    let n = u64::from_le_bytes(word(0)?) as usize;
    let k = u64::from_le_bytes(word(1)?) as usize;
    if buf.len() != 16 + 8 * n * k {
        return Err(invalid("eigenvector file size does not match its header"));
    }
    Ok((0..k)
        .map(|j| {
            (0..n)
                .map(|i| f64::from_le_bytes(word(2 + j * n + i).unwrap()))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::mesh::gen_rectangle;
    use std::f64::consts::PI;

    #[test]
    fn rectangle_neumann() {
        let mesh = gen_rectangle(2.0, 1.0, 32, 16).unwrap();
        let fem = assemble(&mesh);
        let s = neumann_eigs(&fem, 3, &EigenOptions::default()).unwrap();
        assert_eq!(s.eigenvalues.len(), 4);
        assert!(s.eigenvalues[0].abs() < 1e-14);
        let exact = PI * PI / 4.0;
        assert!((s.eigenvalues[1] - exact).abs() / exact < 5e-3);
        assert!(s.eigenvalues[1] >= exact);
        for r in &s.residuals {
            assert!(*r <= 1e-8);
        }
        for i in 0..4 {
            for j in 0..4 {
                let d = fem.mass.inner(&s.eigenvectors[i], &s.eigenvectors[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-10, "{i} {j} {d}");
            }
        }
    }

    #[test]
    fn unit_square_dirichlet() {
        let mesh = gen_rectangle(1.0, 1.0, 24, 24).unwrap();
        let fem = assemble(&mesh);
        let s = dirichlet_eigs(&mesh, &fem, 1, &EigenOptions::default()).unwrap();
        let exact = 2.0 * PI * PI;
        assert!((s.eigenvalues[0] - exact).abs() / exact < 1e-2);
        let on = mesh.boundary_vertices();
        for (i, &b) in on.iter().enumerate() {
            if b {
                assert_eq!(s.eigenvectors[0][i], 0.0);
            }
        }
    }

    #[test]
    fn too_many_dirichlet_pairs() {
        let mesh = gen_rectangle(1.0, 1.0, 2, 2).unwrap();
        let fem = assemble(&mesh);
        assert!(matches!(
            dirichlet_eigs(&mesh, &fem, 2, &EigenOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        let v = vec![vec![1.0, -2.5, 3.25], vec![0.0, 1e-300, f64::MAX]];
        write_eigenvectors(&p, &v).unwrap();
        assert_eq!(read_eigenvectors(&p).unwrap(), v);
    }
}
