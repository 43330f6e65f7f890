use faer::sparse::Triplet;

use crate::error::{invalid, Error, Result};

use super::sparse::SparseFactor;
use super::FemMatrices;

/// Right-hand side of a deflated solve.
#[derive(Clone, Copy, Debug)]
pub enum DeflatedRhs<'a> {
    /// Nodal values `f`; the load is `M f`.
    Nodal(&'a [f64]),
    /// Assembled load vector.
    Load(&'a [f64]),
}

#[derive(Clone, Debug)]
pub struct DeflatedSolution {
    pub x: Vec<f64>,
    /// `b_i^T g` for each basis vector, removed from the load before solving.
    pub removed: Vec<f64>,
    /// Largest `|b_i^T M x|` after solving, relative to `|x|_M`.
    pub orthogonality_defect: f64,
    pub condition_estimate: f64,
}

const COND_LIMIT: f64 = 1e11;
const MULTIPLIER_LIMIT: f64 = 1e-6;

/// Solves `(K - lambda M) x = g` on the `M`-orthogonal complement of `basis`
/// (`M`-orthonormal eigenvectors for `lambda`).
///
/// The kernel is removed by the sparse bordered system
/// `[[K - lambda M, E], [E^T, 0]]`, where `E` pins one vertex per basis
/// vector, and the result is then `M`-projected off the basis.
pub fn solve_deflated(
    fem: &FemMatrices,
    lambda: f64,
    rhs: DeflatedRhs<'_>,
    basis: &[Vec<f64>],
) -> Result<DeflatedSolution> {
    let n = fem.mass.nrows();
    let mut g = match rhs {
        DeflatedRhs::Nodal(f) => {
            if f.len() != n {
                return Err(invalid("right-hand side has the wrong length"));
            }
            fem.mass.mul(f)
        }
        DeflatedRhs::Load(g) => {
            if g.len() != n {
                return Err(invalid("right-hand side has the wrong length"));
            }
            g.to_vec()
        }
    };
    if !lambda.is_finite() {
        return Err(invalid("lambda must be finite"));
    }
    let mb: Vec<Vec<f64>> = basis.iter().map(|b| fem.mass.mul(b)).collect();
    for (i, b) in basis.iter().enumerate() {
        if b.len() != n {
            return Err(invalid("basis vector has the wrong length"));
        }
        let mm: f64 = b.iter().zip(&mb[i]).map(|(p, q)| p * q).sum();
        let rq = fem.stiffness.inner(b, b) / mm;
        if (rq - lambda).abs() > 0.1 * rq.abs() + 1e-12 {
            return Err(invalid(format!(
                "lambda = {lambda} is not within 10% of the Rayleigh quotient {rq} of basis vector {i}"
            )));
        }
    }
    let mut removed = Vec::with_capacity(basis.len());
    for (b, mbv) in basis.iter().zip(&mb) {
        let c: f64 = b.iter().zip(&g).map(|(p, q)| p * q).sum();
        for (gi, mi) in g.iter_mut().zip(mbv) {
            *gi -= c * mi;
        }
        removed.push(c);
    }

    let pins = pivot_rows(basis);
    let m = basis.len();
    let dim = n + m;
    let a = fem.stiffness.lin_comb(1.0, &fem.mass, -lambda);
    let mut trip = a.triplets();
    let mut col_abs = vec![0.0f64; dim];
    for t in &trip {
        col_abs[t.col] += t.val.abs();
    }
    let scale = a.norm_inf();
    for (j, &p) in pins.iter().enumerate() {
        trip.push(Triplet::new(p, n + j, scale));
        trip.push(Triplet::new(n + j, p, scale));
        col_abs[n + j] += scale;
        col_abs[p] += scale;
    }
    let norm_a = col_abs.iter().copied().fold(0.0, f64::max);
    let factor = SparseFactor::lu(dim, &trip).map_err(|e| Error::NearDegenerate(e.to_string()))?;

    // Power iteration on A^{-1} estimates its largest singular value.
    let mut z: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin())
        .collect();
    let mut inv_norm = 0.0;
    for _ in 0..6 {
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in z.iter_mut() {
            *v /= nz;
        }
        factor.solve_in_place(&mut z);
        inv_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !inv_norm.is_finite() {
            break;
        }
    }
    let cond = norm_a * inv_norm;
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::NearDegenerate(format!(
            "bordered system condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}; lambda may be a multiple or undeclared eigenvalue"
        )));
    }

    let mut full = g.clone();
    full.resize(dim, 0.0);
    factor.solve_in_place(&mut full);
    // The pinning multipliers vanish when the kernel of K - lambda M is
    // exactly the span of the basis.
    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mult = full[n..].iter().map(|v| (v * scale).abs()).fold(0.0, f64::max);
    if mult > MULTIPLIER_LIMIT * gnorm {
        return Err(Error::NearDegenerate(format!(
            "load is inconsistent with the declared kernel (multiplier {mult:.3e} vs load {gnorm:.3e}); lambda may be a multiple or undeclared eigenvalue"
        )));
    }
    let mut x: Vec<f64> = full[..n].to_vec();
    for (b, mbv) in basis.iter().zip(&mb) {
        let c: f64 = x.iter().zip(mbv).map(|(p, q)| p * q).sum();
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi -= c * bi;
        }
    }
    let xnorm = fem.mass.inner(&x, &x).max(0.0).sqrt();
    let defect = mb
        .iter()
        .map(|mbv| x.iter().zip(mbv).map(|(p, q)| p * q).sum::<f64>().abs())
        .fold(0.0, f64::max)
        / xnorm.max(f64::MIN_POSITIVE);
    Ok(DeflatedSolution {
        x,
        removed,
        orthogonality_defect: defect,
        condition_estimate: cond,
    })
}

/// One row per basis vector such that the basis restricted to these rows
/// is nonsingular (column-wise partial pivoting).
fn pivot_rows(basis: &[Vec<f64>]) -> Vec<usize> {
    let mut c: Vec<Vec<f64>> = basis.to_vec();
    let mut rows = Vec::with_capacity(c.len());
    for k in 0..c.len() {
        let (p, _) = c[k]
            .iter()
            .enumerate()
            .filter(|(i, _)| !rows.contains(i))
            .fold(
                (0, -1.0),
                |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best },
            );
        let piv = c[k][p];
        for j in k + 1..c.len() {
            let f = c[j][p] / piv;
            let ck = c[k].clone();
            for (a, b) in c[j].iter_mut().zip(&ck) {
                *a -= f * b;
            }
        }
        rows.push(p);
    }
    rows
}
