//! Shape sensitivity of `X`: the adjoint state, the shape derivative of
//! `X·w` along a boundary velocity, and its finite-difference validation.

mod bump;
mod rectangle;

pub use bump::{
    bump_mesh, bump_sweep, bump_velocity, parse_radii, write_sweep_csv, BumpSpec, Side, SweepBase, SweepRow,
};
pub use rectangle::{rect_integrand, rect_psi, rect_q};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crosssec::{analyze_full, x_boundary, SectionAnalysis, SectionOptions};
use crate::error::{invalid, Error, Result};
use crate::fem::{p1_gradient_of, solve_deflated, DeflatedRhs, SparseFactor};
use crate::mesh::TriMesh;

/// Above this `|X·w|` the adjoint problem is not solvable as posed.
pub const SOLVABILITY_WARN: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjointState {
    pub q: Vec<f64>,
    pub w: [f64; 2],
    /// `|qᵀMψ| / |q|_M`
    pub orthogonality_defect: f64,
    /// `|X·w|` estimated from the load component removed by deflation.
    pub removed: f64,
    pub warning: Option<String>,
}

/// How traces of `∇ψ` and `∇q` are taken on a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// Constant gradients of the adjacent triangle.
    AdjacentTriangle,
    /// Tangential derivatives along the edge; normal parts from the
    /// boundary conditions.
    BoundaryConsistent,
}

/// `2 B_w ψ`: assembled load of `2∫_∂ω ψ v (n·w)`.
pub fn boundary_load(mesh: &TriMesh, psi: &[f64], w: [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for e in mesh.boundary() {
        let c = 2.0 * e.length * (e.normal[0] * w[0] + e.normal[1] * w[1]) / 6.0;
        out[e.a] += c * (2.0 * psi[e.a] + psi[e.b]);
        out[e.b] += c * (psi[e.a] + 2.0 * psi[e.b]);
    }
    out
}

fn check_w(w: [f64; 2]) -> Result<()> {
    if !(w[0].is_finite() && w[1].is_finite()) {
        return Err(invalid("direction w must be finite"));
    }
    let n = w[0].hypot(w[1]);
    if n != 0.0 && (n - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("direction w must be a unit vector or zero, |w| = {n}")));
    }
    Ok(())
}

/// Solves `(K − λ₂M) q = −2 B_w ψ` with `q ⊥_M ψ`.
pub fn adjoint_solve(mesh: &TriMesh, section: &SectionAnalysis, w: [f64; 2]) -> Result<AdjointState> {
    check_w(w)?;
    let n = mesh.n_vertices();
    if section.psi.len() != n {
        return Err(invalid("eigenfunction does not match the mesh"));
    }
    if !section.report.simple {
        return Err(Error::NearDegenerate(format!(
            "lambda2 = {} is not simple (gap ratio {:.3e}); the adjoint problem is ill-posed",
            section.report.lambda2, section.report.gap_ratio
        )));
    }
    if w == [0.0, 0.0] {
        return Ok(AdjointState {
            q: vec![0.0; n],
            w,
            orthogonality_defect: 0.0,
            removed: 0.0,
            warning: None,
        });
    }
    let mut g = boundary_load(mesh, &section.psi, w);
    for v in g.iter_mut() {
        *v = -*v;
    }
    let sol = solve_deflated(
        &section.fem,
        section.report.lambda2,
        DeflatedRhs::Load(&g),
        std::slice::from_ref(&section.psi),
    )?;
    let removed = 0.5 * sol.removed[0].abs();
    let warning = (removed > SOLVABILITY_WARN)
        .then(|| format!("|X·w| ≈ {removed:.3e} is not small; the adjoint problem is only solved after projection"));
    Ok(AdjointState {
        q: sol.x,
        w,
        orthogonality_defect: sol.orthogonality_defect,
        removed,
        warning,
    })
}

/// `V·n` at boundary edge midpoints, in `mesh.boundary()` order.
pub fn normal_velocity(mesh: &TriMesh, v: &[[f64; 2]]) -> Vec<f64> {
    mesh.boundary()
        .iter()
        .map(|e| {
            let m = [0.5 * (v[e.a][0] + v[e.b][0]), 0.5 * (v[e.a][1] + v[e.b][1])];
            m[0] * e.normal[0] + m[1] * e.normal[1]
        })
        .collect()
}

/// Shape-derivative integrand `∇(ψ²)·w − λqψ + ∇q·∇ψ` at the midpoint of
/// boundary edge `k`.
pub fn boundary_integrand(
    mesh: &TriMesh,
    lambda: f64,
    psi: &[f64],
    q: &[f64],
    w: [f64; 2],
    k: usize,
    mode: TraceMode,
) -> f64 {
    let e = &mesh.boundary()[k];
    let pm = 0.5 * (psi[e.a] + psi[e.b]);
    let qm = 0.5 * (q[e.a] + q[e.b]);
    match mode {
        TraceMode::AdjacentTriangle => {
            let gp = p1_gradient_of(mesh, e.triangle, psi);
            let gq = p1_gradient_of(mesh, e.triangle, q);
            2.0 * pm * (gp[0] * w[0] + gp[1] * w[1]) - lambda * qm * pm + gq[0] * gp[0] + gq[1] * gp[1]
        }
        TraceMode::BoundaryConsistent => {
            let tau = [-e.normal[1], e.normal[0]];
            let dp = (psi[e.b] - psi[e.a]) / e.length;
            let dq = (q[e.b] - q[e.a]) / e.length;
            2.0 * pm * dp * (tau[0] * w[0] + tau[1] * w[1]) - lambda * qm * pm + dq * dp
        }
    }
}

/// Midpoint-rule boundary integral of the integrand against `vn`.
pub fn shape_derivative(
    mesh: &TriMesh,
    lambda: f64,
    psi: &[f64],
    adj: &AdjointState,
    vn: &[f64],
    mode: TraceMode,
) -> Result<f64> {
    if vn.len() != mesh.boundary().len() {
        return Err(invalid(format!(
            "normal velocity has {} entries for {} boundary edges",
            vn.len(),
            mesh.boundary().len()
        )));
    }
    Ok(mesh
        .boundary()
        .iter()
        .enumerate()
        .filter(|(k, _)| vn[*k] != 0.0)
        .map(|(k, e)| e.length * vn[k] * boundary_integrand(mesh, lambda, psi, &adj.q, adj.w, k, mode))
        .sum())
}

/// Exact derivative of the discrete `X_h·w` along the vertex motion `v`:
/// `ψᵀB′ψ + qᵀ(K′ − λM′)ψ − (X·w) ψᵀM′ψ`.
pub fn discrete_shape_derivative(
    mesh: &TriMesh,
    lambda: f64,
    psi: &[f64],
    adj: &AdjointState,
    v: &[[f64; 2]],
) -> Result<f64> {
    if v.len() != mesh.n_vertices() {
        return Err(invalid("velocity does not match the mesh"));
    }
    let w = adj.w;
    let xw = {
        let x = x_boundary(mesh, psi);
        x[0] * w[0] + x[1] * w[1]
    };
    let det = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];

    let mut b_term = 0.0;
    for e in mesh.boundary() {
        let dv = sub(v[e.b], v[e.a]);
        let c = (dv[1] * w[0] - dv[0] * w[1]) / 6.0;
        let (a, b) = (psi[e.a], psi[e.b]);
        b_term += c * (2.0 * a * a + 2.0 * a * b + 2.0 * b * b);
    }

    let (vol_q, vol_m) = mesh
        .triangles()
        .iter()
        .map(|tri| {
            let p = tri.map(|i| mesh.vertices()[i]);
            let dv = tri.map(|i| v[i]);
            let area = 0.5 * det(sub(p[1], p[0]), sub(p[2], p[0]));
            let darea = 0.5 * (det(sub(dv[1], dv[0]), sub(p[2], p[0])) + det(sub(p[1], p[0]), sub(dv[2], dv[0])));
            let d: [[f64; 2]; 3] = std::array::from_fn(|i| sub(p[(i + 2) % 3], p[(i + 1) % 3]));
            let dd: [[f64; 2]; 3] = std::array::from_fn(|i| sub(dv[(i + 2) % 3], dv[(i + 1) % 3]));
            let ps = tri.map(|i| psi[i]);
            let qs = tri.map(|i| adj.q[i]);
            let (mut sq, mut sm) = (0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let k = dot(d[i], d[j]) / (4.0 * area);
                    let dk = (dot(dd[i], d[j]) + dot(d[i], dd[j])) / (4.0 * area) - k * darea / area;
                    let dm = darea / 12.0 * if i == j { 2.0 } else { 1.0 };
                    sq += qs[i] * (dk - lambda * dm) * ps[j];
                    sm += ps[i] * dm * ps[j];
                }
            }
            (sq, sm)
        })
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(b_term + vol_q - xw * vol_m)
}

/// Discrete harmonic lift: keeps `v` on boundary vertices and solves
/// `K v_i = 0` at interior vertices, componentwise.
pub fn harmonic_extension(mesh: &TriMesh, v: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    if v.len() != mesh.n_vertices() {
        return Err(invalid("velocity does not match the mesh"));
    }
    let on_boundary = mesh.boundary_vertices();
    let interior: Vec<usize> = (0..mesh.n_vertices()).filter(|&i| !on_boundary[i]).collect();
    let mut out = v.to_vec();
    for i in &interior {
        out[*i] = [0.0, 0.0];
    }
    if interior.is_empty() {
        return Ok(out);
    }
    let k = crate::fem::assemble(mesh).stiffness;
    let kii = k.principal_submatrix(&interior);
    let factor = SparseFactor::cholesky(&kii)?;
    for c in 0..2 {
        let vb: Vec<f64> = out.iter().map(|p| p[c]).collect();
        let kv = k.mul(&vb);
        let rhs: Vec<f64> = interior.iter().map(|&i| -kv[i]).collect();
        let x = factor.solve(&rhs);
        for (&i, xi) in interior.iter().zip(x) {
            out[i][c] = xi;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FdOptions {
    pub section: SectionOptions,
    /// Minimum `(λ₃ − λ₂)/λ₂` along the ladder.
    pub degeneracy_tol: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        let mut section = SectionOptions {
            refine_check: false,
            ..SectionOptions::default()
        };
        section.eigen.tol = 1e-10;
        FdOptions {
            section,
            degeneracy_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeDerivReport {
    pub w: [f64; 2],
    /// Exact derivative of the discrete `X·w` (discrete adjoint).
    pub adjoint: f64,
    /// Boundary-integral form with adjacent-triangle traces.
    pub boundary_adjacent: f64,
    /// Boundary-integral form with tangential traces.
    pub boundary_consistent: f64,
    pub x0: [f64; 2],
    pub lambda2: f64,
    pub ladder: Vec<f64>,
    /// `X_t·w` at each ladder step.
    pub fd_values: Vec<f64>,
    /// `(X_t − X_0)·w / t`.
    pub fd_slopes: Vec<f64>,
    /// Slope at 0 of the interpolating polynomial through `(0, X_0·w)` and the ladder.
    pub extrapolated: f64,
    /// `|adjoint − extrapolated| / |adjoint|`, absolute when the adjoint value vanishes.
    pub discrepancy: f64,
    /// Same discrepancy for the two boundary forms.
    pub discrepancy_adjacent: f64,
    pub discrepancy_consistent: f64,
    /// `ψ_tᵀ M_t ψ_0` after sign correction.
    pub overlaps: Vec<f64>,
    pub adjoint_state_removed: f64,
    pub warnings: Vec<String>,
}

/// Derivative at 0 of the polynomial through `(0, y0)` and `(t_i, y_i)`.
pub fn richardson_slope(y0: f64, t: &[f64], y: &[f64]) -> f64 {
    let nodes: Vec<f64> = std::iter::once(0.0).chain(t.iter().copied()).collect();
    let vals: Vec<f64> = std::iter::once(y0).chain(y.iter().copied()).collect();
    let mut slope = 0.0;
    for i in 0..nodes.len() {
        let d = if i == 0 {
            nodes[1..].iter().map(|tj| -1.0 / tj).sum::<f64>()
        } else {
            let mut num = 1.0;
            let mut den = 1.0;
            for (j, &tj) in nodes.iter().enumerate() {
                if j != i {
                    den *= nodes[i] - tj;
                    if j != 0 {
                        num *= -tj;
                    }
                }
            }
            num / den
        };
        slope += d * vals[i];
    }
    slope
}

/// Relative to `|a|`; absolute when `|a|` is below 1e-9.
fn relative(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if a.abs() < 1e-9 {
        d
    } else {
        d / a.abs()
    }
}

/// Compares the adjoint derivative with finite differences of `X_t·w` on
/// `mesh.perturb(v, t)` for each `t` in the ladder.
pub fn fd_check(
    mesh: &TriMesh,
    v: &[[f64; 2]],
    w: [f64; 2],
    ladder: &[f64],
    opts: &FdOptions,
) -> Result<ShapeDerivReport> {
    check_w(w)?;
    if ladder.is_empty() {
        return Err(invalid("finite-difference ladder is empty"));
    }
    let mut sorted = ladder.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.iter().any(|t| *t == 0.0 || !t.is_finite()) || sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(invalid("ladder steps must be distinct, finite and nonzero"));
    }
    let perturbed: Vec<TriMesh> = ladder.iter().map(|&t| mesh.perturb(v, t)).collect::<Result<_>>()?;

    let base = analyze_full(mesh, &opts.section)?;
    let adj = adjoint_solve(mesh, &base, w)?;
    let lambda = base.report.lambda2;
    let adjoint = discrete_shape_derivative(mesh, lambda, &base.psi, &adj, v)?;
    let vn = normal_velocity(mesh, v);
    let boundary_adjacent = shape_derivative(mesh, lambda, &base.psi, &adj, &vn, TraceMode::AdjacentTriangle)?;
    let boundary_consistent = shape_derivative(mesh, lambda, &base.psi, &adj, &vn, TraceMode::BoundaryConsistent)?;

    let runs: Vec<(f64, f64)> = perturbed
        .par_iter()
        .zip(ladder.par_iter())
        .map(|(m, &t)| {
            let a = analyze_full(m, &opts.section)?;
            if a.report.gap_ratio < opts.degeneracy_tol {
                return Err(Error::Tracking(format!(
                    "lambda2 and lambda3 nearly cross at t = {t} (gap ratio {:.3e})",
                    a.report.gap_ratio
                )));
            }
            let overlap = a.fem.mass.inner(&a.psi, &base.psi);
            let x = a.report.x_boundary;
            Ok((x[0] * w[0] + x[1] * w[1], overlap.abs()))
        })
        .collect::<Result<_>>()?;
    let fd_values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let overlaps: Vec<f64> = runs.iter().map(|r| r.1).collect();
    if let Some((t, o)) = ladder.iter().zip(&overlaps).find(|(_, o)| **o < 0.9) {
        return Err(Error::Tracking(format!(
            "eigenfunction at t = {t} has overlap {o:.3} with the unperturbed one"
        )));
    }
    let x0 = base.report.x_boundary;
    let y0 = x0[0] * w[0] + x0[1] * w[1];
    let fd_slopes = ladder.iter().zip(&fd_values).map(|(t, y)| (y - y0) / t).collect();
    let extrapolated = richardson_slope(y0, ladder, &fd_values);
    let mut warnings = base.report.warnings.clone();
    warnings.extend(adj.warning.clone());
    Ok(ShapeDerivReport {
        w,
        adjoint,
        boundary_adjacent,
        boundary_consistent,
        x0,
        lambda2: lambda,
        ladder: ladder.to_vec(),
        fd_values,
        fd_slopes,
        extrapolated,
        discrepancy: relative(adjoint, extrapolated),
        discrepancy_adjacent: relative(boundary_adjacent, extrapolated),
        discrepancy_consistent: relative(boundary_consistent, extrapolated),
        overlaps,
        adjoint_state_removed: adj.removed,
        warnings,
    })
}
