//! P1 finite elements: assembly, eigenpairs and deflated solves.

mod deflated;
mod eigen;
mod sparse;

pub use deflated::{solve_deflated, DeflatedRhs, DeflatedSolution};
pub use eigen::{
    dirichlet_eigs, neumann_eigs, read_eigenvectors, write_eigenvectors, BoundaryCondition, EigenOptions, Spectrum,
};
pub use sparse::{CsrMatrix, SparseFactor};

use crate::mesh::TriMesh;

/// Stiffness and consistent mass matrices on the mesh vertices.
#[derive(Clone, Debug)]
pub struct FemMatrices {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
}

/// Constant gradients of the three hat functions on triangle `t`, and its area.
pub fn p1_gradients(mesh: &TriMesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let tri = mesh.triangles()[t];
    let p = [
        mesh.vertices()[tri[0]],
        mesh.vertices()[tri[1]],
        mesh.vertices()[tri[2]],
    ];
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        g[i] = [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det];
    }
    (g, 0.5 * det)
}

/// Gradient of the P1 interpolant of `u` on triangle `t`.
pub fn p1_gradient_of(mesh: &TriMesh, t: usize, u: &[f64]) -> [f64; 2] {
    let (g, _) = p1_gradients(mesh, t);
    let tri = mesh.triangles()[t];
    let mut out = [0.0; 2];
    for k in 0..3 {
        out[0] += u[tri[k]] * g[k][0];
        out[1] += u[tri[k]] * g[k][1];
    }
    out
}

pub(crate) fn vertex_pattern(mesh: &TriMesh) -> Vec<Vec<usize>> {
    let mut rows: Vec<Vec<usize>> = (0..mesh.n_vertices()).map(|i| vec![i]).collect();
    for tri in mesh.triangles() {
        for &a in tri {
            for &b in tri {
                if a != b {
                    rows[a].push(b);
                }
            }
        }
    }
    rows
}

/// Assembles the P1 stiffness and consistent mass matrices.
pub fn assemble(mesh: &TriMesh) -> FemMatrices {
    let pattern = vertex_pattern(mesh);
    let mut k = CsrMatrix::from_pattern(pattern.clone());
    let mut m = CsrMatrix::from_pattern(pattern);
    for t in 0..mesh.n_triangles() {
        let (g, area) = p1_gradients(mesh, t);
        let tri = mesh.triangles()[t];
        for a in 0..3 {
            for b in 0..3 {
                let kab = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                let mab = if a == b { area / 6.0 } else { area / 12.0 };
                k.add(tri[a], tri[b], kab);
                m.add(tri[a], tri[b], mab);
            }
        }
    }
    FemMatrices { stiffness: k, mass: m }
}

/// Mass matrix of the boundary trace: `len / 6 * [[2, 1], [1, 2]]` per edge.
pub fn boundary_mass_apply(mesh: &TriMesh, edge_weight: &[f64], u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for (e, w) in mesh.boundary().iter().zip(edge_weight) {
        let c = w * e.length / 6.0;
        out[e.a] += c * (2.0 * u[e.a] + u[e.b]);
        out[e.b] += c * (u[e.a] + 2.0 * u[e.b]);
    }
    out
}

/// `sqrt(u^T M u)`
pub fn m_norm(mass: &CsrMatrix, u: &[f64]) -> f64 {
    mass.inner(u, u).max(0.0).sqrt()
}
