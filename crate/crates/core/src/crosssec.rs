//! Cross-section analysis: the second Neumann eigenpair, the boundary
//! vector `X = ∫_∂ω n ψ² dσ`, and the radius `b`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fem::{assemble, neumann_eigs, p1_gradients, EigenOptions, FemMatrices, Spectrum};
use crate::mesh::{MeshStats, TriMesh};

#[derive(Clone, Debug)]
pub struct SectionOptions {
    pub origin: [f64; 2],
    pub eigen: EigenOptions,
    /// Estimate the discretization error of λ₂ from one uniform refinement.
    pub refine_check: bool,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions {
            origin: [0.0, 0.0],
            eigen: EigenOptions::default(),
            refine_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionReport {
    pub lambda2: f64,
    pub lambda3: f64,
    pub simple: bool,
    pub gap_ratio: f64,
    /// Relative change of λ₂ under one uniform refinement, when computed.
    pub refinement_error: Option<f64>,
    pub x_boundary: [f64; 2],
    pub x_volume: [f64; 2],
    /// True when λ₂ is not simple and X depends on the chosen eigenfunction.
    pub x_representative_only: bool,
    pub b: f64,
    pub origin: [f64; 2],
    pub residuals: Vec<f64>,
    pub mesh: MeshStats,
    pub warnings: Vec<String>,
}

impl CrossSectionReport {
    pub fn x(&self) -> [f64; 2] {
        self.x_boundary
    }
}

/// Report plus the fields needed downstream (eigenfunction, matrices).
#[derive(Clone, Debug)]
pub struct SectionAnalysis {
    pub report: CrossSectionReport,
    pub psi: Vec<f64>,
    pub fem: FemMatrices,
    pub spectrum: Spectrum,
}

/// Boundary form: Σ over edges of n·len·(ψa² + ψaψb + ψb²)/3.
pub fn x_boundary(mesh: &TriMesh, psi: &[f64]) -> [f64; 2] {
    let mut x = [0.0; 2];
    for e in mesh.boundary() {
        let (a, b) = (psi[e.a], psi[e.b]);
        let s = e.length * (a * a + a * b + b * b) / 3.0;
        x[0] += e.normal[0] * s;
        x[1] += e.normal[1] * s;
    }
    x
}

/// Volume form: Σ over triangles of 2·area·mean(ψ)·∇ψ.
pub fn x_volume(mesh: &TriMesh, psi: &[f64]) -> [f64; 2] {
    let mut x = [0.0; 2];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(mesh, t);
        let mean = (psi[tri[0]] + psi[tri[1]] + psi[tri[2]]) / 3.0;
        let mut grad = [0.0; 2];
        for k in 0..3 {
            grad[0] += psi[tri[k]] * g[k][0];
            grad[1] += psi[tri[k]] * g[k][1];
        }
        x[0] += 2.0 * area * mean * grad[0];
        x[1] += 2.0 * area * mean * grad[1];
    }
    x
}

/// Largest distance from `origin` to a boundary vertex.
pub fn b_radius(mesh: &TriMesh, origin: [f64; 2]) -> f64 {
    mesh.boundary()
        .iter()
        .map(|e| {
            let p = mesh.vertices()[e.a];
            (p[0] - origin[0]).hypot(p[1] - origin[1])
        })
        .fold(0.0, f64::max)
}

pub fn analyze(mesh: &TriMesh, opts: &SectionOptions) -> Result<CrossSectionReport> {
    analyze_full(mesh, opts).map(|a| a.report)
}

pub fn analyze_full(mesh: &TriMesh, opts: &SectionOptions) -> Result<SectionAnalysis> {
    let tol = opts.eigen.tol;
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    if mesh.n_vertices() < 4 {
        return Err(invalid("mesh needs at least 4 vertices for two nonzero eigenpairs"));
    }
    let fem = assemble(mesh);
    let spectrum = neumann_eigs(&fem, 2, &opts.eigen)?;
    let lambda2 = spectrum.eigenvalues[1];
    let lambda3 = spectrum.eigenvalues[2];
    let gap_ratio = (lambda3 - lambda2) / lambda2;
    let refinement_error = if opts.refine_check {
        let fine = mesh.refine_uniform();
        let sf = neumann_eigs(&assemble(&fine), 1, &opts.eigen)?;
        Some((lambda2 - sf.eigenvalues[1]).abs() / lambda2)
    } else {
        None
    };
    let threshold = (10.0 * tol).max(5.0 * refinement_error.unwrap_or(0.0));
    let simple = gap_ratio > threshold;
    let psi = spectrum.eigenvectors[1].clone();
    let xb = x_boundary(mesh, &psi);
    let xv = x_volume(mesh, &psi);
    let mut warnings = Vec::new();
    if !simple {
        warnings.push(format!(
            "lambda2 is not simple at this resolution (gap ratio {gap_ratio:.3e} <= {threshold:.3e}); X is representative only"
        ));
    }
    if let Some(q) = mesh.quality_warning() {
        warnings.push(format!(
            "mesh minimum angle {:.2} deg is below {} deg",
            q.min_angle_deg, q.threshold_deg
        ));
    }
    let report = CrossSectionReport {
        lambda2,
        lambda3,
        simple,
        gap_ratio,
        refinement_error,
        x_boundary: xb,
        x_volume: xv,
        x_representative_only: !simple,
        b: b_radius(mesh, opts.origin),
        origin: opts.origin,
        residuals: spectrum.residuals.clone(),
        mesh: mesh.stats(),
        warnings,
    };
    Ok(SectionAnalysis {
        report,
        psi,
        fem,
        spectrum,
    })
}

/// Closed-form reference sections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticSection {
    /// `(0, ell) x (0, height)` with `ell > height`.
    Rectangle { ell: f64, height: f64 },
    /// Right triangle with vertices (0,0), (1,0), (0,1).
    RightTriangle,
}

pub fn analytic_rectangle(ell: f64, height: f64) -> Result<AnalyticSection> {
    if !(ell > 0.0 && height > 0.0) {
        return Err(invalid("rectangle sides must be positive"));
    }
    if ell == height {
        return Err(Error::Degenerate(format!(
            "square section {ell} x {height} has a double second Neumann eigenvalue"
        )));
    }
    if ell < height {
        return Err(invalid("the first side must be the longer one (ell > L)"));
    }
    Ok(AnalyticSection::Rectangle { ell, height })
}

pub fn analytic_right_triangle() -> AnalyticSection {
    AnalyticSection::RightTriangle
}

impl AnalyticSection {
    pub fn lambda2(&self) -> f64 {
        match *self {
            AnalyticSection::Rectangle { ell, .. } => PI * PI / (ell * ell),
            AnalyticSection::RightTriangle => PI * PI,
        }
    }

    pub fn x(&self) -> [f64; 2] {
        match self {
            AnalyticSection::Rectangle { .. } => [0.0, 0.0],
            AnalyticSection::RightTriangle => [1.0, 1.0],
        }
    }

    pub fn psi(&self, y: [f64; 2]) -> f64 {
        match *self {
            AnalyticSection::Rectangle { ell, height } => (2.0 / (ell * height)).sqrt() * (PI * y[0] / ell).cos(),
            AnalyticSection::RightTriangle => 2f64.sqrt() * ((PI * y[1]).cos() - (PI * y[0]).cos()),
        }
    }

    pub fn grad_psi(&self, y: [f64; 2]) -> [f64; 2] {
        match *self {
            AnalyticSection::Rectangle { ell, height } => {
                let c = (2.0 / (ell * height)).sqrt();
                [-c * PI / ell * (PI * y[0] / ell).sin(), 0.0]
            }
            AnalyticSection::RightTriangle => {
                let c = 2f64.sqrt() * PI;
                [c * (PI * y[0]).sin(), -c * (PI * y[1]).sin()]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_rectangle, gen_right_triangle};
    use crate::quad::gauss5;

    #[test]
    fn rectangle_normalization() {
        for &(ell, h) in &[(2.0, 1.0), (2.0 * PI, PI), (3.0, 0.5)] {
            let s = analytic_rectangle(ell, h).unwrap();
            let panels = 32;
            let mut acc = 0.0;
            for i in 0..panels {
                let (a, b) = (ell * i as f64 / panels as f64, ell * (i + 1) as f64 / panels as f64);
                acc += gauss5(|x| gauss5(|y| s.psi([x, y]).powi(2), 0.0, h), a, b);
            }
            assert!((acc - 1.0).abs() < 1e-12, "{acc}");
        }
    }

    #[test]
    fn square_is_degenerate() {
        assert!(matches!(analytic_rectangle(1.0, 1.0), Err(Error::Degenerate(_))));
        assert!((analytic_rectangle(2.0 * PI, PI).unwrap().lambda2() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangle_psi_vanishes_on_diagonal() {
        let s = analytic_right_triangle();
        for i in 0..=10 {
            let y = i as f64 / 20.0;
            assert!(s.psi([y, y]).abs() < 1e-15);
        }
    }

    #[test]
    fn b_radius_examples() {
        let tri = gen_right_triangle(4).unwrap();
        assert!((b_radius(&tri, [0.0, 0.0]) - 1.0).abs() < 1e-15);
        let rect = gen_rectangle(2.0, 1.0, 4, 2).unwrap();
        assert!((b_radius(&rect, [1.0, 0.5]) - 1.25f64.sqrt()).abs() < 1e-15);
        assert!(b_radius(&rect, [1e6, -1e6]).is_finite());
    }

    #[test]
    fn identity_and_sign_invariance() {
        let mesh = gen_right_triangle(16).unwrap();
        let a = analyze_full(&mesh, &SectionOptions::default()).unwrap();
        let xb = a.report.x_boundary;
        let xv = a.report.x_volume;
        assert!((xb[0] - xv[0]).abs() < 1e-10 && (xb[1] - xv[1]).abs() < 1e-10);
        let neg: Vec<f64> = a.psi.iter().map(|v| -v).collect();
        let xn = x_boundary(&mesh, &neg);
        assert!((xn[0] - xb[0]).abs() < 1e-14 && (xn[1] - xb[1]).abs() < 1e-14);
        assert!(a.report.simple);
    }

    #[test]
    fn unit_square_not_simple() {
        let mesh = gen_rectangle(1.0, 1.0, 16, 16).unwrap();
        let r = analyze(&mesh, &SectionOptions::default()).unwrap();
        assert!(!r.simple);
        assert!(r.x_representative_only);
        assert!(!r.warnings.is_empty());
    }
}
