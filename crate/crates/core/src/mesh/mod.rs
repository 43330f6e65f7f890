//! Conforming P1 triangle meshes of planar cross-sections.

mod generate;
mod gmsh;
mod polygon;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use generate::{gen_rectangle, gen_right_triangle};
pub use gmsh::{export_gmsh, import_gmsh, read_gmsh, write_gmsh};
pub use polygon::{gen_polygon, Polygon};

/// Edge on the domain boundary, oriented counterclockwise around the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    /// Triangle owning the edge.
    pub triangle: usize,
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityWarning {
    pub min_angle_deg: f64,
    pub threshold_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub area: f64,
    pub max_edge: f64,
    pub min_angle_deg: f64,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<i32>,
    boundary: Vec<BoundaryEdge>,
    quality_warning: Option<QualityWarning>,
}

#[derive(Serialize, Deserialize)]
struct MeshJson {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    regions: Option<Vec<i32>>,
}

pub(crate) fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

pub(crate) fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (q[0] - p[0]).hypot(q[1] - p[1])
}

impl TriMesh {
    /// Builds a mesh and checks that it is a connected, positively oriented,
    /// edge-manifold triangulation.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let regions = vec![0; triangles.len()];
        Self::with_regions(vertices, triangles, regions)
    }

    pub fn with_regions(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, regions: Vec<i32>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Geometry("mesh has no triangles".into()));
        }
        if regions.len() != triangles.len() {
            return Err(invalid("one region tag per triangle is required"));
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::Geometry(format!(
                        "triangle {t} references vertex {v} but only {n} vertices exist"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Geometry(format!("triangle {t} repeats a vertex")));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(a > 0.0) {
                return Err(Error::Geometry(format!(
                    "triangle {t} has non-positive signed area {a:e}"
                )));
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::Geometry(format!("vertex {i} is not finite")));
            }
        }
        let boundary = extract_boundary(&vertices, &triangles)?;
        check_connected(n, &triangles)?;
        let mut mesh = TriMesh {
            vertices,
            triangles,
            regions,
            boundary,
            quality_warning: None,
        };
        let min_angle = mesh.min_angle_deg();
        if min_angle < 15.0 {
            mesh.quality_warning = Some(QualityWarning {
                min_angle_deg: min_angle,
                threshold_deg: 15.0,
            });
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[i32] {
        &self.regions
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn quality_warning(&self) -> Option<&QualityWarning> {
        self.quality_warning.as_ref()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Flags vertices lying on the boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary {
            on[e.a] = true;
            on[e.b] = true;
        }
        on
    }

    /// Sum of `n * length` over the boundary; zero for a closed curve.
    pub fn normal_closure(&self) -> [f64; 2] {
        self.boundary.iter().fold([0.0, 0.0], |acc, e| {
            [acc[0] + e.normal[0] * e.length, acc[1] + e.normal[1] * e.length]
        })
    }

    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                m = m.max(dist(self.vertices[tri[k]], self.vertices[tri[(k + 1) % 3]]));
            }
        }
        m
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut m = f64::INFINITY;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let q = self.vertices[tri[(k + 1) % 3]];
                let r = self.vertices[tri[(k + 2) % 3]];
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let c = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                m = m.min(c.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        m
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            vertices: self.n_vertices(),
            triangles: self.n_triangles(),
            boundary_edges: self.boundary.len(),
            area: self.area(),
            max_edge: self.max_edge(),
            min_angle_deg: self.min_angle_deg(),
        }
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine_uniform(&self) -> TriMesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut regions = Vec::with_capacity(4 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut m = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[k] = *mid.entry(key).or_insert_with(|| {
                    let p = vertices[a];
                    let q = vertices[b];
                    vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                    vertices.len() - 1
                });
            }
            let [a, b, c] = *tri;
            triangles.push([a, m[0], m[2]]);
            triangles.push([m[0], b, m[1]]);
            triangles.push([m[2], m[1], c]);
            triangles.push([m[0], m[1], m[2]]);
            regions.extend_from_slice(&[self.regions[t]; 4]);
        }
        TriMesh::with_regions(vertices, triangles, regions).expect("midpoint refinement preserves validity")
    }

    /// Moves every vertex by `t * v[i]`.
    ///
    /// Fails with `StepTooLarge` when some triangle would lose positive area,
    /// reporting the largest admissible `|t|` in the requested direction.
    pub fn perturb(&self, v: &[[f64; 2]], t: f64) -> Result<TriMesh> {
        if v.len() != self.vertices.len() {
            return Err(invalid(format!(
                "displacement has {} entries for {} vertices",
                v.len(),
                self.vertices.len()
            )));
        }
        if !t.is_finite() {
            return Err(invalid("step t must be finite"));
        }
        let t_max = self.max_admissible_step(v, t.signum());
        if t.abs() >= t_max {
            return Err(Error::StepTooLarge {
                t,
                max_admissible: t_max,
            });
        }
        let vertices: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .zip(v)
            .map(|(p, d)| [p[0] + t * d[0], p[1] + t * d[1]])
            .collect();
        TriMesh::with_regions(vertices, self.triangles.clone(), self.regions.clone()).map_err(|_| Error::StepTooLarge {
            t,
            max_admissible: t_max,
        })
    }

    /// Smallest `s > 0` at which some triangle of `x + dir * s * v` degenerates.
    pub fn max_admissible_step(&self, v: &[[f64; 2]], dir: f64) -> f64 {
        let dir = if dir < 0.0 { -1.0 } else { 1.0 };
        let mut best = f64::INFINITY;
        for tri in &self.triangles {
            let p: Vec<[f64; 2]> = tri.iter().map(|&i| self.vertices[i]).collect();
            let d: Vec<[f64; 2]> = tri.iter().map(|&i| [dir * v[i][0], dir * v[i][1]]).collect();
            // 2 * area(s) = c0 + c1 s + c2 s^2
            let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
            let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
            let f1 = [d[1][0] - d[0][0], d[1][1] - d[0][1]];
            let f2 = [d[2][0] - d[0][0], d[2][1] - d[0][1]];
            let c0 = e1[0] * e2[1] - e1[1] * e2[0];
            let c1 = e1[0] * f2[1] - e1[1] * f2[0] + f1[0] * e2[1] - f1[1] * e2[0];
            let c2 = f1[0] * f2[1] - f1[1] * f2[0];
            if let Some(s) = smallest_positive_root(c2, c1, c0) {
                best = best.min(s);
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MeshJson {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            regions: if self.regions.iter().all(|&r| r == 0) {
                None
            } else {
                Some(self.regions.clone())
            },
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<TriMesh> {
        let doc: MeshJson = serde_json::from_str(s)?;
        let regions = doc.regions.unwrap_or_else(|| vec![0; doc.triangles.len()]);
        TriMesh::with_regions(doc.vertices, doc.triangles, regions)
    }

    pub fn read_json(path: &Path) -> Result<TriMesh> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return None;
    }
    let mut roots = Vec::with_capacity(2);
    if a.abs() <= 1e-14 * scale {
        if b != 0.0 {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let qq = -0.5 * (b + b.signum() * sq);
            if qq != 0.0 {
                roots.push(qq / a);
                roots.push(c / qq);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.into_iter().filter(|&r| r > 0.0).reduce(f64::min)
}

fn extract_boundary(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> Result<Vec<BoundaryEdge>> {
    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if edges.insert((a, b), (t, 0)).is_some() {
                return Err(Error::Geometry(format!(
                    "directed edge ({a}, {b}) appears twice; orientation is inconsistent or the mesh is non-manifold"
                )));
            }
        }
    }
    let mut open: Vec<(usize, usize, usize)> = Vec::new();
    for (&(a, b), &(t, _)) in &edges {
        if !edges.contains_key(&(b, a)) {
            open.push((a, b, t));
        }
    }
    if open.is_empty() {
        return Err(Error::Geometry("mesh has no boundary".into()));
    }
    open.sort_unstable();
    // Chain the edges into loops, starting each loop from its smallest vertex.
    let mut next: HashMap<usize, (usize, usize)> = HashMap::with_capacity(open.len());
    for &(a, b, t) in &open {
        if next.insert(a, (b, t)).is_some() {
            return Err(Error::Geometry(format!(
                "boundary vertex {a} is pinched (two outgoing boundary edges)"
            )));
        }
    }
    let mut used = vec![false; vertices.len()];
    let mut out = Vec::with_capacity(open.len());
    for &(start, _, _) in &open {
        if used[start] {
            continue;
        }
        let mut a = start;
        loop {
            used[a] = true;
            let (b, t) = next[&a];
            let p = vertices[a];
            let q = vertices[b];
            let len = dist(p, q);
            out.push(BoundaryEdge {
                a,
                b,
                triangle: t,
                normal: [(q[1] - p[1]) / len, -(q[0] - p[0]) / len],
                length: len,
            });
            a = b;
            if a == start {
                break;
            }
        }
    }
    Ok(out)
}

fn check_connected(n: usize, triangles: &[[usize; 3]]) -> Result<()> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut used = vec![false; n];
    for tri in triangles {
        for &v in tri {
            used[v] = true;
        }
        let r0 = find(&mut parent, tri[0]);
        for &v in &tri[1..] {
            let r = find(&mut parent, v);
            parent[r] = r0;
        }
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::Geometry(format!("vertex {i} is not used by any triangle")));
    }
    let root = find(&mut parent, triangles[0][0]);
    for v in 0..n {
        if find(&mut parent, v) != root {
            return Err(Error::Geometry("mesh is not connected".into()));
        }
    }
    Ok(())
}
