use crate::error::{invalid, Result};

use super::TriMesh;

/// Structured mesh of `(0, ell) x (0, height)` with `nx * ny` cells.
///
/// Every cell is split along the same diagonal, so the mesh is invariant
/// under the point reflection through the rectangle's center.
pub fn gen_rectangle(ell: f64, height: f64, nx: usize, ny: usize) -> Result<TriMesh> {
    if !(ell > 0.0 && height > 0.0 && ell.is_finite() && height.is_finite()) {
        return Err(invalid(format!(
            "rectangle sides must be positive, got {ell} x {height}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(invalid("nx and ny must be at least 1"));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // Snap the far edges exactly onto the sides.
        let y = if j == ny { height } else { height * j as f64 / ny as f64 };
        for i in 0..=nx {
            let x = if i == nx { ell } else { ell * i as f64 / nx as f64 };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| i + j * (nx + 1);
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Structured mesh of the right isosceles triangle with legs on the axes
/// and unit leg length; `n` cells per leg, `n^2` congruent triangles.
pub fn gen_right_triangle(n: usize) -> Result<TriMesh> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut index = vec![vec![usize::MAX; n + 1]; n + 1];
    let mut vertices = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for j in 0..=n {
        for i in 0..=(n - j) {
            let x = i as f64 / n as f64;
            let y = if i + j == n { 1.0 - x } else { j as f64 / n as f64 };
            index[i][j] = vertices.len();
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..(n - j) {
            let v00 = index[i][j];
            let v10 = index[i + 1][j];
            let v01 = index[i][j + 1];
            triangles.push([v00, v10, v01]);
            if i + j + 1 < n {
                let v11 = index[i + 1][j + 1];
                triangles.push([v10, v11, v01]);
            }
        }
    }
    TriMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts_and_normals() {
        let m = gen_rectangle(2.0, 1.0, 2, 2).unwrap();
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_triangles(), 8);
        let bottom: Vec<_> = m
            .boundary()
            .iter()
            .filter(|e| m.vertices()[e.a][1] == 0.0 && m.vertices()[e.b][1] == 0.0)
            .collect();
        assert_eq!(bottom.len(), 2);
        for e in bottom {
            assert_eq!(e.normal, [0.0, -1.0]);
        }
    }

    #[test]
    fn rectangle_is_center_symmetric() {
        let (ell, h) = (2.0, 1.0);
        let m = gen_rectangle(ell, h, 5, 3).unwrap();
        let mut tris: Vec<[u64; 6]> = Vec::new();
        let key = |p: [f64; 2]| [(p[0] * 1e9).round() as u64, (p[1] * 1e9).round() as u64];
        let canon = |ps: [[f64; 2]; 3]| {
            let mut k: Vec<[u64; 2]> = ps.iter().map(|&p| key(p)).collect();
            k.sort();
            [k[0][0], k[0][1], k[1][0], k[1][1], k[2][0], k[2][1]]
        };
        for t in m.triangles() {
            tris.push(canon([m.vertices()[t[0]], m.vertices()[t[1]], m.vertices()[t[2]]]));
        }
        tris.sort();
        let mut refl: Vec<[u64; 6]> = m
            .triangles()
            .iter()
            .map(|t| {
                let r = |p: [f64; 2]| [ell - p[0], h - p[1]];
                canon([r(m.vertices()[t[0]]), r(m.vertices()[t[1]]), r(m.vertices()[t[2]])])
            })
            .collect();
        refl.sort();
        assert_eq!(tris, refl);
    }

    #[test]
    fn right_triangle_counts_and_angles() {
        let m = gen_right_triangle(2).unwrap();
        assert_eq!(m.n_vertices(), 6);
        assert_eq!(m.n_triangles(), 4);
        let m = gen_right_triangle(16).unwrap();
        assert_eq!(m.n_triangles(), 256);
        assert!((m.min_angle_deg() - 45.0).abs() < 1e-9);
        assert!((m.area() - 0.5).abs() < 1e-14);
        for v in m.vertices() {
            assert!(v[0] + v[1] <= 1.0);
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(gen_rectangle(0.0, 1.0, 2, 2).is_err());
        assert!(gen_rectangle(1.0, 1.0, 0, 2).is_err());
        assert!(gen_right_triangle(0).is_err());
    }
}
