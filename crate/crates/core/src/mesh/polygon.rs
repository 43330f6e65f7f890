//! Unstructured meshing of simple polygons.
//!
//! Boundary resampling, ear clipping, Lawson flips to a Delaunay
//! triangulation, longest-edge midpoint splitting until every edge is at
//! most the target size, and Laplacian smoothing of interior vertices.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

use super::{dist, signed_area, TriMesh};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    points: Vec<[f64; 2]>,
}

fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

fn dist2(p: [f64; 2], q: [f64; 2]) -> f64 {
    (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

impl Polygon {
    /// Validates a closed polyline (last point not repeated) and orients it
    /// counterclockwise.
    pub fn new(mut points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(invalid(format!(
                "a polygon needs at least 3 vertices, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(invalid("polygon vertices must be finite"));
        }
        let n = points.len();
        for i in 0..n {
            if points[i] == points[(i + 1) % n] {
                return Err(Error::Geometry(format!("polygon repeats vertex {i}")));
            }
        }
        let area: f64 = (0..n)
            .map(|i| orient([0.0, 0.0], points[i], points[(i + 1) % n]))
            .sum::<f64>()
            * 0.5;
        if area == 0.0 {
            return Err(Error::Geometry("polygon has zero area".into()));
        }
        if area < 0.0 {
            points.reverse();
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_intersect(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]) {
                    return Err(Error::Geometry(format!(
                        "polygon is not simple: edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(Polygon { points })
    }

    /// Reads `x,y` rows; a non-numeric first row is taken as a header.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pts = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match vals {
                Ok(v) if v.len() == 2 => pts.push([v[0], v[1]]),
                Err(_) if i == 0 => continue,
                _ => {
                    return Err(Error::Format {
                        line: i + 1,
                        message: "expected numeric x,y".into(),
                    })
                }
            }
        }
        Polygon::new(pts)
    }

    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|i| orient([0.0, 0.0], self.points[i], self.points[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (p, q) = (self.points[i], self.points[(i + 1) % n]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }

    /// Indices of vertices with interior angle above pi.
    pub fn reflex_vertices(&self) -> Vec<usize> {
        let n = self.points.len();
        (0..n)
            .filter(|&i| orient(self.points[(i + n - 1) % n], self.points[i], self.points[(i + 1) % n]) < 0.0)
            .collect()
    }

    pub fn shortest_edge(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (p, q) = (self.points[i], self.points[(i + 1) % n]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Two disks joined by a thin horizontal strip: radius 1 centered at
    /// (-2, 0), radius 2 centered at (2, 0), strip half-width sin(pi/15).
    /// Each circle is sampled at `per_circle` equally spaced angles.
    pub fn dumbbell(per_circle: usize) -> Result<Polygon> {
        if per_circle < 8 {
            return Err(invalid("at least 8 samples per circle are required"));
        }
        let w = (PI / 15.0).sin();
        let (cl, rl) = (-2.0, 1.0);
        let (cr, rr) = (2.0, 2.0);
        let xl = cl + (rl * rl - w * w).sqrt();
        let xr = cr - (rr * rr - w * w).sqrt();
        let step = 2.0 * PI / per_circle as f64;
        let mut pts = vec![[xl, -w], [xr, -w]];
        // Right circle, counterclockwise from the lower junction to the upper one.
        let a0 = (-w).atan2(xr - cr);
        let a1 = w.atan2(xr - cr);
        let mut k = (a0 / step).floor() as i64 + 1;
        loop {
            let a = k as f64 * step;
            if a >= a1 + 2.0 * PI * f64::from(a1 < a0) - 0.5 * step {
                break;
            }
            if a > a0 + 0.5 * step {
                pts.push([cr + rr * a.cos(), rr * a.sin()]);
            }
            k += 1;
        }
        pts.push([xr, w]);
        pts.push([xl, w]);
        // Left circle, counterclockwise from the upper junction to the lower one.
        let b0 = w.atan2(xl - cl);
        let b1 = 2.0 * PI - b0;
        let mut k = (b0 / step).floor() as i64 + 1;
        loop {
            let a = k as f64 * step;
            if a >= b1 - 0.5 * step {
                break;
            }
            if a > b0 + 0.5 * step {
                pts.push([cl + rl * a.cos(), rl * a.sin()]);
            }
            k += 1;
        }
        Polygon::new(pts)
    }

    fn resample(&self, h: f64) -> Vec<[f64; 2]> {
        let n = self.points.len();
        let mut out = Vec::new();
        for i in 0..n {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            let m = ((len / h).ceil() as usize).max(1);
            for k in 0..m {
                let s = k as f64 / m as f64;
                out.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
            }
        }
        out
    }
}

struct Triangulation {
    pts: Vec<[f64; 2]>,
    tris: Vec<[usize; 3]>,
    nbr: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
}

fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

impl Triangulation {
    fn new(pts: Vec<[f64; 2]>, tris: Vec<[usize; 3]>, on_boundary: Vec<bool>) -> Self {
        let mut edge: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                edge.insert((tri[(k + 1) % 3], tri[(k + 2) % 3]), (t, k));
            }
        }
        let mut nbr = vec![[NONE; 3]; tris.len()];
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                if let Some(&(u, _)) = edge.get(&(tri[(k + 2) % 3], tri[(k + 1) % 3])) {
                    nbr[t][k] = u;
                }
            }
        }
        Triangulation {
            pts,
            tris,
            nbr,
            on_boundary,
        }
    }

    fn replace_nbr(&mut self, t: usize, old: usize, new: usize) {
        if t == NONE {
            return;
        }
        for k in 0..3 {
            if self.nbr[t][k] == old {
                self.nbr[t][k] = new;
                return;
            }
        }
    }

    /// Local index in `u` of the vertex opposite the edge shared with `t`.
    fn opposite_index(&self, u: usize, t: usize) -> usize {
        (0..3).find(|&m| self.nbr[u][m] == t).expect("adjacency is symmetric")
    }

    fn is_illegal(&self, t: usize, k: usize) -> bool {
        let u = self.nbr[t][k];
        if u == NONE {
            return false;
        }
        let m = self.opposite_index(u, t);
        let a = self.pts[self.tris[t][k]];
        let b = self.pts[self.tris[t][(k + 1) % 3]];
        let c = self.pts[self.tris[t][(k + 2) % 3]];
        let d = self.pts[self.tris[u][m]];
        if orient(a, b, d) <= 0.0 || orient(a, d, c) <= 0.0 {
            return false;
        }
        let scale = [b, c, d]
            .iter()
            .map(|p| (p[0] - a[0]).hypot(p[1] - a[1]))
            .fold(0.0, f64::max);
        incircle(a, b, c, d) > 1e-12 * scale.powi(4)
    }

    fn flip(&mut self, t: usize, k: usize) -> usize {
        let u = self.nbr[t][k];
        let m = self.opposite_index(u, t);
        let a = self.tris[t][k];
        let b = self.tris[t][(k + 1) % 3];
        let c = self.tris[t][(k + 2) % 3];
        let d = self.tris[u][m];
        let nt_b = self.nbr[t][(k + 1) % 3];
        let nt_c = self.nbr[t][(k + 2) % 3];
        // u = [d, c, b] starting at m
        let nu_c = self.nbr[u][(m + 1) % 3];
        let nu_b = self.nbr[u][(m + 2) % 3];
        self.tris[t] = [a, b, d];
        self.nbr[t] = [nu_c, u, nt_c];
        self.tris[u] = [a, d, c];
        self.nbr[u] = [nu_b, nt_b, t];
        self.replace_nbr(nu_c, u, t);
        self.replace_nbr(nt_b, t, u);
        u
    }

    fn legalize(&mut self, mut stack: Vec<(usize, usize)>) {
        let mut guard = 0usize;
        let limit = 50 * (self.tris.len() + 16) * 3;
        while let Some((t, k)) = stack.pop() {
            guard += 1;
            if guard > limit {
                break;
            }
            if self.is_illegal(t, k) {
                let u = self.flip(t, k);
                for j in 0..3 {
                    stack.push((t, j));
                    stack.push((u, j));
                }
            }
        }
    }

    fn legalize_all(&mut self) {
        let mut stack = Vec::with_capacity(3 * self.tris.len());
        for t in 0..self.tris.len() {
            for k in 0..3 {
                if self.nbr[t][k] != NONE {
                    stack.push((t, k));
                }
            }
        }
        self.legalize(stack);
    }

    fn split(&mut self, t: usize, k: usize) {
        let a = self.tris[t][k];
        let b = self.tris[t][(k + 1) % 3];
        let c = self.tris[t][(k + 2) % 3];
        let (pb, pc) = (self.pts[b], self.pts[c]);
        let p = self.pts.len();
        self.pts.push([0.5 * (pb[0] + pc[0]), 0.5 * (pb[1] + pc[1])]);
        let u = self.nbr[t][k];
        self.on_boundary.push(u == NONE);
        let nt_b = self.nbr[t][(k + 1) % 3];
        let nt_c = self.nbr[t][(k + 2) % 3];
        let t2 = self.tris.len();
        if u == NONE {
            self.tris[t] = [a, b, p];
            self.nbr[t] = [NONE, t2, nt_c];
            self.tris.push([a, p, c]);
            self.nbr.push([NONE, nt_b, t]);
            self.replace_nbr(nt_b, t, t2);
            self.legalize(vec![(t, 2), (t2, 1)]);
            return;
        }
        let m = self.opposite_index(u, t);
        let d = self.tris[u][m];
        let nu_c = self.nbr[u][(m + 1) % 3];
        let nu_b = self.nbr[u][(m + 2) % 3];
        let u2 = t2 + 1;
        self.tris[t] = [a, b, p];
        self.nbr[t] = [u2, t2, nt_c];
        self.tris.push([a, p, c]);
        self.nbr.push([u, nt_b, t]);
        self.tris[u] = [d, c, p];
        self.nbr[u] = [t2, u2, nu_b];
        self.tris.push([d, p, b]);
        self.nbr.push([t, nu_c, u]);
        self.replace_nbr(nt_b, t, t2);
        self.replace_nbr(nu_c, u, u2);
        self.legalize(vec![(t, 2), (t2, 1), (u, 2), (u2, 1)]);
    }

    fn edge_len(&self, t: usize, k: usize) -> f64 {
        let p = self.pts[self.tris[t][(k + 1) % 3]];
        let q = self.pts[self.tris[t][(k + 2) % 3]];
        (q[0] - p[0]).hypot(q[1] - p[1])
    }

    /// Bisects longest edges above `h`, and those of triangles with an angle
    /// below 20 degrees while the edge is above `floor`.
    fn refine(&mut self, h: f64, floor: f64) -> Result<()> {
        let poor = 20f64.to_radians().sin();
        let cap = 2_000_000;
        loop {
            let mut changed = false;
            let n = self.tris.len();
            for t in 0..n {
                let (k, len) =
                    (0..3)
                        .map(|k| (k, self.edge_len(t, k)))
                        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                if len > h || (len > floor && self.worst_sine(&[t]) < poor) {
                    self.split(t, k);
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
            if self.tris.len() > cap {
                return Err(invalid(format!("target size {h} requires more than {cap} triangles")));
            }
        }
    }

    /// Smallest sine of any angle over the given triangles.
    fn worst_sine(&self, tris: &[usize]) -> f64 {
        let mut worst = f64::INFINITY;
        for &t in tris {
            let [a, b, c] = self.tris[t].map(|i| self.pts[i]);
            let two_area = signed_area(a, b, c) * 2.0;
            let la = (b[0] - c[0]).hypot(b[1] - c[1]);
            let lb = (a[0] - c[0]).hypot(a[1] - c[1]);
            let lc = (a[0] - b[0]).hypot(a[1] - b[1]);
            worst = worst
                .min(two_area / (lb * lc))
                .min(two_area / (la * lc))
                .min(two_area / (la * lb));
        }
        worst
    }

    /// Moves interior vertices of triangles with sine below `floor` by compass
    /// search on the worst incident angle.
    fn improve_bad(&mut self, floor: f64) {
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); self.pts.len()];
        for (t, tri) in self.tris.iter().enumerate() {
            for &v in tri {
                inc[v].push(t);
            }
        }
        for _ in 0..3 {
            let bad: Vec<usize> = (0..self.tris.len())
                .filter(|&t| self.worst_sine(&[t]) < floor)
                .collect();
            if bad.is_empty() {
                return;
            }
            for t in bad {
                for v in self.tris[t] {
                    if self.on_boundary[v] {
                        continue;
                    }
                    let mut best = self.worst_sine(&inc[v]);
                    let mut step = inc[v]
                        .iter()
                        .flat_map(|&u| (0..3).map(move |k| (u, k)))
                        .map(|(u, k)| self.edge_len(u, k))
                        .fold(f64::INFINITY, f64::min)
                        * 0.25;
                    for _ in 0..40 {
                        let p = self.pts[v];
                        let mut moved = false;
                        for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
                            self.pts[v] = [p[0] + step * d[0], p[1] + step * d[1]];
                            let q = self.worst_sine(&inc[v]);
                            if q > best {
                                best = q;
                                moved = true;
                                break;
                            }
                            self.pts[v] = p;
                        }
                        if !moved {
                            step *= 0.5;
                        }
                    }
                }
            }
        }
    }

    fn smooth(&mut self, sweeps: usize) {
        let n = self.pts.len();
        for _ in 0..sweeps {
            let mut ring: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (t, tri) in self.tris.iter().enumerate() {
                for k in 0..3 {
                    inc[tri[k]].push(t);
                    ring[tri[k]].push(tri[(k + 1) % 3]);
                }
            }
            for v in 0..n {
                if self.on_boundary[v] || ring[v].is_empty() {
                    continue;
                }
                let mut c = [0.0, 0.0];
                for &w in &ring[v] {
                    c[0] += self.pts[w][0];
                    c[1] += self.pts[w][1];
                }
                let inv = 1.0 / ring[v].len() as f64;
                let cand = [c[0] * inv, c[1] * inv];
                let old = self.pts[v];
                let before = self.worst_sine(&inc[v]);
                self.pts[v] = cand;
                let ok = inc[v].iter().all(|&t| {
                    let tri = self.tris[t];
                    signed_area(self.pts[tri[0]], self.pts[tri[1]], self.pts[tri[2]]) > 0.0
                }) && self.worst_sine(&inc[v]) >= before.min(0.5);
                if !ok {
                    self.pts[v] = old;
                }
            }
            self.legalize_all();
        }
    }
}

fn ear_clip(pts: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let n = pts.len();
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut alive = vec![true; n];
    // Resampled points on a straight side are collinear up to rounding.
    let turn = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        let o = orient(a, b, c);
        let scale = dist2(a, b).max(dist2(b, c)).max(dist2(a, c));
        if o.abs() <= 1e-12 * scale {
            0.0
        } else {
            o
        }
    };
    let reflex = |i: usize, prev: &[usize], next: &[usize]| turn(pts[prev[i]], pts[i], pts[next[i]]) <= 0.0;

    let ear_quality = |i: usize, prev: &[usize], next: &[usize], alive: &[bool]| -> Option<f64> {
        let (a, b, c) = (pts[prev[i]], pts[i], pts[next[i]]);
        if turn(a, b, c) <= 0.0 {
            return None;
        }
        for j in 0..n {
            if !alive[j] || j == i || j == prev[i] || j == next[i] {
                continue;
            }
            if !reflex(j, prev, next) && pts[j] != a && pts[j] != c {
                // Convex vertices cannot sit inside an ear unless collinear with its edges.
                let p = pts[j];
                if turn(a, b, p) > 0.0 && turn(b, c, p) > 0.0 && turn(c, a, p) > 0.0 {
                    return None;
                }
                continue;
            }
            let p = pts[j];
            if turn(a, b, p) >= 0.0 && turn(b, c, p) >= 0.0 && turn(c, a, p) >= 0.0 {
                return None;
            }
        }
        Some(min_angle(a, b, c))
    };

    let mut quality: Vec<Option<f64>> = (0..n).map(|i| ear_quality(i, &prev, &next, &alive)).collect();
    let mut out = Vec::with_capacity(n - 2);
    let mut remaining = n;
    while remaining > 3 {
        let best = (0..n)
            .filter(|&i| alive[i])
            .filter_map(|i| quality[i].map(|q| (i, q)))
            .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                Some(b) if b.1 >= x.1 => Some(b),
                _ => Some(x),
            });
        let Some((i, _)) = best else {
            return Err(Error::Geometry(
                "ear clipping found no ear; polygon may be degenerate".into(),
            ));
        };
        out.push([prev[i], i, next[i]]);
        alive[i] = false;
        let (p, q) = (prev[i], next[i]);
        next[p] = q;
        prev[q] = p;
        remaining -= 1;
        quality[p] = ear_quality(p, &prev, &next, &alive);
        quality[q] = ear_quality(q, &prev, &next, &alive);
    }
    let i = (0..n).find(|&i| alive[i]).expect("three vertices remain");
    let tri = [prev[i], i, next[i]];
    if orient(pts[tri[0]], pts[tri[1]], pts[tri[2]]) <= 0.0 {
        return Err(Error::Geometry("ear clipping left a degenerate triangle".into()));
    }
    out.push(tri);
    Ok(out)
}

fn min_angle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let ang = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        let u = [q[0] - p[0], q[1] - p[1]];
        let v = [r[0] - p[0], r[1] - p[1]];
        let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
        cos.clamp(-1.0, 1.0).acos()
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}

/// Triangulates a simple polygon so that every mesh edge is at most `target_h`.
///
/// Boundary vertices lie on the input polyline. A quality warning is
/// attached when the smallest angle falls below 15 degrees.
pub fn gen_polygon(poly: &Polygon, target_h: f64) -> Result<TriMesh> {
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(invalid(format!("target_h must be positive, got {target_h}")));
    }
    let pts = poly.resample(target_h);
    let n = pts.len();
    let shortest = (0..n)
        .map(|i| dist(pts[i], pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min);
    let floor = 2.0 * shortest;
    let tris = ear_clip(&pts)?;
    let on_boundary = vec![true; pts.len()];
    let mut tri = Triangulation::new(pts, tris, on_boundary);
    tri.legalize_all();
    tri.refine(target_h, floor)?;
    tri.smooth(10);
    // Smoothing can stretch edges slightly past the target, and splitting chords
    // can leave vertices close to the boundary.
    for _ in 0..4 {
        let before = tri.tris.len();
        tri.refine(target_h, floor)?;
        if tri.tris.len() == before {
            break;
        }
        tri.smooth(3);
    }
    tri.refine(target_h, floor)?;
    tri.improve_bad((15.5f64).to_radians().sin());
    TriMesh::new(tri.pts, tri.tris)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn square_mesh() {
        let m = gen_polygon(&unit_square(), 0.1).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.max_edge() <= 0.1 + 1e-12);
        assert!(m.min_angle_deg() > 20.0, "{}", m.min_angle_deg());
    }

    #[test]
    fn csv_with_header() {
        let p = Polygon::from_csv("x,y\n0,0\n2,0\n2,1\n0,1\n".as_bytes()).unwrap();
        assert_eq!(p.points().len(), 4);
        assert!((p.area() - 2.0).abs() < 1e-15);
        assert!(matches!(
            Polygon::from_csv("0,0\n1,a\n".as_bytes()),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bow_tie_rejected() {
        let p = Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(p, Err(Error::Geometry(_))));
    }

    #[test]
    fn clockwise_is_reoriented() {
        let p = Polygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn l_shape_mesh() {
        let p = Polygon::new(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(p.reflex_vertices(), vec![3]);
        let m = gen_polygon(&p, 0.2).unwrap();
        assert!((m.area() - 3.0).abs() < 1e-12);
        assert!(m.quality_warning().is_none());
    }

    #[test]
    fn boundary_points_on_polyline() {
        let p = Polygon::new(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 2.0]]).unwrap();
        let m = gen_polygon(&p, 0.25).unwrap();
        for e in m.boundary() {
            let v = m.vertices()[e.a];
            let on_leg = v[0].abs() < 1e-14 || v[1].abs() < 1e-14;
            let on_hyp = (v[0] / 3.0 + v[1] / 2.0 - 1.0).abs() < 1e-14;
            assert!(on_leg || on_hyp, "{v:?}");
        }
    }

    #[test]
    fn dumbbell_meets_angle_bound() {
        for h in [0.4, 0.2, 0.1] {
            let m = gen_polygon(&Polygon::dumbbell(256).unwrap(), h).unwrap();
            assert!(m.quality_warning().is_none(), "h={h}: {}", m.min_angle_deg());
            assert!(m.max_edge() <= h * (1.0 + 1e-12));
        }
    }

    #[test]
    fn star_with_collinear_resampling() {
        let p = Polygon::new(vec![
            [1.3956205446612049, 0.0],
            [0.8814725363586206, 0.46265217767693606],
            [0.3193080234044576, 0.6858804024922952],
            [-0.5627544616935855, 0.974719319839364],
            [-0.8049712301864753, 0.29298556722852465],
            [-0.5771052397554731, -0.16416315739768716],
            [-0.43525987844436453, -0.753892223961892],
            [0.10418890660015798, -0.5908846518073249],
            [0.8370868507806921, -0.5268596827628006],
        ])
        .unwrap();
        let m = gen_polygon(&p, 0.29518712906332517).unwrap();
        assert!((m.area() - p.area()).abs() <= 1e-10 * p.area());
    }
}
