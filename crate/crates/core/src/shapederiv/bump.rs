use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crosssec::{analyze_full, SectionOptions};
use crate::error::{invalid, Error, Result};
use crate::mesh::{gen_rectangle, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bottom" => Ok(Side::Bottom),
            "right" => Ok(Side::Right),
            "top" => Ok(Side::Top),
            "left" => Ok(Side::Left),
            _ => Err(invalid(format!("unknown side '{s}' (bottom, right, top, left)"))),
        }
    }
}

/// Outward half-disk of radius `radius` on one side of `(0, ell) x (0, height)`.
/// `center` is measured along the side from its left end (top, bottom) or
/// lower end (left, right).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub side: Side,
    pub center: f64,
    pub radius: f64,
}

impl BumpSpec {
    fn validate(&self, ell: f64, height: f64) -> Result<()> {
        let len = match self.side {
            Side::Top | Side::Bottom => ell,
            Side::Left | Side::Right => height,
        };
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(invalid("bump radius must be nonnegative"));
        }
        if !(self.center - self.radius > 0.0 && self.center + self.radius < len) {
            return Err(Error::Geometry(format!(
                "bump [{} ± {}] does not fit strictly inside a side of length {len}",
                self.center, self.radius
            )));
        }
        Ok(())
    }
}

fn disk_height(u: f64, c: f64, r: f64) -> f64 {
    (r * r - (u - c) * (u - c)).max(0.0).sqrt()
}

/// Vertex velocity of the rectangle mesh whose time-one flow grows the
/// bump: the side is pushed out by the half-disk profile and the
/// displacement decays linearly to the opposite side.
pub fn bump_velocity(mesh: &TriMesh, ell: f64, height: f64, bump: &BumpSpec) -> Result<Vec<[f64; 2]>> {
    bump.validate(ell, height)?;
    let (c, r) = (bump.center, bump.radius);
    Ok(mesh
        .vertices()
        .iter()
        .map(|&[x, y]| match bump.side {
            Side::Top => [0.0, disk_height(x, c, r) * y / height],
            Side::Bottom => [0.0, -disk_height(x, c, r) * (1.0 - y / height)],
            Side::Right => [disk_height(y, c, r) * x / ell, 0.0],
            Side::Left => [-disk_height(y, c, r) * (1.0 - x / ell), 0.0],
        })
        .collect())
}

/// Structured `nx x ny` rectangle mesh deformed onto the bumped rectangle.
pub fn bump_mesh(ell: f64, height: f64, nx: usize, ny: usize, bump: &BumpSpec) -> Result<TriMesh> {
    let rect = gen_rectangle(ell, height, nx, ny)?;
    if bump.radius == 0.0 {
        bump.validate(ell, height)?;
        return Ok(rect);
    }
    let v = bump_velocity(&rect, ell, height, bump)?;
    rect.perturb(&v, 1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub x: [f64; 2],
    pub lambda2: f64,
    /// `(λ₃ − λ₂)/λ₂`
    pub simple_gap: f64,
    /// `|ψ_r ᵀ M ψ_prev|` after sign alignment with the previous row.
    pub overlap: Option<f64>,
    pub error: Option<String>,
}

/// Parses `start:stop:step` (inclusive up to rounding) or a comma list.
pub fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let bad = || invalid(format!("cannot parse radii '{s}' (use start:stop:step or a,b,c)"));
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [a, b, h] = parts[..] else { return Err(bad()) };
        if !(h > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| a + i as f64 * h).collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

/// Base rectangle, mesh resolution and bump placement for a radius sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub ell: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub side: Side,
    pub center: f64,
}

/// X on the bumped rectangle for each radius. Failed rows are flagged and
/// the sweep continues.
pub fn bump_sweep(base: &SweepBase, radii: &[f64], opts: &SectionOptions) -> Vec<SweepRow> {
    let b = *base;
    type Run = (f64, [f64; 2], f64, f64, TriMesh, Vec<f64>);
    let runs: Vec<Result<Run>> = radii
        .par_iter()
        .map(|&r| {
            let bump = BumpSpec {
                side: b.side,
                center: b.center,
                radius: r,
            };
            let mesh = bump_mesh(b.ell, b.height, b.nx, b.ny, &bump)?;
            let a = analyze_full(&mesh, opts)?;
            Ok((
                r,
                a.report.x_boundary,
                a.report.lambda2,
                a.report.gap_ratio,
                mesh,
                a.psi,
            ))
        })
        .collect();
    let mut prev: Option<Vec<f64>> = None;
    let mut rows = Vec::with_capacity(radii.len());
    for (run, &r) in runs.into_iter().zip(radii) {
        match run {
            Ok((r, x, lambda2, gap, mesh, mut psi)) => {
                let overlap = prev.as_ref().map(|p| {
                    let m = crate::fem::assemble(&mesh).mass;
                    let o = m.inner(&psi, p);
                    if o < 0.0 {
                        psi.iter_mut().for_each(|v| *v = -*v);
                    }
                    o.abs()
                });
                prev = Some(psi);
                rows.push(SweepRow {
                    r,
                    x,
                    lambda2,
                    simple_gap: gap,
                    overlap,
                    error: None,
                });
            }
            Err(e) => rows.push(SweepRow {
                r,
                x: [f64::NAN; 2],
                lambda2: f64::NAN,
                simple_gap: f64::NAN,
                overlap: None,
                error: Some(e.to_string()),
            }),
        }
    }
    rows
}

/// CSV with columns `r, X1, X2, lambda2, simple_gap` at 17 significant digits.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "X1", "X2", "lambda2", "simple_gap"])?;
    let f = |v: f64| format!("{v:.16e}");
    for row in rows {
        w.write_record([f(row.r), f(row.x[0]), f(row.x[1]), f(row.lambda2), f(row.simple_gap)])?;
    }
    w.flush()?;
    Ok(())
}
