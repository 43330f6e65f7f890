use std::io::Read;
use std::path::Path;

use crate::error::{invalid, Error, Result};

use super::{ParamCurve, Vec3};

/// Natural cubic spline through sampled points `(t, x, y, z)`.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    t: Vec<f64>,
    p: [Vec<f64>; 3],
    m: [Vec<f64>; 3],
    planar: bool,
    name: String,
}

fn natural_second_derivatives(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = t[i] - t[i - 1];
        let h1 = t[i + 1] - t[i];
        diag[i] = 2.0 * (h0 + h1);
        sup[i] = h1;
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    // Thomas algorithm on rows 1..n-1; sub-diagonal of row i is h_{i-1}.
    for i in 2..n - 1 {
        let w = (t[i] - t[i - 1]) / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 2] = rhs[n - 2] / diag[n - 2];
    for i in (1..n - 2).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}

impl SampledCurve {
    pub fn new(t: Vec<f64>, points: Vec<Vec3>, name: impl Into<String>) -> Result<Self> {
        if t.len() != points.len() {
            return Err(invalid("parameter and point counts differ"));
        }
        if t.len() < 4 {
            return Err(Error::StepSize(format!(
                "{} samples are too few for a cubic spline; provide at least 4 (more samples give a finer curve)",
                t.len()
            )));
        }
        if t.iter().any(|v| !v.is_finite()) || points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(invalid("samples must be finite"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("sample parameters must be strictly increasing"));
        }
        let p: [Vec<f64>; 3] = std::array::from_fn(|k| points.iter().map(|q| q[k]).collect());
        let m = std::array::from_fn(|k| natural_second_derivatives(&t, &p[k]));
        let planar = p[2].iter().all(|&z| z == 0.0);
        Ok(SampledCurve {
            t,
            p,
            m,
            planar,
            name: name.into(),
        })
    }

    /// Reads `t,x,y,z` rows; a non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(reader: R, name: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut t = Vec::new();
        let mut pts = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let vals = match vals {
                Ok(v) => v,
                Err(_) if i == 0 => continue,
                Err(_) => {
                    return Err(Error::Format {
                        line: i + 1,
                        message: "expected numeric t,x,y,z".into(),
                    })
                }
            };
            if vals.len() < 3 || vals.len() > 4 {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("expected 3 or 4 columns, found {}", vals.len()),
                });
            }
            t.push(vals[0]);
            pts.push(Vec3::new(vals[1], vals[2], vals.get(3).copied().unwrap_or(0.0)));
        }
        Self::new(t, pts, name)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv(f, path.display().to_string())
    }

    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let n = self.t.len();
        let i = match self.t.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        (i, h, (t - self.t[i]) / h)
    }

    fn eval(&self, t: f64, order: usize) -> Vec3 {
        let (i, h, u) = self.locate(t);
        let a = 1.0 - u;
        Vec3::from_fn(|k, _| {
            let (y0, y1) = (self.p[k][i], self.p[k][i + 1]);
            let (m0, m1) = (self.m[k][i], self.m[k][i + 1]);
            match order {
                0 => a * y0 + u * y1 + h * h / 6.0 * ((a * a * a - a) * m0 + (u * u * u - u) * m1),
                1 => (y1 - y0) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * m0 + (3.0 * u * u - 1.0) * m1),
                _ => a * m0 + u * m1,
            }
        })
    }
}

impl ParamCurve for SampledCurve {
    fn position(&self, t: f64) -> Vec3 {
        self.eval(t, 0)
    }
    fn d1(&self, t: f64) -> Vec3 {
        self.eval(t, 1)
    }
    fn d2(&self, t: f64) -> Vec3 {
        self.eval(t, 2)
    }
    fn window(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }
    fn name(&self) -> String {
        self.name.clone()
    }
    fn is_planar(&self) -> bool {
        self.planar
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_is_c2() {
        let t: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let pts: Vec<Vec3> = t.iter().map(|&s| Vec3::new(s, s.sin(), 0.0)).collect();
        let c = SampledCurve::new(t.clone(), pts.clone(), "sin").unwrap();
        for (ti, p) in t.iter().zip(&pts) {
            assert!((c.position(*ti) - p).norm() < 1e-14);
        }
        let e = 1e-9;
        for &k in &[0.3, 0.9, 1.5] {
            assert!((c.d2(k - e) - c.d2(k + e)).norm() < 1e-6);
        }
        assert!((c.d1(1.05).y - 1.05f64.cos()).abs() < 1e-3);
        assert!(c.is_planar());
    }

    #[test]
    fn three_points_is_step_size_error() {
        let csv = "t,x,y,z\n0,0,0,0\n1,1,0,0\n2,2,0,0\n";
        assert!(matches!(
            SampledCurve::from_csv(csv.as_bytes(), "x"),
            Err(Error::StepSize(_))
        ));
    }

    #[test]
    fn csv_without_header() {
        let csv = "0,0,0,0\n1,1,1,0\n2,2,4,0\n3,3,9,0\n4,4,16,1\n";
        let c = SampledCurve::from_csv(csv.as_bytes(), "x").unwrap();
        assert_eq!(c.window(), (0.0, 4.0));
        assert!(!c.is_planar());
    }

    #[test]
    fn rejects_unsorted() {
        let csv = "0,0,0,0\n2,1,1,0\n1,2,4,0\n3,3,9,0\n";
        assert!(matches!(
            SampledCurve::from_csv(csv.as_bytes(), "x"),
            Err(Error::InvalidArgument(_))
        ));
    }
}
