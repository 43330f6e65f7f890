use std::cell::Cell;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quad::{adaptive_gauss5, gauss5};

use super::{ParamCurve, TailInfo, Vec3, Window};

/// Equally spaced arclength nodes of a curve window.
///
/// Midpoint samples are kept alongside the nodes so that the frame
/// transport has the unit tangent at every Runge–Kutta stage.
#[derive(Clone, Debug)]
pub struct ArcSamples {
    pub n: usize,
    /// Arclength spacing between consecutive nodes.
    pub h: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub position: Vec<Vec3>,
    pub tangent: Vec<Vec3>,
    pub(crate) mid_tangent: Vec<Vec3>,
    pub tail: Option<TailInfo>,
    pub planar: bool,
}

impl ArcSamples {
    pub fn length(&self) -> f64 {
        self.s[self.n] - self.s[0]
    }
}

fn speed(curve: &dyn ParamCurve, t: f64) -> f64 {
    curve.d1(t).norm()
}

/// Parameter value at signed arclength `target` measured from `t = 0`.
fn param_at_arclength(curve: &dyn ParamCurve, target: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    let dir = target.signum();
    let goal = target.abs();
    let v0 = speed(curve, 0.0);
    if v0 < 1e-12 {
        return Err(Error::SingularParametrization { t: 0.0 });
    }
    let mut step = goal / (64.0 * v0);
    let mut t = 0.0;
    let mut acc = 0.0;
    for _ in 0..10_000 {
        let next = t + dir * step;
        let seg = dir * adaptive_gauss5(|u| speed(curve, u), t, next, 1e-14 * goal);
        if acc + seg >= goal {
            return invert_in_panel(curve, t, next, acc, goal, dir);
        }
        acc += seg;
        t = next;
        step *= 1.25;
    }
    Err(invalid(format!("arclength {target} is not reached by the curve")))
}

/// Solves `acc + |∫_a^x |γ′|| = goal` for `x` between `a` and `b`.
fn invert_in_panel(curve: &dyn ParamCurve, a: f64, b: f64, acc: f64, goal: f64, dir: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let tol = 1e-15 * goal.max(1.0);
    let f = |x: f64| acc + dir * adaptive_gauss5(|u| speed(curve, u), a, x, tol) - goal;
    let len = (b - a).abs();
    let mut x = a + (b - a) * 0.5;
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let v = speed(curve, x);
        let mut nx = x - dir * fx / v.max(1e-300);
        if !nx.is_finite() || (nx - lo) * (nx - hi) > 0.0 {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() <= 1e-15 * (len + x.abs()) {
            return Ok(nx);
        }
        x = nx;
    }
    Ok(x)
}

/// Resamples `curve` on `n + 1` equally spaced arclength nodes of `window`.
///
/// Cumulative arclength comes from five-point Gauss quadrature of `|γ′|` on
/// `4n` parameter panels; nodes are placed by bracketed Newton inversion.
pub fn arclength_resample(curve: &dyn ParamCurve, window: Window, n: usize) -> Result<ArcSamples> {
    if n < 16 {
        return Err(invalid(format!("N must be at least 16, got {n}")));
    }
    let (t0, t1) = match window {
        Window::Parameter { t0, t1 } => (t0, t1),
        Window::Arclength { s0, s1 } => {
            if !(s0 < s1) {
                return Err(invalid("arclength window must satisfy s0 < s1"));
            }
            (param_at_arclength(curve, s0)?, param_at_arclength(curve, s1)?)
        }
    };
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(invalid("parameter window must satisfy t0 < t1"));
    }
    let panels = 4 * n;
    let dt = (t1 - t0) / panels as f64;
    let knots: Vec<f64> = (0..=panels)
        .map(|k| if k == panels { t1 } else { t0 + dt * k as f64 })
        .collect();
    let seg: Vec<(f64, f64)> = knots
        .par_windows(2)
        .map(|w| {
            let low = Cell::new(f64::NAN);
            let v = gauss5(
                |u| {
                    let sp = speed(curve, u);
                    if sp < 1e-12 {
                        low.set(u);
                    }
                    sp
                },
                w[0],
                w[1],
            );
            (v, low.get())
        })
        .collect();
    if let Some(&(_, t)) = seg.iter().find(|p| !p.1.is_nan()) {
        return Err(Error::SingularParametrization { t });
    }
    let mut cum = Vec::with_capacity(panels + 1);
    cum.push(0.0);
    for (v, _) in &seg {
        cum.push(cum[cum.len() - 1] + v);
    }
    let length = cum[panels];
    let fine = 2 * n;
    let hh = length / fine as f64;
    let ts: Vec<f64> = (0..=fine)
        .into_par_iter()
        .map(|j| {
            if j == 0 {
                return Ok(t0);
            }
            if j == fine {
                return Ok(t1);
            }
            let target = hh * j as f64;
            let k = cum.partition_point(|&c| c <= target).clamp(1, panels) - 1;
            invert_in_panel(curve, knots[k], knots[k + 1], cum[k], target, 1.0)
        })
        .collect::<Result<_>>()?;
    let s_base = match window {
        Window::Arclength { s0, .. } => s0,
        Window::Parameter { .. } => 0.0,
    };
    let mut s = Vec::with_capacity(n + 1);
    let mut t = Vec::with_capacity(n + 1);
    let mut position = Vec::with_capacity(n + 1);
    let mut tangent = Vec::with_capacity(n + 1);
    let mut mid_tangent = Vec::with_capacity(n);
    for (j, &tj) in ts.iter().enumerate() {
        let d = curve.d1(tj);
        let tan = d / d.norm();
        if j % 2 == 0 {
            s.push(s_base + hh * j as f64);
            t.push(tj);
            position.push(curve.position(tj));
            tangent.push(tan);
        } else {
            mid_tangent.push(tan);
        }
    }
    Ok(ArcSamples {
        n,
        h: 2.0 * hh,
        s,
        t,
        position,
        tangent,
        mid_tangent,
        tail: curve.tail(t0, t1),
        planar: curve.is_planar(),
    })
}

/// Choice of the transverse frame `(e₂, e₃)` at the first node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialFrame {
    /// `e₃ = (0,0,1)` for planar curves, otherwise the coordinate axis least
    /// aligned with the tangent, made orthogonal to it.
    Default,
    /// The default frame rotated by an angle in the transverse plane.
    Rotated(f64),
    Explicit {
        e2: Vec3,
        e3: Vec3,
    },
}

impl InitialFrame {
    fn resolve(&self, tan: Vec3, planar: bool) -> Result<(Vec3, Vec3)> {
        let default = || {
            if planar {
                let e3 = Vec3::z();
                (e3.cross(&tan), e3)
            } else {
                let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
                let a = axes
                    .iter()
                    .min_by(|p, q| p.dot(&tan).abs().total_cmp(&q.dot(&tan).abs()))
                    .copied()
                    .unwrap_or(Vec3::z());
                let e2 = (a - tan * a.dot(&tan)).normalize();
                (e2, tan.cross(&e2))
            }
        };
        match *self {
            InitialFrame::Default => Ok(default()),
            InitialFrame::Rotated(phi) => {
                let (e2, e3) = default();
                let (sn, cs) = phi.sin_cos();
                Ok((e2 * cs + e3 * sn, e3 * cs - e2 * sn))
            }
            InitialFrame::Explicit { e2, e3 } => {
                let tol = 1e-10;
                let ok = (e2.norm() - 1.0).abs() <= tol
                    && (e3.norm() - 1.0).abs() <= tol
                    && e2.dot(&tan).abs() <= tol
                    && e3.dot(&tan).abs() <= tol
                    && e2.dot(&e3).abs() <= tol
                    && (tan.cross(&e2).dot(&e3) - 1.0).abs() <= tol;
                if !ok {
                    return Err(invalid(
                        "initial frame must be orthonormal and positively oriented with the tangent",
                    ));
                }
                Ok((e2, e3))
            }
        }
    }
}

/// Curve sampled on a uniform arclength grid with its relatively adapted
/// parallel frame and curvatures.
#[derive(Clone, Debug)]
pub struct FramedCurve {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub h: f64,
    pub position: Vec<Vec3>,
    pub e1: Vec<Vec3>,
    pub e2: Vec<Vec3>,
    pub e3: Vec<Vec3>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tail: Option<TailInfo>,
    /// Components of the planar left normal on `(e₂, e₃)`, constant along
    /// a planar curve; used to project the signed tail turning onto Y.
    pub tail_projection: Option<[f64; 2]>,
}

impl FramedCurve {
    /// `max_s ‖GᵀG − I‖∞` for the frame matrix `G = (e₁ e₂ e₃)`.
    pub fn max_orthonormality_defect(&self) -> f64 {
        (0..self.s.len())
            .map(|i| {
                let g = [self.e1[i], self.e2[i], self.e3[i]];
                let mut d: f64 = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        let target = if a == b { 1.0 } else { 0.0 };
                        d = d.max((g[a].dot(&g[b]) - target).abs());
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    /// `max_s |det(e₁, e₂, e₃) − 1|`.
    pub fn max_orientation_defect(&self) -> f64 {
        (0..self.s.len())
            .map(|i| (self.e1[i].cross(&self.e2[i]).dot(&self.e3[i]) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Fourth-order derivative of the unit tangent on the interleaved grid,
/// with the tangential part removed.
fn tangent_derivative(fine: &[Vec3], hh: f64) -> Vec<Vec3> {
    let m = fine.len() - 1;
    let c = 1.0 / (12.0 * hh);
    (0..=m)
        .map(|i| {
            let f = |k: usize| fine[k];
            let d = if i == 0 {
                (f(0) * -25.0 + f(1) * 48.0 - f(2) * 36.0 + f(3) * 16.0 - f(4) * 3.0) * c
            } else if i == 1 {
                (f(0) * -3.0 - f(1) * 10.0 + f(2) * 18.0 - f(3) * 6.0 + f(4)) * c
            } else if i == m {
                (f(m) * 25.0 - f(m - 1) * 48.0 + f(m - 2) * 36.0 - f(m - 3) * 16.0 + f(m - 4) * 3.0) * c
            } else if i == m - 1 {
                (f(m) * 3.0 + f(m - 1) * 10.0 - f(m - 2) * 18.0 + f(m - 3) * 6.0 - f(m - 4)) * c
            } else {
                (f(i - 2) - f(i - 1) * 8.0 + f(i + 1) * 8.0 - f(i + 2)) * c
            };
            d - fine[i] * fine[i].dot(&d)
        })
        .collect()
}

/// Transports `(e₂, e₃)` by `e′ = −(e·T′)T` with classical Runge–Kutta and
/// per-step Gram–Schmidt against `T`.
pub fn rapf(samples: &ArcSamples, initial: InitialFrame) -> Result<FramedCurve> {
    let n = samples.n;
    let h = samples.h;
    let mut fine = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        fine.push(samples.tangent[j]);
        fine.push(samples.mid_tangent[j]);
    }
    fine.push(samples.tangent[n]);
    let dt = tangent_derivative(&fine, 0.5 * h);
    let rhs = |k: usize, e: Vec3| -> Vec3 { fine[k] * -e.dot(&dt[k]) };

    let (mut e2, e30) = initial.resolve(fine[0], samples.planar)?;
    let mut e2s = Vec::with_capacity(n + 1);
    let mut e3s = Vec::with_capacity(n + 1);
    e2s.push(e2);
    e3s.push(e30);
    for j in 0..n {
        let (a, m, b) = (2 * j, 2 * j + 1, 2 * j + 2);
        let k1 = rhs(a, e2);
        let k2 = rhs(m, e2 + k1 * (0.5 * h));
        let k3 = rhs(m, e2 + k2 * (0.5 * h));
        let k4 = rhs(b, e2 + k3 * h);
        let next = e2 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let tan = fine[b];
        let drift = next.dot(&tan).abs().max((next.norm() - 1.0).abs());
        if !(drift <= 1e-8) {
            return Err(Error::StepSize(format!(
                "frame drift {drift:.3e} at s = {:.6} exceeds 1e-8; increase N",
                samples.s[j + 1]
            )));
        }
        e2 = (next - tan * next.dot(&tan)).normalize();
        e2s.push(e2);
        e3s.push(tan.cross(&e2));
    }

    let mut k1 = Vec::with_capacity(n + 1);
    let mut k2 = Vec::with_capacity(n + 1);
    let mut kappa = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let d = dt[2 * j];
        k1.push(d.dot(&e2s[j]));
        k2.push(d.dot(&e3s[j]));
        kappa.push(d.norm());
    }
    let tail_projection = match (samples.planar, samples.tail) {
        (true, Some(_)) => {
            let nl = Vec3::z().cross(&fine[0]);
            Some([nl.dot(&e2s[0]), nl.dot(&e3s[0])])
        }
        _ => None,
    };
    Ok(FramedCurve {
        s: samples.s.clone(),
        t: samples.t.clone(),
        h,
        position: samples.position.clone(),
        e1: samples.tangent.clone(),
        e2: e2s,
        e3: e3s,
        k1,
        k2,
        kappa,
        tail: samples.tail,
        tail_projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{curvature_norms, planar_signed_curvature, yvector, CircleArc, Helix, Line, Parabola, SBend};
    use std::f64::consts::PI;

    #[test]
    fn line_grid_matches_parameter() {
        let l = Line::x_axis();
        let a = arclength_resample(&l, Window::Parameter { t0: -3.0, t1: 5.0 }, 64).unwrap();
        for (s, t) in a.s.iter().zip(&a.t) {
            assert!((s - (t + 3.0)).abs() < 1e-12);
        }
        let fc = rapf(&a, InitialFrame::Default).unwrap();
        assert!(fc.k1.iter().chain(&fc.k2).all(|k| k.abs() <= 1e-12));
        assert!(fc.e2.iter().all(|e| (e - fc.e2[0]).norm() < 1e-15));
    }

    #[test]
    fn quarter_circle_length() {
        let c = CircleArc::new(3.0, PI / 2.0).unwrap();
        let a = arclength_resample(&c, Window::Parameter { t0: 0.0, t1: 1.5 * PI }, 32).unwrap();
        assert!((a.length() - 1.5 * PI).abs() < 1e-10);
    }

    #[test]
    fn parabola_arclength_matches_simpson() {
        #[allow(clippy::too_many_arguments)]
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (l, r) = (0.5 * (a + m), 0.5 * (m + b));
            let (fl, fr) = (f(l), f(r));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, fl, fm, tol / 2.0, depth - 1) + simpson(f, m, b, fm, fr, fb, tol / 2.0, depth - 1)
        }
        let f = |t: f64| (1.0 + 4.0 * t * t).sqrt();
        let oracle = simpson(&f, -10.0, 10.0, f(-10.0), f(0.0), f(10.0), 1e-12, 50);
        let a = arclength_resample(&Parabola::new(1.0), Window::Parameter { t0: -10.0, t1: 10.0 }, 256).unwrap();
        assert!((a.length() - oracle).abs() < 1e-8, "{} vs {oracle}", a.length());
    }

    #[test]
    fn planar_parabola_frame() {
        let p = Parabola::new(1.0);
        let a = arclength_resample(&p, Window::Arclength { s0: -50.0, s1: 50.0 }, 20_000).unwrap();
        let fc = rapf(&a, InitialFrame::Default).unwrap();
        assert!(fc.k2.iter().all(|k| k.abs() <= 1e-10));
        assert!(fc.e3.iter().all(|e| (e - Vec3::z()).norm() <= 1e-12));
        assert!(fc.max_orthonormality_defect() <= 1e-10);
        assert!(fc.max_orientation_defect() <= 1e-10);
        for i in (0..fc.s.len()).step_by(97) {
            let k = planar_signed_curvature(&p, fc.t[i]).unwrap();
            assert!((fc.k1[i] - k).abs() <= 1e-6, "{i}: {} vs {k}", fc.k1[i]);
        }
        let norms = curvature_norms(&fc);
        assert!((norms.sup - 2.0).abs() <= 1e-6, "{}", norms.sup);
        assert!((norms.l1 - PI).abs() <= 1e-4, "{}", norms.l1);
        let y = yvector(&fc);
        assert!((y[0] - PI).abs() <= 1e-4 && y[1].abs() <= 1e-4, "{y:?}");
    }

    #[test]
    fn helix_constant_curvature() {
        let hx = Helix::new(1.5, 0.5).unwrap();
        let a = arclength_resample(&hx, Window::Parameter { t0: 0.0, t1: 4.0 * PI }, 4000).unwrap();
        let fc = rapf(&a, InitialFrame::Default).unwrap();
        for (k1, (k2, kap)) in fc.k1.iter().zip(fc.k2.iter().zip(&fc.kappa)) {
            assert!((kap - hx.curvature()).abs() <= 1e-6);
            assert!(((k1 * k1 + k2 * k2).sqrt() - kap).abs() <= 1e-8 * kap);
        }
        assert!(fc.max_orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn rotated_initial_frame_rotates_curvatures() {
        let hx = Helix::new(1.0, 0.7).unwrap();
        let a = arclength_resample(&hx, Window::Parameter { t0: 0.0, t1: 6.0 }, 2000).unwrap();
        let f0 = rapf(&a, InitialFrame::Default).unwrap();
        let again = rapf(&a, InitialFrame::Default).unwrap();
        assert!(f0.e2.iter().zip(&again.e2).all(|(p, q)| (p - q).norm() <= 1e-10));
        let phi = 0.8;
        let f1 = rapf(&a, InitialFrame::Rotated(phi)).unwrap();
        for i in 0..f0.s.len() {
            let a0 = f0.k2[i].atan2(f0.k1[i]);
            let a1 = f1.k2[i].atan2(f1.k1[i]);
            let d = (a0 - a1 - phi).rem_euclid(2.0 * PI);
            assert!(d.min(2.0 * PI - d) <= 1e-8, "{i}: {d}");
        }
    }

    #[test]
    fn sbend_y_vanishes() {
        let a = arclength_resample(&SBend, Window::Parameter { t0: -6.0, t1: 6.0 }, 4000).unwrap();
        let fc = rapf(&a, InitialFrame::Default).unwrap();
        let y = yvector(&fc);
        assert!(y[0].abs() <= 1e-8 && y[1].abs() <= 1e-8, "{y:?}");
        for i in (0..fc.s.len()).step_by(41) {
            assert!((fc.kappa[i] - SBend::curvature(fc.t[i]).abs()).abs() <= 1e-6);
        }
    }

    #[test]
    fn rejects_bad_explicit_frame() {
        let a = arclength_resample(&Line::x_axis(), Window::Parameter { t0: 0.0, t1: 1.0 }, 16).unwrap();
        let bad = InitialFrame::Explicit {
            e2: Vec3::y(),
            e3: -Vec3::z(),
        };
        assert!(rapf(&a, bad).is_err());
        let good = InitialFrame::Explicit {
            e2: Vec3::y(),
            e3: Vec3::z(),
        };
        assert!(rapf(&a, good).is_ok());
    }

    #[test]
    fn small_n_rejected() {
        assert!(arclength_resample(&Line::x_axis(), Window::Parameter { t0: 0.0, t1: 1.0 }, 15).is_err());
    }
}
