//! Base curves of the waveguide: parametrizations, arclength resampling,
//! relatively adapted parallel frames and curvature functionals.

mod builtin;
mod frame;
mod spline;

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use builtin::{CircleArc, Helix, Line, Parabola, SBend, ScaledCurve};
pub use frame::{arclength_resample, rapf, ArcSamples, FramedCurve, InitialFrame};
pub use spline::SampledCurve;

pub type Vec3 = Vector3<f64>;

/// Closed-form contribution of the parts of the curve outside a window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailInfo {
    /// ∫ κ ds over the discarded arclength.
    pub l1_arclength: f64,
    /// ∫ κ dt over the discarded parameter range.
    pub l1_parameter: f64,
    /// ∫ k ds over the discarded arclength (signed planar curvature).
    pub signed_turning: f64,
}

/// A regular curve `γ: [t0, t1] → R³` with two derivatives.
pub trait ParamCurve: Send + Sync {
    fn position(&self, t: f64) -> Vec3;
    fn d1(&self, t: f64) -> Vec3;
    fn d2(&self, t: f64) -> Vec3;
    /// Natural parameter window.
    fn window(&self) -> (f64, f64);
    fn name(&self) -> String;
    /// True when the curve lies in the plane z = 0.
    fn is_planar(&self) -> bool {
        false
    }
    /// Whether the curve becomes asymptotically straight outside its window.
    fn straight_tails(&self) -> bool {
        false
    }
    /// Analytic tail outside the parameter window `[t0, t1]`, if known.
    fn tail(&self, _t0: f64, _t1: f64) -> Option<TailInfo> {
        None
    }
}

impl<C: ParamCurve + ?Sized> ParamCurve for Box<C> {
    fn position(&self, t: f64) -> Vec3 {
        (**self).position(t)
    }
    fn d1(&self, t: f64) -> Vec3 {
        (**self).d1(t)
    }
    fn d2(&self, t: f64) -> Vec3 {
        (**self).d2(t)
    }
    fn window(&self) -> (f64, f64) {
        (**self).window()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn is_planar(&self) -> bool {
        (**self).is_planar()
    }
    fn straight_tails(&self) -> bool {
        (**self).straight_tails()
    }
    fn tail(&self, t0: f64, t1: f64) -> Option<TailInfo> {
        (**self).tail(t0, t1)
    }
}

/// Window of integration along the curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Window {
    /// Parameter interval `[t0, t1]`.
    Parameter { t0: f64, t1: f64 },
    /// Signed arclength interval measured from the point `t = 0`.
    Arclength { s0: f64, s1: f64 },
}

/// `(x′y″ − y′x″)/(x′² + y′²)^{3/2}` for the projection onto the xy-plane.
pub fn planar_signed_curvature(curve: &dyn ParamCurve, t: f64) -> Result<f64> {
    let d1 = curve.d1(t);
    let d2 = curve.d2(t);
    let sp = d1.x * d1.x + d1.y * d1.y;
    if sp.sqrt() < 1e-12 {
        return Err(Error::SingularParametrization { t });
    }
    Ok((d1.x * d2.y - d1.y * d2.x) / sp.powf(1.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureNorms {
    pub sup: f64,
    /// Arclength L¹ norm including the tail term.
    pub l1: f64,
    pub l1_window: f64,
    pub tail: f64,
    /// False when no analytic tail was available and 0 was used.
    pub tail_supplied: bool,
}

pub fn curvature_norms(fc: &FramedCurve) -> CurvatureNorms {
    let sup = fc.kappa.iter().copied().fold(0.0, f64::max);
    let l1_window = trapezoid(&fc.kappa, fc.h);
    let (tail, supplied) = match fc.tail {
        Some(t) => (t.l1_arclength, true),
        None => (0.0, false),
    };
    CurvatureNorms {
        sup,
        l1: l1_window + tail,
        l1_window,
        tail,
        tail_supplied: supplied,
    }
}

pub(crate) fn trapezoid(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

/// `Y = (∫k₁, ∫k₂)` over the window, plus the planar tail when known.
pub fn yvector(fc: &FramedCurve) -> [f64; 2] {
    let w = yvector_window(fc);
    let t = yvector_tail(fc);
    [w[0] + t[0], w[1] + t[1]]
}

pub fn yvector_window(fc: &FramedCurve) -> [f64; 2] {
    [trapezoid(&fc.k1, fc.h), trapezoid(&fc.k2, fc.h)]
}

/// Tail of Y for planar curves, projected on the frame at the window ends.
pub fn yvector_tail(fc: &FramedCurve) -> [f64; 2] {
    match (fc.tail, fc.tail_projection) {
        (Some(t), Some(p)) => [p[0] * t.signed_turning, p[1] * t.signed_turning],
        _ => [0.0, 0.0],
    }
}

/// Counterclockwise rotation of `y` by `theta`.
pub fn yvector_theta(y: [f64; 2], theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * y[0] - s * y[1], s * y[0] + c * y[1]]
}

/// Angle in `[0, 2π)` rotating `y` onto the direction of `x`.
pub fn theta_star(x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let nx = x[0].hypot(x[1]);
    let ny = y[0].hypot(y[1]);
    if !(nx > 0.0) {
        return Err(Error::UndefinedAngle("X is zero".into()));
    }
    if !(ny > 0.0) {
        return Err(Error::UndefinedAngle("Y is zero".into()));
    }
    let th = (x[1].atan2(x[0]) - y[1].atan2(y[0])).rem_euclid(2.0 * PI);
    Ok(if th >= 2.0 * PI { 0.0 } else { th })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub ok: bool,
    pub det_lo: f64,
    pub det_hi: f64,
}

pub fn admissibility(b: f64, kappa_sup: f64) -> Admissibility {
    let p = b * kappa_sup;
    Admissibility {
        ok: p < 1.0,
        det_lo: 1.0 - p,
        det_hi: 1.0 + p,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledNorms {
    pub delta: f64,
    pub kappa_sup: f64,
    pub kappa_l1: f64,
    pub y: [f64; 2],
}

/// Functionals of `γ_δ(s) = γ(δs)/δ`: `κ_δ(s) = δκ(δs)`.
pub fn scale_family(kappa_sup: f64, kappa_l1: f64, y: [f64; 2], delta: f64) -> Result<ScaledNorms> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(ScaledNorms {
        delta,
        kappa_sup: delta * kappa_sup,
        kappa_l1,
        y,
    })
}

/// Windowed summary of a framed curve, the input of the condition checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub curve: String,
    pub window: Window,
    pub s_range: [f64; 2],
    pub n: usize,
    pub planar: bool,
    pub kappa_sup: f64,
    pub kappa_l1: f64,
    pub kappa_l1_window: f64,
    pub kappa_l1_tail: f64,
    pub tail_supplied: bool,
    /// ∫ κ dt in the curve's own parameter, when it differs from arclength.
    pub kappa_l1_parameter: Option<f64>,
    pub y: [f64; 2],
    pub y_window: [f64; 2],
    pub y_tail: [f64; 2],
    pub max_orthonormality_defect: f64,
    pub warnings: Vec<String>,
}

/// ∫ |k(t)| dt over the parameter window by composite Gauss quadrature,
/// plus the analytic tail when available.
pub fn parameter_l1(curve: &dyn ParamCurve, t0: f64, t1: f64, panels: usize) -> Result<(f64, Option<f64>)> {
    let err = std::cell::Cell::new(None);
    let v = crate::quad::composite_gauss5(
        |t| {
            let d1 = curve.d1(t);
            let d2 = curve.d2(t);
            let sp = d1.norm();
            if sp < 1e-12 {
                err.set(Some(t));
                return 0.0;
            }
            d1.cross(&d2).norm() / (sp * sp * sp)
        },
        t0,
        t1,
        panels,
    );
    if let Some(t) = err.get() {
        return Err(Error::SingularParametrization { t });
    }
    Ok((v, curve.tail(t0, t1).map(|t| t.l1_parameter)))
}

pub fn summarize(curve: &dyn ParamCurve, fc: &FramedCurve, window: Window) -> Result<CurveSummary> {
    let norms = curvature_norms(fc);
    let y = yvector(fc);
    let mut warnings = Vec::new();
    if !norms.tail_supplied {
        warnings.push("no analytic tail bound available; tail contribution taken as 0".to_string());
    }
    let (t0, t1) = (fc.t[0], fc.t[fc.t.len() - 1]);
    let param = {
        let panels = (4 * fc.s.len()).max(64);
        let (w, tail) = parameter_l1(curve, t0, t1, panels)?;
        Some(w + tail.unwrap_or(0.0))
    };
    Ok(CurveSummary {
        curve: curve.name(),
        window,
        s_range: [fc.s[0], fc.s[fc.s.len() - 1]],
        n: fc.s.len() - 1,
        planar: curve.is_planar(),
        kappa_sup: norms.sup,
        kappa_l1: norms.l1,
        kappa_l1_window: norms.l1_window,
        kappa_l1_tail: norms.tail,
        tail_supplied: norms.tail_supplied,
        kappa_l1_parameter: param,
        y,
        y_window: yvector_window(fc),
        y_tail: yvector_tail(fc),
        max_orthonormality_defect: fc.max_orthonormality_defect(),
        warnings,
    })
}

/// Writes `s,k1,k2,kappa` rows with 17 significant digits.
pub fn write_frame_csv<W: std::io::Write>(fc: &FramedCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "k1", "k2", "kappa"])?;
    for i in 0..fc.s.len() {
        w.write_record([
            format!("{:.16e}", fc.s[i]),
            format!("{:.16e}", fc.k1[i]),
            format!("{:.16e}", fc.k2[i]),
            format!("{:.16e}", fc.kappa[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_signed_curvature() {
        let p = Parabola::new(1.0);
        assert!((planar_signed_curvature(&p, 0.0).unwrap() - 2.0).abs() < 1e-15);
        let k1 = planar_signed_curvature(&p, 1.0).unwrap();
        assert!((k1 - 2.0 / 5f64.powf(1.5)).abs() < 1e-15);
        assert!((k1 - 0.17889).abs() < 1e-5);
    }

    #[test]
    fn circle_signed_curvature() {
        let c = CircleArc::new(2.5, PI).unwrap();
        for i in 0..10 {
            let t = i as f64 * 0.3;
            assert!((planar_signed_curvature(&c, t).unwrap() - 0.4).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_star_examples() {
        assert!((theta_star([1.0, 1.0], [PI, 0.0]).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(theta_star([1.0, 0.0], [1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            theta_star([0.0, 0.0], [1.0, 0.0]),
            Err(Error::UndefinedAngle(_))
        ));
    }

    #[test]
    fn rotation() {
        let r = yvector_theta([PI, 0.0], PI / 2.0);
        assert!(r[0].abs() < 1e-15 && (r[1] - PI).abs() < 1e-15);
    }

    #[test]
    fn admissibility_examples() {
        let a = admissibility(1.0, 0.04);
        assert!(a.ok);
        assert!((a.det_lo - 0.96).abs() < 1e-15 && (a.det_hi - 1.04).abs() < 1e-15);
        assert!(!admissibility(1.0, 2.0).ok);
        let z = admissibility(0.0, 5.0);
        assert!(z.ok && z.det_lo == 1.0 && z.det_hi == 1.0);
    }

    #[test]
    fn scaling() {
        let s = scale_family(2.0, PI, [PI, 0.0], 0.5).unwrap();
        assert_eq!(s.kappa_sup, 1.0);
        assert_eq!(s.kappa_l1, PI);
        assert_eq!(s.y, [PI, 0.0]);
        let id = scale_family(2.0, PI, [PI, 0.0], 1.0).unwrap();
        assert_eq!(id.kappa_sup, 2.0);
        assert!(scale_family(2.0, PI, [PI, 0.0], 0.0).is_err());
    }

    #[test]
    fn scaled_pipeline_matches_analytic_scaling() {
        let base = Parabola::new(1.0);
        let w = Window::Arclength { s0: -50.0, s1: 50.0 };
        let fc = rapf(&arclength_resample(&base, w, 20_000).unwrap(), InitialFrame::Default).unwrap();
        let n0 = curvature_norms(&fc);
        let y0 = yvector(&fc);
        let pred = scale_family(n0.sup, n0.l1, y0, 0.5).unwrap();
        let scaled = ScaledCurve::new(Parabola::new(1.0), 0.5).unwrap();
        let w = Window::Arclength { s0: -100.0, s1: 100.0 };
        let fs = rapf(&arclength_resample(&scaled, w, 40_000).unwrap(), InitialFrame::Default).unwrap();
        let ns = curvature_norms(&fs);
        let ys = yvector(&fs);
        assert!((ns.sup - pred.kappa_sup).abs() <= 1e-6);
        assert!((ns.l1 - pred.kappa_l1).abs() <= 1e-6);
        assert!((ys[0] - pred.y[0]).abs() <= 1e-6 && (ys[1] - pred.y[1]).abs() <= 1e-6);
        assert!((pred.kappa_sup - 1.0).abs() <= 1e-6 && (pred.kappa_l1 - PI).abs() <= 1e-4);
    }

    #[test]
    fn parabola_summary_reports_both_norms() {
        let p = Parabola::new(1.0);
        let w = Window::Parameter { t0: -10.0, t1: 10.0 };
        let fc = rapf(&arclength_resample(&p, w, 40_000).unwrap(), InitialFrame::Default).unwrap();
        let sm = summarize(&p, &fc, w).unwrap();
        assert!((sm.kappa_l1 - PI).abs() <= 1e-4, "{}", sm.kappa_l1);
        assert!((sm.kappa_l1_parameter.unwrap() - 2.0).abs() <= 1e-8);
        assert!(sm.tail_supplied && sm.warnings.is_empty());
        let mut buf = Vec::new();
        write_frame_csv(&fc, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,k1,k2,kappa\n"));
        assert_eq!(text.lines().count(), fc.s.len() + 1);
    }

    #[test]
    fn helix_has_no_tail() {
        let h = Helix::new(1.0, 1.0).unwrap();
        let w = Window::Parameter { t0: 0.0, t1: 2.0 * PI };
        let fc = rapf(&arclength_resample(&h, w, 256).unwrap(), InitialFrame::Default).unwrap();
        let sm = summarize(&h, &fc, w).unwrap();
        assert!(!sm.tail_supplied && !sm.warnings.is_empty());
        assert_eq!(sm.y_tail, [0.0, 0.0]);
    }
}
