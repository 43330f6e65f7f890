use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Result};
use crate::quad::composite_gauss5;

use super::{ParamCurve, TailInfo, Vec3};

/// Straight line `t ↦ t·dir` with unit `dir`.
#[derive(Clone, Copy, Debug)]
pub struct Line {
    dir: Vec3,
    window: (f64, f64),
}

impl Line {
    pub fn new(dir: Vec3, window: (f64, f64)) -> Result<Self> {
        let n = dir.norm();
        if !(n > 0.0) {
            return Err(invalid("line direction must be nonzero"));
        }
        Ok(Line { dir: dir / n, window })
    }

    pub fn x_axis() -> Self {
        Line {
            dir: Vec3::x(),
            window: (-10.0, 10.0),
        }
    }
}

impl ParamCurve for Line {
    fn position(&self, t: f64) -> Vec3 {
        self.dir * t
    }
    fn d1(&self, _t: f64) -> Vec3 {
        self.dir
    }
    fn d2(&self, _t: f64) -> Vec3 {
        Vec3::zeros()
    }
    fn window(&self) -> (f64, f64) {
        self.window
    }
    fn name(&self) -> String {
        "line".into()
    }
    fn is_planar(&self) -> bool {
        self.dir.z == 0.0
    }
    fn straight_tails(&self) -> bool {
        true
    }
    fn tail(&self, _t0: f64, _t1: f64) -> Option<TailInfo> {
        Some(TailInfo::default())
    }
}

/// Planar parabola `t ↦ (t, a t², 0)`; curvature `2a/(1+4a²t²)^{3/2}`.
#[derive(Clone, Copy, Debug)]
pub struct Parabola {
    pub a: f64,
}

impl Parabola {
    pub fn new(a: f64) -> Self {
        Parabola { a }
    }
}

impl ParamCurve for Parabola {
    fn position(&self, t: f64) -> Vec3 {
        Vec3::new(t, self.a * t * t, 0.0)
    }
    fn d1(&self, t: f64) -> Vec3 {
        Vec3::new(1.0, 2.0 * self.a * t, 0.0)
    }
    fn d2(&self, _t: f64) -> Vec3 {
        Vec3::new(0.0, 2.0 * self.a, 0.0)
    }
    fn window(&self) -> (f64, f64) {
        (-10.0, 10.0)
    }
    fn name(&self) -> String {
        format!("parabola(a={})", self.a)
    }
    fn is_planar(&self) -> bool {
        true
    }
    fn straight_tails(&self) -> bool {
        true
    }
    fn tail(&self, t0: f64, t1: f64) -> Option<TailInfo> {
        let a = self.a.abs();
        let right_arc = FRAC_PI_2 - (2.0 * a * t1).atan();
        let left_arc = FRAC_PI_2 + (2.0 * a * t0).atan();
        let right_par = 1.0 - 2.0 * a * t1 / (1.0 + 4.0 * a * a * t1 * t1).sqrt();
        let left_par = 1.0 + 2.0 * a * t0 / (1.0 + 4.0 * a * a * t0 * t0).sqrt();
        let l1 = right_arc + left_arc;
        Some(TailInfo {
            l1_arclength: l1,
            l1_parameter: if a == 0.0 { 0.0 } else { right_par + left_par },
            signed_turning: self.a.signum() * l1,
        })
    }
}

/// Circular arc of radius `r`, parametrized by arclength, turning
/// counterclockwise through `angle`.
#[derive(Clone, Copy, Debug)]
pub struct CircleArc {
    r: f64,
    angle: f64,
}

impl CircleArc {
    pub fn new(r: f64, angle: f64) -> Result<Self> {
        if !(r > 0.0 && angle > 0.0) {
            return Err(invalid("circle radius and angle must be positive"));
        }
        Ok(CircleArc { r, angle })
    }
}

impl ParamCurve for CircleArc {
    fn position(&self, t: f64) -> Vec3 {
        let a = t / self.r;
        Vec3::new(self.r * a.cos(), self.r * a.sin(), 0.0)
    }
    fn d1(&self, t: f64) -> Vec3 {
        let a = t / self.r;
        Vec3::new(-a.sin(), a.cos(), 0.0)
    }
    fn d2(&self, t: f64) -> Vec3 {
        let a = t / self.r;
        Vec3::new(-a.cos(), -a.sin(), 0.0) / self.r
    }
    fn window(&self) -> (f64, f64) {
        (0.0, self.r * self.angle)
    }
    fn name(&self) -> String {
        format!("circle(r={}, angle={})", self.r, self.angle)
    }
    fn is_planar(&self) -> bool {
        true
    }
}

/// Circular helix `t ↦ (R cos t, R sin t, c t)`; curvature `R/(R²+c²)`.
#[derive(Clone, Copy, Debug)]
pub struct Helix {
    pub r: f64,
    pub c: f64,
}

impl Helix {
    pub fn new(r: f64, c: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(invalid("helix radius must be positive"));
        }
        Ok(Helix { r, c })
    }

    pub fn curvature(&self) -> f64 {
        self.r / (self.r * self.r + self.c * self.c)
    }

    pub fn torsion(&self) -> f64 {
        self.c / (self.r * self.r + self.c * self.c)
    }
}

impl ParamCurve for Helix {
    fn position(&self, t: f64) -> Vec3 {
        Vec3::new(self.r * t.cos(), self.r * t.sin(), self.c * t)
    }
    fn d1(&self, t: f64) -> Vec3 {
        Vec3::new(-self.r * t.sin(), self.r * t.cos(), self.c)
    }
    fn d2(&self, t: f64) -> Vec3 {
        Vec3::new(-self.r * t.cos(), -self.r * t.sin(), 0.0)
    }
    fn window(&self) -> (f64, f64) {
        (0.0, 4.0 * PI)
    }
    fn name(&self) -> String {
        format!("helix(r={}, c={})", self.r, self.c)
    }
}

/// Planar S-shaped bend parametrized by arclength with odd signed
/// curvature `k(s) = s·exp(−s²)`; tangent angle `(1 − exp(−s²))/2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SBend;

impl SBend {
    fn angle(s: f64) -> f64 {
        0.5 * (1.0 - (-s * s).exp())
    }

    pub fn curvature(s: f64) -> f64 {
        s * (-s * s).exp()
    }
}

impl ParamCurve for SBend {
    fn position(&self, t: f64) -> Vec3 {
        let panels = ((t.abs() * 16.0).ceil() as usize).max(1);
        let x = composite_gauss5(|s| Self::angle(s).cos(), 0.0, t, panels);
        let y = composite_gauss5(|s| Self::angle(s).sin(), 0.0, t, panels);
        Vec3::new(x, y, 0.0)
    }
    fn d1(&self, t: f64) -> Vec3 {
        let a = Self::angle(t);
        Vec3::new(a.cos(), a.sin(), 0.0)
    }
    fn d2(&self, t: f64) -> Vec3 {
        let a = Self::angle(t);
        Vec3::new(-a.sin(), a.cos(), 0.0) * Self::curvature(t)
    }
    fn window(&self) -> (f64, f64) {
        (-6.0, 6.0)
    }
    fn name(&self) -> String {
        "s-bend".into()
    }
    fn is_planar(&self) -> bool {
        true
    }
    fn straight_tails(&self) -> bool {
        true
    }
    fn tail(&self, t0: f64, t1: f64) -> Option<TailInfo> {
        let left = 0.5 * (-t0 * t0).exp();
        let right = 0.5 * (-t1 * t1).exp();
        let l_sign = if t0 <= 0.0 { 1.0 } else { -1.0 };
        Some(TailInfo {
            l1_arclength: left + right,
            l1_parameter: left + right,
            signed_turning: right - l_sign * left,
        })
    }
}

/// `γ_δ(t) = γ(δt)/δ`: curvature `δκ(δt)`, same total turning.
pub struct ScaledCurve<C> {
    inner: C,
    delta: f64,
}

impl<C: ParamCurve> ScaledCurve<C> {
    pub fn new(inner: C, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(invalid("delta must be positive"));
        }
        Ok(ScaledCurve { inner, delta })
    }
}

impl<C: ParamCurve> ParamCurve for ScaledCurve<C> {
    fn position(&self, t: f64) -> Vec3 {
        self.inner.position(self.delta * t) / self.delta
    }
    fn d1(&self, t: f64) -> Vec3 {
        self.inner.d1(self.delta * t)
    }
    fn d2(&self, t: f64) -> Vec3 {
        self.inner.d2(self.delta * t) * self.delta
    }
    fn window(&self) -> (f64, f64) {
        let (a, b) = self.inner.window();
        (a / self.delta, b / self.delta)
    }
    fn name(&self) -> String {
        format!("scaled({}, delta={})", self.inner.name(), self.delta)
    }
    fn is_planar(&self) -> bool {
        self.inner.is_planar()
    }
    fn straight_tails(&self) -> bool {
        self.inner.straight_tails()
    }
    fn tail(&self, t0: f64, t1: f64) -> Option<TailInfo> {
        self.inner.tail(self.delta * t0, self.delta * t1)
    }
}
