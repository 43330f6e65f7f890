//! Spectral predictions for a bent, twisted waveguide: the gap edge, the
//! trapped-mode inequality, the curvature threshold δ⋆, the bound on ‖S‖
//! with the localization interval, the trial-energy bound and the
//! rectangular-waveguide classification.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{theta_star, yvector_theta};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub eps0: f64,
    pub mu0: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Medium { eps0: 1.0, mu0: 1.0 }
    }
}

impl Medium {
    pub fn new(eps0: f64, mu0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && mu0 > 0.0 && eps0.is_finite() && mu0.is_finite()) {
            return Err(invalid("eps0 and mu0 must be positive and finite"));
        }
        Ok(Medium { eps0, mu0 })
    }

    /// Speed of light `(ε₀μ₀)^{-1/2}`.
    pub fn c(&self) -> f64 {
        1.0 / (self.eps0 * self.mu0).sqrt()
    }
}

/// Which form of the trapped-mode threshold to use.
///
/// `Theorem` is `2λ₂ b²κ∞ κ₁/(1 − bκ∞)`; `Proposition` divides it by ε₀.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdForm {
    #[default]
    Theorem,
    Proposition,
}

impl ThresholdForm {
    fn scale(&self, medium: &Medium) -> f64 {
        match self {
            ThresholdForm::Theorem => 1.0,
            ThresholdForm::Proposition => 1.0 / medium.eps0,
        }
    }
}

fn check_admissible(b: f64, kappa_sup: f64) -> Result<f64> {
    if !(b >= 0.0 && kappa_sup >= 0.0) {
        return Err(invalid("b and kappa_sup must be nonnegative"));
    }
    let p = b * kappa_sup;
    if !(p < 1.0) {
        return Err(Error::InadmissibleGeometry(p));
    }
    Ok(p)
}

/// Gap edge `a₀ = √λ₂ · c`.
pub fn gap_a0(lambda2: f64, medium: &Medium) -> Result<f64> {
    if !(lambda2 > 0.0) {
        return Err(invalid("lambda2 must be positive"));
    }
    Ok(lambda2.sqrt() * medium.c())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrappedCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `lhs == rhs` exactly; reported but not counted as holding.
    pub boundary_case: bool,
}

pub fn trapped_condition(
    x: [f64; 2],
    ytheta: [f64; 2],
    lambda2: f64,
    b: f64,
    kappa_sup: f64,
    kappa_l1: f64,
) -> Result<TrappedCondition> {
    trapped_condition_with(
        x,
        ytheta,
        lambda2,
        b,
        kappa_sup,
        kappa_l1,
        ThresholdForm::Theorem,
        &Medium::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn trapped_condition_with(
    x: [f64; 2],
    ytheta: [f64; 2],
    lambda2: f64,
    b: f64,
    kappa_sup: f64,
    kappa_l1: f64,
    form: ThresholdForm,
    medium: &Medium,
) -> Result<TrappedCondition> {
    let p = check_admissible(b, kappa_sup)?;
    let lhs = x[0] * ytheta[0] + x[1] * ytheta[1];
    let rhs = form.scale(medium) * 2.0 * lambda2 * b * b * kappa_sup * kappa_l1 / (1.0 - p);
    Ok(TrappedCondition {
        lhs,
        rhs,
        holds: lhs > rhs,
        boundary_case: lhs == rhs,
    })
}

/// `min(|X||Y| / ((|X||Y| + 2bκ₁λ₂) bκ∞), 1)`.
pub fn delta_star(x: [f64; 2], y: [f64; 2], lambda2: f64, b: f64, kappa_sup: f64, kappa_l1: f64) -> Result<f64> {
    delta_star_with(
        x,
        y,
        lambda2,
        b,
        kappa_sup,
        kappa_l1,
        ThresholdForm::Theorem,
        &Medium::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn delta_star_with(
    x: [f64; 2],
    y: [f64; 2],
    lambda2: f64,
    b: f64,
    kappa_sup: f64,
    kappa_l1: f64,
    form: ThresholdForm,
    medium: &Medium,
) -> Result<f64> {
    if !(b >= 0.0 && kappa_sup >= 0.0 && kappa_l1 >= 0.0 && lambda2 > 0.0) {
        return Err(invalid(
            "b, kappa_sup, kappa_l1 must be nonnegative and lambda2 positive",
        ));
    }
    let xy = x[0].hypot(x[1]) * y[0].hypot(y[1]);
    let lam = form.scale(medium) * lambda2;
    let d = xy / ((xy + 2.0 * b * kappa_l1 * lam) * b * kappa_sup);
    Ok(if d.is_nan() { 1.0 } else { d.min(1.0) })
}

/// `max(|x|, (x² + |x|(2 − x)) / (2(1 − x)))`.
pub fn no_twist_majorant(x: f64) -> f64 {
    x.abs().max((x * x + x.abs() * (2.0 - x)) / (2.0 * (1.0 - x)))
}

/// Eigenvalues of the metric perturbation `M` with `u = k^θ·y` and
/// `v = |β − θ′||y|`.
pub fn m_eigenvalues(u: f64, v: f64) -> [f64; 3] {
    let a = u * u + v * v;
    let bb = (2.0 - u) * (2.0 - u) + v * v;
    let r = (a * bb).sqrt();
    let d = 2.0 * (1.0 - u);
    [u, -(a + r) / d, -(a - r) / d]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SBound {
    /// The reported bound on ‖S‖.
    pub bound: f64,
    /// Supremum over the sampling grid only.
    pub grid_sup: f64,
    /// Closed-form majorant at the interval ends (no-twist branch).
    pub endpoint_value: Option<f64>,
    pub twist: bool,
    pub grid: usize,
}

fn linspace(a: f64, b: f64, n: usize) -> impl Fn(usize) -> f64 {
    move |i| {
        if i + 1 == n {
            b
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    }
}

/// Upper bound for ‖S‖ by the supremum of the spectral norm of `M`.
pub fn s_norm_bound(b: f64, kappa_sup: f64, twist_dev_sup: f64, grid: usize) -> Result<SBound> {
    let p = check_admissible(b, kappa_sup)?;
    if grid < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    if !(twist_dev_sup >= 0.0) {
        return Err(invalid("twist deviation must be nonnegative"));
    }
    let us = linspace(-p, p, grid);
    if twist_dev_sup == 0.0 {
        let grid_sup = (0..grid)
            .into_par_iter()
            .map(|i| no_twist_majorant(us(i)))
            .reduce(|| 0.0, f64::max);
        let ends = no_twist_majorant(p).max(no_twist_majorant(-p));
        return Ok(SBound {
            bound: grid_sup.max(ends),
            grid_sup,
            endpoint_value: Some(ends),
            twist: false,
            grid,
        });
    }
    let vs = linspace(0.0, b * twist_dev_sup, grid);
    let grid_sup = (0..grid)
        .into_par_iter()
        .map(|i| {
            let u = us(i);
            (0..grid)
                .map(|j| m_eigenvalues(u, vs(j)).iter().fold(0.0f64, |m, l| m.max(l.abs())))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(SBound {
        bound: grid_sup,
        grid_sup,
        endpoint_value: None,
        twist: true,
        grid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// `[a₀/(S+1), a₀)` for the positive eigenfrequencies.
    pub interval: Option<[f64; 2]>,
    /// `(−a₀, −a₀/(S+1)]`, the mirror image.
    pub mirrored: Option<[f64; 2]>,
    pub zero_isolated: bool,
    /// The interval is empty (S = 0): no discrete spectrum in the open gap.
    pub empty: bool,
}

pub fn localization(a0: f64, s_bound: f64) -> Localization {
    if s_bound < 1.0 {
        let lo = a0 / (s_bound + 1.0);
        Localization {
            interval: Some([lo, a0]),
            mirrored: Some([-a0, -lo]),
            zero_isolated: true,
            empty: lo >= a0,
        }
    } else {
        Localization {
            interval: None,
            mirrored: None,
            zero_isolated: false,
            empty: false,
        }
    }
}

/// Sampled rotated curvature `k^θ(s)` for the trial-field bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KthetaPath {
    pub s: Vec<f64>,
    pub k: Vec<[f64; 2]>,
}

impl KthetaPath {
    pub fn new(s: Vec<f64>, k: Vec<[f64; 2]>) -> Result<Self> {
        if s.len() != k.len() || s.len() < 2 {
            return Err(invalid("path needs at least two samples of equal length"));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("path abscissae must be increasing"));
        }
        Ok(KthetaPath { s, k })
    }

    /// Rotates `(k₁, k₂)` samples by `theta`.
    pub fn from_frame(s: &[f64], k1: &[f64], k2: &[f64], theta: f64) -> Result<Self> {
        let k = k1.iter().zip(k2).map(|(&a, &b)| yvector_theta([a, b], theta)).collect();
        Self::new(s.to_vec(), k)
    }

    /// `∫ φₙ(s)² k^θ(s) ds` by the trapezoid rule on the samples.
    pub fn weighted_integral(&self, n: f64) -> [f64; 2] {
        let mut acc = [0.0; 2];
        let f = |i: usize| {
            let w = cutoff(self.s[i], n);
            let w2 = w * w;
            [w2 * self.k[i][0], w2 * self.k[i][1]]
        };
        let mut prev = f(0);
        for i in 1..self.s.len() {
            let cur = f(i);
            let h = 0.5 * (self.s[i] - self.s[i - 1]);
            acc[0] += h * (prev[0] + cur[0]);
            acc[1] += h * (prev[1] + cur[1]);
            prev = cur;
        }
        acc
    }
}

/// Trapezoidal cutoff: 1 on `[−n, n]`, linear to 0 on `n ≤ |s| ≤ 2n`.
pub fn cutoff(s: f64, n: f64) -> f64 {
    let a = s.abs();
    if a <= n {
        1.0
    } else if a < 2.0 * n {
        2.0 - a / n
    } else {
        0.0
    }
}

/// Scalars shared by the trial-energy bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub x: [f64; 2],
    pub lambda2: f64,
    pub b: f64,
    pub kappa_sup: f64,
    pub kappa_l1: f64,
    pub medium: Medium,
    pub form: ThresholdForm,
}

/// Upper bound on `q[(Eₙ,0)] − a₀²‖Eₙ‖²` for the cutoff trial field of size `n`.
pub fn trial_energy(n: u64, path: &KthetaPath, p: &TrialParams) -> Result<f64> {
    let bk = check_admissible(p.b, p.kappa_sup)?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let nf = n as f64;
    let i = path.weighted_integral(nf);
    let lam = p.lambda2;
    let mu = p.medium.mu0;
    let first = -(lam / (2.0 * mu)) * (i[0] * p.x[0] + i[1] * p.x[1]);
    let second = lam / (mu * (1.0 - bk)) * (2.0 / nf);
    let third = p.form.scale(&p.medium) * lam * lam / mu * p.b * p.b * p.kappa_sup * p.kappa_l1 / (1.0 - bk);
    Ok(first + second + third)
}

/// `(λ₂/2μ₀)(−Y^θ·X + 2λ₂ b²κ∞κ₁/(1 − bκ∞))`, the n → ∞ value of the bound.
pub fn trial_limit(ytheta: [f64; 2], p: &TrialParams) -> Result<f64> {
    let bk = check_admissible(p.b, p.kappa_sup)?;
    let lam = p.lambda2;
    let thr = p.form.scale(&p.medium) * 2.0 * lam * p.b * p.b * p.kappa_sup * p.kappa_l1 / (1.0 - bk);
    Ok(lam / (2.0 * p.medium.mu0) * (-(ytheta[0] * p.x[0] + ytheta[1] * p.x[1]) + thr))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSearch {
    pub n_star: Option<u64>,
    /// `(n, bound)` for every `n` visited.
    pub ladder: Vec<(u64, f64)>,
}

pub const TRIAL_N_MAX: u64 = 1_000_000;

/// First `n` of `1, 2, 4, …` with a negative trial bound, the ladder ending
/// at `n = 10⁶` itself.
pub fn trial_search(path: &KthetaPath, p: &TrialParams) -> Result<TrialSearch> {
    let mut ladder = Vec::new();
    let mut n = 1u64;
    loop {
        let v = trial_energy(n, path, p)?;
        ladder.push((n, v));
        if v < 0.0 {
            return Ok(TrialSearch {
                n_star: Some(n),
                ladder,
            });
        }
        if n == TRIAL_N_MAX {
            return Ok(TrialSearch { n_star: None, ladder });
        }
        n = (2 * n).min(TRIAL_N_MAX);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RectangleCase {
    Discrete,
    Embedded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleClassification {
    pub case: RectangleCase,
    /// `±√λ_2D · c`.
    pub eigenfrequencies: [f64; 2],
    pub gap_edge: f64,
    pub lambda2_neumann: f64,
    /// `π/√λ_2D`, the height separating the two cases when `h > ℓ`.
    pub critical_height: f64,
}

/// Classifies the eigenvalue `λ_2D` of a straight waveguide with
/// rectangular section `ℓ × h` against the essential spectrum.
pub fn rectangle_classify(lambda_2d: f64, ell: f64, h: f64, medium: &Medium) -> Result<RectangleClassification> {
    if !(ell > 0.0 && h > 0.0) {
        return Err(invalid("rectangle sides must be positive"));
    }
    let upper = PI * PI / (ell * ell);
    if !(lambda_2d > 0.0 && lambda_2d < upper) {
        return Err(Error::HypothesisViolation(format!(
            "lambda_2D = {lambda_2d} must lie in (0, pi^2/ell^2) = (0, {upper})"
        )));
    }
    let c = medium.c();
    let lambda2_neumann = PI * PI / h.max(ell).powi(2);
    let critical_height = PI / lambda_2d.sqrt();
    let case = if h <= ell || h < critical_height {
        RectangleCase::Discrete
    } else {
        RectangleCase::Embedded
    };
    let nu = lambda_2d.sqrt() * c;
    Ok(RectangleClassification {
        case,
        eigenfrequencies: [-nu, nu],
        gap_edge: lambda2_neumann.sqrt() * c,
        lambda2_neumann,
        critical_height,
    })
}

/// Everything the condition report is computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionInputs {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Constant twist angle; `None` selects θ⋆.
    pub theta: Option<f64>,
    pub lambda2: f64,
    pub b: f64,
    pub kappa_sup: f64,
    pub kappa_l1: f64,
    #[serde(default)]
    pub twist_dev_sup: f64,
    #[serde(default)]
    pub medium: Medium,
    #[serde(default)]
    pub form: ThresholdForm,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Sampled `(k₁, k₂)` along arclength, unrotated; enables `trial_n_star`.
    #[serde(skip)]
    pub path: Option<KthetaPath>,
}

fn default_grid() -> usize {
    4097
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub a0: f64,
    pub theta: f64,
    pub ytheta: [f64; 2],
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub boundary_case: bool,
    pub delta_star: f64,
    pub s_bound: SBound,
    pub localization: Localization,
    pub zero_isolated: bool,
    pub trial_n_star: Option<u64>,
    pub limit_bound: f64,
    pub inputs: ConditionInputs,
    pub warnings: Vec<String>,
}

pub fn evaluate(inputs: &ConditionInputs) -> Result<ConditionReport> {
    let mut warnings = Vec::new();
    let theta = match inputs.theta {
        Some(t) => t,
        None => match theta_star(inputs.x, inputs.y) {
            Ok(t) => t,
            Err(e) => {
                warnings.push(format!("{e}; using theta = 0"));
                0.0
            }
        },
    };
    let ytheta = yvector_theta(inputs.y, theta);
    let a0 = gap_a0(inputs.lambda2, &inputs.medium)?;
    let tc = trapped_condition_with(
        inputs.x,
        ytheta,
        inputs.lambda2,
        inputs.b,
        inputs.kappa_sup,
        inputs.kappa_l1,
        inputs.form,
        &inputs.medium,
    )?;
    if tc.boundary_case {
        warnings.push("boundary case: lhs equals rhs, the strict inequality does not hold".into());
    }
    let ds = delta_star_with(
        inputs.x,
        inputs.y,
        inputs.lambda2,
        inputs.b,
        inputs.kappa_sup,
        inputs.kappa_l1,
        inputs.form,
        &inputs.medium,
    )?;
    let sb = s_norm_bound(inputs.b, inputs.kappa_sup, inputs.twist_dev_sup, inputs.grid)?;
    if sb.twist {
        warnings.push("twisted branch: bound is a grid supremum".into());
    }
    let loc = localization(a0, sb.bound);
    let params = TrialParams {
        x: inputs.x,
        lambda2: inputs.lambda2,
        b: inputs.b,
        kappa_sup: inputs.kappa_sup,
        kappa_l1: inputs.kappa_l1,
        medium: inputs.medium,
        form: inputs.form,
    };
    let limit_bound = trial_limit(ytheta, &params)?;
    let trial_n_star = match &inputs.path {
        Some(p) => {
            let rotated = KthetaPath {
                s: p.s.clone(),
                k: p.k.iter().map(|&k| yvector_theta(k, theta)).collect(),
            };
            trial_search(&rotated, &params)?.n_star
        }
        None => None,
    };
    Ok(ConditionReport {
        a0,
        theta,
        ytheta,
        lhs: tc.lhs,
        rhs: tc.rhs,
        holds: tc.holds,
        boundary_case: tc.boundary_case,
        delta_star: ds,
        s_bound: sb,
        localization: loc,
        zero_isolated: loc.zero_isolated,
        trial_n_star,
        limit_bound,
        inputs: inputs.clone(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::scale_family;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn gap_examples() {
        assert!((gap_a0(PI * PI, &Medium::default()).unwrap() - PI).abs() < 1e-15);
        assert!((gap_a0(0.25, &Medium::default()).unwrap() - 0.5).abs() < 1e-15);
        let m = Medium::new(0.5, 0.5).unwrap();
        assert!((m.c() - 2.0).abs() < 1e-15);
        assert!((gap_a0(PI * PI / 4.0, &m).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn trapped_examples() {
        let tc = trapped_condition([1.0, 1.0], [PI / SQRT2, PI / SQRT2], PI * PI, 1.0, 0.04, PI).unwrap();
        assert!((tc.lhs - SQRT2 * PI).abs() < 1e-12);
        let rhs = 2.0 * PI * PI * 0.04 / 0.96 * PI;
        assert!((tc.rhs - rhs).abs() < 1e-12);
        assert!((tc.rhs - 2.5838).abs() < 1e-4);
        assert!(tc.holds);
        let straight = trapped_condition([1.0, 1.0], [0.0, 0.0], PI * PI, 1.0, 0.0, 0.0).unwrap();
        assert!(!straight.holds && straight.boundary_case);
        let rect = trapped_condition([0.0, 0.0], [PI, 0.0], 0.25, 1.0, 0.1, PI).unwrap();
        assert!(!rect.holds);
        assert!(matches!(
            trapped_condition([1.0, 1.0], [PI, 0.0], 1.0, 1.0, 1.0, 1.0),
            Err(Error::InadmissibleGeometry(_))
        ));
    }

    #[test]
    fn proposition_form_divides_by_eps0() {
        let m = Medium::new(4.0, 0.25).unwrap();
        let t = trapped_condition_with([1.0, 0.0], [1.0, 0.0], 2.0, 1.0, 0.1, 1.0, ThresholdForm::Theorem, &m).unwrap();
        let p = trapped_condition_with(
            [1.0, 0.0],
            [1.0, 0.0],
            2.0,
            1.0,
            0.1,
            1.0,
            ThresholdForm::Proposition,
            &m,
        )
        .unwrap();
        assert!((t.rhs - 4.0 * p.rhs).abs() < 1e-14);
    }

    #[test]
    fn delta_star_triangle_parabola() {
        let d = delta_star([1.0, 1.0], [PI, 0.0], PI * PI, 1.0, 2.0, PI).unwrap();
        let oracle = SQRT2 * PI / ((SQRT2 * PI + 2.0 * PI.powi(3)) * 2.0);
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - 0.03343).abs() < 1e-5);
        assert_eq!(delta_star([1e300, 0.0], [1e300, 0.0], 1.0, 1.0, 0.1, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn below_delta_star_condition_holds() {
        let (x, y) = ([1.0, 1.0], [PI, 0.0]);
        let d = delta_star(x, y, PI * PI, 1.0, 2.0, PI).unwrap();
        let yt = yvector_theta(y, theta_star(x, y).unwrap());
        for i in 1..=50 {
            let delta = d * i as f64 / 51.0;
            let s = scale_family(2.0, PI, y, delta).unwrap();
            assert!(
                trapped_condition(x, yt, PI * PI, 1.0, s.kappa_sup, s.kappa_l1)
                    .unwrap()
                    .holds
            );
        }
        let s = scale_family(2.0, PI, y, d).unwrap();
        let at = trapped_condition(x, yt, PI * PI, 1.0, s.kappa_sup, s.kappa_l1).unwrap();
        assert!((at.lhs - at.rhs).abs() < 1e-9);
    }

    #[test]
    fn s_bound_no_twist() {
        let s = s_norm_bound(1.0, 0.25, 0.0, 4097).unwrap();
        assert!((s.bound - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(s_norm_bound(1.0, 0.0, 0.0, 4097).unwrap().bound, 0.0);
        assert!(s_norm_bound(1.0, 0.499, 0.0, 4097).unwrap().bound < 1.0);
        assert!(s_norm_bound(2.0, 0.5, 0.0, 4097).is_err());
    }

    #[test]
    fn s_bound_dense_oracle() {
        let p = 0.25;
        let mut best: f64 = 0.0;
        for i in 0..=1_000_000 {
            let x = -p + 2.0 * p * i as f64 / 1e6;
            best = best.max(no_twist_majorant(x));
        }
        assert!((best - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn general_branch_reduces_at_zero_twist() {
        for i in 0..=200 {
            let u = -0.45 + 0.9 * i as f64 / 200.0;
            let m = m_eigenvalues(u, 0.0).iter().fold(0.0f64, |a, l| a.max(l.abs()));
            assert!((m - no_twist_majorant(u)).abs() < 1e-10);
        }
        let t = s_norm_bound(1.0, 0.2, 0.1, 257).unwrap();
        let n = s_norm_bound(1.0, 0.2, 0.0, 257).unwrap();
        assert!(t.twist && t.bound >= n.grid_sup);
    }

    #[test]
    fn localization_examples() {
        let l = localization(PI, 1.0 / 3.0);
        let [lo, hi] = l.interval.unwrap();
        assert!((lo - 0.75 * PI).abs() < 1e-15 && hi == PI);
        assert_eq!(l.mirrored.unwrap(), [-PI, -lo]);
        assert!(l.zero_isolated && !l.empty);
        assert!(localization(PI, 0.0).empty);
        let none = localization(PI, 2.0);
        assert!(none.interval.is_none() && !none.zero_isolated);
        assert!(localization(1.0, 0.2).interval.unwrap()[0] > localization(1.0, 0.3).interval.unwrap()[0]);
    }

    fn bump_path(total: [f64; 2]) -> KthetaPath {
        // Smooth compactly supported profile with unit integral on [-1, 1].
        let n = 2001;
        let s: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let k = s
            .iter()
            .map(|&v| {
                let w = 0.75 * (1.0 - v * v);
                [total[0] * w, total[1] * w]
            })
            .collect();
        KthetaPath::new(s, k).unwrap()
    }

    #[test]
    fn trial_bound_negative_when_condition_holds() {
        let p = TrialParams {
            x: [1.0, 1.0],
            lambda2: PI * PI,
            b: 1.0,
            kappa_sup: 0.04,
            kappa_l1: PI,
            medium: Medium::default(),
            form: ThresholdForm::Theorem,
        };
        let yt = [PI / SQRT2, PI / SQRT2];
        let path = bump_path(yt);
        let lim = trial_limit(yt, &p).unwrap();
        assert!(lim < 0.0);
        let s = trial_search(&path, &p).unwrap();
        assert!(s.n_star.is_some());
        for w in s.ladder.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }

    #[test]
    fn trial_bound_positive_when_orthogonal() {
        let p = TrialParams {
            x: [1.0, 0.0],
            lambda2: 2.0,
            b: 0.5,
            kappa_sup: 0.3,
            kappa_l1: 1.0,
            medium: Medium::default(),
            form: ThresholdForm::Theorem,
        };
        let path = bump_path([0.0, 1.0]);
        for k in 0..20 {
            assert!(trial_energy(1 << k, &path, &p).unwrap() > 0.0);
        }
        let s = trial_search(&path, &p).unwrap();
        assert!(s.n_star.is_none());
        assert_eq!(s.ladder.last().unwrap().0, TRIAL_N_MAX);
    }

    #[test]
    fn rectangle_scenarios() {
        let m = Medium::default();
        let l = 0.9 * PI * PI;
        assert_eq!(
            rectangle_classify(l, 1.0, 0.5, &m).unwrap().case,
            RectangleCase::Discrete
        );
        assert_eq!(
            rectangle_classify(l, 1.0, 1.02, &m).unwrap().case,
            RectangleCase::Discrete
        );
        assert_eq!(
            rectangle_classify(l, 1.0, 1.2, &m).unwrap().case,
            RectangleCase::Embedded
        );
        let hc = PI / l.sqrt();
        let r = rectangle_classify(l, 1.0, hc, &m).unwrap();
        assert_eq!(r.case, RectangleCase::Embedded);
        assert_eq!(r.eigenfrequencies[0], -r.eigenfrequencies[1]);
        assert!(matches!(
            rectangle_classify(PI * PI, 1.0, 0.5, &m),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn evaluate_triangle_parabola() {
        let inputs = ConditionInputs {
            x: [1.0, 1.0],
            y: [PI, 0.0],
            theta: None,
            lambda2: PI * PI,
            b: 1.0,
            kappa_sup: 0.04,
            kappa_l1: PI,
            twist_dev_sup: 0.0,
            medium: Medium::default(),
            form: ThresholdForm::Theorem,
            grid: 4097,
            path: Some(bump_path([PI, 0.0])),
        };
        let r = evaluate(&inputs).unwrap();
        assert!((r.theta - PI / 4.0).abs() < 1e-15);
        assert!(r.holds && r.limit_bound < 0.0 && r.trial_n_star.is_some());
        assert!(r.s_bound.bound < 1.0 && r.zero_isolated);
        let back: ConditionReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        let mut echoed = r.clone();
        echoed.inputs.path = None;
        assert_eq!(back, echoed);
    }
}
