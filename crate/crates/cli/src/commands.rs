use std::f64::consts::PI;
use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use waveguide_core::conditions::{
    delta_star_with, evaluate, ConditionInputs, ConditionReport, KthetaPath, Medium, ThresholdForm,
};
use waveguide_core::crosssec::{analytic_rectangle, analyze_full, CrossSectionReport, SectionOptions};
use waveguide_core::curves::{
    arclength_resample, rapf, summarize, write_frame_csv, CircleArc, CurveSummary, Helix, InitialFrame, Line, Parabola,
    ParamCurve, SBend, SampledCurve, ScaledCurve, Window,
};
use waveguide_core::fem::{write_eigenvectors, EigenOptions};
use waveguide_core::mesh::{gen_polygon, gen_rectangle, gen_right_triangle, read_gmsh, Polygon, TriMesh};
use waveguide_core::shapederiv::{
    adjoint_solve, boundary_integrand, bump_sweep, bump_velocity, fd_check, harmonic_extension, parse_radii,
    rect_integrand, rect_psi, rect_q, write_sweep_csv, BumpSpec, FdOptions, ShapeDerivReport, Side, SweepBase,
    SweepRow, TraceMode,
};

use crate::output::{emit, timestamp, to_json, Envelope};
use crate::{CheckArgs, Cli, Command, CurveArgs, FormArg, Outcome, SectionArgs, ShapeDerivArgs, SweepArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Section(a) => section(cli, a),
        Command::Curve(a) => curve(cli, a),
        Command::Check(a) => check(cli, a),
        Command::Shapederiv(a) => shapederiv(cli, a),
        Command::Sweep(a) => sweep(cli, a),
    }
}

fn write_doc<R: Serialize>(cli: &Cli, kind: &str, result: &R, out: Option<&Path>) -> Result<()> {
    let env = Envelope {
        kind,
        version: VERSION,
        timestamp: timestamp(),
        config: cli,
        result,
    };
    let text = to_json(&env)?;
    emit(out, &text).with_context(|| match out {
        Some(p) => format!("cannot write {}", p.display()),
        None => "cannot write to stdout".into(),
    })
}

fn outcome(warn: bool) -> Outcome {
    if warn {
        Outcome::Warnings
    } else {
        Outcome::Clean
    }
}

fn g6(v: f64) -> String {
    format!("{v:.6e}")
}

fn eigen_options(cli: &Cli, tol: f64) -> EigenOptions {
    EigenOptions {
        tol,
        seed: cli.seed,
        ..EigenOptions::default()
    }
}

fn default_ny(nx: usize, ell: f64, h: f64) -> usize {
    ((nx as f64 * h / ell).round() as usize).max(1)
}

fn rect_dims(v: &[f64]) -> Result<(f64, f64)> {
    match v {
        [l, h] if *l > 0.0 && *h > 0.0 => Ok((*l, *h)),
        _ => bail!("--rect needs two positive side lengths"),
    }
}

fn load_mesh(a: &SectionArgs) -> Result<TriMesh> {
    let with_path = |p: &Path| format!("cannot load {}", p.display());
    if let Some(n) = a.triangle {
        return Ok(gen_right_triangle(n)?);
    }
    if let Some(r) = &a.rect {
        let (l, h) = rect_dims(r)?;
        return Ok(gen_rectangle(
            l,
            h,
            a.nx,
            a.ny.unwrap_or_else(|| default_ny(a.nx, l, h)),
        )?);
    }
    if let Some(p) = &a.polygon {
        let poly = Polygon::read_csv(p).with_context(|| with_path(p))?;
        return Ok(gen_polygon(&poly, a.h)?);
    }
    if let Some(p) = &a.gmsh {
        return read_gmsh(p).with_context(|| with_path(p));
    }
    if let Some(p) = &a.mesh {
        return TriMesh::read_json(p).with_context(|| with_path(p));
    }
    if a.dumbbell {
        if a.h.is_nan() || a.h <= 0.0 {
            bail!("--h must be positive");
        }
        let per_circle = ((4.0 * PI / a.h).ceil() as usize).max(256);
        return Ok(gen_polygon(&Polygon::dumbbell(per_circle)?, a.h)?);
    }
    Err(anyhow!("no mesh source given"))
}

#[derive(Serialize, Deserialize)]
struct SectionOut {
    report: CrossSectionReport,
}

fn section(cli: &Cli, a: &SectionArgs) -> Result<Outcome> {
    let mesh = load_mesh(a)?;
    let opts = SectionOptions {
        origin: [a.origin[0], a.origin[1]],
        eigen: eigen_options(cli, a.tol),
        refine_check: !a.no_refine_check,
    };
    let an = analyze_full(&mesh, &opts)?;
    if let Some(p) = &a.eigvecs {
        write_eigenvectors(p, &an.spectrum.eigenvectors).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let r = &an.report;
    eprintln!(
        "lambda2 = {}  lambda3 = {}  X = ({}, {})  b = {}{}",
        g6(r.lambda2),
        g6(r.lambda3),
        g6(r.x_boundary[0]),
        g6(r.x_boundary[1]),
        g6(r.b),
        if r.simple { "" } else { "  [lambda2 not simple]" }
    );
    write_doc(
        cli,
        "section",
        &SectionOut {
            report: an.report.clone(),
        },
        a.out.as_deref(),
    )?;
    Ok(outcome(!an.report.warnings.is_empty()))
}

fn base_curve(a: &CurveArgs) -> Result<Box<dyn ParamCurve>> {
    if a.line {
        return Ok(Box::new(Line::x_axis()));
    }
    if let Some(k) = a.parabola {
        return Ok(Box::new(Parabola::new(k)));
    }
    if let Some(v) = &a.circle {
        return Ok(Box::new(CircleArc::new(v[0], v[1])?));
    }
    if let Some(v) = &a.helix {
        return Ok(Box::new(Helix::new(v[0], v[1])?));
    }
    if a.sbend {
        return Ok(Box::new(SBend));
    }
    if let Some(p) = &a.samples {
        return Ok(Box::new(
            SampledCurve::read_csv(p).with_context(|| format!("cannot load {}", p.display()))?,
        ));
    }
    Err(anyhow!("no curve given"))
}

#[derive(Serialize, Deserialize)]
struct CurveOut {
    /// Scale of the family member, when the curve was scaled.
    delta: Option<f64>,
    summary: CurveSummary,
}

fn curve(cli: &Cli, a: &CurveArgs) -> Result<Outcome> {
    let base = base_curve(a)?;
    let curve: Box<dyn ParamCurve> = match a.delta {
        Some(d) => Box::new(ScaledCurve::new(base, d)?),
        None => base,
    };
    let window = match (a.window, &a.param_window) {
        (Some(w), _) => Window::Arclength { s0: -w, s1: w },
        (None, Some(p)) => Window::Parameter { t0: p[0], t1: p[1] },
        (None, None) => {
            let (t0, t1) = curve.window();
            Window::Parameter { t0, t1 }
        }
    };
    let samples = arclength_resample(&*curve, window, a.n)?;
    let initial = if a.frame_angle == 0.0 {
        InitialFrame::Default
    } else {
        InitialFrame::Rotated(a.frame_angle)
    };
    let fc = rapf(&samples, initial)?;
    let summary = summarize(&*curve, &fc, window)?;
    if let Some(p) = &a.frames {
        let f = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
        write_frame_csv(&fc, f)?;
    }
    eprintln!(
        "{}: sup kappa = {}  |kappa|_1 = {}  Y = ({}, {})",
        summary.curve,
        g6(summary.kappa_sup),
        g6(summary.kappa_l1),
        g6(summary.y[0]),
        g6(summary.y[1])
    );
    let warn = !summary.warnings.is_empty();
    write_doc(
        cli,
        "curve",
        &CurveOut {
            delta: a.delta,
            summary,
        },
        a.out.as_deref(),
    )?;
    Ok(outcome(warn))
}

fn read_doc<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("schema error: {} is not JSON", path.display()))?;
    let found = v.get("kind").and_then(|k| k.as_str()).unwrap_or("<none>");
    if found != kind {
        bail!(
            "schema error: {} is a '{found}' document, expected '{kind}'",
            path.display()
        );
    }
    serde_json::from_value(v)
        .with_context(|| format!("schema error: {} does not match the '{kind}' schema", path.display()))
}

fn read_path(path: &Path) -> Result<KthetaPath> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (mut s, mut k) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| anyhow!("{}: missing column {i}", path.display()))?
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{}: non-numeric entry", path.display()))
        };
        s.push(f(0)?);
        k.push([f(1)?, f(2)?]);
    }
    Ok(KthetaPath::new(s, k)?)
}

#[derive(Serialize)]
struct CheckOut {
    report: ConditionReport,
    /// δ⋆ of the unscaled family when the curve was scaled by δ.
    delta_star_base: Option<f64>,
    source_warnings: Vec<String>,
}

fn check(cli: &Cli, a: &CheckArgs) -> Result<Outcome> {
    let sec: SectionOut = read_doc(&a.section, "section")?;
    let cur: CurveOut = read_doc(&a.curve, "curve")?;
    let theta = match a.theta.trim() {
        "auto" => None,
        t => Some(
            t.parse::<f64>()
                .with_context(|| format!("--theta expects an angle or 'auto', got '{t}'"))?,
        ),
    };
    let medium = Medium::new(a.eps0, a.mu0)?;
    let form = match a.form {
        FormArg::Theorem => ThresholdForm::Theorem,
        FormArg::Proposition => ThresholdForm::Proposition,
    };
    let path = a.frames.as_deref().map(read_path).transpose()?;
    let (r, s) = (&sec.report, &cur.summary);
    let inputs = ConditionInputs {
        x: r.x(),
        y: s.y,
        theta,
        lambda2: r.lambda2,
        b: r.b,
        kappa_sup: s.kappa_sup,
        kappa_l1: s.kappa_l1,
        twist_dev_sup: a.twist_dev_sup,
        medium,
        form,
        grid: a.grid,
        path,
    };
    let report = evaluate(&inputs)?;
    let delta_star_base = cur
        .delta
        .map(|d| delta_star_with(r.x(), s.y, r.lambda2, r.b, s.kappa_sup / d, s.kappa_l1, form, &medium))
        .transpose()?;
    let mut source_warnings: Vec<String> = r.warnings.iter().map(|w| format!("section: {w}")).collect();
    source_warnings.extend(s.warnings.iter().map(|w| format!("curve: {w}")));
    eprintln!(
        "holds = {}  lhs = {}  rhs = {}  delta* = {}  |S| <= {}",
        report.holds,
        g6(report.lhs),
        g6(report.rhs),
        g6(delta_star_base.unwrap_or(report.delta_star)),
        g6(report.s_bound.bound)
    );
    let warn = !report.warnings.is_empty() || !r.simple;
    let out = CheckOut {
        report,
        delta_star_base,
        source_warnings,
    };
    write_doc(cli, "check", &out, a.out.as_deref())?;
    Ok(outcome(warn))
}

fn parse_bump(v: &[String], with_radius: bool) -> Result<(Side, f64, String)> {
    let [side, center, third] = v else {
        bail!("--bump needs SIDE CENTER RADIUS")
    };
    let side: Side = side.parse()?;
    let center: f64 = center.parse().with_context(|| format!("bad bump center '{center}'"))?;
    if with_radius {
        third
            .parse::<f64>()
            .with_context(|| format!("bad bump radius '{third}'"))?;
    }
    Ok((side, center, third.clone()))
}

#[derive(Serialize)]
struct AdjointSummary {
    removed: f64,
    orthogonality_defect: f64,
    warning: Option<String>,
}

#[derive(Serialize)]
struct AnalyticCompare {
    h: f64,
    q_l2_error: f64,
    integrand_max_error: f64,
    integrand_max_error_tangential: f64,
}

#[derive(Serialize)]
struct ShapeDerivOut {
    lambda2: f64,
    x: [f64; 2],
    w: [f64; 2],
    adjoint: AdjointSummary,
    analytic: Option<AnalyticCompare>,
    fd: Option<ShapeDerivReport>,
}

fn shapederiv(cli: &Cli, a: &ShapeDerivArgs) -> Result<Outcome> {
    let (ell, height) = rect_dims(&a.rect)?;
    let ny = a.ny.unwrap_or_else(|| default_ny(a.nx, ell, height));
    let mesh = gen_rectangle(ell, height, a.nx, ny)?;
    let norm = a.w[0].hypot(a.w[1]);
    let w = if norm == 0.0 {
        [0.0, 0.0]
    } else {
        [a.w[0] / norm, a.w[1] / norm]
    };
    let section = SectionOptions {
        refine_check: false,
        eigen: eigen_options(cli, a.tol),
        ..SectionOptions::default()
    };
    let mut an = analyze_full(&mesh, &section)?;
    let c: f64 = mesh
        .vertices()
        .iter()
        .zip(&an.psi)
        .map(|(p, v)| v * rect_psi(ell, height, *p))
        .sum();
    if c < 0.0 {
        an.psi.iter_mut().for_each(|v| *v = -*v);
    }
    let adj = adjoint_solve(&mesh, &an, w)?;
    let analytic = if a.analytic_compare {
        analytic_rectangle(ell, height)?;
        let exact: Vec<f64> = mesh.vertices().iter().map(|p| rect_q(ell, height, w, *p)).collect();
        let diff: Vec<f64> = adj.q.iter().zip(&exact).map(|(x, y)| x - y).collect();
        let en = an.fem.mass.inner(&exact, &exact).sqrt();
        let q_l2_error = an.fem.mass.inner(&diff, &diff).sqrt() / if en > 0.0 { en } else { 1.0 };
        let mut errs = [0.0f64; 2];
        for (k, e) in mesh.boundary().iter().enumerate() {
            let (p, q) = (mesh.vertices()[e.a], mesh.vertices()[e.b]);
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let exact = rect_integrand(ell, height, w, mid);
            for (err, mode) in errs
                .iter_mut()
                .zip([TraceMode::AdjacentTriangle, TraceMode::BoundaryConsistent])
            {
                let num = boundary_integrand(&mesh, an.report.lambda2, &an.psi, &adj.q, w, k, mode);
                *err = err.max((num - exact).abs());
            }
        }
        Some(AnalyticCompare {
            h: mesh.max_edge(),
            q_l2_error,
            integrand_max_error: errs[0],
            integrand_max_error_tangential: errs[1],
        })
    } else {
        None
    };
    let velocity = match (&a.bump, &a.translate) {
        (Some(b), _) => {
            let (side, center, r) = parse_bump(b, true)?;
            let bump = BumpSpec {
                side,
                center,
                radius: r.parse()?,
            };
            Some(harmonic_extension(&mesh, &bump_velocity(&mesh, ell, height, &bump)?)?)
        }
        (None, Some(t)) => Some(vec![[t[0], t[1]]; mesh.n_vertices()]),
        (None, None) => None,
    };
    let fd = match velocity {
        Some(v) => {
            let ladder = parse_radii(&a.ladder)?;
            let opts = FdOptions {
                section: section.clone(),
                ..FdOptions::default()
            };
            Some(fd_check(&mesh, &v, w, &ladder, &opts)?)
        }
        None => None,
    };
    if let Some(c) = &analytic {
        eprintln!(
            "q* L2 error = {}  integrand max error = {}  h = {}",
            g6(c.q_l2_error),
            g6(c.integrand_max_error),
            g6(c.h)
        );
    }
    if let Some(r) = &fd {
        eprintln!(
            "adjoint = {}  boundary = {}  finite differences = {}  discrepancy = {}",
            g6(r.adjoint),
            g6(r.boundary_adjacent),
            g6(r.extrapolated),
            g6(r.discrepancy)
        );
    }
    let warn = adj.warning.is_some() || fd.as_ref().is_some_and(|r| !r.warnings.is_empty());
    let out = ShapeDerivOut {
        lambda2: an.report.lambda2,
        x: an.report.x_boundary,
        w,
        adjoint: AdjointSummary {
            removed: adj.removed,
            orthogonality_defect: adj.orthogonality_defect,
            warning: adj.warning.clone(),
        },
        analytic,
        fd,
    };
    write_doc(cli, "shapederiv", &out, a.out.as_deref())?;
    Ok(outcome(warn))
}

#[derive(Serialize)]
struct SweepOut<'a> {
    rows: &'a [SweepRow],
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<Outcome> {
    let (ell, height) = rect_dims(&a.rect)?;
    let (side, center, radii) = parse_bump(&a.bump, false)?;
    let radii = parse_radii(&radii)?;
    let base = SweepBase {
        ell,
        height,
        nx: a.nx,
        ny: a.ny.unwrap_or_else(|| default_ny(a.nx, ell, height)),
        side,
        center,
    };
    let opts = SectionOptions {
        refine_check: false,
        eigen: eigen_options(cli, a.tol),
        ..SectionOptions::default()
    };
    let rows = bump_sweep(&base, &radii, &opts);
    for r in &rows {
        match &r.error {
            None => eprintln!(
                "r = {}  X = ({}, {})  |X| = {}",
                g6(r.r),
                g6(r.x[0]),
                g6(r.x[1]),
                g6(r.x[0].hypot(r.x[1]))
            ),
            Some(e) => eprintln!("r = {}  failed: {e}", g6(r.r)),
        }
    }
    match &a.out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            write_sweep_csv(&rows, f)?;
            write_doc(cli, "sweep", &SweepOut { rows: &rows }, Some(&p.with_extension("json")))?;
        }
        None => write_sweep_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(outcome(rows.iter().any(|r| r.error.is_some())))
}
