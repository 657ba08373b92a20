//! One function per command. Each returns a report block; module errors
//! propagate and are recorded by the caller.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use bonnetlab::bonnet::{moduli_sample, NormalGauge, CONGRUENCE_FACTOR};
use bonnetlab::deform::{
    build_variation_with, integrate_bending, superconformal_bending, verify_deformation, verify_superconformal, BendingField,
    DeformationReport, VariationForms,
};
use bonnetlab::invariants::{classify_point, PointGeometry, PointInvariants};
use bonnetlab::mixed::global::{singular_clusters, CheckValue, IDENTITY_TOL, INTEGRAL_TOL};
use bonnetlab::mixed::{d_omega, global_checks, index, isothermicity_classify, mixed_form_field_eps, refine_singular_point};
use bonnetlab::zoo::{certify, ZooEntry};
use bonnetlab::{GeomError, Grid, Sign, SurfaceChart, V4};

use crate::config::{Command, RunConfig};
use crate::export::{write_csv, write_mesh};
use crate::lines::trace_lines;
use crate::report::{downsample, sup, Check, CommandBlock, Comparison};

#[derive(Debug)]
pub enum Failure {
    Geom(GeomError),
    Io(std::io::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Geom(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "writing artifacts: {e}"),
        }
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure::Geom(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<CommandBlock, Failure>;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub chart: &'a SurfaceChart,
    pub entry: Option<&'a ZooEntry>,
    pub grid: Grid,
    /// Artifact directory; `None` writes nothing but the report.
    pub out: Option<&'a Path>,
}

impl Context<'_> {
    fn csv(&self, block: &mut CommandBlock, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Failure> {
        if let Some(dir) = self.out {
            write_csv(&dir.join(name), header, rows)?;
            block.artifacts.push(name.to_string());
        }
        Ok(())
    }

    fn mesh(&self, block: &mut CommandBlock, stem: &str, label: &str, grid: &Grid, points: &[V4]) -> Result<(), Failure> {
        if let (Some(dir), true) = (self.out, self.cfg.output.meshes) {
            block.artifacts.extend(write_mesh(dir, stem, label, grid, points)?);
        }
        Ok(())
    }

    fn thin<T: serde::Serialize>(&self, vals: &[T]) -> Value {
        json!(downsample(&self.grid, vals, self.cfg.output.downsample))
    }
}

pub fn execute(cmd: Command, ctx: &Context) -> CommandBlock {
    let outcome = match cmd {
        Command::Analyze => analyze(ctx),
        Command::Classify => classify(ctx),
        Command::Lines => lines(ctx),
        Command::Index => index_cmd(ctx),
        Command::GlobalChecks => global(ctx),
        Command::Mates => mates(ctx),
        Command::Deform => deform(ctx),
        Command::Verify => verify(ctx),
    };
    outcome.unwrap_or_else(|e| CommandBlock::failed(cmd, e.to_string()))
}

fn s(x: f64) -> String {
    x.to_string()
}

fn sign_label(sign: Sign) -> &'static str {
    match sign {
        Sign::Minus => "minus",
        Sign::Plus => "plus",
    }
}

fn geometries(ctx: &Context) -> Result<Vec<PointGeometry>, GeomError> {
    ctx.grid.try_map(|u, v| PointGeometry::at(ctx.chart, u, v))
}

/// Identity residuals are measured against `scale^2`, or absolutely when
/// the curvature is below one.
fn scale2(p: &PointInvariants) -> f64 {
    p.curvature_scale.powi(2).max(1.0)
}

fn identity_checks(inv: &[PointInvariants], tol: f64) -> Vec<Check> {
    let worst = sup(inv.iter().map(|p| sup(p.identity_residuals()) / scale2(p)));
    let gap = inv.iter().map(|p| (p.ellipse_mass() - p.k_n.abs()) / scale2(p)).fold(f64::INFINITY, f64::min);
    vec![
        Check::within("ellipse_identities", worst, 0.0, tol),
        // equality holds at umbilics, so allow roundoff below zero
        Check::new("ellipse_inequality", gap, 0.0, tol, Comparison::AtLeast),
    ]
}

fn range(vals: impl Iterator<Item = f64>) -> [f64; 2] {
    vals.fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], x| [lo.min(x), hi.max(x)])
}

fn analyze(ctx: &Context) -> Outcome {
    let tol = &ctx.cfg.tolerances;
    let geoms = geometries(ctx)?;
    let inv: Vec<PointInvariants> = geoms.iter().map(|g| g.invariants()).collect();
    let mut b = CommandBlock::new(Command::Analyze);
    b.checks = identity_checks(&inv, tol.identity);
    b.checks.push(Check::within("frame_orthonormality", sup(geoms.iter().map(|g| g.frame.orthonormality_defect())), 0.0, tol.identity));
    b.checks.push(Check::within("frame_orientation", sup(geoms.iter().map(|g| (g.frame.det() - 1.0).abs())), 0.0, tol.identity));

    type Column = (&'static str, fn(&PointInvariants) -> f64);
    let field = |f: fn(&PointInvariants) -> f64| inv.iter().map(f).collect::<Vec<f64>>();
    let columns: [Column; 5] =
        [("k", |p| p.k), ("k_n", |p| p.k_n), ("norm_h2", |p| p.norm_h2), ("b_minus", |p| p.b_minus), ("b_plus", |p| p.b_plus)];
    let mut grids = serde_json::Map::new();
    let mut ranges = serde_json::Map::new();
    for (name, f) in columns {
        let vals = field(f);
        ranges.insert(name.into(), json!(range(vals.iter().copied())));
        grids.insert(name.into(), ctx.thin(&vals));
    }
    b.data = json!({ "points": inv.len(), "ranges": ranges, "grids": grids });

    let g = &ctx.grid;
    ctx.csv(
        &mut b,
        "invariants.csv",
        &["i", "j", "u", "v", "k", "k_n", "norm_h2", "b_minus", "b_plus", "lambda1", "lambda2"],
        inv.iter().enumerate().map(|(k, p)| {
            let (i, j) = g.ij(k);
            let (u, v) = g.node(i, j);
            vec![i.to_string(), j.to_string(), s(u), s(v), s(p.k), s(p.k_n), s(p.norm_h2), s(p.b_minus), s(p.b_plus), s(p.lambda1), s(p.lambda2)]
        }),
    )?;
    let pts: Vec<V4> = geoms.iter().map(|g| g.jet.f).collect();
    ctx.mesh(&mut b, "surface", &ctx.chart.name, g, &pts)?;
    Ok(b)
}

fn classify(ctx: &Context) -> Outcome {
    let tol = &ctx.cfg.tolerances;
    let inv: Vec<PointInvariants> = geometries(ctx)?.iter().map(|g| g.invariants()).collect();
    let classes: Vec<_> = inv.iter().map(|p| classify_point(p, tol.eps_scale)).collect();
    let tags: Vec<Value> = classes.iter().map(|c| json!(c.tag)).collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in &tags {
        *counts.entry(t.as_str().unwrap_or_default().to_string()).or_default() += 1;
    }
    let (iso, flags) = match isothermicity_classify(ctx.chart, &ctx.grid, tol.iso_eps) {
        Ok(c) => {
            let costar = |sel: fn(&bonnetlab::mixed::IsoFlags) -> Option<f64>| sup(c.flags.iter().filter_map(sel).map(f64::abs));
            let summary = json!({
                "status": "ok",
                "eps": c.eps,
                "isothermic": { "minus": c.iso[0], "plus": c.iso[1] },
                "totally_non_isothermic": { "minus": c.totally_non[0], "plus": c.totally_non[1] },
                "strongly_isothermic": c.strong(),
                "strongly_totally_non_isothermic": c.strongly_totally_non(),
                "sup_abs_costar": { "minus": costar(|f| f.costar_minus), "plus": costar(|f| f.costar_plus) },
                "map": ctx.thin(&c.flags.iter().map(|f| [f.minus, f.plus]).collect::<Vec<_>>()),
            });
            (summary, Some(c.flags))
        }
        Err(e @ GeomError::EmptyMask { .. }) => (json!({ "status": "undefined", "reason": e.to_string() }), None),
        Err(e) => return Err(e.into()),
    };
    let mut b = CommandBlock::new(Command::Classify);
    b.data = json!({ "eps_scale": tol.eps_scale, "counts": counts, "map": ctx.thin(&tags), "isothermicity": iso });

    let g = &ctx.grid;
    let opt = |x: Option<f64>| x.map(s).unwrap_or_default();
    let optb = |x: Option<bool>| x.map(|b| b.to_string()).unwrap_or_default();
    ctx.csv(
        &mut b,
        "classification.csv",
        &["i", "j", "u", "v", "class", "b_minus", "b_plus", "norm_h", "iso_minus", "iso_plus", "costar_minus", "costar_plus"],
        classes.iter().enumerate().map(|(k, c)| {
            let (i, j) = g.ij(k);
            let (u, v) = g.node(i, j);
            let f = flags.as_ref().map(|f| f[k]);
            vec![
                i.to_string(),
                j.to_string(),
                s(u),
                s(v),
                tags[k].as_str().unwrap_or_default().to_string(),
                s(c.b_minus),
                s(c.b_plus),
                s(c.norm_h),
                optb(f.and_then(|f| f.minus)),
                optb(f.and_then(|f| f.plus)),
                opt(f.and_then(|f| f.costar_minus)),
                opt(f.and_then(|f| f.costar_plus)),
            ]
        }),
    )?;
    Ok(b)
}

fn lines(ctx: &Context) -> Outcome {
    let lc = &ctx.cfg.lines;
    let polylines = trace_lines(ctx.chart, &ctx.grid, lc.seeds, lc.max_steps, ctx.cfg.tolerances.eps_scale);
    let mut b = CommandBlock::new(Command::Lines);
    let summaries: Vec<Value> = polylines
        .iter()
        .map(|l| {
            json!({
                "id": l.id,
                "family": l.family,
                "seed": l.seed,
                "step": l.step,
                "stops": l.stops,
                "points": l.points.len(),
                "length": l.points.last().map_or(0.0, |p| p.s) - l.points.first().map_or(0.0, |p| p.s),
                "u_range": range(l.points.iter().map(|p| p.u)),
                "v_range": range(l.points.iter().map(|p| p.v)),
            })
        })
        .collect();
    b.data = json!({
        "seeds_per_axis": lc.seeds,
        "max_steps": lc.max_steps,
        "integrator": "rk4, arclength step = grid step / 4",
        "traced": polylines.len(),
        "skipped_seeds": 2 * lc.seeds * lc.seeds - polylines.len(),
        "lines": summaries,
    });
    ctx.csv(
        &mut b,
        "lines.csv",
        &["line", "family", "s", "u", "v", "x1", "x2", "x3", "x4"],
        polylines.iter().flat_map(|l| {
            let fam = json!(l.family).as_str().unwrap_or_default().to_string();
            l.points.iter().map(move |p| vec![l.id.to_string(), fam.clone(), s(p.s), s(p.u), s(p.v), s(p.x[0]), s(p.x[1]), s(p.x[2]), s(p.x[3])])
        }),
    )?;
    Ok(b)
}

fn index_cmd(ctx: &Context) -> Outcome {
    let ic = &ctx.cfg.index;
    let tol = &ctx.cfg.tolerances;
    let step = ctx.grid.du().min(ctx.grid.dv());
    let radii = ic.radii.clone().unwrap_or_else(|| vec![4.0 * step, 2.0 * step, step]);
    let same = 1e-8 * ctx.chart.domain.diameter();
    let mut b = CommandBlock::new(Command::Index);
    let mut per_sign = Vec::new();
    for sign in ic.sign.signs() {
        let label = sign_label(sign);
        let field = mixed_form_field_eps(ctx.chart, &ctx.grid, sign, tol.eps_scale)?;
        let clusters = singular_clusters(&ctx.grid, &field.singular_nodes);
        let mut results: Vec<bonnetlab::mixed::IndexResult> = Vec::new();
        for cluster in &clusters {
            let (i, j) = cluster[cluster.len() / 2];
            let p = refine_singular_point(ctx.chart, ctx.grid.node(i, j), sign)?;
            if results.iter().any(|r| (r.point.0 - p.0).hypot(r.point.1 - p.1) < same) {
                continue;
            }
            results.push(index(ctx.chart, p, sign, &radii)?);
        }
        for (k, r) in results.iter().enumerate() {
            b.checks.push(Check::within(format!("index_{label}[{k}]_integrality"), r.extrapolated, r.rounded() as f64, tol.index));
        }
        let sum: f64 = results.iter().map(|r| r.extrapolated).sum();
        if let Some(expected) = ic.expected_sum {
            b.checks.push(Check::within(format!("index_{label}_sum"), sum, expected, tol.index));
        }
        per_sign.push(json!({
            "sign": sign,
            "singular_nodes": field.singular_nodes.len(),
            "clusters": clusters.len(),
            "points": results,
            "sum": sum,
        }));
    }
    b.data = json!({ "loops": "parameter circles", "radii": radii, "signs": per_sign });
    Ok(b)
}

fn rescale(name: String, cv: &CheckValue, base: f64, tol: f64) -> Check {
    // the library tolerance is `base` times a scale; keep the scale
    Check::within(name, cv.value, cv.target, cv.tolerance / base * tol)
}

fn global(ctx: &Context) -> Outcome {
    let tol = &ctx.cfg.tolerances;
    let mut b = CommandBlock::new(Command::GlobalChecks);
    let mut reports = Vec::new();
    for sign in Sign::BOTH {
        let r = global_checks(ctx.chart, &ctx.grid, sign)?;
        let l = sign_label(sign);
        b.checks.push(rescale(format!("gauss_bonnet_{l}"), &r.gauss_bonnet, INTEGRAL_TOL, tol.integral));
        b.checks.push(rescale(format!("normal_euler_{l}"), &r.normal_euler, INTEGRAL_TOL, tol.integral));
        b.checks.push(rescale(format!("index_theorem_{l}"), &r.index_theorem, INTEGRAL_TOL, tol.integral));
        b.checks.push(rescale(format!("ricci_like_{l}"), &r.ricci_like, IDENTITY_TOL, tol.residual));
        b.checks.push(rescale(format!("chern_da1_{l}"), &r.chern_da1, IDENTITY_TOL, tol.residual));
        b.checks.push(rescale(format!("chern_da2_{l}"), &r.chern_da2, IDENTITY_TOL, tol.residual));
        for (k, ix) in r.indices.iter().enumerate() {
            b.checks.push(Check::within(format!("index_{l}[{k}]_integrality"), ix.extrapolated, ix.rounded() as f64, tol.index));
        }
        reports.push(r);
    }
    b.data = json!({ "loops": "parameter circles", "reports": reports });
    Ok(b)
}

fn is_zero_angle(t: f64) -> bool {
    let r = t.rem_euclid(std::f64::consts::TAU);
    r < 1e-14 || std::f64::consts::TAU - r < 1e-14
}

fn mates(ctx: &Context) -> Outcome {
    let mc = &ctx.cfg.mates;
    let tol = &ctx.cfg.tolerances;
    let fam = moduli_sample(ctx.chart, &ctx.grid, &mc.theta_minus, &mc.theta_plus)?;
    let mut b = CommandBlock::new(Command::Mates);
    for (k, smp) in fam.samples.iter().enumerate() {
        b.checks.push(Check::within(format!("mate[{k}]_metric"), smp.errors.metric, 0.0, tol.mate));
        b.checks.push(Check::within(format!("mate[{k}]_mean_curvature"), smp.errors.mean_curvature, 0.0, tol.mate));
        b.checks.push(Check::within(format!("mate[{k}]_normal_curvature"), smp.errors.normal_curvature, 0.0, tol.mate));
        if is_zero_angle(smp.theta0[0]) && is_zero_angle(smp.theta0[1]) {
            let rel = smp.to_source.residual / smp.to_source.diameter;
            b.checks.push(Check::within(format!("mate[{k}]_congruent_to_source"), rel, 0.0, tol.congruence));
        }
    }
    let diameter = fam.samples.first().map_or(1.0, |s| s.to_source.diameter);
    let mut min_pair = f64::INFINITY;
    for (a, row) in fam.pairwise_residual.iter().enumerate() {
        for &r in &row[a + 1..] {
            min_pair = min_pair.min(r / diameter);
        }
    }
    if fam.samples.len() > 1 {
        b.checks.push(Check::at_least("pairwise_noncongruence", min_pair, CONGRUENCE_FACTOR));
    }
    b.data = json!({
        "theta_minus": mc.theta_minus,
        "theta_plus": mc.theta_plus,
        "collapsed": fam.collapsed,
        "gauge": fam.gauge,
        "sup_a": fam.sup_a,
        "members": fam.samples.len(),
        "min_pairwise_residual_over_diameter": if min_pair.is_finite() { json!(min_pair) } else { Value::Null },
        "all_pairwise_noncongruent": fam.all_pairwise_noncongruent,
        "pairwise_residual": fam.pairwise_residual,
        "samples": fam.samples,
    });
    for (k, m) in fam.members.iter().enumerate() {
        let label = format!("mate {k} of {}, theta0 = {:?}", ctx.chart.name, m.theta0);
        ctx.mesh(&mut b, &format!("mate_{k:03}"), &label, &m.grid, &m.f_tilde)?;
    }
    Ok(b)
}

fn ratio_checks(b: &mut CommandBlock, rep: &DeformationReport, spread: f64, with_hopf: bool) {
    for r in &rep.ratios {
        let q = r.t_large / r.t_small;
        let tag = format!("{:e}/{:e}", r.t_large, r.t_small);
        let mut add = |what: &str, value: f64, target: f64| b.checks.push(Check::within(format!("{what}_ratio_{tag}"), value, target, spread * target));
        add("metric", r.metric, q * q);
        add("mean_curvature", r.mean_curvature, q * q);
        if with_hopf {
            if let Some(x) = r.preserved_hopf {
                add("preserved_hopf", x, q * q);
            }
            if let Some(x) = r.other_hopf {
                add("other_hopf", x, q);
            }
        }
    }
}

fn bending_checks(b: &mut CommandBlock, forms: &VariationForms, bend: &BendingField, ctx: &Context) {
    let tol = &ctx.cfg.tolerances;
    b.checks.push(Check::within("structure_equations", forms.residuals.max(), 0.0, tol.system));
    b.checks.push(Check::within("bivector_closure", bend.closure_bivector, 0.0, tol.system));
    b.checks.push(Check::within("field_closure", bend.closure_field, 0.0, tol.system));
    b.checks.push(Check::within("bending_equation", bend.bending_residual, 0.0, tol.system));
    b.checks.push(Check::within("skew_derivative", bend.skew_residual, 0.0, tol.system));
    b.checks.push(Check::at_least("nontriviality", bend.nontriviality_residual, tol.nontrivial));
}

fn deform(ctx: &Context) -> Outcome {
    let dc = &ctx.cfg.deform;
    let tol = &ctx.cfg.tolerances;
    let mut b = CommandBlock::new(Command::Deform);
    let (forms, bend, extra) = if dc.superconformal {
        let (forms, bend) = superconformal_bending(ctx.chart, &ctx.grid, dc.substeps)?;
        let sc = verify_superconformal(&bend, &dc.t_values);
        b.checks.push(Check::within("lift_conformality", sc.base_conformality, 0.0, tol.system));
        for smp in &sc.samples {
            b.checks.push(Check::within(format!("preserved_lift_variation_{:e}", smp.t), smp.lift_variation, 0.0, tol.lift));
            b.checks.push(Check::at_least(format!("other_lift_variation_{:e}", smp.t), smp.other_lift_variation, tol.lift));
        }
        (forms, bend, json!(sc))
    } else {
        let sign = dc.sign.signs()[0];
        let forms = build_variation_with(ctx.chart, &ctx.grid, sign, NormalGauge::Isotropic(sign), dc.substeps)?;
        let bend = integrate_bending(ctx.chart, &forms)?;
        (forms, bend, Value::Null)
    };
    bending_checks(&mut b, &forms, &bend, ctx);
    let rep = verify_deformation(&bend, &dc.t_values);
    ratio_checks(&mut b, &rep, tol.ratio, !dc.superconformal);
    b.data = json!({
        "mode": if dc.superconformal { "superconformal" } else { "isothermic" },
        "kind": forms.kind,
        "gauge": forms.gauge,
        "preserved": forms.preserved,
        "residuals": forms.residuals,
        "log_l_closure": forms.log_l_closure,
        "isothermic_residual": forms.isothermic_residual,
        "field_norm": bend.field_norm,
        "nontriviality_residual": bend.nontriviality_residual,
        "closure": { "bivector": bend.closure_bivector, "field": bend.closure_field },
        "bending_residual": bend.bending_residual,
        "skew_residual": bend.skew_residual,
        "deformation": rep,
        "superconformal": extra,
    });

    let g = &bend.grid;
    ctx.csv(
        &mut b,
        "field.csv",
        &["i", "j", "u", "v", "x1", "x2", "x3", "x4", "t1", "t2", "t3", "t4"],
        bend.source.iter().zip(&bend.t).enumerate().map(|(k, (f, t))| {
            let (i, j) = g.ij(k);
            let (u, v) = g.node(i, j);
            let mut row = vec![i.to_string(), j.to_string(), s(u), s(v)];
            row.extend(f.iter().chain(t.iter()).map(|&x| s(x)));
            row
        }),
    )?;
    for (k, &t) in dc.t_values.iter().enumerate() {
        ctx.mesh(&mut b, &format!("deformed_{k:02}"), &format!("{} moved by t = {t:e} along the bending field", ctx.chart.name), g, &bend.deformed(t))?;
    }
    Ok(b)
}

fn verify(ctx: &Context) -> Outcome {
    let tol = &ctx.cfg.tolerances;
    let mut b = CommandBlock::new(Command::Verify);
    let facts = match ctx.entry {
        Some(e) => certify(e)?,
        None => vec![],
    };
    for f in &facts {
        let name = json!(f.fact).as_str().unwrap_or_default().to_string();
        b.checks.push(Check::at_most(format!("fact_{name}"), f.value, f.limit));
    }
    let inv: Vec<PointInvariants> = geometries(ctx)?.iter().map(|g| g.invariants()).collect();
    b.checks.extend(identity_checks(&inv, tol.identity));

    let mut exterior = Vec::new();
    for sign in Sign::BOTH {
        let l = sign_label(sign);
        let field = match mixed_form_field_eps(ctx.chart, &ctx.grid, sign, tol.eps_scale) {
            Ok(f) => f,
            Err(e @ GeomError::EmptyMask { .. }) => {
                exterior.push(json!({ "sign": sign, "skipped": e.to_string() }));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let nodes: Vec<(f64, f64)> = (0..ctx.grid.len()).filter(|&k| field.mask[k]).map(|k| ctx.grid.node(ctx.grid.ij(k).0, ctx.grid.ij(k).1)).collect();
        // dOmega = -(2K +/- K_N), relative to max(|target|, scale^2)
        let errs: Vec<f64> = nodes
            .par_iter()
            .map(|&(u, v)| -> Result<f64, GeomError> {
                let g = PointGeometry::at(ctx.chart, u, v)?;
                let target = -(2.0 * g.sff.gauss_k(g.ambient_c) + sign.s() * g.sff.normal_k());
                let got = d_omega(ctx.chart, u, v, sign)?;
                Ok((got - target).abs() / target.abs().max(g.curvature_scale().powi(2)))
            })
            .collect::<Result<_, _>>()?;
        let worst = sup(errs);
        b.checks.push(Check::within(format!("exterior_derivative_{l}"), worst, 0.0, tol.exterior));
        exterior.push(json!({ "sign": sign, "points": nodes.len(), "worst_relative_error": worst }));
    }
    b.data = json!({
        "facts": facts,
        "exterior_derivative": exterior,
        "note": if ctx.entry.is_none() { json!("no certified facts for user charts") } else { Value::Null },
    });
    Ok(b)
}
