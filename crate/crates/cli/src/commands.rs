use std::f64::consts::FRAC_1_SQRT_2;

use igac::dynamics::{
    estimate_lambda_j, integrate_geodesic_with, integrate_jacobi, GeodesicTrajectory,
    IntegratorOptions,
};
use igac::geometry::{curvature, random_points, scalar_sign_classification};
use igac::ige::{compare_rates, fit_growth, volume_series, GrowthModel};
use igac::manifold::{fisher_metric_closed_form, fisher_metric_quadrature, QuadSpec};
use igac::spinchain::{
    analyze, spacing_histogram, ChainSpec, Sector, UnfoldOptions, VerdictOptions,
};
use igac::{Family, ManifoldModel, ParamPoint};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    parse_grid, parse_point, parse_vector, parse_window, ChainParams, CurvatureParams,
    GeodesicParams, Global, IgeParams, JacobiParams, MetricParams,
};
use crate::error::CliError;
use crate::output::{Sink, Table};
use crate::svg;

fn model_for(name: &str) -> Result<ManifoldModel, CliError> {
    ManifoldModel::by_name(name).map_err(|e| CliError::from(e).in_field("manifold"))
}

/// Grid, single point, or `None` when neither is configured.
fn points(
    grid: &Option<String>,
    point: &Option<String>,
    names: &[&str],
) -> Result<Option<Vec<Vec<f64>>>, CliError> {
    let base = point
        .as_deref()
        .map(|p| parse_point("point", p, names))
        .transpose()?;
    match (grid, base) {
        (Some(g), base) => Ok(Some(parse_grid("grid", g, names, base.as_deref())?)),
        (None, Some(b)) => Ok(Some(vec![b])),
        (None, None) => Ok(None),
    }
}

fn coord_names(model: &ManifoldModel) -> Vec<&str> {
    model.coord_names().iter().map(String::as_str).collect()
}

pub fn metric(p: &MetricParams, sink: &mut Sink) -> Result<Value, CliError> {
    let family: Family = p
        .family
        .parse()
        .map_err(|e: igac::Error| CliError::from(e).in_field("family"))?;
    let names = family.param_names();
    let pts = points(&p.grid, &p.point, names)?
        .ok_or_else(|| CliError::validation("grid", "give --grid or --point"))?;
    if p.nodes == 0 || !(p.tol > 0.0) {
        return Err(CliError::validation("nodes", "nodes and tol must be positive"));
    }
    let spec = QuadSpec {
        nodes: p.nodes,
        tol: p.tol,
        max_nodes: QuadSpec::default().max_nodes.max(p.nodes),
        ..QuadSpec::default()
    };
    let results: Vec<Result<_, igac::Error>> = pts
        .par_iter()
        .map(|x| {
            let theta = ParamPoint::new(x.clone());
            let closed = fisher_metric_closed_form(family, &theta)?;
            let quad = fisher_metric_quadrature(family, &theta, &spec)?;
            Ok((closed, quad))
        })
        .collect();

    let d = names.len();
    let mut cols: Vec<String> = names.iter().map(|n| format!("{n} [param]")).collect();
    for tag in ["closed", "quadrature"] {
        for a in names {
            for b in names {
                cols.push(format!("g_{a}_{b} [fisher {tag}]"));
            }
        }
    }
    cols.push("rel_err [-]".into());
    let mut table = Table::new(cols);
    let mut max_rel: f64 = 0.0;
    let mut max_est: f64 = 0.0;
    for (x, r) in pts.iter().zip(results) {
        let (closed, quad) = r?;
        let mut row = x.clone();
        // Row-major components.
        row.extend(closed.transpose().iter());
        row.extend(quad.metric.transpose().iter());
        let rel = (&quad.metric - &closed).norm() / closed.norm();
        row.push(rel);
        max_rel = max_rel.max(rel);
        max_est = max_est.max(quad.estimated_error);
        table.push(row);
    }
    debug_assert_eq!(table.columns.len(), d + 2 * d * d + 1);
    sink.table("metric", &table)?;
    let summary = json!({
        "kind": "metric",
        "family": family.name(),
        "points": pts.len(),
        "max_rel_err": max_rel,
        "max_estimated_error": max_est,
    });
    sink.json("metric.json", &summary)?;
    Ok(summary)
}

pub fn curvature_cmd(p: &CurvatureParams, g: &Global, sink: &mut Sink) -> Result<Value, CliError> {
    let model = model_for(&p.manifold)?;
    let names = coord_names(&model);
    if !(p.fd_step > 0.0) {
        return Err(CliError::validation("fd_step", "fd_step must be positive"));
    }
    let pts = match points(&p.grid, &p.point, &names)? {
        Some(pts) => pts,
        None => {
            if p.samples == 0 {
                return Err(CliError::validation("samples", "samples must be positive"));
            }
            random_points(&model, p.samples, g.seed)
        }
    };
    let reports: Vec<_> = pts
        .par_iter()
        .map(|x| curvature(&model, x, Some(p.fd_step)))
        .collect::<Result<_, _>>()?;

    let n = names.len();
    let mut cols: Vec<String> = names.iter().map(|c| format!("{c} [param]")).collect();
    cols.push("scalar [curvature]".into());
    for a in 0..n {
        for b in a + 1..n {
            cols.push(format!("K_{}_{} [curvature]", names[a], names[b]));
        }
    }
    cols.push("richardson_delta [curvature]".into());
    let mut table = Table::new(cols);
    for r in &reports {
        let mut row = r.point.clone();
        row.push(r.scalar);
        row.extend(r.sectional.iter().map(|s| s.value));
        row.push(r.richardson_delta);
        table.push(row);
    }
    sink.table("curvature", &table)?;
    let sign = scalar_sign_classification(&model, &pts)?;
    let summary = json!({
        "kind": "curvature",
        "manifold": model.name(),
        "points": pts.len(),
        "scalar_sign": sign.sign,
        "scalar_min": sign.min,
        "scalar_max": sign.max,
        "fd_step": p.fd_step,
    });
    sink.json("curvature.json", &summary)?;
    Ok(summary)
}

/// An expanding start for the named models when none is configured.
fn default_start(model: &ManifoldModel) -> (Vec<f64>, Vec<f64>) {
    let d = model.dim();
    match model.name() {
        "integrable" => (vec![1.0, 1.0], vec![1.0, 1.0]),
        "chaotic" => (vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]),
        "gaussian" => (vec![0.0, 1.0], vec![0.0, FRAC_1_SQRT_2]),
        name if name.starts_with("exponential_product") => (vec![1.0; d], vec![1.0; d]),
        _ => {
            let mut v = vec![0.0; d];
            v[0] = 1.0;
            (vec![0.0; d], v)
        }
    }
}

fn run_geodesic(
    p: &GeodesicParams,
) -> Result<(ManifoldModel, GeodesicTrajectory), CliError> {
    let model = model_for(&p.manifold)?;
    if !(p.tau_max > 0.0) || !p.tau_max.is_finite() {
        return Err(CliError::validation("tau_max", format!("tau_max must be positive, got {}", p.tau_max)));
    }
    if !(p.tol > 0.0) {
        return Err(CliError::validation("tol", "tol must be positive"));
    }
    if let Some(h) = p.max_step {
        if !(h > 0.0) {
            return Err(CliError::validation("max_step", "max_step must be positive"));
        }
    }
    let (t0, v0) = default_start(&model);
    let theta0 = match &p.theta0 {
        Some(s) => parse_vector("theta0", s)?,
        None => t0,
    };
    let v0 = match &p.v0 {
        Some(s) => parse_vector("v0", s)?,
        None => v0,
    };
    for (field, v) in [("theta0", &theta0), ("v0", &v0)] {
        if v.len() != model.dim() {
            return Err(CliError::validation(
                field,
                format!("expected {} components, got {}", model.dim(), v.len()),
            ));
        }
    }
    let opts = IntegratorOptions {
        max_step: p.max_step.unwrap_or(f64::INFINITY),
        ..IntegratorOptions::with_tol(p.tol)
    };
    let traj = integrate_geodesic_with(&model, &theta0, &v0, p.tau_max, &opts)?;
    Ok((model, traj))
}

const COLORS: [&str; 4] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad"];

pub fn geodesic(p: &GeodesicParams, g: &Global, sink: &mut Sink) -> Result<Value, CliError> {
    let (model, traj) = run_geodesic(p)?;
    let names = coord_names(&model);
    let mut cols = vec!["tau [affine]".to_string()];
    cols.extend(names.iter().map(|c| format!("{c} [param]")));
    cols.extend(names.iter().map(|c| format!("d{c}/dtau [param/affine]")));
    cols.push("speed [fisher length/affine]".into());
    let mut table = Table::new(cols);
    for i in 0..traj.len() {
        let mut row = vec![traj.tau[i]];
        row.extend(&traj.coords[i]);
        row.extend(&traj.velocity[i]);
        row.push(traj.speed[i]);
        table.push(row);
    }
    sink.table("geodesic", &table)?;
    if g.plot {
        let cols: Vec<Vec<f64>> = (0..names.len())
            .map(|k| traj.coords.iter().map(|x| x[k]).collect())
            .collect();
        let series: Vec<svg::Series> = names
            .iter()
            .enumerate()
            .map(|(k, n)| svg::Series {
                label: n,
                x: &traj.tau,
                y: &cols[k],
                color: COLORS[k % COLORS.len()],
                dashed: false,
            })
            .collect();
        sink.svg(
            "geodesic.svg",
            &svg::line_chart(&format!("Geodesic on {}", model.name()), "tau", "coordinate", &series),
        )?;
    }
    let summary = json!({
        "kind": "geodesic",
        "manifold": model.name(),
        "samples": traj.len(),
        "tau_final": traj.tau.last(),
        "termination": traj.termination,
        "speed_drift": traj.speed_drift(),
        "final_coords": traj.final_coords(),
        "final_velocity": traj.final_velocity(),
    });
    sink.json("geodesic.json", &summary)?;
    Ok(summary)
}

/// The coordinate direction least aligned with `v`, scaled to unit g-norm.
fn transverse_unit(model: &ManifoldModel, x: &[f64], v: &[f64]) -> Result<Vec<f64>, CliError> {
    let gm = model.metric(x)?;
    let n = v.len();
    let gv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| gm[(i, j)] * v[j]).sum()).collect();
    let best = (0..n)
        .min_by(|&a, &b| {
            let ca = gv[a].abs() / gm[(a, a)].sqrt();
            let cb = gv[b].abs() / gm[(b, b)].sqrt();
            ca.total_cmp(&cb)
        })
        .unwrap_or(0);
    let mut e = vec![0.0; n];
    e[best] = 1.0 / gm[(best, best)].sqrt();
    Ok(e)
}

pub fn jacobi(p: &JacobiParams, g: &Global, sink: &mut Sink) -> Result<Value, CliError> {
    let (model, traj) = run_geodesic(&p.geodesic)?;
    let n = model.dim();
    let j0 = match &p.j0 {
        Some(s) => parse_vector("j0", s)?,
        None => vec![0.0; n],
    };
    let dj0 = match &p.dj0 {
        Some(s) => parse_vector("dj0", s)?,
        None => transverse_unit(&model, &traj.coords[0], &traj.velocity[0])?,
    };
    for (field, v) in [("j0", &j0), ("dj0", &dj0)] {
        if v.len() != n {
            return Err(CliError::validation(field, format!("expected {n} components, got {}", v.len())));
        }
    }
    let tau_end = *traj.tau.last().expect("non-empty");
    let window = match &p.window {
        Some(s) => parse_window("window", s)?,
        None => (tau_end / 3.0, tau_end),
    };
    let traj = integrate_jacobi(&model, &traj, &j0, &dj0)?;
    let est = estimate_lambda_j(&traj, window).map_err(|e| CliError::from(e).in_field("window"))?;
    let samples = traj.jacobi.as_ref().expect("jacobi filled");

    let names = coord_names(&model);
    let mut cols = vec!["tau [affine]".to_string()];
    cols.extend(names.iter().map(|c| format!("J_{c} [param]")));
    cols.extend(names.iter().map(|c| format!("DJ_{c}/dtau [param/affine]")));
    cols.push("norm [fisher length]".into());
    let mut table = Table::new(cols);
    for (t, s) in traj.tau.iter().zip(samples) {
        let mut row = vec![*t];
        row.extend(&s.field);
        row.extend(&s.derivative);
        row.push(s.norm);
        table.push(row);
    }
    sink.table("jacobi", &table)?;
    if g.plot {
        let (x, y): (Vec<f64>, Vec<f64>) = traj
            .tau
            .iter()
            .zip(samples)
            .filter(|(_, s)| s.norm > 0.0)
            .map(|(t, s)| (*t, s.norm.ln()))
            .unzip();
        sink.svg(
            "jacobi.svg",
            &svg::line_chart(
                &format!("Jacobi field on {}", model.name()),
                "tau",
                "log |J|",
                &[svg::Series {
                    label: "log |J|",
                    x: &x,
                    y: &y,
                    color: COLORS[0],
                    dashed: false,
                }],
            ),
        )?;
    }
    let summary = json!({
        "kind": "jacobi",
        "manifold": model.name(),
        "j0": j0,
        "dj0": dj0,
        "window": [window.0, window.1],
        "lambda_j": est.lambda_j,
        "fit_r2": est.fit_r2,
        "samples": est.samples,
        "termination": traj.termination,
    });
    sink.json("jacobi.json", &summary)?;
    Ok(summary)
}

pub fn ige(p: &IgeParams, g: &Global, sink: &mut Sink) -> Result<Value, CliError> {
    let (model, traj) = run_geodesic(&p.geodesic)?;
    let series = volume_series(&model, &traj, p.quad_nodes).map_err(|e| CliError::from(e).in_field("quad_nodes"))?;
    let tau_end = *traj.tau.last().expect("non-empty");
    let window = match &p.window {
        Some(s) => parse_window("window", s)?,
        None => (tau_end / 10.0, tau_end),
    };
    let fit = fit_growth(&series, window).map_err(|e| CliError::from(e).in_field("window"))?;
    let comparison = match p.lambda_j {
        Some(l) if fit.selected == GrowthModel::Linear => Some(compare_rates(&fit, l)?),
        _ => None,
    };

    let mut table = Table::new(vec![
        "tau [affine]".into(),
        "volume [fisher volume]".into(),
        "entropy [nat]".into(),
    ]);
    for i in 0..series.tau.len() {
        table.push(vec![series.tau[i], series.volume[i], series.entropy[i]]);
    }
    sink.table("ige", &table)?;
    let mut explored = Table::new(vec!["tau [affine]".into(), "explored [fisher volume]".into()]);
    for (t, v) in series.grid.iter().zip(&series.explored) {
        explored.push(vec![*t, *v]);
    }
    sink.table("explored", &explored)?;

    if g.plot {
        let log_fit: Vec<f64> = series
            .tau
            .iter()
            .map(|t| fit.logarithmic.rate * t.ln() + fit.logarithmic.offset)
            .collect();
        let lin_fit: Vec<f64> = series
            .tau
            .iter()
            .map(|t| fit.linear.rate * t + fit.linear.offset)
            .collect();
        let log_label = format!("{:.4} log tau + {:.4}", fit.logarithmic.rate, fit.logarithmic.offset);
        let lin_label = format!("{:.4} tau + {:.4}", fit.linear.rate, fit.linear.offset);
        sink.svg(
            "ige.svg",
            &svg::line_chart(
                &format!("IGE on {} ({:?} growth selected)", model.name(), fit.selected),
                "tau",
                "S(tau)",
                &[
                    svg::Series {
                        label: "S(tau)",
                        x: &series.tau,
                        y: &series.entropy,
                        color: COLORS[0],
                        dashed: false,
                    },
                    svg::Series {
                        label: &log_label,
                        x: &series.tau,
                        y: &log_fit,
                        color: COLORS[1],
                        dashed: fit.selected != GrowthModel::Logarithmic,
                    },
                    svg::Series {
                        label: &lin_label,
                        x: &series.tau,
                        y: &lin_fit,
                        color: COLORS[2],
                        dashed: fit.selected != GrowthModel::Linear,
                    },
                ],
            ),
        )?;
    }
    let summary = json!({
        "kind": "ige",
        "manifold": model.name(),
        "degenerate": series.degenerate,
        "termination": traj.termination,
        "selected": fit.selected,
        "fit": fit,
        "comparison": comparison,
    });
    sink.json("ige.json", &summary)?;
    Ok(summary)
}

pub fn chain(p: &ChainParams, g: &Global, sink: &mut Sink) -> Result<Value, CliError> {
    let sector: Sector = p
        .sector
        .parse()
        .map_err(|e: igac::Error| CliError::from(e).in_field("sector"))?;
    let spec = ChainSpec::new(p.n, p.hx, p.hy, sector);
    spec.validate().map_err(|e| CliError::from(e).in_field("n"))?;
    if p.bins < 5 {
        return Err(CliError::validation("bins", "need at least 5 bins"));
    }
    let unfold = UnfoldOptions {
        poly_degree: p.poly_degree,
        trim_fraction: p.trim,
        ..UnfoldOptions::default()
    };
    let verdict = VerdictOptions {
        margin: p.margin,
        max_ks: p.max_ks,
    };
    let rec = analyze(&spec, &unfold, &verdict)?;

    let mut eig = Table::new(vec!["index [count]".into(), "energy [coupling]".into()]);
    for (i, e) in rec.eigenvalues.iter().enumerate() {
        eig.push(vec![i as f64, *e]);
    }
    sink.table("eigenvalues", &eig)?;
    let mut sp = Table::new(vec!["index [count]".into(), "spacing [mean spacing]".into()]);
    for (i, s) in rec.unfolded_spacings.iter().enumerate() {
        sp.push(vec![i as f64, *s]);
    }
    sink.table("spacings", &sp)?;
    let hist = spacing_histogram(&rec.unfolded_spacings, p.bins)?;
    let mut ht = Table::new(vec![
        "lo [mean spacing]".into(),
        "hi [mean spacing]".into(),
        "density [1/mean spacing]".into(),
        "poisson [1/mean spacing]".into(),
        "wigner [1/mean spacing]".into(),
    ]);
    for i in 0..p.bins {
        ht.push(vec![hist.edges[i], hist.edges[i + 1], hist.density[i], hist.poisson[i], hist.wigner[i]]);
    }
    sink.table("histogram", &ht)?;
    if g.plot {
        let grid: Vec<f64> = (0..=200).map(|i| hist.edges[p.bins] * i as f64 / 200.0).collect();
        let pois: Vec<f64> = grid.iter().map(|&s| igac::spinchain::poisson_density(s)).collect();
        let wig: Vec<f64> = grid.iter().map(|&s| igac::spinchain::wigner_density(s)).collect();
        sink.svg(
            "lsd.svg",
            &svg::histogram(
                &format!(
                    "Level spacings, n = {}, (hx, hy) = ({}, {}), {}",
                    p.n,
                    p.hx,
                    p.hy,
                    sector.name()
                ),
                "s",
                "P(s)",
                &svg::Bars {
                    edges: &hist.edges,
                    heights: &hist.density,
                },
                &[
                    svg::Series {
                        label: "Poisson",
                        x: &grid,
                        y: &pois,
                        color: COLORS[1],
                        dashed: false,
                    },
                    svg::Series {
                        label: "Wigner-Dyson",
                        x: &grid,
                        y: &wig,
                        color: COLORS[2],
                        dashed: true,
                    },
                ],
            ),
        )?;
    }
    let summary = json!({
        "kind": "chain",
        "spec": rec.spec,
        "levels": rec.eigenvalues.len(),
        "spacings": rec.unfolded_spacings.len(),
        "ks_poisson": rec.ks_poisson,
        "ks_wigner": rec.ks_wigner,
        "verdict": rec.verdict,
    });
    sink.json("chain.json", &summary)?;
    Ok(summary)
}
