//! Geodesic flow and geodesic deviation on a statistical manifold.
//!
//! Geodesics solve `Θ̈^μ + Γ^μ_νρ Θ̇^ν Θ̇^ρ = 0`. Jacobi fields solve the
//! deviation equation `D²J/dτ² + R^μ_νρσ u^ν J^ρ u^σ = 0`, integrated as the
//! first-order system
//!
//! ```text
//! dJ/dτ = W − Γ(u, J)
//! dW/dτ = −Γ(u, W) − R(·, u, J, u)
//! ```
//!
//! with `W = DJ/dτ`, together with the geodesic itself.

pub mod ode;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel_near_edge, riemann_at};
use crate::manifold::{quadratic_form, Block, ManifoldModel};
use crate::stats::fit_line;
use crate::tensor::Tensor3;
use ode::{OdeOptions, Stop};

/// Settings for geodesic and Jacobi integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Mixed absolute/relative local error tolerance per step.
    pub tol: f64,
    /// Largest step; bounds the spacing of the recorded grid.
    pub max_step: f64,
    /// Distance from a domain edge that ends the run.
    pub boundary_eps: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_step: f64::INFINITY,
            boundary_eps: 1e-9,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            max_step: self.max_step,
            ..OdeOptions::with_tol(self.tol)
        }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// A coordinate came within `boundary_eps` of its domain edge.
    Boundary { tau: f64, coord: String },
}

/// Jacobi field and its covariant derivative at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiSample {
    pub field: Vec<f64>,
    /// `DJ/dτ`.
    pub derivative: Vec<f64>,
    /// `‖J‖` in the metric at the current point.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTrajectory {
    pub model: String,
    pub tau: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
    pub velocity: Vec<Vec<f64>>,
    /// Metric norm of the velocity.
    pub speed: Vec<f64>,
    pub jacobi: Option<Vec<JacobiSample>>,
    pub termination: Termination,
    pub options: IntegratorOptions,
}

impl GeodesicTrajectory {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn final_coords(&self) -> &[f64] {
        self.coords.last().expect("trajectories hold the initial point")
    }

    pub fn final_velocity(&self) -> &[f64] {
        self.velocity.last().expect("trajectories hold the initial point")
    }

    /// Largest deviation of the speed from its initial value.
    pub fn speed_drift(&self) -> f64 {
        let s0 = self.speed[0];
        self.speed.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max)
    }
}

/// True when the metric blows up at the lower edge of coordinate `i`, which
/// then lies at infinite distance and cannot be reached by a geodesic.
fn edge_is_at_infinity(model: &ManifoldModel, i: usize) -> bool {
    let Some(blocks) = model.blocks() else {
        return false;
    };
    let mut start = 0;
    for b in blocks {
        let end = start + b.dim();
        if (start..end).contains(&i) {
            return match b {
                Block::Scale { .. } => true,
                Block::Gaussian => i == start + 1,
                Block::Flat => false,
            };
        }
        start = end;
    }
    false
}

fn boundary_hit(model: &ManifoldModel, x: &[f64], eps: f64) -> Option<usize> {
    x.iter().zip(model.domain()).enumerate().find_map(|(i, (&v, dom))| {
        if !v.is_finite() || !dom.contains(v) {
            return Some(i);
        }
        if edge_is_at_infinity(model, i) {
            return None;
        }
        let near = (dom.lo.is_finite() && v - dom.lo <= eps) || (dom.hi.is_finite() && dom.hi - v <= eps);
        near.then_some(i)
    })
}

fn connection(model: &ManifoldModel, x: &[f64]) -> Result<Tensor3> {
    christoffel_near_edge(model, x)
}

/// `Γ^μ_αβ a^α b^β`
fn contract(gamma: &Tensor3, a: &[f64], b: &[f64], out: &mut [f64]) {
    let n = a.len();
    for (mu, o) in out.iter_mut().enumerate().take(n) {
        let mut s = 0.0;
        for al in 0..n {
            if a[al] == 0.0 {
                continue;
            }
            for be in 0..n {
                s += gamma.get(mu, al, be) * a[al] * b[be];
            }
        }
        *o = s;
    }
}

fn speed(model: &ManifoldModel, x: &[f64], v: &[f64]) -> f64 {
    quadratic_form(&model.metric_unchecked(x), v, v).max(0.0).sqrt()
}

/// Integrates a geodesic with default options and local tolerance `tol`.
pub fn integrate_geodesic(
    model: &ManifoldModel,
    theta0: &[f64],
    v0: &[f64],
    tau_max: f64,
    tol: f64,
) -> Result<GeodesicTrajectory> {
    integrate_geodesic_with(model, theta0, v0, tau_max, &IntegratorOptions::with_tol(tol))
}

pub fn integrate_geodesic_with(
    model: &ManifoldModel,
    theta0: &[f64],
    v0: &[f64],
    tau_max: f64,
    opts: &IntegratorOptions,
) -> Result<GeodesicTrajectory> {
    validate(model, theta0, v0, tau_max, opts)?;
    let n = model.dim();
    let mut y0 = theta0.to_vec();
    y0.extend_from_slice(v0);
    let mut acc = vec![0.0; n];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (x, u) = y.split_at(n);
        let gamma = connection(model, x)?;
        contract(&gamma, u, u, &mut acc);
        dy[..n].copy_from_slice(u);
        for i in 0..n {
            dy[n + i] = -acc[i];
        }
        Ok(())
    };
    let mut hit = None;
    let sol = ode::integrate(rhs, 0.0, &y0, tau_max, None, &opts.ode(), |_, y| {
        hit = boundary_hit(model, &y[..n], opts.boundary_eps);
        hit.is_some()
    })?;
    Ok(assemble(model, sol, hit, n, None, opts))
}

fn validate(
    model: &ManifoldModel,
    theta0: &[f64],
    v0: &[f64],
    tau_max: f64,
    opts: &IntegratorOptions,
) -> Result<()> {
    model.check_point(theta0)?;
    if v0.len() != model.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            got: v0.len(),
        });
    }
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(Error::Validation(format!("tau_max must be positive, got {tau_max}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Validation(format!("tol must be positive, got {}", opts.tol)));
    }
    if !(opts.max_step > 0.0) {
        return Err(Error::Validation("max_step must be positive".into()));
    }
    Ok(())
}

fn assemble(
    model: &ManifoldModel,
    sol: ode::Solution,
    hit: Option<usize>,
    n: usize,
    jacobi: Option<Vec<JacobiSample>>,
    opts: &IntegratorOptions,
) -> GeodesicTrajectory {
    let termination = match (sol.stop, hit) {
        (Stop::Event { t }, Some(i)) => Termination::Boundary {
            tau: t,
            coord: model.coord_names()[i].clone(),
        },
        _ => Termination::Completed,
    };
    let mut coords = Vec::with_capacity(sol.t.len());
    let mut velocity = Vec::with_capacity(sol.t.len());
    let mut speeds = Vec::with_capacity(sol.t.len());
    for y in &sol.y {
        let (x, u) = (&y[..n], &y[n..2 * n]);
        speeds.push(speed(model, x, u));
        coords.push(x.to_vec());
        velocity.push(u.to_vec());
    }
    GeodesicTrajectory {
        model: model.name().to_string(),
        tau: sol.t,
        coords,
        velocity,
        speed: speeds,
        jacobi,
        termination,
        options: *opts,
    }
}

/// Co-integrates the geodesic of `traj` with a Jacobi field whose initial
/// value is `j0` and initial covariant derivative `DJ/dτ` is `dj0`, and
/// records it on the trajectory's grid.
pub fn integrate_jacobi(
    model: &ManifoldModel,
    traj: &GeodesicTrajectory,
    j0: &[f64],
    dj0: &[f64],
) -> Result<GeodesicTrajectory> {
    let n = model.dim();
    if traj.model != model.name() || traj.coords.first().map(Vec::len) != Some(n) {
        return Err(Error::Validation(format!(
            "trajectory of `{}` does not belong to model `{}`",
            traj.model,
            model.name()
        )));
    }
    for v in [j0, dj0] {
        if v.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: v.len(),
            });
        }
    }
    let tau_max = *traj.tau.last().expect("non-empty trajectory");
    let mut y0 = traj.coords[0].clone();
    y0.extend_from_slice(&traj.velocity[0]);
    y0.extend_from_slice(j0);
    y0.extend_from_slice(dj0);

    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let x = &y[..n];
        let u = &y[n..2 * n];
        let j = &y[2 * n..3 * n];
        let w = &y[3 * n..];
        let gamma = connection(model, x)?;
        let r = riemann_at(model, x)?;
        dy[..n].copy_from_slice(u);
        contract(&gamma, u, u, &mut t1);
        for i in 0..n {
            dy[n + i] = -t1[i];
        }
        contract(&gamma, u, j, &mut t1);
        for i in 0..n {
            dy[2 * n + i] = w[i] - t1[i];
        }
        contract(&gamma, u, w, &mut t1);
        for (mu, out) in t2.iter_mut().enumerate() {
            let mut s = 0.0;
            for nu in 0..n {
                for rho in 0..n {
                    for sig in 0..n {
                        s += r.get(mu, nu, rho, sig) * u[nu] * j[rho] * u[sig];
                    }
                }
            }
            *out = s;
        }
        for i in 0..n {
            dy[3 * n + i] = -t1[i] - t2[i];
        }
        Ok(())
    };
    let opts = traj.options;
    let mut hit = None;
    let sol = ode::integrate(
        rhs,
        0.0,
        &y0,
        tau_max,
        Some(&traj.tau[1..]),
        &opts.ode(),
        |_, y| {
            hit = boundary_hit(model, &y[..n], opts.boundary_eps);
            hit.is_some()
        },
    )?;
    let jacobi = sol
        .y
        .iter()
        .map(|y| {
            let x = &y[..n];
            let j = &y[2 * n..3 * n];
            let g = model.metric_unchecked(x);
            JacobiSample {
                field: j.to_vec(),
                derivative: y[3 * n..].to_vec(),
                norm: quadratic_form(&g, j, j).max(0.0).sqrt(),
            }
        })
        .collect();
    Ok(assemble(model, sol, hit, n, Some(jacobi), &opts))
}

/// Exponential growth rate of `‖J‖` over a window of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda_j: f64,
    pub fit_r2: f64,
    pub samples: usize,
}

/// Least-squares slope of `log(‖J(τ)‖/‖J(τ_w0)‖)` against `τ` on the window.
pub fn estimate_lambda_j(traj: &GeodesicTrajectory, window: (f64, f64)) -> Result<LambdaEstimate> {
    let jacobi = traj
        .jacobi
        .as_ref()
        .ok_or_else(|| Error::Validation("trajectory carries no Jacobi field".into()))?;
    let (a, b) = window;
    let last = *traj.tau.last().expect("non-empty trajectory");
    if !(a < b) || a < 0.0 || b > last * (1.0 + 1e-12) {
        return Err(Error::Validation(format!(
            "window [{a}, {b}] is not inside the trajectory grid [0, {last}]"
        )));
    }
    let (taus, norms): (Vec<f64>, Vec<f64>) = traj
        .tau
        .iter()
        .zip(jacobi)
        .filter(|(t, _)| **t >= a && **t <= b)
        .map(|(t, s)| (*t, s.norm))
        .unzip();
    const MIN_SAMPLES: usize = 10;
    if taus.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: taus.len(),
        });
    }
    if norms.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Validation("‖J‖ vanishes inside the window".into()));
    }
    let ref_norm = norms[0];
    let logs: Vec<f64> = norms.iter().map(|v| (v / ref_norm).ln()).collect();
    let fit = fit_line(&taus, &logs).ok_or(Error::InsufficientData {
        needed: MIN_SAMPLES,
        got: taus.len(),
    })?;
    Ok(LambdaEstimate {
        lambda_j: fit.slope,
        fit_r2: fit.r2,
        samples: taus.len(),
    })
}
