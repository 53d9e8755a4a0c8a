//! Levi-Civita connection and curvature of a [`ManifoldModel`] by central
//! differences of the metric field.
//!
//! Index conventions: `Γ^ρ_μν` is stored as `[ρ][μ][ν]` and
//!
//! ```text
//! R^a_bcd = ∂_c Γ^a_bd − ∂_d Γ^a_bc + Γ^a_ec Γ^e_bd − Γ^a_ed Γ^e_bc,
//! R_bd    = R^a_bad,        R = g^bd R_bd,
//! ```
//!
//! so the round sphere has positive curvature and the Jacobi equation reads
//! `D²J/dτ² + R^μ_νρσ u^ν J^ρ u^σ = 0`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;
use crate::tensor::{Tensor3, Tensor4};

/// Default relative finite-difference step for metric derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Allowed scalar-curvature change between steps `h` and `h/2`, relative
/// to `max(1, |R|)`.
pub const RICHARDSON_TOL: f64 = 1e-4;

/// Absolute tolerance used when classifying curvature signs.
pub const SIGN_TOL: f64 = 1e-6;

fn steps(theta: &[f64], fd_step: f64) -> Vec<f64> {
    theta.iter().map(|x| fd_step * x.abs().max(1.0)).collect()
}

fn inverse(theta: &[f64], g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::SingularMetric {
            point: theta.to_vec(),
        })
}

/// `Γ^ρ_μν` at `theta`: the model's closed form when it has one, central
/// differences of the metric otherwise.
pub fn christoffel(model: &ManifoldModel, theta: &[f64], fd_step: f64) -> Result<Tensor3> {
    model.check_point_with_margin(theta, &steps(theta, fd_step))?;
    match model.christoffel_closed_form(theta) {
        Some(g) => Ok(g),
        None => christoffel_fd_unchecked(model, theta, &steps(theta, fd_step)),
    }
}

/// Connection for integrators that must be able to approach a regular
/// domain edge: the difference step shrinks to half the distance to the
/// nearest edge.
pub(crate) fn christoffel_near_edge(model: &ManifoldModel, theta: &[f64]) -> Result<Tensor3> {
    model.check_point(theta)?;
    if let Some(g) = model.christoffel_closed_form(theta) {
        return Ok(g);
    }
    let h: Vec<f64> = steps(theta, DEFAULT_FD_STEP)
        .iter()
        .zip(theta)
        .zip(model.domain())
        .map(|((&h, &x), dom)| h.min(0.5 * (x - dom.lo)).min(0.5 * (dom.hi - x)))
        .collect();
    christoffel_fd_unchecked(model, theta, &h)
}

/// Always uses central differences, even when a closed form is registered.
pub fn christoffel_fd(model: &ManifoldModel, theta: &[f64], fd_step: f64) -> Result<Tensor3> {
    let h = steps(theta, fd_step);
    model.check_point_with_margin(theta, &h)?;
    christoffel_fd_unchecked(model, theta, &h)
}

fn christoffel_fd_unchecked(model: &ManifoldModel, theta: &[f64], h: &[f64]) -> Result<Tensor3> {
    let n = model.dim();
    let g = model.metric_unchecked(theta);
    let ginv = inverse(theta, &g)?;
    // dg[l][(i, j)] = ∂_l g_ij
    let mut dg = Vec::with_capacity(n);
    let mut p = theta.to_vec();
    for l in 0..n {
        p[l] = theta[l] + h[l];
        let gp = model.metric_unchecked(&p);
        p[l] = theta[l] - h[l];
        let gm = model.metric_unchecked(&p);
        p[l] = theta[l];
        dg.push((gp - gm) / (2.0 * h[l]));
    }
    let mut gamma = Tensor3::zeros(n);
    for r in 0..n {
        for m in 0..n {
            for nu in m..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(r, l)] * (dg[m][(l, nu)] + dg[nu][(l, m)] - dg[l][(m, nu)]);
                }
                gamma.set(r, m, nu, 0.5 * s);
                gamma.set(r, nu, m, 0.5 * s);
            }
        }
    }
    Ok(gamma)
}

/// `R^a_bcd` from the connection and its central differences.
pub fn riemann(model: &ManifoldModel, theta: &[f64], fd_step: f64) -> Result<Tensor4> {
    let h = steps(theta, fd_step);
    let margin: Vec<f64> = h.iter().map(|x| 2.0 * x).collect();
    model.check_point_with_margin(theta, &margin)?;
    let n = model.dim();
    let connection = |p: &[f64]| match model.christoffel_closed_form(p) {
        Some(g) => Ok(g),
        None => christoffel_fd_unchecked(model, p, &steps(p, fd_step)),
    };
    let gamma = connection(theta)?;
    // dgamma[c] = ∂_c Γ
    let mut dgamma = Vec::with_capacity(n);
    let mut p = theta.to_vec();
    for c in 0..n {
        p[c] = theta[c] + h[c];
        let gp = connection(&p)?;
        p[c] = theta[c] - h[c];
        let gm = connection(&p)?;
        p[c] = theta[c];
        let mut d = Tensor3::zeros(n);
        for (i, (a, b)) in gp.as_slice().iter().zip(gm.as_slice()).enumerate() {
            let (x, rest) = (i / (n * n), i % (n * n));
            d.set(x, rest / n, rest % n, (a - b) / (2.0 * h[c]));
        }
        dgamma.push(d);
    }
    Ok(assemble_riemann(&gamma, &dgamma))
}

fn assemble_riemann(gamma: &Tensor3, dgamma: &[Tensor3]) -> Tensor4 {
    let n = gamma.dim();
    let mut r = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in (c + 1)..n {
                    let mut v = dgamma[c].get(a, b, d) - dgamma[d].get(a, b, c);
                    for e in 0..n {
                        v += gamma.get(a, e, c) * gamma.get(e, b, d)
                            - gamma.get(a, e, d) * gamma.get(e, b, c);
                    }
                    r.set(a, b, c, d, v);
                    r.set(a, b, d, c, -v);
                }
            }
        }
    }
    r
}

/// Riemann tensor for the Jacobi equation: closed form when registered,
/// finite differences otherwise.
pub fn riemann_at(model: &ManifoldModel, theta: &[f64]) -> Result<Tensor4> {
    match model.riemann_closed_form(theta) {
        Some(r) => Ok(r),
        None => riemann(model, theta, DEFAULT_FD_STEP),
    }
}

/// Sectional curvature of one plane of the `g`-orthonormalized coordinate frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sectional {
    pub rho: usize,
    pub sigma: usize,
    pub value: f64,
}

/// Connection and curvature at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub christoffel: Tensor3,
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    /// One entry per unordered plane `rho < sigma`.
    pub sectional: Vec<Sectional>,
    pub fd_step: f64,
    /// `|R(h) − R(h/2)|` from the Richardson consistency check.
    pub richardson_delta: f64,
}

impl CurvatureReport {
    /// `Σ_{ρ≠σ} K(e_ρ, e_σ)`, which equals the scalar curvature.
    pub fn sectional_sum(&self) -> f64 {
        2.0 * self.sectional.iter().map(|s| s.value).sum::<f64>()
    }
}

/// Ricci tensor and scalar curvature from `R^a_bcd`.
pub fn ricci_and_scalar(riemann: &Tensor4, ginv: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = riemann.dim();
    let mut ricci = DMatrix::zeros(n, n);
    for b in 0..n {
        for d in 0..n {
            ricci[(b, d)] = (0..n).map(|a| riemann.get(a, b, a, d)).sum();
        }
    }
    let scalar = (0..n)
        .flat_map(|b| (0..n).map(move |d| (b, d)))
        .map(|(b, d)| ginv[(b, d)] * ricci[(b, d)])
        .sum();
    (ricci, scalar)
}

/// Gram–Schmidt of the coordinate basis under `g`; columns are the frame.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut frame = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut v = nalgebra::DVector::<f64>::zeros(n);
        v[i] = 1.0;
        for j in 0..i {
            let f = frame.column(j).clone_owned();
            let proj = (f.transpose() * g * &v)[(0, 0)];
            v -= f * proj;
        }
        let norm = (v.transpose() * g * &v)[(0, 0)].sqrt();
        frame.set_column(i, &(v / norm));
    }
    frame
}

/// Sectional curvatures `K(f_ρ, f_σ)` for every plane of the orthonormal frame.
pub fn sectional_curvatures(riemann: &Tensor4, g: &DMatrix<f64>) -> Vec<Sectional> {
    let n = g.nrows();
    let frame = orthonormal_frame(g);
    // R_abcd = g_ae R^e_bcd
    let lowered = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        (0..n).map(|e| g[(a, e)] * riemann.get(e, b, c, d)).sum()
    };
    let mut out = Vec::new();
    for rho in 0..n {
        for sigma in (rho + 1)..n {
            let u = frame.column(rho);
            let v = frame.column(sigma);
            let mut k = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let w = u[a] * v[b] * u[c] * v[d];
                            if w != 0.0 {
                                k += w * lowered(a, b, c, d);
                            }
                        }
                    }
                }
            }
            out.push(Sectional {
                rho,
                sigma,
                value: k,
            });
        }
    }
    out
}

/// Full curvature report at `theta`, with a two-step Richardson check.
///
/// `fd_step` defaults to [`DEFAULT_FD_STEP`]; the scalar curvature is also
/// computed at half the step and the two must agree to within
/// [`RICHARDSON_TOL`]`·max(1, |R|)`.
pub fn curvature(
    model: &ManifoldModel,
    theta: &[f64],
    fd_step: Option<f64>,
) -> Result<CurvatureReport> {
    let h = fd_step.unwrap_or(DEFAULT_FD_STEP);
    if !(h > 0.0) {
        return Err(Error::Validation(format!("fd_step must be positive, got {h}")));
    }
    let christoffel = christoffel(model, theta, h)?;
    let riemann_h = riemann(model, theta, h)?;
    let riemann_half = riemann(model, theta, 0.5 * h)?;
    let g = model.metric_unchecked(theta);
    let ginv = inverse(theta, &g)?;
    let (ricci, scalar) = ricci_and_scalar(&riemann_h, &ginv);
    let (_, scalar_half) = ricci_and_scalar(&riemann_half, &ginv);
    let delta = (scalar - scalar_half).abs();
    if delta > RICHARDSON_TOL * scalar.abs().max(1.0) {
        return Err(Error::InconsistentCurvature {
            coarse: scalar,
            fine: scalar_half,
        });
    }
    let sectional = sectional_curvatures(&riemann_h, &g);
    Ok(CurvatureReport {
        point: theta.to_vec(),
        christoffel,
        riemann: riemann_h,
        ricci,
        scalar,
        sectional,
        fd_step: h,
        richardson_delta: delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarSign {
    Negative,
    NonNegative,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub sign: ScalarSign,
    pub min: f64,
    pub max: f64,
}

/// Reproducible sample points: positive coordinates uniform on `[0.3, 4]`,
/// unbounded ones on `[−3, 3]`.
pub fn random_points(model: &ManifoldModel, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            model
                .domain()
                .iter()
                .map(|d| {
                    if d.lo == 0.0 {
                        rng.random_range(0.3..4.0)
                    } else {
                        rng.random_range(-3.0..3.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Classifies the sign of the scalar curvature over a sample of points.
/// Values within [`SIGN_TOL`] of zero count as non-negative.
pub fn scalar_sign_classification(
    model: &ManifoldModel,
    sample_points: &[Vec<f64>],
) -> Result<SignReport> {
    if sample_points.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for p in sample_points {
        let r = curvature(model, p, None)?.scalar;
        min = min.min(r);
        max = max.max(r);
    }
    let sign = if max < -SIGN_TOL {
        ScalarSign::Negative
    } else if min >= -SIGN_TOL {
        ScalarSign::NonNegative
    } else {
        ScalarSign::Mixed
    };
    Ok(SignReport { sign, min, max })
}
