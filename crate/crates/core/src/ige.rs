//! Information-geometrodynamical entropy along a geodesic.
//!
//! The explored volume at `τ′` is `v(τ′) = ∫_B √g dΘ` over the coordinate
//! box spanned by `Θ(0)` and `Θ(τ′)`. Coordinates that have not moved are
//! held fixed rather than integrated, so a run that only moves some
//! coordinates measures the volume of the sub-box it explores. The averaged
//! volume is `V(τ) = (1/τ)∫₀^τ v(τ′)dτ′` and the entropy is `S(τ) = log V(τ)`.
//!
//! Regular dynamics give `S ≈ c log τ + c′`; chaotic dynamics give
//! `S ≈ Kτ + log C`. [`fit_growth`] fits both and selects one by AIC.

use serde::{Deserialize, Serialize};

use crate::dynamics::GeodesicTrajectory;
use crate::error::{Error, Result};
use crate::manifold::{CoordDensity, ManifoldModel};
use crate::quadrature::GaussLegendre;
use crate::stats::fit_line;

/// Minimum Gauss–Legendre nodes per panel.
pub const MIN_QUAD_NODES: usize = 16;
/// Minimum samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 20;

const MAX_PANELS_FACTORIZED: usize = 4096;
const MAX_PANELS_GENERIC: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgeSeries {
    /// Grid of the trajectory with the explored volume `v(τ′)` at each point.
    pub grid: Vec<f64>,
    pub explored: Vec<f64>,
    /// Samples with `V(τ) > 0`.
    pub tau: Vec<f64>,
    pub volume: Vec<f64>,
    pub entropy: Vec<f64>,
    /// True when the trajectory never leaves its initial point.
    pub degenerate: bool,
    pub fit: Option<FitReport>,
}

impl IgeSeries {
    /// Builds a series from sampled volumes, e.g. for synthetic checks.
    pub fn from_volumes(tau: Vec<f64>, volume: Vec<f64>) -> Result<Self> {
        if tau.len() != volume.len() {
            return Err(Error::Shape {
                expected: tau.len(),
                got: volume.len(),
            });
        }
        if volume.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Validation("volumes must be strictly positive".into()));
        }
        let entropy = volume.iter().map(|v| v.ln()).collect();
        Ok(Self {
            grid: tau.clone(),
            explored: vec![f64::NAN; tau.len()],
            tau,
            volume,
            entropy,
            degenerate: false,
            fit: None,
        })
    }

    /// `[τ_max/10, τ_max]`.
    pub fn default_window(&self) -> (f64, f64) {
        let t = self.tau.last().copied().unwrap_or(0.0);
        (t / 10.0, t)
    }

    /// Fits the growth law on `window` and stores the report.
    pub fn with_fit(mut self, window: (f64, f64)) -> Result<Self> {
        self.fit = Some(fit_growth(&self, window)?);
        Ok(self)
    }
}

/// One coordinate of the box: integrated over `[lo, hi]`, or held at `at`.
enum Extent {
    Span { lo: f64, hi: f64 },
    Fixed { at: f64 },
}

fn extents(x0: &[f64], x: &[f64]) -> Vec<Extent> {
    x0.iter()
        .zip(x)
        .map(|(&a, &b)| {
            if (b - a).abs() <= 1e-13 * a.abs().max(1.0) {
                Extent::Fixed { at: a }
            } else {
                Extent::Span {
                    lo: a.min(b),
                    hi: a.max(b),
                }
            }
        })
        .collect()
}

/// Quadrature nodes for one coordinate span. Positive coordinates are
/// integrated in `u = log x` so that scale parameters spanning many decades
/// keep unit-length panels.
fn span_rule(
    rule: &GaussLegendre,
    positive: bool,
    lo: f64,
    hi: f64,
    max_panels: usize,
) -> Vec<(f64, f64)> {
    let (a, b, log) = if positive && lo > 0.0 {
        (lo.ln(), hi.ln(), true)
    } else {
        (lo, hi, false)
    };
    let panels = ((b - a).ceil() as usize).clamp(1, max_panels);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for k in 0..panels {
        let p_lo = a + h * k as f64;
        let p_hi = if k + 1 == panels { b } else { p_lo + h };
        for (u, w) in rule.on_interval(p_lo, p_hi) {
            if log {
                let x = u.exp();
                out.push((x, w * x));
            } else {
                out.push((u, w));
            }
        }
    }
    out
}

fn box_volume(model: &ManifoldModel, rule: &GaussLegendre, x0: &[f64], x: &[f64]) -> f64 {
    let ext = extents(x0, x);
    if ext.iter().all(|e| matches!(e, Extent::Fixed { .. })) {
        return 0.0;
    }
    let positive: Vec<bool> = model.domain().iter().map(|d| d.lo == 0.0).collect();
    if let Some(factors) = model.sqrt_det_factors() {
        return ext
            .iter()
            .zip(&factors)
            .zip(&positive)
            .map(|((e, f), &pos)| match *e {
                Extent::Fixed { at } => f.eval(at),
                Extent::Span { lo, hi } => match f {
                    CoordDensity::Constant(c) => c * (hi - lo),
                    _ => span_rule(rule, pos, lo, hi, MAX_PANELS_FACTORIZED)
                        .iter()
                        .map(|&(x, w)| w * f.eval(x))
                        .sum(),
                },
            })
            .product();
    }
    // Generic tensor-product rule over the moving coordinates.
    let axes: Vec<Vec<(f64, f64)>> = ext
        .iter()
        .zip(&positive)
        .map(|(e, &pos)| match *e {
            Extent::Fixed { at } => vec![(at, 1.0)],
            Extent::Span { lo, hi } => span_rule(rule, pos, lo, hi, MAX_PANELS_GENERIC),
        })
        .collect();
    let mut idx = vec![0usize; axes.len()];
    let mut point = vec![0.0; axes.len()];
    let mut total = 0.0;
    'outer: loop {
        let mut w = 1.0;
        for (k, axis) in axes.iter().enumerate() {
            point[k] = axis[idx[k]].0;
            w *= axis[idx[k]].1;
        }
        let g = model.metric_unchecked(&point);
        total += w * g.determinant().abs().sqrt();
        for k in 0..axes.len() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    total
}

/// Explored volume, its running time average `V(τ)` and `S(τ) = log V(τ)`
/// along `traj`.
pub fn volume_series(
    model: &ManifoldModel,
    traj: &GeodesicTrajectory,
    quad_nodes: usize,
) -> Result<IgeSeries> {
    if quad_nodes < MIN_QUAD_NODES {
        return Err(Error::Validation(format!(
            "quad_nodes must be at least {MIN_QUAD_NODES}, got {quad_nodes}"
        )));
    }
    if traj.model != model.name() || traj.coords.first().map(Vec::len) != Some(model.dim()) {
        return Err(Error::Validation(format!(
            "trajectory of `{}` does not belong to model `{}`",
            traj.model,
            model.name()
        )));
    }
    let rule = GaussLegendre::new(quad_nodes);
    let x0 = &traj.coords[0];
    let explored: Vec<f64> = traj
        .coords
        .iter()
        .map(|x| box_volume(model, &rule, x0, x))
        .collect();
    if explored.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMetric {
            point: traj.final_coords().to_vec(),
        });
    }
    let mut tau = Vec::new();
    let mut volume = Vec::new();
    let mut integral = 0.0;
    for i in 1..traj.tau.len() {
        let dt = traj.tau[i] - traj.tau[i - 1];
        integral += 0.5 * dt * (explored[i] + explored[i - 1]);
        let t = traj.tau[i];
        if t > 0.0 && integral > 0.0 {
            tau.push(t);
            volume.push(integral / t);
        }
    }
    let entropy = volume.iter().map(|v| v.ln()).collect();
    Ok(IgeSeries {
        grid: traj.tau.clone(),
        degenerate: explored.iter().all(|v| *v == 0.0),
        explored,
        tau,
        volume,
        entropy,
        fit: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `S ≈ c_IG log τ + c′_IG`
    Logarithmic,
    /// `S ≈ K_IG τ + log C_IG`
    Linear,
}

/// Least-squares fit of one candidate growth law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `c_IG` for the logarithmic law, `K_IG` for the linear law.
    pub rate: f64,
    /// `c′_IG`, or `log C_IG`.
    pub offset: f64,
    pub r2: f64,
    pub rss: f64,
    pub aic: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub selected: GrowthModel,
    pub logarithmic: GrowthFit,
    pub linear: GrowthFit,
    pub window: (f64, f64),
    pub samples: usize,
}

impl FitReport {
    pub fn chosen(&self) -> &GrowthFit {
        match self.selected {
            GrowthModel::Logarithmic => &self.logarithmic,
            GrowthModel::Linear => &self.linear,
        }
    }

    pub fn c_ig(&self) -> f64 {
        self.logarithmic.rate
    }

    pub fn k_ig(&self) -> f64 {
        self.linear.rate
    }
}

fn information_criteria(rss: f64, n: usize, params: usize) -> (f64, f64) {
    let nf = n as f64;
    // Floor keeps exact fits finite.
    let l = nf * (rss / nf).max(1e-300).ln();
    (l + 2.0 * params as f64, l + params as f64 * nf.ln())
}

/// Fits both growth laws to `S(τ)` on `window` and selects by AIC.
pub fn fit_growth(series: &IgeSeries, window: (f64, f64)) -> Result<FitReport> {
    let (a, b) = window;
    if !(a < b) || a <= 0.0 {
        return Err(Error::Validation(format!(
            "fit window must satisfy 0 < start < end, got [{a}, {b}]"
        )));
    }
    let (taus, s): (Vec<f64>, Vec<f64>) = series
        .tau
        .iter()
        .zip(&series.entropy)
        .filter(|(t, _)| **t >= a && **t <= b)
        .map(|(t, s)| (*t, *s))
        .unzip();
    if taus.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: taus.len(),
        });
    }
    let n = taus.len();
    let logs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let insufficient = Error::InsufficientData {
        needed: MIN_FIT_SAMPLES,
        got: n,
    };
    let lf = fit_line(&logs, &s).ok_or(insufficient.clone())?;
    let tf = fit_line(&taus, &s).ok_or(insufficient)?;
    let to_fit = |f: crate::stats::LineFit| {
        let (aic, bic) = information_criteria(f.rss, n, 2);
        GrowthFit {
            rate: f.slope,
            offset: f.intercept,
            r2: f.r2,
            rss: f.rss,
            aic,
            bic,
        }
    };
    let logarithmic = to_fit(lf);
    let linear = to_fit(tf);
    let selected = if logarithmic.aic <= linear.aic {
        GrowthModel::Logarithmic
    } else {
        GrowthModel::Linear
    };
    Ok(FitReport {
        selected,
        logarithmic,
        linear,
        window,
        samples: n,
    })
}

/// Side-by-side report of the entropy rate and the Jacobi exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub k_ig: f64,
    pub lambda_j: f64,
    /// `K_IG / λ_J`; absent when `λ_J` is zero.
    pub ratio: Option<f64>,
    pub abs_diff: f64,
    /// False when the pair cannot describe the same exponential rate.
    pub consistent: bool,
}

/// Compares `K_IG` from a linear fit with `λ_J`. Reports, never judges
/// agreement.
pub fn compare_rates(fit: &FitReport, lambda_j: f64) -> Result<RateComparison> {
    if fit.selected != GrowthModel::Linear {
        return Err(Error::Inapplicable(
            "entropy growth is logarithmic; there is no K_IG to compare".into(),
        ));
    }
    let k = fit.k_ig();
    let ratio = (lambda_j.abs() > 1e-12).then(|| k / lambda_j);
    let consistent = ratio.is_some_and(|r| r.is_finite() && r > 0.0);
    Ok(RateComparison {
        k_ig: k,
        lambda_j,
        ratio,
        abs_diff: (k - lambda_j).abs(),
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_geodesic_with, IntegratorOptions};

    fn opts() -> IntegratorOptions {
        IntegratorOptions {
            tol: 1e-10,
            max_step: 0.05,
            boundary_eps: 1e-9,
        }
    }

    #[test]
    fn integrable_volume_matches_closed_form() {
        let m = ManifoldModel::integrable();
        let traj = integrate_geodesic_with(&m, &[1.0, 1.0], &[1.0, 1.0], 20.0, &opts()).unwrap();
        let s = volume_series(&m, &traj, 16).unwrap();
        for ((t, v), x) in s.grid.iter().zip(&s.explored).zip(&traj.coords) {
            // √g = 1/(μ_A μ_B): v = log μ_A · log μ_B = τ².
            let want = x[0].ln() * x[1].ln();
            assert!((v - want).abs() <= 1e-10 * want.max(1.0), "{t}");
            assert!((v - t * t).abs() <= 1e-6 * (t * t).max(1.0), "{t}");
        }
        for (t, vol) in s.tau.iter().zip(&s.volume) {
            if *t >= 10.0 {
                let want = t * t / 3.0;
                assert!(((vol - want) / want).abs() < 5e-3);
            }
        }
        for (v, e) in s.volume.iter().zip(&s.entropy) {
            assert_eq!(v.ln(), *e);
        }
    }

    #[test]
    fn stationary_run_is_degenerate() {
        let m = ManifoldModel::integrable();
        let traj = integrate_geodesic_with(&m, &[1.0, 1.0], &[0.0, 0.0], 5.0, &opts()).unwrap();
        let s = volume_series(&m, &traj, 16).unwrap();
        assert!(s.degenerate);
        assert!(s.explored.iter().all(|v| *v == 0.0));
        assert!(s.tau.is_empty());
    }

    #[test]
    fn single_expanding_factor_gives_unit_log_rate() {
        let m = ManifoldModel::integrable();
        let traj = integrate_geodesic_with(&m, &[1.0, 1.0], &[1.0, 0.0], 100.0, &opts()).unwrap();
        let s = volume_series(&m, &traj, 16).unwrap();
        let w = s.default_window();
        let fit = fit_growth(&s, w).unwrap();
        assert_eq!(fit.selected, GrowthModel::Logarithmic);
        assert!((fit.c_ig() - 1.0).abs() < 0.05, "{}", fit.c_ig());
    }

    #[test]
    fn synthetic_linear_entropy() {
        let tau: Vec<f64> = (1..=200).map(|i| i as f64 * 0.5).collect();
        let vol: Vec<f64> = tau.iter().map(|t| (3.0 * t).exp()).collect();
        let s = IgeSeries::from_volumes(tau, vol).unwrap();
        let fit = fit_growth(&s, (10.0, 100.0)).unwrap();
        assert_eq!(fit.selected, GrowthModel::Linear);
        assert!((fit.k_ig() - 3.0).abs() < 1e-6);
        assert!(fit.linear.r2 >= fit.logarithmic.r2);
    }

    #[test]
    fn fit_needs_enough_samples() {
        let tau: Vec<f64> = (1..=10).map(f64::from).collect();
        let vol = tau.clone();
        let s = IgeSeries::from_volumes(tau, vol).unwrap();
        assert!(matches!(
            fit_growth(&s, (1.0, 10.0)),
            Err(Error::InsufficientData { needed: 20, got: 10 })
        ));
    }

    #[test]
    fn rate_comparison() {
        let tau: Vec<f64> = (1..=100).map(f64::from).collect();
        let vol: Vec<f64> = tau.iter().map(|t| (0.7 * t).exp()).collect();
        let fit = fit_growth(&IgeSeries::from_volumes(tau, vol).unwrap(), (10.0, 100.0)).unwrap();
        let c = compare_rates(&fit, 0.71).unwrap();
        assert!((c.ratio.unwrap() - 0.986).abs() < 1e-3);
        let c = compare_rates(&fit, fit.k_ig()).unwrap();
        assert_eq!(c.ratio, Some(1.0));
        let c = compare_rates(&fit, 0.0).unwrap();
        assert!(c.ratio.is_none() && !c.consistent);

        let tau: Vec<f64> = (1..=100).map(f64::from).collect();
        let vol: Vec<f64> = tau.iter().map(|t| t * t).collect();
        let fit = fit_growth(&IgeSeries::from_volumes(tau, vol).unwrap(), (10.0, 100.0)).unwrap();
        assert!(matches!(compare_rates(&fit, 0.5), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn generic_quadrature_matches_factorized_path() {
        let m = ManifoldModel::chaotic();
        let inner = m.clone();
        let custom = ManifoldModel::custom("chaotic", &["a", "b", "c"], m.domain().to_vec(), move |x| {
            inner.metric(x).unwrap()
        })
        .unwrap();
        let rule = GaussLegendre::new(16);
        let x0 = [1.0, 0.0, 1.0];
        let x = [1.5, 0.4, 0.5];
        let a = box_volume(&m, &rule, &x0, &x);
        let b = box_volume(&custom, &rule, &x0, &x);
        // 2 log 1.5 · 0.4 · √2 (1/0.5 − 1)
        let want = 2.0 * 1.5f64.ln() * 0.4 * std::f64::consts::SQRT_2;
        assert!((a - want).abs() < 1e-12 * want);
        assert!((b - want).abs() < 1e-10 * want, "{b} vs {want}");
    }
}
