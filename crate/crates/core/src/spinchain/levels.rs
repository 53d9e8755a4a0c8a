//! Spectral unfolding and nearest-neighbour spacing statistics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ks_distance;

/// Unit-mean Poisson spacing CDF, `1 − e^{−s}`.
pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-s).exp_m1()
    }
}

/// Wigner surmise CDF, `1 − e^{−πs²/4}`.
pub fn wigner_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-PI * s * s / 4.0).exp_m1()
    }
}

pub fn poisson_density(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        (-s).exp()
    }
}

pub fn wigner_density(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        PI * s / 2.0 * (-PI * s * s / 4.0).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldOptions {
    pub poly_degree: usize,
    /// Fraction of levels dropped at each end of the spectrum.
    pub trim_fraction: f64,
    /// Largest acceptable condition number of the staircase fit.
    pub max_condition: f64,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        Self {
            poly_degree: 7,
            trim_fraction: 0.1,
            max_condition: 1e8,
        }
    }
}

pub const MIN_LEVELS: usize = 100;
pub const MIN_SPACINGS: usize = 200;

/// Maps sorted levels to unit-mean spacings through a polynomial fit of the
/// cumulative staircase `N(E)`.
///
/// Exact or near degeneracies are kept as (near-)zero spacings.
pub fn unfold(eigenvalues: &[f64], opts: &UnfoldOptions) -> Result<Vec<f64>> {
    let n = eigenvalues.len();
    if n < MIN_LEVELS {
        return Err(Error::InsufficientData {
            needed: MIN_LEVELS,
            got: n,
        });
    }
    if !(0.0..0.3).contains(&opts.trim_fraction) {
        return Err(Error::Validation(format!(
            "trim_fraction must lie in [0, 0.3), got {}",
            opts.trim_fraction
        )));
    }
    if opts.poly_degree == 0 {
        return Err(Error::Validation("poly_degree must be at least 1".into()));
    }
    if eigenvalues.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Validation("eigenvalues must be sorted ascending".into()));
    }
    let lo = eigenvalues[0];
    let hi = eigenvalues[n - 1];
    let half = 0.5 * (hi - lo);
    if !(half > 0.0) {
        return Err(Error::Validation("spectrum has zero width".into()));
    }
    let mid = 0.5 * (hi + lo);
    let cols = opts.poly_degree + 1;
    let x: Vec<f64> = eigenvalues.iter().map(|e| (e - mid) / half).collect();
    let vander = DMatrix::from_fn(n, cols, |i, k| x[i].powi(k as i32));
    let staircase = DVector::from_fn(n, |i, _| i as f64 + 0.5);

    let svd = vander.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > opts.max_condition {
        return Err(Error::IllConditioned {
            condition,
            hint: format!("try a poly_degree below {}", opts.poly_degree),
        });
    }
    let coef = svd
        .solve(&staircase, 0.0)
        .map_err(|e| Error::Validation(e.to_string()))?;
    let smooth = vander * coef;

    let k = (opts.trim_fraction * n as f64).floor() as usize;
    let kept = &smooth.as_slice()[k..n - k];
    let mut spacings: Vec<f64> = kept.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Validation("unfolded spacings have zero mean".into()));
    }
    for s in &mut spacings {
        *s /= mean;
    }
    Ok(spacings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PoissonLike,
    WignerLike,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::PoissonLike => "poisson_like",
            Verdict::WignerLike => "wigner_like",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictOptions {
    /// One law must beat the other by this much in KS distance.
    pub margin: f64,
    /// The winning law must also fit at least this well. Without an absolute
    /// bound a picket fence would be called Wigner-like merely for being
    /// less far from it than from Poisson.
    pub max_ks: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            margin: 0.01,
            max_ks: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub ks_poisson: f64,
    pub ks_wigner: f64,
    pub verdict: Verdict,
}

/// KS distances to the Poisson and Wigner-Dyson laws and the resulting call.
pub fn lsd_verdict(spacings: &[f64], opts: &VerdictOptions) -> Result<VerdictReport> {
    if spacings.len() < MIN_SPACINGS {
        return Err(Error::InsufficientData {
            needed: MIN_SPACINGS,
            got: spacings.len(),
        });
    }
    let ks_poisson = ks_distance(spacings, poisson_cdf);
    let ks_wigner = ks_distance(spacings, wigner_cdf);
    let verdict = if ks_poisson.min(ks_wigner) > opts.max_ks {
        Verdict::Inconclusive
    } else if ks_poisson < ks_wigner - opts.margin {
        Verdict::PoissonLike
    } else if ks_wigner < ks_poisson - opts.margin {
        Verdict::WignerLike
    } else {
        Verdict::Inconclusive
    };
    Ok(VerdictReport {
        ks_poisson,
        ks_wigner,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Normalized so that `Σ density·width = 1`.
    pub density: Vec<f64>,
    pub centers: Vec<f64>,
    pub poisson: Vec<f64>,
    pub wigner: Vec<f64>,
}

/// Normalized histogram on `[0, max s]` with both reference densities at
/// the bin centres.
pub fn spacing_histogram(spacings: &[f64], bins: usize) -> Result<SpacingHistogram> {
    if bins < 5 {
        return Err(Error::Validation(format!("need at least 5 bins, got {bins}")));
    }
    if spacings.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if spacings.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::Validation("spacings must be finite and nonnegative".into()));
    }
    let max = spacings.iter().copied().fold(0.0, f64::max);
    let top = if max > 0.0 { max } else { 1.0 };
    let width = top / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &s in spacings {
        let i = ((s / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = spacings.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let centers: Vec<f64> = (0..bins).map(|i| (i as f64 + 0.5) * width).collect();
    Ok(SpacingHistogram {
        poisson: centers.iter().map(|&s| poisson_density(s)).collect(),
        wigner: centers.iter().map(|&s| wigner_density(s)).collect(),
        edges,
        counts,
        density,
        centers,
    })
}
