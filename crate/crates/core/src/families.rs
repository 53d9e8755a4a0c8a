//! Probability families on the microvariables and their composite products.
//!
//! Every family is parametrized by a [`ParamPoint`] whose components are
//! listed by [`Family::param_names`]. Composite families are independent
//! products of their factors: the integrable composite couples a
//! Poisson-type spacing law to an exponential bath, the chaotic composite
//! couples a Wigner–Dyson spacing law to a Gaussian bath.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Support;
use crate::stats::normal_cdf;

/// An open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// True when `x` sits at least `margin` inside both ends.
    pub fn contains_with_margin(&self, x: f64, margin: f64) -> bool {
        x - margin > self.lo && x + margin < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// A point in a family's parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        Self(values.into())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for ParamPoint {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

/// The parametric families used to build the statistical manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `p(x|μ) = e^{−x/μ}/μ` on `x ≥ 0`. Also used for Poisson level spacings.
    Exponential,
    /// `p(x|μ,σ) = (2πσ²)^{−1/2} e^{−(x−μ)²/(2σ²)}`.
    Gaussian,
    /// Wigner surmise with mean spacing μ: `p(x|μ) = πx/(2μ²) e^{−πx²/(4μ²)}`.
    WignerDyson,
    /// Exponential spacing law times an exponential bath; parameters `(μ_A, μ_B)`.
    CompositeIntegrable,
    /// Wigner–Dyson spacing law times a Gaussian bath; parameters `(μ′_A, μ′_B, σ′_B)`.
    CompositeChaotic,
}

/// One independent factor of a family, with the offsets of its parameters
/// and microvariable inside the parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub family: Family,
    pub param_offset: usize,
    pub micro_index: usize,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Exponential,
        Family::Gaussian,
        Family::WignerDyson,
        Family::CompositeIntegrable,
        Family::CompositeChaotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Gaussian => "gaussian",
            Family::WignerDyson => "wigner_dyson",
            Family::CompositeIntegrable => "composite_integrable",
            Family::CompositeChaotic => "composite_chaotic",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Exponential | Family::WignerDyson => &["mu"],
            Family::Gaussian => &["mu", "sigma"],
            Family::CompositeIntegrable => &["mu_a", "mu_b"],
            Family::CompositeChaotic => &["mu_a", "mu_b", "sigma_b"],
        }
    }

    pub fn param_domain(self) -> Vec<Interval> {
        match self {
            Family::Exponential | Family::WignerDyson => vec![Interval::POSITIVE],
            Family::Gaussian => vec![Interval::REAL, Interval::POSITIVE],
            Family::CompositeIntegrable => vec![Interval::POSITIVE; 2],
            Family::CompositeChaotic => {
                vec![Interval::POSITIVE, Interval::REAL, Interval::POSITIVE]
            }
        }
    }

    pub fn param_count(self) -> usize {
        self.param_names().len()
    }

    /// Number of microvariables.
    pub fn micro_dim(self) -> usize {
        self.factors().len()
    }

    pub fn is_composite(self) -> bool {
        matches!(self, Family::CompositeIntegrable | Family::CompositeChaotic)
    }

    pub fn factors(self) -> Vec<Factor> {
        let f = |family, param_offset, micro_index| Factor {
            family,
            param_offset,
            micro_index,
        };
        match self {
            Family::CompositeIntegrable => vec![
                f(Family::Exponential, 0, 0),
                f(Family::Exponential, 1, 1),
            ],
            Family::CompositeChaotic => {
                vec![f(Family::WignerDyson, 0, 0), f(Family::Gaussian, 1, 1)]
            }
            univariate => vec![f(univariate, 0, 0)],
        }
    }

    /// Validates `theta` against the parameter domain.
    pub fn check(self, theta: &ParamPoint) -> Result<()> {
        let names = self.param_names();
        if theta.len() != names.len() {
            return Err(Error::Shape {
                expected: names.len(),
                got: theta.len(),
            });
        }
        for ((&v, name), dom) in theta.0.iter().zip(names).zip(self.param_domain()) {
            if !dom.contains(v) {
                return Err(Error::Domain {
                    param: (*name).to_string(),
                    value: v,
                    domain: dom.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Density at microstate `x`. Points outside the support give 0.
    pub fn density(self, theta: &ParamPoint, x: &[f64]) -> Result<f64> {
        Ok(self.log_density(theta, x)?.exp())
    }

    /// Natural log of the density; `−∞` outside the support.
    pub fn log_density(self, theta: &ParamPoint, x: &[f64]) -> Result<f64> {
        self.check(theta)?;
        if x.len() != self.micro_dim() {
            return Err(Error::Shape {
                expected: self.micro_dim(),
                got: x.len(),
            });
        }
        Ok(self.log_density_unchecked(theta.values(), x))
    }

    pub(crate) fn log_density_unchecked(self, theta: &[f64], x: &[f64]) -> f64 {
        match self {
            Family::Exponential => {
                let (mu, x) = (theta[0], x[0]);
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -mu.ln() - x / mu
                }
            }
            Family::WignerDyson => {
                let (mu, x) = (theta[0], x[0]);
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (PI * x / (2.0 * mu * mu)).ln() - PI * x * x / (4.0 * mu * mu)
                }
            }
            Family::Gaussian => {
                let (mu, sigma, x) = (theta[0], theta[1], x[0]);
                let z = (x - mu) / sigma;
                -0.5 * (2.0 * PI * sigma * sigma).ln() - 0.5 * z * z
            }
            composite => composite
                .factors()
                .iter()
                .map(|f| {
                    let k = f.family.param_count();
                    f.family.log_density_unchecked(
                        &theta[f.param_offset..f.param_offset + k],
                        &x[f.micro_index..f.micro_index + 1],
                    )
                })
                .sum(),
        }
    }

    /// Per-microvariable means and variances, in closed form.
    pub fn moments(self, theta: &ParamPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(theta)?;
        let mut means = Vec::with_capacity(self.micro_dim());
        let mut vars = Vec::with_capacity(self.micro_dim());
        for f in self.factors() {
            let t = &theta.0[f.param_offset..];
            let (m, v) = match f.family {
                Family::Exponential => (t[0], t[0] * t[0]),
                Family::WignerDyson => (t[0], (4.0 / PI - 1.0) * t[0] * t[0]),
                Family::Gaussian => (t[0], t[1] * t[1]),
                _ => unreachable!("factors are univariate"),
            };
            means.push(m);
            vars.push(v);
        }
        Ok((means, vars))
    }

    /// Closed-form CDF of a univariate family.
    pub fn cdf(self, theta: &ParamPoint, x: f64) -> Result<f64> {
        self.check(theta)?;
        let t = theta.values();
        Ok(match self {
            Family::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / t[0]).exp_m1()
                }
            }
            Family::WignerDyson => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-PI * x * x / (4.0 * t[0] * t[0])).exp_m1()
                }
            }
            Family::Gaussian => normal_cdf((x - t[0]) / t[1]),
            composite => {
                return Err(Error::Inapplicable(format!(
                    "`{}` is multivariate and has no scalar CDF",
                    composite.name()
                )))
            }
        })
    }

    /// Draws `count` microstates with a ChaCha8 generator seeded by `seed`.
    ///
    /// Exponential and Wigner–Dyson variates use their closed-form inverse
    /// CDFs; Gaussian variates use the Box–Muller transform (cosine branch
    /// only, one normal per pair of uniforms). Composite samples draw their
    /// factors in order from the same stream.
    pub fn sample(self, theta: &ParamPoint, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.check(theta)?;
        if count == 0 {
            return Err(Error::Validation("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors = self.factors();
        let out = (0..count)
            .map(|_| {
                factors
                    .iter()
                    .map(|f| draw(f.family, &theta.0[f.param_offset..], &mut rng))
                    .collect()
            })
            .collect();
        Ok(out)
    }

    /// Microvariable support of a univariate family, scaled to its parameters.
    pub(crate) fn support(self, theta: &[f64]) -> Support {
        match self {
            Family::Exponential | Family::WignerDyson => Support::HalfLine {
                shift: 0.0,
                scale: theta[0],
            },
            Family::Gaussian => Support::RealLine {
                shift: theta[0],
                scale: theta[1],
            },
            _ => unreachable!("composites have one support per factor"),
        }
    }
}

fn draw<R: Rng>(family: Family, t: &[f64], rng: &mut R) -> f64 {
    match family {
        Family::Exponential => {
            let u: f64 = rng.random();
            -t[0] * (-u).ln_1p()
        }
        Family::WignerDyson => {
            let u: f64 = rng.random();
            t[0] * (-4.0 * (-u).ln_1p() / PI).sqrt()
        }
        Family::Gaussian => {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            t[0] + t[1] * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        }
        _ => unreachable!("factors are univariate"),
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" | "poisson_spacing" => Ok(Family::Exponential),
            "gaussian" => Ok(Family::Gaussian),
            "wigner_dyson" => Ok(Family::WignerDyson),
            "composite_integrable" => Ok(Family::CompositeIntegrable),
            "composite_chaotic" => Ok(Family::CompositeChaotic),
            other => Err(Error::Validation(format!("unknown family `{other}`"))),
        }
    }
}
