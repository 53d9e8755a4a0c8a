//! Statistical manifolds: parameter domains carrying a Fisher–Rao metric.
//!
//! Most models are products of independent blocks, which is what the
//! composite families produce. Block models know their Christoffel symbols,
//! Riemann tensor and volume density in closed form; the generic
//! finite-difference machinery in [`crate::geometry`] is checked against
//! those closed forms. Models with an arbitrary metric field can be built
//! with [`ManifoldModel::custom`].

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Family, Interval, ParamPoint};
use crate::quadrature::{mapped_rule, GaussLegendre};
use crate::tensor::{Tensor3, Tensor4};

/// A metric block of a product manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Block {
    /// One positive coordinate with `g = weight / x²`: the exponential
    /// family has weight 1, the Wigner–Dyson family weight 4.
    Scale { weight: f64 },
    /// Location–scale pair `(μ, σ)` with `g = diag(1/σ², 2/σ²)`.
    Gaussian,
    /// One real coordinate with `g = 1`.
    Flat,
}

impl Block {
    pub fn dim(self) -> usize {
        match self {
            Block::Gaussian => 2,
            _ => 1,
        }
    }

    fn domain(self) -> Vec<Interval> {
        match self {
            Block::Scale { .. } => vec![Interval::POSITIVE],
            Block::Gaussian => vec![Interval::REAL, Interval::POSITIVE],
            Block::Flat => vec![Interval::REAL],
        }
    }
}

/// How `√det g` depends on one coordinate when it factorizes across
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordDensity {
    /// `c`
    Constant(f64),
    /// `c / x`
    Reciprocal(f64),
    /// `c / x²`
    InverseSquare(f64),
}

impl CoordDensity {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            CoordDensity::Constant(c) => c,
            CoordDensity::Reciprocal(c) => c / x,
            CoordDensity::InverseSquare(c) => c / (x * x),
        }
    }
}

type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

#[derive(Clone)]
enum MetricField {
    Blocks(Vec<Block>),
    Custom(Arc<MetricFn>),
}

/// A coordinate domain with a Riemannian metric field.
#[derive(Clone)]
pub struct ManifoldModel {
    name: String,
    coord_names: Vec<String>,
    domain: Vec<Interval>,
    field: MetricField,
}

impl fmt::Debug for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.field {
            MetricField::Blocks(b) => format!("{b:?}"),
            MetricField::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("ManifoldModel")
            .field("name", &self.name)
            .field("coord_names", &self.coord_names)
            .field("field", &kind)
            .finish()
    }
}

impl ManifoldModel {
    /// Product of metric blocks.
    pub fn from_blocks(
        name: impl Into<String>,
        coord_names: &[&str],
        blocks: Vec<Block>,
    ) -> Result<Self> {
        let domain: Vec<Interval> = blocks.iter().flat_map(|b| b.domain()).collect();
        if domain.len() != coord_names.len() {
            return Err(Error::Shape {
                expected: domain.len(),
                got: coord_names.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            coord_names: coord_names.iter().map(|s| s.to_string()).collect(),
            domain,
            field: MetricField::Blocks(blocks),
        })
    }

    /// A model with an arbitrary metric field and no closed-form geometry.
    pub fn custom<F>(
        name: impl Into<String>,
        coord_names: &[&str],
        domain: Vec<Interval>,
        metric: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if domain.len() != coord_names.len() {
            return Err(Error::Shape {
                expected: domain.len(),
                got: coord_names.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            coord_names: coord_names.iter().map(|s| s.to_string()).collect(),
            domain,
            field: MetricField::Custom(Arc::new(metric)),
        })
    }

    /// The Fisher–Rao manifold of a family, built from its closed form.
    pub fn from_family(family: Family) -> Self {
        let blocks = family
            .factors()
            .iter()
            .map(|f| match f.family {
                Family::Exponential => Block::Scale { weight: 1.0 },
                Family::WignerDyson => Block::Scale { weight: 4.0 },
                Family::Gaussian => Block::Gaussian,
                _ => unreachable!("factors are univariate"),
            })
            .collect();
        Self::from_blocks(family.name(), family.param_names(), blocks)
            .expect("family names match block dimensions")
    }

    /// `ds² = dμ_A²/μ_A² + dμ_B²/μ_B²`.
    pub fn integrable() -> Self {
        let mut m = Self::from_family(Family::CompositeIntegrable);
        m.name = "integrable".into();
        m
    }

    /// `ds² = 4dμ′_A²/μ′_A² + dμ′_B²/σ′_B² + 2dσ′_B²/σ′_B²`.
    pub fn chaotic() -> Self {
        let mut m = Self::from_family(Family::CompositeChaotic);
        m.name = "chaotic".into();
        m
    }

    /// The Gaussian location–scale submanifold `(μ, σ)`.
    pub fn gaussian() -> Self {
        Self::from_family(Family::Gaussian)
    }

    /// Flat `R^dim` in Cartesian coordinates.
    pub fn euclidean(dim: usize) -> Self {
        let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::from_blocks(format!("euclidean{dim}"), &refs, vec![Block::Flat; dim])
            .expect("one name per flat block")
    }

    /// Product of `k` exponential-family factors.
    pub fn exponential_product(k: usize) -> Self {
        let names: Vec<String> = (0..k).map(|i| format!("mu_{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::from_blocks(
            format!("exponential_product{k}"),
            &refs,
            vec![Block::Scale { weight: 1.0 }; k],
        )
        .expect("one name per scale block")
    }

    /// Looks up a prebuilt model by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "integrable" => Ok(Self::integrable()),
            "chaotic" => Ok(Self::chaotic()),
            "gaussian" => Ok(Self::gaussian()),
            other => {
                if let Some(d) = other.strip_prefix("euclidean") {
                    if let Ok(dim) = d.parse::<usize>() {
                        if dim > 0 {
                            return Ok(Self::euclidean(dim));
                        }
                    }
                }
                if let Some(k) = other.strip_prefix("exponential_product") {
                    if let Ok(k) = k.parse::<usize>() {
                        if k > 0 {
                            return Ok(Self::exponential_product(k));
                        }
                    }
                }
                Err(Error::Validation(format!("unknown manifold `{other}`")))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn blocks(&self) -> Option<&[Block]> {
        match &self.field {
            MetricField::Blocks(b) => Some(b),
            MetricField::Custom(_) => None,
        }
    }

    /// Checks the length of `theta` and that it lies inside the domain.
    pub fn check_point(&self, theta: &[f64]) -> Result<()> {
        self.check_point_with_margin(theta, &vec![0.0; theta.len()])
    }

    pub(crate) fn check_point_with_margin(&self, theta: &[f64], margin: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        for (i, (&x, dom)) in theta.iter().zip(&self.domain).enumerate() {
            if !x.is_finite() || !dom.contains_with_margin(x, margin[i]) {
                return Err(Error::Domain {
                    param: self.coord_names[i].clone(),
                    value: x,
                    domain: dom.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `g_μν(θ)`.
    pub fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(theta)?;
        Ok(self.metric_unchecked(theta))
    }

    pub(crate) fn metric_unchecked(&self, theta: &[f64]) -> DMatrix<f64> {
        match &self.field {
            MetricField::Custom(f) => f(theta),
            MetricField::Blocks(blocks) => {
                let n = self.dim();
                let mut g = DMatrix::zeros(n, n);
                let mut i = 0;
                for b in blocks {
                    match *b {
                        Block::Scale { weight } => {
                            g[(i, i)] = weight / (theta[i] * theta[i]);
                        }
                        Block::Flat => g[(i, i)] = 1.0,
                        Block::Gaussian => {
                            let s2 = theta[i + 1] * theta[i + 1];
                            g[(i, i)] = 1.0 / s2;
                            g[(i + 1, i + 1)] = 2.0 / s2;
                        }
                    }
                    i += b.dim();
                }
                g
            }
        }
    }

    /// `dθ · g(θ) · dθ`.
    pub fn line_element(&self, theta: &[f64], dtheta: &[f64]) -> Result<f64> {
        if dtheta.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: dtheta.len(),
            });
        }
        let g = self.metric(theta)?;
        Ok(quadratic_form(&g, dtheta, dtheta))
    }

    /// Closed-form `Γ^ρ_μν` for block models.
    pub fn christoffel_closed_form(&self, theta: &[f64]) -> Option<Tensor3> {
        let blocks = self.blocks()?;
        let mut gamma = Tensor3::zeros(self.dim());
        let mut i = 0;
        for b in blocks {
            match b {
                Block::Scale { .. } => gamma.set(i, i, i, -1.0 / theta[i]),
                Block::Flat => {}
                Block::Gaussian => {
                    let (m, s) = (i, i + 1);
                    let sigma = theta[s];
                    gamma.set(m, m, s, -1.0 / sigma);
                    gamma.set(m, s, m, -1.0 / sigma);
                    gamma.set(s, m, m, 0.5 / sigma);
                    gamma.set(s, s, s, -1.0 / sigma);
                }
            }
            i += b.dim();
        }
        Some(gamma)
    }

    /// Closed-form `R^μ_νρσ` for block models. Scale and flat blocks are
    /// flat; the Gaussian block has constant sectional curvature −1/2.
    pub fn riemann_closed_form(&self, theta: &[f64]) -> Option<Tensor4> {
        let blocks = self.blocks()?;
        let mut r = Tensor4::zeros(self.dim());
        let g = self.metric_unchecked(theta);
        let mut i = 0;
        for b in blocks {
            if let Block::Gaussian = b {
                const K: f64 = -0.5;
                let idx = [i, i + 1];
                for &a in &idx {
                    for &bb in &idx {
                        for &c in &idx {
                            for &d in &idx {
                                let dac = if a == c { 1.0 } else { 0.0 };
                                let dad = if a == d { 1.0 } else { 0.0 };
                                let v = K * (dac * g[(bb, d)] - dad * g[(bb, c)]);
                                r.set(a, bb, c, d, v);
                            }
                        }
                    }
                }
            }
            i += b.dim();
        }
        Some(r)
    }

    /// Per-coordinate factors of `√det g` when the volume density
    /// factorizes (all block models).
    pub fn sqrt_det_factors(&self) -> Option<Vec<CoordDensity>> {
        let blocks = self.blocks()?;
        let mut out = Vec::with_capacity(self.dim());
        for b in blocks {
            match *b {
                Block::Scale { weight } => out.push(CoordDensity::Reciprocal(weight.sqrt())),
                Block::Flat => out.push(CoordDensity::Constant(1.0)),
                Block::Gaussian => {
                    out.push(CoordDensity::Constant(1.0));
                    out.push(CoordDensity::InverseSquare(std::f64::consts::SQRT_2));
                }
            }
        }
        Some(out)
    }
}

pub(crate) fn quadratic_form(g: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i] * g[(i, j)] * b[j];
        }
    }
    s
}

/// Closed-form Fisher–Rao metric of a family.
///
/// exponential: `[1/μ²]`; Wigner–Dyson: `[4/μ²]`; Gaussian:
/// `diag(1/σ², 2/σ²)`; composites are block-diagonal.
pub fn fisher_metric_closed_form(family: Family, theta: &ParamPoint) -> Result<DMatrix<f64>> {
    family.check(theta)?;
    let model = ManifoldModel::from_family(family);
    Ok(model.metric_unchecked(theta.values()))
}

/// Settings for [`fisher_metric_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Gauss–Legendre nodes of the first estimate.
    pub nodes: usize,
    /// Node count beyond which refinement gives up.
    pub max_nodes: usize,
    /// Successive estimates must agree to this, relative to `‖g‖_F`.
    pub tol: f64,
    /// Relative step of the central-difference parameter derivatives.
    pub fd_rel_step: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            nodes: 200,
            max_nodes: 6400,
            tol: 1e-8,
            fd_rel_step: 1e-5,
        }
    }
}

/// A quadrature metric with its convergence estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMetric {
    pub metric: DMatrix<f64>,
    /// Relative Frobenius difference between the last two refinements.
    pub estimated_error: f64,
    /// Nodes per microvariable in the returned estimate.
    pub nodes: usize,
}

/// Fisher–Rao metric `∫ p ∂_μ log p ∂_ν log p dX` by quadrature.
///
/// Each factor of a composite is integrated over its own microvariable and
/// the factor metrics are placed on the block diagonal; independence makes
/// the cross blocks vanish identically. Infinite supports are compactified
/// with `x = t/(1−t)` or `x = t/(1−t²)` after shifting and scaling by the
/// family's location and scale, and the node count is doubled until
/// successive estimates agree.
pub fn fisher_metric_quadrature(
    family: Family,
    theta: &ParamPoint,
    spec: &QuadSpec,
) -> Result<QuadratureMetric> {
    family.check(theta)?;
    if spec.nodes == 0 || spec.tol <= 0.0 || spec.fd_rel_step <= 0.0 {
        return Err(Error::Validation(
            "quadrature needs nodes > 0, tol > 0 and fd_rel_step > 0".into(),
        ));
    }
    let n = family.param_count();
    let t = theta.values();
    let estimate = |nodes: usize| {
        let rule = GaussLegendre::new(nodes);
        let mut g = DMatrix::zeros(n, n);
        for f in family.factors() {
            let k = f.family.param_count();
            let tf = &t[f.param_offset..f.param_offset + k];
            let block = factor_fisher(f.family, tf, &rule, spec.fd_rel_step);
            g.view_mut((f.param_offset, f.param_offset), (k, k))
                .copy_from(&block);
        }
        g
    };
    let mut nodes = spec.nodes;
    let mut coarse = estimate(nodes);
    loop {
        let fine_nodes = nodes * 2;
        let fine = estimate(fine_nodes);
        let diff = (&fine - &coarse).norm() / fine.norm().max(f64::MIN_POSITIVE);
        if diff <= spec.tol {
            return Ok(QuadratureMetric {
                metric: fine,
                estimated_error: diff,
                nodes: fine_nodes,
            });
        }
        if fine_nodes * 2 > spec.max_nodes {
            return Err(Error::Accuracy {
                coarse: coarse.as_slice().to_vec(),
                fine: fine.as_slice().to_vec(),
                tol: spec.tol,
            });
        }
        nodes = fine_nodes;
        coarse = fine;
    }
}

fn factor_fisher(family: Family, theta: &[f64], rule: &GaussLegendre, rel: f64) -> DMatrix<f64> {
    let k = theta.len();
    let domain = family.param_domain();
    let steps: Vec<f64> = theta
        .iter()
        .zip(&domain)
        .map(|(&v, dom)| {
            let h = rel * v.abs().max(1.0);
            // Stay inside the parameter domain for tiny scale parameters.
            if dom.lo.is_finite() {
                h.min(0.5 * (v - dom.lo))
            } else {
                h
            }
        })
        .collect();
    let mut g = DMatrix::zeros(k, k);
    let mut plus = theta.to_vec();
    let mut minus = theta.to_vec();
    let mut score = vec![0.0; k];
    for (x, w) in mapped_rule(rule, family.support(theta)) {
        let p = family.log_density_unchecked(theta, &[x]).exp();
        if p == 0.0 || !p.is_finite() {
            continue;
        }
        for i in 0..k {
            plus[i] = theta[i] + steps[i];
            minus[i] = theta[i] - steps[i];
            let lp = family.log_density_unchecked(&plus, &[x]);
            let lm = family.log_density_unchecked(&minus, &[x]);
            score[i] = (lp - lm) / (2.0 * steps[i]);
            plus[i] = theta[i];
            minus[i] = theta[i];
        }
        for i in 0..k {
            for j in i..k {
                let v = w * p * score[i] * score[j];
                g[(i, j)] += v;
                if i != j {
                    g[(j, i)] += v;
                }
            }
        }
    }
    g
}
