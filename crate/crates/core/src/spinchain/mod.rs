//! Open Ising chain in a tilted field and its level-spacing statistics.
//!
//! `H = Σ_{j<n−1} σˣ_j σˣ_{j+1} + Σ_j (h_x σˣ_j + h_y σʸ_j)`.
//!
//! The matrix is assembled in the product basis of `σˣ` eigenstates, with
//! phases chosen so that `σʸ` acts as a real bit flip and `σᶻ` takes the
//! role of `σʸ`. This is a unitary change of basis (a cyclic relabelling
//! x → z → y → x of the spin axes), so the spectrum is that of the usual
//! complex representation while the matrix is real symmetric.

mod levels;

pub use levels::{
    lsd_verdict, poisson_cdf, poisson_density, spacing_histogram, unfold, wigner_cdf,
    wigner_density, SpacingHistogram, UnfoldOptions, Verdict, VerdictOptions, VerdictReport,
};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of spins.
pub const DEFAULT_MAX_N: usize = 14;
/// Environment variable overriding [`DEFAULT_MAX_N`].
pub const MAX_N_ENV: &str = "IGAC_MAX_N";
/// Tolerance on `max |H − H†|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Full,
    /// Even under site reflection `j ↔ n−1−j`.
    #[default]
    ReflectionEven,
    ReflectionOdd,
}

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Full => "full",
            Sector::ReflectionEven => "reflection_even",
            Sector::ReflectionOdd => "reflection_odd",
        }
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Sector::Full),
            "reflection_even" | "even" => Ok(Sector::ReflectionEven),
            "reflection_odd" | "odd" => Ok(Sector::ReflectionOdd),
            _ => Err(Error::Validation(format!(
                "unknown sector `{s}` (expected full, reflection_even or reflection_odd)"
            ))),
        }
    }
}

/// An open chain of `n` spins in the field `(h_x, h_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub hx: f64,
    pub hy: f64,
    #[serde(default)]
    pub sector: Sector,
}

impl ChainSpec {
    pub fn new(n: usize, hx: f64, hy: f64, sector: Sector) -> Self {
        Self { n, hx, hy, sector }
    }

    /// Spin ceiling from `IGAC_MAX_N`, falling back to [`DEFAULT_MAX_N`].
    pub fn max_n() -> usize {
        std::env::var(MAX_N_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_N)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_max(Self::max_n())
    }

    pub fn validate_with_max(&self, max_n: usize) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("chain needs at least one spin".into()));
        }
        if self.n > max_n {
            return Err(Error::Resource {
                what: "spins".into(),
                requested: self.n,
                max: max_n,
            });
        }
        if !self.hx.is_finite() || !self.hy.is_finite() {
            return Err(Error::Validation(format!(
                "field components must be finite, got ({}, {})",
                self.hx, self.hy
            )));
        }
        Ok(())
    }

    /// Dimension of the sector basis.
    pub fn sector_dim(&self) -> usize {
        sector_basis(self.n, self.sector).len()
    }
}

fn reflect(s: usize, n: usize) -> usize {
    let mut r = 0;
    for j in 0..n {
        if s >> j & 1 == 1 {
            r |= 1 << (n - 1 - j);
        }
    }
    r
}

/// One basis vector of a sector: `|rep⟩` or `(|rep⟩ ± |R rep⟩)/√2`.
#[derive(Debug, Clone, Copy)]
struct SectorState {
    rep: usize,
    mirror: usize,
}

fn sector_basis(n: usize, sector: Sector) -> Vec<SectorState> {
    let dim = 1usize << n;
    if sector == Sector::Full {
        return (0..dim).map(|s| SectorState { rep: s, mirror: s }).collect();
    }
    (0..dim)
        .filter_map(|s| {
            let r = reflect(s, n);
            if r < s {
                return None;
            }
            if r == s && sector == Sector::ReflectionOdd {
                return None;
            }
            Some(SectorState { rep: s, mirror: r })
        })
        .collect()
}

fn diagonal_energy(s: usize, spec: &ChainSpec) -> f64 {
    let spin = |j: usize| if s >> j & 1 == 0 { 1.0 } else { -1.0 };
    let mut e = 0.0;
    for j in 0..spec.n {
        e += spec.hx * spin(j);
        if j + 1 < spec.n {
            e += spin(j) * spin(j + 1);
        }
    }
    e
}

/// The Hamiltonian in the requested sector, as a real symmetric matrix.
pub fn build_hamiltonian_real(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.n;
    let basis = sector_basis(n, spec.sector);
    let dim = basis.len();
    let full = 1usize << n;
    let odd = spec.sector == Sector::ReflectionOdd;

    // Index and coefficient of each product state inside the sector basis.
    let mut index = vec![usize::MAX; full];
    let mut coef = vec![0.0; full];
    for (k, b) in basis.iter().enumerate() {
        if b.rep == b.mirror {
            index[b.rep] = k;
            coef[b.rep] = 1.0;
        } else {
            index[b.rep] = k;
            index[b.mirror] = k;
            coef[b.rep] = std::f64::consts::FRAC_1_SQRT_2;
            coef[b.mirror] = if odd {
                -std::f64::consts::FRAC_1_SQRT_2
            } else {
                std::f64::consts::FRAC_1_SQRT_2
            };
        }
    }

    let mut h = DMatrix::zeros(dim, dim);
    for (a, b) in basis.iter().enumerate() {
        let members: &[usize] = if b.rep == b.mirror {
            &[b.rep]
        } else {
            &[b.rep, b.mirror]
        };
        for &x in members {
            let cx = coef[x];
            h[(a, a)] += cx * cx * diagonal_energy(x, spec);
            if spec.hy != 0.0 {
                for j in 0..n {
                    let y = x ^ (1 << j);
                    let k = index[y];
                    if k != usize::MAX {
                        h[(k, a)] += spec.hy * cx * coef[y];
                    }
                }
            }
        }
    }
    Ok(h)
}

/// The Hamiltonian as a complex Hermitian matrix.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<DMatrix<Complex<f64>>> {
    Ok(build_hamiltonian_real(spec)?.map(|x| Complex::new(x, 0.0)))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn diagonalize(h: &DMatrix<Complex<f64>>) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::Shape {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    let mut real = true;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
            real &= h[(i, j)].im == 0.0;
        }
    }
    if dev > HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian: max |H - H†| = {dev:e}"
        )));
    }
    if real || n == 0 {
        return diagonalize_real(&h.map(|z| z.re));
    }
    let mut eigs: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn diagonalize_real(h: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::Shape {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    let dev = (h - h.transpose()).amax();
    if dev > HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "matrix is not symmetric: max |H - Hᵀ| = {dev:e}"
        )));
    }
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let mut eigs: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Spectrum of the chain.
pub fn spectrum(spec: &ChainSpec) -> Result<Vec<f64>> {
    diagonalize_real(&build_hamiltonian_real(spec)?)
}

/// Eigenvalues, unfolded spacings and the level-statistics verdict of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub spec: ChainSpec,
    pub eigenvalues: Vec<f64>,
    pub unfolded_spacings: Vec<f64>,
    pub ks_poisson: f64,
    pub ks_wigner: f64,
    pub verdict: Verdict,
}

/// Diagonalizes, unfolds and classifies in one go.
pub fn analyze(
    spec: &ChainSpec,
    unfold_opts: &UnfoldOptions,
    verdict_opts: &VerdictOptions,
) -> Result<SpectrumRecord> {
    let eigenvalues = spectrum(spec)?;
    let unfolded_spacings = unfold(&eigenvalues, unfold_opts)?;
    let v = lsd_verdict(&unfolded_spacings, verdict_opts)?;
    Ok(SpectrumRecord {
        spec: *spec,
        eigenvalues,
        unfolded_spacings,
        ks_poisson: v.ks_poisson,
        ks_wigner: v.ks_wigner,
        verdict: v.verdict,
    })
}
