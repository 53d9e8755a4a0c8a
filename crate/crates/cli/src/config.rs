//! Effective run configuration: defaults, overridden by a JSON config
//! file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Global {
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub plot: bool,
    pub jobs: usize,
}

impl Default for Global {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("igac-out"),
            format: Format::Csv,
            plot: false,
            jobs: 1,
        }
    }
}

/// Recursively overlays `top` onto `base`. Nulls in `top` leave `base` alone.
pub fn overlay(base: &mut Value, top: &Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                if v.is_null() {
                    continue;
                }
                match b.get_mut(k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, t) if !t.is_null() => *b = t.clone(),
        _ => {}
    }
}

pub fn load_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation("config", format!("cannot read {}: {e}", path.display()))
    })?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))?;
    if !v.is_object() {
        return Err(CliError::validation("config", "config file must hold a JSON object"));
    }
    Ok(v)
}

/// Resolves one config section: `defaults ← file[section] ← cli`.
pub fn resolve<T: Serialize + DeserializeOwned + Default>(
    file: Option<&Value>,
    section: Option<&str>,
    cli: &Value,
) -> Result<T, CliError> {
    let mut v = serde_json::to_value(T::default()).map_err(|e| CliError::internal(e.to_string()))?;
    if let Some(f) = file {
        let part = match section {
            Some(s) => f.get(s).cloned().unwrap_or(Value::Null),
            None => {
                // Global keys live at the top level next to command sections.
                let mut m = Map::new();
                if let (Value::Object(d), Value::Object(src)) = (&v, f) {
                    for k in d.keys() {
                        if let Some(x) = src.get(k) {
                            m.insert(k.clone(), x.clone());
                        }
                    }
                }
                Value::Object(m)
            }
        };
        overlay(&mut v, &part);
    }
    overlay(&mut v, cli);
    serde_json::from_value(v).map_err(|e| {
        CliError::validation(section.unwrap_or("config"), format!("invalid configuration: {e}"))
    })
}

fn number(field: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::validation(field, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::validation(field, format!("`{s}` is not finite")));
    }
    Ok(v)
}

/// `"1,0,1"`.
pub fn parse_vector(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Err(CliError::validation(field, "empty vector"));
    }
    s.split(',').map(|p| number(field, p)).collect()
}

/// `"a:b"`.
pub fn parse_window(field: &str, s: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| CliError::validation(field, format!("expected start:end, got `{s}`")))?;
    let (a, b) = (number(field, a)?, number(field, b)?);
    if !(a < b) {
        return Err(CliError::validation(field, format!("window start must be below end, got `{s}`")));
    }
    Ok((a, b))
}

/// Either `name=value,...` covering every name, or bare positional values.
pub fn parse_point(field: &str, s: &str, names: &[&str]) -> Result<Vec<f64>, CliError> {
    if !s.contains('=') {
        let v = parse_vector(field, s)?;
        if v.len() != names.len() {
            return Err(CliError::validation(
                field,
                format!("expected {} values ({}), got {}", names.len(), names.join(","), v.len()),
            ));
        }
        return Ok(v);
    }
    let mut out = vec![None; names.len()];
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::validation(field, format!("expected name=value, got `{part}`")))?;
        let i = names
            .iter()
            .position(|n| *n == k.trim())
            .ok_or_else(|| CliError::validation(field, format!("unknown parameter `{}` (expected {})", k.trim(), names.join(","))))?;
        out[i] = Some(number(field, v)?);
    }
    out.iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| CliError::validation(field, format!("missing value for `{n}`"))))
        .collect()
}

/// `name=start:stop:count` (inclusive, evenly spaced) or `name=value`,
/// comma-separated. Parameters not named fall back to `base`.
pub fn parse_grid(
    field: &str,
    s: &str,
    names: &[&str],
    base: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>, CliError> {
    let mut axes: Vec<Option<Vec<f64>>> = vec![None; names.len()];
    for part in s.split(',') {
        let (k, spec) = part
            .split_once('=')
            .ok_or_else(|| CliError::validation(field, format!("expected name=start:stop:count, got `{part}`")))?;
        let i = names
            .iter()
            .position(|n| *n == k.trim())
            .ok_or_else(|| CliError::validation(field, format!("unknown parameter `{}` (expected {})", k.trim(), names.join(","))))?;
        let pieces: Vec<&str> = spec.split(':').collect();
        let values = match pieces.as_slice() {
            [v] => vec![number(field, v)?],
            [a, b, c] => {
                let (a, b) = (number(field, a)?, number(field, b)?);
                let count: usize = c
                    .trim()
                    .parse()
                    .map_err(|_| CliError::validation(field, format!("`{c}` is not a point count")))?;
                if count == 0 {
                    return Err(CliError::validation(field, "grid count must be positive"));
                }
                if count == 1 {
                    vec![a]
                } else {
                    (0..count).map(|j| a + (b - a) * j as f64 / (count - 1) as f64).collect()
                }
            }
            _ => {
                return Err(CliError::validation(
                    field,
                    format!("expected start:stop:count for `{}`, got `{spec}`", k.trim()),
                ))
            }
        };
        axes[i] = Some(values);
    }
    let axes: Vec<Vec<f64>> = axes
        .into_iter()
        .enumerate()
        .map(|(i, a)| match (a, base) {
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(vec![b[i]]),
            (None, None) => Err(CliError::validation(field, format!("no values for `{}`", names[i]))),
        })
        .collect::<Result<_, _>>()?;
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub family: String,
    pub grid: Option<String>,
    pub point: Option<String>,
    pub nodes: usize,
    pub tol: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            family: "composite_chaotic".into(),
            grid: None,
            point: None,
            nodes: 200,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureParams {
    pub manifold: String,
    pub grid: Option<String>,
    pub point: Option<String>,
    /// Random sample size used when neither grid nor point is given.
    pub samples: usize,
    pub fd_step: f64,
}

impl Default for CurvatureParams {
    fn default() -> Self {
        Self {
            manifold: "chaotic".into(),
            grid: None,
            point: None,
            samples: 50,
            fd_step: igac::geometry::DEFAULT_FD_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicParams {
    pub manifold: String,
    /// Defaults to a manifold-specific expanding start.
    pub theta0: Option<String>,
    pub v0: Option<String>,
    pub tau_max: f64,
    pub tol: f64,
    /// `None` leaves the step unbounded.
    pub max_step: Option<f64>,
}

impl Default for GeodesicParams {
    fn default() -> Self {
        Self {
            manifold: "integrable".into(),
            theta0: None,
            v0: None,
            tau_max: 10.0,
            tol: 1e-10,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JacobiParams {
    #[serde(flatten)]
    pub geodesic: GeodesicParams,
    /// Defaults to zero.
    pub j0: Option<String>,
    /// Defaults to the unit vector along the last coordinate.
    pub dj0: Option<String>,
    /// Defaults to `[τ_max/3, τ_max]`.
    pub window: Option<String>,
}

impl Default for JacobiParams {
    fn default() -> Self {
        Self {
            geodesic: GeodesicParams {
                manifold: "gaussian".into(),
                tau_max: 30.0,
                max_step: Some(0.05),
                ..GeodesicParams::default()
            },
            j0: None,
            dj0: None,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IgeParams {
    #[serde(flatten)]
    pub geodesic: GeodesicParams,
    pub quad_nodes: usize,
    /// Defaults to `[τ_max/10, τ_max]`.
    pub window: Option<String>,
    /// When set, `K_IG` is compared against this Jacobi exponent.
    pub lambda_j: Option<f64>,
}

impl Default for IgeParams {
    fn default() -> Self {
        Self {
            geodesic: GeodesicParams {
                manifold: "chaotic".into(),
                tau_max: 100.0,
                max_step: Some(0.1),
                ..GeodesicParams::default()
            },
            quad_nodes: 16,
            window: None,
            lambda_j: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub n: usize,
    pub hx: f64,
    pub hy: f64,
    pub sector: String,
    pub poly_degree: usize,
    pub trim: f64,
    pub margin: f64,
    pub max_ks: f64,
    pub bins: usize,
}

impl Default for ChainParams {
    fn default() -> Self {
        let u = igac::spinchain::UnfoldOptions::default();
        let v = igac::spinchain::VerdictOptions::default();
        Self {
            n: 11,
            hx: 1.0,
            hy: 1.0,
            sector: "reflection_even".into(),
            poly_degree: u.poly_degree,
            trim: u.trim_fraction,
            margin: v.margin,
            max_ks: v.max_ks,
            bins: 40,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportParams {
    pub inputs: Vec<PathBuf>,
}
