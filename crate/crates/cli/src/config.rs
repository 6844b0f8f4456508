//! Run configuration: TOML with sections, numbers may be written as quoted
//! fractions such as `alpha1 = "-1/2"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use plapsys_core::bounds::MoserOptions;
use plapsys_core::fixedpoint::{default_schedule, CertificationTolerances, ContinuationOptions, PicardOptions};
use plapsys_core::{Boundary, ExponentConfig, Grading, WeightSpec};

use crate::error::CliError;

/// A number given either as a TOML number or as a string `"a/b"` / `"x"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "NumRepr")]
pub struct Num(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum NumRepr {
    Int(i64),
    Float(f64),
    Text(String),
}

impl TryFrom<NumRepr> for Num {
    type Error = String;

    fn try_from(r: NumRepr) -> Result<Self, String> {
        match r {
            NumRepr::Int(i) => Ok(Num(i as f64)),
            NumRepr::Float(x) => Ok(Num(x)),
            NumRepr::Text(s) => parse_fraction(&s).map(Num),
        }
    }
}

/// `"-1/2"` -> -0.5, `"0.25"` -> 0.25.
pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.split_once('/') {
        Some((a, b)) => {
            let num: f64 = a.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let den: f64 = b.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            num / den
        }
        None => t.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("non-finite number {s:?}"))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExponents {
    #[serde(rename = "N")]
    dim: usize,
    p1: Num,
    p2: Num,
    alpha1: Num,
    alpha2: Num,
    beta1: Num,
    beta2: Num,
    m1: Num,
    #[serde(rename = "M1")]
    big_m1: Num,
    m2: Num,
    #[serde(rename = "M2")]
    big_m2: Num,
    zeta1: Num,
    zeta2: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "N")]
    dim: Option<usize>,
    r_max: Num,
    nodes: usize,
    #[serde(default = "default_grading")]
    grading: String,
    ratio: Option<Num>,
    exponent: Option<Num>,
    #[serde(default = "default_boundary")]
    boundary: String,
}

fn default_grading() -> String {
    "uniform".into()
}

fn default_boundary() -> String {
    "far_field".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    family: String,
    amplitude: Num,
    lambda: Option<Num>,
    radius: Option<Num>,
    power: Option<Num>,
    sigma: Option<Num>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    a1: RawWeight,
    a2: RawWeight,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    theta: Option<Num>,
    tol: Option<Num>,
    max_iter: Option<usize>,
    eps: Option<Vec<Num>>,
    eps_steps: Option<usize>,
    residual_tol: Option<Num>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    xi1: Option<Num>,
    xi2: Option<Num>,
    kappa0: Option<Num>,
    tail_tol: Option<Num>,
    min_terms: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    exponents: RawExponents,
    grid: RawGrid,
    weight: RawWeights,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    bounds: RawBounds,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format {other:?} (expected json, csv or svg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub r_max: f64,
    pub nodes: usize,
    pub grading: Grading,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub exponents: ExponentConfig,
    pub grid: GridConfig,
    pub a1: WeightSpec,
    pub a2: WeightSpec,
    pub continuation: ContinuationOptions,
    pub certification: CertificationTolerances,
    pub moser: MoserOptions,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

fn weight(w: &RawWeight, label: &str) -> Result<WeightSpec, CliError> {
    let need = |v: Option<Num>, name: &str| {
        v.map(|n| n.0).ok_or_else(|| CliError::Config(format!("weight.{label}: missing `{name}` for family {}", w.family)))
    };
    let amplitude = w.amplitude.0;
    let spec = match w.family.as_str() {
        "gaussian" => WeightSpec::Gaussian { amplitude, lambda: need(w.lambda, "lambda")? },
        "bump" => WeightSpec::Bump { amplitude, radius: need(w.radius, "radius")?, power: need(w.power, "power")? },
        "power_decay" => WeightSpec::PowerDecay { amplitude, sigma: need(w.sigma, "sigma")? },
        other => return Err(CliError::Config(format!("weight.{label}: unknown family {other:?}"))),
    };
    spec.validate().map_err(|e| CliError::Config(format!("weight.{label}: {e}")))?;
    Ok(spec)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let e = &raw.exponents;
        let exponents = ExponentConfig {
            dim: e.dim,
            p1: e.p1.0,
            p2: e.p2.0,
            alpha1: e.alpha1.0,
            alpha2: e.alpha2.0,
            beta1: e.beta1.0,
            beta2: e.beta2.0,
            m1: e.m1.0,
            big_m1: e.big_m1.0,
            m2: e.m2.0,
            big_m2: e.big_m2.0,
            zeta1: e.zeta1.0,
            zeta2: e.zeta2.0,
        };
        let g = &raw.grid;
        if let Some(n) = g.dim {
            if n != e.dim {
                return Err(CliError::Config(format!("grid.N = {n} differs from exponents.N = {}", e.dim)));
            }
        }
        let grading = match g.grading.as_str() {
            "uniform" => Grading::Uniform,
            "geometric" => Grading::Geometric {
                ratio: g.ratio.ok_or_else(|| CliError::Config("grid.ratio required for geometric grading".into()))?.0,
            },
            "power" => Grading::Power { exponent: g.exponent.map_or(2.0, |x| x.0) },
            other => return Err(CliError::Config(format!("unknown grading {other:?}"))),
        };
        let boundary = match g.boundary.as_str() {
            "far_field" => Boundary::FarField,
            "dirichlet" => Boundary::Dirichlet,
            other => return Err(CliError::Config(format!("unknown boundary {other:?}"))),
        };
        let s = &raw.solver;
        let schedule = match (&s.eps, s.eps_steps) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either solver.eps or solver.eps_steps".into())),
            (Some(list), None) => list.iter().map(|x| x.0).collect(),
            (None, steps) => default_schedule(steps.unwrap_or(6)),
        };
        let picard = PicardOptions {
            theta: s.theta.map_or(1.0, |x| x.0),
            tol: s.tol.map_or(1e-8, |x| x.0),
            max_iter: s.max_iter.unwrap_or(200),
        };
        let certification = CertificationTolerances {
            residual: s.residual_tol.map_or(1e-6, |x| x.0),
            ..CertificationTolerances::default()
        };
        let b = &raw.bounds;
        let defaults = MoserOptions::default();
        let moser = MoserOptions {
            xi1: b.xi1.map(|x| x.0),
            xi2: b.xi2.map(|x| x.0),
            kappa0: b.kappa0.map_or(defaults.kappa0, |x| x.0),
            tail_tol: b.tail_tol.map_or(defaults.tail_tol, |x| x.0),
            min_terms: b.min_terms.unwrap_or(defaults.min_terms),
        };
        let mut formats = match &raw.output.formats {
            Some(list) => list.iter().map(|f| f.parse().map_err(CliError::Config)).collect::<Result<Vec<Format>, _>>()?,
            None => vec![Format::Json, Format::Csv, Format::Svg],
        };
        formats.sort();
        formats.dedup();
        Ok(RunConfig {
            exponents,
            grid: GridConfig { r_max: g.r_max.0, nodes: g.nodes, grading, boundary },
            a1: weight(&raw.weight.a1, "a1")?,
            a2: weight(&raw.weight.a2, "a2")?,
            continuation: ContinuationOptions { schedule, picard },
            certification,
            moser,
            output_dir: raw.output.dir.clone(),
            formats,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
