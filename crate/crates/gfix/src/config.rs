//! Run configuration: one JSON document, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gfix_core::contraction::{AuxWeight, ConditionId};
use gfix_core::gspace::Construction;
use gfix_core::oracle::{BaseQuantifier, TheoremId, TripleScope, DEFAULT_CAP};
use gfix_core::{Rational, Tolerance};
use serde::{Deserialize, Serialize};

use crate::catalog::ParamScalar;
use crate::error::CliError;

/// Default comparison slack when neither `--tol` nor `tol` is given.
pub const DEFAULT_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-12,
};

/// A numeric parameter: a JSON number, or a string holding an exact
/// rational such as `"9/10"`. Exact spaces use the rational as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    pub fn resolve<S: ParamScalar>(&self, what: &str) -> Result<S, CliError> {
        match self {
            Num::Float(v) => crate::catalog::param(what, *v),
            Num::Text(s) => s
                .trim()
                .parse::<Rational>()
                .map(S::from_rational)
                .map_err(|_| CliError::Usage(format!("{what}: `{s}` is not a rational"))),
        }
    }

    pub fn to_f64(&self, what: &str) -> Result<f64, CliError> {
        self.resolve::<f64>(what)
    }
}

impl FromStr for Num {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains('/') {
            s.trim()
                .parse::<Rational>()
                .map_err(|_| CliError::Usage(format!("`{s}` is not a rational")))?;
            return Ok(Num::Text(s.trim().to_string()));
        }
        s.trim()
            .parse::<f64>()
            .map(Num::Float)
            .map_err(|_| CliError::Usage(format!("`{s}` is not a number")))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Float(v) => write!(f, "{v}"),
            Num::Text(s) => f.write_str(s),
        }
    }
}

/// Either a catalog name or a metric table file with a construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSelector {
    Name(String),
    Table(MetricTableSpace),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricTableSpace {
    pub metric_table: PathBuf,
    #[serde(default = "default_construction")]
    pub construction: Construction,
}

fn default_construction() -> Construction {
    Construction::Max
}

/// Auxiliary weight `a`: `"zero"`, `{"constant": c}` or `{"reciprocal-cap": c}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxConfig {
    #[default]
    Zero,
    Constant(Num),
    ReciprocalCap(Num),
}

impl AuxConfig {
    pub fn build<S: ParamScalar>(&self) -> Result<AuxWeight<S>, CliError> {
        Ok(match self {
            AuxConfig::Zero => AuxWeight::Zero,
            AuxConfig::Constant(c) => AuxWeight::constant(c.resolve("a")?)?,
            AuxConfig::ReciprocalCap(c) => AuxWeight::reciprocal_cap(c.resolve("a")?)?,
        })
    }
}

impl FromStr for AuxConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "zero" {
            return Ok(AuxConfig::Zero);
        }
        match s.split_once(':') {
            Some(("constant", c)) => Ok(AuxConfig::Constant(c.parse()?)),
            Some(("reciprocal-cap", c)) => Ok(AuxConfig::ReciprocalCap(c.parse()?)),
            _ => Err(CliError::Usage(format!(
                "weight `{s}` (expected zero, constant:<c> or reciprocal-cap:<c>)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<ConditionId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Num>,
    pub a: AuxConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Start point: a number on the line, a coordinate list, or a point index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<StartPoint>,
    pub eps_stop: f64,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_q: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            x0: None,
            eps_stop: 1e-10,
            max_iter: 10_000,
            certified_q: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPoint {
    Scalar(f64),
    Coords(Vec<f64>),
}

impl FromStr for StartPoint {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("start point `{s}`")))?;
        Ok(match parts.as_slice() {
            [x] => StartPoint::Scalar(*x),
            _ => StartPoint::Coords(parts),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub count: usize,
    pub range: [f64; 2],
    pub seed: u64,
    /// Sample size for the axiom check on infinite carriers.
    pub axiom_points: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            count: 10_000,
            range: [0.0, 100.0],
            seed: 0,
            axiom_points: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub grid: Vec<f64>,
    pub n_max: u64,
    pub thresh: f64,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            name: None,
            grid: vec![1e-3, 0.1, 1.0, 10.0, 1e3],
            n_max: 10_000_000,
            thresh: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremId>,
    pub scope: TripleScope,
    pub base: BaseQuantifier,
    pub cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            theorem: None,
            scope: TripleScope::Carrier,
            base: BaseQuantifier::All,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViolateConfig {
    /// Values of q to search; empty means the condition's own q.
    pub q_grid: Vec<f64>,
    /// Log-spaced grid points per axis.
    pub resolution: usize,
    pub bisection_steps: usize,
}

impl Default for ViolateConfig {
    fn default() -> Self {
        Self {
            q_grid: Vec::new(),
            resolution: 40,
            bisection_steps: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSelector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    /// Absolute comparison slack; replaces the default mixed tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Output directory. Kept out of reports so reruns elsewhere compare equal.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub condition: ConditionConfig,
    pub solver: SolverConfig,
    pub sampling: SamplingConfig,
    pub gauge: GaugeConfig,
    pub oracle: OracleConfig,
    pub violate: ViolateConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn tolerance(&self) -> Result<Tolerance, CliError> {
        match self.tol {
            None => Ok(DEFAULT_TOL),
            Some(t) if t >= 0.0 && t.is_finite() => Ok(Tolerance::absolute(t)),
            Some(t) => Err(CliError::Usage(format!(
                "tol = {t} must be finite and non-negative"
            ))),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from("gfix-out"))
    }

    pub fn space_selector(&self) -> Result<&SpaceSelector, CliError> {
        self.space
            .as_ref()
            .ok_or_else(|| CliError::Usage("no space selected (use --space or `space`)".into()))
    }

    pub fn map_name(&self) -> Result<&str, CliError> {
        self.map
            .as_deref()
            .ok_or_else(|| CliError::Usage("no map selected (use --map or `map`)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"space": "absmax", "sampling": {"cnt": 3}}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let bad = r#"{"spcae": "absmax"}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let c: RunConfig =
            serde_json::from_str(r#"{"space": "absmax", "map": "moebius"}"#).unwrap();
        assert_eq!(c.sampling, SamplingConfig::default());
        assert_eq!(c.sampling.count, 10_000);
        assert_eq!(c.sampling.range, [0.0, 100.0]);
        assert_eq!(c.tolerance().unwrap(), DEFAULT_TOL);
    }

    #[test]
    fn nested_selectors_parse() {
        let c: RunConfig = serde_json::from_str(
            r#"{"space": {"metric_table": "m.txt", "construction": "perimeter"},
                "condition": {"id": "C-Q", "q": "9/10", "a": {"reciprocal-cap": 3}}}"#,
        )
        .unwrap();
        assert!(
            matches!(c.space, Some(SpaceSelector::Table(ref t)) if t.construction == Construction::Perimeter)
        );
        assert_eq!(c.condition.id, Some(ConditionId::Q));
        let q: Rational = c.condition.q.unwrap().resolve("q").unwrap();
        assert_eq!(q, Rational::new(9, 10));
        assert_eq!(c.condition.a, AuxConfig::ReciprocalCap(Num::Float(3.0)));
    }

    #[test]
    fn command_line_forms_parse() {
        assert_eq!("zero".parse::<AuxConfig>().unwrap(), AuxConfig::Zero);
        assert_eq!(
            "constant:1/4".parse::<AuxConfig>().unwrap(),
            AuxConfig::Constant(Num::Text("1/4".into()))
        );
        assert!("const:1".parse::<AuxConfig>().is_err());
        assert_eq!(
            "1,2".parse::<StartPoint>().unwrap(),
            StartPoint::Coords(vec![1.0, 2.0])
        );
        assert!("x".parse::<Num>().is_err());
    }

    #[test]
    fn out_is_not_serialized() {
        let c = RunConfig {
            out: Some("/tmp/elsewhere".into()),
            ..RunConfig::default()
        };
        assert!(!serde_json::to_string(&c).unwrap().contains("elsewhere"));
    }
}
