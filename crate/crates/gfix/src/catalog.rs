//! Built-in spaces, maps and gauge functions, addressed by name.

use gfix_core::contraction::GaugeFunction;
use gfix_core::dynamics::{RealMap, TableMap};
use gfix_core::gspace::{FiniteSpace, FnSpace, RealSpace};
use gfix_core::oracle::{build_gmetric, FiniteMetric};
use gfix_core::{Carrier, GMetricSpace, Rational, Scalar};

use crate::error::CliError;

pub const SPACES: &[&str] = &[
    "absmax",
    "perimeter-r",
    "finite-uniform-<m>",
    "drop-z",
    "skew",
];
pub const MAPS: &[&str] = &[
    "moebius",
    "scale-<c>",
    "identity",
    "constant-<c>",
    "step",
    "table:<i,j,..>",
];
pub const GAUGES: &[&str] = &["ratio1", "half", "scaled-<c>", "identity-diag"];

pub type DynRealSpace = Box<dyn GMetricSpace<Value = f64> + Send + Sync>;

/// A resolved space: float spaces on the line, exact spaces on finite sets.
pub enum SpaceHandle {
    Real(DynRealSpace),
    Finite(FiniteSpace<Rational>),
}

impl SpaceHandle {
    pub fn carrier(&self) -> Carrier {
        match self {
            SpaceHandle::Real(s) => s.carrier(),
            SpaceHandle::Finite(s) => s.carrier(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            SpaceHandle::Real(s) => s.name(),
            SpaceHandle::Finite(s) => s.name(),
        }
    }
}

fn unknown(kind: &str, name: &str, known: &[&str]) -> CliError {
    CliError::Usage(format!(
        "unknown {kind} `{name}` (known: {})",
        known.join(", ")
    ))
}

fn suffix_param<T: std::str::FromStr>(name: &str, prefix: &str) -> Option<T> {
    name.strip_prefix(prefix).and_then(|s| s.parse().ok())
}

pub fn space(name: &str) -> Result<SpaceHandle, CliError> {
    Ok(match name {
        "absmax" => SpaceHandle::Real(Box::new(RealSpace::absmax())),
        "perimeter-r" => SpaceHandle::Real(Box::new(RealSpace::perimeter())),
        // keeps only |x - y|: G(x, x, y) = 0 although x != y
        "drop-z" => SpaceHandle::Real(Box::new(FnSpace::new("drop-z", 1, |x, y, _| {
            (x[0] - y[0]).abs()
        }))),
        // claims symmetry it does not have: G(x, y, y) = 3|x - y|, G(x, x, y) = 2|x - y|
        "skew" => SpaceHandle::Real(Box::new(FnSpace::new("skew", 1, |x, y, z| {
            (x[0] - y[0]).abs() + 2.0 * (x[0] - z[0]).abs()
        }))),
        _ => match suffix_param::<usize>(name, "finite-uniform-") {
            Some(m) if m >= 1 => SpaceHandle::Finite(build_gmetric(
                name,
                &FiniteMetric::uniform(m)?,
                gfix_core::gspace::Construction::Max,
            )),
            _ => return Err(unknown("space", name, SPACES)),
        },
    })
}

pub enum MapHandle {
    Real(RealMap),
    Table(TableMap),
}

fn finite_size(carrier: Carrier) -> Option<usize> {
    match carrier {
        Carrier::Finite { size } => Some(size),
        Carrier::Real { .. } => None,
    }
}

/// Resolve a map for the given carrier.
pub fn map(name: &str, carrier: Carrier) -> Result<MapHandle, CliError> {
    if let Some(size) = finite_size(carrier) {
        let table: Vec<usize> = if name == "identity" {
            (0..size).collect()
        } else if let Some(c) = suffix_param::<usize>(name, "constant-") {
            vec![c; size]
        } else if let Some(list) = name.strip_prefix("table:") {
            list.split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad map table `{list}`")))?
        } else {
            return Err(unknown(
                "map for a finite space",
                name,
                &["identity", "constant-<i>", "table:<i,j,..>"],
            ));
        };
        if table.len() != size {
            return Err(CliError::Usage(format!(
                "map table has {} entries, space has {size} points",
                table.len()
            )));
        }
        return Ok(MapHandle::Table(TableMap::new(table)?));
    }
    let f = match name {
        "moebius" => RealMap::scalar(name, |x| x / (x + 1.0)),
        "identity" => RealMap::scalar(name, |x| x),
        "step" => RealMap::scalar(name, |x| if x <= 1.0 { 0.0 } else { 1.0 }),
        _ => {
            if let Some(c) = suffix_param::<f64>(name, "scale-").filter(|c| c.is_finite()) {
                RealMap::scalar(name, move |x| c * x)
            } else if let Some(c) = suffix_param::<f64>(name, "constant-").filter(|c| c.is_finite())
            {
                RealMap::scalar(name, move |_| c)
            } else {
                return Err(unknown("map", name, MAPS));
            }
        }
    };
    Ok(MapHandle::Real(f))
}

/// Scalars that catalog parameters can be converted into.
pub trait ParamScalar: Scalar {
    fn from_param(v: f64) -> Option<Self>;
    fn from_rational(r: Rational) -> Self;
}

impl ParamScalar for f64 {
    fn from_param(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }
    fn from_rational(r: Rational) -> Self {
        r.to_f64()
    }
}

/// Floats convert to the simplest nearby fraction, so `0.9` becomes `9/10`.
impl ParamScalar for Rational {
    fn from_param(v: f64) -> Option<Self> {
        Rational::approximate(v)
    }
    fn from_rational(r: Rational) -> Self {
        r
    }
}

pub fn param<S: ParamScalar>(name: &str, v: f64) -> Result<S, CliError> {
    S::from_param(v)
        .ok_or_else(|| CliError::Usage(format!("parameter {name} = {v} is not representable")))
}

pub fn gauge<S: ParamScalar>(name: &str) -> Result<GaugeFunction<S>, CliError> {
    let two = S::from_int(2);
    Ok(match name {
        "ratio1" => GaugeFunction::new(name, |t1: S, _, _| t1 / (t1 + S::one())),
        "half" => GaugeFunction::new(name, move |a: S, b: S, c: S| a.sup(b).sup(c) / two),
        "identity-diag" => GaugeFunction::new(name, |t1: S, _, _| t1),
        _ => match suffix_param::<f64>(name, "scaled-") {
            Some(c) if c >= 0.0 => {
                let c: S = param(name, c)?;
                GaugeFunction::new(name, move |a: S, b: S, t: S| c * a.sup(b).sup(t))
            }
            _ => return Err(unknown("gauge", name, GAUGES)),
        },
    })
}
