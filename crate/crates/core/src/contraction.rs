//! Contractive conditions, gauge functions and the uniqueness clauses.
//!
//! Every evaluator records both sides of the inequality it decides, so any
//! verdict can be re-derived from its triple.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::dynamics::SelfMap;
use crate::error::{param, Error, Result};
use crate::gspace::{GMetricSpace, Verdict};
use crate::point::{cmp_points, Point};
use crate::scalar::{approx_eq, approx_le, definitely_lt, Scalar, Tolerance};

/// The weight `a(x, y, z) >= 0`.
#[derive(Clone)]
pub enum AuxWeight<S> {
    Zero,
    Constant(S),
    /// `min(c, 1 / (G(x,y,z) G(Tx,Ty,Tz)))`, and `0` where that product is `0`.
    ReciprocalCap(S),
    /// Values on listed triples; every other triple weighs `0`.
    Custom(Arc<Vec<([Point; 3], S)>>),
}

impl<S: Scalar> AuxWeight<S> {
    pub fn constant(c: S) -> Result<Self> {
        if !(c >= S::zero()) || !c.is_finite() {
            return Err(param(
                "a",
                format!("constant {c} must be finite and nonnegative"),
            ));
        }
        Ok(AuxWeight::Constant(c))
    }

    pub fn reciprocal_cap(c: S) -> Result<Self> {
        if !(c >= S::zero()) || !c.is_finite() {
            return Err(param(
                "a",
                format!("cap {c} must be finite and nonnegative"),
            ));
        }
        Ok(AuxWeight::ReciprocalCap(c))
    }

    pub fn custom(table: Vec<([Point; 3], S)>) -> Result<Self> {
        if let Some((t, v)) = table
            .iter()
            .find(|(_, v)| !(*v >= S::zero()) || !v.is_finite())
        {
            return Err(param(
                "a",
                format!(
                    "value {v} at ({}, {}, {}) must be finite and nonnegative",
                    t[0], t[1], t[2]
                ),
            ));
        }
        Ok(AuxWeight::Custom(Arc::new(table)))
    }

    pub fn label(&self) -> String {
        match self {
            AuxWeight::Zero => "zero".to_string(),
            AuxWeight::Constant(c) => format!("constant({c})"),
            AuxWeight::ReciprocalCap(c) => format!("reciprocal-cap({c})"),
            AuxWeight::Custom(t) => format!("custom({} entries)", t.len()),
        }
    }

    /// `m1 = G(x,y,z)`, `image = G(Tx,Ty,Tz)`.
    fn weight_from(&self, triple: [&Point; 3], m1: S, image: S) -> S {
        match self {
            AuxWeight::Zero => S::zero(),
            AuxWeight::Constant(c) => *c,
            AuxWeight::ReciprocalCap(c) => {
                let den = m1 * image;
                if den.is_zero() {
                    S::zero()
                } else {
                    c.inf(S::one() / den)
                }
            }
            AuxWeight::Custom(table) => table
                .iter()
                .find(|(t, _)| t[0] == *triple[0] && t[1] == *triple[1] && t[2] == *triple[2])
                .map(|(_, v)| *v)
                .unwrap_or_else(S::zero),
        }
    }

    pub fn evaluate<G, M>(&self, space: &G, map: &M, x: &Point, y: &Point, z: &Point) -> Result<S>
    where
        G: GMetricSpace<Value = S>,
        M: SelfMap,
    {
        let (m1, image) = match self {
            AuxWeight::ReciprocalCap(_) => {
                let (tx, ty, tz) = (map.apply(x)?, map.apply(y)?, map.apply(z)?);
                (space.eval_g(x, y, z)?, space.eval_g(&tx, &ty, &tz)?)
            }
            _ => (S::zero(), S::zero()),
        };
        Ok(self.weight_from([x, y, z], m1, image))
    }
}

impl<S: fmt::Debug> fmt::Debug for AuxWeight<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxWeight::Zero => f.write_str("Zero"),
            AuxWeight::Constant(c) => write!(f, "Constant({c:?})"),
            AuxWeight::ReciprocalCap(c) => write!(f, "ReciprocalCap({c:?})"),
            AuxWeight::Custom(t) => write!(f, "Custom({} entries)", t.len()),
        }
    }
}

type GaugeFn<S> = dyn Fn(S, S, S) -> S + Send + Sync;

/// A named `h: [0, inf)^3 -> [0, inf)`.
#[derive(Clone)]
pub struct GaugeFunction<S> {
    name: String,
    f: Arc<GaugeFn<S>>,
}

impl<S: Scalar> GaugeFunction<S> {
    pub fn new(name: impl Into<String>, f: impl Fn(S, S, S) -> S + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t1: S, t2: S, t3: S) -> S {
        (self.f)(t1, t2, t3)
    }

    /// `g(t) = h(t, t, t)`.
    pub fn diagonal(&self, t: S) -> S {
        self.eval(t, t, t)
    }
}

impl<S> fmt::Debug for GaugeFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaugeFunction({})", self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConditionId {
    #[cfg_attr(feature = "serde", serde(rename = "C-Q"))]
    Q,
    #[cfg_attr(feature = "serde", serde(rename = "C-UNIT"))]
    Unit,
    #[cfg_attr(feature = "serde", serde(rename = "C-GAUGE"))]
    Gauge,
    #[cfg_attr(feature = "serde", serde(rename = "EXT-I"))]
    ExtI,
    #[cfg_attr(feature = "serde", serde(rename = "EXT-II"))]
    ExtII,
    #[cfg_attr(feature = "serde", serde(rename = "EXT-III"))]
    ExtIII,
}

impl ConditionId {
    pub const ALL: [ConditionId; 6] = [
        ConditionId::Q,
        ConditionId::Unit,
        ConditionId::Gauge,
        ConditionId::ExtI,
        ConditionId::ExtII,
        ConditionId::ExtIII,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::Q => "C-Q",
            ConditionId::Unit => "C-UNIT",
            ConditionId::Gauge => "C-GAUGE",
            ConditionId::ExtI => "EXT-I",
            ConditionId::ExtII => "EXT-II",
            ConditionId::ExtIII => "EXT-III",
        }
    }

    /// Strict conditions never accept equality.
    pub fn is_strict(&self) -> bool {
        matches!(self, ConditionId::Q | ConditionId::Unit)
    }

    /// The three max-form conditions quantify over `x != y` only.
    pub fn requires_distinct_xy(&self) -> bool {
        matches!(
            self,
            ConditionId::Q | ConditionId::Unit | ConditionId::Gauge
        )
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditionId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| param("condition", format!("unknown condition `{s}`")))
    }
}

#[derive(Clone, Debug)]
enum Params<S> {
    Q {
        q: S,
        a: AuxWeight<S>,
    },
    Unit {
        a: AuxWeight<S>,
    },
    Gauge {
        a: AuxWeight<S>,
        h: GaugeFunction<S>,
    },
    ExtI {
        alpha: S,
    },
    ExtII {
        beta: S,
    },
    ExtIII {
        delta: S,
    },
}

/// A condition together with exactly the parameters it needs, range-checked.
#[derive(Clone, Debug)]
pub struct ConditionSpec<S> {
    params: Params<S>,
}

fn half<S: Scalar>() -> S {
    S::one() / S::from_int(2)
}

fn in_range<S: Scalar>(name: &'static str, v: S, lo: S, lo_closed: bool, hi: S) -> Result<S> {
    let lo_ok = if lo_closed { v >= lo } else { v > lo };
    if lo_ok && v < hi && v.is_finite() {
        Ok(v)
    } else {
        let open = if lo_closed { "[" } else { "(" };
        Err(param(name, format!("{v} not in {open}{lo}, {hi})")))
    }
}

impl<S: Scalar> ConditionSpec<S> {
    /// `q` in `(0, 1)`.
    pub fn q(q: S, a: AuxWeight<S>) -> Result<Self> {
        let q = in_range("q", q, S::zero(), false, S::one())?;
        Ok(Self {
            params: Params::Q { q, a },
        })
    }

    pub fn unit(a: AuxWeight<S>) -> Self {
        Self {
            params: Params::Unit { a },
        }
    }

    pub fn gauge(a: AuxWeight<S>, h: GaugeFunction<S>) -> Self {
        Self {
            params: Params::Gauge { a, h },
        }
    }

    /// `alpha` in `[1, 3)`.
    pub fn ext_i(alpha: S) -> Result<Self> {
        let alpha = in_range("alpha", alpha, S::one(), true, S::from_int(3))?;
        Ok(Self {
            params: Params::ExtI { alpha },
        })
    }

    /// `beta` in `[1/2, 1)`.
    pub fn ext_ii(beta: S) -> Result<Self> {
        let beta = in_range("beta", beta, half(), true, S::one())?;
        Ok(Self {
            params: Params::ExtII { beta },
        })
    }

    /// `delta` in `[0, 1)`.
    pub fn ext_iii(delta: S) -> Result<Self> {
        let delta = in_range("delta", delta, S::zero(), true, S::one())?;
        Ok(Self {
            params: Params::ExtIII { delta },
        })
    }

    pub fn id(&self) -> ConditionId {
        match self.params {
            Params::Q { .. } => ConditionId::Q,
            Params::Unit { .. } => ConditionId::Unit,
            Params::Gauge { .. } => ConditionId::Gauge,
            Params::ExtI { .. } => ConditionId::ExtI,
            Params::ExtII { .. } => ConditionId::ExtII,
            Params::ExtIII { .. } => ConditionId::ExtIII,
        }
    }

    pub fn aux(&self) -> Option<&AuxWeight<S>> {
        match &self.params {
            Params::Q { a, .. } | Params::Unit { a } | Params::Gauge { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn gauge_fn(&self) -> Option<&GaugeFunction<S>> {
        match &self.params {
            Params::Gauge { h, .. } => Some(h),
            _ => None,
        }
    }

    /// The scalar parameter of the condition, if it has one.
    pub fn coefficient(&self) -> Option<S> {
        match self.params {
            Params::Q { q, .. } => Some(q),
            Params::ExtI { alpha } => Some(alpha),
            Params::ExtII { beta } => Some(beta),
            Params::ExtIII { delta } => Some(delta),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Status {
    HoldsStrict,
    HoldsWeak,
    Fails,
    Vacuous,
}

impl Status {
    /// Vacuous verdicts satisfy the inequality too.
    pub fn is_satisfied(&self) -> bool {
        !matches!(self, Status::Fails)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::HoldsStrict => "HOLDS_STRICT",
            Status::HoldsWeak => "HOLDS_WEAK",
            Status::Fails => "FAILS",
            Status::Vacuous => "VACUOUS",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label of the third max-term, dropped when its denominator vanishes.
pub const TERM_M3: &str = "M3";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConditionVerdict<S> {
    pub condition: ConditionId,
    pub status: Status,
    pub lhs: S,
    pub rhs: S,
    pub excluded_terms: Vec<&'static str>,
    pub triple: [Point; 3],
}

impl<S: Scalar> ConditionVerdict<S> {
    /// `lhs - rhs`, the amount of violation (negative when satisfied).
    pub fn excess(&self) -> S {
        self.lhs - self.rhs
    }
}

fn decide<S: Scalar>(lhs: S, rhs: S, strict: bool, tol: &Tolerance) -> Status {
    if lhs.is_zero() {
        Status::Vacuous
    } else if definitely_lt(lhs, rhs, tol) {
        Status::HoldsStrict
    } else if !strict && approx_eq(lhs, rhs, tol) {
        Status::HoldsWeak
    } else {
        Status::Fails
    }
}

/// Every `G` value the conditions use on one triple.
struct Terms<S> {
    m1: S,
    image: S,
    self_gaps: [S; 3],
    mixed: [S; 3],
}

impl<S: Scalar> Terms<S> {
    fn new<G, M>(space: &G, map: &M, x: &Point, y: &Point, z: &Point) -> Result<Self>
    where
        G: GMetricSpace<Value = S>,
        M: SelfMap,
    {
        let (tx, ty, tz) = (map.apply(x)?, map.apply(y)?, map.apply(z)?);
        Ok(Self {
            m1: space.eval_g(x, y, z)?,
            image: space.eval_g(&tx, &ty, &tz)?,
            self_gaps: [
                space.eval_g(x, &tx, &tx)?,
                space.eval_g(y, &ty, &ty)?,
                space.eval_g(z, &tz, &tz)?,
            ],
            mixed: [
                space.eval_g(&tx, y, z)?,
                space.eval_g(x, &ty, z)?,
                space.eval_g(x, y, &tz)?,
            ],
        })
    }

    fn self_gap_sum(&self) -> S {
        self.self_gaps[0] + self.self_gaps[1] + self.self_gaps[2]
    }

    fn mixed_sum(&self) -> S {
        self.mixed[0] + self.mixed[1] + self.mixed[2]
    }

    fn m2(&self, a: S) -> S {
        a * self.mixed[0] * self.mixed[1] * self.mixed[2]
    }

    /// `None` when `G(x,y,z) G(Tx,Ty,Tz) = 0`.
    fn m3(&self) -> Option<S> {
        let den = self.m1 * self.image;
        if den.is_zero() {
            None
        } else {
            Some(self.self_gaps[0] * self.self_gaps[1] * self.self_gaps[2] / den)
        }
    }
}

fn clause_verdict<S: Scalar>(
    id: ConditionId,
    terms: &Terms<S>,
    triple: [&Point; 3],
    spec: &Params<S>,
    tol: &Tolerance,
) -> ConditionVerdict<S> {
    let mut excluded = Vec::new();
    let (lhs, rhs) = match spec {
        Params::Q { a, .. } | Params::Unit { a } | Params::Gauge { a, .. } => {
            let m1 = terms.m1;
            let m2 = terms.m2(a.weight_from(triple, terms.m1, terms.image));
            let m3 = terms.m3();
            if m3.is_none() && !terms.image.is_zero() {
                excluded.push(TERM_M3);
            }
            let rhs = match spec {
                Params::Q { q, .. } => *q * max_present(m1, m2, m3),
                Params::Unit { .. } => max_present(m1, m2, m3),
                Params::Gauge { h, .. } => h.eval(m1, m3.unwrap_or_else(S::zero), m2),
                _ => unreachable!(),
            };
            (terms.image, rhs)
        }
        Params::ExtI { alpha } => (terms.self_gap_sum(), *alpha * terms.m1),
        Params::ExtII { beta } => (terms.self_gap_sum(), *beta * terms.mixed_sum()),
        Params::ExtIII { delta } => {
            let quarter = terms.mixed_sum() / S::from_int(4);
            let m = terms
                .self_gaps
                .iter()
                .fold(terms.m1.sup(quarter), |acc, g| acc.sup(*g));
            (terms.image, *delta * m)
        }
    };
    ConditionVerdict {
        condition: id,
        status: decide(lhs, rhs, id.is_strict(), tol),
        lhs,
        rhs,
        excluded_terms: excluded,
        triple: [triple[0].clone(), triple[1].clone(), triple[2].clone()],
    }
}

fn max_present<S: Scalar>(m1: S, m2: S, m3: Option<S>) -> S {
    let m = m1.sup(m2);
    match m3 {
        Some(v) => m.sup(v),
        None => m,
    }
}

/// Decide one condition on the triple `(x, y, z)`.
///
/// An undefined third max-term is left out of the maximum; for the gauge form
/// it is passed to `h` as `0`, the smallest value `h` accepts. Either way the
/// exclusion is listed in the verdict whenever `G(Tx,Ty,Tz) > 0`.
pub fn eval_condition<G, M>(
    space: &G,
    map: &M,
    spec: &ConditionSpec<G::Value>,
    x: &Point,
    y: &Point,
    z: &Point,
    tol: &Tolerance,
) -> Result<ConditionVerdict<G::Value>>
where
    G: GMetricSpace,
    M: SelfMap,
{
    let id = spec.id();
    if id.requires_distinct_xy() && !x.distinct_from(y, tol) {
        return Err(Error::Precondition(format!(
            "{id} needs x != y, got x = y = {x}"
        )));
    }
    let terms = Terms::new(space, map, x, y, z)?;
    Ok(clause_verdict(id, &terms, [x, y, z], &spec.params, tol))
}

/// Which extension clauses are in force, with their coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtensionParams<S> {
    pub alpha: Option<S>,
    pub beta: Option<S>,
    pub delta: Option<S>,
}

impl<S: Scalar> ExtensionParams<S> {
    pub fn new(alpha: Option<S>, beta: Option<S>, delta: Option<S>) -> Result<Self> {
        if alpha.is_none() && beta.is_none() && delta.is_none() {
            return Err(param(
                "alpha/beta/delta",
                "at least one clause must be enabled",
            ));
        }
        if let Some(a) = alpha {
            ConditionSpec::ext_i(a)?;
        }
        if let Some(b) = beta {
            ConditionSpec::ext_ii(b)?;
        }
        if let Some(d) = delta {
            ConditionSpec::ext_iii(d)?;
        }
        Ok(Self { alpha, beta, delta })
    }

    pub fn all(alpha: S, beta: S, delta: S) -> Result<Self> {
        Self::new(Some(alpha), Some(beta), Some(delta))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExtensionVerdict<S> {
    pub i: Option<ConditionVerdict<S>>,
    pub ii: Option<ConditionVerdict<S>>,
    pub iii: Option<ConditionVerdict<S>>,
    /// Some enabled clause is satisfied.
    pub any_holds: bool,
}

/// Evaluate the enabled extension clauses on one triple.
pub fn eval_extension<G, M>(
    space: &G,
    map: &M,
    params: &ExtensionParams<G::Value>,
    x: &Point,
    y: &Point,
    z: &Point,
    tol: &Tolerance,
) -> Result<ExtensionVerdict<G::Value>>
where
    G: GMetricSpace,
    M: SelfMap,
{
    let terms = Terms::new(space, map, x, y, z)?;
    let t = [x, y, z];
    let i = params
        .alpha
        .map(|alpha| clause_verdict(ConditionId::ExtI, &terms, t, &Params::ExtI { alpha }, tol));
    let ii = params
        .beta
        .map(|beta| clause_verdict(ConditionId::ExtII, &terms, t, &Params::ExtII { beta }, tol));
    let iii = params.delta.map(|delta| {
        clause_verdict(
            ConditionId::ExtIII,
            &terms,
            t,
            &Params::ExtIII { delta },
            tol,
        )
    });
    let any_holds = [&i, &ii, &iii]
        .into_iter()
        .flatten()
        .any(|v| v.status.is_satisfied());
    Ok(ExtensionVerdict {
        i,
        ii,
        iii,
        any_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FactorMode {
    /// The minimum of the per-clause factors, as the proof states it.
    Literal,
    /// The maximum, which bounds the gap ratio whichever clause holds.
    Sound,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FactorReport {
    pub mode: FactorMode,
    pub lambda: f64,
    /// `(alpha-1)/2`, `(2 beta-1)/(2-2 beta)`, `delta`.
    pub factors: [f64; 3],
    /// Indices (0, 1, 2) of factors that are `>= 1`.
    pub inadmissible: Vec<usize>,
    /// `lambda < 1`, and in sound mode every factor below 1.
    pub admissible: bool,
}

/// Gap-ratio factor of the extension clauses.
pub fn contraction_factor(
    alpha: f64,
    beta: f64,
    delta: f64,
    mode: FactorMode,
) -> Result<FactorReport> {
    ExtensionParams::all(alpha, beta, delta)?;
    let factors = [
        (alpha - 1.0) / 2.0,
        (2.0 * beta - 1.0) / (2.0 - 2.0 * beta),
        delta,
    ];
    let lambda = match mode {
        FactorMode::Literal => factors.iter().copied().fold(f64::INFINITY, f64::min),
        FactorMode::Sound => factors.iter().copied().fold(0.0, f64::max),
    };
    let inadmissible: Vec<usize> = (0..3).filter(|&k| factors[k] >= 1.0).collect();
    let admissible = lambda < 1.0 && (mode == FactorMode::Literal || inadmissible.is_empty());
    Ok(FactorReport {
        mode,
        lambda,
        factors,
        inadmissible,
        admissible,
    })
}

/// Refinement steps used by the semicontinuity probe, relative to `1 + |t|`.
pub const USC_STEPS: [f64; 5] = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
/// Grid values per axis used by the three-dimensional gauge checks.
pub const GAUGE_AXIS_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaugeReport {
    pub gauge: String,
    /// Witness: the lower triple and the index of the increased variable.
    pub monotone: Verdict<([f64; 3], usize)>,
    /// Heuristic only. Witness: a base triple where a probe stays above `h`.
    pub usc_heuristic: Verdict<[f64; 3]>,
    /// Witness: `t` with `g(t) >= t`.
    pub diagonal_strict: Verdict<f64>,
    /// Witness: `t` and the last iterate reached.
    pub iterates_vanish: Verdict<(f64, f64)>,
    /// For every grid `t`: `g(t) < t` exactly when the iterates vanish.
    pub equivalence_consistent: bool,
}

impl GaugeReport {
    pub fn all_pass(&self) -> bool {
        self.monotone.is_pass()
            && self.usc_heuristic.is_pass()
            && self.diagonal_strict.is_pass()
            && self.iterates_vanish.is_pass()
            && self.equivalence_consistent
    }
}

fn axis_grid(ts: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = ts.to_vec();
    g.push(0.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.len() > GAUGE_AXIS_CAP {
        let last = g.len() - 1;
        let cap = GAUGE_AXIS_CAP - 1;
        let mut picked: Vec<f64> = (0..=cap).map(|k| g[k * last / cap]).collect();
        picked.dedup();
        g = picked;
    }
    g
}

/// Iterate `g` from `t`; returns whether some `g^n(t) <= thresh` with
/// `n <= n_max`, and the last value reached.
fn iterate_to_threshold(h: &GaugeFunction<f64>, t: f64, n_max: u64, thresh: f64) -> (bool, f64) {
    let mut v = t;
    for _ in 0..n_max {
        if v <= thresh {
            return (true, v);
        }
        let next = h.diagonal(v);
        if next == v || next.is_nan() {
            return (false, next);
        }
        v = next;
    }
    (v <= thresh, v)
}

/// Check a gauge function on a grid of positive reals.
pub fn check_gauge_admissible(
    h: &GaugeFunction<f64>,
    ts: &[f64],
    n_max: u64,
    thresh: f64,
) -> Result<GaugeReport> {
    if ts.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(param(
            "ts",
            format!("grid value {bad} must be positive and finite"),
        ));
    }
    if !(thresh > 0.0) {
        return Err(param("thresh", "must be positive"));
    }

    let grid = axis_grid(ts);
    let n = grid.len();

    let mut monotone = Verdict::Pass;
    'mono: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let base = [grid[i], grid[j], grid[k]];
                let hb = h.eval(base[0], base[1], base[2]);
                for (var, idx) in [i, j, k].into_iter().enumerate() {
                    if idx + 1 < n {
                        let mut up = base;
                        up[var] = grid[idx + 1];
                        if !(h.eval(up[0], up[1], up[2]) >= hb) {
                            monotone = Verdict::Fail((base, var));
                            break 'mono;
                        }
                    }
                }
            }
        }
    }

    let mut usc = Verdict::Pass;
    let slack = Tolerance::default();
    'usc: for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let base = [a, b, c];
                let hb = h.eval(a, b, c);
                for dir in 0..27usize {
                    let d = [
                        (dir % 3) as f64 - 1.0,
                        ((dir / 3) % 3) as f64 - 1.0,
                        (dir / 9) as f64 - 1.0,
                    ];
                    if dir == 13 {
                        continue;
                    }
                    let excess: Vec<f64> = USC_STEPS
                        .iter()
                        .map(|s| {
                            let p: [f64; 3] = core::array::from_fn(|m| {
                                (base[m] + d[m] * s * (1.0 + base[m])).max(0.0)
                            });
                            h.eval(p[0], p[1], p[2]) - hb
                        })
                        .collect();
                    let last = excess[excess.len() - 1];
                    let prev = excess[excess.len() - 2];
                    let jump = last > slack.slack_for(hb.abs()) && last >= 0.5 * prev;
                    if jump {
                        usc = Verdict::Fail(base);
                        break 'usc;
                    }
                }
            }
        }
    }

    let mut diag_strict = Verdict::Pass;
    let mut vanish = Verdict::Pass;
    let mut consistent = true;
    for &t in ts {
        let strict = h.diagonal(t) < t;
        let (gone, reached) = iterate_to_threshold(h, t, n_max, thresh);
        if !strict && diag_strict.is_pass() {
            diag_strict = Verdict::Fail(t);
        }
        if !gone && vanish.is_pass() {
            vanish = Verdict::Fail((t, reached));
        }
        consistent &= strict == gone;
    }

    Ok(GaugeReport {
        gauge: h.name().to_string(),
        monotone,
        usc_heuristic: usc,
        diagonal_strict: diag_strict,
        iterates_vanish: vanish,
        equivalence_consistent: consistent,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniquenessWitness<S> {
    pub x: Point,
    pub lhs: S,
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniquenessReport<S> {
    pub xi: Point,
    /// `G(xi, Tx, Tx) < G(x, x, xi) + G(x, Tx, Tx)`.
    pub v: Verdict<UniquenessWitness<S>>,
    /// `G(xi, x, x) < G(xi, Tx, Tx) + G(x, Tx, Tx)`.
    pub vi: Verdict<UniquenessWitness<S>>,
    /// Sample points different from `xi`.
    pub checked: usize,
}

/// Check the two uniqueness clauses around a fixed point `xi`.
pub fn check_uniqueness_conditions<G, M>(
    space: &G,
    map: &M,
    xi: &Point,
    sample: &[Point],
    tol: &Tolerance,
) -> Result<UniquenessReport<G::Value>>
where
    G: GMetricSpace,
    M: SelfMap,
{
    let txi = map.apply(xi)?;
    let residual = space.eval_g(xi, &txi, &txi)?;
    if !approx_le(residual, G::Value::zero(), tol) {
        return Err(Error::Precondition(format!(
            "{xi} is not a fixed point: G(xi, Txi, Txi) = {residual}"
        )));
    }
    let mut v = Verdict::Pass;
    let mut vi = Verdict::Pass;
    let mut checked = 0;
    for x in sample {
        if !x.distinct_from(xi, tol) {
            continue;
        }
        checked += 1;
        let tx = map.apply(x)?;
        let gap = space.eval_g(x, &tx, &tx)?;
        let xi_tx = space.eval_g(xi, &tx, &tx)?;
        if v.is_pass() {
            let rhs = space.eval_g(x, x, xi)? + gap;
            if !definitely_lt(xi_tx, rhs, tol) {
                v = Verdict::Fail(UniquenessWitness {
                    x: x.clone(),
                    lhs: xi_tx,
                    rhs,
                });
            }
        }
        if vi.is_pass() {
            let lhs = space.eval_g(xi, x, x)?;
            let rhs = xi_tx + gap;
            if !definitely_lt(lhs, rhs, tol) {
                vi = Verdict::Fail(UniquenessWitness {
                    x: x.clone(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(UniquenessReport {
        xi: xi.clone(),
        v,
        vi,
        checked,
    })
}

/// `a(x,y,z) <= 1 / (G(x,y,z) G(Tx,Ty,Tz))`; `None` where the product is `0`.
pub fn aux_bound_holds<G, M>(
    space: &G,
    map: &M,
    a: &AuxWeight<G::Value>,
    x: &Point,
    y: &Point,
    z: &Point,
) -> Result<Option<bool>>
where
    G: GMetricSpace,
    M: SelfMap,
{
    let (tx, ty, tz) = (map.apply(x)?, map.apply(y)?, map.apply(z)?);
    let m1 = space.eval_g(x, y, z)?;
    let image = space.eval_g(&tx, &ty, &tz)?;
    let den = m1 * image;
    if den.is_zero() {
        return Ok(None);
    }
    Ok(Some(
        a.weight_from([x, y, z], m1, image) * den <= G::Value::one(),
    ))
}

/// Number of worst violations a certificate keeps.
pub const WORST_KEPT: usize = 10;

/// Aggregate of one condition over many triples.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SampleCertificate<S> {
    pub condition: ConditionId,
    pub checked: usize,
    /// Strict and weak holds.
    pub holds: usize,
    pub vacuous: usize,
    pub fails: usize,
    /// Largest `lhs - rhs` first, ties by triple.
    pub worst: Vec<ConditionVerdict<S>>,
    pub excluded_term_count: usize,
    /// Triples with `x = y`, outside the quantifier.
    pub skipped: usize,
}

fn worst_order<S: Scalar>(a: &ConditionVerdict<S>, b: &ConditionVerdict<S>) -> Ordering {
    b.excess()
        .total_cmp(&a.excess())
        .then_with(|| cmp_points(&a.triple, &b.triple))
}

impl<S: Scalar> SampleCertificate<S> {
    pub fn empty(condition: ConditionId) -> Self {
        Self {
            condition,
            checked: 0,
            holds: 0,
            vacuous: 0,
            fails: 0,
            worst: Vec::new(),
            excluded_term_count: 0,
            skipped: 0,
        }
    }

    pub fn record(&mut self, v: ConditionVerdict<S>) {
        self.checked += 1;
        self.excluded_term_count += v.excluded_terms.len();
        match v.status {
            Status::HoldsStrict | Status::HoldsWeak => self.holds += 1,
            Status::Vacuous => self.vacuous += 1,
            Status::Fails => {
                self.fails += 1;
                let pos = self
                    .worst
                    .binary_search_by(|w| worst_order(w, &v))
                    .unwrap_or_else(|p| p);
                if pos < WORST_KEPT {
                    self.worst.insert(pos, v);
                    self.worst.truncate(WORST_KEPT);
                }
            }
        }
    }

    /// Combine certificates over disjoint triple sets; the result does not
    /// depend on how the triples were split.
    pub fn merge(mut self, other: Self) -> Self {
        self.checked += other.checked;
        self.holds += other.holds;
        self.vacuous += other.vacuous;
        self.fails += other.fails;
        self.excluded_term_count += other.excluded_term_count;
        self.skipped += other.skipped;
        self.worst.extend(other.worst);
        self.worst.sort_by(worst_order);
        self.worst.truncate(WORST_KEPT);
        self
    }

    pub fn all_hold(&self) -> bool {
        self.fails == 0
    }
}

/// Evaluate a condition on every supplied triple.
pub fn certify_on_samples<G, M, I>(
    space: &G,
    map: &M,
    spec: &ConditionSpec<G::Value>,
    triples: I,
    tol: &Tolerance,
) -> Result<SampleCertificate<G::Value>>
where
    G: GMetricSpace,
    M: SelfMap,
    I: IntoIterator<Item = [Point; 3]>,
{
    let mut cert = SampleCertificate::empty(spec.id());
    for [x, y, z] in triples {
        if spec.id().requires_distinct_xy() && !x.distinct_from(&y, tol) {
            cert.skipped += 1;
            continue;
        }
        cert.record(eval_condition(space, map, spec, &x, &y, &z, tol)?);
    }
    Ok(cert)
}
