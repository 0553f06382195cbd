//! Exhaustive checks on small finite spaces in exact rational arithmetic.
//!
//! Every self-map of `{0, .., m-1}` is enumerated, the hypothesis of a fixed
//! point statement is decided exactly, and the conclusion is read off the
//! eventually periodic orbits. On a finite carrier every map is orbitally
//! continuous and every orbit is complete, so those hypotheses are recorded as
//! automatic instead of tested.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contraction::{
    aux_bound_holds, eval_condition, eval_extension, AuxWeight, ConditionSpec, ExtensionParams,
    GaugeFunction,
};
use crate::dynamics::{SelfMap, TableMap};
use crate::error::{param, Error, Result};
use crate::gspace::{
    check_axioms, AxiomReport, CheckMode, Construction, FiniteSpace, GMetricSpace,
};
use crate::point::Point;
use crate::scalar::{Rational, Scalar, Tolerance};

/// Largest carrier enumerated by default.
pub const DEFAULT_CAP: usize = 5;

/// A metric on `{0, .., m-1}` with rational distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetric {
    size: usize,
    d: Vec<Rational>,
}

impl FiniteMetric {
    /// Validates symmetry, zero diagonal, positivity and the triangle
    /// inequality.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidMetric("empty table".into()));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidMetric(format!(
                "row {r} does not have {m} entries"
            )));
        }
        let metric = Self {
            size: m,
            d: rows.into_iter().flatten().collect(),
        };
        metric.validate()?;
        Ok(metric)
    }

    fn validate(&self) -> Result<()> {
        let m = self.size;
        for i in 0..m {
            if !self.get(i, i).is_zero() {
                return Err(Error::InvalidMetric(format!(
                    "d({i},{i}) = {} is not 0",
                    self.get(i, i)
                )));
            }
            for j in 0..m {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
                if i != j && self.get(i, j) <= Rational::zero() {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) = {} is not positive",
                        self.get(i, j)
                    )));
                }
                for k in 0..m {
                    if self.get(i, k) > self.get(i, j) + self.get(j, k) {
                        return Err(Error::InvalidMetric(format!(
                            "d({i},{k}) > d({i},{j}) + d({j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every off-diagonal distance equal to 1.
    pub fn uniform(m: usize) -> Result<Self> {
        let rows = (0..m)
            .map(|i| (0..m).map(|j| Rational::integer((i != j) as i64)).collect())
            .collect();
        Self::new(rows)
    }

    /// Random weights `k/4`, `k` in `1..=16`, closed under shortest paths.
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(param("m", "must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = alloc::vec![Rational::zero(); m * m];
        for i in 0..m {
            for j in i + 1..m {
                let w = Rational::new(rng.gen_range(1..=16), 4);
                d[i * m + j] = w;
                d[j * m + i] = w;
            }
        }
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let via = d[i * m + k] + d[k * m + j];
                    if via < d[i * m + j] {
                        d[i * m + j] = via;
                    }
                }
            }
        }
        let metric = Self { size: m, d };
        metric.validate()?;
        Ok(metric)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.d[i * self.size + j]
    }
}

/// Text form: the size on the first line, then one whitespace-separated row
/// per line with entries `p/q` or `p`.
impl FromStr for FiniteMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidMetric("missing size line".into()))?;
        let m: usize = header
            .parse()
            .map_err(|_| Error::InvalidMetric(format!("bad size `{header}`")))?;
        let mut rows = Vec::with_capacity(m);
        for (r, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<Rational>()
                        .map_err(|_| Error::InvalidMetric(format!("row {r}: bad entry `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.len() != m {
            return Err(Error::InvalidMetric(format!(
                "expected {m} rows, found {}",
                rows.len()
            )));
        }
        Self::new(rows)
    }
}

impl fmt::Display for FiniteMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.size)?;
        for i in 0..self.size {
            for j in 0..self.size {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The G-metric of `metric` under `construction`, tabulated exactly.
pub fn build_gmetric(
    name: impl Into<String>,
    metric: &FiniteMetric,
    construction: Construction,
) -> FiniteSpace<Rational> {
    FiniteSpace::from_fn(name, metric.size(), |x, y, z| {
        construction.combine(metric.get(x, y), metric.get(y, z), metric.get(z, x))
    })
}

/// All `m^m` self-maps of `{0, .., m-1}` in lexicographic table order.
#[derive(Debug, Clone)]
pub struct SelfMaps {
    next: Option<Vec<usize>>,
}

impl Iterator for SelfMaps {
    type Item = TableMap;

    fn next(&mut self) -> Option<TableMap> {
        let current = self.next.take()?;
        let m = current.len();
        let mut succ = current.clone();
        let mut k = m;
        while k > 0 {
            k -= 1;
            if succ[k] + 1 < m {
                succ[k] += 1;
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(TableMap::new(current).expect("entries below m"))
    }
}

pub fn enumerate_self_maps(m: usize, cap: usize) -> Result<SelfMaps> {
    if m == 0 {
        return Err(param("m", "carrier must be non-empty"));
    }
    if m > cap {
        return Err(Error::CapExceeded { size: m, cap });
    }
    Ok(SelfMaps {
        next: Some(alloc::vec![0; m]),
    })
}

/// Exhaustive (G1)-(G5) and symmetry check with exact comparisons.
pub fn exhaustive_axiom_check<G: GMetricSpace<Value = Rational>>(space: &G) -> Result<AxiomReport> {
    check_axioms(space, &[], &Tolerance::ZERO, CheckMode::Exhaustive)
}

/// Which fixed point statement is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TheoremId {
    /// Injective map, `q`-contraction of the max form: every orbit converges
    /// to a fixed point.
    #[cfg_attr(feature = "serde", serde(rename = "THM-2.2"))]
    QContraction,
    /// The same inequality with `q = 1`: a cluster point of an orbit is a
    /// fixed point.
    #[cfg_attr(feature = "serde", serde(rename = "THM-2.5"))]
    UnitCluster,
    /// Gauge-function form.
    #[cfg_attr(feature = "serde", serde(rename = "THM-2.10"))]
    Gauge,
    /// At least one of three clauses on every orbit triple.
    #[cfg_attr(feature = "serde", serde(rename = "THM-2.12"))]
    Extension,
}

impl TheoremId {
    pub const ALL: [TheoremId; 4] = [
        TheoremId::QContraction,
        TheoremId::UnitCluster,
        TheoremId::Gauge,
        TheoremId::Extension,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::QContraction => "THM-2.2",
            TheoremId::UnitCluster => "THM-2.5",
            TheoremId::Gauge => "THM-2.10",
            TheoremId::Extension => "THM-2.12",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| param("theorem", format!("unknown theorem id `{s}`")))
    }
}

/// Triples on which a max-form condition is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TripleScope {
    /// All carrier triples with `x != y`.
    #[default]
    Carrier,
    /// For every start point, the triples of its orbit set with `x != y`.
    Orbit,
}

/// Which start points the extension clauses must hold for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BaseQuantifier {
    /// Every start point; the conclusion is checked for each.
    #[default]
    All,
    /// Some start point; the conclusion is checked for those that qualify.
    Any,
}

#[derive(Debug, Clone)]
pub enum TheoremParams {
    QContraction {
        q: Rational,
        a: AuxWeight<Rational>,
        scope: TripleScope,
    },
    UnitCluster {
        a: AuxWeight<Rational>,
        scope: TripleScope,
    },
    Gauge {
        a: AuxWeight<Rational>,
        h: GaugeFunction<Rational>,
        scope: TripleScope,
    },
    Extension {
        clauses: ExtensionParams<Rational>,
        base: BaseQuantifier,
    },
}

impl TheoremParams {
    pub fn id(&self) -> TheoremId {
        match self {
            TheoremParams::QContraction { .. } => TheoremId::QContraction,
            TheoremParams::UnitCluster { .. } => TheoremId::UnitCluster,
            TheoremParams::Gauge { .. } => TheoremId::Gauge,
            TheoremParams::Extension { .. } => TheoremId::Extension,
        }
    }

    fn condition(&self) -> Result<Option<(ConditionSpec<Rational>, TripleScope)>> {
        Ok(match self {
            TheoremParams::QContraction { q, a, scope } => {
                Some((ConditionSpec::q(*q, a.clone())?, *scope))
            }
            TheoremParams::UnitCluster { a, scope } => {
                Some((ConditionSpec::unit(a.clone()), *scope))
            }
            TheoremParams::Gauge { a, h, scope } => {
                Some((ConditionSpec::gauge(a.clone(), h.clone()), *scope))
            }
            TheoremParams::Extension { .. } => None,
        })
    }

    fn has_uniqueness_part(&self) -> bool {
        matches!(
            self,
            TheoremParams::QContraction { .. } | TheoremParams::Gauge { .. }
        )
    }

    /// Short human-readable parameter summary.
    pub fn describe(&self) -> String {
        match self {
            TheoremParams::QContraction { q, a, scope } => {
                format!("q={q}, a={}, scope={scope:?}", a.label())
            }
            TheoremParams::UnitCluster { a, scope } => format!("a={}, scope={scope:?}", a.label()),
            TheoremParams::Gauge { a, h, scope } => {
                format!("h={}, a={}, scope={scope:?}", h.name(), a.label())
            }
            TheoremParams::Extension { clauses, base } => {
                let show = |v: Option<Rational>| v.map_or_else(|| "off".into(), |v| format!("{v}"));
                format!(
                    "alpha={}, beta={}, delta={}, base={base:?}",
                    show(clauses.alpha),
                    show(clauses.beta),
                    show(clauses.delta)
                )
            }
        }
    }
}

/// Why a map is outside the hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum HypothesisClause {
    Injectivity,
    Condition,
    /// `a(x, y, y) = 0` for the gauge form.
    WeightVanishing,
    /// The gauge function fails monotonicity or `h(t,t,t) < t` on the value set.
    GaugeFunction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HypothesisFailure {
    pub map: Vec<usize>,
    pub clause: HypothesisClause,
    /// The offending points: a pair for injectivity, a triple otherwise,
    /// prefixed by the start point for orbit-scoped checks.
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ConclusionClause {
    /// Some orbit ends in a cycle longer than one.
    Convergence,
    /// The weight bound holds but the map has more than one fixed point.
    Uniqueness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub map: Vec<usize>,
    pub clause: ConclusionClause,
    /// Start point and its eventual cycle for convergence; the fixed points
    /// for uniqueness.
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoremCheckReport {
    pub theorem_id: TheoremId,
    pub space: String,
    pub params: String,
    pub maps_total: usize,
    pub maps_satisfying_hypothesis: usize,
    pub conclusion_holds: usize,
    pub counterexamples: Vec<Counterexample>,
    pub hypothesis_failures: Vec<HypothesisFailure>,
    /// Largest number of steps an orbit of a conclusion-holding map needs to
    /// reach its fixed point.
    pub max_steps_to_fixed: usize,
    /// Hypotheses that hold on every finite carrier and are not tested.
    pub automatic: Vec<String>,
    /// Parameter warnings.
    pub flags: Vec<String>,
}

impl TheoremCheckReport {
    fn empty(theorem_id: TheoremId, space: &str, params: &TheoremParams) -> Self {
        let mut flags = Vec::new();
        if let TheoremParams::Extension { clauses, .. } = params {
            if let Some(b) = clauses.beta {
                if b >= Rational::new(3, 4) {
                    flags.push(format!(
                        "beta = {b} >= 3/4: the gap-ratio factor (2beta-1)/(2-2beta) is not below 1"
                    ));
                }
            }
        }
        Self {
            theorem_id,
            space: space.into(),
            params: params.describe(),
            maps_total: 0,
            maps_satisfying_hypothesis: 0,
            conclusion_holds: 0,
            counterexamples: Vec::new(),
            hypothesis_failures: Vec::new(),
            max_steps_to_fixed: 0,
            automatic: alloc::vec!["orbital continuity".into(), "orbital completeness".into()],
            flags,
        }
    }

    /// Combine reports over disjoint sets of maps; the result does not depend
    /// on how the maps were split.
    pub fn merge(mut self, other: Self) -> Self {
        self.maps_total += other.maps_total;
        self.maps_satisfying_hypothesis += other.maps_satisfying_hypothesis;
        self.conclusion_holds += other.conclusion_holds;
        self.max_steps_to_fixed = self.max_steps_to_fixed.max(other.max_steps_to_fixed);
        self.counterexamples.extend(other.counterexamples);
        self.counterexamples
            .sort_by(|a, b| (&a.map, a.clause).cmp(&(&b.map, b.clause)));
        self.hypothesis_failures.extend(other.hypothesis_failures);
        self.hypothesis_failures.sort_by(|a, b| a.map.cmp(&b.map));
        self
    }

    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn ix(i: usize) -> Point {
    Point::Index(i)
}

fn orbit_set(map: &TableMap, x: usize) -> Vec<usize> {
    let mut set = map.orbit_with_cycle(x).0;
    set.sort_unstable();
    set
}

/// Distinct positive values of the space, with 0, ascending.
fn value_set<G: GMetricSpace<Value = Rational>>(space: &G, m: usize) -> Result<Vec<Rational>> {
    let mut vals = alloc::vec![Rational::zero()];
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                vals.push(space.eval_g(&ix(x), &ix(y), &ix(z))?);
            }
        }
    }
    vals.sort();
    vals.dedup();
    Ok(vals)
}

/// Monotonicity on the value grid (adjacent steps) and `h(t,t,t) < t` for
/// every positive value. Returns the offending grid triple.
fn gauge_side_condition(h: &GaugeFunction<Rational>, vals: &[Rational]) -> Option<[Rational; 3]> {
    let n = vals.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let base = [vals[i], vals[j], vals[k]];
                let hb = h.eval(base[0], base[1], base[2]);
                for (var, idx) in [i, j, k].into_iter().enumerate() {
                    if idx + 1 < n {
                        let mut up = base;
                        up[var] = vals[idx + 1];
                        if h.eval(up[0], up[1], up[2]) < hb {
                            return Some(base);
                        }
                    }
                }
            }
        }
    }
    vals.iter()
        .find(|t| **t > Rational::zero() && !(h.diagonal(**t) < **t))
        .map(|t| [*t, *t, *t])
}

/// The triples a max-form condition must hold on, for one map. Orbit-scoped
/// triples carry their start point.
fn condition_triples(map: &TableMap, scope: TripleScope) -> Vec<(Option<usize>, [usize; 3])> {
    let m = map.size();
    let mut out = Vec::new();
    match scope {
        TripleScope::Carrier => {
            for x in 0..m {
                for y in 0..m {
                    if x != y {
                        for z in 0..m {
                            out.push((None, [x, y, z]));
                        }
                    }
                }
            }
        }
        TripleScope::Orbit => {
            for s in 0..m {
                let set = orbit_set(map, s);
                for &x in &set {
                    for &y in &set {
                        if x != y {
                            for &z in &set {
                                out.push((Some(s), [x, y, z]));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn witness(start: Option<usize>, t: [usize; 3]) -> Vec<usize> {
    start.into_iter().chain(t).collect()
}

/// Start points whose orbit set satisfies some enabled extension clause on
/// every triple, or the first violating `(start, x, y, z)`.
fn extension_starts<G: GMetricSpace<Value = Rational>>(
    space: &G,
    map: &TableMap,
    clauses: &ExtensionParams<Rational>,
) -> Result<(Vec<usize>, Option<Vec<usize>>)> {
    let tol = Tolerance::ZERO;
    let mut good = Vec::new();
    let mut first_bad = None;
    for s in 0..map.size() {
        let set = orbit_set(map, s);
        let mut ok = true;
        'triples: for &x in &set {
            for &y in &set {
                for &z in &set {
                    if !eval_extension(space, map, clauses, &ix(x), &ix(y), &ix(z), &tol)?.any_holds
                    {
                        ok = false;
                        if first_bad.is_none() {
                            first_bad = Some(alloc::vec![s, x, y, z]);
                        }
                        break 'triples;
                    }
                }
            }
        }
        if ok {
            good.push(s);
        }
    }
    Ok((good, first_bad))
}

/// Decide the hypothesis for one map. `Ok(starts)` lists the start points the
/// conclusion must be checked for.
pub fn check_hypothesis<G: GMetricSpace<Value = Rational>>(
    space: &G,
    map: &TableMap,
    params: &TheoremParams,
) -> Result<core::result::Result<Vec<usize>, HypothesisFailure>> {
    let m = map.size();
    let fail = |clause, witness| {
        Ok(Err(HypothesisFailure {
            map: map.table().to_vec(),
            clause,
            witness,
        }))
    };
    if let TheoremParams::Extension { clauses, base } = params {
        let (good, first_bad) = extension_starts(space, map, clauses)?;
        let qualifies = match base {
            BaseQuantifier::All => good.len() == m,
            BaseQuantifier::Any => !good.is_empty(),
        };
        return if qualifies {
            Ok(Ok(good))
        } else {
            fail(HypothesisClause::Condition, first_bad.unwrap_or_default())
        };
    }

    if let TheoremParams::Gauge { h, .. } = params {
        if gauge_side_condition(h, &value_set(space, m)?).is_some() {
            return fail(HypothesisClause::GaugeFunction, Vec::new());
        }
    }
    if !map.is_injective() {
        for x in 0..m {
            for y in x + 1..m {
                if map.image(x) == map.image(y) {
                    return fail(HypothesisClause::Injectivity, alloc::vec![x, y]);
                }
            }
        }
    }
    if let TheoremParams::Gauge { a, .. } = params {
        for x in 0..m {
            for y in 0..m {
                if !a.evaluate(space, map, &ix(x), &ix(y), &ix(y))?.is_zero() {
                    return fail(HypothesisClause::WeightVanishing, alloc::vec![x, y, y]);
                }
            }
        }
    }
    let (spec, scope) = params.condition()?.expect("max-form theorem");
    let tol = Tolerance::ZERO;
    for (start, [x, y, z]) in condition_triples(map, scope) {
        let v = eval_condition(space, map, &spec, &ix(x), &ix(y), &ix(z), &tol)?;
        if !v.status.is_satisfied() {
            return fail(HypothesisClause::Condition, witness(start, [x, y, z]));
        }
    }
    Ok(Ok((0..m).collect()))
}

/// `a(x,y,z) <= [G(x,y,z) G(Tx,Ty,Tz)]^-1` on every triple where the
/// right side is defined.
fn weight_bound_holds<G: GMetricSpace<Value = Rational>>(
    space: &G,
    map: &TableMap,
    a: &AuxWeight<Rational>,
) -> Result<bool> {
    let m = map.size();
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                if aux_bound_holds(space, map, a, &ix(x), &ix(y), &ix(z))? == Some(false) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Check the conclusion for a map that satisfies the hypothesis. Returns the
/// largest number of steps to a fixed point, or the counterexample.
fn check_conclusion<G: GMetricSpace<Value = Rational>>(
    space: &G,
    map: &TableMap,
    params: &TheoremParams,
    starts: &[usize],
) -> Result<core::result::Result<usize, Counterexample>> {
    let mut steps = 0;
    for &s in starts {
        let (orbit, cycle_start) = map.orbit_with_cycle(s);
        if orbit.len() - cycle_start != 1 {
            let mut w = alloc::vec![s];
            w.extend_from_slice(&orbit[cycle_start..]);
            return Ok(Err(Counterexample {
                map: map.table().to_vec(),
                clause: ConclusionClause::Convergence,
                witness: w,
            }));
        }
        steps = steps.max(cycle_start);
    }
    if params.has_uniqueness_part() {
        let a = match params {
            TheoremParams::QContraction { a, .. } | TheoremParams::Gauge { a, .. } => a,
            _ => unreachable!(),
        };
        let fixed = map.fixed_points();
        if fixed.len() > 1 && weight_bound_holds(space, map, a)? {
            return Ok(Err(Counterexample {
                map: map.table().to_vec(),
                clause: ConclusionClause::Uniqueness,
                witness: fixed,
            }));
        }
    }
    Ok(Ok(steps))
}

/// Run the check over the given maps, which must all act on the space's
/// carrier. Used directly to split the enumeration across workers.
pub fn check_maps<G, I>(space: &G, params: &TheoremParams, maps: I) -> Result<TheoremCheckReport>
where
    G: GMetricSpace<Value = Rational>,
    I: IntoIterator<Item = TableMap>,
{
    let carrier = space.carrier();
    if !carrier.is_finite() {
        return Err(Error::ExhaustiveOnInfinite);
    }
    let mut report = TheoremCheckReport::empty(params.id(), space.name(), params);
    for map in maps {
        if map.carrier() != carrier {
            return Err(Error::Domain {
                point: format!("map {map}"),
                carrier: format!("{carrier}"),
            });
        }
        report.maps_total += 1;
        match check_hypothesis(space, &map, params)? {
            Err(f) => report.hypothesis_failures.push(f),
            Ok(starts) => {
                report.maps_satisfying_hypothesis += 1;
                match check_conclusion(space, &map, params, &starts)? {
                    Ok(steps) => {
                        report.conclusion_holds += 1;
                        report.max_steps_to_fixed = report.max_steps_to_fixed.max(steps);
                    }
                    Err(cx) => report.counterexamples.push(cx),
                }
            }
        }
    }
    Ok(report)
}

/// Enumerate every self-map of a finite exact space and check the statement.
pub fn exhaustive_theorem_check<G: GMetricSpace<Value = Rational>>(
    space: &G,
    params: &TheoremParams,
    cap: usize,
) -> Result<TheoremCheckReport> {
    let m = match space.carrier() {
        crate::point::Carrier::Finite { size } => size,
        _ => return Err(Error::ExhaustiveOnInfinite),
    };
    check_maps(space, params, enumerate_self_maps(m, cap)?)
}

/// Replay a counterexample: the map must satisfy the hypothesis and violate
/// the named conclusion.
pub fn reverify_counterexample<G: GMetricSpace<Value = Rational>>(
    space: &G,
    params: &TheoremParams,
    cx: &Counterexample,
) -> Result<bool> {
    let map = TableMap::new(cx.map.clone())?;
    let Ok(starts) = check_hypothesis(space, &map, params)? else {
        return Ok(false);
    };
    Ok(match check_conclusion(space, &map, params, &starts)? {
        Err(again) => again == *cx,
        Ok(_) => false,
    })
}

/// Replay a hypothesis failure with the exact evaluators.
pub fn reverify_hypothesis_failure<G: GMetricSpace<Value = Rational>>(
    space: &G,
    params: &TheoremParams,
    f: &HypothesisFailure,
) -> Result<bool> {
    let map = TableMap::new(f.map.clone())?;
    Ok(match check_hypothesis(space, &map, params)? {
        Err(again) => again == *f,
        Ok(_) => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gspace::Verdict;
    use alloc::vec;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn uniform_max(m: usize) -> FiniteSpace<Rational> {
        build_gmetric(
            format!("finite-uniform-{m}"),
            &FiniteMetric::uniform(m).unwrap(),
            Construction::Max,
        )
    }

    fn delta(d: Rational) -> TheoremParams {
        TheoremParams::Extension {
            clauses: ExtensionParams::new(None, None, Some(d)).unwrap(),
            base: BaseQuantifier::All,
        }
    }

    #[test]
    fn uniform_constructions() {
        let m = FiniteMetric::uniform(3).unwrap();
        let gmax = build_gmetric("u3", &m, Construction::Max);
        let gper = build_gmetric("u3", &m, Construction::Perimeter);
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    let distinct = [x, y, z]
                        .iter()
                        .collect::<alloc::collections::BTreeSet<_>>()
                        .len();
                    let (emax, eper) = match distinct {
                        1 => (0, 0),
                        2 => (1, 2),
                        _ => (1, 3),
                    };
                    assert_eq!(gmax.get(x, y, z), Rational::integer(emax));
                    assert_eq!(gper.get(x, y, z), Rational::integer(eper));
                }
            }
        }
        let one = build_gmetric("u1", &FiniteMetric::uniform(1).unwrap(), Construction::Max);
        assert_eq!(one.get(0, 0, 0), Rational::zero());
        assert!(exhaustive_axiom_check(&gmax).unwrap().all_pass());
        assert!(exhaustive_axiom_check(&gper).unwrap().all_pass());
    }

    #[test]
    fn metric_validation() {
        let r = |v: &[i64]| v.iter().map(|x| Rational::integer(*x)).collect::<Vec<_>>();
        assert!(FiniteMetric::new(vec![r(&[0, 1]), r(&[2, 0])]).is_err());
        assert!(FiniteMetric::new(vec![r(&[1, 1]), r(&[1, 0])]).is_err());
        assert!(FiniteMetric::new(vec![r(&[0, 0]), r(&[0, 0])]).is_err());
        assert!(FiniteMetric::new(vec![r(&[0, 1, 5]), r(&[1, 0, 1]), r(&[5, 1, 0])]).is_err());
        assert!(FiniteMetric::new(vec![r(&[0, 1]), r(&[1])]).is_err());
        assert!(FiniteMetric::new(vec![r(&[0, 1, 2]), r(&[1, 0, 1]), r(&[2, 1, 0])]).is_ok());
    }

    #[test]
    fn metric_text_round_trip() {
        let m = FiniteMetric::random(4, 11).unwrap();
        let text = format!("{m}");
        assert_eq!(text.parse::<FiniteMetric>().unwrap(), m);
        let parsed: FiniteMetric = "2\n0 1/2\n1/2 0\n".parse().unwrap();
        assert_eq!(parsed.get(0, 1), q(1, 2));
        assert!("2\n0 1\n".parse::<FiniteMetric>().is_err());
        assert!("x\n".parse::<FiniteMetric>().is_err());
        assert!("2\n0 a\na 0\n".parse::<FiniteMetric>().is_err());
    }

    #[test]
    fn random_metrics_are_valid_and_seeded() {
        for seed in 0..10 {
            let a = FiniteMetric::random(5, seed).unwrap();
            assert_eq!(a, FiniteMetric::random(5, seed).unwrap());
            let g = build_gmetric("r", &a, Construction::Max);
            for x in 0..5 {
                for y in 0..5 {
                    assert_eq!(g.get(x, y, y), a.get(x, y));
                }
            }
        }
    }

    #[test]
    fn enumeration_counts_and_order() {
        for (m, n) in [(1, 1), (2, 4), (3, 27), (4, 256)] {
            let maps: Vec<TableMap> = enumerate_self_maps(m, DEFAULT_CAP).unwrap().collect();
            assert_eq!(maps.len(), n);
            for w in maps.windows(2) {
                assert!(w[0].table() < w[1].table());
            }
        }
        assert_eq!(
            enumerate_self_maps(2, 5)
                .unwrap()
                .map(|t| t.table().to_vec())
                .collect::<Vec<_>>(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert!(matches!(
            enumerate_self_maps(6, DEFAULT_CAP),
            Err(Error::CapExceeded { size: 6, cap: 5 })
        ));
        assert!(enumerate_self_maps(0, DEFAULT_CAP).is_err());
    }

    #[test]
    fn mutated_table_fails_nonnegativity() {
        let mut g = uniform_max(3);
        g.set(0, 1, 2, -Rational::one());
        let rep = exhaustive_axiom_check(&g).unwrap();
        assert_eq!(rep.nonnegative, Verdict::Fail(vec![ix(0), ix(1), ix(2)]));
    }

    #[test]
    fn extension_on_uniform_four() {
        let g = uniform_max(4);
        let p = delta(q(9, 10));
        let rep = exhaustive_theorem_check(&g, &p, DEFAULT_CAP).unwrap();
        assert_eq!(rep.maps_total, 256);
        assert!(rep.counterexamples.is_empty());
        assert_eq!(rep.conclusion_holds, rep.maps_satisfying_hypothesis);
        assert!(rep.max_steps_to_fixed <= 4);
        // brute-force count: a map qualifies exactly when every orbit set has
        // one element or is a path into a fixed point with no two-point cycle
        let satisfying = enumerate_self_maps(4, 5)
            .unwrap()
            .filter(|t| {
                (0..4).all(|s| {
                    let (o, c) = t.orbit_with_cycle(s);
                    o.len() - c == 1
                })
            })
            .count();
        assert!(rep.maps_satisfying_hypothesis <= satisfying);
        for f in &rep.hypothesis_failures {
            assert!(reverify_hypothesis_failure(&g, &p, f).unwrap());
        }
        // every permutation containing a 3-cycle is listed as failing
        for t in enumerate_self_maps(4, 5).unwrap() {
            let has_three_cycle = (0..4).any(|s| {
                let (o, c) = t.orbit_with_cycle(s);
                o.len() - c == 3
            });
            if has_three_cycle {
                assert!(rep.hypothesis_failures.iter().any(|f| f.map == t.table()));
            }
        }
    }

    #[test]
    fn constant_map_with_zero_delta() {
        let g = uniform_max(3);
        let p = delta(Rational::zero());
        let constant = TableMap::new(vec![1, 1, 1]).unwrap();
        assert_eq!(
            check_hypothesis(&g, &constant, &p).unwrap(),
            Ok(vec![0, 1, 2])
        );
        let rep = check_maps(&g, &p, [constant]).unwrap();
        assert_eq!(rep.conclusion_holds, 1);
    }

    #[test]
    fn three_cycle_fails_every_hypothesis() {
        let g = uniform_max(3);
        let cyc = TableMap::new(vec![1, 2, 0]).unwrap();
        let params = [
            TheoremParams::QContraction {
                q: q(1, 2),
                a: AuxWeight::Zero,
                scope: TripleScope::Carrier,
            },
            TheoremParams::QContraction {
                q: q(99, 100),
                a: AuxWeight::Zero,
                scope: TripleScope::Orbit,
            },
            TheoremParams::UnitCluster {
                a: AuxWeight::Zero,
                scope: TripleScope::Orbit,
            },
            TheoremParams::Gauge {
                a: AuxWeight::Zero,
                h: GaugeFunction::new("half", |a: Rational, b: Rational, c: Rational| {
                    a.sup(b).sup(c) / Rational::integer(2)
                }),
                scope: TripleScope::Orbit,
            },
            delta(q(99, 100)),
            TheoremParams::Extension {
                clauses: ExtensionParams::all(q(2, 1), q(1, 2), q(99, 100)).unwrap(),
                base: BaseQuantifier::Any,
            },
        ];
        for p in &params {
            let r = check_hypothesis(&g, &cyc, p).unwrap();
            assert!(r.is_err(), "{p:?}");
        }
    }

    #[test]
    fn q_contraction_on_uniform_three() {
        let g = uniform_max(3);
        let p = TheoremParams::QContraction {
            q: q(1, 2),
            a: AuxWeight::Zero,
            scope: TripleScope::Carrier,
        };
        let rep = exhaustive_theorem_check(&g, &p, DEFAULT_CAP).unwrap();
        assert_eq!(rep.maps_total, 27);
        assert!(rep.is_clean());
        assert_eq!(
            rep.conclusion_holds + rep.counterexamples.len(),
            rep.maps_satisfying_hypothesis
        );
    }

    #[test]
    fn gauge_side_conditions() {
        let g = uniform_max(3);
        let ident = GaugeFunction::new("identity-diag", |a: Rational, _, _| a);
        let p = TheoremParams::Gauge {
            a: AuxWeight::Zero,
            h: ident,
            scope: TripleScope::Carrier,
        };
        let rep = exhaustive_theorem_check(&g, &p, DEFAULT_CAP).unwrap();
        assert_eq!(rep.maps_satisfying_hypothesis, 0);
        assert!(rep
            .hypothesis_failures
            .iter()
            .all(|f| f.clause == HypothesisClause::GaugeFunction));
    }

    #[test]
    fn partitioned_runs_merge_to_the_whole() {
        let g = build_gmetric(
            "r4",
            &FiniteMetric::random(4, 3).unwrap(),
            Construction::Perimeter,
        );
        let p = TheoremParams::Extension {
            clauses: ExtensionParams::all(q(2, 1), q(3, 5), q(1, 2)).unwrap(),
            base: BaseQuantifier::All,
        };
        let maps: Vec<TableMap> = enumerate_self_maps(4, 5).unwrap().collect();
        let whole = check_maps(&g, &p, maps.clone()).unwrap();
        let a = check_maps(&g, &p, maps[100..].to_vec()).unwrap();
        let b = check_maps(&g, &p, maps[..100].to_vec()).unwrap();
        assert_eq!(a.merge(b), whole);
    }

    #[test]
    fn large_beta_is_flagged() {
        let g = uniform_max(3);
        let p = TheoremParams::Extension {
            clauses: ExtensionParams::new(None, Some(q(3, 4)), None).unwrap(),
            base: BaseQuantifier::All,
        };
        let rep = exhaustive_theorem_check(&g, &p, DEFAULT_CAP).unwrap();
        assert_eq!(rep.flags.len(), 1);
        let p = TheoremParams::Extension {
            clauses: ExtensionParams::new(None, Some(q(74, 100)), None).unwrap(),
            base: BaseQuantifier::All,
        };
        assert!(exhaustive_theorem_check(&g, &p, DEFAULT_CAP)
            .unwrap()
            .flags
            .is_empty());
    }

    #[test]
    fn counterexamples_reverify() {
        // a degenerate table (not a G-metric) makes every inequality vacuous,
        // so maps without a unique fixed point slip through
        let zero = FiniteSpace::from_fn("zero", 3, |_, _, _| Rational::zero());
        let p = TheoremParams::QContraction {
            q: q(1, 2),
            a: AuxWeight::Zero,
            scope: TripleScope::Carrier,
        };
        let rep = exhaustive_theorem_check(&zero, &p, DEFAULT_CAP).unwrap();
        assert_eq!(rep.maps_satisfying_hypothesis, 6);
        assert_eq!(rep.conclusion_holds + rep.counterexamples.len(), 6);
        let cyc = rep
            .counterexamples
            .iter()
            .find(|c| c.map == vec![1, 2, 0])
            .unwrap();
        assert_eq!(cyc.clause, ConclusionClause::Convergence);
        assert_eq!(cyc.witness, vec![0, 0, 1, 2]);
        let id = rep
            .counterexamples
            .iter()
            .find(|c| c.map == vec![0, 1, 2])
            .unwrap();
        assert_eq!(id.clause, ConclusionClause::Uniqueness);
        for cx in &rep.counterexamples {
            assert!(reverify_counterexample(&zero, &p, cx).unwrap());
        }
        let honest = uniform_max(3);
        assert!(!reverify_counterexample(&honest, &p, cyc).unwrap());
    }
}
