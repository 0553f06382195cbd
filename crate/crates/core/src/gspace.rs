//! G-metric spaces, the derived metric, and sample-based axiom checks.
//!
//! A G-metric is a ternary distance `G(x, y, z) >= 0` with
//!
//! * (G1) `G(x, x, x) = 0`,
//! * (G2) `G(x, x, y) > 0` for `x != y`,
//! * (G3) `G(x, x, y) <= G(x, y, z)` for `z != y`,
//! * (G4) invariance under every permutation of the arguments,
//! * (G5) `G(x, y, z) <= G(x, a, a) + G(a, y, z)`.
//!
//! The space is symmetric when `G(x, y, y) = G(x, x, y)`, and every G-metric
//! induces the ordinary metric `d_G(x, y) = G(x, y, y) + G(x, x, y)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::point::{Carrier, Point};
use crate::scalar::{approx_eq, approx_le, definitely_gt, definitely_lt, Scalar, Tolerance};

/// A ternary distance over a carrier.
///
/// Implementors provide [`GMetricSpace::g_unchecked`]; callers go through
/// [`GMetricSpace::eval_g`], which validates the points and the returned value.
pub trait GMetricSpace {
    type Value: Scalar;

    fn name(&self) -> &str;
    fn carrier(&self) -> Carrier;

    /// Whether the space claims `G(x, y, y) = G(x, x, y)`.
    fn symmetric_claimed(&self) -> bool {
        true
    }

    /// Evaluate on points already known to lie in the carrier.
    fn g_unchecked(&self, x: &Point, y: &Point, z: &Point) -> Self::Value;

    fn eval_g(&self, x: &Point, y: &Point, z: &Point) -> Result<Self::Value> {
        let carrier = self.carrier();
        carrier.check(x)?;
        carrier.check(y)?;
        carrier.check(z)?;
        let v = self.g_unchecked(x, y, z);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(format!("{x}, {y}, {z}")));
        }
        Ok(v)
    }

    /// `d_G(x, y) = G(x, y, y) + G(x, x, y)`.
    fn derived_metric(&self, x: &Point, y: &Point) -> Result<Self::Value> {
        Ok(self.eval_g(x, y, y)? + self.eval_g(x, x, y)?)
    }
}

impl<T: GMetricSpace + ?Sized> GMetricSpace for &T {
    type Value = T::Value;
    fn name(&self) -> &str {
        (**self).name()
    }
    fn carrier(&self) -> Carrier {
        (**self).carrier()
    }
    fn symmetric_claimed(&self) -> bool {
        (**self).symmetric_claimed()
    }
    fn g_unchecked(&self, x: &Point, y: &Point, z: &Point) -> Self::Value {
        (**self).g_unchecked(x, y, z)
    }
}

impl<T: GMetricSpace + ?Sized> GMetricSpace for Box<T> {
    type Value = T::Value;
    fn name(&self) -> &str {
        (**self).name()
    }
    fn carrier(&self) -> Carrier {
        (**self).carrier()
    }
    fn symmetric_claimed(&self) -> bool {
        (**self).symmetric_claimed()
    }
    fn g_unchecked(&self, x: &Point, y: &Point, z: &Point) -> Self::Value {
        (**self).g_unchecked(x, y, z)
    }
}

/// How a G-metric is assembled from pairwise distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Construction {
    /// `max{d(x,y), d(y,z), d(z,x)}`
    Max,
    /// `d(x,y) + d(y,z) + d(z,x)`
    Perimeter,
}

impl Construction {
    pub fn combine<S: Scalar>(self, dxy: S, dyz: S, dzx: S) -> S {
        match self {
            Construction::Max => dxy.sup(dyz).sup(dzx),
            Construction::Perimeter => dxy + dyz + dzx,
        }
    }
}

/// `R^dim` with a G-metric built from the Euclidean distance.
#[derive(Debug, Clone)]
pub struct RealSpace {
    name: String,
    dim: usize,
    construction: Construction,
}

impl RealSpace {
    pub fn new(name: impl Into<String>, dim: usize, construction: Construction) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            name: name.into(),
            dim,
            construction,
        }
    }

    /// The real line with `G = max{|x-y|, |y-z|, |z-x|}`.
    pub fn absmax() -> Self {
        Self::new("absmax", 1, Construction::Max)
    }

    /// The real line with the perimeter G-metric.
    pub fn perimeter() -> Self {
        Self::new("perimeter-r", 1, Construction::Perimeter)
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return libm::fabs(a[0] - b[0]);
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(s)
}

fn coords(p: &Point) -> &[f64] {
    p.as_coords().expect("real carrier holds real points")
}

impl GMetricSpace for RealSpace {
    type Value = f64;

    fn name(&self) -> &str {
        &self.name
    }

    fn carrier(&self) -> Carrier {
        Carrier::Real { dim: self.dim }
    }

    fn g_unchecked(&self, x: &Point, y: &Point, z: &Point) -> f64 {
        let (x, y, z) = (coords(x), coords(y), coords(z));
        self.construction
            .combine(euclid(x, y), euclid(y, z), euclid(z, x))
    }
}

type RealFn = dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync;

/// An arbitrary ternary function on `R^dim`, not necessarily a G-metric.
///
/// Used to exercise the axiom checks on deliberately broken functions.
pub struct FnSpace {
    name: String,
    dim: usize,
    symmetric_claimed: bool,
    f: Box<RealFn>,
}

impl FnSpace {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            symmetric_claimed: true,
            f: Box::new(f),
        }
    }

    pub fn with_symmetric_claim(mut self, claimed: bool) -> Self {
        self.symmetric_claimed = claimed;
        self
    }
}

impl core::fmt::Debug for FnSpace {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnSpace")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl GMetricSpace for FnSpace {
    type Value = f64;

    fn name(&self) -> &str {
        &self.name
    }

    fn carrier(&self) -> Carrier {
        Carrier::Real { dim: self.dim }
    }

    fn symmetric_claimed(&self) -> bool {
        self.symmetric_claimed
    }

    fn g_unchecked(&self, x: &Point, y: &Point, z: &Point) -> f64 {
        (self.f)(coords(x), coords(y), coords(z))
    }
}

/// A finite carrier `{0, .., m-1}` with a tabulated ternary function.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<S> {
    name: String,
    size: usize,
    table: Vec<S>,
}

impl<S: Scalar> FiniteSpace<S> {
    /// Tabulates `f` over all `size^3` triples. No axiom is enforced here.
    pub fn from_fn(
        name: impl Into<String>,
        size: usize,
        f: impl Fn(usize, usize, usize) -> S,
    ) -> Self {
        let mut table = Vec::with_capacity(size * size * size);
        for x in 0..size {
            for y in 0..size {
                for z in 0..size {
                    table.push(f(x, y, z));
                }
            }
        }
        Self {
            name: name.into(),
            size,
            table,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> S {
        self.table[(x * self.size + y) * self.size + z]
    }

    /// Overwrites one entry; used to build mutated tables for negative tests.
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: S) {
        let m = self.size;
        self.table[(x * m + y) * m + z] = v;
    }
}

impl<S: Scalar> GMetricSpace for FiniteSpace<S> {
    type Value = S;

    fn name(&self) -> &str {
        &self.name
    }

    fn carrier(&self) -> Carrier {
        Carrier::Finite { size: self.size }
    }

    fn g_unchecked(&self, x: &Point, y: &Point, z: &Point) -> S {
        let i = |p: &Point| p.as_index().expect("finite carrier holds indices");
        self.get(i(x), i(y), i(z))
    }
}

/// Outcome of one check. `Fail` always carries a witness that reproduces the
/// violation when re-evaluated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(
        tag = "verdict",
        content = "witness",
        rename_all = "SCREAMING_SNAKE_CASE"
    )
)]
pub enum Verdict<W> {
    Pass,
    Fail(W),
    Skipped,
}

impl<W> Verdict<W> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Fail(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

/// Per-axiom verdicts. Witnesses are listed in argument order of the
/// violated inequality: `(x, y, z)` for triples, `(x, y, z, a)` for (G5),
/// `(x, y)` for symmetry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomReport {
    pub nonnegative: Verdict<Vec<Point>>,
    pub g1: Verdict<Vec<Point>>,
    pub g2: Verdict<Vec<Point>>,
    pub g3: Verdict<Vec<Point>>,
    pub g4: Verdict<Vec<Point>>,
    pub g5: Verdict<Vec<Point>>,
    pub symmetry: Verdict<Vec<Point>>,
    /// Number of triples evaluated.
    pub sample_size: usize,
    pub mode: CheckMode,
}

impl AxiomReport {
    pub fn verdicts(&self) -> [(&'static str, &Verdict<Vec<Point>>); 7] {
        [
            ("nonnegative", &self.nonnegative),
            ("G1", &self.g1),
            ("G2", &self.g2),
            ("G3", &self.g3),
            ("G4", &self.g4),
            ("G5", &self.g5),
            ("symmetry", &self.symmetry),
        ]
    }

    /// No verdict is a failure.
    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| !v.is_fail())
    }
}

/// Dense cache of G over a point list.
struct Cube<S> {
    n: usize,
    vals: Vec<S>,
}

impl<S: Scalar> Cube<S> {
    fn build<G: GMetricSpace<Value = S>>(space: &G, pts: &[Point]) -> Result<Self> {
        let n = pts.len();
        let mut vals = Vec::with_capacity(n * n * n);
        for x in pts {
            for y in pts {
                for z in pts {
                    vals.push(space.eval_g(x, y, z)?);
                }
            }
        }
        Ok(Self { n, vals })
    }

    fn at(&self, i: usize, j: usize, k: usize) -> S {
        self.vals[(i * self.n + j) * self.n + k]
    }
}

fn first_fail<W>(slot: &mut Verdict<W>, witness: impl FnOnce() -> W) {
    if slot.is_pass() {
        *slot = Verdict::Fail(witness());
    }
}

/// Check (G1)-(G5), nonnegativity and symmetry.
///
/// In exhaustive mode the sample is ignored and the whole (finite) carrier is
/// used; (G5) always runs over all quadruples of the point set.
pub fn check_axioms<G: GMetricSpace>(
    space: &G,
    sample: &[Point],
    tol: &Tolerance,
    mode: CheckMode,
) -> Result<AxiomReport> {
    let pts: Vec<Point> = match mode {
        CheckMode::Exhaustive => space
            .carrier()
            .points()
            .ok_or(Error::ExhaustiveOnInfinite)?,
        CheckMode::Sampled => {
            if sample.is_empty() {
                return Err(Error::EmptySample);
            }
            sample.to_vec()
        }
    };
    let n = pts.len();
    let cube = Cube::build(space, &pts)?;
    let zero = G::Value::zero();
    let w3 =
        |i: usize, j: usize, k: usize| alloc::vec![pts[i].clone(), pts[j].clone(), pts[k].clone()];

    let mut report = AxiomReport {
        nonnegative: Verdict::Pass,
        g1: Verdict::Pass,
        g2: Verdict::Pass,
        g3: Verdict::Pass,
        g4: Verdict::Pass,
        g5: Verdict::Pass,
        symmetry: if space.symmetric_claimed() {
            Verdict::Pass
        } else {
            Verdict::Skipped
        },
        sample_size: n * n * n,
        mode,
    };

    for i in 0..n {
        if !approx_eq(cube.at(i, i, i), zero, tol) {
            first_fail(&mut report.g1, || w3(i, i, i));
        }
        for j in 0..n {
            let distinct_ij = pts[i].distinct_from(&pts[j], tol);
            let gxxy = cube.at(i, i, j);
            if distinct_ij && !definitely_gt(gxxy, zero, tol) {
                first_fail(&mut report.g2, || w3(i, i, j));
            }
            if report.symmetry.is_pass() && !approx_eq(cube.at(i, j, j), gxxy, tol) {
                report.symmetry = Verdict::Fail(alloc::vec![pts[i].clone(), pts[j].clone()]);
            }
            for k in 0..n {
                let v = cube.at(i, j, k);
                if definitely_lt(v, zero, tol) {
                    first_fail(&mut report.nonnegative, || w3(i, j, k));
                }
                if pts[k].distinct_from(&pts[j], tol) && !approx_le(gxxy, v, tol) {
                    first_fail(&mut report.g3, || w3(i, j, k));
                }
                let perms = [
                    cube.at(i, k, j),
                    cube.at(j, i, k),
                    cube.at(j, k, i),
                    cube.at(k, i, j),
                    cube.at(k, j, i),
                ];
                if perms.iter().any(|p| !approx_eq(*p, v, tol)) {
                    first_fail(&mut report.g4, || w3(i, j, k));
                }
                if report.g5.is_pass() {
                    for a in 0..n {
                        let bound = cube.at(i, a, a) + cube.at(a, j, k);
                        if !approx_le(v, bound, tol) {
                            report.g5 = Verdict::Fail(alloc::vec![
                                pts[i].clone(),
                                pts[j].clone(),
                                pts[k].clone(),
                                pts[a].clone()
                            ]);
                            break;
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Verify `|G(x,y,y) - G(x,x,y)| <= tol` over all ordered sample pairs.
pub fn check_symmetry<G: GMetricSpace>(
    space: &G,
    sample: &[Point],
    tol: &Tolerance,
) -> Result<Verdict<(Point, Point)>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    for x in sample {
        for y in sample {
            if !approx_eq(space.eval_g(x, y, y)?, space.eval_g(x, x, y)?, tol) {
                return Ok(Verdict::Fail((x.clone(), y.clone())));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Settings for [`diagnose_sequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnoseOptions {
    /// Fraction of the prefix treated as the tail (default: last half).
    pub tail_fraction: f64,
    /// Cap on tail indices entering the pairwise Cauchy sup; longer tails are
    /// thinned to evenly spaced indices that keep both endpoints.
    pub max_tail_points: usize,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            tail_fraction: 0.5,
            max_tail_points: 512,
        }
    }
}

/// One convergence quantity at the final index of the prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Indicator {
    /// `None` when the quantity needs a candidate limit and none was given.
    pub value: Option<f64>,
    pub threshold: f64,
    pub met: bool,
}

/// The equivalent convergence quantities, evaluated on a finite prefix.
///
/// `joint` is `sup_{n,m >= N} G(x, x_n, x_m)` at the final index `N`;
/// `derived` is `d_G(x_N, x)` (a sum of two G terms, hence compared against
/// `2 eps`); `to_limit` is `G(x, x_N, x_N)`; `from_limit` is `G(x_N, x, x)`;
/// `cauchy` is the sup of `G(x_n, x_m, x_m)` over tail pairs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceDiagnosis {
    pub candidate_limit: Option<Point>,
    pub final_index: usize,
    pub tail_start: usize,
    pub eps: f64,
    pub joint: Indicator,
    pub derived: Indicator,
    pub to_limit: Indicator,
    pub from_limit: Indicator,
    pub cauchy: Indicator,
}

impl ConvergenceDiagnosis {
    pub fn indicators(&self) -> [(&'static str, &Indicator); 5] {
        [
            ("joint", &self.joint),
            ("derived", &self.derived),
            ("to_limit", &self.to_limit),
            ("from_limit", &self.from_limit),
            ("cauchy", &self.cauchy),
        ]
    }

    /// Every indicator reached its threshold.
    pub fn all_met(&self) -> bool {
        self.indicators().iter().all(|(_, i)| i.met)
    }

    /// The five thresholds agree (all met or none met).
    pub fn consistent(&self) -> bool {
        let met = self.indicators().map(|(_, i)| i.met);
        met.iter().all(|m| *m) || met.iter().all(|m| !*m)
    }
}

fn tail_indices(start: usize, end: usize, cap: usize) -> Vec<usize> {
    let len = end - start + 1;
    if len <= cap || cap < 2 {
        return (start..=end).collect();
    }
    let mut out: Vec<usize> = (0..cap)
        .map(|k| start + ((k as u128 * (len - 1) as u128) / (cap - 1) as u128) as usize)
        .collect();
    out.dedup();
    out
}

/// Evaluate the convergence indicators of a prefix against a candidate limit.
pub fn diagnose_sequence<G: GMetricSpace>(
    space: &G,
    prefix: &[Point],
    candidate: Option<&Point>,
    eps: f64,
    opts: &DiagnoseOptions,
) -> Result<ConvergenceDiagnosis> {
    if prefix.len() < 2 {
        return Err(Error::Precondition(
            "prefix needs at least two points".to_string(),
        ));
    }
    if !(eps > 0.0) {
        return Err(crate::error::param("eps", "must be positive"));
    }
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(crate::error::param("tail_fraction", "must lie in (0, 1]"));
    }
    let last = prefix.len() - 1;
    let raw_start = ((prefix.len() as f64) * (1.0 - opts.tail_fraction)) as usize;
    let tail_start = raw_start.min(last - 1);

    let idx = tail_indices(tail_start, last, opts.max_tail_points);
    let mut cauchy = 0.0f64;
    for &n in &idx {
        for &m in &idx {
            if n != m {
                let v = space.eval_g(&prefix[n], &prefix[m], &prefix[m])?.to_f64();
                cauchy = cauchy.max(v);
            }
        }
    }

    let xn = &prefix[last];
    let (joint, derived, to_limit, from_limit) = match candidate {
        Some(x) => {
            let to_limit = space.eval_g(x, xn, xn)?.to_f64();
            (
                Some(to_limit),
                Some(space.derived_metric(xn, x)?.to_f64()),
                Some(to_limit),
                Some(space.eval_g(xn, x, x)?.to_f64()),
            )
        }
        None => (None, None, None, None),
    };
    let has_candidate = candidate.is_some();
    let ind = |value: Option<f64>, threshold: f64| Indicator {
        value,
        threshold,
        met: has_candidate && value.is_some_and(|v| v <= threshold),
    };
    Ok(ConvergenceDiagnosis {
        candidate_limit: candidate.cloned(),
        final_index: last,
        tail_start,
        eps,
        joint: ind(joint, eps),
        derived: ind(derived, 2.0 * eps),
        to_limit: ind(to_limit, eps),
        from_limit: ind(from_limit, eps),
        cauchy: ind(Some(cauchy), eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use alloc::vec;

    fn reals(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::real(x)).collect()
    }

    #[test]
    fn max_g_evaluations() {
        let s = RealSpace::absmax();
        let g = |a, b, c| {
            s.eval_g(&Point::real(a), &Point::real(b), &Point::real(c))
                .unwrap()
        };
        assert_eq!(g(1.0, 2.0, 2.0), 1.0);
        assert_eq!(g(0.0, 1.0, 3.0), 3.0);
        assert_eq!(g(4.5, 4.5, 4.5), 0.0);
    }

    #[test]
    fn eval_rejects_wrong_kind_and_dimension() {
        let s = RealSpace::absmax();
        let p = Point::real(1.0);
        assert!(matches!(
            s.eval_g(&p, &p, &Point::index(0)),
            Err(Error::Domain { .. })
        ));
        let q = Point::coords(&[1.0, 2.0]).unwrap();
        assert!(matches!(s.eval_g(&p, &q, &p), Err(Error::Domain { .. })));
    }

    #[test]
    fn non_finite_values_are_errors() {
        let s = FnSpace::new("blowup", 1, |_, _, _| f64::INFINITY);
        let p = Point::real(0.0);
        assert!(matches!(
            s.eval_g(&p, &p, &p),
            Err(Error::NonFiniteValue(_))
        ));
    }

    #[test]
    fn derived_metric_examples() {
        let s = RealSpace::absmax();
        let d = s
            .derived_metric(&Point::real(1.0), &Point::real(2.0))
            .unwrap();
        assert_eq!(d, 2.0);
        let x = Point::real(7.25);
        assert_eq!(s.derived_metric(&x, &x).unwrap(), 0.0);
        for (a, b) in [(0.0, 3.0), (-2.0, 5.5), (1e3, 1e-3)] {
            let (a, b) = (Point::real(a), Point::real(b));
            assert_eq!(
                s.derived_metric(&a, &b).unwrap(),
                2.0 * s.eval_g(&a, &b, &b).unwrap()
            );
        }
    }

    fn abs_table(m: usize) -> FiniteSpace<Rational> {
        FiniteSpace::from_fn("maxabs", m, |x, y, z| {
            let d = |a: usize, b: usize| Rational::integer((a as i64 - b as i64).abs());
            d(x, y).sup(d(y, z)).sup(d(z, x))
        })
    }

    #[test]
    fn exhaustive_axioms_on_small_max_space() {
        let s = abs_table(3);
        let r = check_axioms(&s, &[], &Tolerance::ZERO, CheckMode::Exhaustive).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.sample_size, 27);
        assert_eq!(r.symmetry, Verdict::Pass);
    }

    #[test]
    fn exhaustive_needs_finite_carrier() {
        let s = RealSpace::absmax();
        let err = check_axioms(
            &s,
            &reals(&[0.0]),
            &Tolerance::default(),
            CheckMode::Exhaustive,
        );
        assert_eq!(err.unwrap_err(), Error::ExhaustiveOnInfinite);
        let err = check_axioms(&s, &[], &Tolerance::default(), CheckMode::Sampled);
        assert_eq!(err.unwrap_err(), Error::EmptySample);
    }

    #[test]
    fn dropping_the_third_argument_breaks_g2() {
        let s = FnSpace::new("drop-z", 1, |x, y, _| (x[0] - y[0]).abs());
        let r = check_axioms(
            &s,
            &reals(&[0.0, 1.0]),
            &Tolerance::default(),
            CheckMode::Sampled,
        )
        .unwrap();
        assert_eq!(r.g2, Verdict::Fail(reals(&[0.0, 0.0, 1.0])));
        let w = r.g2.witness().unwrap();
        assert_eq!(s.eval_g(&w[0], &w[1], &w[2]).unwrap(), 0.0);
        assert!(!r.all_pass());
    }

    #[test]
    fn negated_entry_fails_nonnegativity() {
        let mut s = abs_table(3);
        s.set(0, 1, 2, -Rational::integer(2));
        let r = check_axioms(&s, &[], &Tolerance::ZERO, CheckMode::Exhaustive).unwrap();
        let w = r.nonnegative.witness().expect("negativity detected");
        assert!(s.eval_g(&w[0], &w[1], &w[2]).unwrap() < Rational::zero());
    }

    #[test]
    fn symmetry_checks() {
        let s = RealSpace::absmax();
        assert_eq!(
            check_symmetry(&s, &reals(&[0.0, 1.0, 5.0]), &Tolerance::default()).unwrap(),
            Verdict::Pass
        );
        assert_eq!(
            check_symmetry(&s, &reals(&[2.0]), &Tolerance::default()).unwrap(),
            Verdict::Pass
        );

        let skew = FnSpace::new("skew", 1, |x, y, z| {
            (x[0] - y[0]).abs() + 2.0 * (x[0] - z[0]).abs()
        });
        let v = check_symmetry(&skew, &reals(&[0.0, 1.0]), &Tolerance::default()).unwrap();
        assert_eq!(v, Verdict::Fail((Point::real(0.0), Point::real(1.0))));
        let (x, y) = v.witness().unwrap();
        assert_eq!(skew.eval_g(x, y, y).unwrap(), 3.0);
        assert_eq!(skew.eval_g(x, x, y).unwrap(), 2.0);
    }

    #[test]
    fn unclaimed_symmetry_is_skipped_in_axiom_report() {
        let skew = FnSpace::new("skew", 1, |x, y, z| {
            (x[0] - y[0]).abs() + 2.0 * (x[0] - z[0]).abs()
        })
        .with_symmetric_claim(false);
        let r = check_axioms(
            &skew,
            &reals(&[0.0, 1.0]),
            &Tolerance::default(),
            CheckMode::Sampled,
        )
        .unwrap();
        assert_eq!(r.symmetry, Verdict::Skipped);
        assert!(r.g4.is_fail());
    }

    #[test]
    fn harmonic_prefix_converges() {
        let s = RealSpace::absmax();
        let prefix: Vec<Point> = (0..=10_000)
            .map(|n| Point::real(1.0 / (1.0 + n as f64)))
            .collect();
        let d = diagnose_sequence(
            &s,
            &prefix,
            Some(&Point::real(0.0)),
            1e-3,
            &DiagnoseOptions::default(),
        )
        .unwrap();
        assert!(d.all_met(), "{d:?}");
        let xn = 1.0 / 10_001.0;
        assert_eq!(d.to_limit.value, Some(xn));
        assert_eq!(d.derived.value, Some(2.0 * xn));
        let expected_cauchy = 1.0 / 5_001.0 - xn;
        assert!((d.cauchy.value.unwrap() - expected_cauchy).abs() < 1e-15);
    }

    #[test]
    fn constant_and_alternating_prefixes() {
        let s = RealSpace::absmax();
        let x = Point::real(2.5);
        let d = diagnose_sequence(
            &s,
            &vec![x.clone(); 10],
            Some(&x),
            1e-9,
            &DiagnoseOptions::default(),
        )
        .unwrap();
        for (_, i) in d.indicators() {
            assert_eq!(i.value, Some(0.0));
            assert!(i.met);
        }

        let alt: Vec<Point> = (0..20).map(|n| Point::real((n % 2) as f64)).collect();
        let d = diagnose_sequence(
            &s,
            &alt,
            Some(&Point::real(0.0)),
            1e-3,
            &DiagnoseOptions::default(),
        )
        .unwrap();
        assert_eq!(d.cauchy.value, Some(1.0));
        assert!(!d.cauchy.met);
    }

    #[test]
    fn missing_candidate_meets_nothing() {
        let s = RealSpace::absmax();
        let x = Point::real(1.0);
        let d =
            diagnose_sequence(&s, &[x.clone(), x], None, 1.0, &DiagnoseOptions::default()).unwrap();
        assert!(d.indicators().iter().all(|(_, i)| !i.met));
        assert_eq!(d.to_limit.value, None);
    }

    #[test]
    fn thinned_tail_keeps_endpoints() {
        let idx = tail_indices(10, 1009, 7);
        assert_eq!(idx.first(), Some(&10));
        assert_eq!(idx.last(), Some(&1009));
        assert_eq!(idx.len(), 7);
        assert_eq!(tail_indices(3, 5, 512), vec![3, 4, 5]);
    }
}
