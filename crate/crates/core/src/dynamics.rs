//! Self-maps, orbits and Picard iteration.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::gspace::{GMetricSpace, Verdict};
use crate::point::{Carrier, Coords, Point};
use crate::scalar::{Scalar, Tolerance};

/// A map `T: X -> X`.
pub trait SelfMap {
    fn name(&self) -> &str;
    fn carrier(&self) -> Carrier;

    /// Apply to a point already known to lie in the carrier.
    fn apply_unchecked(&self, x: &Point) -> Point;

    fn apply(&self, x: &Point) -> Result<Point> {
        let carrier = self.carrier();
        carrier.check(x)?;
        let y = self.apply_unchecked(x);
        if !carrier.contains(&y) {
            return Err(Error::MapOutput {
                map: self.name().to_string(),
                detail: format!("T({x}) = {y}"),
            });
        }
        Ok(y)
    }
}

impl<T: SelfMap + ?Sized> SelfMap for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn carrier(&self) -> Carrier {
        (**self).carrier()
    }
    fn apply_unchecked(&self, x: &Point) -> Point {
        (**self).apply_unchecked(x)
    }
}

impl<T: SelfMap + ?Sized> SelfMap for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn carrier(&self) -> Carrier {
        (**self).carrier()
    }
    fn apply_unchecked(&self, x: &Point) -> Point {
        (**self).apply_unchecked(x)
    }
}

type CoordFn = dyn Fn(&[f64]) -> Coords + Send + Sync;

/// A map on `R^dim` given by a closure.
pub struct RealMap {
    name: String,
    dim: usize,
    f: Box<CoordFn>,
}

impl RealMap {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64]) -> Coords + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            f: Box::new(f),
        }
    }

    /// A map of the real line.
    pub fn scalar(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, 1, move |x| smallvec::smallvec![f(x[0])])
    }
}

impl core::fmt::Debug for RealMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RealMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl SelfMap for RealMap {
    fn name(&self) -> &str {
        &self.name
    }

    fn carrier(&self) -> Carrier {
        Carrier::Real { dim: self.dim }
    }

    fn apply_unchecked(&self, x: &Point) -> Point {
        Point::Real((self.f)(x.as_coords().expect("real carrier")))
    }
}

/// A self-map of `{0, .., m-1}` stored as its value table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TableMap {
    table: Vec<usize>,
}

impl TableMap {
    pub fn new(table: Vec<usize>) -> Result<Self> {
        let m = table.len();
        if let Some(bad) = table.iter().find(|&&v| v >= m) {
            return Err(Error::MapOutput {
                map: format!("{table:?}"),
                detail: format!("value {bad} outside 0..{m}"),
            });
        }
        Ok(Self { table })
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = alloc::vec![false; self.table.len()];
        for &v in &self.table {
            if core::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        true
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.table[i] == i).collect()
    }

    /// Orbit of `x` up to and including the first repeated point's first
    /// occurrence: returns `(orbit, cycle_start)` where `orbit[cycle_start..]`
    /// is the eventual cycle.
    pub fn orbit_with_cycle(&self, x: usize) -> (Vec<usize>, usize) {
        let mut pos = alloc::vec![usize::MAX; self.size()];
        let mut orbit = Vec::new();
        let mut cur = x;
        while pos[cur] == usize::MAX {
            pos[cur] = orbit.len();
            orbit.push(cur);
            cur = self.table[cur];
        }
        (orbit, pos[cur])
    }
}

impl core::fmt::Display for TableMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.table.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl SelfMap for TableMap {
    fn name(&self) -> &str {
        "table"
    }

    fn carrier(&self) -> Carrier {
        Carrier::Finite {
            size: self.table.len(),
        }
    }

    fn apply_unchecked(&self, x: &Point) -> Point {
        Point::Index(self.table[x.as_index().expect("finite carrier")])
    }
}

/// A finite orbit prefix with its successive gaps `G(x_k, x_{k+1}, x_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OrbitTrace<S> {
    points: Vec<Point>,
    gaps: Vec<S>,
    space_id: String,
    map_id: String,
    exact_fixed: bool,
}

impl<S: Scalar> OrbitTrace<S> {
    /// Wrap an arbitrary point sequence, filling in its gaps.
    pub fn from_points<G: GMetricSpace<Value = S>>(
        space: &G,
        map_id: impl Into<String>,
        points: Vec<Point>,
    ) -> Result<Self> {
        let gaps = points
            .windows(2)
            .map(|w| space.eval_g(&w[0], &w[1], &w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            gaps,
            space_id: space.name().to_string(),
            map_id: map_id.into(),
            exact_fixed: false,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn gaps(&self) -> &[S] {
        &self.gaps
    }

    pub fn space_id(&self) -> &str {
        &self.space_id
    }

    pub fn map_id(&self) -> &str {
        &self.map_id
    }

    /// The orbit stopped because it hit a point with `T x = x`.
    pub fn exact_fixed(&self) -> bool {
        self.exact_fixed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_compatible<G: GMetricSpace, M: SelfMap>(space: &G, map: &M) -> Result<()> {
    if space.carrier() != map.carrier() {
        return Err(Error::Domain {
            point: format!("map `{}` on {}", map.name(), map.carrier()),
            carrier: format!("{}", space.carrier()),
        });
    }
    Ok(())
}

/// `x0, T x0, .., T^n x0`, stopping early at an exact fixed point.
pub fn orbit<G: GMetricSpace, M: SelfMap>(
    space: &G,
    map: &M,
    x0: &Point,
    n: usize,
) -> Result<OrbitTrace<G::Value>> {
    if n == 0 {
        return Err(param("n", "orbit length must be at least 1"));
    }
    check_compatible(space, map)?;
    space.carrier().check(x0)?;
    let mut points = Vec::with_capacity(n + 1);
    let mut gaps = Vec::with_capacity(n);
    points.push(x0.clone());
    let mut exact_fixed = false;
    for k in 0..n {
        let next = map.apply(&points[k])?;
        gaps.push(space.eval_g(&points[k], &next, &next)?);
        let fixed = next == points[k];
        points.push(next);
        if fixed {
            exact_fixed = true;
            break;
        }
    }
    Ok(OrbitTrace {
        points,
        gaps,
        space_id: space.name().to_string(),
        map_id: map.name().to_string(),
        exact_fixed,
    })
}

/// `q^n * g0 / (1 - q)`: how far `T^n x` can be from any later iterate of a
/// map whose successive gaps shrink by at least the factor `q`.
pub fn apriori_bound(q: f64, g0: f64, n: usize) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(param("q", format!("{q} not in (0, 1)")));
    }
    if !(g0 >= 0.0) || !g0.is_finite() {
        return Err(param("g0", format!("{g0} must be finite and nonnegative")));
    }
    Ok(libm::pow(q, n as f64) * g0 / (1.0 - q))
}

/// Smallest `n` with `apriori_bound(q, g0, n) <= eps`.
pub fn iterations_needed(q: f64, g0: f64, eps: f64) -> Result<usize> {
    apriori_bound(q, g0, 0)?;
    if !(g0 > 0.0) {
        return Err(param("g0", "must be positive"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(param("eps", "must be positive"));
    }
    let bound = |n: usize| apriori_bound(q, g0, n).expect("validated");
    if bound(0) <= eps {
        return Ok(0);
    }
    let estimate = libm::ceil(libm::log(eps * (1.0 - q) / g0) / libm::log(q));
    let mut n = if estimate.is_finite() && estimate > 0.0 {
        estimate as usize
    } else {
        1
    };
    while bound(n) > eps {
        n += 1;
    }
    while n > 0 && bound(n - 1) <= eps {
        n -= 1;
    }
    Ok(n)
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StopReason {
    GapThreshold,
    MaxIter,
    ExactFixed,
}

/// Observed rate of the gap sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "class", rename_all = "kebab-case"))]
pub enum ConvergenceClass {
    Geometric { ratio: f64 },
    Sublinear,
    Stagnated,
    Diverged,
}

/// Gaps inspected by the ratio test.
pub const RATIO_WINDOW: usize = 10;
/// Largest ratio still called geometric.
pub const GEOMETRIC_MAX_RATIO: f64 = 0.95;
/// Growth over the smallest gap that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Ratio test over the last [`RATIO_WINDOW`] gaps.
pub fn classify_gaps(gaps: &[f64]) -> ConvergenceClass {
    let Some(&last) = gaps.last() else {
        return ConvergenceClass::Stagnated;
    };
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    if last > 0.0 && last >= DIVERGENCE_FACTOR * min {
        return ConvergenceClass::Diverged;
    }
    let window = &gaps[gaps.len().saturating_sub(RATIO_WINDOW)..];
    if window.len() < 2 {
        return ConvergenceClass::Geometric { ratio: 0.0 };
    }
    let ratios: Vec<f64> = window
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (a, b) if a > 0.0 => b / a,
            (_, 0.0) => 0.0,
            _ => f64::INFINITY,
        })
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    if max_ratio <= GEOMETRIC_MAX_RATIO {
        let ratio = if ratios.contains(&0.0) {
            0.0
        } else {
            libm::exp(ratios.iter().map(|r| libm::log(*r)).sum::<f64>() / ratios.len() as f64)
        };
        ConvergenceClass::Geometric { ratio }
    } else if ratios.iter().all(|r| *r < 1.0) {
        ConvergenceClass::Sublinear
    } else {
        ConvergenceClass::Stagnated
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop once a gap `G(x_n, x_{n+1}, x_{n+1})` is at most this.
    pub eps_stop: f64,
    pub max_iter: usize,
    /// A contraction factor known to hold along the orbit; enables the
    /// a-priori bound.
    pub certified_q: Option<f64>,
    /// Regime for the exact-fixed test on real points.
    pub tol: Tolerance,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            eps_stop: 1e-10,
            max_iter: 10_000,
            certified_q: None,
            tol: Tolerance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FixedPointCertificate<S> {
    pub candidate: Point,
    /// `G(u, Tu, Tu)` at the candidate.
    pub residual: S,
    /// Index of the candidate in the orbit.
    pub iterations: usize,
    pub convergence_class: ConvergenceClass,
    pub apriori_bound: Option<f64>,
    /// `residual <= apriori_bound` (up to tolerance), when a bound exists.
    pub bound_respected: Option<bool>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun<S> {
    pub certificate: FixedPointCertificate<S>,
    pub trace: OrbitTrace<S>,
}

/// Plain Picard iteration `x_{n+1} = T x_n`.
///
/// The candidate is the first `x_n` whose gap is at most `eps_stop` (or that
/// `T` fixes), else `x_{max_iter}`. The trace ends at `T(candidate)`.
pub fn solve_picard<G: GMetricSpace, M: SelfMap>(
    space: &G,
    map: &M,
    x0: &Point,
    opts: &PicardOptions,
) -> Result<PicardRun<G::Value>> {
    if !(opts.eps_stop > 0.0) {
        return Err(param("eps_stop", "must be positive"));
    }
    if let Some(q) = opts.certified_q {
        apriori_bound(q, 0.0, 0)?;
    }
    check_compatible(space, map)?;
    space.carrier().check(x0)?;

    let mut points = alloc::vec![x0.clone()];
    let mut gaps: Vec<G::Value> = Vec::new();
    let mut k = 0usize;
    let stop_reason = loop {
        let next = map.apply(&points[k])?;
        let gap = space.eval_g(&points[k], &next, &next)?;
        let fixed = points[k].same_as(&next, &opts.tol);
        points.push(next);
        gaps.push(gap);
        if fixed {
            break StopReason::ExactFixed;
        }
        if gap.to_f64() <= opts.eps_stop {
            break StopReason::GapThreshold;
        }
        if k == opts.max_iter {
            break StopReason::MaxIter;
        }
        k += 1;
    };

    let residual = gaps[k];
    let gaps_f: Vec<f64> = gaps.iter().map(|g| g.to_f64()).collect();
    let convergence_class = match stop_reason {
        StopReason::ExactFixed if k == 0 => ConvergenceClass::Geometric { ratio: 0.0 },
        _ => classify_gaps(&gaps_f),
    };
    let apriori = opts
        .certified_q
        .map(|q| apriori_bound(q, gaps_f[0], k).expect("validated"));
    let bound_respected = apriori.map(|b| {
        let r = residual.to_f64();
        r <= b + opts.tol.slack_for(r.abs() + b.abs())
    });

    let trace = OrbitTrace {
        points,
        gaps,
        space_id: space.name().to_string(),
        map_id: map.name().to_string(),
        exact_fixed: stop_reason == StopReason::ExactFixed,
    };
    Ok(PicardRun {
        certificate: FixedPointCertificate {
            candidate: trace.points[k].clone(),
            residual,
            iterations: k,
            convergence_class,
            apriori_bound: apriori,
            bound_respected,
            stop_reason,
        },
        trace,
    })
}

/// How much of the claim a probe actually covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Basis {
    /// Finite evidence on the supplied points only; not a proof.
    SampledEvidence,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Probe<W> {
    pub verdict: Verdict<W>,
    /// Number of instances that were actually tested.
    pub checked: usize,
    pub basis: Basis,
}

fn hits<G: GMetricSpace>(space: &G, u: &Point, points: &[Point], tol: G::Value) -> Result<usize> {
    let mut count = 0;
    for x in points {
        if space.eval_g(u, x, x)? <= tol {
            count += 1;
        }
    }
    Ok(count)
}

/// Earliest trace point `u` with at least `min_hits` entries `x_k` satisfying
/// `G(u, x_k, x_k) <= tol` (the point itself included).
pub fn detect_cluster_point<G: GMetricSpace>(
    space: &G,
    points: &[Point],
    tol: G::Value,
    min_hits: usize,
) -> Result<Option<Point>> {
    if min_hits < 2 {
        return Err(param("min_hits", "must be at least 2"));
    }
    for u in points {
        if hits(space, u, points, tol)? >= min_hits {
            return Ok(Some(u.clone()));
        }
    }
    Ok(None)
}

/// Number of trace entries within `tol` of `u`; lets callers re-count a
/// reported cluster point.
pub fn cluster_hits<G: GMetricSpace>(
    space: &G,
    u: &Point,
    points: &[Point],
    tol: G::Value,
) -> Result<usize> {
    hits(space, u, points, tol)
}

/// For every trace index `k` with `G(u, x_k, x_k) <= tol`, check
/// `G(Tu, T x_k, T x_k) <= tol`. Fails with the first violating index.
pub fn probe_orbital_continuity<G: GMetricSpace, M: SelfMap>(
    space: &G,
    map: &M,
    points: &[Point],
    candidate: &Point,
    tol: G::Value,
) -> Result<Probe<usize>> {
    check_compatible(space, map)?;
    let tu = map.apply(candidate)?;
    let mut checked = 0;
    for (k, x) in points.iter().enumerate() {
        if space.eval_g(candidate, x, x)? <= tol {
            checked += 1;
            let tx = map.apply(x)?;
            if space.eval_g(&tu, &tx, &tx)? > tol {
                return Ok(Probe {
                    verdict: Verdict::Fail(k),
                    checked,
                    basis: Basis::SampledEvidence,
                });
            }
        }
    }
    Ok(Probe {
        verdict: if checked == 0 {
            Verdict::Skipped
        } else {
            Verdict::Pass
        },
        checked,
        basis: Basis::SampledEvidence,
    })
}

/// Look for `x != y` (beyond `tol`) with `T x = T y` (within `tol`).
pub fn probe_injectivity<M: SelfMap>(
    map: &M,
    sample: &[Point],
    tol: &Tolerance,
) -> Result<Probe<(Point, Point)>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let images = sample
        .iter()
        .map(|x| map.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let mut checked = 0;
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            if sample[i].distinct_from(&sample[j], tol) {
                checked += 1;
                if images[i].same_as(&images[j], tol) {
                    return Ok(Probe {
                        verdict: Verdict::Fail((sample[i].clone(), sample[j].clone())),
                        checked,
                        basis: Basis::SampledEvidence,
                    });
                }
            }
        }
    }
    Ok(Probe {
        verdict: Verdict::Pass,
        checked,
        basis: Basis::SampledEvidence,
    })
}
