//! The six subcommands. Each returns an [`Outcome`]; nothing touches the
//! filesystem until the caller writes the artifacts at the end of the run.

use std::path::Path;

use gfix_core::contraction::{
    certify_on_samples, check_gauge_admissible, eval_condition, AuxWeight, ConditionId,
    ConditionSpec, ConditionVerdict, ExtensionParams, GaugeReport, SampleCertificate, Status,
};
use gfix_core::dynamics::{solve_picard, FixedPointCertificate, PicardOptions, SelfMap};
use gfix_core::gspace::{check_axioms, AxiomReport, CheckMode};
use gfix_core::oracle::{
    build_gmetric, exhaustive_theorem_check, reverify_counterexample, reverify_hypothesis_failure,
    FiniteMetric, TheoremCheckReport, TheoremId, TheoremParams,
};
use gfix_core::sampling::{PointSampler, SampleDomain, TripleSampler};
use gfix_core::{Carrier, GMetricSpace, Point, Rational, Scalar, Tolerance};
use serde::Serialize;

use crate::catalog::{self, MapHandle, ParamScalar, SpaceHandle};
use crate::config::{ConditionConfig, RunConfig, SpaceSelector, StartPoint};
use crate::error::CliError;
use crate::report::{Artifact, Envelope, SCHEMA_VERSION};
use crate::trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const AXIOMS_FILE: &str = "axioms.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const SOLVE_FILE: &str = "solve.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const GAUGE_FILE: &str = "gauge.json";
pub const ORACLE_FILE: &str = "oracle.json";
pub const WITNESS_FILE: &str = "witness.json";

/// Smallest positive offset on the violation search grid.
pub const VIOLATE_GRID_MIN: f64 = 1e-6;

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub status: &'static str,
    pub lines: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

fn envelope<'a, T>(
    cfg: &'a RunConfig,
    command: &'a str,
    status: &'a str,
    exit_code: i32,
    result: T,
) -> Envelope<'a, T> {
    Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        status,
        exit_code,
        config: cfg,
        result,
    }
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn show_points(pts: &[Point]) -> String {
    let inner: Vec<String> = pts.iter().map(|p| p.to_string()).collect();
    format!("({})", inner.join(", "))
}

// ---------------------------------------------------------------- resolution

pub fn load_space(cfg: &RunConfig) -> Result<SpaceHandle, CliError> {
    match cfg.space_selector()? {
        SpaceSelector::Name(name) => catalog::space(name),
        SpaceSelector::Table(t) => {
            let metric = load_metric_table(&t.metric_table)?;
            let file = t
                .metric_table
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(SpaceHandle::Finite(build_gmetric(
                format!("table:{file}"),
                &metric,
                t.construction,
            )))
        }
    }
}

pub fn load_metric_table(path: &Path) -> Result<FiniteMetric, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.parse()?)
}

pub fn build_spec<S: ParamScalar>(c: &ConditionConfig) -> Result<ConditionSpec<S>, CliError> {
    let id = c.id.ok_or_else(|| {
        CliError::Usage("no condition selected (use --condition or `condition.id`)".into())
    })?;
    let need = |v: &Option<crate::config::Num>, what: &str| -> Result<S, CliError> {
        v.as_ref()
            .ok_or_else(|| CliError::Usage(format!("{} needs `{what}`", id.as_str())))?
            .resolve(what)
    };
    Ok(match id {
        ConditionId::Q => ConditionSpec::q(need(&c.q, "q")?, c.a.build()?)?,
        ConditionId::Unit => ConditionSpec::unit(c.a.build()?),
        ConditionId::Gauge => {
            let h =
                c.h.as_deref()
                    .ok_or_else(|| CliError::Usage("C-GAUGE needs a gauge `h`".into()))?;
            ConditionSpec::gauge(c.a.build()?, catalog::gauge(h)?)
        }
        ConditionId::ExtI => ConditionSpec::ext_i(need(&c.alpha, "alpha")?)?,
        ConditionId::ExtII => ConditionSpec::ext_ii(need(&c.beta, "beta")?)?,
        ConditionId::ExtIII => ConditionSpec::ext_iii(need(&c.delta, "delta")?)?,
    })
}

pub fn build_theorem_params(cfg: &RunConfig, id: TheoremId) -> Result<TheoremParams, CliError> {
    let c = &cfg.condition;
    let scope = cfg.oracle.scope;
    let opt = |v: &Option<crate::config::Num>, what: &str| -> Result<Option<Rational>, CliError> {
        v.as_ref().map(|n| n.resolve::<Rational>(what)).transpose()
    };
    Ok(match id {
        TheoremId::QContraction => TheoremParams::QContraction {
            q: opt(&c.q, "q")?.ok_or_else(|| CliError::Usage("THM-2.2 needs `q`".into()))?,
            a: c.a.build()?,
            scope,
        },
        TheoremId::UnitCluster => TheoremParams::UnitCluster {
            a: c.a.build()?,
            scope,
        },
        TheoremId::Gauge => {
            let h =
                c.h.as_deref()
                    .ok_or_else(|| CliError::Usage("THM-2.10 needs a gauge `h`".into()))?;
            TheoremParams::Gauge {
                a: c.a.build()?,
                h: catalog::gauge(h)?,
                scope,
            }
        }
        TheoremId::Extension => TheoremParams::Extension {
            clauses: ExtensionParams::new(
                opt(&c.alpha, "alpha")?,
                opt(&c.beta, "beta")?,
                opt(&c.delta, "delta")?,
            )?,
            base: cfg.oracle.base,
        },
    })
}

fn real_domain(cfg: &RunConfig, carrier: Carrier) -> Result<SampleDomain, CliError> {
    match carrier {
        Carrier::Real { dim } => Ok(SampleDomain::Interval {
            lo: cfg.sampling.range[0],
            hi: cfg.sampling.range[1],
            dim,
        }),
        Carrier::Finite { size } => Ok(SampleDomain::Finite { size }),
    }
}

fn start_point(cfg: &RunConfig, carrier: Carrier) -> Result<Point, CliError> {
    let x0 = cfg
        .solver
        .x0
        .as_ref()
        .ok_or_else(|| CliError::Usage("no start point (use --x0 or `solver.x0`)".into()))?;
    let p = match (carrier, x0) {
        (Carrier::Finite { .. }, StartPoint::Scalar(i)) if *i >= 0.0 && i.fract() == 0.0 => {
            Point::index(*i as usize)
        }
        (Carrier::Finite { .. }, _) => {
            return Err(CliError::Usage(
                "start point on a finite space must be a point index".into(),
            ))
        }
        (Carrier::Real { .. }, StartPoint::Scalar(x)) => Point::real(*x),
        (Carrier::Real { .. }, StartPoint::Coords(v)) => Point::coords(v)?,
    };
    carrier.check(&p)?;
    Ok(p)
}

fn mismatch() -> CliError {
    CliError::Usage("map and space act on different carriers".into())
}

// ---------------------------------------------------------------- axioms

#[derive(Debug, Serialize)]
pub struct AxiomsResult<'a> {
    pub space: &'a str,
    pub symmetric_claimed: bool,
    pub report: AxiomReport,
}

pub fn axioms(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance()?;
    let space = load_space(cfg)?;
    let (report, claimed) = match &space {
        SpaceHandle::Finite(s) => (
            check_axioms(s, &[], &tol, CheckMode::Exhaustive)?,
            s.symmetric_claimed(),
        ),
        SpaceHandle::Real(s) => {
            let domain = real_domain(cfg, s.carrier())?;
            let sample =
                PointSampler::new(domain, cfg.sampling.seed)?.points(cfg.sampling.axiom_points);
            (
                check_axioms(s, &sample, &tol, CheckMode::Sampled)?,
                s.symmetric_claimed(),
            )
        }
    };
    let ok = report.all_pass();
    let mut lines = vec![format!(
        "space {} ({} triples, {:?})",
        space.name(),
        report.sample_size,
        report.mode
    )];
    for (name, v) in report.verdicts() {
        match v.witness() {
            Some(w) => lines.push(format!("  {name:<10} FAIL  witness {}", show_points(w))),
            None if v.is_pass() => lines.push(format!("  {name:<10} PASS")),
            None => lines.push(format!("  {name:<10} SKIPPED")),
        }
    }
    let (exit_code, status) = if ok {
        (EXIT_OK, "verified")
    } else {
        (EXIT_VIOLATION, "violation")
    };
    let result = AxiomsResult {
        space: space.name(),
        symmetric_claimed: claimed,
        report,
    };
    let artifact = Artifact::report(
        &cfg.out_dir(),
        AXIOMS_FILE,
        &envelope(cfg, "axioms", status, exit_code, result),
    )?;
    Ok(Outcome {
        exit_code,
        status,
        lines,
        artifacts: vec![artifact],
    })
}

// ---------------------------------------------------------------- condition

#[derive(Debug, Serialize)]
pub struct ConditionResult<'a, S> {
    pub space: &'a str,
    pub map: &'a str,
    pub triples: TripleSource,
    pub certificate: SampleCertificate<S>,
    /// Each FAILS entry of `certificate.worst`, replayed through the evaluator.
    pub reverified: Vec<bool>,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TripleSource {
    Sampled { count: usize, seed: u64 },
    Exhaustive,
}

fn replay<G: GMetricSpace, M: SelfMap>(
    space: &G,
    map: &M,
    spec: &ConditionSpec<G::Value>,
    v: &ConditionVerdict<G::Value>,
    tol: &Tolerance,
) -> Result<bool, CliError> {
    let [x, y, z] = &v.triple;
    let again = eval_condition(space, map, spec, x, y, z, tol)?;
    Ok(again.status == v.status && again.lhs == v.lhs && again.rhs == v.rhs)
}

fn condition_on<G, M>(
    cfg: &RunConfig,
    space: &G,
    map: &M,
    spec: &ConditionSpec<G::Value>,
    triples: Vec<[Point; 3]>,
    source: TripleSource,
    tol: &Tolerance,
) -> Result<Outcome, CliError>
where
    G: GMetricSpace,
    G::Value: Serialize,
    M: SelfMap,
{
    let cert = certify_on_samples(space, map, spec, triples, tol)?;
    let mut reverified = Vec::new();
    let mut lines = vec![format!(
        "{} on {} with map {}: {} checked, {} hold, {} vacuous, {} fail, {} skipped",
        spec.id().as_str(),
        space.name(),
        map.name(),
        cert.checked,
        cert.holds,
        cert.vacuous,
        cert.fails,
        cert.skipped
    )];
    for v in cert.worst.iter().filter(|v| v.status == Status::Fails) {
        let ok = replay(space, map, spec, v, tol)?;
        reverified.push(ok);
        lines.push(format!(
            "  witness {}  lhs={} rhs={}  {}{}",
            show_points(&v.triple),
            v.lhs,
            v.rhs,
            v.status.as_str(),
            if ok {
                " (re-verified)"
            } else {
                " (REPLAY MISMATCH)"
            }
        ));
    }
    if cert.excluded_term_count > 0 {
        lines.push(format!(
            "  M3 undefined on {} triples",
            cert.excluded_term_count
        ));
    }
    let ok = cert.all_hold();
    let (exit_code, status) = if ok {
        (EXIT_OK, "verified")
    } else {
        (EXIT_VIOLATION, "violation")
    };
    let result = ConditionResult {
        space: space.name(),
        map: map.name(),
        triples: source,
        certificate: cert,
        reverified,
    };
    let artifact = Artifact::report(
        &cfg.out_dir(),
        CERTIFICATE_FILE,
        &envelope(cfg, "condition", status, exit_code, result),
    )?;
    Ok(Outcome {
        exit_code,
        status,
        lines,
        artifacts: vec![artifact],
    })
}

fn all_triples(carrier: Carrier) -> Vec<[Point; 3]> {
    let pts = carrier.points().unwrap_or_default();
    let mut out = Vec::with_capacity(pts.len().pow(3));
    for x in &pts {
        for y in &pts {
            for z in &pts {
                out.push([x.clone(), y.clone(), z.clone()]);
            }
        }
    }
    out
}

pub fn condition(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance()?;
    let space = load_space(cfg)?;
    let map = catalog::map(cfg.map_name()?, space.carrier())?;
    match (&space, &map) {
        (SpaceHandle::Real(s), MapHandle::Real(m)) => {
            let spec = build_spec::<f64>(&cfg.condition)?;
            let domain = real_domain(cfg, s.carrier())?;
            let triples =
                TripleSampler::new(domain, cfg.sampling.seed)?.triples(cfg.sampling.count);
            let source = TripleSource::Sampled {
                count: cfg.sampling.count,
                seed: cfg.sampling.seed,
            };
            condition_on(cfg, s, m, &spec, triples, source, &tol)
        }
        (SpaceHandle::Finite(s), MapHandle::Table(m)) => {
            let spec = build_spec::<Rational>(&cfg.condition)?;
            condition_on(
                cfg,
                s,
                m,
                &spec,
                all_triples(s.carrier()),
                TripleSource::Exhaustive,
                &tol,
            )
        }
        _ => Err(mismatch()),
    }
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Serialize)]
pub struct SolveResult<'a, S> {
    pub space: &'a str,
    pub map: &'a str,
    pub x0: Point,
    pub eps_stop: f64,
    pub certificate: FixedPointCertificate<S>,
}

fn solve_on<G, M>(cfg: &RunConfig, space: &G, map: &M, tol: Tolerance) -> Result<Outcome, CliError>
where
    G: GMetricSpace,
    G::Value: Serialize,
    M: SelfMap,
{
    let x0 = start_point(cfg, space.carrier())?;
    let opts = PicardOptions {
        eps_stop: cfg.solver.eps_stop,
        max_iter: cfg.solver.max_iter,
        certified_q: cfg.solver.certified_q,
        tol,
    };
    let run = solve_picard(space, map, &x0, &opts)?;
    let cert = run.certificate;
    let converged = cert.residual.to_f64() <= opts.eps_stop;
    let (exit_code, status) = if converged {
        (EXIT_OK, "converged")
    } else {
        (EXIT_VIOLATION, "not-converged")
    };
    let mut lines = vec![
        format!(
            "candidate {}  residual {}  iterations {}",
            cert.candidate, cert.residual, cert.iterations
        ),
        format!(
            "stop {:?}  class {:?}",
            cert.stop_reason, cert.convergence_class
        ),
    ];
    if let (Some(b), Some(ok)) = (cert.apriori_bound, cert.bound_respected) {
        lines.push(format!(
            "a-priori bound {b}  {}",
            if ok { "respected" } else { "VIOLATED" }
        ));
    }
    let dir = cfg.out_dir();
    let csv = Artifact {
        path: dir.join(TRACE_FILE),
        bytes: trace::to_csv(&run.trace, opts.certified_q)?,
    };
    let result = SolveResult {
        space: space.name(),
        map: map.name(),
        x0,
        eps_stop: opts.eps_stop,
        certificate: cert,
    };
    let report = Artifact::report(
        &dir,
        SOLVE_FILE,
        &envelope(cfg, "solve", status, exit_code, result),
    )?;
    Ok(Outcome {
        exit_code,
        status,
        lines,
        artifacts: vec![report, csv],
    })
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance()?;
    let space = load_space(cfg)?;
    let map = catalog::map(cfg.map_name()?, space.carrier())?;
    match (&space, &map) {
        (SpaceHandle::Real(s), MapHandle::Real(m)) => solve_on(cfg, s, m, tol),
        (SpaceHandle::Finite(s), MapHandle::Table(m)) => solve_on(cfg, s, m, tol),
        _ => Err(mismatch()),
    }
}

// ---------------------------------------------------------------- gauge

/// Exit 0 needs every verdict except the usc heuristic, plus a consistent
/// equivalence on the grid.
pub fn gauge_verified(r: &GaugeReport) -> bool {
    r.monotone.is_pass()
        && r.diagonal_strict.is_pass()
        && r.iterates_vanish.is_pass()
        && r.equivalence_consistent
}

pub fn gauge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let name = cfg
        .gauge
        .name
        .as_deref()
        .or(cfg.condition.h.as_deref())
        .ok_or_else(|| CliError::Usage("no gauge selected (use --gauge or `gauge.name`)".into()))?;
    let h = catalog::gauge::<f64>(name)?;
    let g = &cfg.gauge;
    let report = check_gauge_admissible(&h, &g.grid, g.n_max, g.thresh)?;
    let ok = gauge_verified(&report);
    let show = |label: &str, pass: bool, w: Option<String>| match w {
        Some(w) => format!("  {label:<22} FAIL  witness {w}"),
        None => format!("  {label:<22} {}", verdict_word(pass)),
    };
    let lines = vec![
        format!(
            "gauge {name} on {} grid values, n_max {}, thresh {}",
            g.grid.len(),
            g.n_max,
            g.thresh
        ),
        show(
            "monotone",
            report.monotone.is_pass(),
            report.monotone.witness().map(|w| format!("{w:?}")),
        ),
        show(
            "usc (heuristic)",
            report.usc_heuristic.is_pass(),
            report.usc_heuristic.witness().map(|w| format!("{w:?}")),
        ),
        show(
            "diagonal_strict",
            report.diagonal_strict.is_pass(),
            report.diagonal_strict.witness().map(|w| format!("t={w}")),
        ),
        show(
            "iterates_vanish",
            report.iterates_vanish.is_pass(),
            report
                .iterates_vanish
                .witness()
                .map(|(t, v)| format!("t={t} g^n(t)={v}")),
        ),
        show(
            "equivalence_consistent",
            report.equivalence_consistent,
            None,
        ),
    ];
    let (exit_code, status) = if ok {
        (EXIT_OK, "verified")
    } else {
        (EXIT_VIOLATION, "violation")
    };
    let artifact = Artifact::report(
        &cfg.out_dir(),
        GAUGE_FILE,
        &envelope(cfg, "gauge", status, exit_code, &report),
    )?;
    Ok(Outcome {
        exit_code,
        status,
        lines,
        artifacts: vec![artifact],
    })
}

// ---------------------------------------------------------------- oracle

#[derive(Debug, Serialize)]
pub struct OracleResult {
    pub report: TheoremCheckReport,
    /// Replay of each counterexample, in report order.
    pub counterexamples_reverified: Vec<bool>,
    pub hypothesis_failures_reverified: bool,
}

pub fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let space = load_space(cfg)?;
    let SpaceHandle::Finite(s) = &space else {
        return Err(CliError::Usage(format!(
            "oracle needs a finite space, `{}` is not",
            space.name()
        )));
    };
    let id = cfg.oracle.theorem.ok_or_else(|| {
        CliError::Usage("no theorem selected (use --theorem or `oracle.theorem`)".into())
    })?;
    let params = build_theorem_params(cfg, id)?;
    let report = exhaustive_theorem_check(s, &params, cfg.oracle.cap)?;
    let cx_ok = report
        .counterexamples
        .iter()
        .map(|cx| reverify_counterexample(s, &params, cx))
        .collect::<Result<Vec<_>, _>>()?;
    let mut hf_ok = true;
    for f in &report.hypothesis_failures {
        hf_ok &= reverify_hypothesis_failure(s, &params, f)?;
    }
    let mut lines = vec![
        format!("{} on {} ({})", id.as_str(), s.name(), params.describe()),
        format!(
            "  maps {}  satisfying hypothesis {}  conclusion holds {}  counterexamples {}",
            report.maps_total,
            report.maps_satisfying_hypothesis,
            report.conclusion_holds,
            report.counterexamples.len()
        ),
        format!("  max steps to fixed point {}", report.max_steps_to_fixed),
    ];
    for a in &report.automatic {
        lines.push(format!("  automatic: {a}"));
    }
    for f in &report.flags {
        lines.push(format!("  flag: {f}"));
    }
    for (cx, ok) in report.counterexamples.iter().zip(&cx_ok) {
        lines.push(format!(
            "  counterexample map {:?} {:?} witness {:?}{}",
            cx.map,
            cx.clause,
            cx.witness,
            if *ok {
                " (re-verified)"
            } else {
                " (REPLAY MISMATCH)"
            }
        ));
    }
    let clean = report.counterexamples.is_empty();
    let (exit_code, status) = if clean {
        (EXIT_OK, "verified")
    } else {
        (EXIT_VIOLATION, "counterexample")
    };
    let result = OracleResult {
        report,
        counterexamples_reverified: cx_ok,
        hypothesis_failures_reverified: hf_ok,
    };
    let artifact = Artifact::report(
        &cfg.out_dir(),
        ORACLE_FILE,
        &envelope(cfg, "oracle", status, exit_code, result),
    )?;
    Ok(Outcome {
        exit_code,
        status,
        lines,
        artifacts: vec![artifact],
    })
}

// ---------------------------------------------------------------- violate

#[derive(Debug, Clone, Serialize)]
pub struct ViolationWitness {
    pub triple: [Point; 3],
    pub lhs: f64,
    pub rhs: f64,
    pub status: Status,
    /// `G(x, y, z)` of the witness triple. Any failing triple of a map with
    /// `G(Tx,Ty,Tz) <= M1/(1+M1)` has `1/(1+M1) >= q` up to the tolerance.
    pub witness_x: f64,
    pub reciprocal: f64,
    pub reverified: bool,
    /// `G(x, y, z)` where failures stop along `lo + s (p - lo)`, `s >= 1`.
    pub boundary_x: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationSearch {
    pub q: f64,
    pub checked: usize,
    pub fails_on_grid: usize,
    pub witness: Option<ViolationWitness>,
}

#[derive(Debug, Serialize)]
pub struct ViolateResult<'a> {
    pub space: &'a str,
    pub map: &'a str,
    pub grid: Vec<f64>,
    pub searches: Vec<ViolationSearch>,
}

/// `{lo} ∪ {lo + s}` for `resolution` log-spaced `s` in `[1e-6, hi - lo]`.
pub fn violation_grid(lo: f64, hi: f64, resolution: usize) -> Result<Vec<f64>, CliError> {
    let span = hi - lo;
    if !(span > VIOLATE_GRID_MIN) || resolution < 2 {
        return Err(CliError::Usage(format!(
            "violation grid needs hi - lo > {VIOLATE_GRID_MIN} and resolution >= 2"
        )));
    }
    let (a, b) = (VIOLATE_GRID_MIN.ln(), span.ln());
    let mut g = vec![lo];
    for k in 0..resolution {
        let s = match k {
            0 => VIOLATE_GRID_MIN,
            k if k + 1 == resolution => span,
            k => (a + (b - a) * k as f64 / (resolution - 1) as f64).exp(),
        };
        g.push(lo + s);
    }
    Ok(g)
}

fn scaled(lo: f64, p: &[Point; 3], s: f64) -> [Point; 3] {
    p.clone()
        .map(|q| Point::real(lo + s * (q.as_real().unwrap_or(lo) - lo)))
}

fn search_q<G, M>(
    space: &G,
    map: &M,
    spec: &ConditionSpec<f64>,
    grid: &[f64],
    lo: f64,
    bisection_steps: usize,
    tol: &Tolerance,
) -> Result<ViolationSearch, CliError>
where
    G: GMetricSpace<Value = f64>,
    M: SelfMap,
{
    let q = spec.coefficient().unwrap_or(1.0);
    let mut checked = 0;
    let mut fails = 0;
    let mut worst: Option<ConditionVerdict<f64>> = None;
    let pts: Vec<Point> = grid.iter().map(|v| Point::real(*v)).collect();
    for x in &pts {
        for y in &pts {
            if !x.distinct_from(y, tol) {
                continue;
            }
            for z in &pts {
                let v = eval_condition(space, map, spec, x, y, z, tol)?;
                checked += 1;
                if v.status == Status::Fails {
                    fails += 1;
                    if worst.as_ref().is_none_or(|w| v.excess() > w.excess()) {
                        worst = Some(v);
                    }
                }
            }
        }
    }
    let witness = match worst {
        None => None,
        Some(v) => {
            let reverified = replay(space, map, spec, &v, tol)?;
            let [x, y, z] = &v.triple;
            let witness_x = space.eval_g(x, y, z)?;
            let fails_at = |s: f64| -> Result<bool, CliError> {
                let [a, b, c] = scaled(lo, &v.triple, s);
                Ok(eval_condition(space, map, spec, &a, &b, &c, tol)?.status == Status::Fails)
            };
            let mut boundary_x = None;
            let mut hi = 2.0;
            let mut found = false;
            for _ in 0..64 {
                if !fails_at(hi)? {
                    found = true;
                    break;
                }
                hi *= 2.0;
            }
            if found {
                let mut lo_s = 1.0;
                for _ in 0..bisection_steps {
                    let mid = 0.5 * (lo_s + hi);
                    if fails_at(mid)? {
                        lo_s = mid;
                    } else {
                        hi = mid;
                    }
                }
                let [a, b, c] = scaled(lo, &v.triple, lo_s);
                boundary_x = Some(space.eval_g(&a, &b, &c)?);
            }
            Some(ViolationWitness {
                triple: v.triple.clone(),
                lhs: v.lhs,
                rhs: v.rhs,
                status: v.status,
                witness_x,
                reciprocal: 1.0 / (1.0 + witness_x),
                reverified,
                boundary_x,
            })
        }
    };
    Ok(ViolationSearch {
        q,
        checked,
        fails_on_grid: fails,
        witness,
    })
}

pub fn violate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance()?;
    let space = load_space(cfg)?;
    let map = catalog::map(cfg.map_name()?, space.carrier())?;
    let (SpaceHandle::Real(s), MapHandle::Real(m)) = (&space, &map) else {
        return Err(CliError::Usage(
            "violate searches real spaces on the line only".into(),
        ));
    };
    if s.carrier() != (Carrier::Real { dim: 1 }) {
        return Err(CliError::Usage(
            "violate searches real spaces on the line only".into(),
        ));
    }
    if cfg.condition.id.is_some_and(|id| id != ConditionId::Q) {
        return Err(CliError::Usage("violate searches C-Q only".into()));
    }
    let qs: Vec<f64> = if cfg.violate.q_grid.is_empty() {
        let q = cfg
            .condition
            .q
            .as_ref()
            .ok_or_else(|| CliError::Usage("violate needs `q` or a `q_grid`".into()))?;
        vec![q.to_f64("q")?]
    } else {
        cfg.violate.q_grid.clone()
    };
    let a: AuxWeight<f64> = cfg.condition.a.build()?;
    let [lo, hi] = cfg.sampling.range;
    let grid = violation_grid(lo, hi, cfg.violate.resolution)?;
    let mut searches = Vec::new();
    let mut lines = Vec::new();
    for q in qs {
        let spec = ConditionSpec::q(q, a.clone())?;
        let r = search_q(s, m, &spec, &grid, lo, cfg.violate.bisection_steps, &tol)?;
        match &r.witness {
            Some(w) => lines.push(format!(
                "q={q}: witness {}  lhs={} rhs={}  x={} 1/(1+x)={}{}{}",
                show_points(&w.triple),
                w.lhs,
                w.rhs,
                w.witness_x,
                w.reciprocal,
                w.boundary_x
                    .map(|b| format!("  boundary x={b}"))
                    .unwrap_or_default(),
                if w.reverified {
                    "  (re-verified)"
                } else {
                    "  (REPLAY MISMATCH)"
                }
            )),
            None => lines.push(format!(
                "q={q}: no violating triple among {} grid triples",
                r.checked
            )),
        }
        searches.push(r);
    }
    let all_found = searches
        .iter()
        .all(|r| r.witness.as_ref().is_some_and(|w| w.reverified));
    let (exit_code, status) = if all_found {
        (EXIT_OK, "witness-found")
    } else {
        (EXIT_VIOLATION, "no-witness")
    };
    let result = ViolateResult {
        space: s.name(),
        map: m.name(),
        grid,
        searches,
    };
    let artifact = Artifact::report(
        &cfg.out_dir(),
        WITNESS_FILE,
        &envelope(cfg, "violate", status, exit_code, result),
    )?;
    Ok(Outcome {
        exit_code,
        status,
        lines,
        artifacts: vec![artifact],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_log_spaced_above_lo() {
        let g = violation_grid(0.0, 100.0, 5).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 1e-6);
        assert_eq!(g[5], 100.0);
        for w in g.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(violation_grid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn scaling_moves_away_from_lo() {
        let t = [Point::real(1.0), Point::real(3.0), Point::real(3.0)];
        let s = scaled(1.0, &t, 2.0);
        assert_eq!(s, [Point::real(1.0), Point::real(5.0), Point::real(5.0)]);
    }
}
