//! Argument parsing: command-line flags override the config document.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gfix_core::contraction::ConditionId;
use gfix_core::gspace::Construction;
use gfix_core::oracle::{BaseQuantifier, TheoremId, TripleScope};
use serde::de::DeserializeOwned;

use crate::commands::{self, Outcome, EXIT_USAGE};
use crate::config::{AuxConfig, MetricTableSpace, Num, RunConfig, SpaceSelector, StartPoint};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gfix",
    version,
    about = "Verify contractive conditions and solve fixed points on G-metric spaces"
)]
struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for report and trace files (default: ./gfix-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for sampled points and triples (default: 0).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Absolute comparison slack (default: 1e-12 absolute plus 1e-12 relative).
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the G-metric axioms and symmetry.
    Axioms {
        #[command(flatten)]
        target: Target,
        /// Points drawn on real spaces; every triple of them is checked (default: 24).
        #[arg(long)]
        axiom_points: Option<usize>,
        #[command(flatten)]
        range: RangeArg,
    },
    /// Certify a contractive condition on sampled (or all finite) triples.
    Condition {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        condition: ConditionArgs,
        /// Triples sampled on real spaces (default: 10000).
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        range: RangeArg,
    },
    /// Run Picard iteration and emit a certificate and a CSV trace.
    Solve {
        #[command(flatten)]
        target: Target,
        /// Start point: a number, comma-separated coordinates, or a point index.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<StartPoint>,
        /// Stop once G(x, Tx, Tx) is at most this (default: 1e-10).
        #[arg(long)]
        eps_stop: Option<f64>,
        /// Iteration budget (default: 10000).
        #[arg(long)]
        max_iter: Option<usize>,
        /// Contraction constant in [0, 1) used for the a-priori error bound.
        #[arg(long)]
        certified_q: Option<f64>,
    },
    /// Check a gauge function for admissibility on a grid.
    Gauge {
        /// Catalog gauge name (default: gauge.name, then condition.h, from the config).
        #[arg(long)]
        gauge: Option<String>,
        /// Comma-separated positive grid values.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Iterations allowed for g(t) = h(t, t, t) to fall below --thresh (default: 1e7).
        #[arg(long)]
        n_max: Option<u64>,
        /// Vanishing threshold for the gauge iterates (default: 1e-6).
        #[arg(long)]
        thresh: Option<f64>,
    },
    /// Check a fixed point statement against every self-map of a finite space.
    Oracle {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        condition: ConditionArgs,
        /// THM-2.2 | THM-2.5 | THM-2.10 | THM-2.12
        #[arg(long)]
        theorem: Option<TheoremId>,
        /// carrier | orbit
        #[arg(long, value_parser = kebab::<TripleScope>)]
        scope: Option<TripleScope>,
        /// all | any
        #[arg(long, value_parser = kebab::<BaseQuantifier>)]
        base: Option<BaseQuantifier>,
        /// Largest space size enumerated (default: 5).
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Search a grid for a triple violating C-Q.
    Violate {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        condition: ConditionArgs,
        /// Comma-separated values of q to search.
        #[arg(long, value_delimiter = ',')]
        q_grid: Option<Vec<f64>>,
        /// Log-spaced grid points per axis (default: 40).
        #[arg(long)]
        resolution: Option<usize>,
        /// Bisection steps when locating the violation boundary (default: 60).
        #[arg(long)]
        bisection_steps: Option<usize>,
        #[command(flatten)]
        range: RangeArg,
    },
}

#[derive(Debug, Args)]
struct Target {
    /// Catalog space name.
    #[arg(long, conflicts_with = "metric_table")]
    space: Option<String>,
    /// Metric table file: first line m, then m rows of integers or p/q.
    #[arg(long, value_name = "PATH")]
    metric_table: Option<PathBuf>,
    /// max | perimeter (with --metric-table).
    #[arg(long, value_parser = kebab::<Construction>, requires = "metric_table")]
    construction: Option<Construction>,
    /// Catalog map name.
    #[arg(long)]
    map: Option<String>,
}

#[derive(Debug, Args)]
struct ConditionArgs {
    /// C-Q | C-UNIT | C-GAUGE | EXT-I | EXT-II | EXT-III
    #[arg(long)]
    condition: Option<ConditionId>,
    /// Contraction constant.
    #[arg(long)]
    q: Option<Num>,
    /// zero | constant:<c> | reciprocal-cap:<c>
    #[arg(long)]
    a: Option<AuxConfig>,
    /// Catalog gauge name.
    #[arg(long)]
    h: Option<String>,
    /// Extension coefficient alpha (decimal or p/q).
    #[arg(long)]
    alpha: Option<Num>,
    /// Extension coefficient beta (decimal or p/q).
    #[arg(long)]
    beta: Option<Num>,
    /// Extension coefficient delta (decimal or p/q).
    #[arg(long)]
    delta: Option<Num>,
}

#[derive(Debug, Args)]
struct RangeArg {
    /// Sampling interval as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    range: Option<Vec<f64>>,
}

fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl Target {
    fn apply(self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(name) = self.space {
            cfg.space = Some(SpaceSelector::Name(name));
        }
        if let Some(path) = self.metric_table {
            cfg.space = Some(SpaceSelector::Table(MetricTableSpace {
                metric_table: path,
                construction: self.construction.unwrap_or(Construction::Max),
            }));
        }
        set_opt(&mut cfg.map, self.map);
        Ok(())
    }
}

impl ConditionArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let c = &mut cfg.condition;
        set_opt(&mut c.id, self.condition);
        set_opt(&mut c.q, self.q);
        set(&mut c.a, self.a);
        set_opt(&mut c.h, self.h);
        set_opt(&mut c.alpha, self.alpha);
        set_opt(&mut c.beta, self.beta);
        set_opt(&mut c.delta, self.delta);
    }
}

impl RangeArg {
    fn apply(self, cfg: &mut RunConfig) -> Result<(), CliError> {
        match self.range.as_deref() {
            None => Ok(()),
            Some([lo, hi]) => {
                cfg.sampling.range = [*lo, *hi];
                Ok(())
            }
            Some(_) => Err(CliError::Usage("--range takes `lo,hi`".into())),
        }
    }
}

/// Merge the config file (if any) with the flags; flags win.
fn resolve(cli: Cli) -> Result<(&'static str, RunConfig), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set_opt(&mut cfg.out, cli.out);
    set_opt(&mut cfg.tol, cli.tol);
    set(&mut cfg.sampling.seed, cli.seed);
    let name = match cli.command {
        Command::Axioms {
            target,
            axiom_points,
            range,
        } => {
            target.apply(&mut cfg)?;
            range.apply(&mut cfg)?;
            set(&mut cfg.sampling.axiom_points, axiom_points);
            "axioms"
        }
        Command::Condition {
            target,
            condition,
            count,
            range,
        } => {
            target.apply(&mut cfg)?;
            condition.apply(&mut cfg);
            range.apply(&mut cfg)?;
            set(&mut cfg.sampling.count, count);
            "condition"
        }
        Command::Solve {
            target,
            x0,
            eps_stop,
            max_iter,
            certified_q,
        } => {
            target.apply(&mut cfg)?;
            set_opt(&mut cfg.solver.x0, x0);
            set(&mut cfg.solver.eps_stop, eps_stop);
            set(&mut cfg.solver.max_iter, max_iter);
            set_opt(&mut cfg.solver.certified_q, certified_q);
            "solve"
        }
        Command::Gauge {
            gauge,
            grid,
            n_max,
            thresh,
        } => {
            set_opt(&mut cfg.gauge.name, gauge);
            set(&mut cfg.gauge.grid, grid);
            set(&mut cfg.gauge.n_max, n_max);
            set(&mut cfg.gauge.thresh, thresh);
            "gauge"
        }
        Command::Oracle {
            target,
            condition,
            theorem,
            scope,
            base,
            cap,
        } => {
            target.apply(&mut cfg)?;
            condition.apply(&mut cfg);
            set_opt(&mut cfg.oracle.theorem, theorem);
            set(&mut cfg.oracle.scope, scope);
            set(&mut cfg.oracle.base, base);
            set(&mut cfg.oracle.cap, cap);
            "oracle"
        }
        Command::Violate {
            target,
            condition,
            q_grid,
            resolution,
            bisection_steps,
            range,
        } => {
            target.apply(&mut cfg)?;
            condition.apply(&mut cfg);
            range.apply(&mut cfg)?;
            set(&mut cfg.violate.q_grid, q_grid);
            set(&mut cfg.violate.resolution, resolution);
            set(&mut cfg.violate.bisection_steps, bisection_steps);
            "violate"
        }
    };
    Ok((name, cfg))
}

fn dispatch(name: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match name {
        "axioms" => commands::axioms(cfg),
        "condition" => commands::condition(cfg),
        "solve" => commands::solve(cfg),
        "gauge" => commands::gauge(cfg),
        "oracle" => commands::oracle(cfg),
        "violate" => commands::violate(cfg),
        other => Err(CliError::Usage(format!("unknown command {other}"))),
    }
}

/// Parse, run, write artifacts and print; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = resolve(cli).and_then(|(name, cfg)| {
        let outcome = dispatch(name, &cfg)?;
        for a in &outcome.artifacts {
            a.write()?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for line in &outcome.lines {
                let _ = writeln!(out, "{line}");
            }
            for a in &outcome.artifacts {
                let _ = writeln!(out, "wrote {}", a.path.display());
            }
            let _ = writeln!(
                out,
                "status: {} (exit {})",
                outcome.status, outcome.exit_code
            );
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("gfix: error: {e}");
            EXIT_USAGE
        }
    }
}
