use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use frontier_core::analysis::{self, DEFAULT_DEPTH};
use frontier_core::linear;
use frontier_core::method::MethodRegistry;
use frontier_core::oracle::{self, GridSpec, DEFAULT_CAP, DEFAULT_REFINEMENT};
use frontier_core::rational::{self, Rational};
use frontier_core::{solve, Error, Result};
use num_traits::Signed;
use serde::Serialize;

use crate::input::{self, Loaded};
use crate::report::{
    self, AnalyzeReport, DominanceReport, Format, MethodEntry, MethodsReport, NestedReport, OracleReport, PlanReport,
    SolveReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "frontier", version, about = "Greedy max-min frontiers of resource-sharing topologies")]
pub struct Cli {
    /// Render numbers as (lossy) decimals instead of exact p/q strings.
    #[arg(long, global = true)]
    pub float: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute F(t) and its stage decomposition.
    Solve {
        instance: PathBuf,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        t: Rational,
        /// One of the registered methods (see `frontier methods`).
        #[arg(long, default_value = "stage")]
        method: String,
    },
    /// Sample F over a grid and print CSV.
    Trajectory {
        instance: PathBuf,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Sample F and report partitions, jumps, monotonicity and Lipschitz estimates.
    Analyze {
        instance: PathBuf,
        #[command(flatten)]
        range: RangeArgs,
        /// Pairs whose gap exceeds threshold * dt are bisected (default: 10 * max/min slope).
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        gap_threshold: Option<Rational>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Check F(t) against a brute-force lattice search.
    Oracle {
        instance: PathBuf,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        t: Rational,
        #[arg(long, value_parser = parse_rational, default_value = "1/8")]
        step: Rational,
        /// Lattice lower bound (default: the smallest zero end).
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        lower: Option<Rational>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
        /// The greedy search runs on step / 2^refinement.
        #[arg(long, default_value_t = DEFAULT_REFINEMENT)]
        refinement: u32,
        /// Test this comma-separated vector instead of the solver output.
        #[arg(long, allow_hyphen_values = true)]
        check_vector: Option<String>,
    },
    /// Closed-form stage plan for single-kink costs.
    LinearPlan {
        instance: PathBuf,
        /// Use the first piece of every cost instead of requiring single-kink costs.
        #[arg(long)]
        germ: bool,
    },
    /// List the registered frontier methods.
    Methods,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// Defaults to t0.
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub t_start: Option<Rational>,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true, required_unless_present = "t_list")]
    pub t_end: Option<Rational>,
    /// Uniform steps; without it the grid has 256 points plus the germ-plan breakpoints.
    #[arg(long, conflicts_with = "t_list")]
    pub steps: Option<usize>,
    /// Explicit comma-separated times.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["t_start", "t_end", "steps"])]
    pub t_list: Option<String>,
    /// Extra comma-separated times merged into the grid.
    #[arg(long, allow_hyphen_values = true)]
    pub extra: Option<String>,
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(rational::parse).collect()
}

/// Canonical-time grid.
fn build_grid(inst: &Loaded, range: &RangeArgs) -> Result<Vec<Rational>> {
    let mut grid = if let Some(list) = &range.t_list {
        parse_list(list)?
    } else {
        let start = range.t_start.clone().unwrap_or_else(|| inst.t0().clone());
        let end = range.t_end.clone().expect("clap requires --t-end without --t-list");
        let (s, e) = (inst.to_canonical_time(&start)?, inst.to_canonical_time(&end)?);
        match range.steps {
            Some(n) => analysis::uniform_grid(&s, &e, n)?,
            None => analysis::default_grid(&inst.canonical, &s, &e)?,
        }
        .into_iter()
        .map(|x| inst.to_original_time(&x))
        .collect()
    };
    if let Some(extra) = &range.extra {
        grid.extend(parse_list(extra)?);
    }
    grid.sort();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    grid.iter().map(|t| inst.to_canonical_time(t)).collect()
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let fmt = Format { float: cli.float };
    let ok = |stdout: String| Ok(Outcome { code: EXIT_OK, stdout });
    match &cli.command {
        Command::Solve { instance, t, method } => {
            let inst = input::load(instance)?;
            let s = inst.to_canonical_time(t)?;
            if method == "stage" {
                let value = solve(&inst.canonical, &s)?;
                let r = SolveReport::new(fmt, &inst, method, true, t, value.values())
                    .with_decomposition(fmt, &inst, &value);
                return ok(json(&r));
            }
            let m = MethodRegistry::with_builtins().get(method)?;
            let values = m.frontier(&inst.canonical, &s)?;
            ok(json(&SolveReport::new(fmt, &inst, method, m.exact(), t, &values)))
        }
        Command::Trajectory { instance, range } => {
            let inst = input::load(instance)?;
            let grid = build_grid(&inst, range)?;
            let traj = analysis::sample_trajectory(&inst.canonical, &grid)?;
            let ids = analysis::partition_ids(&traj);
            ok(report::trajectory_csv(fmt, &inst, traj.samples(), &ids))
        }
        Command::Analyze { instance, range, gap_threshold, depth } => {
            let inst = input::load(instance)?;
            let grid = build_grid(&inst, range)?;
            let threshold = gap_threshold.clone().unwrap_or_else(|| analysis::default_threshold(&inst.canonical));
            let r = analysis::analyze(&inst.canonical, &grid, &threshold, *depth)?;
            let code = if r.has_findings() { EXIT_FINDINGS } else { EXIT_OK };
            Ok(Outcome { code, stdout: json(&AnalyzeReport::new(fmt, &inst, &r, &threshold, *depth)) })
        }
        Command::Oracle { instance, t, step, lower, cap, refinement, check_vector } => {
            let inst = input::load(instance)?;
            let s = inst.to_canonical_time(t)?;
            let mut grid = GridSpec::new(step.clone()).with_cap(*cap).with_refinement(*refinement);
            if let Some(l) = lower {
                grid = grid.with_lower(l - inst.t0());
            }
            let exact = solve(&inst.canonical, &s)?;
            let (source, candidate) = match check_vector {
                Some(v) => {
                    let v = parse_list(v)?;
                    ("check-vector", inst.offset.from_original(&v))
                }
                None => ("solver", exact.values().to_vec()),
            };
            let verdict = oracle::dominance_check(&inst.canonical, &s, &grid, &candidate)?;
            let nested = oracle::nested_maxmin_grid(&inst.canonical, &s, &grid)?;
            let max_gap =
                nested.iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).max().expect("instances have routes");
            let within_step = &max_gap <= step;
            let lower_used = grid
                .lower
                .clone()
                .unwrap_or_else(|| inst.canonical.zero_ends().into_iter().min().expect("instances have routes"));
            let r = OracleReport {
                schema_version: report::SCHEMA_VERSION,
                command: "oracle",
                t: fmt.num(t),
                step: fmt.num(step),
                lower: fmt.num(&(lower_used + inst.t0())),
                cap: cap.to_string(),
                refinement: *refinement,
                candidate_source: source,
                candidate: fmt.nums(&inst.to_original(&candidate)),
                dominance: DominanceReport::new(fmt, &inst, &verdict),
                nested: NestedReport {
                    values: fmt.nums(&inst.to_original(&nested)),
                    solver: fmt.nums(&inst.to_original(exact.values())),
                    max_gap: fmt.num(&max_gap),
                    within_step,
                },
            };
            let code = if verdict.holds && within_step { EXIT_OK } else { EXIT_FINDINGS };
            Ok(Outcome { code, stdout: json(&r) })
        }
        Command::LinearPlan { instance, germ } => {
            let inst = input::load(instance)?;
            let plan =
                if *germ { linear::analyze_germ(&inst.canonical)? } else { linear::analyze_linear(&inst.canonical)? };
            ok(json(&PlanReport::new(fmt, &inst, &plan, *germ)))
        }
        Command::Methods => {
            let methods = MethodRegistry::with_builtins()
                .iter()
                .map(|m| MethodEntry { name: m.name().into(), description: m.description().into(), exact: m.exact() })
                .collect();
            ok(json(&MethodsReport { schema_version: report::SCHEMA_VERSION, command: "methods", methods }))
        }
    }
}

/// Parses arguments, runs the command, prints its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::LatticeTooLarge { size, .. } = e {
                eprintln!("lattice size estimate: {size}");
            }
            EXIT_INPUT
        }
    }
}
