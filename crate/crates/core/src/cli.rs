//! Experiment harness behind the `swarm-ot` binary.
//!
//! Every subcommand is deterministic: the same flags produce byte-identical
//! CSV files and stdout.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::{self, AdmmConfig, ConvergenceReport};
use crate::dynamic::{dynamic_loop, extract_assignment, DynamicConfig, DynamicState};
use crate::error::{Error, Result};
use crate::experiments::{
    compare_random, random_integer_problem, summarize, Comparison, UpdateProtocol,
};
use crate::fixtures;
use crate::model::{aggregate_utility, Assignment, Problem};
use crate::oracle::{brute_force_optimal, ENUMERATION_LIMIT};
use crate::sim::{run_mission, Allocator, RandomScenario, Scenario, SimConfig};

#[derive(Debug, Parser)]
#[command(
    name = "swarm-ot",
    version,
    about = "Dynamic distributed optimal transport for swarm waypoint allocation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the embedded 3-agent / 10-waypoint case study.
    CaseStudy(CaseStudyArgs),
    /// Solve a seeded random instance and check it against enumeration.
    Converge(ConvergeArgs),
    /// Replay periodic network/parameter updates on the case study.
    Dynamic(DynamicArgs),
    /// Fly one mission with one allocator.
    Sim(SimArgs),
    /// Fly both allocators on a scenario file or a batch of random scenarios.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverArgs {
    /// ADMM penalty (convergence factor).
    #[arg(long, default_value_t = 10.0)]
    pub eta: f64,
    /// Threshold on primal residual and iterate drift.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Iteration budget (per epoch for the dynamic and mission runs).
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl SolverArgs {
    fn config(&self, default_budget: usize) -> AdmmConfig {
        AdmmConfig {
            eta: self.eta,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations.unwrap_or(default_budget),
        }
    }
}

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Per-iteration trace CSV.
    #[arg(long, default_value = "case_study_trace.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub agents: usize,
    #[arg(long, default_value_t = 10)]
    pub waypoints: usize,
    #[arg(long, default_value = "converge_trace.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DynamicArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Seed for the replacement rates.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Solver iterations between updates.
    #[arg(long, default_value_t = 250)]
    pub interval: usize,
    /// Number of updates; defaults to the most the network can absorb.
    #[arg(long)]
    pub updates: Option<usize>,
    /// Per-epoch CSV.
    #[arg(long, default_value = "dynamic_epochs.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AllocatorArg {
    Greedy,
    Ot,
}

impl From<AllocatorArg> for Allocator {
    fn from(a: AllocatorArg) -> Self {
        match a {
            AllocatorArg::Greedy => Allocator::Greedy,
            AllocatorArg::Ot => Allocator::DynamicOt,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Scenario JSON; a random scenario from `--seed` when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = AllocatorArg::Ot)]
    pub allocator: AllocatorArg,
    /// Visit log CSV.
    #[arg(long, default_value = "sim_visits.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(
        long,
        conflicts_with = "random_scenarios",
        required_unless_present = "random_scenarios"
    )]
    pub scenario: Option<PathBuf>,
    /// Number of seeded random scenarios (seeds `seed..seed + N`).
    #[arg(long)]
    pub random_scenarios: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "compare.csv")]
    pub out: PathBuf,
}

/// Runs one parsed command, writing the human summary to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::CaseStudy(args) => case_study(args, stdout),
        Command::Converge(args) => converge(args, stdout),
        Command::Dynamic(args) => dynamic(args, stdout),
        Command::Sim(args) => sim(args, stdout),
        Command::Compare(args) => compare(args, stdout),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn write_trace(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iteration", "aggregate_utility", "primal_residual"])?;
    for (i, (u, r)) in report
        .utility_trace
        .iter()
        .zip(&report.residual_trace)
        .enumerate()
    {
        w.write_record([(i + 1).to_string(), u.to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Solves statically and extracts; on budget exhaustion the partial trace is
/// still written before the error is returned.
fn solve_with_trace(
    problem: &Problem,
    config: &AdmmConfig,
    out: &Path,
) -> Result<(Assignment, ConvergenceReport)> {
    match admm::run_until_converged(problem, config) {
        Ok((state, report)) => {
            write_trace(out, &report)?;
            let assignment = extract_assignment(&state, &problem.topology, config.epsilon)?;
            Ok((assignment, report))
        }
        Err(Error::MaxIterationsExceeded(boxed)) => {
            write_trace(out, &boxed.1)?;
            Err(Error::MaxIterationsExceeded(boxed))
        }
        Err(e) => Err(e),
    }
}

fn case_study(args: &CaseStudyArgs, stdout: &mut dyn Write) -> Result<()> {
    let problem = fixtures::case_study();
    let config = args.solver.config(AdmmConfig::default().max_iterations);
    let (assignment, report) = solve_with_trace(&problem, &config, &args.out)?;
    let utility = aggregate_utility(&assignment, &problem.params);
    writeln!(stdout, "assignment {assignment}")?;
    writeln!(stdout, "utility {utility}")?;
    writeln!(stdout, "iterations {}", report.iterations)?;
    writeln!(stdout, "primal_residual {:e}", report.primal_residual)?;
    let expected = fixtures::case_study_assignment();
    if assignment != expected {
        return Err(Error::GoldenMismatch {
            expected: expected.to_string(),
            actual: assignment.to_string(),
        });
    }
    Ok(())
}

fn converge(args: &ConvergeArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let problem = random_integer_problem(&mut rng, args.agents, args.waypoints)?;
    let config = args.solver.config(AdmmConfig::default().max_iterations);
    let (assignment, report) = solve_with_trace(&problem, &config, &args.out)?;
    let utility = aggregate_utility(&assignment, &problem.params);
    writeln!(stdout, "assignment {assignment}")?;
    writeln!(stdout, "utility {utility}")?;
    writeln!(stdout, "iterations {}", report.iterations)?;
    if args.agents <= ENUMERATION_LIMIT {
        let (_, best) = brute_force_optimal(&problem.topology, &problem.params)?;
        writeln!(stdout, "optimum {best}")?;
        if utility != best {
            return Err(Error::GoldenMismatch {
                expected: best.to_string(),
                actual: utility.to_string(),
            });
        }
    }
    Ok(())
}

fn dynamic(args: &DynamicArgs, stdout: &mut dyn Write) -> Result<()> {
    let problem = fixtures::case_study();
    let updates = args
        .updates
        .unwrap_or_else(|| UpdateProtocol::max_updates(&problem));
    let config = DynamicConfig {
        admm: args
            .solver
            .config(DynamicConfig::default().admm.max_iterations),
        ..DynamicConfig::default()
    };
    if args.interval == 0 {
        return Err(Error::InvalidConfig("interval must be > 0".into()));
    }
    let mut protocol = UpdateProtocol::new(args.seed, args.interval, updates);
    let mut state = DynamicState::new(problem, config.admm.eta);
    let records = dynamic_loop(&mut state, &mut protocol, &config)?;

    let mut w = csv_writer(&args.out)?;
    w.write_record([
        "epoch",
        "iteration",
        "iterations",
        "primal_residual",
        "assignment",
        "utility",
        "optimum",
    ])?;
    let mut mismatch = None;
    for (record, settled) in records.iter().zip(&protocol.settled) {
        let utility = aggregate_utility(&record.assignment, &settled.problem.params);
        let (_, best) = brute_force_optimal(&settled.problem.topology, &settled.problem.params)?;
        if utility != best && mismatch.is_none() {
            mismatch = Some((best, utility));
        }
        w.write_record([
            record.epoch.to_string(),
            record.iteration.to_string(),
            record.report.iterations.to_string(),
            record.report.primal_residual.to_string(),
            record.assignment.to_string(),
            utility.to_string(),
            best.to_string(),
        ])?;
    }
    w.flush()?;

    let worst = records
        .iter()
        .map(|r| r.report.iterations)
        .max()
        .unwrap_or(0);
    writeln!(stdout, "epochs {}", records.len())?;
    writeln!(stdout, "updates {updates}")?;
    writeln!(stdout, "missed_updates {}", protocol.missed)?;
    writeln!(stdout, "max_epoch_iterations {worst}")?;
    if let Some((best, utility)) = mismatch {
        return Err(Error::GoldenMismatch {
            expected: best.to_string(),
            actual: utility.to_string(),
        });
    }
    Ok(())
}

fn sim_config(solver: &SolverArgs) -> SimConfig {
    let defaults = SimConfig::default();
    SimConfig {
        admm: solver.config(defaults.admm.max_iterations),
        ..defaults
    }
}

fn sim(args: &SimArgs, stdout: &mut dyn Write) -> Result<()> {
    let scenario = match &args.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::random(args.seed, &RandomScenario::default()),
    };
    let report = run_mission(&scenario, args.allocator.into(), &sim_config(&args.solver))?;
    let mut w = csv_writer(&args.out)?;
    w.write_record(["agent", "waypoint", "time", "reading"])?;
    for v in &report.visit_order {
        w.write_record([
            v.agent.to_string(),
            v.waypoint.to_string(),
            v.time.to_string(),
            report.readings[&v.waypoint].to_string(),
        ])?;
    }
    w.flush()?;
    writeln!(stdout, "allocator {}", report.allocator.name())?;
    for (agent, d) in report.per_agent_distance.iter().enumerate() {
        writeln!(stdout, "agent {} distance {d:.3}", agent + 1)?;
    }
    writeln!(stdout, "total {:.3}", report.total_distance)?;
    Ok(())
}

fn compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = sim_config(&args.solver);
    let mut w = csv_writer(&args.out)?;
    if let Some(path) = &args.scenario {
        let scenario = Scenario::load(path)?;
        let row = Comparison::run(&scenario, &config)?;
        w.write_record(["allocator", "agent", "distance"])?;
        for report in [&row.greedy, &row.ot] {
            for (agent, d) in report.per_agent_distance.iter().enumerate() {
                w.write_record([
                    report.allocator.name().to_string(),
                    (agent + 1).to_string(),
                    d.to_string(),
                ])?;
            }
            w.write_record([
                report.allocator.name(),
                "total",
                &report.total_distance.to_string(),
            ])?;
        }
        w.flush()?;
        writeln!(stdout, "greedy total {:.3}", row.greedy.total_distance)?;
        writeln!(stdout, "ot total {:.3}", row.ot.total_distance)?;
        writeln!(stdout, "ot_wins {}", row.ot_wins())?;
        return Ok(());
    }

    let count = args.random_scenarios.unwrap_or(0);
    let rows = compare_random(count, args.seed, &RandomScenario::default(), &config)?;
    w.write_record(["seed", "greedy", "ot", "ot_wins"])?;
    for row in &rows {
        w.write_record([
            row.seed.to_string(),
            row.greedy.total_distance.to_string(),
            row.ot.total_distance.to_string(),
            row.ot_wins().to_string(),
        ])?;
    }
    w.flush()?;
    let (greedy, ot, wins) = summarize(&rows);
    writeln!(stdout, "scenarios {}", rows.len())?;
    writeln!(stdout, "greedy mean {greedy:.3}")?;
    writeln!(stdout, "ot mean {ot:.3}")?;
    writeln!(stdout, "win_rate {wins:.2}")?;
    Ok(())
}
