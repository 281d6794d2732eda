//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bench;
use crate::error::{Error, Result};
use crate::pipeline::{Abstraction, Plan, Timings};
use crate::planner::{CounterexampleKind, PolicyCheck};
use crate::render::{render_svg, Axis, Trajectory};
use crate::runtime::{Disturbance, RunOutcome, Runtime, Start, TrajectoryLog};
use crate::scenario::{PrimitiveMode, Scenario};
use crate::workspace::FaceLabel;

/// Exit code for malformed input and usage errors.
pub const EXIT_INPUT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "hybridplan", version, about = "Reach-avoid planning with maneuver automata")]
pub struct Cli {
    /// Seed for random start states.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suppress informational output.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the abstraction, solve it and write a policy file.
    Plan {
        scenario: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Model-check a policy file against its scenario.
    Check { scenario: PathBuf, policy: PathBuf },
    /// Run the closed loop from given or random start states.
    Simulate(SimulateArgs),
    /// Draw a trajectory file as SVG.
    Render {
        trajectory: PathBuf,
        scenario: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Horizontal and vertical axis: output index within a vehicle, or `t`.
        #[arg(long, num_args = 2, value_names = ["I", "J"], default_values = ["0", "1"])]
        axes: Vec<String>,
    },
    /// Output transition system.
    Ots {
        #[command(subcommand)]
        action: DumpAction,
    },
    /// Composed maneuver automaton.
    Ma {
        #[command(subcommand)]
        action: DumpAction,
    },
    /// Product automaton.
    Pa {
        #[command(subcommand)]
        action: StatsAction,
    },
    /// Time the offline stages on obstacle-free grids.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ModeArg {
    /// Override the scenario's primitive mode.
    #[arg(long = "primitives", value_name = "ND|D")]
    pub primitives: Option<PrimitiveMode>,
}

#[derive(Debug, Subcommand)]
pub enum DumpAction {
    Dump {
        scenario: PathBuf,
        #[command(flatten)]
        mode: ModeArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum StatsAction {
    Stats {
        scenario: PathBuf,
        #[command(flatten)]
        mode: ModeArg,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    pub policy: PathBuf,
    /// Start positions, comma separated, one per output.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Option<Vec<f64>>,
    /// Start velocities (default zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "start")]
    pub velocity: Option<Vec<f64>>,
    /// Number of random start states.
    #[arg(long, conflicts_with = "start")]
    pub random_starts: Option<usize>,
    /// `t_start:t_end:output:accel`, repeatable.
    #[arg(long = "disturbance", allow_hyphen_values = true)]
    pub disturbances: Vec<Disturbance>,
    /// Simulation horizon in seconds.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub p_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    pub grid_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ND,D")]
    pub modes: Vec<PrimitiveMode>,
    /// Repetitions per configuration; the minimum time is reported.
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Per-configuration limit in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    /// Run configurations concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// Write the table here instead of stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnreachableGoal(_) => 2,
        Error::PolicyMismatch { .. } | Error::NumericFailure { .. } | Error::Stuck { .. } => 4,
        _ => EXIT_INPUT,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| {
        Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn with_mode(path: &Path, mode: &ModeArg) -> Result<Scenario> {
    let mut s = Scenario::from_path(path)?;
    if let Some(m) = mode.primitives {
        s.primitive_mode = m;
    }
    Ok(s)
}

pub fn run(cli: &Cli) -> Result<i32> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Plan { scenario, out: path, mode } => {
            let plan = Plan::build(Scenario::from_path(scenario)?, mode.primitives)?;
            plan.require_reachable()?;
            write(path, &plan.policy_json())?;
            if !cli.quiet {
                print_plan_stats(&mut out, &plan)?;
            }
            Ok(0)
        }
        Command::Check { scenario, policy } => {
            let plan = Plan::load(Scenario::from_path(scenario)?, &read(policy)?)?;
            match plan.check() {
                PolicyCheck::Certified(c) => {
                    if !cli.quiet {
                        writeln!(
                            out,
                            "certificate start_states={} reachable_states={} max_run_length={}",
                            c.start_states, c.reachable_states, c.max_run_length
                        )?;
                    }
                    Ok(0)
                }
                PolicyCheck::Counterexample(c) => {
                    let kind = match c.kind {
                        CounterexampleKind::Lasso => "lasso",
                        CounterexampleKind::DeadEnd => "dead-end",
                        CounterexampleKind::InvalidChoice => "invalid-choice",
                    };
                    writeln!(out, "counterexample kind={kind} at={}", plan.state_name(c.at))?;
                    let p = plan.pa.p();
                    for (state, label) in &c.prefix {
                        writeln!(out, "  {} --{}-->", plan.state_name(*state), FaceLabel::from_code(*label, p))?;
                    }
                    if !c.cycle.is_empty() {
                        writeln!(out, "  cycle:")?;
                        for (state, label) in &c.cycle {
                            writeln!(out, "  {} --{}-->", plan.state_name(*state), FaceLabel::from_code(*label, p))?;
                        }
                    }
                    Ok(1)
                }
            }
        }
        Command::Simulate(args) => simulate(cli, args, &mut out),
        Command::Render {
            trajectory,
            scenario,
            out: path,
            axes,
        } => {
            let scenario = Scenario::from_path(scenario)?;
            let traj = Trajectory::parse(&read(trajectory)?)?;
            let axes = (axes[0].parse::<Axis>()?, axes[1].parse::<Axis>()?);
            write(path, &render_svg(&scenario, &traj, axes)?)?;
            Ok(0)
        }
        Command::Ots {
            action: DumpAction::Dump { scenario, mode },
        } => {
            let s = with_mode(scenario, mode)?;
            crate::workspace::Ots::build(&s)?.dump(&mut out)?;
            Ok(0)
        }
        Command::Ma {
            action: DumpAction::Dump { scenario, mode },
        } => {
            let s = with_mode(scenario, mode)?;
            let mut t = Timings::default();
            Abstraction::build(&s, &mut t)?.ma.dump(&mut out)?;
            Ok(0)
        }
        Command::Pa {
            action: StatsAction::Stats { scenario, mode },
        } => {
            let s = with_mode(scenario, mode)?;
            let start = Instant::now();
            let mut t = Timings::default();
            let a = Abstraction::build(&s, &mut t)?;
            let elapsed = start.elapsed().as_secs_f64();
            let st = a.pa.stats();
            writeln!(out, "states={}", st.states)?;
            writeln!(out, "edges={}", st.edges)?;
            writeln!(out, "admissible={}", st.admissible)?;
            writeln!(out, "finals={}", st.finals)?;
            writeln!(out, "build_time_s={elapsed:.6}")?;
            Ok(0)
        }
        Command::Bench(args) => {
            let configs = bench::configurations(&args.p_list, &args.grid_list, &args.modes);
            let timeout = Duration::from_secs_f64(args.timeout);
            let records = bench::run(&configs, args.repeat, timeout, args.parallel)?;
            match &args.out {
                Some(path) => {
                    let mut buf = Vec::new();
                    bench::write_csv(&records, &mut buf)?;
                    write(path, &String::from_utf8(buf).expect("ascii"))?;
                }
                None => bench::write_csv(&records, &mut out)?,
            }
            Ok(0)
        }
    }
}

fn print_plan_stats(out: &mut impl Write, plan: &Plan) -> Result<()> {
    let st = plan.pa.stats();
    let t = &plan.timings;
    writeln!(out, "locations={}", plan.ots.location_count())?;
    writeln!(out, "primitives={}", plan.ma.primitive_count())?;
    writeln!(out, "pa_states={}", st.states)?;
    writeln!(out, "pa_edges={}", st.edges)?;
    writeln!(out, "admissible={}", st.admissible)?;
    writeln!(out, "finals={}", st.finals)?;
    writeln!(
        out,
        "t_ots={:.6} t_ma={:.6} t_pa={:.6} t_solve={:.6} t_total={:.6}",
        t.ots,
        t.ma,
        t.pa,
        t.solve,
        t.total()
    )?;
    Ok(())
}

fn simulate(cli: &Cli, args: &SimulateArgs, out: &mut impl Write) -> Result<i32> {
    let plan = Plan::load(Scenario::from_path(&args.scenario)?, &read(&args.policy)?)?;
    let rt = Runtime::new(&plan, &args.disturbances)?;
    let starts: Vec<Start> = match (&args.start, args.random_starts) {
        (Some(y), _) => {
            let v = args.velocity.clone().unwrap_or_else(|| vec![0.0; y.len()]);
            vec![Start {
                y: y.clone(),
                v,
                primitive: None,
            }]
        }
        (None, Some(k)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            (0..k)
                .map(|_| {
                    rt.random_start(&mut rng).ok_or_else(|| {
                        Error::UnreachableGoal("no location has a finite-value primitive".into())
                    })
                })
                .collect::<Result<_>>()?
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "give --start or --random-starts".into(),
            ))
        }
    };
    fs::create_dir_all(&args.out_dir)?;
    let logs: Vec<TrajectoryLog> = starts
        .par_iter()
        .map(|s| rt.run(s, args.t_max))
        .collect::<Result<_>>()?;
    for (k, log) in logs.iter().enumerate() {
        write(&args.out_dir.join(format!("run_{k:03}.csv")), &log.trajectory_csv())?;
        write(&args.out_dir.join(format!("run_{k:03}.events.jsonl")), &log.events_jsonl())?;
    }
    if !cli.quiet {
        writeln!(out, "run,outcome,t_reach,t_end,transitions,recoveries,violations")?;
        for (k, log) in logs.iter().enumerate() {
            let s = &log.summary;
            writeln!(
                out,
                "{k},{},{},{:.6},{},{},{}",
                serde_json::to_value(s.outcome).expect("serializes").as_str().unwrap_or(""),
                s.t_reach.map(|t| format!("{t:.6}")).unwrap_or_default(),
                s.t_end,
                s.transitions,
                s.recoveries,
                s.violations.len()
            )?;
        }
        let reached = logs.iter().filter(|l| l.summary.reached).count();
        writeln!(out, "reached {reached}/{}", logs.len())?;
    }
    for log in &logs {
        if let Some(msg) = &log.summary.message {
            eprintln!("warning: {msg}");
        }
    }
    Ok(aggregate_exit(logs.iter().map(|l| l.summary.outcome)))
}

/// Worst outcome over several runs: safety first, then failures, then misses.
pub fn aggregate_exit(outcomes: impl Iterator<Item = RunOutcome>) -> i32 {
    let codes: Vec<i32> = outcomes.map(|o| o.exit_code()).collect();
    [3, 4, 2]
        .into_iter()
        .find(|c| codes.contains(c))
        .unwrap_or(0)
}
