//! `sensact`: command-line front end for sensor/actuator selection
//! experiments.
//!
//! Exit codes: 0 on success, 2 on input errors (bad flags, malformed or
//! inconsistent files), 3 when a solver or enumeration cap is exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sensact::cascade::{AsenProblem, DEFAULT_ASEN_GAMMA, DEFAULT_INFLUENCE, DEFAULT_ROLLOUTS};
use sensact::experiment::{
    asen_instance, evaluate_instance, instance_to_string, load_config, load_instance, run,
    save_instance, select_instance, write_report_csv, AsenSweepParams, Experiment, ExperimentConfig,
    Instance, Method, NetworkModel, RunReport,
};
use sensact::instances::{
    example1_mdp, example2_mdp, example3_instance, example4_instance, random_fmdp_as_instance,
    random_fmdp_ss_instance, setcover_to_fmdp_as, setcover_to_fmdp_ss, GapParams, RandomAsParams,
    RandomSsParams,
};
use sensact::pomdp::SolverOptions;

#[derive(Parser)]
#[command(name = "sensact", version, about = "Design-time sensor and actuator selection for factored MDPs")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SolverFlags {
    /// Value-iteration stopping tolerance.
    #[arg(long)]
    eta: Option<f64>,
    /// Relative alpha-vector pruning margin.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on alpha vectors per stage; exceeding it exits with status 3.
    #[arg(long)]
    max_vectors: Option<usize>,
    /// Cap on value-iteration stages; exceeding it exits with status 3.
    #[arg(long)]
    max_stages: Option<usize>,
}

impl SolverFlags {
    fn apply(&self, mut opts: SolverOptions) -> SolverOptions {
        if let Some(eta) = self.eta {
            opts.eta = eta;
        }
        if let Some(tol) = self.tol {
            opts.prune_tol = tol;
        }
        if let Some(cap) = self.max_vectors {
            opts.max_vectors = cap;
        }
        if let Some(cap) = self.max_stages {
            opts.max_stages = cap;
        }
        opts
    }

    fn is_set(&self) -> bool {
        self.eta.is_some()
            || self.tol.is_some()
            || self.max_vectors.is_some()
            || self.max_stages.is_some()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal value of one instance with a fixed sensor/actuator subset.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated subset, e.g. `0,2` (default: empty).
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one selection method on one instance and print its report.
    Select {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "greedy")]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also write the greedy trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the sensor or actuator selection instance for a set-cover file.
    Reduce {
        #[arg(long)]
        setcover: PathBuf,
        #[arg(long, value_enum, default_value_t = Variant::Sensor)]
        variant: Variant,
        #[arg(long, default_value_t = 2.0)]
        c_exp: f64,
        #[arg(long, default_value_t = 1.0)]
        reward: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ASEN islanding sweeps (defaults to the standard ER/BA grid).
    Cascade {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of derived instance seeds per sweep point.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        rollouts: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment configuration or a named preset.
    Sweep {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// lemma-check, prop-gap, reduction-audit, random-ss, random-as or asen-sweep.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated instance file.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Node count for `er`/`ba` networks.
        #[arg(long, default_value_t = 30)]
        nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        p_edge: f64,
        /// Budget for `er`/`ba` problems.
        #[arg(long, default_value_t = 5)]
        budget: usize,
        /// Initially faulty nodes for `er`/`ba` problems.
        #[arg(long, default_value_t = 5)]
        faulty: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Sensor,
    Actuator,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenerateKind {
    Example1,
    Example2,
    Example3,
    Example4,
    RandomSs,
    RandomAs,
    Er,
    Ba,
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn finish_report(report: &RunReport, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => write_report_csv(report, path)?,
        None => report.write_csv(std::io::stdout().lock())?,
    }
    eprintln!("{}", serde_json::to_string_pretty(&report.summary)?);
    Ok(())
}

fn run_config(mut cfg: ExperimentConfig, seed: Option<u64>, instances: Option<usize>, out: Option<PathBuf>) -> anyhow::Result<()> {
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.seeds.clear();
    }
    if let Some(n) = instances {
        cfg.instances = n;
        cfg.seeds.clear();
    }
    let out = out.or_else(|| cfg.output.take());
    let report = run(&cfg)?;
    finish_report(&report, out.as_deref())
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(sensact::Error::input("--jobs must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Solve {
            instance,
            subset,
            solver,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let value = evaluate_instance(&inst, &subset, &solver.apply(SolverOptions::default()))?;
            let body = serde_json::json!({ "subset": subset, "value": value });
            write_output(out.as_deref(), &json(&body)?)
        }
        Command::Select {
            instance,
            method,
            seed,
            solver,
            trace,
            out,
        } => {
            let method: Method = method.parse()?;
            let inst = load_instance(&instance)?;
            let report = select_instance(&inst, method, &solver.apply(SolverOptions::default()), seed)?;
            if let Some(path) = trace {
                report.write_trace_csv(fs::File::create(&path)?)?;
            }
            write_output(out.as_deref(), &json(&report)?)
        }
        Command::Reduce {
            setcover,
            variant,
            c_exp,
            reward,
            gamma,
            out,
        } => {
            let sc = match load_instance(&setcover)? {
                Instance::SetCover(sc) => sc,
                _ => return Err(sensact::Error::input(format!("{} is not a set-cover instance", setcover.display())).into()),
            };
            let inst = match variant {
                Variant::Sensor => Instance::SensorReduction(setcover_to_fmdp_ss(&sc, c_exp, reward, gamma)?),
                Variant::Actuator => Instance::ActuatorReduction(setcover_to_fmdp_as(&sc, c_exp, reward, gamma)?),
            };
            emit_instance(&inst, out.as_deref())
        }
        Command::Cascade {
            config,
            seed,
            instances,
            rollouts,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => load_config(&path)?,
                None => ExperimentConfig::new(Experiment::AsenSweep(AsenSweepParams::default())),
            };
            match &mut cfg.experiment {
                Experiment::AsenSweep(p) => {
                    if let Some(r) = rollouts {
                        p.rollouts = r;
                    }
                }
                other => bail!(sensact::Error::input(format!(
                    "cascade runs asen-sweep configurations, got {}",
                    other.name()
                ))),
            }
            run_config(cfg, seed, instances, out)
        }
        Command::Sweep {
            config,
            preset,
            seed,
            instances,
            solver,
            out,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => load_config(&path)?,
                (None, Some(kind)) => ExperimentConfig::preset(&kind)?,
                (None, None) => {
                    return Err(sensact::Error::input("sweep needs --config or --preset").into())
                }
            };
            if solver.is_set() {
                let base = cfg.solver.unwrap_or_default();
                cfg.solver = Some(solver.apply(base));
            }
            run_config(cfg, seed, instances, out)
        }
        Command::Generate {
            kind,
            seed,
            nodes,
            p_edge,
            budget,
            faulty,
            out,
        } => {
            let inst = match kind {
                GenerateKind::Example1 => Instance::Sensor(example1_mdp(1.0, 0.1, 0.9)?),
                GenerateKind::Example2 => Instance::Actuator(example2_mdp(1.0, 0.1, 0.9)?),
                GenerateKind::Example3 => Instance::Sensor(example3_instance(&GapParams::new(1.0, 0.5, 2.0, 0.01, 0.9))?),
                GenerateKind::Example4 => Instance::Actuator(example4_instance(&GapParams::new(1.0, 0.5, 2.0, 0.01, 0.9))?),
                GenerateKind::RandomSs => Instance::Sensor(random_fmdp_ss_instance(seed, &RandomSsParams::default())?),
                GenerateKind::RandomAs => Instance::Actuator(random_fmdp_as_instance(seed, &RandomAsParams::default())?),
                GenerateKind::Er | GenerateKind::Ba => {
                    let model = match kind {
                        GenerateKind::Er => NetworkModel::Er { p_edge },
                        _ => NetworkModel::Ba,
                    };
                    let params = AsenSweepParams {
                        sweeps: Vec::new(),
                        rollouts: DEFAULT_ROLLOUTS,
                        gamma: DEFAULT_ASEN_GAMMA,
                        influence: DEFAULT_INFLUENCE,
                        ..AsenSweepParams::default()
                    };
                    let problem: AsenProblem = asen_instance(&model, nodes, faulty, budget, &params, seed)?;
                    Instance::Asen(problem)
                }
            };
            emit_instance(&inst, out.as_deref())
        }
    }
}

fn emit_instance(inst: &Instance, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => Ok(save_instance(inst, path)?),
        None => {
            let mut text = instance_to_string(inst)?;
            text.push('\n');
            write_output(None, &text)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<sensact::Error>() {
        Some(e) if e.is_capacity() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
