use clap::{Parser, Subcommand, ValueEnum};
use psmflow::config::{ScenarioConfig, ScenarioKind};
use psmflow::error::{SimError, SimResult};
use psmflow::runner::run_config;
use psmflow::scaling::run_scaling;
use psmflow::scenario::build_scenario;
use psmflow_core::partition::Simulation;
use psmflow::validate::{self, Case};

use psmflow_core::perf::{
    hybrid_speedup, measured_speedup, parallel_efficiency, roofline_tmin, MachineModel, ScalingMode,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "psmflow", version, about = "Block-parallel coupled lattice Boltzmann / DEM simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Weak,
    Strong,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario.
    Run {
        /// Preset name or path to a TOML file.
        config: String,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of fluid steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Override the number of worker threads.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the fully resolved configuration of a preset or file.
    Config {
        /// Preset name or path to a TOML file.
        source: String,
    },
    /// Run a validation case and compare with its analytic reference.
    Validate {
        #[arg(value_enum)]
        case: Case,
        /// Scenario file replacing the preset of the poiseuille or settling case.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Per-block halo and particle communication volume of a scenario's
    /// initial state.
    Comm {
        /// Preset name or path to a TOML file.
        config: String,
        /// Block grid overriding `domain.blocks`, e.g. 4,4,4.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
    },
    /// Weak or strong scaling of a scenario.
    Scale {
        /// Preset name or path to a TOML file.
        config: String,
        #[arg(long, value_enum, default_value = "weak")]
        mode: Mode,
        /// Comma-separated worker counts, starting with 1.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Timed fluid steps per repetition.
        #[arg(long, default_value_t = 5)]
        steps: u64,
    },
    /// Evaluate the analytic performance models.
    PerfModel {
        /// Bandwidth-bound minimum time per step.
        #[arg(long)]
        tmin: bool,
        /// Hybrid speedup estimate from the accelerated fraction.
        #[arg(long)]
        speedup: bool,
        /// Measured speedup from two MLUPs figures: slow,fast.
        #[arg(long, value_delimiter = ',')]
        measured: Option<Vec<f64>>,
        /// Parallel efficiency of MLUPs per worker: baseline,value[,value...].
        #[arg(long, value_delimiter = ',')]
        efficiency: Option<Vec<f64>>,
        #[arg(long, default_value_t = 304.0)]
        bytes: f64,
        #[arg(long, default_value_t = 8e7)]
        cells: f64,
        /// Fast memory bandwidth in GB/s.
        #[arg(long, default_value_t = 1400.0)]
        bw_fast: f64,
        /// Slow memory bandwidth in GB/s.
        #[arg(long, default_value_t = 70.0)]
        bw_slow: f64,
        /// Fraction of the run time spent in the accelerated part.
        #[arg(long, default_value_t = 0.95)]
        frac_acc: f64,
    },
}

fn load_source(source: &str) -> SimResult<ScenarioConfig> {
    match ScenarioKind::ALL.iter().find(|k| k.name() == source) {
        Some(&k) => Ok(ScenarioConfig::preset(k)),
        None => ScenarioConfig::load(std::path::Path::new(source)),
    }
}

fn run(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            steps,
            workers,
        } => {
            let mut cfg = load_source(&config)?;
            if let Some(s) = steps {
                cfg.steps = s;
            }
            if let Some(w) = workers {
                cfg.domain.workers = w;
            }
            cfg.validate()?;
            let summary = run_config(&cfg, out.as_deref(), &mut std::io::stderr())?;
            println!("steps\t{}\nseconds\t{:.3}\nMLUPs\t{:.3}", summary.steps, summary.seconds, summary.mlups);
            print!("{}", summary.timing.to_table());
            Ok(())
        }
        Command::Config { source } => {
            print!("{}", load_source(&source)?.to_toml_string());
            Ok(())
        }
        Command::Validate { case, config } => {
            let cfg = config.as_deref().map(ScenarioConfig::load).transpose()?;
            let report = validate::run_case(case, cfg, &mut std::io::stderr())?;
            println!("{report}");
            if report.pass {
                Ok(())
            } else {
                Err(SimError::Validation(report.name.to_string()))
            }
        }
        Command::Comm { config, blocks } => {
            let mut cfg = load_source(&config)?;
            if let Some(b) = blocks {
                if b.len() != 3 {
                    return Err(SimError::config("--blocks takes three values: bx,by,bz"));
                }
                cfg.domain.blocks = [b[0], b[1], b[2]];
                cfg.validate()?;
            }
            let sim = Simulation::new(build_scenario(&cfg)?.setup)?;
            print!("{}", sim.comm_report().to_table());
            println!("particle exchanges per step\t{}", sim.phases.iter().filter(|p| p.exchanges_particles()).count());
            Ok(())
        }
        Command::Scale {
            config,
            mode,
            workers,
            reps,
            steps,
        } => {
            let cfg = load_source(&config)?;
            let mode = match mode {
                Mode::Weak => ScalingMode::Weak,
                Mode::Strong => ScalingMode::Strong,
            };
            let report = run_scaling(&cfg, mode, &workers, reps, steps, &mut std::io::stderr())?;
            print!("{}", report.to_table());
            Ok(())
        }
        Command::PerfModel {
            tmin,
            speedup,
            measured,
            efficiency,
            bytes,
            cells,
            bw_fast,
            bw_slow,
            frac_acc,
        } => {
            if !(tmin || speedup || measured.is_some() || efficiency.is_some()) {
                return Err(SimError::config(
                    "perf-model needs at least one of --tmin, --speedup, --measured, --efficiency",
                ));
            }
            if tmin {
                let model = MachineModel::new(bw_fast, bw_slow, bytes)?;
                println!("T_min = {:.1} ms/time step", roofline_tmin(&model, cells));
            }
            if speedup {
                println!("S_hyb = {:.1}", hybrid_speedup(frac_acc, bw_slow, bw_fast)?);
            }
            if let Some(m) = measured {
                if m.len() != 2 {
                    return Err(SimError::config("--measured takes exactly two values: slow,fast"));
                }
                println!("measured speedup = {:.1}", measured_speedup(m[1], m[0])?);
            }
            if let Some(e) = efficiency {
                let series: Vec<(usize, f64)> = e.iter().enumerate().map(|(i, v)| (i + 1, *v)).collect();
                let eff = parallel_efficiency(&series)?;
                let cols: Vec<String> = eff.iter().map(|v| format!("{:.1}%", 100.0 * v)).collect();
                println!("efficiency = {}", cols.join(" "));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
