//! Weak and strong scaling runs of a scenario.

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};
use crate::parallel::{StdClock, Threaded};
use crate::scenario::{build_scenario, build_tiled};
use psmflow_core::partition::Simulation;
use psmflow_core::perf::{scaling_harness, weak_block_grid, Clock, RunSample, ScalingMode, ScalingReport};
use std::io::Write;

/// Block grid and simulation for `workers` workers. Weak mode tiles the
/// scenario once per block; strong mode splits the fixed domain.
pub fn scaled_simulation(cfg: &ScenarioConfig, mode: ScalingMode, workers: usize) -> SimResult<Simulation> {
    let grid = weak_block_grid(workers)?;
    let scenario = match mode {
        ScalingMode::Weak => build_tiled(cfg, grid)?,
        ScalingMode::Strong => {
            let mut c = cfg.clone();
            c.domain.blocks = grid;
            c.domain.workers = workers;
            build_scenario(&c)?
        }
    };
    Ok(Simulation::new(scenario.setup)?)
}

/// Time `steps` fluid steps after one warm-up step, `reps` times per worker
/// count, keeping the fastest repetition.
pub fn run_scaling(
    cfg: &ScenarioConfig,
    mode: ScalingMode,
    worker_counts: &[usize],
    reps: usize,
    steps: u64,
    log: &mut dyn Write,
) -> SimResult<ScalingReport> {
    if steps == 0 {
        return Err(SimError::config("scaling runs need at least one timed step"));
    }
    let report = scaling_harness(mode, worker_counts, reps, |workers, rep| {
        let mut sim = scaled_simulation(cfg, mode, workers).map_err(|e| match e {
            SimError::Core(c) => c,
            other => psmflow_core::Error::Config(other.to_string()),
        })?;
        let mut exec = Threaded::new(workers);
        let clock = StdClock::new();
        sim.run(1, &mut exec, &clock)?;
        sim.reset_times();
        let t0 = clock.now_ns();
        sim.run(steps, &mut exec, &clock)?;
        let wall = clock.now_ns() - t0;
        let seconds = wall as f64 * 1e-9;
        let _ = writeln!(log, "workers {workers} rep {rep}: {seconds:.3} s");
        Ok(RunSample {
            cells: sim.cells(),
            steps,
            seconds,
            timing: sim.timing_report(wall, steps),
        })
    })?;
    Ok(report)
}
