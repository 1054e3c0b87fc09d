//! Running a configured scenario with output and timing.

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};
use crate::output::{dump_steps, step_scalars, write_grid, write_particles, SeriesWriter};
use crate::parallel::{StdClock, Threaded};
use crate::scenario::build_scenario;
use psmflow_core::partition::{Executor, Simulation};
use psmflow_core::perf::{mlups, Clock, TimingReport};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub seconds: f64,
    pub mlups: f64,
    pub timing: TimingReport,
    pub files: Vec<PathBuf>,
}

/// First 16 hex digits of the SHA-256 of the canonical configuration text.
pub fn scenario_hash(cfg: &ScenarioConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "--short", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

/// `key=value` lines describing a run.
pub fn run_info(cfg: &ScenarioConfig, summary: &RunSummary) -> String {
    format!(
        "scenario={}\nscenario_hash={}\nworkers={}\nblocks={}x{}x{}\ncells={}\nsteps={}\nseed={}\nseconds={:.6}\nmlups={:.4}\ngit_revision={}\n",
        cfg.kind.name(),
        scenario_hash(cfg),
        cfg.domain.workers,
        cfg.domain.blocks[0],
        cfg.domain.blocks[1],
        cfg.domain.blocks[2],
        cfg.domain.cells.iter().product::<usize>(),
        summary.steps,
        cfg.seed,
        summary.seconds,
        summary.mlups,
        git_revision(),
    )
}

fn write_text(path: &Path, text: &str) -> SimResult<PathBuf> {
    std::fs::write(path, text).map_err(|e| SimError::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Build, run and write outputs. Progress goes to `log`.
pub fn run_config(cfg: &ScenarioConfig, out_dir: Option<&Path>, log: &mut dyn Write) -> SimResult<RunSummary> {
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    std::fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    let scenario = build_scenario(cfg)?;
    let walls = scenario.setup.walls.clone();
    let mut sim = Simulation::new(scenario.setup)?;
    let mut exec = Threaded::new(cfg.domain.workers);
    let clock = StdClock::new();
    let mut files = vec![write_text(&dir.join("config.toml"), &cfg.to_toml_string())?];

    let dumps = dump_steps(cfg.steps, cfg.output.cadence);
    let mut series = if cfg.output.series { Some(SeriesWriter::create(&dir)?) } else { None };
    let dump = |sim: &Simulation, files: &mut Vec<PathBuf>| -> SimResult<()> {
        if cfg.output.grid {
            files.push(write_grid(sim, &dir, sim.steps_done)?);
        }
        if cfg.output.particles {
            files.push(write_particles(sim, &dir, sim.steps_done)?);
        }
        Ok(())
    };
    if dumps.first() == Some(&0) {
        dump(&sim, &mut files)?;
    }
    let mut compute_ns = 0u64;
    let report_every = (cfg.steps / 10).max(1);
    for step in 1..=cfg.steps {
        let t0 = clock.now_ns();
        sim.run(1, &mut exec as &mut dyn Executor, &clock)?;
        compute_ns += clock.now_ns() - t0;
        if let Some(s) = series.as_mut() {
            s.push(&step_scalars(&sim, &walls))?;
        }
        if dumps.binary_search(&step).is_ok() {
            dump(&sim, &mut files)?;
        }
        if step % report_every == 0 {
            let _ = writeln!(log, "step {step}/{} ({:.1} s)", cfg.steps, compute_ns as f64 * 1e-9);
        }
    }
    if let Some(s) = series {
        files.push(s.finish()?);
    }
    let seconds = compute_ns as f64 * 1e-9;
    let cells = sim.cells();
    let timing = sim.timing_report(compute_ns, cfg.steps);
    let rate = if cfg.steps > 0 { mlups(cells as f64, cfg.steps as f64, seconds)? } else { 0.0 };
    let mut summary = RunSummary {
        steps: cfg.steps,
        seconds,
        mlups: rate,
        timing,
        files,
    };
    let info = run_info(cfg, &summary);
    summary.files.push(write_text(&dir.join("run_info.txt"), &info)?);
    let table = summary.timing.to_table();
    summary.files.push(write_text(&dir.join("timing.txt"), &table)?);
    Ok(summary)
}
