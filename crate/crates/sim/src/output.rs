//! Plain-text dumps and the scalar time series.
//!
//! Grid dump `grid_<step>.txt`:
//! ```text
//! # psmflow grid <nx> <ny> <nz> step <s>
//! # x y z rho ux uy uz B
//! 0 0 0 1.0000012 0.0001 0 0 0
//! ```
//! one line per cell, x fastest. Particle dump `particles_<step>.txt`:
//! ```text
//! # psmflow particles <count> step <s>
//! # id x y z ux uy uz ox oy oz r
//! ```
//! Steps are zero-padded to eight digits. `series.txt` holds one line per
//! step: `step mass px py pz fluid_ke particle_ke min_gap max_u`. Numbers
//! use the shortest text that reads back to the same value, so identical
//! runs give identical files.

use crate::error::{SimError, SimResult};
use psmflow_core::dem::contact::Wall;
use psmflow_core::partition::Simulation;
use psmflow_core::Vec3;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub fn grid_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("grid_{step:08}.txt"))
}

pub fn particles_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("particles_{step:08}.txt"))
}

fn create(path: &Path) -> SimResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| SimError::io(path, e))
}

pub fn write_grid(sim: &Simulation, dir: &Path, step: u64) -> SimResult<PathBuf> {
    let path = grid_path(dir, step);
    let mut w = create(&path)?;
    let d = sim.domain();
    let res: std::io::Result<()> = (|| {
        writeln!(w, "# psmflow grid {} {} {} step {step}", d[0], d[1], d[2])?;
        writeln!(w, "# x y z rho ux uy uz B")?;
        for z in 0..d[2] {
            for y in 0..d[1] {
                for x in 0..d[0] {
                    let (rho, u) = sim.macroscopic_at(x, y, z);
                    let b = sim.solid_fraction(x, y, z);
                    writeln!(w, "{x} {y} {z} {rho} {} {} {} {b}", u.x, u.y, u.z)?;
                }
            }
        }
        w.flush()
    })();
    res.map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}

pub fn write_particles(sim: &Simulation, dir: &Path, step: u64) -> SimResult<PathBuf> {
    let path = particles_path(dir, step);
    let mut w = create(&path)?;
    let ps = sim.particles();
    let res: std::io::Result<()> = (|| {
        writeln!(w, "# psmflow particles {} step {step}", ps.len())?;
        writeln!(w, "# id x y z ux uy uz ox oy oz r")?;
        for p in &ps {
            writeln!(
                w,
                "{} {} {} {} {} {} {} {} {} {} {}",
                p.id, p.x.x, p.x.y, p.x.z, p.u.x, p.u.y, p.u.z, p.omega.x, p.omega.y, p.omega.z, p.r
            )?;
        }
        w.flush()
    })();
    res.map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}

/// Scalars summarising one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepScalars {
    pub step: u64,
    pub mass: f64,
    pub momentum: Vec3,
    pub fluid_ke: f64,
    pub particle_ke: f64,
    /// Smallest surface gap between particles or to a wall; infinite if none.
    pub min_gap: f64,
    pub max_u: f64,
}

pub fn step_scalars(sim: &Simulation, walls: &[Wall]) -> StepScalars {
    let mut mass = 0.0;
    let mut momentum = Vec3::ZERO;
    let mut fluid_ke = 0.0;
    let mut max_u: f64 = 0.0;
    for (rho, u) in sim.macroscopic_field() {
        mass += rho;
        momentum += u * rho;
        fluid_ke += 0.5 * rho * u.norm_sq();
        max_u = max_u.max(u.norm());
    }
    let ps = sim.particles();
    let mut min_gap = f64::INFINITY;
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            min_gap = min_gap.min((q.x - p.x).norm() - p.r - q.r);
        }
        for w in walls {
            min_gap = min_gap.min(w.distance(p.x) - p.r);
        }
    }
    StepScalars {
        step: sim.steps_done,
        mass,
        momentum,
        fluid_ke,
        particle_ke: ps.iter().map(|p| p.kinetic_energy()).sum(),
        min_gap,
        max_u,
    }
}

pub struct SeriesWriter {
    path: PathBuf,
    w: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(dir: &Path) -> SimResult<Self> {
        let path = dir.join("series.txt");
        let mut w = create(&path)?;
        writeln!(w, "# step mass px py pz fluid_ke particle_ke min_gap max_u").map_err(|e| SimError::io(&path, e))?;
        Ok(SeriesWriter { path, w })
    }

    pub fn push(&mut self, s: &StepScalars) -> SimResult<()> {
        writeln!(
            self.w,
            "{} {} {} {} {} {} {} {} {}",
            s.step, s.mass, s.momentum.x, s.momentum.y, s.momentum.z, s.fluid_ke, s.particle_ke, s.min_gap, s.max_u
        )
        .map_err(|e| SimError::io(&self.path, e))
    }

    pub fn finish(mut self) -> SimResult<PathBuf> {
        self.w.flush().map_err(|e| SimError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Steps at which dumps are written for a run of `steps` steps.
pub fn dump_steps(steps: u64, cadence: u64) -> Vec<u64> {
    if cadence == 0 {
        return vec![steps];
    }
    let mut v: Vec<u64> = (0..=steps).step_by(cadence as usize).collect();
    if v.last() != Some(&steps) {
        v.push(steps);
    }
    v
}
