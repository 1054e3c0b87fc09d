//! Global simulation state spread over block workers.

use crate::dem::contact::Wall;
use crate::dem::linked_cells::LinkedCells;
use crate::dem::params::DemParams;
use crate::dem::particle::Particle;
use crate::error::{Error, Result};
use crate::lbm::boundary::BoundarySpec;
use crate::lbm::kernel::macroscopic;
use crate::lbm::lattice::{CX, CY, CZ, Q};
use crate::lbm::params::FluidParams;
use crate::math::Vec3;
use crate::partition::decomposition::{decompose, Decomposition};
use crate::partition::message::{Envelope, PARTICLE_BYTES};
use crate::partition::worker::{step_phases, BlockWorker, Phase, Traffic, WorkerConfig};
use crate::perf::{Clock, NullClock, TimingReport, WorkerTimes};
use crate::psm::mapping::MIN_RADIUS;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct SimulationSetup {
    pub domain: [usize; 3],
    /// Blocks per axis; must divide `domain`.
    pub blocks: [usize; 3],
    pub fluid: FluidParams,
    pub boundaries: BoundarySpec,
    pub initial_density: f64,
    pub initial_velocity: Vec3,
    pub particles: Vec<Particle>,
    pub walls: Vec<Wall>,
    pub dem: DemParams,
    /// Sub-blocks per axis for the particle registry.
    pub sub_blocks: usize,
    /// Fill ghost layers with NaN before every halo exchange so a missed
    /// update cannot go unnoticed.
    pub poison_halos: bool,
}

impl SimulationSetup {
    /// Fully periodic fluid at rest, one block, no particles.
    pub fn new(domain: [usize; 3], fluid: FluidParams, dem: DemParams) -> Self {
        SimulationSetup {
            domain,
            blocks: [1, 1, 1],
            fluid,
            boundaries: BoundarySpec::periodic(),
            initial_density: 1.0,
            initial_velocity: Vec3::ZERO,
            particles: Vec::new(),
            walls: Vec::new(),
            dem,
            sub_blocks: 1,
            poison_halos: false,
        }
    }
}

/// Runs phases over a set of workers and routes their messages.
pub trait Executor {
    fn run_phases(&mut self, workers: &mut [BlockWorker], phases: &[Phase], clock: &dyn Clock) -> Result<()>;
}

/// Runs every block on the calling thread, one phase at a time.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

/// Deliver a batch of messages, rejecting unknown destinations and
/// duplicate `(src, dst, kind)` triples within one phase.
pub fn route(workers: &mut [BlockWorker], batch: Vec<Envelope>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for env in batch {
        if env.dst >= workers.len() {
            return Err(Error::Sync(format!("message for missing block {}", env.dst)));
        }
        if !seen.insert((env.src, env.dst, env.payload.tag())) {
            return Err(Error::Sync(format!(
                "duplicate message kind {} from block {} to {}",
                env.payload.tag(),
                env.src,
                env.dst
            )));
        }
        workers[env.dst].deliver(env);
    }
    Ok(())
}

impl Executor for Sequential {
    fn run_phases(&mut self, workers: &mut [BlockWorker], phases: &[Phase], clock: &dyn Clock) -> Result<()> {
        for &phase in phases {
            let mut batch = Vec::new();
            for w in workers.iter_mut() {
                batch.extend(w.run_phase(phase, clock)?);
            }
            route(workers, batch)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub decomposition: Arc<Decomposition>,
    pub workers: Vec<BlockWorker>,
    pub fluid: FluidParams,
    pub phases: Vec<Phase>,
    pub steps_done: u64,
    pub phases_run: u64,
    pub particle_comm_phases: u64,
}

impl Simulation {
    pub fn new(setup: SimulationSetup) -> Result<Self> {
        setup.dem.validate()?;
        if setup.sub_blocks == 0 {
            return Err(Error::Config("sub_blocks must be at least 1".into()));
        }
        if !(setup.initial_density > 0.0) || !setup.initial_velocity.is_finite() {
            return Err(Error::Config("initial density must be positive and velocity finite".into()));
        }
        let periodic = setup.boundaries.periodic_axes();
        let decomposition = Arc::new(decompose(setup.domain, setup.blocks, periodic)?);

        let mut ids = BTreeSet::new();
        let mut r_max: f64 = 0.0;
        for p in &setup.particles {
            if !ids.insert(p.id) {
                return Err(Error::Config(format!("duplicate particle id {}", p.id)));
            }
            if !(p.r >= MIN_RADIUS) {
                return Err(Error::Config(format!(
                    "particle {} radius {} is below the mapping limit {MIN_RADIUS}",
                    p.id, p.r
                )));
            }
            r_max = r_max.max(p.r);
        }
        let margin = ghost_margin(r_max, setup.dem.lubrication > 0.0);
        let lub_gap = margin - r_max;
        let search_edge = LinkedCells::edge_for(2.0 * r_max, lub_gap).max(1.0);
        let bd = decomposition.block_dims();
        for a in 0..3 {
            if setup.blocks[a] > 1 && (bd[a] as f64) < 2.0 * r_max + lub_gap {
                return Err(Error::Config(format!(
                    "blocks of {} cells along axis {a} are thinner than a particle diameter plus lubrication gap ({:.2})",
                    bd[a],
                    2.0 * r_max + lub_gap
                )));
            }
        }

        let cfg = WorkerConfig {
            fluid: setup.fluid,
            boundaries: setup.boundaries,
            initial_density: setup.initial_density,
            initial_velocity: setup.initial_velocity,
            walls: setup.walls.clone(),
            dem: setup.dem,
            sub_blocks: setup.sub_blocks,
            margin,
            search_edge,
            poison_halos: setup.poison_halos,
        };
        let mut workers: Vec<BlockWorker> = decomposition
            .blocks
            .iter()
            .map(|b| BlockWorker::new(b.clone(), decomposition.clone(), &cfg))
            .collect();

        for p in setup.particles {
            let owner = decomposition.owner_of(p.x).ok_or(Error::OutsideGrid {
                id: p.id,
                position: p.x.to_array(),
            })?;
            let mut targets = decomposition.overlapping_blocks(p.x, p.r + margin, owner);
            targets.sort_unstable();
            let partners = workers[owner].info.partners();
            if let Some(t) = targets.iter().find(|t| partners.binary_search(t).is_err()) {
                return Err(Error::Config(format!("particle {} reaches block {t}, which is not adjacent", p.id)));
            }
            for &t in &targets {
                let mut g = p.clone();
                g.ghost = true;
                workers[t].ghost_owner.insert(p.id, owner);
                workers[t].particles.push(g);
            }
            let mut local = p;
            local.ghost = false;
            workers[owner].ghost_targets.insert(local.id, targets);
            workers[owner].particles.push(local);
        }
        for w in &mut workers {
            w.particles.sort_by_key(|p| p.id);
        }

        Ok(Simulation {
            decomposition,
            workers,
            fluid: setup.fluid,
            phases: step_phases(setup.dem.sub_cycles),
            steps_done: 0,
            phases_run: 0,
            particle_comm_phases: 0,
        })
    }

    /// Communication volume of the current particle distribution.
    pub fn comm_report(&self) -> CommReport {
        let margin = self.workers.first().map_or(0.0, |w| w.margin);
        comm_volume_report(&self.decomposition, &self.particles(), margin)
    }

    /// One fluid step on the calling thread.
    pub fn step(&mut self) -> Result<()> {
        self.run(1, &mut Sequential, &NullClock)
    }

    pub fn run(&mut self, steps: u64, exec: &mut dyn Executor, clock: &dyn Clock) -> Result<()> {
        for _ in 0..steps {
            exec.run_phases(&mut self.workers, &self.phases, clock)?;
            self.steps_done += 1;
            self.phases_run += self.phases.len() as u64;
            self.particle_comm_phases += self.phases.iter().filter(|p| p.exchanges_particles()).count() as u64;
        }
        Ok(())
    }

    pub fn domain(&self) -> [usize; 3] {
        self.decomposition.domain
    }

    pub fn cells(&self) -> u64 {
        let d = self.domain();
        (d[0] * d[1] * d[2]) as u64
    }

    fn locate(&self, x: usize, y: usize, z: usize) -> (&BlockWorker, [usize; 3]) {
        let bd = self.decomposition.block_dims();
        let g = self.decomposition.grid;
        let c = [x / bd[0], y / bd[1], z / bd[2]];
        let w = &self.workers[(c[2] * g[1] + c[1]) * g[0] + c[0]];
        (w, [x - w.info.origin[0], y - w.info.origin[1], z - w.info.origin[2]])
    }

    /// Stored populations of a global cell, i.e. after the most recent
    /// collision and before they stream.
    pub fn pdfs(&self, x: usize, y: usize, z: usize) -> [f64; Q] {
        let (w, l) = self.locate(x, y, z);
        w.field.get(l[0] as i64, l[1] as i64, l[2] as i64)
    }

    /// All populations, `Q` per cell, cells ordered x fastest.
    pub fn global_pdfs(&self) -> Vec<f64> {
        let d = self.domain();
        let mut out = Vec::with_capacity(d[0] * d[1] * d[2] * Q);
        for z in 0..d[2] {
            for y in 0..d[1] {
                for x in 0..d[0] {
                    out.extend_from_slice(&self.pdfs(x, y, z));
                }
            }
        }
        out
    }

    /// Overwrite the populations of a global cell.
    pub fn set_pdfs(&mut self, x: usize, y: usize, z: usize, f: &[f64; Q]) {
        let bd = self.decomposition.block_dims();
        let g = self.decomposition.grid;
        let c = [x / bd[0], y / bd[1], z / bd[2]];
        let w = &mut self.workers[(c[2] * g[1] + c[1]) * g[0] + c[0]];
        let l = [x - w.info.origin[0], y - w.info.origin[1], z - w.info.origin[2]];
        w.field.set(l[0] as i64, l[1] as i64, l[2] as i64, f);
    }

    /// Density and velocity of a global cell. Post-collision momentum
    /// exceeds the physical one by half the body force, hence the sign.
    pub fn macroscopic_at(&self, x: usize, y: usize, z: usize) -> (f64, Vec3) {
        macroscopic(&self.pdfs(x, y, z), -self.fluid.force)
    }

    /// `(ρ, u)` of every cell, x fastest.
    pub fn macroscopic_field(&self) -> Vec<(f64, Vec3)> {
        let d = self.domain();
        let mut out = Vec::with_capacity(d[0] * d[1] * d[2]);
        for z in 0..d[2] {
            for y in 0..d[1] {
                for x in 0..d[0] {
                    out.push(self.macroscopic_at(x, y, z));
                }
            }
        }
        out
    }

    /// Total solid fraction of a cell from the latest mapping.
    pub fn solid_fraction(&self, x: usize, y: usize, z: usize) -> f64 {
        let (w, l) = self.locate(x, y, z);
        w.fractions().total(l[0], l[1], l[2])
    }

    /// Owned particles of all blocks, sorted by id.
    pub fn particles(&self) -> Vec<Particle> {
        let mut v: Vec<Particle> = self.workers.iter().flat_map(|w| w.locals().cloned()).collect();
        v.sort_by_key(|p| p.id);
        v
    }

    pub fn traffic(&self) -> Vec<Traffic> {
        self.workers.iter().map(|w| w.traffic).collect()
    }

    pub fn worker_times(&self) -> Vec<WorkerTimes> {
        self.workers.iter().map(|w| w.times).collect()
    }

    pub fn reset_times(&mut self) {
        for w in &mut self.workers {
            w.times = WorkerTimes::default();
            w.traffic = Traffic::default();
        }
    }

    pub fn timing_report(&self, wall_ns: u64, steps: u64) -> TimingReport {
        TimingReport::from_workers(&self.worker_times(), wall_ns, steps, self.cells(), self.workers.len())
    }
}

/// Static communication volume of one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockComm {
    pub block: usize,
    /// Halo bytes sent per fluid step.
    pub halo_bytes: u64,
    pub halo_messages: usize,
    /// Ghost copies of owned particles held by other blocks.
    pub ghosts: usize,
    /// Bytes sent by one particle synchronization.
    pub particle_bytes: u64,
    /// Distinct blocks exchanged with.
    pub partners: usize,
}

/// Per-block volumes and their extremes.
#[derive(Clone, Debug, PartialEq)]
pub struct CommReport {
    pub blocks: Vec<BlockComm>,
    pub max_halo_bytes: u64,
    pub avg_halo_bytes: f64,
    pub max_particle_bytes: u64,
    pub avg_particle_bytes: f64,
    pub max_partners: usize,
}

impl CommReport {
    /// Tab-separated table, one row per block, then `max` and `avg` rows.
    pub fn to_table(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut s = alloc::string::String::from("block\thalo_bytes\thalo_msgs\tghosts\tparticle_bytes\tpartners\n");
        for b in &self.blocks {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                b.block, b.halo_bytes, b.halo_messages, b.ghosts, b.particle_bytes, b.partners
            );
        }
        let _ = writeln!(
            s,
            "max\t{}\t-\t-\t{}\t{}",
            self.max_halo_bytes, self.max_particle_bytes, self.max_partners
        );
        let _ = writeln!(s, "avg\t{:.1}\t-\t-\t{:.1}\t-", self.avg_halo_bytes, self.avg_particle_bytes);
        s
    }
}

/// Distance beyond a particle's radius within which other blocks need a
/// ghost copy of it.
pub fn ghost_margin(r_max: f64, lubrication: bool) -> f64 {
    if lubrication {
        r_max + DemParams::lubrication_cutoff(r_max / 2.0)
    } else {
        r_max
    }
}

/// Halo and particle volume per block. Each neighbouring lattice direction
/// carries a face or edge slab of full 19-population cells; each ghost copy
/// costs one particle record per synchronization.
pub fn comm_volume_report(d: &Decomposition, particles: &[Particle], margin: f64) -> CommReport {
    let mut ghosts = alloc::vec![0usize; d.blocks.len()];
    for p in particles {
        if let Some(owner) = d.owner_of(p.x) {
            ghosts[owner] += d.overlapping_blocks(p.x, p.r + margin, owner).len();
        }
    }
    let blocks: Vec<BlockComm> = d
        .blocks
        .iter()
        .map(|b| {
            let mut bytes = 0u64;
            let mut msgs = 0;
            for q in 1..Q {
                let c = [CX[q] as i64, CY[q] as i64, CZ[q] as i64];
                if b.neighbor_at(c).is_some() {
                    let cells: usize = (0..3).map(|a| if c[a] == 0 { b.dims[a] } else { 1 }).product();
                    bytes += (cells * Q * 8) as u64;
                    msgs += 1;
                }
            }
            BlockComm {
                block: b.id,
                halo_bytes: bytes,
                halo_messages: msgs,
                ghosts: ghosts[b.id],
                particle_bytes: (ghosts[b.id] * PARTICLE_BYTES) as u64,
                partners: b.partners().len(),
            }
        })
        .collect();
    let n = blocks.len().max(1) as f64;
    CommReport {
        max_halo_bytes: blocks.iter().map(|b| b.halo_bytes).max().unwrap_or(0),
        avg_halo_bytes: blocks.iter().map(|b| b.halo_bytes as f64).sum::<f64>() / n,
        max_particle_bytes: blocks.iter().map(|b| b.particle_bytes).max().unwrap_or(0),
        avg_particle_bytes: blocks.iter().map(|b| b.particle_bytes as f64).sum::<f64>() / n,
        max_partners: blocks.iter().map(|b| b.partners).max().unwrap_or(0),
        blocks,
    }
}

/// Number of bulk-synchronous particle exchanges per fluid step.
pub fn particle_exchanges_per_step(sub_cycles: u32) -> usize {
    step_phases(sub_cycles).iter().filter(|p| p.exchanges_particles()).count()
}
