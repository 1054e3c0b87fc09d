//! One block of the domain with its fluid, particles and mailbox.

use crate::dem::contact::{compute_interactions, ContactHistory, HistoryEntry, Partner, Wall};
use crate::dem::integrate::{apply_external_forces, integrate_post_force, integrate_pre_force};
use crate::dem::linked_cells::LinkedCells;
use crate::dem::params::DemParams;
use crate::dem::particle::Particle;
use crate::error::{Error, Result};
use crate::exact::ExactVec3;
use crate::lbm::boundary::{apply_boundaries, BoundarySpec};
use crate::lbm::field::{PdfField, Region};
use crate::lbm::kernel::{equilibrium, KernelStats};
use crate::lbm::lattice::{CX, CY, CZ, Q};
use crate::lbm::params::FluidParams;
use crate::math::Vec3;
use crate::partition::decomposition::{BlockInfo, Decomposition};
use crate::partition::message::{Envelope, ParticleTransfer, Payload};
use crate::perf::{Category, Clock, WorkerTimes};
use crate::psm::fraction::{build_fraction_field, set_solid_velocities, FractionField, SolidVelocityField};
use crate::psm::kernel::{finalize_hydro_forces, psm_collide_stream, HydroAccumulator};
use crate::psm::registry::SubBlockRegistry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

/// Bulk-synchronous phases of one fluid step. Messages sent in a phase are
/// delivered before the next phase starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Post halo sends, map particles, send particle velocities.
    FluidBegin,
    /// Receive velocities, set solid velocities, sweep the inner cells.
    FluidInner,
    /// Complete the halo, apply boundaries, sweep the outer cells, send
    /// fluid force partials.
    FluidOuter,
    /// Reduce fluid forces (first sub-cycle), move particles, send
    /// migrations and ghost copies.
    SubPre(u32),
    /// Receive particles, evaluate contacts and lubrication, send history
    /// copies.
    SubContacts(u32),
    /// Receive history copies, add external and fluid forces, send force
    /// partials.
    SubForces(u32),
    /// Reduce force partials and update velocities.
    SubPost(u32),
}

impl Phase {
    /// Whether this phase ends with a particle data exchange that nothing
    /// overlaps.
    pub fn exchanges_particles(self) -> bool {
        !matches!(self, Phase::FluidInner | Phase::SubPost(_))
    }

    /// Time category charged for waiting on this phase's messages.
    pub fn comm_category(self) -> Category {
        match self {
            Phase::FluidBegin => Category::PsmComm,
            _ => Category::PdComm,
        }
    }
}

/// The phase sequence of one fluid step with `j` sub-cycles.
pub fn step_phases(j: u32) -> Vec<Phase> {
    let mut v = vec![Phase::FluidBegin, Phase::FluidInner, Phase::FluidOuter];
    for k in 0..j {
        v.extend([Phase::SubPre(k), Phase::SubContacts(k), Phase::SubForces(k), Phase::SubPost(k)]);
    }
    v
}

/// Traffic sent to other blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Traffic {
    pub halo_bytes: u64,
    pub particle_bytes: u64,
    pub messages: u64,
    /// Largest particle payload sent in a single phase.
    pub max_particle_phase_bytes: u64,
}

#[derive(Clone, Debug)]
pub struct BlockWorker {
    pub info: BlockInfo,
    pub decomposition: Arc<Decomposition>,
    pub field: PdfField,
    pub fluid: FluidParams,
    pub boundaries: BoundarySpec,
    pub sub_blocks: usize,
    /// Owned particles and ghosts, sorted by id.
    pub particles: Vec<Particle>,
    pub ghost_owner: BTreeMap<u64, usize>,
    /// Blocks holding a ghost of each owned particle.
    pub ghost_targets: BTreeMap<u64, Vec<usize>>,
    pub history: ContactHistory,
    /// Histories of pairs computed elsewhere whose higher-id particle is owned here.
    pub history_mirror: BTreeMap<(u64, Partner), HistoryEntry>,
    pub walls: Vec<Wall>,
    pub dem: DemParams,
    pub margin: f64,
    pub search_edge: f64,
    pub poison_halos: bool,
    pub step: u64,
    pub cycle: u64,
    pub mailbox: Vec<Envelope>,
    pub times: WorkerTimes,
    pub traffic: Traffic,
    registry: Option<SubBlockRegistry>,
    fractions: FractionField,
    solid: SolidVelocityField,
    hydro: HydroAccumulator,
    hydro_own: BTreeMap<u64, (ExactVec3, ExactVec3)>,
    stats: KernelStats,
}

/// Construction parameters shared by all blocks.
#[derive(Clone, Debug)]
pub struct WorkerConfig {
    pub fluid: FluidParams,
    pub boundaries: BoundarySpec,
    pub initial_density: f64,
    pub initial_velocity: Vec3,
    pub walls: Vec<Wall>,
    pub dem: DemParams,
    pub sub_blocks: usize,
    pub margin: f64,
    pub search_edge: f64,
    pub poison_halos: bool,
}

fn slab_range(c: i64, n: usize, ghost: bool) -> (i64, i64) {
    match (c, ghost) {
        (0, _) => (0, n as i64),
        (1, false) => (n as i64 - 1, n as i64),
        (-1, false) => (0, 1),
        (1, true) => (n as i64, n as i64 + 1),
        (_, true) => (-1, 0),
        _ => unreachable!(),
    }
}

impl BlockWorker {
    pub fn new(info: BlockInfo, decomposition: Arc<Decomposition>, cfg: &WorkerConfig) -> Self {
        let mut field = PdfField::new(info.dims);
        field.fill_interior(&equilibrium(cfg.initial_density, cfg.initial_velocity));
        let dims = info.dims;
        BlockWorker {
            info,
            decomposition,
            field,
            fluid: cfg.fluid,
            boundaries: cfg.boundaries,
            sub_blocks: cfg.sub_blocks,
            particles: Vec::new(),
            ghost_owner: BTreeMap::new(),
            ghost_targets: BTreeMap::new(),
            history: ContactHistory::default(),
            history_mirror: BTreeMap::new(),
            walls: cfg.walls.clone(),
            dem: cfg.dem,
            margin: cfg.margin,
            search_edge: cfg.search_edge,
            poison_halos: cfg.poison_halos,
            step: 0,
            cycle: 0,
            mailbox: Vec::new(),
            times: WorkerTimes::default(),
            traffic: Traffic::default(),
            registry: None,
            fractions: FractionField::empty(dims),
            solid: SolidVelocityField::default(),
            hydro: HydroAccumulator::new(0),
            hydro_own: BTreeMap::new(),
            stats: KernelStats::default(),
        }
    }

    pub fn id(&self) -> usize {
        self.info.id
    }

    pub fn locals(&self) -> impl Iterator<Item = &Particle> {
        self.particles.iter().filter(|p| !p.ghost)
    }

    pub fn ghosts(&self) -> impl Iterator<Item = &Particle> {
        self.particles.iter().filter(|p| p.ghost)
    }

    /// Solid fractions of the most recent mapping.
    pub fn fractions(&self) -> &FractionField {
        &self.fractions
    }

    pub fn deliver(&mut self, env: Envelope) {
        self.mailbox.push(env);
    }

    fn take<T>(&mut self, mut pick: impl FnMut(&Payload) -> bool, mut conv: impl FnMut(Envelope) -> T) -> Vec<T> {
        let mut keep = Vec::with_capacity(self.mailbox.len());
        let mut out = Vec::new();
        let mut all = core::mem::take(&mut self.mailbox);
        all.sort_by_key(|e| (e.src, e.payload.tag()));
        for e in all {
            if pick(&e.payload) {
                out.push(conv(e));
            } else {
                keep.push(e);
            }
        }
        self.mailbox = keep;
        out
    }

    fn envelope(&mut self, dst: usize, sub_cycle: u32, payload: Payload) -> Envelope {
        if dst != self.info.id {
            let b = payload.bytes() as u64;
            if payload.is_particle_data() {
                self.traffic.particle_bytes += b;
            } else {
                self.traffic.halo_bytes += b;
            }
            self.traffic.messages += 1;
        }
        Envelope {
            src: self.info.id,
            dst,
            step: self.step,
            sub_cycle,
            payload,
        }
    }

    fn timed<T>(&mut self, clock: &dyn Clock, cat: Category, f: impl FnOnce(&mut Self) -> T) -> T {
        let t0 = clock.now_ns();
        let r = f(self);
        let dt = clock.now_ns().saturating_sub(t0);
        self.times.add(cat, dt);
        r
    }

    /// Run one phase: consume this phase's messages, compute, and return the
    /// messages for the next one.
    pub fn run_phase(&mut self, phase: Phase, clock: &dyn Clock) -> Result<Vec<Envelope>> {
        let mut out = Vec::new();
        match phase {
            Phase::FluidBegin => self.fluid_begin(clock, &mut out)?,
            Phase::FluidInner => self.fluid_inner(clock)?,
            Phase::FluidOuter => self.fluid_outer(clock, &mut out)?,
            Phase::SubPre(k) => self.sub_pre(k, clock, &mut out)?,
            Phase::SubContacts(k) => self.sub_contacts(k, clock, &mut out)?,
            Phase::SubForces(k) => self.sub_forces(k, clock, &mut out)?,
            Phase::SubPost(k) => self.sub_post(k, clock)?,
        }
        let phase_bytes: u64 = out
            .iter()
            .filter(|e| e.dst != self.info.id && e.payload.is_particle_data())
            .map(|e| e.payload.bytes() as u64)
            .sum();
        self.traffic.max_particle_phase_bytes = self.traffic.max_particle_phase_bytes.max(phase_bytes);
        Ok(out)
    }

    fn fluid_begin(&mut self, clock: &dyn Clock, out: &mut Vec<Envelope>) -> Result<()> {
        self.timed(clock, Category::PsmComm, |w| {
            if w.poison_halos {
                w.field.fill_ghosts(f64::NAN);
            }
            for q in 1..Q {
                let c = [CX[q] as i64, CY[q] as i64, CZ[q] as i64];
                if let Some(nb) = w.info.neighbor_at(c) {
                    let data = w.pack_slab(c);
                    let env = w.envelope(nb, u32::MAX, Payload::Halo { dir: q as u8, data });
                    out.push(env);
                }
            }
        });
        let t0 = clock.now_ns();
        let registry = SubBlockRegistry::build(self.info.origin, self.info.dims, self.sub_blocks, &self.particles)?;
        self.times.transfer_ns += clock.now_ns().saturating_sub(t0);
        self.fractions = build_fraction_field(&registry)?;
        self.registry = Some(registry);
        self.times.add(Category::Mapping, clock.now_ns().saturating_sub(t0));
        self.timed(clock, Category::SetU, |w| {
            let mut per: BTreeMap<usize, Vec<(u64, Vec3, Vec3)>> = BTreeMap::new();
            for p in w.particles.iter().filter(|p| !p.ghost) {
                if let Some(ts) = w.ghost_targets.get(&p.id) {
                    for &t in ts {
                        per.entry(t).or_default().push((p.id, p.u, p.omega));
                    }
                }
            }
            for (t, v) in per {
                let env = w.envelope(t, u32::MAX, Payload::Velocity(v));
                out.push(env);
            }
        });
        Ok(())
    }

    fn pack_slab(&self, c: [i64; 3]) -> Vec<f64> {
        let r: [(i64, i64); 3] = core::array::from_fn(|a| slab_range(c[a], self.info.dims[a], false));
        let n = self.field.stride();
        let count = ((r[0].1 - r[0].0) * (r[1].1 - r[1].0) * (r[2].1 - r[2].0)) as usize;
        let mut data = Vec::with_capacity(count * Q);
        for z in r[2].0..r[2].1 {
            for y in r[1].0..r[1].1 {
                for x in r[0].0..r[0].1 {
                    let i = self.field.layout.index(x, y, z);
                    for q in 0..Q {
                        data.push(self.field.src[q * n + i]);
                    }
                }
            }
        }
        data
    }

    fn unpack_slab(&mut self, dir: usize, data: &[f64]) -> Result<()> {
        // the sender's side `c` faces our side `-c`
        let c = [-(CX[dir] as i64), -(CY[dir] as i64), -(CZ[dir] as i64)];
        let r: [(i64, i64); 3] = core::array::from_fn(|a| slab_range(c[a], self.info.dims[a], true));
        let count = ((r[0].1 - r[0].0) * (r[1].1 - r[1].0) * (r[2].1 - r[2].0)) as usize;
        if data.len() != count * Q {
            return Err(Error::Sync(format!(
                "halo slab for direction {dir} has {} values, expected {}",
                data.len(),
                count * Q
            )));
        }
        let n = self.field.stride();
        let mut k = 0;
        for z in r[2].0..r[2].1 {
            for y in r[1].0..r[1].1 {
                for x in r[0].0..r[0].1 {
                    let i = self.field.layout.index(x, y, z);
                    for q in 0..Q {
                        self.field.src[q * n + i] = data[k];
                        k += 1;
                    }
                }
            }
        }
        Ok(())
    }

    fn particle_index(&self, id: u64) -> Option<usize> {
        self.particles.binary_search_by_key(&id, |p| p.id).ok()
    }

    fn fluid_inner(&mut self, clock: &dyn Clock) -> Result<()> {
        let t0 = clock.now_ns();
        let updates = self.take(|p| matches!(p, Payload::Velocity(_)), |e| e.payload);
        for pl in updates {
            if let Payload::Velocity(v) = pl {
                for (id, u, omega) in v {
                    let i = self
                        .particle_index(id)
                        .filter(|&i| self.particles[i].ghost)
                        .ok_or_else(|| Error::Sync(format!("velocity update for unknown ghost {id}")))?;
                    self.particles[i].u = u;
                    self.particles[i].omega = omega;
                }
            }
        }
        let registry = self.registry.as_mut().expect("mapping precedes the inner sweep");
        for s in registry.snapshots.iter_mut() {
            let i = self.particles.binary_search_by_key(&s.id, |p| p.id).map_err(|_| {
                Error::Sync(format!("snapshot of particle {} has no particle", s.id))
            })?;
            s.u = self.particles[i].u;
            s.omega = self.particles[i].omega;
        }
        self.solid = set_solid_velocities(&self.fractions, registry)?;
        self.hydro = HydroAccumulator::new(registry.snapshots.len());
        self.times.add(Category::SetU, clock.now_ns().saturating_sub(t0));
        self.timed(clock, Category::Psm, |w| {
            let reg = w.registry.as_ref().expect("registry");
            w.stats = psm_collide_stream(&mut w.field, &w.fluid, &w.fractions, &w.solid, reg, &mut w.hydro, Region::Inner);
        });
        Ok(())
    }

    fn fluid_outer(&mut self, clock: &dyn Clock, out: &mut Vec<Envelope>) -> Result<()> {
        let t0 = clock.now_ns();
        let halos = self.take(|p| matches!(p, Payload::Halo { .. }), |e| e.payload);
        let expected = (1..Q)
            .filter(|&q| self.info.neighbor_at([CX[q] as i64, CY[q] as i64, CZ[q] as i64]).is_some())
            .count();
        if halos.len() != expected {
            return Err(Error::Sync(format!(
                "block {} received {} halo slabs, expected {expected}",
                self.info.id,
                halos.len()
            )));
        }
        for h in halos {
            if let Payload::Halo { dir, data } = h {
                self.unpack_slab(dir as usize, &data)?;
            }
        }
        self.times.add(Category::PsmComm, clock.now_ns().saturating_sub(t0));
        self.timed(clock, Category::Psm, |w| -> Result<()> {
            apply_boundaries(&mut w.field, w.info.origin, w.decomposition.domain, &w.boundaries);
            let reg = w.registry.as_ref().expect("registry");
            let s = psm_collide_stream(&mut w.field, &w.fluid, &w.fractions, &w.solid, reg, &mut w.hydro, Region::Outer);
            w.stats.merge(&s);
            w.field.swap();
            w.stats.check(w.step, w.info.origin)
        })?;
        self.timed(clock, Category::RedF, |w| -> Result<()> {
            let reg = w.registry.as_ref().expect("registry");
            let partials = finalize_hydro_forces(&w.hydro, reg);
            w.hydro_own.clear();
            let mut per: BTreeMap<usize, Vec<(u64, ExactVec3, ExactVec3)>> = BTreeMap::new();
            for (id, f, t) in partials {
                match w.ghost_owner.get(&id) {
                    Some(&owner) => per.entry(owner).or_default().push((id, f, t)),
                    None => {
                        w.hydro_own.insert(id, (f, t));
                    }
                }
            }
            for (owner, v) in per {
                let env = w.envelope(owner, u32::MAX, Payload::Hydro(v));
                out.push(env);
            }
            Ok(())
        })
    }

    fn sub_pre(&mut self, k: u32, clock: &dyn Clock, out: &mut Vec<Envelope>) -> Result<()> {
        if k == 0 {
            self.timed(clock, Category::RedF, |w| w.reduce_hydro())?;
        }
        self.timed(clock, Category::Pd, |w| integrate_pre_force(&mut w.particles, w.dem.dt()));
        self.timed(clock, Category::PdComm, |w| w.send_particles(k, out))
    }

    fn reduce_hydro(&mut self) -> Result<()> {
        let mut sums = core::mem::take(&mut self.hydro_own);
        let msgs = self.take(|p| matches!(p, Payload::Hydro(_)), |e| e.payload);
        for m in msgs {
            if let Payload::Hydro(v) = m {
                for (id, f, t) in v {
                    let e = sums.entry(id).or_insert((ExactVec3::ZERO, ExactVec3::ZERO));
                    e.0 += f;
                    e.1 += t;
                }
            }
        }
        for p in self.particles.iter_mut().filter(|p| !p.ghost) {
            let (f, t) = sums.remove(&p.id).unwrap_or((ExactVec3::ZERO, ExactVec3::ZERO));
            p.f_hyd = f.value();
            p.t_hyd = t.value();
        }
        if let Some(id) = sums.keys().next() {
            return Err(Error::Sync(format!("fluid force partial for particle {id} not owned by block {}", self.info.id)));
        }
        Ok(())
    }

    fn send_particles(&mut self, k: u32, out: &mut Vec<Envelope>) -> Result<()> {
        let me = self.info.id;
        let partners = self.info.partners();
        let mut per: BTreeMap<usize, Vec<ParticleTransfer>> = BTreeMap::new();
        let mut keep = Vec::with_capacity(self.particles.len());
        self.ghost_targets.clear();
        self.ghost_owner.clear();
        for p in core::mem::take(&mut self.particles) {
            if p.ghost {
                continue;
            }
            let owner = self.decomposition.owner_of(p.x).ok_or(Error::OutsideGrid {
                id: p.id,
                position: p.x.to_array(),
            })?;
            let mut targets = self.decomposition.overlapping_blocks(p.x, p.r + self.margin, owner);
            if owner != me {
                targets.push(owner);
            }
            targets.retain(|&t| t != me);
            targets.sort_unstable();
            for &t in &targets {
                if partners.binary_search(&t).is_err() {
                    return Err(if t == owner {
                        Error::Sync(format!("particle {} moved more than one block in a sub-cycle", p.id))
                    } else {
                        Error::Config(format!(
                            "blocks are thinner than the ghost margin {:.2}: particle {} reaches block {t}",
                            self.margin, p.id
                        ))
                    });
                }
            }
            let histories: Vec<((u64, Partner), HistoryEntry)> = if owner != me {
                let keys: Vec<(u64, Partner)> = self
                    .history
                    .old
                    .range((p.id, Partner::Particle(0))..=(p.id, Partner::Wall(u32::MAX)))
                    .map(|(k, _)| *k)
                    .collect();
                keys.into_iter().map(|k| (k, self.history.old.remove(&k).expect("key"))).collect()
            } else {
                Vec::new()
            };
            for &t in &targets {
                per.entry(t).or_default().push(ParticleTransfer {
                    particle: p.clone(),
                    owner,
                    histories: if t == owner { histories.clone() } else { Vec::new() },
                });
            }
            if owner == me {
                self.ghost_targets.insert(p.id, targets);
                keep.push(p);
            }
        }
        self.particles = keep;
        for (t, v) in per {
            let env = self.envelope(t, k, Payload::Particles(v));
            out.push(env);
        }
        Ok(())
    }

    fn sub_contacts(&mut self, k: u32, clock: &dyn Clock, out: &mut Vec<Envelope>) -> Result<()> {
        self.timed(clock, Category::PdComm, |w| w.receive_particles())?;
        self.timed(clock, Category::Pd, |w| -> Result<()> {
            let (lo, hi) = w.info.aabb();
            let pad = Vec3::splat(w.margin + w.search_edge + 1.0);
            let cells = LinkedCells::build(&w.particles, lo - pad, hi + pad, w.search_edge)?;
            compute_interactions(&mut w.particles, &w.walls, &w.dem, &cells, &mut w.history, w.cycle)?;
            w.history.swap();
            Ok(())
        })?;
        self.timed(clock, Category::PdComm, |w| {
            let mut per: BTreeMap<usize, Vec<((u64, Partner), HistoryEntry)>> = BTreeMap::new();
            for (key, h) in &w.history.old {
                if let Partner::Particle(hi) = key.1 {
                    if let Some(&owner) = w.ghost_owner.get(&hi) {
                        per.entry(owner).or_default().push((*key, *h));
                    }
                }
            }
            for (t, v) in per {
                let env = w.envelope(t, k, Payload::Histories(v));
                out.push(env);
            }
        });
        Ok(())
    }

    fn receive_particles(&mut self) -> Result<()> {
        let me = self.info.id;
        let msgs = self.take(|p| matches!(p, Payload::Particles(_)), |e| e.payload);
        for m in msgs {
            if let Payload::Particles(v) = m {
                for t in v {
                    let mut p = t.particle;
                    if t.owner == me {
                        p.ghost = false;
                        for (key, h) in t.histories {
                            self.history.old.insert(key, h);
                        }
                    } else {
                        p.ghost = true;
                        p.f_new = ExactVec3::ZERO;
                        p.t_new = ExactVec3::ZERO;
                        self.ghost_owner.insert(p.id, t.owner);
                    }
                    self.particles.push(p);
                }
            }
        }
        self.particles.sort_by_key(|p| p.id);
        if let Some(w) = self.particles.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Sync(format!("particle {} arrived twice on block {me}", w[0].id)));
        }
        // owned particles that became local here need their ghost targets on
        // the next velocity sync; recompute from the current position
        for p in self.particles.iter().filter(|p| !p.ghost) {
            if !self.ghost_targets.contains_key(&p.id) {
                let owner = me;
                let mut ts = self.decomposition.overlapping_blocks(p.x, p.r + self.margin, owner);
                ts.sort_unstable();
                self.ghost_targets.insert(p.id, ts);
            }
        }
        Ok(())
    }

    fn sub_forces(&mut self, k: u32, clock: &dyn Clock, out: &mut Vec<Envelope>) -> Result<()> {
        self.timed(clock, Category::PdComm, |w| {
            w.history_mirror.clear();
            let msgs = w.take(|p| matches!(p, Payload::Histories(_)), |e| e.payload);
            for m in msgs {
                if let Payload::Histories(v) = m {
                    w.history_mirror.extend(v);
                }
            }
        });
        self.timed(clock, Category::Pd, |w| apply_external_forces(&mut w.particles, &w.dem));
        self.timed(clock, Category::PdComm, |w| {
            let mut per: BTreeMap<usize, Vec<(u64, ExactVec3, ExactVec3)>> = BTreeMap::new();
            for p in w.particles.iter().filter(|p| p.ghost) {
                if !(p.f_new.is_zero() && p.t_new.is_zero()) {
                    per.entry(w.ghost_owner[&p.id]).or_default().push((p.id, p.f_new, p.t_new));
                }
            }
            for (t, v) in per {
                let env = w.envelope(t, k, Payload::Forces(v));
                out.push(env);
            }
        });
        Ok(())
    }

    fn sub_post(&mut self, k: u32, clock: &dyn Clock) -> Result<()> {
        self.timed(clock, Category::PdComm, |w| -> Result<()> {
            let msgs = w.take(|p| matches!(p, Payload::Forces(_)), |e| e.payload);
            for m in msgs {
                if let Payload::Forces(v) = m {
                    for (id, f, t) in v {
                        let i = w
                            .particle_index(id)
                            .filter(|&i| !w.particles[i].ghost)
                            .ok_or_else(|| Error::Sync(format!("force partial for particle {id} not owned here")))?;
                        w.particles[i].f_new += f;
                        w.particles[i].t_new += t;
                    }
                }
            }
            Ok(())
        })?;
        self.timed(clock, Category::Pd, |w| {
            integrate_post_force(&mut w.particles, w.dem.dt());
            for p in w.particles.iter_mut().filter(|p| p.ghost) {
                p.f_new = ExactVec3::ZERO;
                p.t_new = ExactVec3::ZERO;
            }
        });
        self.cycle += 1;
        if k + 1 == self.dem.sub_cycles {
            self.step += 1;
        }
        Ok(())
    }
}
