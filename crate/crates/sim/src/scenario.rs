//! Turning a validated configuration into an initial simulation state.

use crate::config::{BoundaryKind, Placement, ScenarioConfig};
use crate::error::{SimError, SimResult};
use crate::units::{self, LatticeUnits};
use psmflow_core::dem::contact::Wall;
use psmflow_core::dem::params::DemParams;
use psmflow_core::dem::particle::Particle;
use psmflow_core::dem::system::DemSystem;
use psmflow_core::lbm::params::FluidParams;
use psmflow_core::partition::SimulationSetup;
use psmflow_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub setup: SimulationSetup,
    /// Present when the configuration gave dimensionless groups.
    pub units: Option<LatticeUnits>,
}

fn domain_box(cells: [usize; 3]) -> Vec3 {
    Vec3::new(cells[0] as f64, cells[1] as f64, cells[2] as f64)
}

/// Sites of a face-centred cubic lattice with nearest-neighbour distance
/// `nn`, whose points lie in `[lo, hi]`, ordered bottom-up (z, then y, x).
pub fn fcc_sites(lo: Vec3, hi: Vec3, nn: f64) -> Vec<Vec3> {
    let a = nn * std::f64::consts::SQRT_2;
    let basis = [[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]];
    let n: [usize; 3] = std::array::from_fn(|i| ((hi[i] - lo[i]).max(0.0) / a) as usize + 1);
    let mut out = Vec::new();
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                for b in &basis {
                    let p = lo + Vec3::new((i as f64 + b[0]) * a, (j as f64 + b[1]) * a, (k as f64 + b[2]) * a);
                    if (0..3).all(|ax| p[ax] <= hi[ax]) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out.sort_by(|p, q| (p.z, p.y, p.x).partial_cmp(&(q.z, q.y, q.x)).expect("finite sites"));
    out
}

fn place(cfg: &ScenarioConfig) -> SimResult<Vec<Vec3>> {
    let p = &cfg.particles;
    let size = domain_box(cfg.domain.cells);
    match p.placement {
        Placement::None => Ok(Vec::new()),
        Placement::List => Ok(p.positions.iter().map(|x| Vec3::from_array(*x)).collect()),
        Placement::Single => Ok(vec![p
            .positions
            .first()
            .map(|x| Vec3::from_array(*x))
            .unwrap_or(Vec3::new(size.x / 2.0, size.y / 2.0, 0.75 * size.z))]),
        Placement::Lattice => {
            let pad = p.radius + p.jitter + 1e-6;
            let lo = Vec3::new(
                p.region_lo[0] * size.x,
                p.region_lo[1] * size.y,
                p.region_lo[2] * size.z,
            ) + Vec3::splat(pad);
            let hi = Vec3::new(
                p.region_hi[0] * size.x,
                p.region_hi[1] * size.y,
                p.region_hi[2] * size.z,
            ) - Vec3::splat(pad);
            let sites = fcc_sites(lo, hi, p.spacing * 2.0 * p.radius);
            if sites.len() < p.count {
                return Err(SimError::config(format!(
                    "particle region holds {} lattice sites at spacing {}, {} requested",
                    sites.len(),
                    p.spacing,
                    p.count
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok((0..p.count)
                .map(|i| {
                    let s = sites[i * sites.len() / p.count];
                    let j = Vec3::new(
                        rng.gen_range(-1.0..=1.0),
                        rng.gen_range(-1.0..=1.0),
                        rng.gen_range(-1.0..=1.0),
                    ) * p.jitter;
                    s + j
                })
                .collect())
        }
    }
}

fn check_placement(particles: &[Particle], size: Vec3, walls: bool) -> SimResult<()> {
    let mut bad = Vec::new();
    for (i, p) in particles.iter().enumerate() {
        let clearance = if walls { p.r } else { 0.0 };
        if (0..3).any(|a| p.x[a] < clearance || p.x[a] > size[a] - clearance) {
            bad.push(format!("particle {} at {:?} is not inside the domain", p.id, p.x.to_array()));
        }
        for q in &particles[i + 1..] {
            let d = (q.x - p.x).norm();
            if d < p.r + q.r {
                bad.push(format!("particles {} and {} overlap by {:.3} cells", p.id, q.id, p.r + q.r - d));
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(SimError::Config(bad))
    }
}

pub fn build_scenario(cfg: &ScenarioConfig) -> SimResult<Scenario> {
    cfg.validate()?;
    let p = &cfg.particles;
    let nu = cfg.nu();
    let mut gravity = Vec3::from_array(cfg.dem.gravity);
    let mut boundaries = cfg.boundaries.clone();
    let units = match &cfg.physics {
        Some(ph) => {
            let u = units::from_dimensionless(ph.galileo, ph.reynolds, p.density_ratio, 2.0 * p.radius, nu)?;
            gravity = Vec3::new(0.0, 0.0, -u.gravity);
            for (face, normal) in [
                (&mut boundaries.x_min, [1.0, 0.0, 0.0]),
                (&mut boundaries.x_max, [-1.0, 0.0, 0.0]),
                (&mut boundaries.y_min, [0.0, 1.0, 0.0]),
                (&mut boundaries.y_max, [0.0, -1.0, 0.0]),
                (&mut boundaries.z_min, [0.0, 0.0, 1.0]),
                (&mut boundaries.z_max, [0.0, 0.0, -1.0]),
            ] {
                if let BoundaryKind::Velocity(_) = face {
                    *face = BoundaryKind::Velocity(normal.map(|n| n * u.inflow));
                }
            }
            Some(u)
        }
        None => None,
    };
    let mut resolved = cfg.clone();
    resolved.boundaries = boundaries;
    let spec = resolved.boundary_spec().map_err(SimError::config)?;
    let fluid = FluidParams::from_tau(cfg.tau())?.with_force(Vec3::from_array(cfg.fluid.force));

    let m_eff = if p.placement == Placement::None {
        1.0
    } else {
        0.5 * Particle::new(0, Vec3::ZERO, p.radius, p.density_ratio).mass
    };
    let dem = DemParams {
        sub_cycles: cfg.dem.sub_cycles,
        gravity,
        rho_f: 1.0,
        nu,
        lubrication: cfg.dem.lubrication,
        ..DemParams::default()
    }
    .with_collision(m_eff, cfg.dem.collision_time, cfg.dem.restitution)?;

    let size = domain_box(cfg.domain.cells);
    let walls: Vec<Wall> = if cfg.dem.walls {
        Wall::box_walls(Vec3::ZERO, size).to_vec()
    } else {
        Vec::new()
    };
    let mut particles: Vec<Particle> = place(cfg)?
        .into_iter()
        .enumerate()
        .map(|(i, x)| Particle::new(i as u64, x, p.radius, p.density_ratio))
        .collect();
    check_placement(&particles, size, cfg.dem.walls)?;

    if p.settle_steps > 0 && !particles.is_empty() {
        let mut dry = DemSystem::new(particles, walls.clone(), dem, Vec3::ZERO, size)?;
        for _ in 0..p.settle_steps * cfg.dem.sub_cycles as u64 {
            dry.substep()?;
        }
        particles = dry.particles;
        for q in &mut particles {
            q.u = Vec3::ZERO;
            q.omega = Vec3::ZERO;
            q.f_old = Vec3::ZERO;
            q.t_old = Vec3::ZERO;
        }
        check_placement(&particles, size, false)?;
    }

    let setup = SimulationSetup {
        domain: cfg.domain.cells,
        blocks: cfg.domain.blocks,
        fluid,
        boundaries: spec,
        initial_density: 1.0,
        initial_velocity: Vec3::from_array(cfg.fluid.initial_velocity),
        particles,
        walls,
        dem,
        sub_blocks: cfg.domain.sub_blocks,
        poison_halos: false,
    };
    Ok(Scenario { setup, units })
}

/// The scenario repeated `tiles` times per axis, one block per copy. Used for
/// weak scaling: every block carries the base workload.
pub fn build_tiled(cfg: &ScenarioConfig, tiles: [usize; 3]) -> SimResult<Scenario> {
    let mut base = build_scenario(cfg)?;
    let cells: [usize; 3] = std::array::from_fn(|a| cfg.domain.cells[a] * tiles[a]);
    let n = base.setup.particles.len() as u64;
    let mut particles = Vec::new();
    for tz in 0..tiles[2] {
        for ty in 0..tiles[1] {
            for tx in 0..tiles[0] {
                let t = ((tz * tiles[1] + ty) * tiles[0] + tx) as u64;
                let shift = Vec3::new(
                    (tx * cfg.domain.cells[0]) as f64,
                    (ty * cfg.domain.cells[1]) as f64,
                    (tz * cfg.domain.cells[2]) as f64,
                );
                for p in &base.setup.particles {
                    let mut q = p.clone();
                    q.id = t * n + p.id;
                    q.x = p.x + shift;
                    particles.push(q);
                }
            }
        }
    }
    base.setup.domain = cells;
    base.setup.blocks = tiles;
    base.setup.particles = particles;
    if !base.setup.walls.is_empty() {
        base.setup.walls = Wall::box_walls(Vec3::ZERO, domain_box(cells)).to_vec();
    }
    Ok(base)
}
