//! Linear spring-dashpot contacts and their tangential history.

use crate::dem::linked_cells::LinkedCells;
use crate::dem::lubrication::{lubrication_correction, wall_lubrication_correction};
use crate::dem::params::DemParams;
use crate::dem::particle::Particle;
use crate::error::{Error, Result};
use crate::math::Vec3;
use alloc::collections::BTreeMap;
use alloc::format;

/// Static half-space `(x - point)·normal >= 0`; `normal` points into the
/// domain and has unit length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wall {
    pub id: u32,
    pub point: Vec3,
    pub normal: Vec3,
}

impl Wall {
    /// The six planes bounding the box `[lo, hi]`, ids 0..6 ordered
    /// x_min, x_max, y_min, y_max, z_min, z_max.
    pub fn box_walls(lo: Vec3, hi: Vec3) -> [Wall; 6] {
        let e = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        core::array::from_fn(|i| {
            let axis = i / 2;
            if i % 2 == 0 {
                Wall { id: i as u32, point: lo, normal: e[axis] }
            } else {
                Wall { id: i as u32, point: hi, normal: -e[axis] }
            }
        })
    }

    pub fn distance(&self, x: Vec3) -> f64 {
        (x - self.point).dot(self.normal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partner {
    Particle(u64),
    Wall(u32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryEntry {
    pub delta_t: Vec3,
    /// Sub-cycle counter at first contact.
    pub t_impact: u64,
}

/// Tangential histories keyed by (lower particle id, partner). The current
/// sub-cycle reads `old` and writes `new`; [`ContactHistory::swap`] makes
/// the new set current, which drops every pair that was not in contact.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContactHistory {
    pub old: BTreeMap<(u64, Partner), HistoryEntry>,
    pub new: BTreeMap<(u64, Partner), HistoryEntry>,
}

impl ContactHistory {
    pub fn get(&self, key: (u64, Partner)) -> Option<HistoryEntry> {
        self.old.get(&key).copied()
    }

    pub fn swap(&mut self) {
        core::mem::swap(&mut self.old, &mut self.new);
        self.new.clear();
    }

    pub fn len(&self) -> usize {
        self.old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactResult {
    pub force_i: Vec3,
    pub torque_i: Vec3,
    pub force_j: Vec3,
    pub torque_j: Vec3,
    /// Updated tangential displacement to store in the history.
    pub delta_t: Vec3,
}

/// Rotate a stored tangential displacement onto the plane normal to `n`,
/// keeping its length.
fn reproject(delta: Vec3, n: Vec3) -> Vec3 {
    let len = delta.norm();
    if len == 0.0 {
        return Vec3::ZERO;
    }
    let t = delta.reject(n);
    let tl = t.norm();
    if tl == 0.0 {
        Vec3::ZERO
    } else {
        t * (len / tl)
    }
}

/// Spring-dashpot law for a contact at `x_cp` with normal `n` (from i to the
/// partner), penetration `delta_n` and relative surface velocity `u_rel`.
/// Returns (force on i, tangential force on i, new δ_t).
#[inline]
fn spring_dashpot(delta_n: f64, n: Vec3, u_rel: Vec3, delta_old: Vec3, params: &DemParams, dt: f64) -> (Vec3, Vec3, Vec3) {
    let u_n = n * u_rel.dot(n);
    let u_t = u_rel - u_n;
    let delta_t = reproject(delta_old, n) + u_t * dt;
    let f_n = n * (-params.k_n * delta_n) - u_n * params.d_n;
    let f_t = delta_t * (-params.k_t) - u_t * params.d_t;
    (f_n + f_t, f_t, delta_t)
}

/// Contact between two spheres. `None` when they do not overlap.
pub fn contact_force(
    pi: &Particle,
    pj: &Particle,
    delta_old: Vec3,
    params: &DemParams,
    dt: f64,
) -> Result<Option<ContactResult>> {
    let d = pj.x - pi.x;
    let dist = d.norm();
    if dist == 0.0 || !dist.is_finite() {
        return Err(Error::Degenerate(format!(
            "particles {} and {} have coincident centres",
            pi.id, pj.id
        )));
    }
    let delta_n = pi.r + pj.r - dist;
    if delta_n <= 0.0 {
        return Ok(None);
    }
    let n = d / dist;
    let x_cp = pi.x + n * (pi.r - 0.5 * delta_n);
    let u_rel = pi.velocity_at(x_cp) - pj.velocity_at(x_cp);
    let (f, f_t, delta_t) = spring_dashpot(delta_n, n, u_rel, delta_old, params, dt);
    Ok(Some(ContactResult {
        force_i: f,
        torque_i: (x_cp - pi.x).cross(f_t),
        force_j: -f,
        torque_j: (x_cp - pj.x).cross(-f_t),
        delta_t,
    }))
}

/// Contact between a sphere and a static wall of infinite mass.
pub fn wall_contact_force(
    p: &Particle,
    wall: &Wall,
    delta_old: Vec3,
    params: &DemParams,
    dt: f64,
) -> Option<(Vec3, Vec3, Vec3)> {
    let s = wall.distance(p.x);
    let delta_n = p.r - s;
    if delta_n <= 0.0 {
        return None;
    }
    let n = -wall.normal;
    let x_cp = p.x + n * (p.r - 0.5 * delta_n);
    let (f, f_t, delta_t) = spring_dashpot(delta_n, n, p.velocity_at(x_cp), delta_old, params, dt);
    Some((f, (x_cp - p.x).cross(f_t), delta_t))
}

/// All pairwise and wall interactions of one sub-cycle.
///
/// A pair is evaluated only when its lower-id particle is not a ghost, and a
/// wall contact only for non-ghost particles, so with a consistent ghost set
/// every interaction in the system is computed by exactly one block. Forces
/// go into the `f_new`/`t_new` accumulators of both partners; those of
/// ghosts are partials for the owning block.
pub fn compute_interactions(
    particles: &mut [Particle],
    walls: &[Wall],
    params: &DemParams,
    cells: &LinkedCells,
    history: &mut ContactHistory,
    cycle: u64,
) -> Result<()> {
    let dt = params.dt();
    let lub = params.lubrication > 0.0;
    let mut result: Result<()> = Ok(());
    cells.for_each_pair(|a, b| {
        if result.is_err() {
            return;
        }
        let (i, j) = if particles[a].id < particles[b].id { (a, b) } else { (b, a) };
        if particles[i].ghost {
            return;
        }
        let key = (particles[i].id, Partner::Particle(particles[j].id));
        let old = history.get(key);
        match contact_force(&particles[i], &particles[j], old.map_or(Vec3::ZERO, |h| h.delta_t), params, dt) {
            Err(e) => result = Err(e),
            Ok(Some(c)) => {
                history.new.insert(
                    key,
                    HistoryEntry {
                        delta_t: c.delta_t,
                        t_impact: old.map_or(cycle, |h| h.t_impact),
                    },
                );
                add(&mut particles[i], c.force_i, c.torque_i);
                add(&mut particles[j], c.force_j, c.torque_j);
            }
            Ok(None) => {
                if lub {
                    if let Some(f) = lubrication_correction(&particles[i], &particles[j], params) {
                        add(&mut particles[i], f, Vec3::ZERO);
                        add(&mut particles[j], -f, Vec3::ZERO);
                    }
                }
            }
        }
    });
    result?;
    for p in particles.iter_mut().filter(|p| !p.ghost) {
        for w in walls {
            let key = (p.id, Partner::Wall(w.id));
            let old = history.get(key);
            if let Some((f, t, delta_t)) = wall_contact_force(p, w, old.map_or(Vec3::ZERO, |h| h.delta_t), params, dt) {
                history.new.insert(
                    key,
                    HistoryEntry {
                        delta_t,
                        t_impact: old.map_or(cycle, |h| h.t_impact),
                    },
                );
                add(p, f, t);
            } else if lub {
                if let Some(f) = wall_lubrication_correction(p, w, params) {
                    add(p, f, Vec3::ZERO);
                }
            }
        }
    }
    Ok(())
}

#[inline]
fn add(p: &mut Particle, f: Vec3, t: Vec3) {
    p.f_new.accumulate(f);
    p.t_new.accumulate(t);
}
