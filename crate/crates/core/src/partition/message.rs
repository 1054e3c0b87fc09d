//! Messages exchanged between block workers.

use crate::dem::contact::{HistoryEntry, Partner};
use crate::dem::particle::Particle;
use crate::exact::ExactVec3;
use crate::math::Vec3;
use alloc::vec::Vec;

/// A particle handed to another block, either as its new owner or as a ghost.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleTransfer {
    pub particle: Particle,
    pub owner: usize,
    /// Histories keyed by this particle's id; sent only with ownership.
    pub histories: Vec<((u64, Partner), HistoryEntry)>,
}

/// Wire size of one particle record: id, seven 3-vectors, three scalars,
/// two flags and the owner.
pub const PARTICLE_BYTES: usize = 8 + 8 * (3 * 7 + 3) + 2 + 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// Boundary layer of the sender for lattice direction `dir`: every
    /// population of each cell, x fastest.
    Halo { dir: u8, data: Vec<f64> },
    /// `(id, U, Ω)` of owned particles for blocks holding ghosts of them.
    Velocity(Vec<(u64, Vec3, Vec3)>),
    /// Fluid force and torque partials for particles owned by the receiver.
    Hydro(Vec<(u64, ExactVec3, ExactVec3)>),
    Particles(Vec<ParticleTransfer>),
    /// Copies of histories for pairs whose higher-id partner the receiver owns.
    Histories(Vec<((u64, Partner), HistoryEntry)>),
    /// Contact and lubrication force partials for particles owned by the receiver.
    Forces(Vec<(u64, ExactVec3, ExactVec3)>),
}

impl Payload {
    pub fn tag(&self) -> u8 {
        match self {
            Payload::Halo { dir, .. } => *dir,
            Payload::Velocity(_) => 100,
            Payload::Hydro(_) => 101,
            Payload::Particles(_) => 102,
            Payload::Histories(_) => 103,
            Payload::Forces(_) => 104,
        }
    }

    pub fn is_particle_data(&self) -> bool {
        !matches!(self, Payload::Halo { .. })
    }

    /// Bytes this payload would occupy on the wire.
    pub fn bytes(&self) -> usize {
        const PARTIAL: usize = 8 + 2 * 3 * 16;
        const HISTORY: usize = 8 + 9 + 3 * 8 + 8;
        const PARTICLE: usize = PARTICLE_BYTES;
        match self {
            Payload::Halo { data, .. } => data.len() * 8,
            Payload::Velocity(v) => v.len() * (8 + 6 * 8),
            Payload::Hydro(v) | Payload::Forces(v) => v.len() * PARTIAL,
            Payload::Particles(v) => v.iter().map(|t| PARTICLE + t.histories.len() * HISTORY).sum(),
            Payload::Histories(v) => v.len() * HISTORY,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub src: usize,
    pub dst: usize,
    pub step: u64,
    /// Particle sub-cycle, or `u32::MAX` for fluid-phase messages.
    pub sub_cycle: u32,
    pub payload: Payload,
}
