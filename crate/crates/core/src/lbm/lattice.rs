//! D3Q19 velocity set.
//!
//! Ordering: 0 is the rest population, 1..=6 the face neighbours and 7..=18 the
//! edge neighbours. Opposite directions are stored in adjacent slots.

pub const Q: usize = 19;

pub const CX: [i32; Q] = [0, 1, -1, 0, 0, 0, 0, 1, -1, 1, -1, 1, -1, 1, -1, 0, 0, 0, 0];
pub const CY: [i32; Q] = [0, 0, 0, 1, -1, 0, 0, 1, -1, -1, 1, 0, 0, 0, 0, 1, -1, 1, -1];
pub const CZ: [i32; Q] = [0, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 1, -1, -1, 1, 1, -1, -1, 1];

const W0: f64 = 1.0 / 3.0;
const WF: f64 = 1.0 / 18.0;
const WE: f64 = 1.0 / 36.0;

pub const WEIGHTS: [f64; Q] = [
    W0, WF, WF, WF, WF, WF, WF, WE, WE, WE, WE, WE, WE, WE, WE, WE, WE, WE, WE,
];

pub const OPPOSITE: [usize; Q] = [0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17];

/// Weights as exact rationals `(numerator, denominator)`.
pub const WEIGHTS_RATIONAL: [(i64, i64); Q] = [
    (1, 3),
    (1, 18),
    (1, 18),
    (1, 18),
    (1, 18),
    (1, 18),
    (1, 18),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
];

/// Reference density of the incompressible equilibrium.
pub const RHO0: f64 = 1.0;

pub const CS2: f64 = 1.0 / 3.0;
pub const INV_CS2: f64 = 3.0;
pub const INV_CS4: f64 = 9.0;

/// Velocity set, weights and speed of sound bundled for callers that prefer a
/// value over the module constants.
#[derive(Clone, Copy, Debug)]
pub struct LatticeModel;

impl LatticeModel {
    pub const SPEED_OF_SOUND_SQ: f64 = CS2;

    pub fn velocity(q: usize) -> [i32; 3] {
        [CX[q], CY[q], CZ[q]]
    }

    pub fn weight(q: usize) -> f64 {
        WEIGHTS[q]
    }

    pub fn opposite(q: usize) -> usize {
        OPPOSITE[q]
    }
}
