//! Order-independent accumulation of floating-point contributions.
//!
//! Per-particle force sums gather contributions from many cells and from
//! several blocks. Floating-point addition is not associative, so the result of
//! a plain `f64` sum depends on the block layout. Contributions are instead
//! quantized to a 2^-64 fixed-point grid and summed as `i128`, which is exact
//! and therefore independent of summation order. Quantization truncates toward
//! zero, so `q(-x) == -q(x)` and equal-and-opposite pair forces cancel exactly.

use crate::math::Vec3;
use core::ops::{Add, AddAssign};

const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

#[inline]
fn quantize(v: f64) -> i128 {
    debug_assert!(v.is_finite(), "non-finite contribution {v}");
    (v * SCALE) as i128
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExactSum(i128);

impl ExactSum {
    pub const ZERO: ExactSum = ExactSum(0);

    #[inline]
    pub fn add(&mut self, v: f64) {
        self.0 = self.0.wrapping_add(quantize(v));
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 / SCALE
    }

    pub fn raw(self) -> i128 {
        self.0
    }

    pub fn from_raw(raw: i128) -> Self {
        ExactSum(raw)
    }
}

/// Exact accumulator for a 3-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExactVec3(pub [ExactSum; 3]);

impl ExactVec3 {
    pub const ZERO: ExactVec3 = ExactVec3([ExactSum::ZERO; 3]);

    #[inline]
    pub fn accumulate(&mut self, v: Vec3) {
        self.0[0].add(v.x);
        self.0[1].add(v.y);
        self.0[2].add(v.z);
    }

    #[inline]
    pub fn value(self) -> Vec3 {
        Vec3::new(self.0[0].value(), self.0[1].value(), self.0[2].value())
    }

    pub fn is_zero(&self) -> bool {
        *self == ExactVec3::ZERO
    }
}

impl AddAssign for ExactVec3 {
    #[inline]
    fn add_assign(&mut self, o: ExactVec3) {
        for k in 0..3 {
            self.0[k] = ExactSum(self.0[k].0.wrapping_add(o.0[k].0));
        }
    }
}

impl Add for ExactVec3 {
    type Output = ExactVec3;
    fn add(mut self, o: ExactVec3) -> ExactVec3 {
        self += o;
        self
    }
}
