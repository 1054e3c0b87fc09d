//! Ghost-layered storage for the 19 populations of a block.
//!
//! Structure-of-arrays: population `q` of all cells is contiguous. The ghost
//! layer is one cell wide on every side; interior coordinates run over
//! `0..n` per axis and ghost cells sit at `-1` and `n`.

use crate::lbm::lattice::{CX, CY, CZ, Q};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridLayout {
    /// Interior cells per axis.
    pub dims: [usize; 3],
    sx: usize,
    sxy: usize,
    cells: usize,
}

impl GridLayout {
    pub fn new(dims: [usize; 3]) -> Self {
        let sx = dims[0] + 2;
        let sy = dims[1] + 2;
        let sz = dims[2] + 2;
        GridLayout {
            dims,
            sx,
            sxy: sx * sy,
            cells: sx * sy * sz,
        }
    }

    /// Number of cells including the ghost layer.
    pub fn ghosted_cells(&self) -> usize {
        self.cells
    }

    pub fn interior_cells(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Storage index of the cell at (possibly ghost) coordinates.
    #[inline]
    pub fn index(&self, x: i64, y: i64, z: i64) -> usize {
        debug_assert!(x >= -1 && y >= -1 && z >= -1);
        (z + 1) as usize * self.sxy + (y + 1) as usize * self.sx + (x + 1) as usize
    }

    /// Row-major index over interior cells only.
    #[inline]
    pub fn interior_index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    /// Storage offset from a cell to its neighbour along direction `q`.
    #[inline]
    pub fn offset(&self, q: usize) -> isize {
        CX[q] as isize + CY[q] as isize * self.sx as isize + CZ[q] as isize * self.sxy as isize
    }

    pub fn offsets(&self) -> [isize; Q] {
        core::array::from_fn(|q| self.offset(q))
    }

    pub fn contains_interior(&self, x: i64, y: i64, z: i64) -> bool {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < self.dims[0]
            && (y as usize) < self.dims[1]
            && (z as usize) < self.dims[2]
    }

    /// Visit interior cells of `region` in lexicographic (x fastest) order.
    pub fn for_each_cell(&self, region: Region, mut f: impl FnMut(usize, usize, usize)) {
        let [nx, ny, nz] = self.dims;
        match region {
            Region::All => {
                for z in 0..nz {
                    for y in 0..ny {
                        for x in 0..nx {
                            f(x, y, z);
                        }
                    }
                }
            }
            Region::Inner => {
                if nx < 3 || ny < 3 || nz < 3 {
                    return;
                }
                for z in 1..nz - 1 {
                    for y in 1..ny - 1 {
                        for x in 1..nx - 1 {
                            f(x, y, z);
                        }
                    }
                }
            }
            Region::Outer => {
                for z in 0..nz {
                    for y in 0..ny {
                        let shell = z == 0 || z + 1 == nz || y == 0 || y + 1 == ny;
                        if shell || nx < 3 {
                            for x in 0..nx {
                                f(x, y, z);
                            }
                        } else {
                            f(0, y, z);
                            f(nx - 1, y, z);
                        }
                    }
                }
            }
        }
    }
}

/// Which interior cells a kernel sweep covers.
///
/// `Inner` excludes the outermost layer so it never reads the ghost layer and
/// can run while the halo exchange is still in flight; `Outer` is its
/// complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    All,
    Inner,
    Outer,
}

/// Double-buffered population storage. `src` holds the current state; kernels
/// write `dst` and the owner calls [`PdfField::swap`] once per step.
#[derive(Clone, Debug)]
pub struct PdfField {
    pub layout: GridLayout,
    pub src: Vec<f64>,
    pub dst: Vec<f64>,
}

impl PdfField {
    pub fn new(dims: [usize; 3]) -> Self {
        let layout = GridLayout::new(dims);
        let n = layout.ghosted_cells() * Q;
        PdfField {
            layout,
            src: vec![0.0; n],
            dst: vec![0.0; n],
        }
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.layout.ghosted_cells()
    }

    pub fn swap(&mut self) {
        core::mem::swap(&mut self.src, &mut self.dst);
    }

    /// Populations of one cell in the source buffer.
    pub fn get(&self, x: i64, y: i64, z: i64) -> [f64; Q] {
        let c = self.layout.index(x, y, z);
        let n = self.stride();
        core::array::from_fn(|q| self.src[q * n + c])
    }

    pub fn set(&mut self, x: i64, y: i64, z: i64, f: &[f64; Q]) {
        let c = self.layout.index(x, y, z);
        let n = self.stride();
        for q in 0..Q {
            self.src[q * n + c] = f[q];
        }
    }

    /// Fill every interior cell of the source buffer with `f`.
    pub fn fill_interior(&mut self, f: &[f64; Q]) {
        let layout = self.layout;
        layout.for_each_cell(Region::All, |x, y, z| {
            self.set(x as i64, y as i64, z as i64, f)
        });
    }

    /// Overwrite the ghost layer of the source buffer with `value`.
    pub fn fill_ghosts(&mut self, value: f64) {
        let [nx, ny, nz] = self.layout.dims;
        let n = self.stride();
        for z in -1..=nz as i64 {
            for y in -1..=ny as i64 {
                for x in -1..=nx as i64 {
                    if self.layout.contains_interior(x, y, z) {
                        continue;
                    }
                    let c = self.layout.index(x, y, z);
                    for q in 0..Q {
                        self.src[q * n + c] = value;
                    }
                }
            }
        }
    }

    /// The populations that stream into interior cell `(x, y, z)` on the next
    /// pull: `src[x - c_q][q]`.
    #[inline]
    pub fn gather(&self, x: usize, y: usize, z: usize) -> [f64; Q] {
        let c = self.layout.index(x as i64, y as i64, z as i64);
        let n = self.stride();
        core::array::from_fn(|q| {
            let from = (c as isize - self.layout.offset(q)) as usize;
            self.src[q * n + from]
        })
    }

    pub fn interior_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layout.interior_cells() * Q);
        let n = self.stride();
        self.layout.for_each_cell(Region::All, |x, y, z| {
            let c = self.layout.index(x as i64, y as i64, z as i64);
            for q in 0..Q {
                out.push(self.src[q * n + c]);
            }
        });
        out
    }
}
