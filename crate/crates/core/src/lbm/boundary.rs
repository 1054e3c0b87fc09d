//! Domain boundary conditions for the pull scheme.
//!
//! A population that streams into a boundary cell `x` along `c_q` is pulled
//! from the ghost cell `g = x - c_q`. When `g` lies outside a non-periodic
//! domain face, the missing value is written into `src[g][q]` before the
//! sweep, so the kernels never need to know about boundaries.

use crate::error::{Error, Result};
use crate::lbm::field::PdfField;
use crate::lbm::kernel::macroscopic;
use crate::lbm::lattice::{CX, CY, CZ, OPPOSITE, Q, RHO0, WEIGHTS};
use crate::math::Vec3;
use alloc::format;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XMin, Face::XMax, Face::YMin, Face::YMax, Face::ZMin, Face::ZMax];

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    pub fn is_max(self) -> bool {
        self as usize % 2 == 1
    }

    pub fn from_axis(axis: usize, max: bool) -> Face {
        Face::ALL[2 * axis + max as usize]
    }

    /// Unit normal pointing into the domain.
    pub fn inward_normal(self) -> [i64; 3] {
        let mut n = [0; 3];
        n[self.axis()] = if self.is_max() { -1 } else { 1 };
        n
    }

    pub fn name(self) -> &'static str {
        ["x_min", "x_max", "y_min", "y_max", "z_min", "z_max"][self as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceCondition {
    Periodic,
    /// Bounce-back against a resting wall.
    NoSlip,
    /// Bounce-back against a wall moving with the given velocity.
    Velocity(Vec3),
    /// Anti-bounce-back against the given density.
    Pressure(f64),
}

impl FaceCondition {
    /// Higher wins where a link leaves the domain through several faces.
    fn precedence(&self) -> u8 {
        match self {
            FaceCondition::Periodic => 0,
            FaceCondition::Pressure(_) => 1,
            FaceCondition::Velocity(_) => 2,
            FaceCondition::NoSlip => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySpec {
    faces: [FaceCondition; 6],
}

impl BoundarySpec {
    /// Every face must be assigned exactly once; periodic faces come in pairs.
    pub fn new(assignments: &[(Face, FaceCondition)]) -> Result<Self> {
        let mut faces: [Option<FaceCondition>; 6] = [None; 6];
        for &(face, cond) in assignments {
            if faces[face as usize].is_some() {
                return Err(Error::Config(format!("face {} assigned twice", face.name())));
            }
            faces[face as usize] = Some(cond);
        }
        let mut out = [FaceCondition::NoSlip; 6];
        for face in Face::ALL {
            match faces[face as usize] {
                Some(c) => out[face as usize] = c,
                None => {
                    return Err(Error::Config(format!("face {} has no boundary condition", face.name())))
                }
            }
        }
        for axis in 0..3 {
            let lo = out[2 * axis] == FaceCondition::Periodic;
            let hi = out[2 * axis + 1] == FaceCondition::Periodic;
            if lo != hi {
                return Err(Error::Config(format!(
                    "axis {} is periodic on one face only",
                    ["x", "y", "z"][axis]
                )));
            }
        }
        for c in out {
            match c {
                FaceCondition::Pressure(rho) if !(rho > 0.0) || !rho.is_finite() => {
                    return Err(Error::Config(format!("pressure boundary density {rho} must be positive")))
                }
                FaceCondition::Velocity(u) if !u.is_finite() => {
                    return Err(Error::Config("velocity boundary must be finite".into()))
                }
                _ => {}
            }
        }
        Ok(BoundarySpec { faces: out })
    }

    pub fn periodic() -> Self {
        BoundarySpec {
            faces: [FaceCondition::Periodic; 6],
        }
    }

    pub fn condition(&self, face: Face) -> FaceCondition {
        self.faces[face as usize]
    }

    pub fn periodic_axes(&self) -> [bool; 3] {
        core::array::from_fn(|a| self.faces[2 * a] == FaceCondition::Periodic)
    }
}

/// Reconstruct the populations entering the block through non-periodic domain
/// faces. `origin` is the block's first global cell, `domain` the global
/// extent. The ghost layer must already hold the halo from neighbouring
/// blocks; pressure faces read one cell inward for the velocity
/// extrapolation, which may be a halo cell on one-cell-thick blocks.
pub fn apply_boundaries(field: &mut PdfField, origin: [usize; 3], domain: [usize; 3], spec: &BoundarySpec) {
    let dims = field.layout.dims;
    let n = field.stride();
    for face in Face::ALL {
        let cond = spec.condition(face);
        if cond == FaceCondition::Periodic {
            continue;
        }
        let axis = face.axis();
        // does this block touch the face?
        let layer = if face.is_max() {
            if origin[axis] + dims[axis] != domain[axis] {
                continue;
            }
            dims[axis] - 1
        } else {
            if origin[axis] != 0 {
                continue;
            }
            0
        };
        let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
        for i in 0..dims[a1] {
            for j in 0..dims[a2] {
                let mut x = [0i64; 3];
                x[axis] = layer as i64;
                x[a1] = i as i64;
                x[a2] = j as i64;
                for q in 1..Q {
                    let c = [CX[q] as i64, CY[q] as i64, CZ[q] as i64];
                    let g: [i64; 3] = core::array::from_fn(|a| x[a] - c[a]);
                    // only links that leave through this face
                    let leaves_here = if face.is_max() {
                        g[axis] + origin[axis] as i64 >= domain[axis] as i64
                    } else {
                        g[axis] + (origin[axis] as i64) < 0
                    };
                    if !leaves_here {
                        continue;
                    }
                    let winner = governing_face(spec, g, origin, domain);
                    if winner != face {
                        continue;
                    }
                    let xi = field.layout.index(x[0], x[1], x[2]);
                    let gi = field.layout.index(g[0], g[1], g[2]);
                    let bounced = field.src[OPPOSITE[q] * n + xi];
                    let cq = Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64);
                    let value = match cond {
                        FaceCondition::Periodic => unreachable!(),
                        FaceCondition::NoSlip => bounced,
                        FaceCondition::Velocity(u) => bounced + 6.0 * WEIGHTS[q] * RHO0 * cq.dot(u),
                        FaceCondition::Pressure(rho_w) => {
                            let nin = face.inward_normal();
                            let u_x = cell_velocity(field, x);
                            let u_in = cell_velocity(field, core::array::from_fn(|a| x[a] + nin[a]));
                            let uw = u_x + (u_x - u_in) * 0.5;
                            let cu = cq.dot(uw);
                            -bounced + 2.0 * WEIGHTS[q] * (rho_w + RHO0 * (4.5 * cu * cu - 1.5 * uw.norm_sq()))
                        }
                    };
                    field.src[q * n + gi] = value;
                }
            }
        }
    }
}

fn cell_velocity(field: &PdfField, x: [i64; 3]) -> Vec3 {
    macroscopic(&field.get(x[0], x[1], x[2]), Vec3::ZERO).1
}

/// The non-periodic face with the highest precedence among those the ghost
/// cell `g` (block-local) lies outside of. Ties go to the lowest face index.
fn governing_face(spec: &BoundarySpec, g: [i64; 3], origin: [usize; 3], domain: [usize; 3]) -> Face {
    let mut best: Option<(u8, Face)> = None;
    for axis in 0..3 {
        let gg = g[axis] + origin[axis] as i64;
        let face = if gg < 0 {
            Face::from_axis(axis, false)
        } else if gg >= domain[axis] as i64 {
            Face::from_axis(axis, true)
        } else {
            continue;
        };
        let p = spec.condition(face).precedence();
        if p > 0 && best.map_or(true, |(b, _)| p > b) {
            best = Some((p, face));
        }
    }
    best.map(|(_, f)| f).unwrap_or(Face::XMin)
}

/// Fill the ghost layer of a single block that spans the whole domain along
/// every periodic axis. Ghost cells outside a non-periodic face are left as
/// they are.
pub fn wrap_periodic(field: &mut PdfField, periodic: [bool; 3]) {
    let dims = field.layout.dims;
    let n = field.stride();
    let d = dims.map(|v| v as i64);
    for z in -1..=d[2] {
        for y in -1..=d[1] {
            for x in -1..=d[0] {
                let p = [x, y, z];
                if field.layout.contains_interior(x, y, z) {
                    continue;
                }
                let mut from = p;
                let mut ok = true;
                for a in 0..3 {
                    if p[a] < 0 || p[a] >= d[a] {
                        if periodic[a] {
                            from[a] = p[a].rem_euclid(d[a]);
                        } else {
                            ok = false;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let to = field.layout.index(x, y, z);
                let fi = field.layout.index(from[0], from[1], from[2]);
                for q in 0..Q {
                    field.src[q * n + to] = field.src[q * n + fi];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbm::field::Region;
    use crate::lbm::kernel::{equilibrium, lbm_collide_stream};
    use crate::lbm::params::FluidParams;
    use alloc::vec;

    fn spec_with(z: FaceCondition, zmax: FaceCondition, sides: FaceCondition) -> BoundarySpec {
        BoundarySpec::new(&[
            (Face::XMin, sides),
            (Face::XMax, sides),
            (Face::YMin, sides),
            (Face::YMax, sides),
            (Face::ZMin, z),
            (Face::ZMax, zmax),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_inconsistent_specs() {
        let mut faces: vec::Vec<(Face, FaceCondition)> =
            Face::ALL.iter().map(|&f| (f, FaceCondition::NoSlip)).collect();
        assert!(BoundarySpec::new(&faces).is_ok());
        faces.push((Face::XMin, FaceCondition::NoSlip));
        assert!(BoundarySpec::new(&faces).is_err());
        faces.pop();
        faces.pop();
        assert!(BoundarySpec::new(&faces).is_err());
        faces.push((Face::ZMax, FaceCondition::Periodic));
        assert!(BoundarySpec::new(&faces).is_err());
    }

    #[test]
    fn rest_state_is_invariant_in_a_closed_box() {
        let spec = spec_with(FaceCondition::NoSlip, FaceCondition::NoSlip, FaceCondition::NoSlip);
        let p = FluidParams::from_tau(0.8).unwrap();
        let mut f = PdfField::new([4, 5, 6]);
        f.fill_interior(&equilibrium(1.0, Vec3::ZERO));
        let before = f.interior_values();
        for _ in 0..5 {
            apply_boundaries(&mut f, [0; 3], [4, 5, 6], &spec);
            lbm_collide_stream(&mut f, &p, Region::All);
            f.swap();
        }
        let after = f.interior_values();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn inlet_flux_equals_prescribed_velocity() {
        let u_in = 0.01;
        let spec = spec_with(
            FaceCondition::Velocity(Vec3::new(0.0, 0.0, u_in)),
            FaceCondition::Pressure(1.0),
            FaceCondition::Periodic,
        );
        let dims = [6, 5, 8];
        let mut f = PdfField::new(dims);
        f.fill_interior(&equilibrium(1.0, Vec3::ZERO));
        wrap_periodic(&mut f, spec.periodic_axes());
        apply_boundaries(&mut f, [0; 3], dims, &spec);
        // flux through the z = -1/2 plane: incoming (pulled from ghosts) minus
        // outgoing (the bounced populations they replace)
        let mut flux = 0.0;
        let n = f.stride();
        for y in 0..dims[1] as i64 {
            for x in 0..dims[0] as i64 {
                for q in 0..Q {
                    if CZ[q] != 1 {
                        continue;
                    }
                    let g = f.layout.index(x - CX[q] as i64, y - CY[q] as i64, -1);
                    let c = f.layout.index(x, y, 0);
                    flux += f.src[q * n + g] - f.src[OPPOSITE[q] * n + c];
                }
            }
        }
        let area = (dims[0] * dims[1]) as f64;
        assert!((flux - RHO0 * u_in * area).abs() < 1e-10, "flux {flux}");
    }

    #[test]
    fn no_slip_takes_precedence_at_edges() {
        let spec = spec_with(
            FaceCondition::Velocity(Vec3::new(0.0, 0.0, 0.05)),
            FaceCondition::NoSlip,
            FaceCondition::NoSlip,
        );
        let mut f = PdfField::new([3, 3, 3]);
        f.fill_interior(&equilibrium(1.0, Vec3::ZERO));
        apply_boundaries(&mut f, [0; 3], [3, 3, 3], &spec);
        // q = 11 is (1,0,1): from (0,1,0) its ghost is outside x_min and z_min
        let g = f.get(-1, 1, -1);
        assert_eq!(g[11], WEIGHTS[12]);
        // q = 5 is (0,0,1): pure inlet link
        let g = f.get(1, 1, -1);
        assert!((g[5] - (WEIGHTS[6] + 6.0 * WEIGHTS[5] * 0.05)).abs() < 1e-16);
    }

    #[test]
    fn pressure_outlet_holds_density_at_rest() {
        let spec = spec_with(FaceCondition::NoSlip, FaceCondition::Pressure(1.0), FaceCondition::Periodic);
        let p = FluidParams::from_tau(0.9).unwrap();
        let mut f = PdfField::new([3, 3, 6]);
        f.fill_interior(&equilibrium(1.0, Vec3::ZERO));
        for _ in 0..20 {
            wrap_periodic(&mut f, spec.periodic_axes());
            apply_boundaries(&mut f, [0; 3], [3, 3, 6], &spec);
            lbm_collide_stream(&mut f, &p, Region::All);
            f.swap();
        }
        let rho: f64 = f.get(1, 1, 5).iter().sum();
        assert!((rho - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blocks_away_from_the_face_are_untouched() {
        let spec = spec_with(FaceCondition::NoSlip, FaceCondition::NoSlip, FaceCondition::NoSlip);
        let mut f = PdfField::new([2, 2, 2]);
        f.fill_ghosts(f64::NAN);
        // interior block of a 6^3 domain
        apply_boundaries(&mut f, [2, 2, 2], [6, 6, 6], &spec);
        assert!(f.get(-1, -1, -1).iter().all(|v| v.is_nan()));
    }
}
