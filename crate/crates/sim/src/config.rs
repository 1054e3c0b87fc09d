//! Scenario files: TOML, strict keys, defaults from the scenario kind.
//!
//! Every key of [`ScenarioConfig`] may be given; keys left out take the value
//! of the preset named by `kind` (`custom` when absent). Unknown keys are
//! rejected. All violations are reported together.

use crate::error::{SimError, SimResult};
use psmflow_core::lbm::boundary::{BoundarySpec, Face, FaceCondition};
use psmflow_core::Vec3;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FluidizedBedDilute,
    FluidizedBedDense,
    SettlingSphere,
    Poiseuille,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::FluidizedBedDilute,
        ScenarioKind::FluidizedBedDense,
        ScenarioKind::SettlingSphere,
        ScenarioKind::Poiseuille,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FluidizedBedDilute => "fluidized_bed_dilute",
            ScenarioKind::FluidizedBedDense => "fluidized_bed_dense",
            ScenarioKind::SettlingSphere => "settling_sphere",
            ScenarioKind::Poiseuille => "poiseuille",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Fluid steps to run.
    pub steps: u64,
    pub seed: u64,
    pub domain: DomainConfig,
    pub fluid: FluidConfig,
    pub boundaries: BoundaryConfig,
    pub particles: ParticleConfig,
    pub dem: DemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physics: Option<PhysicsConfig>,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub cells: [usize; 3],
    pub blocks: [usize; 3],
    /// Registry sub-blocks per axis and block.
    pub sub_blocks: usize,
    /// Threads; blocks are shared out among them.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConfig {
    /// Exactly one of `tau` and `nu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub force: [f64; 3],
    pub initial_velocity: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Periodic,
    NoSlip,
    Velocity([f64; 3]),
    Pressure(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub x_min: BoundaryKind,
    pub x_max: BoundaryKind,
    pub y_min: BoundaryKind,
    pub y_max: BoundaryKind,
    pub z_min: BoundaryKind,
    pub z_max: BoundaryKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    None,
    /// One particle at `positions[0]`, or centred in x and y at 3/4 height.
    Single,
    /// Face-centred cubic lattice with jitter inside `region`, `count`
    /// sites picked evenly from the bottom up.
    Lattice,
    /// Exactly the listed `positions`.
    List,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub placement: Placement,
    pub count: usize,
    pub radius: f64,
    pub density_ratio: f64,
    /// Nearest-neighbour distance of the lattice in diameters.
    pub spacing: f64,
    /// Largest random displacement per axis, in cells.
    pub jitter: f64,
    /// Placement region as fractions of the domain.
    pub region_lo: [f64; 3],
    pub region_hi: [f64; 3],
    /// Fluid-step equivalents of dry settling before coupling starts.
    pub settle_steps: u64,
    pub min_diameter: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemConfig {
    pub sub_cycles: u32,
    /// Duration of a binary collision in fluid steps.
    pub collision_time: f64,
    pub restitution: f64,
    pub gravity: [f64; 3],
    /// Scale of the lubrication correction, 0 to disable.
    pub lubrication: f64,
    /// Install planes on all six domain faces.
    pub walls: bool,
}

/// Dimensionless groups that override gravity and inflow speeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub galileo: f64,
    pub reynolds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// Steps between dumps; 0 writes the final state only.
    pub cadence: u64,
    pub grid: bool,
    pub particles: bool,
    pub series: bool,
}

const TAU: f64 = 0.8;

fn bed(kind: ScenarioKind) -> ScenarioConfig {
    let dense = kind == ScenarioKind::FluidizedBedDense;
    ScenarioConfig {
        kind,
        steps: 100,
        seed: 42,
        domain: DomainConfig {
            cells: [126, 50, 200],
            blocks: [1, 1, 1],
            sub_blocks: 8,
            workers: 1,
        },
        fluid: FluidConfig {
            tau: Some(TAU),
            nu: None,
            force: [0.0; 3],
            initial_velocity: [0.0; 3],
        },
        boundaries: BoundaryConfig {
            x_min: BoundaryKind::NoSlip,
            x_max: BoundaryKind::NoSlip,
            y_min: BoundaryKind::NoSlip,
            y_max: BoundaryKind::NoSlip,
            z_min: BoundaryKind::Velocity([0.0, 0.0, 0.005]),
            z_max: BoundaryKind::Pressure(1.0),
        },
        particles: ParticleConfig {
            placement: Placement::Lattice,
            count: if dense { 126 } else { 10 },
            radius: 10.0,
            density_ratio: 1.1,
            spacing: if dense { 1.05 } else { 2.0 },
            jitter: if dense { 0.02 } else { 2.0 },
            region_lo: [0.0; 3],
            region_hi: [1.0; 3],
            settle_steps: if dense { 4000 } else { 0 },
            min_diameter: 10.0,
            positions: Vec::new(),
        },
        dem: DemConfig {
            sub_cycles: 10,
            collision_time: 5.0,
            restitution: 0.9,
            gravity: [0.0, 0.0, -0.7921 / 800.0],
            lubrication: 1.0,
            walls: true,
        },
        physics: Some(PhysicsConfig {
            galileo: 8.9,
            reynolds: 1.0,
        }),
        output: OutputConfig {
            dir: format!("out/{}", kind.name()),
            cadence: 0,
            grid: false,
            particles: true,
            series: true,
        },
    }
}

impl ScenarioConfig {
    pub fn preset(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::FluidizedBedDilute | ScenarioKind::FluidizedBedDense => bed(kind),
            ScenarioKind::SettlingSphere => {
                let mut c = bed(kind);
                c.steps = 1700;
                c.domain.cells = [96, 96, 224];
                c.boundaries = BoundaryConfig {
                    x_min: BoundaryKind::Periodic,
                    x_max: BoundaryKind::Periodic,
                    y_min: BoundaryKind::Periodic,
                    y_max: BoundaryKind::Periodic,
                    z_min: BoundaryKind::NoSlip,
                    z_max: BoundaryKind::NoSlip,
                };
                c.particles.placement = Placement::Single;
                c.particles.count = 1;
                c.particles.positions = vec![[48.0, 48.0, 190.0]];
                c.particles.settle_steps = 0;
                c.fluid.tau = Some(2.0);
                c.dem.walls = true;
                c.physics = Some(PhysicsConfig {
                    galileo: 8.9,
                    reynolds: 0.0,
                });
                c.output.particles = false;
                c
            }
            ScenarioKind::Poiseuille | ScenarioKind::Custom => {
                let poiseuille = kind == ScenarioKind::Poiseuille;
                let mut c = bed(kind);
                c.steps = if poiseuille { 10_000 } else { 100 };
                c.domain.cells = if poiseuille { [2, 32, 2] } else { [32, 32, 32] };
                c.domain.sub_blocks = 1;
                c.fluid.force = if poiseuille { [1e-6, 0.0, 0.0] } else { [0.0; 3] };
                c.boundaries = BoundaryConfig {
                    x_min: BoundaryKind::Periodic,
                    x_max: BoundaryKind::Periodic,
                    y_min: if poiseuille { BoundaryKind::NoSlip } else { BoundaryKind::Periodic },
                    y_max: if poiseuille { BoundaryKind::NoSlip } else { BoundaryKind::Periodic },
                    z_min: BoundaryKind::Periodic,
                    z_max: BoundaryKind::Periodic,
                };
                c.particles.placement = Placement::None;
                c.particles.count = 0;
                c.particles.settle_steps = 0;
                c.dem.gravity = [0.0; 3];
                c.dem.walls = false;
                c.physics = None;
                c.output.grid = true;
                c.output.particles = false;
                c
            }
        }
    }

    /// Parse TOML text, fill defaults from the preset and validate.
    pub fn from_toml_str(text: &str) -> SimResult<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| SimError::config(format!("unparseable TOML: {e}")))?;
        let kind = match user.get("kind") {
            None => ScenarioKind::Custom,
            Some(v) => v
                .clone()
                .try_into::<ScenarioKind>()
                .map_err(|e| SimError::config(format!("kind: {e}")))?,
        };
        let mut base = toml::Table::try_from(ScenarioConfig::preset(kind)).expect("presets serialize");
        // tau and nu are alternatives; naming one drops the preset's other
        if let Some(toml::Value::Table(f)) = user.get("fluid") {
            if let Some(toml::Value::Table(bf)) = base.get_mut("fluid") {
                if f.contains_key("nu") {
                    bf.remove("tau");
                }
                if f.contains_key("tau") {
                    bf.remove("nu");
                }
            }
        }
        merge(&mut base, user);
        let cfg: ScenarioConfig = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| SimError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn tau(&self) -> f64 {
        match (self.fluid.tau, self.fluid.nu) {
            (Some(t), _) => t,
            (None, Some(nu)) => 3.0 * nu + 0.5,
            (None, None) => f64::NAN,
        }
    }

    pub fn nu(&self) -> f64 {
        (self.tau() - 0.5) / 3.0
    }

    pub fn boundary_spec(&self) -> Result<BoundarySpec, String> {
        let b = &self.boundaries;
        let conv = |k: BoundaryKind| match k {
            BoundaryKind::Periodic => FaceCondition::Periodic,
            BoundaryKind::NoSlip => FaceCondition::NoSlip,
            BoundaryKind::Velocity(u) => FaceCondition::Velocity(Vec3::from_array(u)),
            BoundaryKind::Pressure(rho) => FaceCondition::Pressure(rho),
        };
        BoundarySpec::new(&[
            (Face::XMin, conv(b.x_min)),
            (Face::XMax, conv(b.x_max)),
            (Face::YMin, conv(b.y_min)),
            (Face::YMax, conv(b.y_max)),
            (Face::ZMin, conv(b.z_min)),
            (Face::ZMax, conv(b.z_max)),
        ])
        .map_err(|e| e.to_string())
    }

    /// Check every invariant; all violations are returned at once.
    pub fn validate(&self) -> SimResult<()> {
        let mut bad: Vec<String> = Vec::new();
        let d = &self.domain;
        for a in 0..3 {
            if d.cells[a] == 0 || d.blocks[a] == 0 || d.cells[a] % d.blocks[a] != 0 {
                bad.push(format!(
                    "domain.blocks {:?} must divide domain.cells {:?} with no zero entries",
                    d.blocks, d.cells
                ));
                break;
            }
        }
        let nblocks = d.blocks.iter().product::<usize>();
        if self.seed > i64::MAX as u64 {
            bad.push(format!("seed = {} must not exceed {} (TOML integers are signed)", self.seed, i64::MAX));
        }
        if d.sub_blocks == 0 {
            bad.push("domain.sub_blocks must be at least 1".into());
        }
        if d.workers == 0 || d.workers > nblocks.max(1) {
            bad.push(format!("domain.workers = {} must lie in 1..={nblocks}", d.workers));
        }

        match (self.fluid.tau, self.fluid.nu) {
            (Some(_), Some(_)) | (None, None) => bad.push("fluid: set exactly one of tau and nu".into()),
            (Some(t), None) if !(t > 0.5) => bad.push(format!("fluid.tau = {t} must exceed 0.5 (positive viscosity)")),
            (None, Some(nu)) if !(nu > 0.0) => bad.push(format!("fluid.nu = {nu} must be positive")),
            _ => {}
        }
        if !self.fluid.force.iter().all(|v| v.is_finite()) {
            bad.push("fluid.force must be finite".into());
        }
        if !(Vec3::from_array(self.fluid.initial_velocity).norm() < 0.57) {
            bad.push("fluid.initial_velocity must be below 0.57 in magnitude".into());
        }
        if let Err(e) = self.boundary_spec() {
            bad.push(format!("boundaries: {e}"));
        }

        let p = &self.particles;
        let with_particles = p.placement != Placement::None;
        if with_particles {
            if !(2.0 * p.radius >= p.min_diameter) {
                bad.push(format!(
                    "particles.radius = {} gives fewer than min_diameter = {} cells per diameter",
                    p.radius, p.min_diameter
                ));
            }
            if !(p.min_diameter >= 2.0 * psmflow_core::psm::mapping::MIN_RADIUS) {
                bad.push("particles.min_diameter is below the mapping limit".into());
            }
            if !(p.density_ratio > 0.0) {
                bad.push(format!("particles.density_ratio = {} must be positive", p.density_ratio));
            }
            if p.count == 0 {
                bad.push("particles.count must be positive unless placement = \"none\"".into());
            }
        }
        match p.placement {
            Placement::Single if p.count != 1 || p.positions.len() > 1 => {
                bad.push("placement \"single\" needs count = 1 and at most one position".into())
            }
            Placement::List if p.positions.len() != p.count => bad.push(format!(
                "placement \"list\" needs count ({}) equal to the number of positions ({})",
                p.count,
                p.positions.len()
            )),
            Placement::None if p.count != 0 => bad.push("placement \"none\" needs count = 0".into()),
            _ => {}
        }
        if p.placement == Placement::Lattice {
            if !(p.spacing >= 1.0) {
                bad.push(format!("particles.spacing = {} must be at least one diameter", p.spacing));
            }
            if !(p.jitter >= 0.0) {
                bad.push("particles.jitter must not be negative".into());
            }
            for a in 0..3 {
                if !(0.0 <= p.region_lo[a] && p.region_lo[a] < p.region_hi[a] && p.region_hi[a] <= 1.0) {
                    bad.push("particles.region_lo/region_hi must satisfy 0 <= lo < hi <= 1 per axis".into());
                    break;
                }
            }
        }
        if p.positions.iter().any(|x| x.iter().any(|v| !v.is_finite())) {
            bad.push("particles.positions must be finite".into());
        }

        let m = &self.dem;
        if m.sub_cycles == 0 {
            bad.push("dem.sub_cycles must be at least 1".into());
        }
        if !(m.collision_time > 0.0) {
            bad.push(format!("dem.collision_time = {} must be positive", m.collision_time));
        }
        if !(m.restitution > 0.0 && m.restitution <= 1.0) {
            bad.push(format!("dem.restitution = {} must lie in (0, 1]", m.restitution));
        }
        if !(m.lubrication >= 0.0) {
            bad.push("dem.lubrication must not be negative".into());
        }
        if !m.gravity.iter().all(|v| v.is_finite()) {
            bad.push("dem.gravity must be finite".into());
        }
        if let Some(ph) = &self.physics {
            if !(ph.galileo > 0.0) {
                bad.push(format!("physics.galileo = {} must be positive", ph.galileo));
            }
            if !(ph.reynolds >= 0.0) {
                bad.push(format!("physics.reynolds = {} must not be negative", ph.reynolds));
            }
            if !with_particles || !(p.density_ratio > 1.0) {
                bad.push("physics needs particles heavier than the fluid (density_ratio > 1)".into());
            }
        }
        if self.output.dir.is_empty() {
            bad.push("output.dir must not be empty".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SimError::Config(bad))
        }
    }
}

fn merge(base: &mut toml::Table, user: toml::Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_poiseuille_fills_defaults() {
        let c = ScenarioConfig::from_toml_str("kind = \"poiseuille\"").unwrap();
        assert_eq!(c, ScenarioConfig::preset(ScenarioKind::Poiseuille));
        assert_eq!(c.tau(), 0.8);
    }

    #[test]
    fn low_tau_is_rejected() {
        let e = ScenarioConfig::from_toml_str("kind = \"poiseuille\"\n[fluid]\ntau = 0.4").unwrap_err();
        assert!(e.to_string().contains("tau"), "{e}");
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn dense_preset_values() {
        let c = ScenarioConfig::from_toml_str("kind = \"fluidized_bed_dense\"").unwrap();
        assert_eq!(c.particles.radius, 10.0);
        assert_eq!(c.particles.density_ratio, 1.1);
        assert_eq!(c.dem.sub_cycles, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioConfig::from_toml_str("kind = \"custom\"\nstepz = 3").is_err());
        assert!(ScenarioConfig::from_toml_str("[fluid]\nviscosity = 0.1").is_err());
    }

    #[test]
    fn all_violations_are_listed() {
        let text = "[fluid]\ntau = 0.3\n[dem]\nsub_cycles = 0\nrestitution = 2.0\n[domain]\nblocks = [3, 1, 1]";
        match ScenarioConfig::from_toml_str(text).unwrap_err() {
            SimError::Config(v) => assert_eq!(v.len(), 4, "{v:?}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn nu_replaces_preset_tau() {
        let c = ScenarioConfig::from_toml_str("kind = \"poiseuille\"\n[fluid]\nnu = 0.05").unwrap();
        assert_eq!(c.fluid.tau, None);
        assert!((c.tau() - 0.65).abs() < 1e-15);
    }

    #[test]
    fn boundary_tables() {
        let c = ScenarioConfig::from_toml_str(
            "[boundaries]\nz_min = { velocity = [0.0, 0.0, 0.01] }\nz_max = { pressure = 1.0 }",
        )
        .unwrap();
        assert_eq!(c.boundaries.z_min, BoundaryKind::Velocity([0.0, 0.0, 0.01]));
        let e = ScenarioConfig::from_toml_str("[boundaries]\nz_min = \"no_slip\"").unwrap_err();
        assert!(e.to_string().contains("periodic"), "{e}");
    }

    #[test]
    fn seed_must_fit_a_toml_integer() {
        let mut c = ScenarioConfig::preset(ScenarioKind::Custom);
        c.seed = u64::MAX;
        assert!(c.validate().unwrap_err().to_string().contains("seed"));
        c.seed = i64::MAX as u64;
        c.validate().unwrap();
    }

    #[test]
    fn presets_round_trip() {
        for kind in ScenarioKind::ALL {
            let c = ScenarioConfig::preset(kind);
            c.validate().unwrap();
            let back = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
            assert_eq!(back, c, "{}", kind.name());
        }
    }
}
