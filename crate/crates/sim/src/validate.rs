//! Validation cases with analytic or self-consistent references.

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::error::{SimError, SimResult};
use crate::scenario::build_scenario;
use psmflow_core::dem::params::DemParams;
use psmflow_core::dem::particle::Particle;
use psmflow_core::exact::ExactSum;
use psmflow_core::lbm::boundary::wrap_periodic;
use psmflow_core::lbm::kernel::{equilibrium, lbm_collide_stream};
use psmflow_core::lbm::lattice::{CX, CY, CZ, Q};
use psmflow_core::lbm::{FluidParams, PdfField, Region};
use psmflow_core::partition::{Simulation, SimulationSetup};
use psmflow_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Case {
    Poiseuille,
    Mass,
    Momentum,
    Degeneracy,
    Settling,
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub name: &'static str,
    pub pass: bool,
    /// `(quantity, value, limit)`; the case passes when every value is at
    /// most its limit.
    pub checks: Vec<(String, f64, f64)>,
    pub notes: Vec<String>,
}

impl CaseReport {
    fn new(name: &'static str, checks: Vec<(String, f64, f64)>, notes: Vec<String>) -> Self {
        let pass = checks.iter().all(|(_, v, lim)| v.is_finite() && v <= lim);
        CaseReport { name, pass, checks, notes }
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case {}: {}", self.name, if self.pass { "PASS" } else { "FAIL" })?;
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        for (q, v, lim) in &self.checks {
            writeln!(f, "  {q} = {v:.3e} (limit {lim:.1e})")?;
        }
        Ok(())
    }
}

/// Run a case. `cfg` replaces the preset of the poiseuille and settling
/// cases; the other cases are fixed.
pub fn run_case(case: Case, cfg: Option<ScenarioConfig>, log: &mut dyn Write) -> SimResult<CaseReport> {
    let or_preset = |kind| cfg.clone().unwrap_or_else(|| ScenarioConfig::preset(kind));
    match case {
        Case::Poiseuille => poiseuille(&or_preset(ScenarioKind::Poiseuille)).map(|r| r.report()),
        Case::Mass => mass_conservation([32, 32, 32], 1000, 7).map(|r| r.report()),
        Case::Momentum => momentum_bookkeeping(100).map(|r| r.report()),
        Case::Degeneracy => degeneracy([16, 16, 16], 100, 11).map(|r| r.report()),
        Case::Settling => settling(&or_preset(ScenarioKind::SettlingSphere), log).map(|r| r.report()),
    }
}

fn sum_mass(pdfs: &[f64]) -> f64 {
    let mut s = ExactSum::ZERO;
    pdfs.iter().for_each(|&v| s.add(v));
    s.value()
}

/// Momentum of the stored populations, summed exactly.
pub fn fluid_momentum(sim: &Simulation) -> [ExactSum; 3] {
    let mut m = [ExactSum::ZERO; 3];
    for (i, v) in sim.global_pdfs().iter().enumerate() {
        let q = i % Q;
        for (a, c) in [CX[q], CY[q], CZ[q]].into_iter().enumerate() {
            match c {
                1 => m[a].add(*v),
                -1 => m[a].add(-*v),
                _ => {}
            }
        }
    }
    m
}

pub struct PoiseuilleResult {
    pub u_center: f64,
    pub u_analytic: f64,
    pub profile_rms: f64,
}

impl PoiseuilleResult {
    pub fn rel_error(&self) -> f64 {
        (self.u_center - self.u_analytic).abs() / self.u_analytic
    }

    fn report(&self) -> CaseReport {
        CaseReport::new(
            "poiseuille",
            vec![("relative centreline error".into(), self.rel_error(), 0.01)],
            vec![format!(
                "u_center = {:.6e}, analytic = {:.6e}, profile rms = {:.3e}",
                self.u_center, self.u_analytic, self.profile_rms
            )],
        )
    }
}

/// Force-driven channel between no-slip walls normal to y. The walls sit
/// half a cell outside the first and last fluid cells.
pub fn poiseuille(cfg: &ScenarioConfig) -> SimResult<PoiseuilleResult> {
    let scenario = build_scenario(cfg)?;
    let mut sim = Simulation::new(scenario.setup)?;
    sim.run(cfg.steps, &mut psmflow_core::partition::Sequential, &psmflow_core::perf::NullClock)?;
    let h = cfg.domain.cells[1] as f64;
    let force = cfg.fluid.force[0];
    let nu = cfg.nu();
    let exact = |y: f64| force / (2.0 * nu) * y * (h - y);
    let mut u_center = 0.0f64;
    let mut sq = 0.0;
    for y in 0..cfg.domain.cells[1] {
        let u = sim.macroscopic_at(0, y, 0).1.x;
        u_center = u_center.max(u);
        sq += (u - exact(y as f64 + 0.5)).powi(2);
    }
    Ok(PoiseuilleResult {
        u_center,
        u_analytic: force * h * h / (8.0 * nu),
        profile_rms: (sq / h).sqrt() / exact(h / 2.0),
    })
}

fn perturbed_state(sim: &mut Simulation, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sim.domain();
    for z in 0..d[2] {
        for y in 0..d[1] {
            for x in 0..d[0] {
                let rho = 1.0 + rng.gen_range(-0.01..0.01);
                let u = Vec3::new(
                    rng.gen_range(-0.02..0.02),
                    rng.gen_range(-0.02..0.02),
                    rng.gen_range(-0.02..0.02),
                );
                sim.set_pdfs(x, y, z, &equilibrium(rho, u));
            }
        }
    }
}

pub struct MassResult {
    pub initial: f64,
    pub max_rel_drift: f64,
}

impl MassResult {
    fn report(&self) -> CaseReport {
        CaseReport::new(
            "mass",
            vec![("max relative mass drift".into(), self.max_rel_drift, 1e-10)],
            vec![format!("initial mass = {:.12e}", self.initial)],
        )
    }
}

/// Periodic, force-free fluid from a random state; mass is checked every step.
pub fn mass_conservation(domain: [usize; 3], steps: u64, seed: u64) -> SimResult<MassResult> {
    let setup = SimulationSetup::new(domain, FluidParams::from_tau(0.8)?, DemParams::default());
    let mut sim = Simulation::new(setup)?;
    perturbed_state(&mut sim, seed);
    let initial = sum_mass(&sim.global_pdfs());
    let mut max_rel_drift = 0.0f64;
    for _ in 0..steps {
        sim.step()?;
        let m = sum_mass(&sim.global_pdfs());
        max_rel_drift = max_rel_drift.max(((m - initial) / initial).abs());
    }
    Ok(MassResult { initial, max_rel_drift })
}

pub struct MomentumResult {
    /// Per step: fluid momentum change, reported fluid-on-particle force.
    pub steps: Vec<(Vec3, Vec3)>,
}

impl MomentumResult {
    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|(dp, f)| (*dp + *f).norm()).fold(0.0, f64::max)
    }

    fn report(&self) -> CaseReport {
        let peak = self.steps.iter().map(|(_, f)| f.norm()).fold(0.0, f64::max);
        CaseReport::new(
            "momentum",
            vec![("max |dP_fluid + F_fp|".into(), self.max_residual(), 1e-10)],
            vec![format!("{} steps, peak |F_fp| = {peak:.3e}", self.steps.len())],
        )
    }
}

/// Uniform flow started impulsively around a held sphere in a periodic box.
pub fn momentum_bookkeeping(steps: u64) -> SimResult<MomentumResult> {
    let fluid = FluidParams::from_tau(0.8)?;
    let mut setup = SimulationSetup::new([32, 32, 32], fluid, DemParams::default());
    setup.initial_velocity = Vec3::new(0.02, 0.005, 0.0);
    setup.sub_blocks = 2;
    setup.particles = vec![Particle::new(0, Vec3::new(15.7, 16.2, 16.1), 6.0, 2.0).fixed()];
    let mut sim = Simulation::new(setup)?;
    let value = |m: [ExactSum; 3]| Vec3::new(m[0].value(), m[1].value(), m[2].value());
    let mut before = fluid_momentum(&sim);
    let mut out = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        sim.step()?;
        let after = fluid_momentum(&sim);
        let dp: [ExactSum; 3] = std::array::from_fn(|a| ExactSum::from_raw(after[a].raw() - before[a].raw()));
        let f = sim.particles().iter().fold(Vec3::ZERO, |acc, p| acc + p.f_hyd);
        out.push((value(dp), f));
        before = after;
    }
    Ok(MomentumResult { steps: out })
}

pub struct DegeneracyResult {
    pub cells: usize,
    pub mismatches: usize,
}

impl DegeneracyResult {
    fn report(&self) -> CaseReport {
        CaseReport::new(
            "degeneracy",
            vec![("differing populations".into(), self.mismatches as f64, 0.0)],
            vec![format!("{} cells compared bitwise", self.cells)],
        )
    }
}

/// A coupled run without particles against the bare lattice Boltzmann kernel.
pub fn degeneracy(domain: [usize; 3], steps: u64, seed: u64) -> SimResult<DegeneracyResult> {
    let fluid = FluidParams::from_tau(0.7)?.with_force(Vec3::new(1e-5, 0.0, -2e-6));
    let mut setup = SimulationSetup::new(domain, fluid, DemParams::default());
    setup.blocks = [2, 1, 2];
    let mut sim = Simulation::new(setup)?;
    perturbed_state(&mut sim, seed);
    let mut field = PdfField::new(domain);
    for z in 0..domain[2] {
        for y in 0..domain[1] {
            for x in 0..domain[0] {
                field.set(x as i64, y as i64, z as i64, &sim.pdfs(x, y, z));
            }
        }
    }
    sim.run(steps, &mut psmflow_core::partition::Sequential, &psmflow_core::perf::NullClock)?;
    for _ in 0..steps {
        wrap_periodic(&mut field, [true; 3]);
        lbm_collide_stream(&mut field, &fluid, Region::All);
        field.swap();
    }
    let a = sim.global_pdfs();
    let b = field.interior_values();
    let mismatches = a.iter().zip(&b).filter(|(x, y)| x.to_bits() != y.to_bits()).count();
    Ok(DegeneracyResult {
        cells: a.len() / Q,
        mismatches,
    })
}

/// Particle Reynolds number of a sphere settling at its terminal speed
/// according to the Schiller–Naumann drag law, `C_D = 24/Re (1 + 0.15 Re^0.687)`.
/// The force balance reads `C_D Re² = 4/3 Ga²`.
pub fn schiller_naumann_re(galileo: f64) -> f64 {
    let target = 4.0 / 3.0 * galileo * galileo;
    let g = |re: f64| 24.0 * re * (1.0 + 0.15 * re.powf(0.687)) - target;
    let (mut lo, mut hi) = (0.0, target / 24.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub struct SettlingResult {
    pub galileo: f64,
    pub diameter: f64,
    pub nu: f64,
    /// Vertical particle velocity after each fluid step.
    pub velocity: Vec<f64>,
    pub final_height: f64,
}

impl SettlingResult {
    pub fn terminal_speed(&self) -> f64 {
        self.velocity.last().map_or(f64::NAN, |u| u.abs())
    }

    pub fn reynolds(&self) -> f64 {
        self.terminal_speed() * self.diameter / self.nu
    }

    /// Relative change of the speed over the final fifth of the run.
    pub fn drift(&self) -> f64 {
        let n = self.velocity.len();
        if n < 5 {
            return f64::NAN;
        }
        let start = self.velocity[n - n / 5 - 1].abs();
        (self.terminal_speed() - start).abs() / self.terminal_speed()
    }

    pub fn reference_reynolds(&self) -> f64 {
        schiller_naumann_re(self.galileo)
    }

    pub fn rel_error(&self) -> f64 {
        (self.reynolds() - self.reference_reynolds()).abs() / self.reference_reynolds()
    }

    fn report(&self) -> CaseReport {
        CaseReport::new(
            "settling",
            vec![
                ("terminal drift over final 20%".into(), self.drift(), 0.01),
                ("relative Re_p error vs Schiller-Naumann".into(), self.rel_error(), 0.15),
            ],
            vec![format!(
                "Ga = {:.3}, Re_p = {:.4}, reference Re_p = {:.4}, final height = {:.2}",
                self.galileo,
                self.reynolds(),
                self.reference_reynolds(),
                self.final_height
            )],
        )
    }
}

/// Release a single sphere from rest and record its vertical speed.
pub fn settling(cfg: &ScenarioConfig, log: &mut dyn Write) -> SimResult<SettlingResult> {
    let scenario = build_scenario(cfg)?;
    let p0 = scenario
        .setup
        .particles
        .first()
        .cloned()
        .ok_or_else(|| SimError::config("settling case needs one particle"))?;
    let nu = cfg.nu();
    let diameter = 2.0 * p0.r;
    let gravity = scenario.setup.dem.gravity.norm();
    let galileo = crate::units::galileo(gravity, cfg.particles.density_ratio, diameter, nu);
    let mut sim = Simulation::new(scenario.setup)?;
    let mut velocity = Vec::with_capacity(cfg.steps as usize);
    let tick = (cfg.steps / 20).max(1);
    for s in 1..=cfg.steps {
        sim.step()?;
        let p = &sim.particles()[0];
        velocity.push(p.u.z);
        if s % tick == 0 {
            let _ = writeln!(log, "settling step {s}/{}: z = {:.3}, u_z = {:.6e}", cfg.steps, p.x.z, p.u.z);
        }
    }
    let final_height = sim.particles()[0].x.z;
    Ok(SettlingResult {
        galileo,
        diameter,
        nu,
        velocity,
        final_height,
    })
}
