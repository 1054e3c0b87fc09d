use crate::error::{Error, Result};
use crate::math::Vec3;
use alloc::format;
use core::f64::consts::PI;

/// Contact, lubrication and integration parameters in lattice units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemParams {
    pub k_n: f64,
    pub d_n: f64,
    pub k_t: f64,
    pub d_t: f64,
    /// Sub-cycles per fluid step; the particle step is `1 / sub_cycles`.
    pub sub_cycles: u32,
    pub gravity: Vec3,
    /// Fluid density used for buoyancy and lubrication.
    pub rho_f: f64,
    /// Kinematic fluid viscosity used by the lubrication correction.
    pub nu: f64,
    /// Scale of the lubrication correction; zero disables it.
    pub lubrication: f64,
}

impl Default for DemParams {
    fn default() -> Self {
        DemParams {
            k_n: 0.0,
            d_n: 0.0,
            k_t: 0.0,
            d_t: 0.0,
            sub_cycles: 10,
            gravity: Vec3::ZERO,
            rho_f: 1.0,
            nu: 0.0,
            lubrication: 0.0,
        }
    }
}

impl DemParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(ok(self.k_n) && ok(self.d_n) && ok(self.k_t) && ok(self.d_t)) {
            return Err(Error::Config(format!(
                "contact coefficients must be non-negative: k_n={} d_n={} k_t={} d_t={}",
                self.k_n, self.d_n, self.k_t, self.d_t
            )));
        }
        if self.sub_cycles == 0 {
            return Err(Error::Config("sub_cycles must be at least 1".into()));
        }
        if !self.gravity.is_finite() || !(self.rho_f > 0.0) || !ok(self.nu) || !ok(self.lubrication) {
            return Err(Error::Config("invalid gravity, fluid density, viscosity or lubrication scale".into()));
        }
        Ok(())
    }

    /// Particle time step in fluid time units.
    pub fn dt(&self) -> f64 {
        1.0 / self.sub_cycles as f64
    }

    /// Stiffness and damping giving a contact of duration `t_c` with
    /// restitution `e` for an effective mass `m_eff`. Tangential stiffness is
    /// 2/7 of the normal one, tangential damping equals the normal one.
    pub fn with_collision(mut self, m_eff: f64, t_c: f64, e: f64) -> Result<Self> {
        if !(m_eff > 0.0 && t_c > 0.0 && e > 0.0 && e <= 1.0) {
            return Err(Error::Config(format!(
                "collision needs m_eff > 0, t_c > 0, 0 < e <= 1 (got {m_eff}, {t_c}, {e})"
            )));
        }
        let gamma = -libm::log(e) / t_c;
        let omega_d = PI / t_c;
        self.k_n = m_eff * (omega_d * omega_d + gamma * gamma);
        self.d_n = 2.0 * m_eff * gamma;
        self.k_t = 2.0 / 7.0 * self.k_n;
        self.d_t = self.d_n;
        Ok(self)
    }

    /// Largest gap at which lubrication acts for the effective radius.
    pub fn lubrication_cutoff(r_eff: f64) -> f64 {
        2.0 / 3.0 * r_eff
    }
}

/// Analytic restitution of a linear spring-dashpot contact.
pub fn restitution(k_n: f64, d_n: f64, m_eff: f64) -> f64 {
    let gamma = d_n / (2.0 * m_eff);
    let omega_d = libm::sqrt(k_n / m_eff - gamma * gamma);
    libm::exp(-gamma * PI / omega_d)
}
