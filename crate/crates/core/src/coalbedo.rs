//! The hybrid co-albedo: continuous like Sellers' profile, with an infinite
//! one-sided slope at the ice-formation temperature like Budyko's jump.
//!
//! With `K = (beta_w - beta_i) / (delta ln delta)` the centered profile is
//!
//! ```text
//! beta(u) = beta_i                  u < 0
//!           K u ln u + beta_i       0 <= u <= delta
//!           beta_w                  u > delta
//! ```
//!
//! and its modulus of continuity is `theta(u) = K u ln u`, continued by the
//! constant `theta(1/e)` past `u = 1/e` where the raw formula stops growing.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::osgood::Modulus;

pub const INV_E: f64 = 1.0 / E;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalbedoProfile {
    beta_ice: f64,
    beta_water: f64,
    ramp_width: f64,
    #[serde(default = "default_critical_temperature")]
    critical_temperature: f64,
}

fn default_critical_temperature() -> f64 {
    -10.0
}

impl CoalbedoProfile {
    pub fn new(beta_ice: f64, beta_water: f64, ramp_width: f64, critical_temperature: f64) -> Result<Self> {
        if !(beta_ice > 0.0 && beta_ice < beta_water && beta_water < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "co-albedo requires 0 < beta_ice < beta_water < 1 (got {beta_ice}, {beta_water})"
            )));
        }
        if !(ramp_width > 0.0 && ramp_width <= INV_E) {
            return Err(Error::InvalidConfig(format!(
                "ramp width delta must satisfy 0 < delta <= 1/e (got {ramp_width})"
            )));
        }
        if !critical_temperature.is_finite() {
            return Err(Error::InvalidConfig("critical temperature must be finite".into()));
        }
        Ok(CoalbedoProfile { beta_ice, beta_water, ramp_width, critical_temperature })
    }

    /// Centered profile (`u_c = 0`) with the given plateaus and ramp.
    pub fn centered(beta_ice: f64, beta_water: f64, ramp_width: f64) -> Result<Self> {
        Self::new(beta_ice, beta_water, ramp_width, 0.0)
    }

    pub fn beta_ice(&self) -> f64 {
        self.beta_ice
    }

    pub fn beta_water(&self) -> f64 {
        self.beta_water
    }

    pub fn ramp_width(&self) -> f64 {
        self.ramp_width
    }

    pub fn critical_temperature(&self) -> f64 {
        self.critical_temperature
    }

    /// `K' = (beta_w - beta_i) / (delta ln(1/delta)) > 0`, so that
    /// `theta(u) = K' u ln(1/u)` on `[0, 1/e]`.
    pub fn slope_constant(&self) -> f64 {
        (self.beta_water - self.beta_ice) / (self.ramp_width * (1.0 / self.ramp_width).ln())
    }

    /// `theta(u)` for `u >= 0`.
    pub fn theta(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("theta is defined for u >= 0 (got {u})")));
        }
        Ok(self.theta_unchecked(u))
    }

    #[inline]
    pub(crate) fn theta_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u < INV_E {
            -self.slope_constant() * u * u.ln()
        } else {
            self.slope_constant() * INV_E
        }
    }

    /// Centered co-albedo `beta(u)`.
    #[inline]
    pub fn beta(&self, u: f64) -> f64 {
        if u < 0.0 {
            self.beta_ice
        } else if u <= self.ramp_width {
            if u == 0.0 {
                self.beta_ice
            } else {
                (self.beta_water - self.beta_ice) * (u * u.ln()) / (self.ramp_width * self.ramp_width.ln())
                    + self.beta_ice
            }
        } else {
            self.beta_water
        }
    }

    /// Co-albedo at physical temperature `u`, i.e. `beta(u - u_c)`.
    pub fn beta_at_temperature(&self, u: f64) -> f64 {
        self.beta(u - self.critical_temperature)
    }

    /// `Psi_{v0}(v) = int_{v0}^{v} ds / theta(s)`.
    pub fn psi(&self, v: f64, v0: f64) -> Result<f64> {
        Modulus::psi(self, v0, v)
    }

    /// Inverse of `v -> Psi_{v0}(v)`.
    pub fn psi_inverse(&self, y: f64, v0: f64) -> Result<f64> {
        Modulus::psi_inverse(self, v0, y)
    }
}

impl Modulus for CoalbedoProfile {
    fn value(&self, u: f64) -> f64 {
        self.theta_unchecked(u)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![INV_E]
    }
}

/// Partial Osgood integrals `int_{u_lo}^{1/e} ds / theta(s)` for a decreasing
/// sequence `u_lo -> 0`. They grow without bound like `ln ln (1/u_lo) / K'`.
pub fn osgood_divergence_check(profile: &CoalbedoProfile, lower_limits: &[f64]) -> Result<Vec<f64>> {
    if lower_limits.iter().any(|&u| !(u > 0.0 && u < INV_E)) {
        return Err(Error::Precondition("lower limits must lie in (0, 1/e)".into()));
    }
    if lower_limits.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("lower limits must be strictly decreasing".into()));
    }
    lower_limits.iter().map(|&lo| profile.psi(INV_E, lo)).collect()
}

/// `theta(u) |ln u|`, which tends to zero as `u -> 0` (Dini condition).
pub fn dini_product(profile: &CoalbedoProfile, u: f64) -> Result<f64> {
    Ok(profile.theta(u)? * u.ln().abs())
}
