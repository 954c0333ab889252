//! JSON run configuration.
//!
//! ```json
//! {
//!   "solar_constant": 4.0,
//!   "insolation": { "legendre": [1.0, 0.0, -0.482] },
//!   "emission": { "affine": { "a": 0.0, "b": 2.0 } },
//!   "epsilon": 0.02,
//!   "mu": 1.0,
//!   "coalbedo": { "beta_ice": 0.38, "beta_water": 0.69, "ramp_width": 0.3, "critical_temperature": -10.0 },
//!   "modes": 16,
//!   "dt": 0.00390625,
//!   "steps": 256,
//!   "paths": 64,
//!   "seed": 1,
//!   "initial": { "constant": 0.0 }
//! }
//! ```
//!
//! Optional keys: `nodes` (default `2 * modes`), `reaction`
//! (`"beta"`, `"theta"` or `{"frozen": v}`), `noise_coupling` (`"coalbedo"` or
//! `{"linear": a}`), `drift` (default `true`), `insolation_bounds`
//! (`[S0, S1]`, checked at every node), `truncation` (emission cutoff `K`),
//! and `output` (see [`OutputOptions`]).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coalbedo::CoalbedoProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Insolation {
    /// Coefficients of `P_0, P_1, ...`.
    Legendre(Vec<f64>),
    /// Values at the Gauss nodes, in ascending node order.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emission {
    /// `g(u) = a + b u`.
    Affine { a: f64, b: f64 },
    /// `g(u) = sum_k c_k u^k`.
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reaction {
    /// `beta` in both the drift and the noise factor.
    #[default]
    Beta,
    /// `beta` in the drift, `theta(X^+)` in the noise factor.
    Theta,
    /// A constant co-albedo everywhere.
    Frozen(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCoupling {
    /// `eps Q S(x) r(X)` with `r` chosen by [`Reaction`].
    #[default]
    Coalbedo,
    /// `a X`.
    Linear(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// Uniform temperature.
    Constant(f64),
    /// Temperature as coefficients of `P_0, P_1, ...`.
    Legendre(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    /// Keep every `stride`-th step in CSV and snapshot output.
    pub stride: usize,
    /// Uniform grid size for CSV output; `0` writes at the Gauss nodes.
    pub grid_points: usize,
    /// Also persist the noise increments.
    pub write_noise: bool,
    /// Uniform grid size used by ice-line detection.
    pub ice_grid_points: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { stride: 1, grid_points: 0, write_noise: false, ice_grid_points: 2001 }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub solar_constant: f64,
    pub insolation: Insolation,
    #[serde(default)]
    pub insolation_bounds: Option<[f64; 2]>,
    pub emission: Emission,
    #[serde(default)]
    pub truncation: Option<f64>,
    pub epsilon: f64,
    pub mu: f64,
    pub coalbedo: CoalbedoProfile,
    #[serde(default)]
    pub reaction: Reaction,
    #[serde(default)]
    pub noise_coupling: NoiseCoupling,
    #[serde(default = "yes")]
    pub drift: bool,
    pub modes: usize,
    #[serde(default)]
    pub nodes: Option<usize>,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    pub initial: InitialCondition,
    #[serde(default)]
    pub output: OutputOptions,
}

fn one() -> usize {
    1
}

impl ModelConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn node_count(&self) -> usize {
        self.nodes.unwrap_or(2 * self.modes)
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(serde_json::to_vec(self).expect("config serializes")).into()
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }

    /// Checks every constraint that does not need the quadrature grid.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.solar_constant > 0.0 && self.solar_constant.is_finite()) {
            return bad(format!("solar_constant must be positive (got {})", self.solar_constant));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be >= 0 (got {})", self.epsilon));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive (got {})", self.mu));
        }
        let p = &self.coalbedo;
        CoalbedoProfile::new(p.beta_ice(), p.beta_water(), p.ramp_width(), p.critical_temperature())?;
        if self.modes == 0 {
            return bad("modes must be at least 1".into());
        }
        if self.node_count() < self.modes {
            return Err(Error::InsufficientQuadrature { nodes: self.node_count(), modes: self.modes });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive (got {})", self.dt));
        }
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        match &self.insolation {
            Insolation::Legendre(c) if c.is_empty() => return bad("insolation needs at least one coefficient".into()),
            Insolation::Samples(v) if v.len() != self.node_count() => {
                return bad(format!(
                    "insolation samples must match the {} quadrature nodes (got {})",
                    self.node_count(),
                    v.len()
                ))
            }
            _ => {}
        }
        if let Some([s0, s1]) = self.insolation_bounds {
            if !(s0 > 0.0 && s0 <= s1) {
                return bad(format!("insolation bounds need 0 < S0 <= S1 (got {s0}, {s1})"));
            }
        }
        match &self.emission {
            Emission::Affine { b, .. } if !(*b > 0.0) => {
                return bad(format!("emission slope b must be positive (got {b})"))
            }
            Emission::Polynomial(c) if c.len() < 2 => return bad("polynomial emission needs degree >= 1".into()),
            _ => {}
        }
        if let Some(k) = self.truncation {
            if !(k > 0.0) {
                return bad(format!("truncation must be positive (got {k})"));
            }
        }
        if let Reaction::Frozen(v) = self.reaction {
            if !(v >= p.beta_ice() && v <= p.beta_water()) {
                return bad(format!("frozen co-albedo {v} must lie in [beta_ice, beta_water]"));
            }
        }
        if let InitialCondition::Legendre(c) = &self.initial {
            if c.is_empty() {
                return bad("initial condition needs at least one coefficient".into());
            }
        }
        if self.output.stride == 0 {
            return bad("output.stride must be at least 1".into());
        }
        Ok(())
    }
}
