//! Right-hand side, semigroup and exponential Euler stepper.
//!
//! The unknown is the shifted temperature `X = u - u_c`, for which
//!
//! ```text
//! dX + A_mu X dt = F(X) dt + B(X) dW
//! F(X) = mu X - g(X + u_c) + Q S(x) beta(X)
//! B(X) = eps Q S(x) beta(X)
//! ```
//!
//! Nonlinear terms are evaluated at the Gauss nodes and projected back onto
//! the retained modes. One step is
//!
//! ```text
//! X_{k+1} = S(dt) (X_k + dt F(X_k) + B(X_k) dW_k)
//! ```
//!
//! with `S(t) = exp(-A_mu t)` applied exactly mode by mode.

use crate::coalbedo::CoalbedoProfile;
use crate::config::{Emission, InitialCondition, Insolation, ModelConfig, NoiseCoupling, Reaction};
use crate::error::{Error, Result};
use crate::legendre::{shifted_eigenvalue, SpectralBasis, SpectralField};
use crate::noise::{NoiseConfig, NoisePath};
use crate::quad::solve_monotone;

/// `a_n -> exp(-(n (n + 1) + mu) tau) a_n`.
pub fn semigroup_apply(field: &SpectralField, tau: f64, mu: f64) -> Result<SpectralField> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("semigroup time must be >= 0 (got {tau})")));
    }
    Ok(SpectralField::new(
        field
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, a)| (-shifted_eigenvalue(n, mu) * tau).exp() * a)
            .collect(),
    ))
}

impl Emission {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Emission::Affine { a, b } => a + b * u,
            Emission::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Emission::Affine { b, .. } => *b,
            Emission::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * u + k as f64 * ck),
        }
    }

    /// `g^{-1}(y)` for an increasing law.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        match self {
            Emission::Affine { a, b } => Ok((y - a) / b),
            Emission::Polynomial(_) => {
                let (mut lo, mut hi) = (-1.0, 1.0);
                while self.eval(lo) > y {
                    lo *= 2.0;
                    if lo < -1e12 {
                        return Err(Error::Domain(format!("emission law does not reach {y} from above")));
                    }
                }
                while self.eval(hi) < y {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return Err(Error::Domain(format!("emission law does not reach {y}")));
                    }
                }
                Ok(solve_monotone(|u| self.eval(u), |u| self.derivative(u), y, lo, hi, 1e-13))
            }
        }
    }

    fn is_affine(&self) -> bool {
        matches!(self, Emission::Affine { .. }) || matches!(self, Emission::Polynomial(c) if c[2..].iter().all(|&x| x == 0.0))
    }
}

/// Emission law continued affinely outside `[-K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedEmission {
    law: Emission,
    cutoff: Option<f64>,
}

/// `g` on `[-K, K]`, tangent lines at `+-K` beyond.
pub fn truncate_g(g: &Emission, cutoff: f64) -> TruncatedEmission {
    TruncatedEmission { law: g.clone(), cutoff: if g.is_affine() { None } else { Some(cutoff) } }
}

impl TruncatedEmission {
    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn law(&self) -> &Emission {
        &self.law
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self.cutoff {
            Some(k) if u > k => self.law.eval(k) + self.law.derivative(k) * (u - k),
            Some(k) if u < -k => self.law.eval(-k) + self.law.derivative(-k) * (u + k),
            _ => self.law.eval(u),
        }
    }

    /// Global Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match (self.cutoff, &self.law) {
            (None, Emission::Affine { b, .. }) => b.abs(),
            (None, Emission::Polynomial(c)) => c.get(1).copied().unwrap_or(0.0).abs(),
            (Some(k), law) => {
                let n = 4096;
                (0..=n)
                    .map(|i| law.derivative(-k + 2.0 * k * i as f64 / n as f64).abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// `max(u0_sup, g^{-1}(Q S_1 beta_w))`.
pub fn supersolution_bound(q: f64, s_max: f64, beta_water: f64, g: &Emission, u0_sup: f64) -> Result<f64> {
    Ok(u0_sup.max(g.inverse(q * s_max * beta_water)?))
}

/// `min(u0_inf, g^{-1}(Q S_0 beta_i))`.
pub fn subsolution_bound(q: f64, s_min: f64, beta_ice: f64, g: &Emission, u0_inf: f64) -> Result<f64> {
    Ok(u0_inf.min(g.inverse(q * s_min * beta_ice)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x: SpectralField,
    pub t: f64,
}

/// Scratch buffers for one path.
#[derive(Debug, Clone)]
pub struct Workspace {
    x: Vec<f64>,
    dw: Vec<f64>,
    rhs: Vec<f64>,
    force: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Model {
    cfg: ModelConfig,
    basis: SpectralBasis,
    profile: CoalbedoProfile,
    insolation: Vec<f64>,
    s_min: f64,
    s_max: f64,
    emission: TruncatedEmission,
    decay: Vec<f64>,
    noise_weights: Vec<f64>,
    x0: SpectralField,
}

impl Model {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let c = &cfg.coalbedo;
        let profile = CoalbedoProfile::new(c.beta_ice(), c.beta_water(), c.ramp_width(), c.critical_temperature())?;
        let modes = cfg.modes;
        let basis = SpectralBasis::new(modes, cfg.node_count())?;
        let insolation: Vec<f64> = match &cfg.insolation {
            Insolation::Legendre(p) => basis.nodes().iter().map(|&x| legendre_series(p, x)).collect(),
            Insolation::Samples(v) => v.clone(),
        };
        let s_min = insolation.iter().copied().fold(f64::INFINITY, f64::min);
        let s_max = insolation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(s_min > 0.0) {
            return Err(Error::InvalidConfig(format!("insolation must be positive at every node (min {s_min})")));
        }
        if let Some([s0, s1]) = cfg.insolation_bounds {
            if s_min < s0 || s_max > s1 {
                return Err(Error::InvalidConfig(format!(
                    "insolation range [{s_min}, {s_max}] violates the declared bounds [{s0}, {s1}]"
                )));
            }
        }

        let u_c = profile.critical_temperature();
        let mut x0 = match &cfg.initial {
            InitialCondition::Constant(v) => SpectralField::constant(modes, *v),
            InitialCondition::Legendre(p) => SpectralField::from_legendre_coeffs(modes, p)?,
        };
        x0.axpy(-1.0, &SpectralField::constant(modes, u_c));

        let law = cfg.emission.clone();
        let cutoff = match cfg.truncation {
            Some(k) => k,
            None if law.is_affine() => f64::INFINITY,
            None => {
                let u0 = basis.to_physical(&x0);
                let sup = u0.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v + u_c));
                let inf = u0.iter().fold(f64::INFINITY, |m, &v| m.min(v + u_c));
                let q = cfg.solar_constant;
                let hi = supersolution_bound(q, s_max, profile.beta_water(), &law, sup)?;
                let lo = subsolution_bound(q, s_min, profile.beta_ice(), &law, inf)?;
                hi.abs().max(lo.abs())
            }
        };
        let emission = truncate_g(&law, cutoff);
        if let Some(k) = emission.cutoff() {
            let n = 1024;
            if (0..=n).any(|i| law.derivative(-k + 2.0 * k * i as f64 / n as f64) < 0.0) {
                return Err(Error::InvalidConfig(format!("emission law must be increasing on [-{k}, {k}]")));
            }
        }

        let decay = (0..modes).map(|n| (-shifted_eigenvalue(n, cfg.mu) * cfg.dt).exp()).collect();
        let noise_weights = (0..modes).map(|n| 1.0 / shifted_eigenvalue(n, cfg.mu).sqrt()).collect();
        Ok(Model {
            cfg: cfg.clone(),
            basis,
            profile,
            insolation,
            s_min,
            s_max,
            emission,
            decay,
            noise_weights,
            x0,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn profile(&self) -> &CoalbedoProfile {
        &self.profile
    }

    pub fn modes(&self) -> usize {
        self.cfg.modes
    }

    pub fn dt(&self) -> f64 {
        self.cfg.dt
    }

    pub fn steps(&self) -> usize {
        self.cfg.steps
    }

    pub fn mu(&self) -> f64 {
        self.cfg.mu
    }

    pub fn critical_temperature(&self) -> f64 {
        self.profile.critical_temperature()
    }

    pub fn insolation_at_nodes(&self) -> &[f64] {
        &self.insolation
    }

    /// `(S_0, S_1)` measured at the nodes.
    pub fn insolation_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    pub fn emission(&self) -> &TruncatedEmission {
        &self.emission
    }

    /// `L_g` of the (truncated) emission law.
    pub fn emission_lipschitz(&self) -> f64 {
        self.emission.lipschitz()
    }

    /// Initial shifted state `X_0 = u_0 - u_c`.
    pub fn initial_state(&self) -> &SpectralField {
        &self.x0
    }

    pub fn noise_config(&self) -> Result<NoiseConfig> {
        NoiseConfig::new(self.cfg.mu, self.cfg.modes, self.cfg.dt, self.cfg.steps, self.cfg.seed)
    }

    /// Whether the multiplicative term can be nonzero.
    pub fn noise_active(&self) -> bool {
        match self.cfg.noise_coupling {
            NoiseCoupling::Coalbedo => self.cfg.epsilon != 0.0,
            NoiseCoupling::Linear(a) => a != 0.0,
        }
    }

    /// `K = max(u0_sup, g^{-1}(Q S_1 beta_w))` in physical temperature.
    pub fn supersolution_k(&self, u0_sup: f64) -> Result<f64> {
        supersolution_bound(self.cfg.solar_constant, self.s_max, self.profile.beta_water(), self.emission.law(), u0_sup)
    }

    pub fn workspace(&self) -> Workspace {
        let m = self.basis.rule().order();
        Workspace { x: vec![0.0; m], dw: vec![0.0; m], rhs: vec![0.0; m], force: vec![0.0; self.cfg.modes] }
    }

    /// Spectral coefficients `dB^n_k / sqrt(mu_n + mu)` of the `k`-th increment.
    pub fn increment_into(&self, path: &NoisePath, step: usize, out: &mut [f64]) {
        for (n, o) in out.iter_mut().enumerate() {
            *o = path.increment(n, step) * self.noise_weights[n];
        }
    }

    #[inline]
    fn drift_point(&self, j: usize, x: f64) -> f64 {
        if !self.cfg.drift {
            return 0.0;
        }
        let beta = match self.cfg.reaction {
            Reaction::Frozen(v) => v,
            _ => {
                let b = self.profile.beta(x);
                debug_assert!(b >= self.profile.beta_ice() && b <= self.profile.beta_water());
                b
            }
        };
        self.cfg.mu * x - self.emission.eval(x + self.critical_temperature())
            + self.cfg.solar_constant * self.insolation[j] * beta
    }

    #[inline]
    fn noise_point(&self, j: usize, x: f64) -> f64 {
        match self.cfg.noise_coupling {
            NoiseCoupling::Linear(a) => a * x,
            NoiseCoupling::Coalbedo => {
                let r = match self.cfg.reaction {
                    Reaction::Beta => self.profile.beta(x),
                    Reaction::Theta => self.profile.theta_unchecked(x.max(0.0)),
                    Reaction::Frozen(v) => v,
                };
                self.cfg.epsilon * self.cfg.solar_constant * self.insolation[j] * r
            }
        }
    }

    /// `out = dt F(x) + B(x) dw` in spectral coefficients; `dw` is skipped
    /// when `None`.
    pub fn forcing_into(&self, x: &[f64], dw: Option<&[f64]>, ws: &mut Workspace, out: &mut [f64]) {
        let dt = self.cfg.dt;
        self.basis.reconstruct_into(x, &mut ws.x);
        match dw {
            Some(dw) => {
                self.basis.reconstruct_into(dw, &mut ws.dw);
                for j in 0..ws.x.len() {
                    let xj = ws.x[j];
                    ws.rhs[j] = dt * self.drift_point(j, xj) + self.noise_point(j, xj) * ws.dw[j];
                }
            }
            None => {
                for j in 0..ws.x.len() {
                    ws.rhs[j] = dt * self.drift_point(j, ws.x[j]);
                }
            }
        }
        self.basis.project_into(&ws.rhs, out);
    }

    /// `out_n = exp(-mu_n dt) (x_n + forcing_n)`.
    #[inline]
    pub fn advance_into(&self, x: &[f64], forcing: &[f64], out: &mut [f64]) {
        for n in 0..out.len() {
            out[n] = self.decay[n] * (x[n] + forcing[n]);
        }
    }

    /// `F(X)` projected onto the retained modes.
    pub fn drift(&self, x: &SpectralField) -> SpectralField {
        let mut ws = self.workspace();
        self.basis.reconstruct_into(x.coeffs(), &mut ws.x);
        for j in 0..ws.x.len() {
            ws.rhs[j] = self.drift_point(j, ws.x[j]);
        }
        let mut out = vec![0.0; self.modes()];
        self.basis.project_into(&ws.rhs, &mut out);
        SpectralField::new(out)
    }

    /// `B(X) dW` projected onto the retained modes.
    pub fn diffusion(&self, x: &SpectralField, dw: &SpectralField) -> SpectralField {
        let mut ws = self.workspace();
        self.basis.reconstruct_into(x.coeffs(), &mut ws.x);
        self.basis.reconstruct_into(dw.coeffs(), &mut ws.dw);
        for j in 0..ws.x.len() {
            ws.rhs[j] = self.noise_point(j, ws.x[j]) * ws.dw[j];
        }
        let mut out = vec![0.0; self.modes()];
        self.basis.project_into(&ws.rhs, &mut out);
        SpectralField::new(out)
    }

    /// One exponential Euler step.
    pub fn step(&self, state: &State, dw: Option<&SpectralField>) -> Result<State> {
        let mut ws = self.workspace();
        let n = self.modes();
        if state.x.truncation() != n {
            return Err(Error::LengthMismatch { expected: n, got: state.x.truncation() });
        }
        let dw = match dw {
            Some(d) if self.noise_active() => {
                if d.truncation() != n {
                    return Err(Error::LengthMismatch { expected: n, got: d.truncation() });
                }
                Some(d.coeffs())
            }
            _ => None,
        };
        let mut force = std::mem::take(&mut ws.force);
        self.forcing_into(state.x.coeffs(), dw, &mut ws, &mut force);
        let mut out = vec![0.0; n];
        self.advance_into(state.x.coeffs(), &force, &mut out);
        let x = SpectralField::new(out);
        if !x.is_finite() {
            return Err(Error::BlowUp { step: 1, path: None });
        }
        Ok(State { x, t: state.t + self.cfg.dt })
    }

    /// States at `t_0, ..., t_steps` driven by `path` (deterministic when
    /// `None`).
    pub fn integrate(&self, x0: &SpectralField, path: Option<&NoisePath>) -> Result<Vec<SpectralField>> {
        let n = self.modes();
        let steps = self.cfg.steps;
        if x0.truncation() != n {
            return Err(Error::LengthMismatch { expected: n, got: x0.truncation() });
        }
        let path = path.filter(|_| self.noise_active());
        if let Some(p) = path {
            self.check_path(p)?;
        }
        let mut ws = self.workspace();
        let mut force = vec![0.0; n];
        let mut dw = vec![0.0; n];
        let mut out = Vec::with_capacity(steps + 1);
        out.push(x0.clone());
        let mut cur = x0.coeffs().to_vec();
        for k in 0..steps {
            let inc = path.map(|p| {
                self.increment_into(p, k, &mut dw);
                dw.as_slice()
            });
            self.forcing_into(&cur, inc, &mut ws, &mut force);
            let mut next = vec![0.0; n];
            self.advance_into(&cur, &force, &mut next);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { step: k + 1, path: path.map(|p| p.path_index() as usize) });
            }
            out.push(SpectralField::new(next.clone()));
            cur = next;
        }
        Ok(out)
    }

    pub(crate) fn check_path(&self, p: &NoisePath) -> Result<()> {
        if p.modes() < self.modes() || p.steps() != self.cfg.steps || p.dt() != self.cfg.dt || p.mu() != self.cfg.mu {
            return Err(Error::Precondition(format!(
                "noise path {} does not match the model discretization",
                p.path_index()
            )));
        }
        Ok(())
    }

    /// Physical temperature `X + u_c` at the Gauss nodes.
    pub fn temperature_at_nodes(&self, x: &SpectralField) -> Vec<f64> {
        let u_c = self.critical_temperature();
        self.basis.to_physical(x).into_iter().map(|v| v + u_c).collect()
    }
}

fn legendre_series(p: &[f64], x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut acc = 0.0;
    for (n, &c) in p.iter().enumerate() {
        acc += c * cur;
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    acc
}
