//! Scalar Osgood integral equation `v(t) = v0 + alpha int_0^t theta(v(s)) ds`.
//!
//! For `v0 > 0` the unique solution is `v(t) = Psi_{v0}^{-1}(alpha t)` with
//! `Psi_{v0}(v) = int_{v0}^{v} ds / theta(s)`, and it dominates every
//! nonnegative function satisfying the corresponding integral inequality.
//! For `v0 = 0` the Osgood condition `int_{0+} ds / theta(s) = inf` forces the
//! null solution.

use crate::coalbedo::CoalbedoProfile;
use crate::error::{Error, Result};
use crate::quad;

const PSI_ABS_TOL: f64 = 1e-15;
const PSI_REL_TOL: f64 = 1e-14;
const ROOT_TOL: f64 = 1e-12;

/// A modulus of continuity: nonnegative, nondecreasing, concave, zero at zero,
/// and strictly positive on `(0, inf)`.
pub trait Modulus: Sync {
    fn value(&self, u: f64) -> f64;

    /// Points where the modulus is not smooth; used to split quadratures.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `Psi_{v0}(v)`, integrated in `ln s` by adaptive Gauss–Kronrod.
    fn psi(&self, v0: f64, v: f64) -> Result<f64> {
        if !(v0 > 0.0) {
            return Err(Error::Domain(format!("Psi requires v0 > 0 (got {v0})")));
        }
        if !(v >= v0) {
            return Err(Error::Domain(format!("Psi_{{v0}}(v) requires v >= v0 (got v={v}, v0={v0})")));
        }
        if v == v0 {
            return Ok(0.0);
        }
        let mut knots = vec![v0.ln()];
        knots.extend(self.breakpoints().into_iter().filter(|&b| b > v0 && b < v).map(f64::ln));
        knots.push(v.ln());
        let integrand = |y: f64| {
            let s = y.exp();
            s / self.value(s)
        };
        Ok(knots
            .windows(2)
            .map(|w| quad::integrate(integrand, w[0], w[1], PSI_ABS_TOL, PSI_REL_TOL))
            .sum())
    }

    /// Solves `Psi_{v0}(v) = y`. Returns `+inf` when the solution exceeds the
    /// floating-point range.
    fn psi_inverse(&self, v0: f64, y: f64) -> Result<f64> {
        if !(v0 > 0.0) {
            return Err(Error::Domain(format!("Psi inverse requires v0 > 0 (got {v0})")));
        }
        if !(y >= 0.0) {
            return Err(Error::Domain(format!("Psi inverse requires y >= 0 (got {y})")));
        }
        if y == 0.0 {
            return Ok(v0);
        }
        // geometric bracket growth, accumulating Psi up to the lower end
        let mut lo = v0;
        let mut psi_lo = 0.0;
        let mut hi = 2.0 * v0;
        loop {
            if !hi.is_finite() {
                return Ok(f64::INFINITY);
            }
            let psi_hi = psi_lo + self.psi(lo, hi)?;
            if psi_hi >= y {
                break;
            }
            lo = hi;
            psi_lo = psi_hi;
            hi *= 2.0;
        }
        let target = y - psi_lo;
        let base = lo;
        Ok(quad::solve_monotone(
            |v| self.psi(base, v.max(base)).unwrap_or(f64::NAN),
            |v| 1.0 / self.value(v),
            target,
            lo,
            hi,
            ROOT_TOL,
        ))
    }
}

impl<M: Modulus + ?Sized> Modulus for &M {
    fn value(&self, u: f64) -> f64 {
        (**self).value(u)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// `theta(u) = c u`, the Lipschitz (Gronwall) special case.
#[derive(Debug, Clone, Copy)]
pub struct LinearModulus(pub f64);

impl Modulus for LinearModulus {
    fn value(&self, u: f64) -> f64 {
        self.0 * u.max(0.0)
    }
}

/// `theta_FB(s) = linear s + scale theta(s)`: the combined modulus of the drift
/// and noise coefficients, with `linear = L_g + mu` and `scale = Q S_inf + 1`.
#[derive(Debug, Clone, Copy)]
pub struct CombinedModulus {
    pub linear: f64,
    pub scale: f64,
    pub profile: CoalbedoProfile,
}

impl Modulus for CombinedModulus {
    fn value(&self, u: f64) -> f64 {
        self.linear * u.max(0.0) + self.scale * self.profile.theta_unchecked(u)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalarIvp<'a, M: Modulus + ?Sized> {
    pub v0: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub modulus: &'a M,
}

impl<'a, M: Modulus + ?Sized> ScalarIvp<'a, M> {
    pub fn new(v0: f64, alpha: f64, horizon: f64, modulus: &'a M) -> Result<Self> {
        if !(v0 >= 0.0) || !(alpha > 0.0) || !(horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scalar problem needs v0 >= 0, alpha > 0, T > 0 (got {v0}, {alpha}, {horizon})"
            )));
        }
        Ok(ScalarIvp { v0, alpha, horizon, modulus })
    }
}

/// `(t_k, v(t_k))` on the uniform grid `t_k = k T / steps`, `k = 0..=steps`.
pub fn solve_scalar<M: Modulus + ?Sized>(ivp: &ScalarIvp<'_, M>, steps: usize) -> Result<Vec<(f64, f64)>> {
    if steps == 0 {
        return Err(Error::InvalidConfig("solve_scalar needs at least one step".into()));
    }
    let times = (0..=steps).map(|k| ivp.horizon * k as f64 / steps as f64);
    if ivp.v0 == 0.0 {
        return Ok(times.map(|t| (t, 0.0)).collect());
    }
    times
        .map(|t| Ok((t, ivp.modulus.psi_inverse(ivp.v0, ivp.alpha * t)?)))
        .collect()
}

/// `Psi_{v0}^{-1}(alpha t)`: the largest value at time `t` of any nonnegative
/// solution of `v(t) <= v0 + alpha int_0^t theta(v)`.
pub fn growth_bound<M: Modulus + ?Sized>(v0: f64, alpha: f64, t: f64, modulus: &M) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::Domain(format!("growth bound requires v0 > 0 (got {v0})")));
    }
    if !(alpha > 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!("growth bound requires alpha > 0, t >= 0 (got {alpha}, {t})")));
    }
    modulus.psi_inverse(v0, alpha * t)
}
