//! Ice-line detection on reconstructed temperature profiles.

use serde::Serialize;

use crate::legendre::SpectralField;

const BISECTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IceLine {
    /// Ascending latitudes (sine) where `u = u_c`.
    pub crossings: Vec<f64>,
    /// Fraction of `[-1, 1]` with `u < u_c`.
    pub ice_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IceEntry {
    pub path: u32,
    pub step: u32,
    pub t: f64,
    pub line: IceLine,
}

/// Evaluates `sum_n a_n e_n(x)`; `x` is assumed to lie in `[-1, 1]`.
fn eval(field: &SpectralField, x: f64) -> f64 {
    field.eval(x.clamp(-1.0, 1.0)).unwrap_or(f64::NAN)
}

/// Points where `X = u - u_c` changes between `< 0` (ice) and `>= 0`, located
/// on a uniform grid of `grid_points` nodes and refined by bisection.
pub fn ice_line(x_field: &SpectralField, grid_points: usize) -> IceLine {
    let m = grid_points.max(2);
    let xs: Vec<f64> = (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| eval(x_field, x)).collect();
    let mut crossings = Vec::new();
    for i in 0..m - 1 {
        let frozen_lo = vals[i] < 0.0;
        if frozen_lo == (vals[i + 1] < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (xs[i], xs[i + 1]);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if (eval(x_field, mid) < 0.0) == frozen_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        crossings.push(0.5 * (lo + hi));
    }

    let mut knots = vec![-1.0];
    knots.extend(crossings.iter().copied());
    knots.push(1.0);
    let ice: f64 = knots
        .windows(2)
        .filter(|w| w[1] > w[0] && eval(x_field, 0.5 * (w[0] + w[1])) < 0.0)
        .map(|w| w[1] - w[0])
        .sum();
    IceLine { crossings, ice_fraction: (ice / 2.0).clamp(0.0, 1.0) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_frozen_planet() {
        let l = ice_line(&SpectralField::constant(4, -5.0), 201);
        assert!(l.crossings.is_empty());
        assert_eq!(l.ice_fraction, 1.0);
        let w = ice_line(&SpectralField::constant(4, 5.0), 201);
        assert_eq!(w.ice_fraction, 0.0);
    }

    #[test]
    fn linear_profile_crosses_at_the_equator() {
        let f = SpectralField::from_legendre_coeffs(4, &[0.0, 1.0]).unwrap();
        let l = ice_line(&f, 200);
        assert_eq!(l.crossings.len(), 1);
        assert!(l.crossings[0].abs() < 1e-8);
        assert!((l.ice_fraction - 0.5).abs() < 1e-8);
    }

    #[test]
    fn polar_caps_are_symmetric() {
        // X = P_2(x) - 0.2, roots at x^2 = (2 * 0.2 + 1) / 3
        let f = SpectralField::from_legendre_coeffs(4, &[0.2, 0.0, -1.0]).unwrap();
        let l = ice_line(&f, 2001);
        let r = (1.4f64 / 3.0).sqrt();
        assert_eq!(l.crossings.len(), 2);
        assert!((l.crossings[0] + r).abs() < 1e-8 && (l.crossings[1] - r).abs() < 1e-8);
        assert!((l.ice_fraction - (1.0 - r)).abs() < 1e-7);
    }
}
