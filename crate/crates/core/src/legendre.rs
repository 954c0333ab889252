//! Legendre polynomials, Gauss–Legendre quadrature and the spectral
//! transforms for the Legendre diffusion `A v = -(d/dx)((1 - x^2) dv/dx)`.
//!
//! Fields are expanded in the unit-norm basis `e_n = sqrt((2n + 1)/2) P_n`,
//! which diagonalizes `A` with eigenvalues `n(n + 1)`. The shifted operator
//! `A_mu = A + mu` has eigenvalues `n(n + 1) + mu`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

/// `P_n(x)` by the three-term recurrence
/// `(k + 1) P_{k+1} = (2k + 1) x P_k - k P_{k-1}`.
pub fn eval_legendre(n: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_pair(n, x).0)
}

/// `(P_n(x), P_{n-1}(x))`, with `P_{-1} = 0`. No domain check.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Unit-norm Legendre function `e_n(x)`.
pub fn eval_basis(n: usize, x: f64) -> Result<f64> {
    Ok(normalization(n) * eval_legendre(n, x)?)
}

#[inline]
fn normalization(n: usize) -> f64 {
    ((2 * n + 1) as f64 / 2.0).sqrt()
}

/// Eigenvalue `n(n + 1)` of the Legendre diffusion.
#[inline]
pub fn eigenvalue(n: usize) -> f64 {
    (n * (n + 1)) as f64
}

/// Eigenvalue `n(n + 1) + mu` of the shifted operator `A_mu`.
#[inline]
pub fn shifted_eigenvalue(n: usize, mu: f64) -> f64 {
    eigenvalue(n) + mu
}

/// Gauss–Legendre rule for weight 1 on (-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes `m`; the rule is exact up to degree `2m - 1`.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        check_len(self.order(), samples.len())?;
        Ok(samples.iter().zip(&self.weights).map(|(f, w)| f * w).sum())
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// `m`-point Gauss–Legendre nodes (strictly increasing) and weights.
///
/// Nodes are the roots of `P_m`, found by Newton iteration on the
/// recurrence from Chebyshev-like initial guesses; weights are
/// `2 / ((1 - x^2) P_m'(x)^2)`.
pub fn gauss_nodes(m: usize) -> QuadratureRule {
    assert!(m >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (p, q) = legendre_pair(m, x);
            let dp = mf * (x * p - q) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (p, q) = legendre_pair(m, x);
        let dp = mf * (x * p - q) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th largest root and its mirror
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

/// Quadrature approximation of `<u, v> = int_{-1}^{1} u v dx` from samples at
/// the rule nodes.
pub fn inner_product(u: &[f64], v: &[f64], rule: &QuadratureRule) -> Result<f64> {
    check_len(rule.order(), u.len())?;
    check_len(rule.order(), v.len())?;
    Ok(u.iter().zip(v).zip(rule.weights()).map(|((a, b), w)| a * b * w).sum())
}

/// Truncated expansion `sum_{n < N} a_n e_n` of a latitude field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "spectral field needs at least one mode");
        SpectralField { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        SpectralField::new(vec![0.0; modes])
    }

    /// The basis function `e_k` in an `N`-mode truncation.
    pub fn unit(modes: usize, k: usize) -> Self {
        let mut f = SpectralField::zeros(modes);
        f.coeffs[k] = 1.0;
        f
    }

    /// The constant function `c`, i.e. `c * sqrt(2) * e_0`.
    pub fn constant(modes: usize, c: f64) -> Self {
        let mut f = SpectralField::zeros(modes);
        f.coeffs[0] = c * std::f64::consts::SQRT_2;
        f
    }

    /// Field whose coefficients are given with respect to the classical
    /// (non-normalized) `P_n`.
    pub fn from_legendre_coeffs(modes: usize, p_coeffs: &[f64]) -> Result<Self> {
        if p_coeffs.len() > modes {
            return Err(Error::InvalidConfig(format!(
                "{} Legendre coefficients exceed the {modes}-mode truncation",
                p_coeffs.len()
            )));
        }
        let mut f = SpectralField::zeros(modes);
        for (n, c) in p_coeffs.iter().enumerate() {
            f.coeffs[n] = c / normalization(n);
        }
        Ok(f)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// Squared H-norm; equals the squared coefficient norm by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|a| a.is_finite())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        assert_eq!(self.truncation(), other.truncation());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> SpectralField {
        SpectralField::new(self.coeffs.iter().map(|a| alpha * a).collect())
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.truncation(), other.truncation());
        SpectralField::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.truncation(), other.truncation());
        SpectralField::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn distance_sq(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.truncation(), other.truncation());
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Evaluates the expansion at an arbitrary `x` in [-1, 1] (Clenshaw-free
    /// forward recurrence; adequate for the truncations used here).
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain(format!("evaluation point {x} outside [-1, 1]")));
        }
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut acc = 0.0;
        for (n, a) in self.coeffs.iter().enumerate() {
            acc += a * normalization(n) * cur;
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
            prev = cur;
            cur = next;
        }
        Ok(acc)
    }
}

/// Multiplies mode `n` by `n(n + 1) + mu`, realizing `A_mu` on the truncation.
pub fn apply_operator(field: &SpectralField, mu: f64) -> SpectralField {
    SpectralField::new(
        field
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, a)| shifted_eigenvalue(n, mu) * a)
            .collect(),
    )
}

/// Precomputed transform pair between `N` spectral modes and samples at the
/// nodes of a Gauss rule.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    rule: QuadratureRule,
    modes: usize,
    // e_n(x_j), row-major by mode
    table: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(modes: usize, nodes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidConfig("truncation must be at least one mode".into()));
        }
        if nodes < modes {
            return Err(Error::InsufficientQuadrature { nodes, modes });
        }
        Ok(Self::from_rule(gauss_nodes(nodes), modes))
    }

    fn from_rule(rule: QuadratureRule, modes: usize) -> Self {
        let m = rule.order();
        let mut table = vec![0.0; modes * m];
        for (j, &x) in rule.nodes().iter().enumerate() {
            let mut prev = 0.0;
            let mut cur = 1.0;
            for n in 0..modes {
                table[n * m + j] = normalization(n) * cur;
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
                prev = cur;
                cur = next;
            }
        }
        SpectralBasis { rule, modes, table }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    /// `e_n` sampled at the nodes.
    pub fn basis_row(&self, n: usize) -> &[f64] {
        let m = self.rule.order();
        &self.table[n * m..(n + 1) * m]
    }

    /// `a_n = <f, e_n>` by quadrature.
    pub fn to_spectral(&self, samples: &[f64]) -> Result<SpectralField> {
        check_len(self.rule.order(), samples.len())?;
        let mut out = vec![0.0; self.modes];
        self.project_into(samples, &mut out);
        Ok(SpectralField::new(out))
    }

    /// Unchecked projection into a preallocated coefficient buffer.
    pub(crate) fn project_into(&self, samples: &[f64], out: &mut [f64]) {
        let w = self.rule.weights();
        for (n, a) in out.iter_mut().enumerate() {
            let row = self.basis_row(n);
            let mut acc = 0.0;
            for j in 0..samples.len() {
                acc += row[j] * w[j] * samples[j];
            }
            *a = acc;
        }
    }

    /// `sum_n a_n e_n(x_j)` at every node.
    pub fn to_physical(&self, field: &SpectralField) -> Vec<f64> {
        let mut out = vec![0.0; self.rule.order()];
        self.reconstruct_into(field.coeffs(), &mut out);
        out
    }

    pub(crate) fn reconstruct_into(&self, coeffs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (n, &a) in coeffs.iter().enumerate().take(self.modes) {
            if a == 0.0 {
                continue;
            }
            let row = self.basis_row(n);
            for (v, e) in out.iter_mut().zip(row) {
                *v += a * e;
            }
        }
    }
}

/// Projects samples taken at the nodes of `rule` onto the first `modes` basis
/// functions.
pub fn to_spectral(samples: &[f64], rule: &QuadratureRule, modes: usize) -> Result<SpectralField> {
    if rule.order() < modes {
        return Err(Error::InsufficientQuadrature { nodes: rule.order(), modes });
    }
    SpectralBasis::from_rule(rule.clone(), modes).to_spectral(samples)
}

/// Evaluates a spectral field at arbitrary points in [-1, 1].
pub fn to_physical(field: &SpectralField, points: &[f64]) -> Result<Vec<f64>> {
    points.iter().map(|&x| field.eval(x)).collect()
}
