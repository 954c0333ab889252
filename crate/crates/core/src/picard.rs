//! Successive approximations of the mild solution on frozen noise.
//!
//! ```text
//! (G X)_t = S(t) X_0 + int_0^t S(t - s) F(X_s) ds + int_0^t S(t - s) B(X_s) dW_s
//! X^0_t = S(t) X_0,    X^{n+1} = G X^n
//! ```
//!
//! Both integrals use the left-point rule on the model grid, so the discrete
//! fixed point of `G` is exactly the exponential Euler trajectory and
//! `X^n` agrees with it on the first `n` steps.
//!
//! Distances are measured in `||X||^2_{B_T} = E sup_{t <= T} ||X_t||^2_H`,
//! estimated by the ensemble mean of the per-path grid supremum.

use serde::Serialize;

use crate::config::{ModelConfig, NoiseCoupling};
use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::legendre::SpectralField;
use crate::noise::{trace_q, NoiseConfig, NoisePath};
use crate::osgood::{CombinedModulus, Modulus};
use crate::stats::MeanEstimate;

/// One spectral trajectory per noise path, `[steps + 1][modes]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    modes: usize,
    steps: usize,
    dt: f64,
    noise_hash: [u8; 32],
    paths: Vec<Vec<f64>>,
}

impl TrajectoryEnsemble {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn noise_hash(&self) -> &[u8; 32] {
        &self.noise_hash
    }

    pub fn coeffs(&self, path: usize, step: usize) -> &[f64] {
        &self.paths[path][step * self.modes..(step + 1) * self.modes]
    }

    pub fn state(&self, path: usize, step: usize) -> SpectralField {
        SpectralField::new(self.coeffs(path, step).to_vec())
    }

    pub fn path(&self, path: usize) -> Vec<SpectralField> {
        (0..=self.steps).map(|k| self.state(path, k)).collect()
    }

    /// Same ensemble with every state shifted by `delta`.
    pub fn shifted(&self, delta: &SpectralField) -> TrajectoryEnsemble {
        let mut out = self.clone();
        for p in &mut out.paths {
            for row in p.chunks_exact_mut(self.modes) {
                for (a, d) in row.iter_mut().zip(delta.coeffs()) {
                    *a += d;
                }
            }
        }
        out
    }

    fn check_compatible(&self, other: &TrajectoryEnsemble) -> Result<()> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::Precondition("B_T norm of an empty ensemble".into()));
        }
        if self.modes != other.modes || self.steps != other.steps || self.len() != other.len() || self.dt != other.dt {
            return Err(Error::Precondition("ensembles do not share a discretization".into()));
        }
        Ok(())
    }

    /// Concatenates ensembles that share a discretization.
    pub fn merge(parts: Vec<TrajectoryEnsemble>) -> Result<TrajectoryEnsemble> {
        let mut it = parts.into_iter();
        let mut out = it.next().ok_or_else(|| Error::Precondition("nothing to merge".into()))?;
        for p in it {
            if p.modes != out.modes || p.steps != out.steps || p.dt != out.dt {
                return Err(Error::Precondition("ensembles do not share a discretization".into()));
            }
            out.paths.extend(p.paths);
        }
        Ok(out)
    }

    /// `n` copies of path 0.
    pub fn replicate(&self, n: usize) -> TrajectoryEnsemble {
        TrajectoryEnsemble { paths: vec![self.paths[0].clone(); n], ..self.clone() }
    }

    pub fn zeros_like(&self) -> TrajectoryEnsemble {
        TrajectoryEnsemble { paths: vec![vec![0.0; self.paths[0].len()]; self.len()], ..self.clone() }
    }
}

fn ensemble_hash(model: &Model, noise: &[NoisePath]) -> Result<[u8; 32]> {
    let cfg = model.noise_config()?;
    for p in noise {
        if p.modes() != cfg.modes || p.steps() != cfg.steps || p.dt() != cfg.dt || p.mu() != cfg.mu {
            return Err(Error::Precondition(format!(
                "noise path {} does not match the model discretization",
                p.path_index()
            )));
        }
    }
    Ok(noise.first().map(|p| *p.config_hash()).unwrap_or_else(|| cfg.hash()))
}

/// Direct exponential Euler integration of every path.
pub fn simulate(model: &Model, x0: &SpectralField, noise: &[NoisePath], exec: Execution) -> Result<TrajectoryEnsemble> {
    let n = model.modes();
    if x0.truncation() != n {
        return Err(Error::LengthMismatch { expected: n, got: x0.truncation() });
    }
    let noise_hash = ensemble_hash(model, noise)?;
    let steps = model.steps();
    let noisy = model.noise_active();
    let paths = exec.try_map(noise.len(), |p| {
        let path = &noise[p];
        let mut ws = model.workspace();
        let mut force = vec![0.0; n];
        let mut dw = vec![0.0; n];
        let mut data = vec![0.0; (steps + 1) * n];
        data[..n].copy_from_slice(x0.coeffs());
        for k in 0..steps {
            let (done, rest) = data.split_at_mut((k + 1) * n);
            let cur = &done[k * n..];
            let inc = if noisy {
                model.increment_into(path, k, &mut dw);
                Some(dw.as_slice())
            } else {
                None
            };
            model.forcing_into(cur, inc, &mut ws, &mut force);
            let next = &mut rest[..n];
            model.advance_into(cur, &force, next);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { step: k + 1, path: Some(path.path_index() as usize) });
            }
        }
        Ok(data)
    })?;
    Ok(TrajectoryEnsemble { modes: n, steps, dt: model.dt(), noise_hash, paths })
}

/// `X^0_t = S(t) X_0` on every path.
pub fn free_term(model: &Model, x0: &SpectralField, noise: &[NoisePath]) -> Result<TrajectoryEnsemble> {
    let n = model.modes();
    let steps = model.steps();
    let noise_hash = ensemble_hash(model, noise)?;
    let zero = vec![0.0; n];
    let mut data = vec![0.0; (steps + 1) * n];
    data[..n].copy_from_slice(x0.coeffs());
    for k in 0..steps {
        let (done, rest) = data.split_at_mut((k + 1) * n);
        model.advance_into(&done[k * n..], &zero, &mut rest[..n]);
    }
    Ok(TrajectoryEnsemble { modes: n, steps, dt: model.dt(), noise_hash, paths: vec![data; noise.len()] })
}

/// `G X` with the stored increments of each path.
pub fn apply_g(
    model: &Model,
    x: &TrajectoryEnsemble,
    x0: &SpectralField,
    noise: &[NoisePath],
    exec: Execution,
) -> Result<TrajectoryEnsemble> {
    let n = model.modes();
    let steps = model.steps();
    let noise_hash = ensemble_hash(model, noise)?;
    if x.noise_hash != noise_hash || x.len() != noise.len() {
        return Err(Error::Precondition("iterate was built on different noise paths".into()));
    }
    if x.modes != n || x.steps != steps || x0.truncation() != n {
        return Err(Error::Precondition("iterate does not match the model discretization".into()));
    }
    let noisy = model.noise_active();
    let paths = exec.try_map(noise.len(), |p| {
        let path = &noise[p];
        let mut ws = model.workspace();
        let mut force = vec![0.0; n];
        let mut dw = vec![0.0; n];
        let mut data = vec![0.0; (steps + 1) * n];
        data[..n].copy_from_slice(x0.coeffs());
        for k in 0..steps {
            let inc = if noisy {
                model.increment_into(path, k, &mut dw);
                Some(dw.as_slice())
            } else {
                None
            };
            model.forcing_into(x.coeffs(p, k), inc, &mut ws, &mut force);
            let (done, rest) = data.split_at_mut((k + 1) * n);
            let next = &mut rest[..n];
            model.advance_into(&done[k * n..], &force, next);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { step: k + 1, path: Some(path.path_index() as usize) });
            }
        }
        Ok(data)
    })?;
    Ok(TrajectoryEnsemble { modes: n, steps, dt: model.dt(), noise_hash, paths })
}

/// `||A - B||_{B_T}` with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BtEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Estimate of `||A - B||^2_{B_T}` itself.
    pub squared: MeanEstimate,
}

impl BtEstimate {
    fn from_squared(sq: MeanEstimate) -> Self {
        let estimate = sq.mean.max(0.0).sqrt();
        let stderr = if estimate > 0.0 { sq.stderr / (2.0 * estimate) } else { sq.stderr.sqrt() };
        BtEstimate { estimate, stderr, squared: sq }
    }
}

fn sup_sq(a: &[f64], b: Option<&[f64]>, modes: usize, stride: usize) -> f64 {
    let rows = a.chunks_exact(modes).step_by(stride);
    match b {
        Some(b) => rows
            .zip(b.chunks_exact(modes).step_by(stride))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
            .fold(0.0, f64::max),
        None => rows.map(|x| x.iter().map(|p| p * p).sum::<f64>()).fold(0.0, f64::max),
    }
}

/// `||A - B||_{B_T}`.
pub fn bt_norm(a: &TrajectoryEnsemble, b: &TrajectoryEnsemble) -> Result<BtEstimate> {
    bt_norm_strided(a, b, 1)
}

/// `||A - B||_{B_T}` using only every `stride`-th grid time.
pub fn bt_norm_strided(a: &TrajectoryEnsemble, b: &TrajectoryEnsemble, stride: usize) -> Result<BtEstimate> {
    a.check_compatible(b)?;
    let stride = stride.max(1);
    let per: Vec<f64> = (0..a.len()).map(|p| sup_sq(&a.paths[p], Some(&b.paths[p]), a.modes, stride)).collect();
    Ok(BtEstimate::from_squared(MeanEstimate::from_samples(&per)))
}

/// `E sup_{s <= t_k} ||A_s - B_s||^2` for every grid time (`B = 0` if absent).
pub fn bt_profile(a: &TrajectoryEnsemble, b: Option<&TrajectoryEnsemble>) -> Result<Vec<MeanEstimate>> {
    if let Some(b) = b {
        a.check_compatible(b)?;
    } else if a.is_empty() {
        return Err(Error::Precondition("B_T norm of an empty ensemble".into()));
    }
    let running: Vec<Vec<f64>> = (0..a.len())
        .map(|p| {
            let mut acc = 0.0f64;
            (0..=a.steps)
                .map(|k| {
                    let x = a.coeffs(p, k);
                    let v: f64 = match b {
                        Some(b) => x.iter().zip(b.coeffs(p, k)).map(|(p, q)| (p - q) * (p - q)).sum(),
                        None => x.iter().map(|p| p * p).sum(),
                    };
                    acc = acc.max(v);
                    acc
                })
                .collect()
        })
        .collect();
    Ok((0..=a.steps)
        .map(|k| MeanEstimate::from_samples(&running.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect())
}

/// Constants of the Osgood majorant `v(t) = v0 + alpha int_0^t theta_FB(v)`.
#[derive(Debug, Clone, Serialize)]
pub struct MajorantReport {
    pub v0: f64,
    pub alpha: f64,
    /// Measured maximal-inequality constant of the discrete stochastic convolution.
    pub c_t: f64,
    pub capital_c_t: f64,
    pub capital_c_hat_t: f64,
    pub theta_linear: f64,
    pub theta_scale: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `est - v - 3 stderr` over all iterates and times (`<= 0` passes).
    pub worst_excess: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub tol: f64,
    pub distances: Vec<BtEstimate>,
    pub residual: BtEstimate,
    /// `||X||_{B_T}` of the returned iterate on the full and every-other grid.
    pub norm_fine_grid: BtEstimate,
    pub norm_coarse_grid: BtEstimate,
    pub majorant: Option<MajorantReport>,
}

impl PicardDiagnostics {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                last_distance: self.distances.last().map(|d| d.estimate).unwrap_or(f64::NAN),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub ensemble: TrajectoryEnsemble,
    pub diagnostics: PicardDiagnostics,
    /// `||X^n||^2_{B_t}` profiles, one per iterate starting with `X^0`.
    pub profiles: Vec<Vec<MeanEstimate>>,
}

/// Measured `c_T`: `E sup_k ||sum_{j<k} S(t_k - t_j) dW_j||^2 / (T Trace)`,
/// padded by three standard errors.
pub fn measure_convolution_constant(model: &Model, noise: &[NoisePath]) -> Result<f64> {
    let n = model.modes();
    let mut dw = vec![0.0; n];
    let zero = vec![0.0; n];
    let per: Vec<f64> = noise
        .iter()
        .map(|p| {
            let mut z = vec![0.0; n];
            let mut next = vec![0.0; n];
            let mut sup = 0.0f64;
            for k in 0..model.steps() {
                model.increment_into(p, k, &mut dw);
                for (a, d) in z.iter_mut().zip(&dw) {
                    *a += d;
                }
                model.advance_into(&z, &zero, &mut next);
                std::mem::swap(&mut z, &mut next);
                sup = sup.max(z.iter().map(|v| v * v).sum());
            }
            sup
        })
        .collect();
    if per.is_empty() {
        return Err(Error::Precondition("no noise paths to measure c_T".into()));
    }
    let est = MeanEstimate::from_samples(&per);
    let horizon = model.steps() as f64 * model.dt();
    Ok((est.mean + 3.0 * est.stderr) / (horizon * trace_q(model.mu(), n).partial))
}

struct MajorantConstants {
    modulus: CombinedModulus,
    v0: f64,
    alpha: f64,
    c_t: f64,
    big_c: f64,
    c_hat: f64,
}

fn majorant_constants(
    model: &Model,
    x0: &SpectralField,
    noise: &[NoisePath],
    exec: Execution,
) -> Result<Option<MajorantConstants>> {
    let cfg = model.config();
    if cfg.noise_coupling != NoiseCoupling::Coalbedo {
        return Ok(None);
    }
    let horizon = cfg.horizon();
    let (_, s_inf) = model.insolation_range();
    let q = cfg.solar_constant;
    let tr = trace_q(cfg.mu, cfg.modes);
    let c_t = measure_convolution_constant(model, noise)?;
    let big_c = cfg.epsilon.powi(2) * q * q * s_inf * s_inf * c_t * (tr.partial + tr.tail_bound);
    let c_hat = (16.0 * horizon).max(big_c);
    let alpha = 4.0 * c_hat;
    let zero = free_term(model, &SpectralField::zeros(cfg.modes), noise)?;
    let g0 = apply_g(model, &zero, x0, noise, exec)?;
    let g0_norm = bt_norm(&g0, &zero)?;
    let v0 = 4.0 * (4.0 * x0.norm_sq() + g0_norm.squared.mean + 3.0 * g0_norm.squared.stderr);
    let modulus = CombinedModulus {
        linear: model.emission_lipschitz() + cfg.mu,
        scale: q * s_inf + 1.0,
        profile: *model.profile(),
    };
    Ok(Some(MajorantConstants { modulus, v0, alpha, c_t, big_c, c_hat }))
}

#[derive(Debug, Clone, Copy)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Execution,
    pub check_majorant: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-3, max_iter: 25, exec: Execution::default(), check_majorant: true }
    }
}

/// Iterates `X^{n+1} = G X^n` from the free term until the `B_T` distance
/// drops below `tol`.
pub fn solve_picard(
    model: &Model,
    x0: &SpectralField,
    noise: &[NoisePath],
    opts: &PicardOptions,
) -> Result<PicardSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig(format!("Picard tolerance must be positive (got {})", opts.tol)));
    }
    let exec = opts.exec;
    let mut x = free_term(model, x0, noise)?;
    let mut profiles = vec![bt_profile(&x, None)?];
    let mut distances = Vec::new();
    let mut converged = false;
    while distances.len() < opts.max_iter {
        let next = apply_g(model, &x, x0, noise, exec)?;
        let d = bt_norm(&next, &x)?;
        distances.push(d);
        x = next;
        profiles.push(bt_profile(&x, None)?);
        if d.estimate < opts.tol {
            converged = true;
            break;
        }
    }
    let gx = apply_g(model, &x, x0, noise, exec)?;
    let residual = bt_norm(&gx, &x)?;
    let zero = x.zeros_like();
    let norm_fine_grid = bt_norm(&x, &zero)?;
    let norm_coarse_grid = bt_norm_strided(&x, &zero, 2)?;

    let majorant = if opts.check_majorant {
        majorant_constants(model, x0, noise, exec)?.map(|MajorantConstants { modulus, v0, alpha, c_t, big_c, c_hat }| {
            let times: Vec<f64> = (0..=model.steps()).map(|k| k as f64 * model.dt()).collect();
            let values: Vec<f64> = times
                .iter()
                .map(|&t| modulus.psi_inverse(v0, alpha * t).unwrap_or(f64::INFINITY))
                .collect();
            let mut worst = f64::NEG_INFINITY;
            let mut violations = 0;
            for prof in &profiles {
                for (est, &v) in prof.iter().zip(&values) {
                    let excess = est.mean - v - 3.0 * est.stderr;
                    worst = worst.max(excess);
                    if excess > 0.0 {
                        violations += 1;
                    }
                }
            }
            MajorantReport {
                v0,
                alpha,
                c_t,
                capital_c_t: big_c,
                capital_c_hat_t: c_hat,
                theta_linear: modulus.linear,
                theta_scale: modulus.scale,
                times,
                values,
                worst_excess: worst,
                violations,
            }
        })
    } else {
        None
    };

    let diagnostics = PicardDiagnostics {
        iterations: distances.len(),
        converged,
        tol: opts.tol,
        distances,
        residual,
        norm_fine_grid,
        norm_coarse_grid,
        majorant,
    };
    Ok(PicardSolution { ensemble: x, diagnostics, profiles })
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceRow {
    pub gap: f64,
    pub distance: BtEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceTable {
    pub rows: Vec<DependenceRow>,
    /// Whether `d_{i+1} <= d_i + 2 stderr` holds along the table.
    pub nonincreasing: bool,
}

/// Distances between the solution from `x0` and those from `x0 + gap * direction`.
pub fn continuous_dependence_experiment(
    model: &Model,
    x0: &SpectralField,
    direction: &SpectralField,
    gaps: &[f64],
    noise: &[NoisePath],
    exec: Execution,
) -> Result<DependenceTable> {
    let base = simulate(model, x0, noise, exec)?;
    let mut rows = Vec::with_capacity(gaps.len());
    for &gap in gaps {
        let mut start = x0.clone();
        start.axpy(gap, direction);
        let other = simulate(model, &start, noise, exec)?;
        rows.push(DependenceRow { gap, distance: bt_norm(&other, &base)? });
    }
    let nonincreasing = rows.windows(2).all(|w| {
        let (a, b) = (&w[0].distance, &w[1].distance);
        b.estimate <= a.estimate + 2.0 * (a.stderr + b.stderr)
    });
    Ok(DependenceTable { rows, nonincreasing })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// `max (u - u_hat)_+` over paths, grid times and Gauss nodes.
    pub max_violation: f64,
    pub worst_path: usize,
    pub worst_step: usize,
    pub worst_node: usize,
    /// `||(u - u_hat)_+||_{B_T}` by quadrature.
    pub positive_part: BtEstimate,
}

/// Runs `x0 <= x0_hat` on shared noise and measures order violations.
pub fn comparison_experiment(
    model: &Model,
    x0: &SpectralField,
    x0_hat: &SpectralField,
    noise: &[NoisePath],
    exec: Execution,
) -> Result<ComparisonReport> {
    let basis = model.basis();
    let a0 = basis.to_physical(x0);
    let b0 = basis.to_physical(x0_hat);
    if let Some(j) = (0..a0.len()).find(|&j| a0[j] > b0[j]) {
        return Err(Error::Precondition(format!(
            "comparison needs ordered initial data; u0 > u0_hat at node {j} (x = {})",
            basis.nodes()[j]
        )));
    }
    let low = simulate(model, x0, noise, exec)?;
    let high = simulate(model, x0_hat, noise, exec)?;
    let w = basis.rule().weights();
    let per: Vec<(f64, usize, usize, f64)> = exec.map(low.len(), |p| {
        let mut ws = vec![0.0; basis.rule().order()];
        let mut best = (f64::NEG_INFINITY, 0, 0);
        let mut sup_sq = 0.0f64;
        for k in 0..=low.steps {
            let diff: Vec<f64> = low.coeffs(p, k).iter().zip(high.coeffs(p, k)).map(|(a, b)| a - b).collect();
            basis.reconstruct_into(&diff, &mut ws);
            let mut sq = 0.0;
            for (j, &v) in ws.iter().enumerate() {
                if v > best.0 {
                    best = (v, k, j);
                }
                let pos = v.max(0.0);
                sq += w[j] * pos * pos;
            }
            sup_sq = sup_sq.max(sq);
        }
        (best.0, best.1, best.2, sup_sq)
    });
    let (worst_path, worst) = per
        .iter()
        .enumerate()
        .fold((0, per[0]), |acc, (i, r)| if r.0 > acc.1 .0 { (i, *r) } else { acc });
    let sq: Vec<f64> = per.iter().map(|r| r.3).collect();
    Ok(ComparisonReport {
        max_violation: worst.0.max(0.0),
        worst_path,
        worst_step: worst.1,
        worst_node: worst.2,
        positive_part: BtEstimate::from_squared(MeanEstimate::from_samples(&sq)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DossSussmanLevel {
    pub dt: f64,
    /// `max_p sup_k ||X_k - exp(a w_k) Y_k||_H`.
    pub max_difference: f64,
    pub mean_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DossSussmanReport {
    pub a: f64,
    pub sigma: f64,
    pub levels: Vec<DossSussmanLevel>,
    /// `max_difference` ratios between consecutive halvings.
    pub ratios: Vec<f64>,
}

/// Linear multiplicative noise `B(X) = a X` driven by the uniform mode only,
/// `w_t = sigma B^0_t` with `sigma = 1 / sqrt(2 mu)`. The SPDE is compared with
/// the random PDE for `Y = exp(-a w) X`,
///
/// ```text
/// dY + A_mu Y dt = (exp(-a w) F(exp(a w) Y) - a^2 sigma^2 Y / 2) dt
/// ```
///
/// at `dt`, `dt/2`, `dt/4` on one fine Brownian path per sample.
pub fn doss_sussman_check(cfg: &ModelConfig, a: f64, paths: usize, exec: Execution) -> Result<DossSussmanReport> {
    if paths == 0 {
        return Err(Error::InvalidConfig("Doss-Sussman check needs at least one path".into()));
    }
    let mut base = cfg.clone();
    base.noise_coupling = NoiseCoupling::Linear(a);
    let sigma = 1.0 / (2.0 * cfg.mu).sqrt();
    let refine = [1usize, 2, 4];
    let finest = *refine.last().unwrap();
    let fine_cfg = NoiseConfig::new(cfg.mu, 1, cfg.dt / finest as f64, cfg.steps * finest, cfg.seed)?;

    let mut levels = Vec::new();
    for &r in &refine {
        let mut level_cfg = base.clone();
        level_cfg.dt = cfg.dt / r as f64;
        level_cfg.steps = cfg.steps * r;
        let model = Model::new(&level_cfg)?;
        let n = model.modes();
        let noise_cfg = model.noise_config()?;
        let group = finest / r;
        let per = exec.try_map(paths, |p| -> Result<f64> {
            let fine = NoisePath::generate(&fine_cfg, p as u32);
            let db0: Vec<f64> = fine.mode_increments(0).chunks_exact(group).map(|c| c.iter().sum()).collect();
            let mut inc = vec![0.0; n * level_cfg.steps];
            inc[..level_cfg.steps].copy_from_slice(&db0);
            let path = NoisePath::from_increments(&noise_cfg, p as u32, inc)?;
            let x = model.integrate(model.initial_state(), Some(&path))?;

            let mut ws = model.workspace();
            let mut force = vec![0.0; n];
            let mut y = model.initial_state().coeffs().to_vec();
            let mut next = vec![0.0; n];
            let mut z = vec![0.0; n];
            let mut w = 0.0;
            let mut sup = 0.0f64;
            let ito = 0.5 * a * a * sigma * sigma * level_cfg.dt;
            for k in 0..level_cfg.steps {
                let e = (a * w).exp();
                for (zi, yi) in z.iter_mut().zip(&y) {
                    *zi = e * yi;
                }
                model.forcing_into(&z, None, &mut ws, &mut force);
                let inv = (-a * w).exp();
                for i in 0..n {
                    force[i] = inv * force[i] - ito * y[i];
                }
                model.advance_into(&y, &force, &mut next);
                std::mem::swap(&mut y, &mut next);
                w += sigma * db0[k];
                let e = (a * w).exp();
                let d: f64 = x[k + 1].coeffs().iter().zip(&y).map(|(xi, yi)| (xi - e * yi).powi(2)).sum();
                if !d.is_finite() {
                    return Err(Error::BlowUp { step: k + 1, path: Some(p) });
                }
                sup = sup.max(d);
            }
            Ok(sup.sqrt())
        })?;
        levels.push(DossSussmanLevel {
            dt: level_cfg.dt,
            max_difference: per.iter().copied().fold(0.0, f64::max),
            mean_difference: MeanEstimate::from_samples(&per).mean,
        });
    }
    let ratios = levels.windows(2).map(|w| w[1].max_difference / w[0].max_difference).collect();
    Ok(DossSussmanReport { a, sigma, levels, ratios })
}

/// `theta_FB` for a model, exposed for oracle tables.
pub fn combined_modulus(model: &Model) -> CombinedModulus {
    let (_, s_inf) = model.insolation_range();
    CombinedModulus {
        linear: model.emission_lipschitz() + model.mu(),
        scale: model.config().solar_constant * s_inf + 1.0,
        profile: *model.profile(),
    }
}
