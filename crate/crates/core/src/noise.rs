//! Truncated cylindrical `Q_mu`-Wiener process
//!
//! ```text
//! W_t = sum_{n < N} B^n_t e_n / sqrt(n (n + 1) + mu)
//! ```
//!
//! with independent standard Brownian motions `B^n`. Increments are stored
//! per path as a `[modes x steps]` table so that every consumer (the time
//! stepper, each Picard iterate, the Doss–Sussman cross-check) sees the same
//! realization.
//!
//! # Stream derivation
//!
//! The increments of mode `n` on path `p` come from a ChaCha8 generator keyed
//! by `seed_from_u64(master_seed)` and positioned on stream `(p << 32) | n`.
//! Standard normals are drawn with `rand_distr::StandardNormal` (ziggurat)
//! and scaled by `sqrt(dt)`. A path is therefore a pure function of
//! `(master_seed, p, n, k)` and does not depend on thread scheduling.
//!
//! # Binary layout (version 1, little endian)
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `SEBMNOIS` |
//! | 4     | format version (u32) |
//! | 4     | modes (u32) |
//! | 4     | steps (u32) |
//! | 4     | path index (u32) |
//! | 8     | master seed (u64) |
//! | 8     | dt (f64) |
//! | 8     | mu (f64) |
//! | 32    | SHA-256 of the noise configuration |
//! | 8 * modes * steps | increments, mode-major (f64) |

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::legendre::{shifted_eigenvalue, SpectralField};
use crate::stats::MeanEstimate;

pub const RNG_ALGORITHM: &str = "chacha8;key=seed_from_u64(master);stream=(path<<32)|mode;normal=rand_distr-0.5-ziggurat";

const MAGIC: &[u8; 8] = b"SEBMNOIS";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 * 4 + 8 * 3 + 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub mu: f64,
    pub modes: usize,
    pub dt: f64,
    pub steps: usize,
    pub master_seed: u64,
}

impl NoiseConfig {
    pub fn new(mu: f64, modes: usize, dt: f64, steps: usize, master_seed: u64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidConfig(format!("spectral shift mu must be positive (got {mu})")));
        }
        if modes == 0 || modes > u32::MAX as usize {
            return Err(Error::InvalidConfig("noise truncation must be at least one mode".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("time step must be positive (got {dt})")));
        }
        if steps > u32::MAX as usize {
            return Err(Error::InvalidConfig("too many steps".into()));
        }
        Ok(NoiseConfig { mu, modes, dt, steps, master_seed })
    }

    /// SHA-256 over the generator description and every parameter bit pattern.
    pub fn hash(&self) -> [u8; 32] {
        let text = format!(
            "{RNG_ALGORITHM};mu={:016x};modes={};dt={:016x};steps={};seed={}",
            self.mu.to_bits(),
            self.modes,
            self.dt.to_bits(),
            self.steps,
            self.master_seed
        );
        Sha256::digest(text.as_bytes()).into()
    }

    /// `1 / sqrt(n (n + 1) + mu)` for every retained mode.
    pub fn mode_weights(&self) -> Vec<f64> {
        (0..self.modes).map(|n| 1.0 / shifted_eigenvalue(n, self.mu).sqrt()).collect()
    }

    /// Variance `dt / N` bounding the neglected modes of one increment.
    pub fn tail_variance(&self) -> f64 {
        self.dt * trace_q(self.mu, self.modes).tail_bound
    }
}

/// Generator for mode `mode` of path `path`.
pub fn stream_rng(master_seed: u64, path: u32, mode: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((path as u64) << 32) | mode as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    modes: usize,
    steps: usize,
    path_index: u32,
    master_seed: u64,
    dt: f64,
    mu: f64,
    config_hash: [u8; 32],
    increments: Vec<f64>,
}

impl NoisePath {
    pub fn generate(cfg: &NoiseConfig, path_index: u32) -> Self {
        let scale = cfg.dt.sqrt();
        let mut increments = Vec::with_capacity(cfg.modes * cfg.steps);
        for mode in 0..cfg.modes {
            let mut rng = stream_rng(cfg.master_seed, path_index, mode as u32);
            increments.extend((0..cfg.steps).map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            }));
        }
        Self::from_parts(cfg, path_index, increments)
    }

    /// All-zero increments (noise switched off).
    pub fn zeros(cfg: &NoiseConfig, path_index: u32) -> Self {
        Self::from_parts(cfg, path_index, vec![0.0; cfg.modes * cfg.steps])
    }

    /// Wraps externally supplied increments laid out mode-major.
    pub fn from_increments(cfg: &NoiseConfig, path_index: u32, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != cfg.modes * cfg.steps {
            return Err(Error::LengthMismatch { expected: cfg.modes * cfg.steps, got: increments.len() });
        }
        Ok(Self::from_parts(cfg, path_index, increments))
    }

    fn from_parts(cfg: &NoiseConfig, path_index: u32, increments: Vec<f64>) -> Self {
        NoisePath {
            modes: cfg.modes,
            steps: cfg.steps,
            path_index,
            master_seed: cfg.master_seed,
            dt: cfg.dt,
            mu: cfg.mu,
            config_hash: cfg.hash(),
            increments,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn path_index(&self) -> u32 {
        self.path_index
    }

    pub fn config_hash(&self) -> &[u8; 32] {
        &self.config_hash
    }

    /// `Delta B^n_k`.
    #[inline]
    pub fn increment(&self, mode: usize, step: usize) -> f64 {
        self.increments[mode * self.steps + step]
    }

    pub fn mode_increments(&self, mode: usize) -> &[f64] {
        &self.increments[mode * self.steps..(mode + 1) * self.steps]
    }

    pub fn mode_increments_mut(&mut self, mode: usize) -> &mut [f64] {
        let s = self.steps;
        &mut self.increments[mode * s..(mode + 1) * s]
    }

    /// `B^n_{t_k}` for `k = 0..=steps`.
    pub fn brownian_path(&self, mode: usize) -> Vec<f64> {
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(self.mode_increments(mode).iter().map(|d| {
                acc += d;
                acc
            }))
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 8 * self.increments.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.modes as u32).to_le_bytes());
        buf.extend_from_slice(&(self.steps as u32).to_le_bytes());
        buf.extend_from_slice(&self.path_index.to_le_bytes());
        buf.extend_from_slice(&self.master_seed.to_le_bytes());
        buf.extend_from_slice(&self.dt.to_le_bytes());
        buf.extend_from_slice(&self.mu.to_le_bytes());
        buf.extend_from_slice(&self.config_hash);
        for v in &self.increments {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        if &header[..8] != MAGIC {
            return Err(Error::Format("not a noise path file (bad magic)".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported noise format version {version}")));
        }
        let modes = u32_at(12) as usize;
        let steps = u32_at(16) as usize;
        let path_index = u32_at(20);
        let master_seed = u64_at(24);
        let dt = f64::from_bits(u64_at(32));
        let mu = f64::from_bits(u64_at(40));
        let config_hash: [u8; 32] = header[48..80].try_into().unwrap();
        let mut raw = vec![0u8; 8 * modes * steps];
        r.read_exact(&mut raw)
            .map_err(|_| Error::Format("noise path file truncated".into()))?;
        let increments = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let path = NoisePath { modes, steps, path_index, master_seed, dt, mu, config_hash, increments };
        let expected = NoiseConfig { mu, modes, dt, steps, master_seed }.hash();
        if expected != config_hash {
            return Err(Error::Format("noise path header hash does not match its parameters".into()));
        }
        Ok(path)
    }

    /// Checks that this path was produced by `cfg`.
    pub fn check_matches(&self, cfg: &NoiseConfig) -> Result<()> {
        if self.config_hash != cfg.hash() {
            return Err(Error::Precondition(format!(
                "noise path {} was generated for a different configuration",
                self.path_index
            )));
        }
        Ok(())
    }
}

/// Paths `0..paths` of the ensemble.
pub fn generate_ensemble(cfg: &NoiseConfig, paths: usize, exec: Execution) -> Vec<NoisePath> {
    exec.map(paths, |p| NoisePath::generate(cfg, p as u32))
}

/// Writes a count-prefixed sequence of noise paths.
pub fn write_ensemble<W: Write>(paths: &[NoisePath], mut w: W) -> Result<()> {
    w.write_all(&(paths.len() as u32).to_le_bytes())?;
    for p in paths {
        p.write_to(&mut w)?;
    }
    Ok(())
}

pub fn read_ensemble<R: Read>(mut r: R) -> Result<Vec<NoisePath>> {
    let mut n = [0u8; 4];
    r.read_exact(&mut n)?;
    (0..u32::from_le_bytes(n)).map(|_| NoisePath::read_from(&mut r)).collect()
}

/// Truncated trace of `Q_mu` and the bound `1/N` on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceQ {
    pub partial: f64,
    pub tail_bound: f64,
}

/// `sum_{n < N} 1/(n (n + 1) + mu)`, and `sum_{n >= N} 1/(n (n + 1)) = 1/N`.
pub fn trace_q(mu: f64, modes: usize) -> TraceQ {
    let partial = (0..modes).map(|n| 1.0 / shifted_eigenvalue(n, mu)).sum();
    let tail_bound = if modes == 0 { f64::INFINITY } else { 1.0 / modes as f64 };
    TraceQ { partial, tail_bound }
}

/// `sum_{n=1}^{N} 1/(n (n + 1))`, which telescopes to `1 - 1/(N + 1)`.
pub fn telescoping_sum(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / (k as f64 * (k as f64 + 1.0))).sum()
}

/// Spectral increment `Delta W_k` with coefficient `Delta B^n_k / sqrt(mu_n + mu)`
/// on each of the first `modes` modes.
pub fn sample_increment(path: &NoisePath, step: usize, modes: usize) -> Result<SpectralField> {
    if step >= path.steps {
        return Err(Error::Domain(format!("step {step} out of range (path has {} steps)", path.steps)));
    }
    if modes == 0 || modes > path.modes {
        return Err(Error::Domain(format!("cannot take {modes} modes from a {}-mode path", path.modes)));
    }
    Ok(SpectralField::new(
        (0..modes)
            .map(|n| path.increment(n, step) / shifted_eigenvalue(n, path.mu).sqrt())
            .collect(),
    ))
}

/// Monte Carlo estimate of `E ||W_t||^2`, to be compared with `t Trace Q_mu`.
pub fn isometry_estimate(
    samples: usize,
    t: f64,
    mu: f64,
    modes: usize,
    seed: u64,
    exec: Execution,
) -> Result<MeanEstimate> {
    if samples < 2 {
        return Err(Error::InvalidConfig("isometry estimate needs at least two samples".into()));
    }
    if t == 0.0 {
        return Ok(MeanEstimate { mean: 0.0, stderr: 0.0, samples });
    }
    let cfg = NoiseConfig::new(mu, modes, t, 1, seed)?;
    let values = exec.map(samples, |i| {
        let path = NoisePath::generate(&cfg, i as u32);
        sample_increment(&path, 0, modes).map(|w| w.norm_sq()).unwrap_or(f64::NAN)
    });
    Ok(MeanEstimate::from_samples(&values))
}
