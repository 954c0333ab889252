//! Ensemble runs, Picard runs and ice-cap post-processing, with their on-disk
//! artifacts.
//!
//! A run directory contains
//!
//! | file | content |
//! |------|---------|
//! | `config.json` | the validated configuration |
//! | `trajectories.csv` | `path,step,t,x,u` every `output.stride` steps |
//! | `statistics.csv` | `step,t,x,mean_u,var_u,deterministic_u` at the Gauss nodes |
//! | `snapshots.bin` | spectral snapshots, see [`crate::io`] |
//! | `noise.bin` | noise increments (only with `output.write_noise`) |
//! | `summary.json` | ensemble statistics |
//! | `diagnostics.json`, `distances.csv`, `majorant.csv` | Picard runs only |
//! | `icecaps.csv`, `ice_fraction.csv` | written by [`icecaps`] |
//! | `manifest.json` | inventory with SHA-256 checksums and timings |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coalbedo::CoalbedoProfile;
use crate::config::ModelConfig;
use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ice::{ice_line, IceEntry};
use crate::io::{sha256_file, write_csv, Snapshot, SnapshotFile, SNAPSHOT_VERSION};
use crate::legendre::SpectralField;
use crate::noise::{generate_ensemble, write_ensemble, NoisePath, RNG_ALGORITHM};
use crate::osgood::{solve_scalar, ScalarIvp};
use crate::picard::{bt_norm, simulate, solve_picard, BtEstimate, PicardOptions, PicardSolution, TrajectoryEnsemble};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub exec: Execution,
    pub out_dir: Option<PathBuf>,
    pub emit_gnuplot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub code_version: String,
    pub command: String,
    pub status: String,
    pub errors: Vec<String>,
    pub config_hash: String,
    pub master_seed: u64,
    pub rng_algorithm: String,
    pub snapshot_format_version: u32,
    pub threads: usize,
    pub files: Vec<FileEntry>,
    pub timings_seconds: BTreeMap<String, f64>,
}

impl RunManifest {
    fn new(command: &str, cfg: &ModelConfig, exec: Execution) -> Self {
        RunManifest {
            manifest_version: MANIFEST_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: "ok".into(),
            errors: Vec::new(),
            config_hash: cfg.hash_hex(),
            master_seed: cfg.seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            snapshot_format_version: SNAPSHOT_VERSION,
            threads: thread_count(exec),
            files: Vec::new(),
            timings_seconds: BTreeMap::new(),
        }
    }

    fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        let p = dir.join(name);
        let bytes = fs::metadata(&p)?.len();
        let sha256 = sha256_file(&p)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), sha256, bytes });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?)
    }
}

fn thread_count(exec: Execution) -> usize {
    match exec {
        Execution::Sequential => 1,
        #[cfg(feature = "parallel")]
        Execution::Parallel => rayon::current_num_threads(),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => 1,
    }
}

struct Timer(BTreeMap<String, f64>, Instant);

impl Timer {
    fn new() -> Self {
        Timer(BTreeMap::new(), Instant::now())
    }

    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        *self.0.entry(phase.to_string()).or_default() += (now - self.1).as_secs_f64();
        self.1 = now;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedPath {
    /// `None` for the `eps = 0` reference run.
    pub path: Option<usize>,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub paths: usize,
    pub completed_paths: usize,
    pub failed: Vec<FailedPath>,
    pub horizon: f64,
    /// `||X - X_det||_{B_T}` about the `eps = 0` run.
    pub bt_fluctuation: Option<BtEstimate>,
    /// Global mean temperature `(1/2) int u dx` of the ensemble mean at `T`.
    pub terminal_mean_temperature: Option<f64>,
    pub terminal_deterministic_temperature: Option<f64>,
    pub terminal_ice_fraction_of_mean: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub ensemble: Option<TrajectoryEnsemble>,
    pub path_indices: Vec<usize>,
    pub deterministic: Option<TrajectoryEnsemble>,
    /// Ensemble-mean spectral state at every grid time.
    pub mean: Vec<SpectralField>,
    /// Ensemble variance of `u` at the Gauss nodes per grid time.
    pub variance: Vec<Vec<f64>>,
    pub summary: EnsembleSummary,
    pub manifest: RunManifest,
}

fn mean_temperature(field: &SpectralField, u_c: f64) -> f64 {
    field.coeffs()[0] / std::f64::consts::SQRT_2 + u_c
}

fn stats(model: &Model, ens: &TrajectoryEnsemble) -> (Vec<SpectralField>, Vec<Vec<f64>>) {
    let n = ens.len() as f64;
    let basis = model.basis();
    let mut mean = Vec::with_capacity(ens.steps() + 1);
    let mut var = Vec::with_capacity(ens.steps() + 1);
    for k in 0..=ens.steps() {
        let mut m = vec![0.0; ens.modes()];
        for p in 0..ens.len() {
            for (a, c) in m.iter_mut().zip(ens.coeffs(p, k)) {
                *a += c;
            }
        }
        m.iter_mut().for_each(|a| *a /= n);
        let mf = SpectralField::new(m);
        let mu = basis.to_physical(&mf);
        let mut v = vec![0.0; mu.len()];
        if ens.len() > 1 {
            for p in 0..ens.len() {
                let phys = basis.to_physical(&ens.state(p, k));
                for j in 0..v.len() {
                    v[j] += (phys[j] - mu[j]).powi(2);
                }
            }
            v.iter_mut().for_each(|a| *a /= n - 1.0);
        }
        mean.push(mf);
        var.push(v);
    }
    (mean, var)
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn recorded_steps(steps: usize, stride: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..=steps).step_by(stride.max(1)).collect();
    if *ks.last().unwrap() != steps {
        ks.push(steps);
    }
    ks
}

fn output_grid(model: &Model) -> Vec<f64> {
    match model.config().output.grid_points {
        0 => model.basis().nodes().to_vec(),
        1 => vec![0.0],
        m => (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect(),
    }
}

fn write_trajectories(dir: &Path, model: &Model, ens: &TrajectoryEnsemble, indices: &[usize]) -> Result<()> {
    let u_c = model.critical_temperature();
    let dt = model.dt();
    let grid = output_grid(model);
    let ks = recorded_steps(ens.steps(), model.config().output.stride);
    let mut rows = Vec::new();
    for (p, &idx) in indices.iter().enumerate() {
        for &k in &ks {
            let f = ens.state(p, k);
            for &x in &grid {
                let u = f.eval(x)? + u_c;
                rows.push(vec![idx.to_string(), k.to_string(), fmt(k as f64 * dt), fmt(x), fmt(u)]);
            }
        }
    }
    write_csv(&dir.join("trajectories.csv"), &["path", "step", "t", "x", "u"], rows)
}

fn snapshot_file(model: &Model, ens: &TrajectoryEnsemble, indices: &[usize]) -> SnapshotFile {
    let ks = recorded_steps(ens.steps(), model.config().output.stride);
    let records = indices
        .iter()
        .enumerate()
        .flat_map(|(p, &idx)| {
            ks.iter().map(move |&k| Snapshot {
                path: idx as u32,
                step: k as u32,
                t: k as f64 * model.dt(),
                field: ens.state(p, k),
            })
        })
        .collect();
    SnapshotFile {
        modes: model.modes(),
        stride: model.config().output.stride,
        dt: model.dt(),
        critical_temperature: model.critical_temperature(),
        config_hash: model.config().hash(),
        records,
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Simulates `cfg.paths` trajectories on independent noise streams.
///
/// Paths that blow up are reported in the summary and manifest; the outputs
/// of the others are still written, and the first failure is returned.
pub fn run_ensemble(cfg: &ModelConfig, opts: &RunOptions) -> Result<EnsembleResult> {
    let mut timer = Timer::new();
    let exec = opts.exec;
    let model = Model::new(cfg)?;
    let noise = generate_ensemble(&model.noise_config()?, cfg.paths, exec);
    timer.lap("noise");

    let x0 = model.initial_state();
    let runs = exec.map(noise.len(), |p| simulate(&model, x0, &noise[p..p + 1], Execution::Sequential));
    let mut parts = Vec::new();
    let mut indices = Vec::new();
    let mut failed = Vec::new();
    let mut first_err = None;
    for (p, r) in runs.into_iter().enumerate() {
        match r {
            Ok(e) => {
                parts.push(e);
                indices.push(p);
            }
            Err(e) => {
                failed.push(FailedPath { path: Some(p), error: e.to_string() });
                first_err.get_or_insert(e);
            }
        }
    }
    let mut det_cfg = cfg.clone();
    det_cfg.epsilon = 0.0;
    let det_model = Model::new(&det_cfg)?;
    let deterministic = simulate(&det_model, x0, &noise[..1], Execution::Sequential);
    if let Err(e) = &deterministic {
        failed.push(FailedPath { path: None, error: format!("deterministic run: {e}") });
    }
    let deterministic = deterministic.ok();
    timer.lap("simulate");

    let ensemble = if parts.is_empty() { None } else { Some(TrajectoryEnsemble::merge(parts)?) };
    let u_c = model.critical_temperature();
    let (mean, variance, bt_fluctuation) = match &ensemble {
        Some(e) => {
            let (m, v) = stats(&model, e);
            let fl = match &deterministic {
                Some(d) => Some(bt_norm(e, &d.replicate(e.len()))?),
                None => None,
            };
            (m, v, fl)
        }
        None => (Vec::new(), Vec::new(), None),
    };
    let summary = EnsembleSummary {
        paths: cfg.paths,
        completed_paths: indices.len(),
        failed,
        horizon: cfg.horizon(),
        bt_fluctuation,
        terminal_mean_temperature: mean.last().map(|m| mean_temperature(m, u_c)),
        terminal_deterministic_temperature: deterministic.as_ref().map(|d| mean_temperature(&d.state(0, cfg.steps), u_c)),
        terminal_ice_fraction_of_mean: mean.last().map(|m| ice_line(m, cfg.output.ice_grid_points).ice_fraction),
    };
    timer.lap("statistics");

    let mut manifest = RunManifest::new("simulate", cfg, exec);
    if first_err.is_some() {
        manifest.status = "failed".into();
        manifest.errors = summary
            .failed
            .iter()
            .map(|f| match f.path {
                Some(p) => format!("path {p}: {}", f.error),
                None => f.error.clone(),
            })
            .collect();
    }
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), cfg.to_json_pretty())?;
        manifest.record(dir, "config.json")?;
        if let Some(e) = &ensemble {
            write_trajectories(dir, &model, e, &indices)?;
            manifest.record(dir, "trajectories.csv")?;
            snapshot_file(&model, e, &indices).write_path(&dir.join("snapshots.bin"))?;
            manifest.record(dir, "snapshots.bin")?;
            let det_phys: Option<Vec<Vec<f64>>> = deterministic
                .as_ref()
                .map(|d| (0..=cfg.steps).map(|k| model.basis().to_physical(&d.state(0, k))).collect());
            let nodes = model.basis().nodes();
            let mut rows = Vec::new();
            for k in recorded_steps(cfg.steps, cfg.output.stride) {
                let mphys = model.basis().to_physical(&mean[k]);
                for j in 0..nodes.len() {
                    rows.push(vec![
                        k.to_string(),
                        fmt(k as f64 * cfg.dt),
                        fmt(nodes[j]),
                        fmt(mphys[j] + u_c),
                        fmt(variance[k][j]),
                        det_phys.as_ref().map(|d| fmt(d[k][j] + u_c)).unwrap_or_default(),
                    ]);
                }
            }
            write_csv(
                &dir.join("statistics.csv"),
                &["step", "t", "x", "mean_u", "var_u", "deterministic_u"],
                rows,
            )?;
            manifest.record(dir, "statistics.csv")?;
        }
        if cfg.output.write_noise {
            let f = fs::File::create(dir.join("noise.bin"))?;
            write_ensemble(&noise, std::io::BufWriter::new(f))?;
            manifest.record(dir, "noise.bin")?;
        }
        write_json(dir, "summary.json", &summary)?;
        manifest.record(dir, "summary.json")?;
        if opts.emit_gnuplot {
            fs::write(dir.join("plot.gp"), SIMULATE_GNUPLOT)?;
            manifest.record(dir, "plot.gp")?;
        }
        timer.lap("write");
        manifest.timings_seconds = timer.0.clone();
        manifest.write(dir)?;
    } else {
        manifest.timings_seconds = timer.0.clone();
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(EnsembleResult { ensemble, path_indices: indices, deterministic, mean, variance, summary, manifest })
}

const SIMULATE_GNUPLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 'x = sin(latitude)'
set ylabel 'u'
stats 'statistics.csv' using 1 nooutput
last = STATS_max
plot 'statistics.csv' using ($1 == last ? $3 : 1/0):4 with linespoints title 'ensemble mean', \\
     '' using ($1 == last ? $3 : 1/0):6 with lines title 'deterministic'
";

const PICARD_GNUPLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 'iteration'
set ylabel 'B_T distance'
plot 'distances.csv' using 1:2:3 with yerrorlines
";

const ICECAPS_GNUPLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set ylabel 'ice fraction'
set yrange [0:1]
plot 'ice_fraction.csv' using 2:3 with lines title 'mean', '' using 2:4 with lines title 'min', '' using 2:5 with lines title 'max'
";

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub model: Model,
    pub noise: Vec<NoisePath>,
    pub solution: PicardSolution,
    pub manifest: RunManifest,
}

/// Successive approximations on `cfg.paths` frozen noise paths.
///
/// Diagnostics are written even when the iteration does not converge, in which
/// case [`Error::NonConvergence`] is returned afterwards.
pub fn run_picard(cfg: &ModelConfig, tol: f64, max_iter: usize, opts: &RunOptions) -> Result<PicardRun> {
    let mut timer = Timer::new();
    let exec = opts.exec;
    let model = Model::new(cfg)?;
    let noise = generate_ensemble(&model.noise_config()?, cfg.paths, exec);
    timer.lap("noise");
    let popts = PicardOptions { tol, max_iter, exec, check_majorant: true };
    let solution = solve_picard(&model, model.initial_state(), &noise, &popts)?;
    timer.lap("iterate");
    let d = &solution.diagnostics;
    let mut manifest = RunManifest::new("picard", cfg, exec);
    let conv = d.ensure_converged();
    if let Err(e) = &conv {
        manifest.status = "not_converged".into();
        manifest.errors.push(e.to_string());
    }
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), cfg.to_json_pretty())?;
        manifest.record(dir, "config.json")?;
        write_json(dir, "diagnostics.json", d)?;
        manifest.record(dir, "diagnostics.json")?;
        write_csv(
            &dir.join("distances.csv"),
            &["iteration", "distance", "stderr"],
            d.distances
                .iter()
                .enumerate()
                .map(|(i, x)| vec![(i + 1).to_string(), fmt(x.estimate), fmt(x.stderr)]),
        )?;
        manifest.record(dir, "distances.csv")?;
        if let Some(mj) = &d.majorant {
            let last = solution.profiles.last().unwrap();
            write_csv(
                &dir.join("majorant.csv"),
                &["step", "t", "majorant", "estimate", "stderr"],
                mj.times.iter().zip(&mj.values).zip(last).enumerate().map(|(k, ((t, v), e))| {
                    vec![k.to_string(), fmt(*t), fmt(*v), fmt(e.mean), fmt(e.stderr)]
                }),
            )?;
            manifest.record(dir, "majorant.csv")?;
        }
        let indices: Vec<usize> = (0..cfg.paths).collect();
        write_trajectories(dir, &model, &solution.ensemble, &indices)?;
        manifest.record(dir, "trajectories.csv")?;
        snapshot_file(&model, &solution.ensemble, &indices).write_path(&dir.join("snapshots.bin"))?;
        manifest.record(dir, "snapshots.bin")?;
        if opts.emit_gnuplot {
            fs::write(dir.join("plot.gp"), PICARD_GNUPLOT)?;
            manifest.record(dir, "plot.gp")?;
        }
        timer.lap("write");
        manifest.timings_seconds = timer.0.clone();
        manifest.write(dir)?;
    } else {
        manifest.timings_seconds = timer.0.clone();
    }
    conv?;
    Ok(PicardRun { model, noise, solution, manifest })
}

#[derive(Debug, Clone, Serialize)]
pub struct IceReport {
    pub entries: Vec<IceEntry>,
}

impl IceReport {
    /// `(t, mean, min, max)` of the ice fraction across paths per time.
    pub fn fraction_series(&self) -> Vec<(u32, f64, f64, f64, f64)> {
        let mut by_step: BTreeMap<u32, (f64, Vec<f64>)> = BTreeMap::new();
        for e in &self.entries {
            by_step.entry(e.step).or_insert((e.t, Vec::new())).1.push(e.line.ice_fraction);
        }
        by_step
            .into_iter()
            .map(|(k, (t, v))| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (k, t, mean, min, max)
            })
            .collect()
    }
}

/// Ice lines of every snapshot in a run directory.
pub fn ice_report(snapshots: &SnapshotFile, grid_points: usize) -> IceReport {
    IceReport {
        entries: snapshots
            .records
            .iter()
            .map(|r| IceEntry { path: r.path, step: r.step, t: r.t, line: ice_line(&r.field, grid_points) })
            .collect(),
    }
}

/// Post-processes `run_dir/snapshots.bin` into `icecaps.csv` and
/// `ice_fraction.csv`, adding both to the run manifest.
pub fn icecaps(run_dir: &Path, grid_points: Option<usize>, emit_gnuplot: bool) -> Result<IceReport> {
    let snap_path = run_dir.join("snapshots.bin");
    if !snap_path.exists() {
        return Err(Error::InvalidConfig(format!("{} has no snapshots.bin", run_dir.display())));
    }
    let snaps = SnapshotFile::read_path(&snap_path)?;
    let grid = match grid_points {
        Some(g) => g,
        None => ModelConfig::from_path(&run_dir.join("config.json"))
            .map(|c| c.output.ice_grid_points)
            .unwrap_or(2001),
    };
    let report = ice_report(&snaps, grid);
    write_csv(
        &run_dir.join("icecaps.csv"),
        &["path", "step", "t", "ice_fraction", "crossings"],
        report.entries.iter().map(|e| {
            vec![
                e.path.to_string(),
                e.step.to_string(),
                fmt(e.t),
                fmt(e.line.ice_fraction),
                e.line.crossings.iter().map(|c| format!("{c:.9}")).collect::<Vec<_>>().join(";"),
            ]
        }),
    )?;
    write_csv(
        &run_dir.join("ice_fraction.csv"),
        &["step", "t", "mean", "min", "max"],
        report
            .fraction_series()
            .into_iter()
            .map(|(k, t, m, lo, hi)| vec![k.to_string(), fmt(t), fmt(m), fmt(lo), fmt(hi)]),
    )?;
    if emit_gnuplot {
        fs::write(run_dir.join("icecaps.gp"), ICECAPS_GNUPLOT)?;
    }
    if let Ok(mut m) = RunManifest::read(run_dir) {
        m.record(run_dir, "icecaps.csv")?;
        m.record(run_dir, "ice_fraction.csv")?;
        if emit_gnuplot {
            m.record(run_dir, "icecaps.gp")?;
        }
        m.write(run_dir)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub v: f64,
    /// `exp(ln(v0) exp(-alpha K' t))`, valid while it stays below `1/e`.
    pub closed_form: Option<f64>,
}

/// Scalar Osgood table for the co-albedo modulus.
pub fn oracle_table(profile: &CoalbedoProfile, v0: f64, alpha: f64, horizon: f64, points: usize) -> Result<Vec<OracleRow>> {
    let ivp = ScalarIvp::new(v0, alpha, horizon, profile)?;
    let k = profile.slope_constant();
    Ok(solve_scalar(&ivp, points.max(1))?
        .into_iter()
        .map(|(t, v)| {
            let closed = if v0 == 0.0 {
                Some(0.0)
            } else if v0 < crate::coalbedo::INV_E {
                let c = (v0.ln() * (-alpha * k * t).exp()).exp();
                (c < crate::coalbedo::INV_E).then_some(c)
            } else {
                None
            };
            OracleRow { t, v, closed_form: closed }
        })
        .collect())
}

pub fn write_oracle_csv(path: &Path, rows: &[OracleRow]) -> Result<()> {
    write_csv(
        path,
        &["t", "v", "closed_form"],
        rows.iter().map(|r| vec![fmt(r.t), fmt(r.v), r.closed_form.map(fmt).unwrap_or_default()]),
    )
}
