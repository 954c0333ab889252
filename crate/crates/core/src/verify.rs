//! Reduced-size invariant suite behind `sebm verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coalbedo::CoalbedoProfile;
use crate::config::{InitialCondition, ModelConfig};
use crate::dynamics::Model;
use crate::error::Result;
use crate::exec::Execution;
use crate::legendre::{SpectralBasis, SpectralField};
use crate::noise::{generate_ensemble, isometry_estimate, telescoping_sum, trace_q};
use crate::osgood::{solve_scalar, ScalarIvp};
use crate::picard::{
    comparison_experiment, continuous_dependence_experiment, doss_sussman_check, simulate, solve_picard,
    PicardOptions,
};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Configuration used by the suite unless one is supplied.
pub fn desk_config() -> ModelConfig {
    ModelConfig::from_json_str(include_str!("../../../configs/desk.json")).expect("bundled config is valid")
}

pub fn run_suite(base: &ModelConfig, exec: Execution) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    let basis = SpectralBasis::new(32, 64)?;
    let rule = basis.rule();
    let mut gram_err = 0.0f64;
    for i in 0..32 {
        for j in 0..32 {
            let s: f64 = (0..rule.order())
                .map(|k| rule.weights()[k] * basis.basis_row(i)[k] * basis.basis_row(j)[k])
                .sum();
            gram_err = gram_err.max((s - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    checks.push(check("gram", gram_err < 1e-10, format!("max |G - I| = {gram_err:.2e}")));

    let tele = [10usize, 100, 1000]
        .iter()
        .map(|&n| (telescoping_sum(n) - (1.0 - 1.0 / (n as f64 + 1.0))).abs())
        .fold(0.0, f64::max);
    let tr = trace_q(1.0, 1000);
    checks.push(check(
        "trace",
        tele < 1e-14 && tr.partial + tr.tail_bound < 2.0,
        format!("telescoping error {tele:.1e}, partial + tail = {:.6}", tr.partial + tr.tail_bound),
    ));

    let est = isometry_estimate(2000, 1.0, 1.0, 32, 5, exec)?;
    let target = trace_q(1.0, 32).partial;
    checks.push(check(
        "isometry",
        (est.mean - target).abs() < 5.0 * est.stderr,
        format!("E|W_1|^2 = {:.4} +- {:.4}, trace = {target:.4}", est.mean, est.stderr),
    ));

    let p = CoalbedoProfile::centered(0.3, 0.7, 0.1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let u: f64 = rng.random_range(-0.5..0.6);
        let v: f64 = rng.random_range(-0.5..0.6);
        worst = worst.max((p.beta(u) - p.beta(v)).abs() - p.theta_unchecked((u - v).abs()));
        let (a, b) = (u.abs(), v.abs());
        worst = worst.max(p.theta_unchecked(a + b) - p.theta_unchecked(a) - p.theta_unchecked(b));
        worst = worst.max(0.5 * (p.theta_unchecked(a) + p.theta_unchecked(b)) - p.theta_unchecked(0.5 * (a + b)));
    }
    checks.push(check("modulus", worst <= 1e-12, format!("largest excess {worst:.2e}")));

    let ivp = ScalarIvp::new(1e-3, 1.0, 1.0, &p)?;
    let k = p.slope_constant();
    let rel = solve_scalar(&ivp, 100)?
        .into_iter()
        .map(|(t, v)| {
            let c = ((1e-3f64).ln() * (-k * t).exp()).exp();
            (v - c).abs() / c
        })
        .fold(0.0, f64::max);
    let zero = solve_scalar(&ScalarIvp::new(0.0, 1.0, 1.0, &p)?, 100)?.iter().all(|r| r.1 == 0.0);
    checks.push(check("osgood", rel < 1e-6 && zero, format!("max relative error {rel:.2e}")));

    let mut c = base.clone();
    c.paths = 4;
    c.epsilon = 0.0;
    let m = Model::new(&c)?;
    let noise = generate_ensemble(&m.noise_config()?, c.paths, exec);
    let stoch = simulate(&m, m.initial_state(), &noise, exec)?;
    let det = m.integrate(m.initial_state(), None)?;
    let exact = (0..stoch.len()).all(|i| stoch.path(i) == det);
    let mut smooth = base.clone();
    smooth.epsilon = 0.0;
    smooth.initial = InitialCondition::Legendre(vec![0.0, 0.0, -2.0]);
    let run = |dt: f64| -> Result<SpectralField> {
        let mut cc = smooth.clone();
        cc.dt = dt;
        cc.steps = (1.0 / dt).round() as usize;
        let m = Model::new(&cc)?;
        Ok(m.integrate(m.initial_state(), None)?.pop().unwrap())
    };
    let err = |h: f64| -> Result<f64> { Ok(run(h)?.sub(&run(h / 4.0)?).norm()) };
    let ratio = err(1.0 / 32.0)? / err(1.0 / 64.0)?;
    checks.push(check(
        "deterministic-limit",
        exact && (1.7..=2.3).contains(&ratio),
        format!("bit-exact: {exact}, convergence ratio {ratio:.3}"),
    ));

    let mut sup = base.clone();
    sup.epsilon = 0.0;
    let kk = Model::new(&sup)?.supersolution_k(-100.0)?;
    sup.initial = InitialCondition::Constant(kk);
    let ms = Model::new(&sup)?;
    let peak = ms
        .integrate(ms.initial_state(), None)?
        .iter()
        .map(|s| ms.temperature_at_nodes(s).into_iter().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(check("supersolution", peak <= kk + 1e-6, format!("K = {kk:.6}, max u = {peak:.6}")));

    let mut pc = base.clone();
    pc.paths = 16;
    let mp = Model::new(&pc)?;
    let pn = generate_ensemble(&mp.noise_config()?, pc.paths, exec);
    let sol = solve_picard(&mp, mp.initial_state(), &pn, &PicardOptions { tol: 1e-3, max_iter: 25, exec, check_majorant: true })?;
    let d = &sol.diagnostics;
    let maj_ok = d.majorant.as_ref().map(|m| m.violations == 0).unwrap_or(false);
    checks.push(check(
        "picard",
        d.converged && d.residual.estimate < 2e-3 && maj_ok,
        format!("{} iterations, residual {:.2e}, majorant ok: {maj_ok}", d.iterations, d.residual.estimate),
    ));

    let x0 = mp.initial_state().clone();
    let one = SpectralField::constant(mp.modes(), 1.0);
    let cmp = comparison_experiment(&mp, &x0, &x0.add(&one), &pn[..8], exec)?;
    checks.push(check("comparison", cmp.max_violation <= 1e-6, format!("max violation {:.2e}", cmp.max_violation)));

    let dep = continuous_dependence_experiment(&mp, &x0, &one, &[1.0, 0.5, 0.25, 0.125], &pn, exec)?;
    let ds: Vec<String> = dep.rows.iter().map(|r| format!("{:.3e}", r.distance.estimate)).collect();
    checks.push(check("continuous-dependence", dep.nonincreasing, format!("distances {}", ds.join(", "))));

    let mut dc = base.clone();
    dc.dt = 1.0 / 64.0;
    dc.steps = 64;
    let ds0 = doss_sussman_check(&dc, 0.0, 4, exec)?;
    let ds1 = doss_sussman_check(&dc, 0.5, 8, exec)?;
    let ok = ds0.levels.iter().all(|l| l.max_difference < 1e-12) && ds1.ratios.iter().all(|&r| r < 1.0);
    checks.push(check("doss-sussman", ok, format!("ratios {:?}", ds1.ratios)));

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_the_bundled_config() {
        let r = run_suite(&desk_config(), Execution::Sequential).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(r.checks.len(), 11);
    }
}
