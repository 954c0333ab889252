//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sebm::coalbedo::CoalbedoProfile;
use sebm::config::{Emission, InitialCondition, ModelConfig, NoiseCoupling};
use sebm::dynamics::Model;
use sebm::exec::Execution;
use sebm::legendre::{eval_basis, SpectralBasis, SpectralField};
use sebm::noise::{generate_ensemble, isometry_estimate, telescoping_sum, trace_q, NoiseConfig, NoisePath};
use sebm::osgood::{solve_scalar, ScalarIvp};
use sebm::picard::{
    comparison_experiment, continuous_dependence_experiment, doss_sussman_check, simulate, solve_picard,
    PicardOptions, TrajectoryEnsemble,
};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn exec() -> Execution {
    Execution::default()
}

fn desk() -> ModelConfig {
    ModelConfig::from_json_str(include_str!("../../../configs/desk.json")).unwrap()
}

fn err(e: sebm::Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------- oracles

/// `P_n(x)` from the three-term recurrence.
fn legendre_p(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn unit_legendre(n: usize, x: f64) -> f64 {
    ((2.0 * n as f64 + 1.0) / 2.0).sqrt() * legendre_p(n, x)
}

/// Clenshaw–Curtis rule on `n + 1` Chebyshev extreme points (`n` even),
/// exact for polynomials of degree `n`.
fn clenshaw_curtis(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n.is_multiple_of(2));
    let nf = n as f64;
    let mut x = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let th = k as f64 * PI / nf;
        let mut s = 0.0;
        for j in 1..=n / 2 {
            let b = if j == n / 2 { 1.0 } else { 2.0 };
            s += b / (4.0 * (j * j) as f64 - 1.0) * (2.0 * j as f64 * th).cos();
        }
        let c = if k == 0 || k == n { 1.0 } else { 2.0 };
        x.push(th.cos());
        w.push(c / nf * (1.0 - s));
    }
    (x, w)
}

fn theta_oracle(p: &CoalbedoProfile, u: f64) -> f64 {
    let k = (p.beta_water() - p.beta_ice()) / (p.ramp_width() * (1.0 / p.ramp_width()).ln());
    let ie = (-1.0f64).exp();
    if u <= 0.0 {
        0.0
    } else if u < ie {
        k * u * (1.0 / u).ln()
    } else {
        k * ie
    }
}

/// Per-path `sup_k ||a - b||^2`, then `(sqrt(mean), delta-method stderr)`.
fn bt_oracle(a: &TrajectoryEnsemble, b: &TrajectoryEnsemble) -> (f64, f64) {
    let n = a.modes();
    let per: Vec<f64> = (0..a.len())
        .map(|p| {
            (0..=a.steps())
                .map(|k| {
                    let (x, y) = (a.coeffs(p, k), b.coeffs(p, k));
                    (0..n).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let m = per.len() as f64;
    let mean = per.iter().sum::<f64>() / m;
    let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let se = (var / m).sqrt();
    let d = mean.sqrt();
    (d, if d > 0.0 { se / (2.0 * d) } else { 0.0 })
}

// ---------------------------------------------------------------- criteria

fn c1_eigenstructure() -> Outcome {
    let (x, w) = clenshaw_curtis(256);
    let mut gram = 0.0f64;
    for i in 0..32 {
        for j in 0..=i {
            let s: f64 = (0..x.len())
                .map(|k| w[k] * eval_basis(i, x[k]).unwrap() * eval_basis(j, x[k]).unwrap())
                .sum();
            gram = gram.max((s - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let basis = SpectralBasis::new(32, 64).map_err(err)?;
    let rule = basis.rule();
    let mut gram_gauss = 0.0f64;
    for i in 0..32 {
        for j in 0..=i {
            let s: f64 = (0..rule.order()).map(|k| rule.weights()[k] * basis.basis_row(i)[k] * basis.basis_row(j)[k]).sum();
            gram_gauss = gram_gauss.max((s - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut table = 0.0f64;
    for n in 0..32 {
        for (k, &xk) in basis.nodes().iter().enumerate() {
            table = table.max((basis.basis_row(n)[k] - unit_legendre(n, xk)).abs());
        }
    }

    let mu = 1.0;
    let mut rayleigh = 0.0f64;
    for n in 0..=16 {
        let f = |t: f64| eval_basis(n, t).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..x.len() {
            let xk = x[k];
            let e = f(xk);
            den += w[k] * e * e;
            if xk.abs() < 1.0 {
                let h = (1e-4f64).min((1.0 - xk.abs()) / 2.5);
                let d = (-f(xk + 2.0 * h) + 8.0 * f(xk + h) - 8.0 * f(xk - h) + f(xk - 2.0 * h)) / (12.0 * h);
                num += w[k] * (1.0 - xk * xk) * d * d;
            }
        }
        let q = (num + mu * den) / den;
        let exact = (n * (n + 1)) as f64 + mu;
        rayleigh = rayleigh.max((q - exact).abs() / exact);
    }
    Ok((
        gram < 1e-10 && gram_gauss < 1e-10 && table < 1e-10 && rayleigh < 1e-6,
        format!(
            "Gram (Clenshaw-Curtis) {gram:.1e}, Gram (solver rule) {gram_gauss:.1e}, basis table {table:.1e}, \
             Rayleigh rel {rayleigh:.1e}"
        ),
    ))
}

fn c2_trace() -> Outcome {
    let mut tele = 0.0f64;
    for n in [10usize, 100, 1000] {
        tele = tele.max((telescoping_sum(n) - (1.0 - 1.0 / (n as f64 + 1.0))).abs());
    }
    let long: f64 = (0..2_000_000u64).map(|n| 1.0 / ((n * (n + 1)) as f64 + 1.0)).sum();
    let mut ok = tele <= 1e-14;
    let mut worst = 0.0f64;
    for n in [10usize, 100, 1000] {
        let t = trace_q(1.0, n);
        let partial: f64 = (0..n).map(|k| 1.0 / ((k * (k + 1)) as f64 + 1.0)).sum();
        let total = t.partial + t.tail_bound;
        ok &= total < 2.0 && (t.partial - partial).abs() < 1e-13 && total >= long - 1e-9;
        worst = worst.max(total);
    }
    Ok((ok, format!("telescoping error {tele:.1e}, max partial + tail {worst:.6} (< 2), full trace {long:.6}")))
}

fn c3_isometry() -> Outcome {
    let target: f64 = (0..32).map(|n| 1.0 / ((n * (n + 1)) as f64 + 1.0)).sum();
    let mut ok = true;
    let mut parts = Vec::new();
    for (t, seed) in [(0.5, 31u64), (1.0, 32)] {
        let e = isometry_estimate(10_000, t, 1.0, 32, seed, exec()).map_err(err)?;
        let z = (e.mean - t * target).abs() / e.stderr;
        ok &= z < 5.0;
        parts.push(format!("t={t}: {:.4} +- {:.4} vs {:.4} ({z:.2} se)", e.mean, e.stderr, t * target));
    }
    Ok((ok, parts.join("; ")))
}

fn c4_modulus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst = [f64::NEG_INFINITY; 4];
    for &(bi, bw, d) in &[(0.38, 0.69, 0.3), (0.3, 0.7, 0.05), (0.25, 0.6, 1.0 / std::f64::consts::E)] {
        let p = CoalbedoProfile::centered(bi, bw, d).map_err(err)?;
        for _ in 0..100_000 {
            let u: f64 = rng.random_range(-0.5..1.0);
            let v: f64 = rng.random_range(-0.5..1.0);
            worst[0] = worst[0].max((p.beta(u) - p.beta(v)).abs() - theta_oracle(&p, (u - v).abs()));
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            let th = |s: f64| p.theta(s).unwrap();
            worst[1] = worst[1].max(th(a + b) - th(a) - th(b));
            worst[2] = worst[2].max(0.5 * (th(a) + th(b)) - th(0.5 * (a + b)));
            worst[3] = worst[3].max((th(a) - theta_oracle(&p, a)).abs());
        }
    }
    Ok((
        worst[0] <= 1e-12 && worst[1] <= 1e-12 && worst[2] <= 1e-12 && worst[3] <= 1e-14,
        format!(
            "max excess: continuity {:.1e}, subadditivity {:.1e}, concavity {:.1e}; theta vs formula {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn c5_osgood() -> Outcome {
    let mut rel = 0.0f64;
    let mut ok = true;
    for &(d, v0, alpha) in &[(0.3, 1e-3, 1.0), (0.3, 1e-6, 2.0), (0.1, 1e-2, 0.5)] {
        let p = CoalbedoProfile::centered(0.38, 0.69, d).map_err(err)?;
        let k = (p.beta_water() - p.beta_ice()) / (d * (1.0 / d).ln());
        let rows = solve_scalar(&ScalarIvp::new(v0, alpha, 1.0, &p).map_err(err)?, 100).map_err(err)?;
        ok &= rows.len() == 101;
        for (t, v) in rows {
            let c = (v0.ln() * (-alpha * k * t).exp()).exp();
            ok &= c < (-1.0f64).exp();
            rel = rel.max((v - c).abs() / c);
        }
    }
    let p = CoalbedoProfile::centered(0.38, 0.69, 0.3).map_err(err)?;
    let zero = solve_scalar(&ScalarIvp::new(0.0, 3.0, 1.0, &p).map_err(err)?, 100).map_err(err)?;
    let null = zero.len() == 101 && zero.iter().all(|r| r.1 == 0.0);
    Ok((ok && rel < 1e-6 && null, format!("max relative error {rel:.1e} on 3 x 101 points; v0 = 0 null: {null}")))
}

fn c6_deterministic_limit() -> Outcome {
    let mut c = desk();
    c.epsilon = 0.0;
    c.paths = 8;
    let m = Model::new(&c).map_err(err)?;
    let noise = generate_ensemble(&m.noise_config().map_err(err)?, c.paths, exec());
    let stoch = simulate(&m, m.initial_state(), &noise, exec()).map_err(err)?;
    let det = m.integrate(m.initial_state(), None).map_err(err)?;
    let exact = (0..stoch.len()).all(|i| stoch.path(i) == det);

    let smooth_linear = {
        let mut s = desk();
        s.epsilon = 0.0;
        s.initial = InitialCondition::Legendre(vec![0.0, 0.0, -2.0]);
        s
    };
    let smooth_cubic = {
        let mut s = smooth_linear.clone();
        s.emission = Emission::Polynomial(vec![12.45, 1.0, 0.0, 0.01]);
        s
    };
    let mut ok = exact;
    let mut parts = vec![format!("bit-exact over {} paths: {exact}", c.paths)];
    for (label, base) in [("linear", smooth_linear), ("cubic", smooth_cubic)] {
        let terminal = |dt: f64| -> Result<SpectralField, String> {
            let mut cc = base.clone();
            cc.dt = dt;
            cc.steps = (1.0 / dt).round() as usize;
            let m = Model::new(&cc).map_err(err)?;
            Ok(m.integrate(m.initial_state(), None).map_err(err)?.pop().unwrap())
        };
        let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
        let mut errs = Vec::new();
        for &h in &hs {
            errs.push(terminal(h)?.sub(&terminal(h / 4.0)?).norm());
        }
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        ok &= ratios.iter().all(|r| (1.7..=2.3).contains(r));
        parts.push(format!(
            "{label} emission ratios {}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c7_supersolution() -> Outcome {
    let mut c = desk();
    c.epsilon = 0.0;
    let model = Model::new(&c).map_err(err)?;
    let s_max = model
        .basis()
        .nodes()
        .iter()
        .map(|&x| 1.0 - 0.482 * legendre_p(2, x))
        .fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = (12.45, 1.0);
    let k_oracle = (c.solar_constant * s_max * c.coalbedo.beta_water() - a) / b;
    let k = model.supersolution_k(-100.0).map_err(err)?;
    let k_continuous = (c.solar_constant * 1.241 * c.coalbedo.beta_water() - a) / b;
    let mut worst = f64::NEG_INFINITY;
    for level in [k, k_continuous] {
        let mut cc = c.clone();
        cc.initial = InitialCondition::Constant(level);
        let m = Model::new(&cc).map_err(err)?;
        for x in m.integrate(m.initial_state(), None).map_err(err)? {
            for u in m.temperature_at_nodes(&x) {
                worst = worst.max(u - level);
            }
        }
    }
    Ok((
        (k - k_oracle).abs() < 1e-12 && worst <= 1e-6,
        format!("K = {k:.9} (oracle {k_oracle:.9}), max(u - K) over both runs {worst:.1e}"),
    ))
}

fn c8_picard() -> Outcome {
    let c = desk();
    let model = Model::new(&c).map_err(err)?;
    let noise = generate_ensemble(&model.noise_config().map_err(err)?, 64, exec());
    let sol = solve_picard(
        &model,
        model.initial_state(),
        &noise,
        &PicardOptions { tol: 1e-3, max_iter: 25, exec: exec(), check_majorant: true },
    )
    .map_err(err)?;
    let d = &sol.diagnostics;
    let maj = d.majorant.as_ref().ok_or("majorant missing")?;

    // independent majorant: RK4 on v' = alpha (L v + s theta(v))
    let s_inf = model
        .basis()
        .nodes()
        .iter()
        .map(|&x| 1.0 - 0.482 * legendre_p(2, x))
        .fold(f64::NEG_INFINITY, f64::max);
    let lin = 1.0 + c.mu;
    let scale = c.solar_constant * s_inf + 1.0;
    let p = &c.coalbedo;
    let rhs = |v: f64| maj.alpha * (lin * v + scale * theta_oracle(p, v));
    let sub = 64;
    let h = model.dt() / sub as f64;
    let mut v = maj.v0;
    let mut oracle = vec![v];
    for _ in 0..model.steps() {
        for _ in 0..sub {
            let k1 = rhs(v);
            let k2 = rhs(v + 0.5 * h * k1);
            let k3 = rhs(v + 0.5 * h * k2);
            let k4 = rhs(v + h * k3);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        oracle.push(v);
    }
    let maj_rel = maj
        .values
        .iter()
        .zip(&oracle)
        .filter(|(a, _)| a.is_finite())
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    let mut excess = f64::NEG_INFINITY;
    for prof in &sol.profiles {
        for (e, v) in prof.iter().zip(&oracle) {
            excess = excess.max(e.mean - v - 3.0 * e.stderr);
        }
    }
    let monotone = d
        .distances
        .windows(2)
        .all(|w| w[1].estimate <= w[0].estimate + 2.0 * (w[0].stderr + w[1].stderr));
    let ok = d.converged
        && d.iterations <= 25
        && d.residual.estimate < 2e-3
        && maj.violations == 0
        && (maj.theta_linear - lin).abs() < 1e-12
        && (maj.theta_scale - scale).abs() < 1e-12
        && maj_rel < 1e-6
        && excess <= 0.0
        && monotone;
    Ok((
        ok,
        format!(
            "{} iterations, last d {:.2e}, residual {:.2e}, alpha {:.1}, c_T {:.3}, majorant vs RK4 rel {maj_rel:.1e}, \
             worst excess {excess:.2e}, distances nonincreasing: {monotone}",
            d.iterations,
            d.distances.last().map(|x| x.estimate).unwrap_or(f64::NAN),
            d.residual.estimate,
            maj.alpha,
            maj.c_t
        ),
    ))
}

fn c9_comparison() -> Outcome {
    let c = desk();
    let model = Model::new(&c).map_err(err)?;
    let noise = generate_ensemble(&model.noise_config().map_err(err)?, 32, exec());
    let x0 = model.initial_state().clone();
    let hi = x0.add(&SpectralField::constant(model.modes(), 1.0));
    let rep = comparison_experiment(&model, &x0, &hi, &noise, exec()).map_err(err)?;

    let a = simulate(&model, &x0, &noise, exec()).map_err(err)?;
    let b = simulate(&model, &hi, &noise, exec()).map_err(err)?;
    let nodes = model.basis().nodes().to_vec();
    let table: Vec<Vec<f64>> = (0..model.modes()).map(|n| nodes.iter().map(|&x| unit_legendre(n, x)).collect()).collect();
    let mut worst = 0.0f64;
    for p in 0..a.len() {
        for k in 0..=a.steps() {
            let (u, v) = (a.coeffs(p, k), b.coeffs(p, k));
            for j in 0..nodes.len() {
                let diff: f64 = table.iter().enumerate().map(|(n, row)| (u[n] - v[n]) * row[j]).sum();
                worst = worst.max(diff);
            }
        }
    }
    Ok((
        rep.max_violation <= 1e-6 && worst <= 1e-6,
        format!("max (u - u_hat)+: library {:.1e}, oracle {worst:.1e} over 32 paths", rep.max_violation),
    ))
}

fn c10_dependence() -> Outcome {
    let c = desk();
    let model = Model::new(&c).map_err(err)?;
    let noise = generate_ensemble(&model.noise_config().map_err(err)?, c.paths, exec());
    let x0 = model.initial_state().clone();
    let one = SpectralField::constant(model.modes(), 1.0);
    let gaps = [1.0, 0.5, 0.25, 0.125];
    let table = continuous_dependence_experiment(&model, &x0, &one, &gaps, &noise, exec()).map_err(err)?;

    let base = simulate(&model, &x0, &noise, exec()).map_err(err)?;
    let mut agree = 0.0f64;
    for row in &table.rows {
        let shifted = simulate(&model, &x0.add(&one.scaled(row.gap)), &noise, exec()).map_err(err)?;
        let (d, _) = bt_oracle(&base, &shifted);
        agree = agree.max((d - row.distance.estimate).abs() / d);
    }
    let d: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.distance.estimate, r.distance.stderr)).collect();
    let nonincreasing = d.windows(2).all(|w| w[1].0 <= w[0].0 + 2.0 * (w[0].1 + w[1].1));

    // continue the geometric sequence to see the limit
    let tail_gaps: Vec<f64> = (4..=12).map(|k| 0.5f64.powi(k)).collect();
    let tail = continuous_dependence_experiment(&model, &x0, &one, &tail_gaps, &noise, exec()).map_err(err)?;
    let mut all = d.clone();
    all.extend(tail.rows.iter().map(|r| (r.distance.estimate, r.distance.stderr)));
    let strictly = all.windows(2).all(|w| w[1].0 < w[0].0);
    let last = *all.last().unwrap();
    let toward_zero = strictly && last.0 + 2.0 * last.1 < 0.1 * d[0].0;
    Ok((
        agree < 1e-12 && nonincreasing && toward_zero,
        format!(
            "distances {} (se <= {:.1e}); continued to gap 2^-12: {:.2e} +- {:.1e}; oracle agreement {agree:.1e}",
            d.iter().map(|x| format!("{:.3}", x.0)).collect::<Vec<_>>().join(", "),
            d.iter().map(|x| x.1).fold(0.0, f64::max),
            last.0,
            last.1
        ),
    ))
}

fn c11_doss_sussman() -> Outcome {
    let mut c = desk();
    c.dt = 1.0 / 64.0;
    c.steps = 64;
    let zero = doss_sussman_check(&c, 0.0, 8, exec()).map_err(err)?;
    let zero_max = zero.levels.iter().map(|l| l.max_difference).fold(0.0, f64::max);
    let mut ok = zero_max <= 1e-12;
    let mut parts = vec![format!("a=0 max difference {zero_max:.1e}")];
    for a in [0.5, 1.0] {
        let r = doss_sussman_check(&c, a, 32, exec()).map_err(err)?;
        ok &= r.ratios.iter().all(|&x| x < 1.0);
        parts.push(format!(
            "a={a}: max differences {} ratios {}",
            r.levels.iter().map(|l| format!("{:.2e}", l.max_difference)).collect::<Vec<_>>().join(", "),
            r.ratios.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
        ));
    }

    // closed form for the pure linear problem: X_t = exp(a w_t - a^2 sigma^2 t / 2) S(t) X_0
    let a = 0.5;
    let sigma = 1.0 / (2.0 * c.mu).sqrt();
    let mut lin = c.clone();
    lin.drift = false;
    lin.noise_coupling = NoiseCoupling::Linear(a);
    let fine = NoiseConfig::new(c.mu, 1, c.dt / 16.0, c.steps * 16, 5).map_err(err)?;
    let mut errs = Vec::new();
    for r in [1usize, 2, 4, 8] {
        let mut lc = lin.clone();
        lc.dt = c.dt / r as f64;
        lc.steps = c.steps * r;
        let m = Model::new(&lc).map_err(err)?;
        let ncfg = m.noise_config().map_err(err)?;
        let mut sq = 0.0;
        let count = 64u32;
        for p in 0..count {
            let f = NoisePath::generate(&fine, p);
            let db: Vec<f64> = f.mode_increments(0).chunks_exact(16 / r).map(|ch| ch.iter().sum()).collect();
            let mut inc = vec![0.0; m.modes() * lc.steps];
            inc[..lc.steps].copy_from_slice(&db);
            let path = NoisePath::from_increments(&ncfg, p, inc).map_err(err)?;
            let xs = m.integrate(m.initial_state(), Some(&path)).map_err(err)?;
            let x0 = m.initial_state().coeffs();
            let mut w = 0.0;
            let mut worst = 0.0f64;
            for (k, x) in xs.iter().enumerate().skip(1) {
                w += sigma * db[k - 1];
                let t = k as f64 * lc.dt;
                let g = (a * w - 0.5 * a * a * sigma * sigma * t).exp();
                let e: f64 = (0..m.modes())
                    .map(|n| {
                        let lam = (n * (n + 1)) as f64 + c.mu;
                        (x.coeffs()[n] - g * (-lam * t).exp() * x0[n]).powi(2)
                    })
                    .sum();
                worst = worst.max(e);
            }
            sq += worst;
        }
        errs.push((sq / count as f64).sqrt());
    }
    let exact_ratios: Vec<f64> = errs.windows(2).map(|w| w[1] / w[0]).collect();
    ok &= exact_ratios.iter().all(|&x| x < 1.0);
    parts.push(format!(
        "linear SPDE vs closed form, B_T error {}",
        errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
    ));
    Ok((ok, parts.join("; ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Legendre eigenstructure", c1_eigenstructure),
        ("trace identities", c2_trace),
        ("Wiener isometry", c3_isometry),
        ("co-albedo modulus", c4_modulus),
        ("Osgood oracle", c5_osgood),
        ("deterministic limit", c6_deterministic_limit),
        ("supersolution bound", c7_supersolution),
        ("Picard convergence", c8_picard),
        ("comparison", c9_comparison),
        ("continuous dependence", c10_dependence),
        ("Doss-Sussman cross-check", c11_doss_sussman),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{:.1}s]: {detail}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
