//! Scalar numerical utilities: adaptive Gauss–Kronrod integration and a
//! safeguarded Newton/bisection root finder for monotone functions.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`.
///
/// Bisects the worst interval until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)` or `max_intervals` is reached.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let max_intervals = 2000;
    let (i0, e0) = gk15(&f, a, b);
    let mut parts = vec![(a, b, i0, e0)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || parts.len() >= max_intervals {
            return total;
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine precision
            parts.push((lo, hi, gk15(&f, lo, hi).0, 0.0));
            continue;
        }
        let (il, el) = gk15(&f, lo, mid);
        let (ir, er) = gk15(&f, mid, hi);
        parts.push((lo, mid, il, el));
        parts.push((mid, hi, ir, er));
    }
}

/// Solves `f(x) = target` for nondecreasing `f` on a bracket `[lo, hi]` with
/// `f(lo) <= target <= f(hi)`. Newton steps use `df`; any step leaving the
/// bracket is replaced by bisection.
pub fn solve_monotone<F, D>(f: F, df: D, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let r = f(x) - target;
        if r.abs() <= tol {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let newton = x - r / d;
        let next = if d > 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14, 1e-14);
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn integrates_log_singularity_adaptively() {
        // int_0^1 ln x dx = -1
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-12);
        assert!((v + 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let a = integrate(f64::exp, 0.0, 1.0, 1e-14, 1e-14);
        let b = integrate(f64::exp, 1.0, 0.0, 1e-14, 1e-14);
        assert!((a + b).abs() < 1e-14);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn root_finder_inverts_cubic() {
        let x = solve_monotone(|x| x * x * x, |x| 3.0 * x * x, 27.0, 0.0, 10.0, 1e-13);
        assert!((x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn root_finder_survives_zero_derivative() {
        // derivative vanishes at 0, Newton falls back to bisection
        let x = solve_monotone(|x| x * x * x, |x| 3.0 * x * x, 1e-9, -1.0, 1.0, 1e-15);
        assert!((x - 1e-3).abs() < 1e-9);
    }
}
