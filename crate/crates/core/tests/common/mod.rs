//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Density of the `i`-th order statistic of `m` standard uniforms, from the
/// textbook formula.
pub fn order_stat_pdf(x: f64, i: usize, m: usize) -> f64 {
    factorial(m) / (factorial(i - 1) * factorial(m - i)) * x.powi(i as i32 - 1) * (1.0 - x).powi((m - i) as i32)
}

/// Stratum density as an explicit mixture: uniform over the first `r` order
/// statistics (lowest) or the last `r` (highest).
pub fn stratum_density(x: f64, r: usize, m: usize, highest: bool) -> f64 {
    let ranks: Vec<usize> = if highest { (m + 1 - r..=m).collect() } else { (1..=r).collect() };
    ranks.iter().map(|&i| order_stat_pdf(x, i, m)).sum::<f64>() / r as f64
}

pub fn stratum_cdf_by_quadrature(x: f64, r: usize, m: usize, highest: bool) -> f64 {
    simpson(&|u| stratum_density(u, r, m, highest), 0.0, x, 1e-13)
}

/// One-sample Kolmogorov distance.
pub fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Brute-force MinPNS stratum draw from uniforms: sort `m` uniforms, pick one
/// of the lowest `r` at random.
pub fn brute_force_stratum<R: rand::Rng>(rng: &mut R, r: usize, m: usize) -> f64 {
    let mut set: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    set.sort_by(f64::total_cmp);
    set[rng.random_range(0..r)]
}

/// Random weight vector on `m` strata; roughly a third of entries zeroed.
pub fn random_weights<R: rand::Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..m)
            .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { -rng.random::<f64>().ln() })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.iter().map(|v| v / total).collect();
        }
    }
}
