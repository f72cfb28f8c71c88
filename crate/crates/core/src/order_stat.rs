//! Beta-mixture functions for integer-parameter order statistics.
//!
//! Everything is expressed on the probability scale `x = F(t)`: the law of the
//! `i`-th order statistic out of `m` uniforms is `Beta(i, m + 1 - i)`, and the
//! CDF of stratum `r` is the average of the first `r` of those laws (MinPNS) or
//! of the last `r` (MaxPNS). Integer parameters let every function be written
//! as a finite binomial sum, so no incomplete-beta routine is needed.

use serde::{Deserialize, Serialize};

use crate::error::{PnsError, Result};
use crate::scalar::Scalar;

/// Maximum bisection/Newton steps for [`g_inverse`].
pub const G_INVERSE_MAX_ITER: usize = 200;
/// Residual and step-size target for [`g_inverse`] in `f64`.
pub const G_INVERSE_TOL: f64 = 1e-12;

/// Which extreme of the ranked set is nominated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Min,
    Max,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Min => f.write_str("min"),
            Direction::Max => f.write_str("max"),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = PnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Direction::Min),
            "max" => Ok(Direction::Max),
            other => Err(PnsError::InvalidConfig(format!(
                "unknown direction {other:?} (expected min or max)"
            ))),
        }
    }
}

/// Set size, stratum weights and direction of a PNS design.
///
/// `weights()[r - 1]` is the proportion of measurements in stratum `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec<T> {
    q: Vec<T>,
    direction: Direction,
}

impl<T: Scalar> DesignSpec<T> {
    /// Builds a design from its stratum weights; the set size is `q.len()`.
    pub fn new(q: Vec<T>, direction: Direction) -> Result<Self> {
        if q.is_empty() {
            return Err(PnsError::InvalidDesign("set size must be at least 1".into()));
        }
        let mut total = T::zero();
        for (r, &w) in q.iter().enumerate() {
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(PnsError::InvalidDesign(format!(
                    "weight for stratum {} is {w}, expected a finite value >= 0",
                    r + 1
                )));
            }
            total += w;
        }
        if (total - T::one()).abs() > T::tolerance(1e-12) * T::from_count(q.len()) {
            return Err(PnsError::InvalidDesign(format!(
                "stratum weights sum to {total}, expected 1"
            )));
        }
        Ok(DesignSpec { q, direction })
    }

    /// Equal weight on every stratum.
    pub fn uniform(m: usize, direction: Direction) -> Result<Self> {
        if m == 0 {
            return Err(PnsError::InvalidDesign("set size must be at least 1".into()));
        }
        Self::new(vec![T::one() / T::from_count(m); m], direction)
    }

    /// All weight on stratum `r`.
    pub fn degenerate(m: usize, r: usize, direction: Direction) -> Result<Self> {
        if r == 0 || r > m {
            return Err(PnsError::InvalidDesign(format!(
                "stratum {r} outside 1..={m}"
            )));
        }
        let mut q = vec![T::zero(); m];
        q[r - 1] = T::one();
        Self::new(q, direction)
    }

    /// Weights `q_r = n_r / n` from per-stratum counts.
    pub fn from_counts(counts: &[usize], direction: Direction) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(PnsError::InvalidDesign("stratum counts are all zero".into()));
        }
        let n_t = T::from_count(n);
        let q = counts.iter().map(|&c| T::from_count(c) / n_t).collect();
        Self::new(q, direction)
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.q
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Same weights, other direction.
    pub fn with_direction(&self, direction: Direction) -> Self {
        DesignSpec {
            q: self.q.clone(),
            direction,
        }
    }

    /// True when all weight sits on a single stratum.
    pub fn is_degenerate(&self) -> bool {
        self.q.iter().filter(|&&w| w > T::zero()).count() == 1
    }
}

fn check_unit<T: Scalar>(what: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(PnsError::domain(what, x.to_f64().unwrap_or(f64::NAN), "[0, 1]"))
    }
}

fn check_rank(i: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(PnsError::domain("m", 0.0, "m >= 1"));
    }
    if i == 0 || i > m {
        return Err(PnsError::domain("rank", i as f64, "1..=m"));
    }
    Ok(())
}

/// Clamps rounding noise back into `[0, 1]`; anything further out is a bug.
pub(crate) fn clamp_probability<T: Scalar>(v: T) -> Result<T> {
    let slack = T::tolerance(1e-9);
    if v.is_nan() || v < -slack || v > T::one() + slack {
        return Err(PnsError::ProbabilityDrift(v.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(v.max(T::zero()).min(T::one()))
}

/// Binomial probabilities `P(Bin(k, x) = j)` for `j = 0..=k`.
fn binomial_pmf<T: Scalar>(x: T, k: usize) -> Vec<T> {
    let y = T::one() - x;
    let mut out = Vec::with_capacity(k + 1);
    let mut coef = T::one();
    for j in 0..=k {
        out.push(coef * x.powi(j as i32) * y.powi((k - j) as i32));
        coef = coef * T::from_count(k - j) / T::from_count(j + 1);
    }
    out
}

fn binomial(m: usize, j: usize) -> f64 {
    let j = j.min(m - j);
    (0..j).fold(1.0, |acc, k| acc * (m - k) as f64 / (k + 1) as f64)
}

/// `P(Beta(i, m + 1 - i) <= x)`, i.e. `P(Bin(m, x) >= i)`.
pub fn beta_cdf<T: Scalar>(x: T, i: usize, m: usize) -> Result<T> {
    check_unit("x", x)?;
    check_rank(i, m)?;
    let pmf = binomial_pmf(x, m);
    let tail = pmf[i..].iter().fold(T::zero(), |acc, &p| acc + p);
    clamp_probability(tail)
}

/// Density of `Beta(i, m + 1 - i)`: `i * C(m, i) * x^(i-1) * (1 - x)^(m-i)`.
pub fn beta_pdf<T: Scalar>(x: T, i: usize, m: usize) -> Result<T> {
    check_unit("x", x)?;
    check_rank(i, m)?;
    let c = T::lit(i as f64 * binomial(m, i));
    Ok(c * x.powi(i as i32 - 1) * (T::one() - x).powi((m - i) as i32))
}

fn check_stratum<T: Scalar>(r: usize, spec: &DesignSpec<T>) -> Result<()> {
    if r == 0 || r > spec.m() {
        return Err(PnsError::domain("stratum", r as f64, "1..=m"));
    }
    Ok(())
}

// Averaging P(Bin(m,x) >= i) over i = 1..r gives sum_j min(j, r) P(Bin = j) / r,
// and the complement sum_{j<r} (r - j) P(Bin = j) / r. Both are sums of
// nonnegative terms, so neither tail loses precision.
fn min_stratum_cdf<T: Scalar>(x: T, r: usize, m: usize) -> T {
    let pmf = binomial_pmf(x, m);
    let acc = pmf
        .iter()
        .enumerate()
        .skip(1)
        .fold(T::zero(), |acc, (j, &p)| acc + T::from_count(j.min(r)) * p);
    acc / T::from_count(r)
}

fn min_stratum_sf<T: Scalar>(x: T, r: usize, m: usize) -> T {
    let pmf = binomial_pmf(x, m);
    let acc = pmf
        .iter()
        .enumerate()
        .take(r)
        .fold(T::zero(), |acc, (j, &p)| acc + T::from_count(r - j) * p);
    acc / T::from_count(r)
}

// The Beta(i, m+1-i) density is m * P(Bin(m-1, x) = i-1).
fn min_stratum_pdf<T: Scalar>(x: T, r: usize, m: usize) -> T {
    let pmf = binomial_pmf(x, m - 1);
    let acc = pmf.iter().take(r).fold(T::zero(), |acc, &p| acc + p);
    acc * T::from_count(m) / T::from_count(r)
}

/// CDF of a stratum-`r` measurement on the probability scale.
pub fn stratum_cdf<T: Scalar>(x: T, r: usize, spec: &DesignSpec<T>) -> Result<T> {
    check_unit("x", x)?;
    check_stratum(r, spec)?;
    let v = match spec.direction() {
        Direction::Min => min_stratum_cdf(x, r, spec.m()),
        Direction::Max => min_stratum_sf(T::one() - x, r, spec.m()),
    };
    clamp_probability(v)
}

/// `1 - stratum_cdf`, computed without cancellation.
pub fn stratum_sf<T: Scalar>(x: T, r: usize, spec: &DesignSpec<T>) -> Result<T> {
    check_unit("x", x)?;
    check_stratum(r, spec)?;
    let v = match spec.direction() {
        Direction::Min => min_stratum_sf(x, r, spec.m()),
        Direction::Max => min_stratum_cdf(T::one() - x, r, spec.m()),
    };
    clamp_probability(v)
}

/// Density of a stratum-`r` measurement on the probability scale.
pub fn stratum_pdf<T: Scalar>(x: T, r: usize, spec: &DesignSpec<T>) -> Result<T> {
    check_unit("x", x)?;
    check_stratum(r, spec)?;
    Ok(match spec.direction() {
        Direction::Min => min_stratum_pdf(x, r, spec.m()),
        Direction::Max => min_stratum_pdf(T::one() - x, r, spec.m()),
    })
}

/// The weighted mixture `g(x) = sum_r q_r F_(r)(x)`, i.e. the expectation of the
/// pooled EDF when the parent CDF equals `x`.
pub fn g_mix<T: Scalar>(x: T, spec: &DesignSpec<T>) -> Result<T> {
    check_unit("x", x)?;
    let mut acc = T::zero();
    for (r, &w) in spec.weights().iter().enumerate() {
        if w > T::zero() {
            acc += w * stratum_cdf(x, r + 1, spec)?;
        }
    }
    clamp_probability(acc)
}

/// `g'(x) = sum_r q_r f_(r)(x)`.
pub fn g_mix_deriv<T: Scalar>(x: T, spec: &DesignSpec<T>) -> Result<T> {
    check_unit("x", x)?;
    let mut acc = T::zero();
    for (r, &w) in spec.weights().iter().enumerate() {
        if w > T::zero() {
            acc += w * stratum_pdf(x, r + 1, spec)?;
        }
    }
    Ok(acc)
}

/// Solves `g(x) = u` on `[0, 1]` by Newton steps safeguarded by a bisection
/// bracket. The endpoints map to themselves exactly.
pub fn g_inverse<T: Scalar>(u: T, spec: &DesignSpec<T>) -> Result<T> {
    check_unit("u", u)?;
    if u == T::zero() || u == T::one() {
        return Ok(u);
    }
    let tol = T::tolerance(G_INVERSE_TOL);
    let min_width = T::epsilon() * T::lit(4.0);
    let two = T::lit(2.0);
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut x = u;
    for _ in 0..G_INVERSE_MAX_ITER {
        let resid = g_mix(x, spec)? - u;
        if resid == T::zero() {
            return Ok(x);
        }
        if resid > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= min_width {
            return Ok((lo + hi) / two);
        }
        let slope = g_mix_deriv(x, spec)?;
        let newton = x - resid / slope;
        // Where g is flat a small residual can still hide a large error in x,
        // so both the residual and the step must be small.
        if resid.abs() <= tol && (newton - x).abs() <= tol {
            return Ok(if newton > lo && newton < hi { newton } else { x });
        }
        x = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
    }
    Err(PnsError::NoConvergence {
        routine: "g_inverse",
        iterations: G_INVERSE_MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn direct_beta_cdf(x: f64, i: usize, m: usize) -> f64 {
        (i..=m)
            .map(|j| binomial(m, j) * x.powi(j as i32) * (1.0 - x).powi((m - j) as i32))
            .sum()
    }

    #[test]
    fn beta_cdf_examples() {
        assert_abs_diff_eq!(beta_cdf(0.5, 1, 1).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_cdf(0.2, 1, 3).unwrap(), 0.488, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_cdf(0.5, 2, 3).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn beta_pdf_examples() {
        assert_abs_diff_eq!(beta_pdf(0.3, 1, 1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_pdf(0.0, 1, 3).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_pdf(0.5, 2, 3).unwrap(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_inputs_are_domain_errors() {
        assert!(matches!(beta_cdf(1.5, 1, 3), Err(PnsError::Domain { .. })));
        assert!(matches!(beta_cdf(-0.1, 1, 3), Err(PnsError::Domain { .. })));
        assert!(matches!(beta_cdf(0.5, 0, 3), Err(PnsError::Domain { .. })));
        assert!(matches!(beta_pdf(0.5, 4, 3), Err(PnsError::Domain { .. })));
        assert!(matches!(beta_cdf(f64::NAN, 1, 3), Err(PnsError::Domain { .. })));
        let spec = DesignSpec::<f64>::uniform(3, Direction::Min).unwrap();
        assert!(stratum_cdf(0.5, 4, &spec).is_err());
        assert!(stratum_pdf(0.5, 0, &spec).is_err());
        assert!(g_inverse(1.01, &spec).is_err());
    }

    #[test]
    fn stratum_examples() {
        let spec = DesignSpec::<f64>::uniform(3, Direction::Min).unwrap();
        assert_abs_diff_eq!(stratum_cdf(0.2, 1, &spec).unwrap(), 0.488, epsilon = 1e-15);
        assert_abs_diff_eq!(stratum_cdf(0.5, 2, &spec).unwrap(), 0.6875, epsilon = 1e-15);
        assert_abs_diff_eq!(stratum_pdf(0.0, 1, &spec).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stratum_pdf(0.5, 2, &spec).unwrap(), 1.125, epsilon = 1e-15);
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            assert_abs_diff_eq!(stratum_cdf(x, 3, &spec).unwrap(), x, epsilon = 1e-15);
            assert_abs_diff_eq!(stratum_pdf(x, 3, &spec).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn stratum_cdf_matches_direct_mixture_both_directions() {
        for m in 1..=8 {
            let min = DesignSpec::<f64>::uniform(m, Direction::Min).unwrap();
            let max = min.with_direction(Direction::Max);
            for r in 1..=m {
                for k in 0..=40 {
                    let x = k as f64 / 40.0;
                    let lower: f64 =
                        (1..=r).map(|i| direct_beta_cdf(x, i, m)).sum::<f64>() / r as f64;
                    let upper: f64 = ((m + 1 - r)..=m)
                        .map(|i| direct_beta_cdf(x, i, m))
                        .sum::<f64>()
                        / r as f64;
                    assert_abs_diff_eq!(stratum_cdf(x, r, &min).unwrap(), lower, epsilon = 1e-12);
                    assert_abs_diff_eq!(stratum_cdf(x, r, &max).unwrap(), upper, epsilon = 1e-12);
                    assert_abs_diff_eq!(
                        stratum_sf(x, r, &min).unwrap(),
                        1.0 - lower,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn g_examples() {
        let spec = DesignSpec::<f64>::uniform(3, Direction::Min).unwrap();
        assert_eq!(g_mix(0.0, &spec).unwrap(), 0.0);
        assert_eq!(g_mix(1.0, &spec).unwrap(), 1.0);
        assert_abs_diff_eq!(g_mix(0.5, &spec).unwrap(), 0.6875, epsilon = 1e-15);

        let top = DesignSpec::<f64>::degenerate(4, 4, Direction::Min).unwrap();
        assert_abs_diff_eq!(g_mix(0.37, &top).unwrap(), 0.37, epsilon = 1e-15);
        assert_abs_diff_eq!(g_mix_deriv(0.37, &top).unwrap(), 1.0, epsilon = 1e-14);

        let ns = DesignSpec::new(vec![1.0, 0.0, 0.0], Direction::Min).unwrap();
        assert_abs_diff_eq!(g_mix_deriv(0.0, &ns).unwrap(), 3.0, epsilon = 1e-15);

        let h = 1e-6;
        let fd = (g_mix(0.5 + h, &spec).unwrap() - g_mix(0.5 - h, &spec).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(g_mix_deriv(0.5, &spec).unwrap(), fd, epsilon = 1e-6);
    }

    #[test]
    fn g_inverse_endpoints_and_table_one_weights() {
        let spec = DesignSpec::<f64>::new(vec![0.4, 0.1, 0.3, 0.1, 0.1], Direction::Min).unwrap();
        assert_eq!(g_inverse(0.0, &spec).unwrap(), 0.0);
        assert_eq!(g_inverse(1.0, &spec).unwrap(), 1.0);
        let x = g_inverse(0.1, &spec).unwrap();
        assert_abs_diff_eq!(x, 0.0352, epsilon = 5e-4);
        assert!((g_mix(x, &spec).unwrap() - 0.1).abs() <= 1e-12);
    }

    #[test]
    fn design_validation() {
        assert!(DesignSpec::<f64>::new(vec![], Direction::Min).is_err());
        assert!(DesignSpec::new(vec![0.5, 0.6], Direction::Min).is_err());
        assert!(DesignSpec::new(vec![1.5, -0.5], Direction::Min).is_err());
        assert!(DesignSpec::<f64>::degenerate(3, 0, Direction::Min).is_err());
        let spec = DesignSpec::<f64>::from_counts(&[4, 1, 3, 1, 1], Direction::Min).unwrap();
        assert_eq!(spec.weights(), &[0.4, 0.1, 0.3, 0.1, 0.1]);
        assert!(DesignSpec::<f64>::from_counts(&[0, 0], Direction::Min).is_err());
        assert!(spec.with_direction(Direction::Max).direction() == Direction::Max);
    }

    #[test]
    fn single_precision_matches_double() {
        let s64 = DesignSpec::<f64>::uniform(5, Direction::Min).unwrap();
        let s32 = DesignSpec::<f32>::uniform(5, Direction::Min).unwrap();
        for k in 1..10 {
            let u = k as f64 / 10.0;
            let a = g_inverse(u, &s64).unwrap();
            let b = g_inverse(u as f32, &s32).unwrap();
            assert!((a - b as f64).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn direction_parses() {
        assert_eq!("MAX".parse::<Direction>().unwrap(), Direction::Max);
        assert!("middle".parse::<Direction>().is_err());
    }
}
