//! Tie matrices, PNS samples and the three CDF estimators.
//!
//! All three estimators look at the same indicator `1{Y <= t}`:
//!
//! * the pooled EDF `F_n(t)`, which under PNS estimates `g(F(t))` rather than `F(t)`;
//! * the moment-based estimator `g^{-1}(F_n(t))` with `q_r = n_r / n`;
//! * the ML estimator, maximizing the product of per-stratum binomial likelihoods
//!   with success probabilities `F_(r)(F(t))`.
//!
//! Asymptotic variances are those of `sqrt(n) (F_hat - F)` and are evaluated by
//! plugging the point estimate into the theoretical formulas.

use serde::{Deserialize, Serialize};

use crate::error::{PnsError, Result};
use crate::order_stat::{
    clamp_probability, g_inverse, g_mix_deriv, stratum_cdf, stratum_pdf, stratum_sf,
    DesignSpec, Direction,
};
use crate::scalar::Scalar;

/// Bracket for the score bisection, `[ML_BRACKET, 1 - ML_BRACKET]`.
pub const ML_BRACKET: f64 = 1e-12;
/// Bisection stops once the bracket is narrower than this.
pub const ML_WIDTH_TOL: f64 = 1e-10;
/// ... or once the score is this close to zero.
pub const ML_SCORE_TOL: f64 = 1e-9;
pub const ML_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Edf,
    Mb,
    Ml,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Edf => "edf",
            Method::Mb => "mb",
            Method::Ml => "ml",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = PnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edf" => Ok(Method::Edf),
            "mb" => Ok(Method::Mb),
            "ml" => Ok(Method::Ml),
            other => Err(PnsError::InvalidConfig(format!(
                "unknown method {other:?} (expected edf, mb or ml)"
            ))),
        }
    }
}

/// The `n x m` tie-information matrix.
///
/// Row `i` flags the units of set `i` that could not be told apart from the
/// nominated extreme. The nominated unit is always tied with itself: column 1
/// is set for MinPNS, column `m` for MaxPNS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieMatrix {
    m: usize,
    direction: Direction,
    rows: Vec<Vec<u8>>,
}

impl TieMatrix {
    pub fn new(m: usize, direction: Direction, rows: Vec<Vec<u8>>) -> Result<Self> {
        if m == 0 {
            return Err(PnsError::InvalidSample("set size must be at least 1".into()));
        }
        let anchor = match direction {
            Direction::Min => 0,
            Direction::Max => m - 1,
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(PnsError::InvalidSample(format!(
                    "tie row {} has {} entries, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(PnsError::InvalidSample(format!(
                    "tie row {} contains a value other than 0/1",
                    i + 1
                )));
            }
            if row[anchor] != 1 {
                return Err(PnsError::InvalidSample(format!(
                    "tie row {}: the nominated unit (column {}) must be tied to itself",
                    i + 1,
                    anchor + 1
                )));
            }
        }
        Ok(TieMatrix { m, direction, rows })
    }

    /// Row with `r` ones adjacent to the nominated end.
    pub fn leading_row(m: usize, r: usize, direction: Direction) -> Vec<u8> {
        let mut row = vec![0u8; m];
        match direction {
            Direction::Min => row[..r].fill(1),
            Direction::Max => row[m - r..].fill(1),
        }
        row
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// `m_i`, the number of units tied with the nominated one in each set.
    pub fn row_sums(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&v| v as usize).sum())
            .collect()
    }

    pub fn push_row(&mut self, row: Vec<u8>) -> Result<()> {
        let checked = TieMatrix::new(self.m, self.direction, vec![row])?;
        self.rows.extend(checked.rows);
        Ok(())
    }
}

/// `n_r`: number of sets whose nominated unit was tied with exactly `r` units.
pub fn stratum_counts(ties: &TieMatrix) -> Vec<usize> {
    counts_from_strata(&ties.row_sums(), ties.m())
}

fn counts_from_strata(strata: &[usize], m: usize) -> Vec<usize> {
    let mut counts = vec![0; m];
    for &r in strata {
        counts[r - 1] += 1;
    }
    counts
}

/// Measured values with their stratum labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PnsSample<T> {
    values: Vec<T>,
    strata: Vec<usize>,
    counts: Vec<usize>,
    spec: DesignSpec<T>,
}

impl<T: Scalar> PnsSample<T> {
    pub fn new(values: Vec<T>, strata: Vec<usize>, m: usize, direction: Direction) -> Result<Self> {
        if values.is_empty() {
            return Err(PnsError::InvalidSample("sample is empty".into()));
        }
        if values.len() != strata.len() {
            return Err(PnsError::InvalidSample(format!(
                "{} values but {} stratum labels",
                values.len(),
                strata.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan()) {
            return Err(PnsError::InvalidSample(format!("measured value {v} is not a number")));
        }
        if let Some(&r) = strata.iter().find(|&&r| r == 0 || r > m) {
            return Err(PnsError::InvalidSample(format!(
                "stratum label {r} outside 1..={m}"
            )));
        }
        let counts = counts_from_strata(&strata, m);
        let spec = DesignSpec::from_counts(&counts, direction)?;
        Ok(PnsSample {
            values,
            strata,
            counts,
            spec,
        })
    }

    /// Pairs each measured value with the row sum of its tie-matrix row.
    pub fn from_ties(values: Vec<T>, ties: &TieMatrix) -> Result<Self> {
        if values.len() != ties.n() {
            return Err(PnsError::InvalidSample(format!(
                "{} values but {} tie rows",
                values.len(),
                ties.n()
            )));
        }
        Self::new(values, ties.row_sums(), ties.m(), ties.direction())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Design with the empirical weights `q_r = n_r / n`.
    pub fn spec(&self) -> &DesignSpec<T> {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    pub fn direction(&self) -> Direction {
        self.spec.direction()
    }

    /// `y_r+`: per-stratum number of values `<= t`.
    pub fn successes(&self, t: T) -> Vec<usize> {
        let mut y = vec![0; self.m()];
        for (&v, &r) in self.values.iter().zip(&self.strata) {
            if v <= t {
                y[r - 1] += 1;
            }
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport<T> {
    pub t: T,
    pub estimate: T,
    /// Variance of `sqrt(n) (estimate - target)`.
    pub asymptotic_variance: T,
    pub n: usize,
    pub method: Method,
}

impl<T: Scalar> EstimateReport<T> {
    /// `sqrt(asymptotic_variance / n)`.
    pub fn standard_error(&self) -> T {
        (self.asymptotic_variance / T::from_count(self.n)).sqrt()
    }
}

/// The pooled empirical CDF at `t`.
pub fn edf<T: Scalar>(sample: &PnsSample<T>, t: T) -> T {
    let hits = sample.values().iter().filter(|&&v| v <= t).count();
    T::from_count(hits) / T::from_count(sample.n())
}

/// EDF report; its variance is `sum_r q_r p_r (1 - p_r)` with per-stratum
/// empirical proportions `p_r`, the variance of `sqrt(n)(F_n - g(F))`.
pub fn estimate_edf<T: Scalar>(sample: &PnsSample<T>, t: T) -> EstimateReport<T> {
    let y = sample.successes(t);
    let n_t = T::from_count(sample.n());
    let mut var = T::zero();
    for (&c, &s) in sample.counts().iter().zip(&y) {
        if c > 0 {
            let p = T::from_count(s) / T::from_count(c);
            var += T::from_count(c) / n_t * p * (T::one() - p);
        }
    }
    EstimateReport {
        t,
        estimate: edf(sample, t),
        asymptotic_variance: var,
        n: sample.n(),
        method: Method::Edf,
    }
}

/// Moment-based estimator `g^{-1}(F_n(t))`.
pub fn estimate_mb<T: Scalar>(sample: &PnsSample<T>, t: T) -> Result<EstimateReport<T>> {
    let estimate = g_inverse(edf(sample, t), sample.spec())?;
    Ok(EstimateReport {
        t,
        estimate,
        asymptotic_variance: var_mb(estimate, sample.spec())?,
        n: sample.n(),
        method: Method::Mb,
    })
}

/// Maximum-likelihood estimator of `F(t)`.
pub fn estimate_ml<T: Scalar>(sample: &PnsSample<T>, t: T) -> Result<EstimateReport<T>> {
    let y = sample.successes(t);
    let estimate = ml_from_counts(sample.spec(), sample.counts(), &y)?;
    Ok(EstimateReport {
        t,
        estimate,
        asymptotic_variance: var_ml(estimate, sample.spec())?,
        n: sample.n(),
        method: Method::Ml,
    })
}

pub fn estimate<T: Scalar>(
    sample: &PnsSample<T>,
    t: T,
    method: Method,
) -> Result<EstimateReport<T>> {
    match method {
        Method::Edf => Ok(estimate_edf(sample, t)),
        Method::Mb => estimate_mb(sample, t),
        Method::Ml => estimate_ml(sample, t),
    }
}

fn check_tally(spec_m: usize, trials: &[usize], successes: &[usize]) -> Result<()> {
    if trials.len() != spec_m || successes.len() != spec_m {
        return Err(PnsError::InvalidSample(format!(
            "tally lengths {} / {} do not match set size {spec_m}",
            trials.len(),
            successes.len()
        )));
    }
    if let Some(r) = (0..spec_m).find(|&r| successes[r] > trials[r]) {
        return Err(PnsError::InvalidSample(format!(
            "stratum {}: {} successes out of {} trials",
            r + 1,
            successes[r],
            trials[r]
        )));
    }
    Ok(())
}

/// Binomial log-likelihood of `F`, without the combinatorial constants.
/// Only defined on the open interval.
pub fn log_likelihood<T: Scalar>(
    f: T,
    spec: &DesignSpec<T>,
    trials: &[usize],
    successes: &[usize],
) -> Result<T> {
    check_tally(spec.m(), trials, successes)?;
    if !(f > T::zero() && f < T::one()) {
        return Err(PnsError::domain("F", f.to_f64().unwrap_or(f64::NAN), "(0, 1)"));
    }
    let mut ll = T::zero();
    for r in 0..spec.m() {
        let (n, y) = (trials[r], successes[r]);
        if y > 0 {
            ll += T::from_count(y) * stratum_cdf(f, r + 1, spec)?.ln();
        }
        if n > y {
            ll += T::from_count(n - y) * stratum_sf(f, r + 1, spec)?.ln();
        }
    }
    Ok(ll)
}

/// Derivative of [`log_likelihood`] in `F`; decreasing because the likelihood is concave.
pub fn score<T: Scalar>(
    f: T,
    spec: &DesignSpec<T>,
    trials: &[usize],
    successes: &[usize],
) -> Result<T> {
    let mut s = T::zero();
    for r in 0..spec.m() {
        let (n, y) = (trials[r], successes[r]);
        if n == 0 {
            continue;
        }
        let mut inner = T::zero();
        if y > 0 {
            inner += T::from_count(y) / stratum_cdf(f, r + 1, spec)?;
        }
        if n > y {
            inner -= T::from_count(n - y) / stratum_sf(f, r + 1, spec)?;
        }
        let density = stratum_pdf(f, r + 1, spec)?;
        if density > T::zero() {
            s += density * inner;
        }
    }
    Ok(s)
}

/// ML estimate from per-stratum trials `n_r` and successes `y_r+`.
///
/// All-failure and all-success tallies return 0 and 1. A tally with a single
/// occupied stratum has the closed form `F_(r)^{-1}(y / n_r)`; everything else
/// is found by bisection on the score.
pub fn ml_from_counts<T: Scalar>(
    spec: &DesignSpec<T>,
    trials: &[usize],
    successes: &[usize],
) -> Result<T> {
    check_tally(spec.m(), trials, successes)?;
    let total_y: usize = successes.iter().sum();
    let total_n: usize = trials.iter().sum();
    if total_n == 0 {
        return Err(PnsError::InvalidSample("no observations".into()));
    }
    if total_y == 0 {
        return Ok(T::zero());
    }
    if total_y == total_n {
        return Ok(T::one());
    }
    let occupied: Vec<usize> = (0..spec.m()).filter(|&r| trials[r] > 0).collect();
    if let [r] = occupied[..] {
        let only = DesignSpec::degenerate(spec.m(), r + 1, spec.direction())?;
        let p = T::from_count(successes[r]) / T::from_count(trials[r]);
        return g_inverse(p, &only);
    }

    let edge = T::tolerance(ML_BRACKET);
    let width_tol = T::tolerance(ML_WIDTH_TOL);
    let score_tol = T::tolerance(ML_SCORE_TOL);
    let two = T::lit(2.0);
    let (mut lo, mut hi) = (edge, T::one() - edge);
    if score(lo, spec, trials, successes)? <= T::zero() {
        return Ok(lo);
    }
    if score(hi, spec, trials, successes)? >= T::zero() {
        return Ok(hi);
    }
    for _ in 0..ML_MAX_ITER {
        let mid = (lo + hi) / two;
        let s = score(mid, spec, trials, successes)?;
        if s.abs() < score_tol {
            return Ok(mid);
        }
        if s > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < width_tol {
            return Ok((lo + hi) / two);
        }
    }
    Err(PnsError::NoConvergence {
        routine: "ml_from_counts",
        iterations: ML_MAX_ITER,
    })
}

/// `F (1 - F)`, the SRS variance.
pub fn var_srs<T: Scalar>(f: T) -> T {
    f * (T::one() - f)
}

/// Asymptotic variance of the moment-based estimator at parent CDF value `f`.
pub fn var_mb<T: Scalar>(f: T, spec: &DesignSpec<T>) -> Result<T> {
    clamp_probability(f)?;
    if f <= T::zero() || f >= T::one() {
        return Ok(T::zero());
    }
    let mut num = T::zero();
    for (r, &w) in spec.weights().iter().enumerate() {
        if w > T::zero() {
            num += w * stratum_cdf(f, r + 1, spec)? * stratum_sf(f, r + 1, spec)?;
        }
    }
    let slope = g_mix_deriv(f, spec)?;
    Ok(num / (slope * slope))
}

/// Asymptotic variance of the ML estimator at parent CDF value `f`.
pub fn var_ml<T: Scalar>(f: T, spec: &DesignSpec<T>) -> Result<T> {
    clamp_probability(f)?;
    if f <= T::zero() || f >= T::one() {
        return Ok(T::zero());
    }
    let mut info = T::zero();
    for (r, &w) in spec.weights().iter().enumerate() {
        if w > T::zero() {
            let d = stratum_pdf(f, r + 1, spec)?;
            let bern = stratum_cdf(f, r + 1, spec)? * stratum_sf(f, r + 1, spec)?;
            info += w * d * d / bern;
        }
    }
    Ok(info.recip())
}

/// Asymptotic relative efficiency against SRS, `F(1-F) / sigma^2`.
pub fn are<T: Scalar>(f: T, spec: &DesignSpec<T>, method: Method) -> Result<T> {
    if !(f > T::zero() && f < T::one()) {
        return Err(PnsError::domain("F", f.to_f64().unwrap_or(f64::NAN), "(0, 1)"));
    }
    let var = match method {
        Method::Mb => var_mb(f, spec)?,
        Method::Ml => var_ml(f, spec)?,
        Method::Edf => {
            return Err(PnsError::InvalidConfig(
                "ARE is defined for the mb and ml estimators only".into(),
            ))
        }
    };
    Ok(var_srs(f) / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TABLE1_VALUES: [f64; 10] = [
        0.884, 0.610, 0.753, 0.616, 0.690, 0.542, 0.576, 0.698, 0.769, 0.670,
    ];

    fn table1_ties() -> TieMatrix {
        let rows = vec![
            vec![1, 0, 0, 0, 0],
            vec![1, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![1, 1, 1, 1, 1],
            vec![1, 1, 1, 1, 0],
            vec![1, 0, 0, 0, 0],
            vec![1, 1, 1, 0, 0],
            vec![1, 1, 1, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![1, 1, 1, 0, 0],
        ];
        TieMatrix::new(5, Direction::Min, rows).unwrap()
    }

    fn table1() -> PnsSample<f64> {
        PnsSample::from_ties(TABLE1_VALUES.to_vec(), &table1_ties()).unwrap()
    }

    #[test]
    fn stratum_counts_examples() {
        assert_eq!(stratum_counts(&table1_ties()), vec![4, 1, 3, 1, 1]);
        let ns = TieMatrix::new(4, Direction::Min, vec![vec![1, 0, 0, 0]; 6]).unwrap();
        assert_eq!(stratum_counts(&ns), vec![6, 0, 0, 0]);
        let full = TieMatrix::new(4, Direction::Min, vec![vec![1; 4]; 6]).unwrap();
        assert_eq!(stratum_counts(&full), vec![0, 0, 0, 6]);
    }

    #[test]
    fn tie_matrix_rejects_bad_rows() {
        assert!(TieMatrix::new(3, Direction::Min, vec![vec![0, 1, 0]]).is_err());
        assert!(TieMatrix::new(3, Direction::Min, vec![vec![1, 2, 0]]).is_err());
        assert!(TieMatrix::new(3, Direction::Min, vec![vec![1, 0]]).is_err());
        assert!(TieMatrix::new(3, Direction::Max, vec![vec![1, 0, 0]]).is_err());
        assert!(TieMatrix::new(3, Direction::Max, vec![vec![0, 1, 1]]).is_ok());
        assert_eq!(TieMatrix::leading_row(4, 2, Direction::Max), vec![0, 0, 1, 1]);
    }

    #[test]
    fn edf_examples() {
        let s = table1();
        assert_abs_diff_eq!(edf(&s, 0.56), 0.1);
        assert_eq!(edf(&s, 0.5), 0.0);
        assert_eq!(edf(&s, 0.884), 1.0);
    }

    #[test]
    fn table1_estimates() {
        let s = table1();
        let mb = estimate_mb(&s, 0.56).unwrap();
        let ml = estimate_ml(&s, 0.56).unwrap();
        assert_abs_diff_eq!(mb.estimate, 0.0352, epsilon = 5e-4);
        assert_abs_diff_eq!(ml.estimate, 0.0357, epsilon = 5e-4);
        assert!(mb.asymptotic_variance > 0.0 && ml.asymptotic_variance > 0.0);
    }

    #[test]
    fn all_above_threshold_gives_zero() {
        let s = table1();
        assert_eq!(estimate_mb(&s, 0.1).unwrap().estimate, 0.0);
        assert_eq!(estimate_ml(&s, 0.1).unwrap().estimate, 0.0);
        assert_eq!(estimate_ml(&s, 2.0).unwrap().estimate, 1.0);
        assert_eq!(estimate_ml(&s, 2.0).unwrap().asymptotic_variance, 0.0);
    }

    #[test]
    fn set_size_one_reduces_to_edf() {
        let values = vec![0.3, 0.9, 0.1, 0.5, 0.7, 0.2, 0.05];
        let s = PnsSample::new(values, vec![1; 7], 1, Direction::Min).unwrap();
        for &t in &[0.0, 0.1, 0.25, 0.5, 0.8, 1.0] {
            let e = edf(&s, t);
            assert_eq!(estimate_mb(&s, t).unwrap().estimate, e);
            assert_eq!(estimate_ml(&s, t).unwrap().estimate, e);
        }
    }

    #[test]
    fn single_stratum_ml_equals_mb() {
        let values = vec![0.3, 0.9, 0.1, 0.5, 0.7, 0.2];
        let s = PnsSample::new(values, vec![2; 6], 4, Direction::Min).unwrap();
        let mb = estimate_mb(&s, 0.4).unwrap();
        let ml = estimate_ml(&s, 0.4).unwrap();
        assert_eq!(mb.estimate, ml.estimate);
        assert_abs_diff_eq!(mb.asymptotic_variance, ml.asymptotic_variance, epsilon = 1e-12);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(var_srs(0.5), 0.25);
        assert_eq!(var_srs(0.0), 0.0);
        assert_eq!(var_srs(1.0), 0.0);
        assert_abs_diff_eq!(var_srs(0.061), 0.057279, epsilon = 1e-12);

        let one = DesignSpec::<f64>::uniform(1, Direction::Min).unwrap();
        let top = DesignSpec::<f64>::degenerate(5, 5, Direction::Min).unwrap();
        for &f in &[0.05, 0.3, 0.5, 0.9] {
            assert_abs_diff_eq!(var_mb(f, &one).unwrap(), f * (1.0 - f), epsilon = 1e-14);
            assert_abs_diff_eq!(var_ml(f, &one).unwrap(), f * (1.0 - f), epsilon = 1e-14);
            assert_abs_diff_eq!(var_mb(f, &top).unwrap(), f * (1.0 - f), epsilon = 1e-12);
            for r in 1..=5 {
                let d = DesignSpec::<f64>::degenerate(5, r, Direction::Min).unwrap();
                let (a, b) = (var_mb(f, &d).unwrap(), var_ml(f, &d).unwrap());
                assert!((a - b).abs() <= 1e-9 * a, "r={r} f={f}: {a} vs {b}");
            }
        }
        let b3 = DesignSpec::<f64>::uniform(3, Direction::Min).unwrap();
        assert!(var_ml(0.5, &b3).unwrap() <= var_mb(0.5, &b3).unwrap());
        assert_eq!(var_mb(0.0, &b3).unwrap(), 0.0);
        assert!(var_mb(1.2, &b3).is_err());
    }

    #[test]
    fn are_examples() {
        let one = DesignSpec::<f64>::uniform(1, Direction::Min).unwrap();
        for &f in &[0.01, 0.5, 0.99] {
            assert_abs_diff_eq!(are(f, &one, Method::Mb).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(are(f, &one, Method::Ml).unwrap(), 1.0, epsilon = 1e-12);
        }
        let a = DesignSpec::new(vec![4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], Direction::Min).unwrap();
        let b = DesignSpec::<f64>::uniform(3, Direction::Min).unwrap();
        let c = DesignSpec::new(vec![1.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0], Direction::Min).unwrap();
        let (ea, eb, ec) = (
            are(0.05, &a, Method::Mb).unwrap(),
            are(0.05, &b, Method::Mb).unwrap(),
            are(0.05, &c, Method::Mb).unwrap(),
        );
        assert!(ea > 1.0 && ea >= eb && eb >= ec);
        assert!(are(0.0, &a, Method::Mb).is_err());
        assert!(are(0.3, &a, Method::Edf).is_err());
    }

    #[test]
    fn max_direction_mirrors_min() {
        // MaxPNS on v is MinPNS on -v: F_max(t) = 1 - F_min(-t) up to the atom at t.
        let values: Vec<f64> = TABLE1_VALUES.to_vec();
        let strata = table1().strata().to_vec();
        let max = PnsSample::new(values.clone(), strata.clone(), 5, Direction::Max).unwrap();
        let neg: Vec<f64> = values.iter().map(|v| -v).collect();
        let min = PnsSample::new(neg, strata, 5, Direction::Min).unwrap();
        let t = 0.7;
        let a = estimate_ml(&max, t).unwrap().estimate;
        // -Y < -t is the complement of Y <= t for continuous values not equal to t.
        let b = 1.0 - estimate_ml(&min, -t).unwrap().estimate;
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        let a = estimate_mb(&max, t).unwrap().estimate;
        let b = 1.0 - estimate_mb(&min, -t).unwrap().estimate;
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn sample_validation() {
        assert!(PnsSample::<f64>::new(vec![], vec![], 3, Direction::Min).is_err());
        assert!(PnsSample::new(vec![1.0], vec![4], 3, Direction::Min).is_err());
        assert!(PnsSample::new(vec![1.0, 2.0], vec![1], 3, Direction::Min).is_err());
        assert!(PnsSample::new(vec![f64::NAN], vec![1], 3, Direction::Min).is_err());
        assert!(PnsSample::from_ties(vec![1.0], &table1_ties()).is_err());
    }

    #[test]
    fn tally_validation() {
        let spec = DesignSpec::<f64>::uniform(2, Direction::Min).unwrap();
        assert!(ml_from_counts(&spec, &[2, 2], &[3, 0]).is_err());
        assert!(ml_from_counts(&spec, &[2], &[1]).is_err());
        assert!(log_likelihood(0.0, &spec, &[2, 2], &[1, 1]).is_err());
    }
}
