//! PNS sample generation.
//!
//! A set of `m` units is drawn from the population and given ranking scores.
//! Under fixed tie scenarios the stratum `r` of each observation is imposed and
//! the measured unit is a uniform pick among the `r` units with the most extreme
//! scores. Under ordinal concomitant ranking ties arise naturally: every unit
//! sharing the extreme category is tied.
//!
//! MaxPNS draws negate the ranking scores (or reverse the ordinal order) and run
//! the MinPNS path; the recorded value is always the true measurement.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::OrdinalVariable;
use crate::error::{PnsError, Result};
use crate::estimators::{PnsSample, TieMatrix};
use crate::order_stat::Direction;

/// Finite population of non-missing measurements, sampled with replacement.
///
/// Each ordinal variable is aligned with `values`; `None` assignments mark
/// records that cannot be ranked on that variable.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePopulation {
    values: Vec<f64>,
    variables: Vec<OrdinalVariable>,
    mean: f64,
    sd: f64,
}

impl FinitePopulation {
    pub fn new(values: Vec<f64>, variables: Vec<OrdinalVariable>) -> Result<Self> {
        if values.is_empty() {
            return Err(PnsError::InvalidConfig("finite population is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PnsError::data(Some(i + 1), "population value is not finite"));
        }
        for var in &variables {
            if var.assignments.len() != values.len() {
                return Err(PnsError::InvalidConfig(format!(
                    "variable {} has {} assignments for {} records",
                    var.name,
                    var.assignments.len(),
                    values.len()
                )));
            }
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        Ok(FinitePopulation {
            values,
            variables,
            mean,
            sd,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn variables(&self) -> &[OrdinalVariable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&OrdinalVariable> {
        self.variables
            .iter()
            .find(|v| v.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                PnsError::InvalidConfig(format!("population has no ordinal variable {name:?}"))
            })
    }

    /// Fraction of values `<= t`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.values.iter().filter(|&&v| v <= t).count() as f64 / self.values.len() as f64
    }

    /// Same records with every value negated; variables are kept as they are.
    pub fn negated(&self) -> FinitePopulation {
        FinitePopulation {
            values: self.values.iter().map(|v| -v).collect(),
            variables: self.variables.clone(),
            mean: -self.mean,
            sd: self.sd,
        }
    }

    /// Records that carry a level for `name`, as `(value, level)` pairs.
    pub fn ranked_records(&self, name: &str) -> Result<Vec<(f64, usize)>> {
        let var = self.variable(name)?;
        let records: Vec<(f64, usize)> = self
            .values
            .iter()
            .zip(&var.assignments)
            .filter_map(|(&v, a)| a.map(|lvl| (v, lvl)))
            .collect();
        if records.is_empty() {
            return Err(PnsError::InvalidConfig(format!(
                "no record has a value for ranking variable {name:?}"
            )));
        }
        Ok(records)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Population {
    Uniform,
    Exponential,
    Normal { mean: f64, sd: f64 },
    Finite(FinitePopulation),
}

impl Population {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !mean.is_finite() || !sd.is_finite() {
            return Err(PnsError::InvalidConfig(format!(
                "normal population needs finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(Population::Normal { mean, sd })
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Population::Finite(_))
    }

    pub fn mean(&self) -> f64 {
        match self {
            Population::Uniform => 0.5,
            Population::Exponential => 1.0,
            Population::Normal { mean, .. } => *mean,
            Population::Finite(p) => p.mean,
        }
    }

    pub fn sd(&self) -> f64 {
        match self {
            Population::Uniform => (1.0f64 / 12.0).sqrt(),
            Population::Exponential => 1.0,
            Population::Normal { sd, .. } => *sd,
            Population::Finite(p) => p.sd,
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Population::Uniform => t.clamp(0.0, 1.0),
            Population::Exponential => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-t).exp_m1()
                }
            }
            Population::Normal { mean, sd } => std_normal().cdf((t - mean) / sd),
            Population::Finite(p) => p.cdf(t),
        }
    }

    /// Exact quantile for analytic parents.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PnsError::domain("p", p, "[0, 1]"));
        }
        match self {
            Population::Uniform => Ok(p),
            Population::Exponential => Ok(-(-p).ln_1p()),
            Population::Normal { mean, sd } => Ok(mean + sd * std_normal().inverse_cdf(p)),
            Population::Finite(_) => Err(PnsError::InvalidConfig(
                "quantiles are only available for analytic populations; supply thresholds".into(),
            )),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Population::Uniform => rng.random::<f64>(),
            Population::Exponential => -(-rng.random::<f64>()).ln_1p(),
            Population::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Population::Finite(p) => p.values[rng.random_range(0..p.values.len())],
        }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Order of ordinal levels for nomination: `Ascending` treats the lowest
/// level as the smallest unit, `Descending` the highest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankDirection {
    Ascending,
    Descending,
}

impl RankDirection {
    pub fn reversed(self) -> Self {
        match self {
            RankDirection::Ascending => RankDirection::Descending,
            RankDirection::Descending => RankDirection::Ascending,
        }
    }
}

impl std::str::FromStr for RankDirection {
    type Err = PnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asc" | "ascending" => Ok(RankDirection::Ascending),
            "desc" | "descending" => Ok(RankDirection::Descending),
            other => Err(PnsError::InvalidConfig(format!(
                "unknown rank direction {other:?} (expected ascending or descending)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankingModel {
    Perfect,
    /// Dell-Clutter perceived scores with correlation `rho`.
    LinearError { rho: f64 },
    OrdinalConcomitant {
        variable: String,
        direction: RankDirection,
    },
}

impl RankingModel {
    pub fn linear_error(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(PnsError::domain("rho", rho, "[0, 1]"));
        }
        Ok(RankingModel::LinearError { rho })
    }

    /// `rho` for score-based models; `None` for ordinal ranking.
    pub fn rho(&self) -> Option<f64> {
        match self {
            RankingModel::Perfect => Some(1.0),
            RankingModel::LinearError { rho } => Some(*rho),
            RankingModel::OrdinalConcomitant { .. } => None,
        }
    }
}

/// A named stratum-weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScenario {
    pub name: String,
    pub weights: Vec<f64>,
}

impl LambdaScenario {
    pub fn new(name: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        check_lambda(&weights)?;
        Ok(LambdaScenario {
            name: name.into(),
            weights,
        })
    }

    /// The three tie scenarios A, B, C for set sizes 3 and 5; confidence in
    /// the nominated extreme decreases from A to C.
    pub fn named(name: &str, m: usize) -> Result<Self> {
        let w: Vec<f64> = match (name.to_ascii_uppercase().as_str(), m) {
            ("A", 3) => vec![4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
            ("B", 3) => vec![2.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0],
            ("C", 3) => vec![1.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0],
            ("A", 5) => vec![0.4, 0.2, 0.2, 0.1, 0.1],
            ("B", 5) => vec![0.2; 5],
            ("C", 5) => vec![0.1, 0.1, 0.2, 0.2, 0.4],
            ("NS", m) if m >= 1 => {
                let mut w = vec![0.0; m];
                w[0] = 1.0;
                w
            }
            _ => {
                return Err(PnsError::InvalidConfig(format!(
                    "no built-in scenario {name:?} for m = {m} (A/B/C exist for m = 3 and 5)"
                )))
            }
        };
        Self::new(name.to_ascii_uppercase(), w)
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TieScenario {
    FixedLambda(LambdaScenario),
    /// Ties produced by an ordinal concomitant.
    Natural,
}

impl TieScenario {
    pub fn label(&self) -> &str {
        match self {
            TieScenario::FixedLambda(s) => &s.name,
            TieScenario::Natural => "natural",
        }
    }
}

fn check_lambda(lambda: &[f64]) -> Result<()> {
    if lambda.is_empty() {
        return Err(PnsError::InvalidConfig("weight vector is empty".into()));
    }
    if lambda.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(PnsError::InvalidConfig(format!(
            "weights must be finite and >= 0, got {lambda:?}"
        )));
    }
    let total: f64 = lambda.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(PnsError::InvalidConfig(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Integer stratum sizes `lambda * n`, rounded by largest remainder so they
/// sum to exactly `n`. Equal remainders go to the lower stratum first.
pub fn scenario_counts(lambda: &[f64], n: usize) -> Result<Vec<usize>> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(PnsError::InvalidConfig("sample size must be at least 1".into()));
    }
    let exact: Vec<f64> = lambda.iter().map(|w| w * n as f64).collect();
    // Snap values within rounding noise of an integer so 4/6 * 30 counts as 20.
    let mut counts: Vec<usize> = exact
        .iter()
        .map(|&x| {
            let r = x.round();
            if (x - r).abs() < 1e-9 {
                r as usize
            } else {
                x.floor() as usize
            }
        })
        .collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    if assigned > n {
        return Err(PnsError::InvalidConfig("weights round above the sample size".into()));
    }
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    Ok(counts)
}

/// Dell-Clutter perceived score `rho (y - mu) / sigma + sqrt(1 - rho^2) z`.
pub fn dell_clutter_score(y: f64, mu: f64, sigma: f64, rho: f64, z: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(PnsError::domain("sigma", sigma, "(0, inf)"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(PnsError::domain("rho", rho, "[0, 1]"));
    }
    Ok(rho * (y - mu) / sigma + (1.0 - rho * rho).sqrt() * z)
}

/// Reusable per-set workspace: `(score, tiebreak, value)`.
struct SetBuffer {
    units: Vec<(f64, u32, f64)>,
}

impl SetBuffer {
    fn new(m: usize) -> Self {
        SetBuffer {
            units: Vec::with_capacity(m),
        }
    }

    /// Draws one set and returns the true value of a uniform pick among the
    /// `r` units with the smallest (signed) scores.
    fn nominate<R: Rng + ?Sized>(
        &mut self,
        population: &Population,
        scoring: Scoring,
        negate: bool,
        r: usize,
        m: usize,
        rng: &mut R,
    ) -> f64 {
        self.units.clear();
        for _ in 0..m {
            let y = population.draw(rng);
            let score = match scoring {
                Scoring::Perfect => y,
                Scoring::Linear { mu, sigma, rho } => {
                    let z: f64 = rng.sample(StandardNormal);
                    rho * (y - mu) / sigma + (1.0 - rho * rho).sqrt() * z
                }
            };
            let sign = if negate { -1.0 } else { 1.0 };
            self.units.push((sign * score, rng.random(), y));
        }
        let pick = if r == 1 { 0 } else { rng.random_range(0..r) };
        let (_, _, value) = *self
            .units
            .select_nth_unstable_by(pick, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .1;
        value
    }
}

#[derive(Debug, Clone, Copy)]
enum Scoring {
    Perfect,
    Linear { mu: f64, sigma: f64, rho: f64 },
}

fn scoring_for(population: &Population, ranking: &RankingModel) -> Result<Scoring> {
    match ranking {
        RankingModel::Perfect => Ok(Scoring::Perfect),
        RankingModel::LinearError { rho } => {
            let sigma = population.sd();
            dell_clutter_score(0.0, 0.0, sigma, *rho, 0.0)?;
            Ok(Scoring::Linear {
                mu: population.mean(),
                sigma,
                rho: *rho,
            })
        }
        RankingModel::OrdinalConcomitant { .. } => Err(PnsError::InvalidConfig(
            "ordinal ranking produces natural ties; use the concomitant sampler".into(),
        )),
    }
}

fn draw_fixed<R: Rng + ?Sized>(
    population: &Population,
    ranking: &RankingModel,
    lambda: &[f64],
    n: usize,
    m: usize,
    direction: Direction,
    rng: &mut R,
) -> Result<PnsSample<f64>> {
    if lambda.len() != m {
        return Err(PnsError::InvalidConfig(format!(
            "weight vector has {} entries for set size {m}",
            lambda.len()
        )));
    }
    let counts = scenario_counts(lambda, n)?;
    let scoring = scoring_for(population, ranking)?;
    let mut buf = SetBuffer::new(m);
    let mut values = Vec::with_capacity(n);
    let mut strata = Vec::with_capacity(n);
    let negate = direction == Direction::Max;
    for (idx, &count) in counts.iter().enumerate() {
        let r = idx + 1;
        for _ in 0..count {
            values.push(buf.nominate(population, scoring, negate, r, m, rng));
            strata.push(r);
        }
    }
    PnsSample::new(values, strata, m, direction)
}

/// MinPNS sample with stratum sizes fixed by `lambda`.
pub fn draw_minpns_fixed<R: Rng + ?Sized>(
    population: &Population,
    ranking: &RankingModel,
    lambda: &[f64],
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<PnsSample<f64>> {
    draw_fixed(population, ranking, lambda, n, m, Direction::Min, rng)
}

/// MaxPNS counterpart of [`draw_minpns_fixed`].
pub fn draw_maxpns_fixed<R: Rng + ?Sized>(
    population: &Population,
    ranking: &RankingModel,
    lambda: &[f64],
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<PnsSample<f64>> {
    draw_fixed(population, ranking, lambda, n, m, Direction::Max, rng)
}

fn draw_concomitant<R: Rng + ?Sized>(
    records: &[(f64, usize)],
    ascending: bool,
    n: usize,
    m: usize,
    direction: Direction,
    rng: &mut R,
) -> Result<(PnsSample<f64>, TieMatrix)> {
    if n == 0 || m == 0 {
        return Err(PnsError::InvalidConfig("n and m must be at least 1".into()));
    }
    let mut set: Vec<(f64, usize)> = Vec::with_capacity(m);
    let mut tied: Vec<f64> = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        set.clear();
        for _ in 0..m {
            set.push(records[rng.random_range(0..records.len())]);
        }
        let extreme = if ascending {
            set.iter().map(|u| u.1).min()
        } else {
            set.iter().map(|u| u.1).max()
        }
        .expect("non-empty set");
        tied.clear();
        tied.extend(set.iter().filter(|u| u.1 == extreme).map(|u| u.0));
        let r = tied.len();
        let pick = if r == 1 { 0 } else { rng.random_range(0..r) };
        values.push(tied[pick]);
        rows.push(TieMatrix::leading_row(m, r, direction));
    }
    let ties = TieMatrix::new(m, direction, rows)?;
    let sample = PnsSample::from_ties(values, &ties)?;
    Ok((sample, ties))
}

/// MinPNS with natural ties from an ordinal concomitant: in each set the units
/// in the extreme category (lowest for `Ascending`) are tied, one of them is
/// measured and its tie row gets `r` leading ones.
pub fn draw_minpns_concomitant<R: Rng + ?Sized>(
    population: &FinitePopulation,
    variable: &str,
    direction: RankDirection,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<(PnsSample<f64>, TieMatrix)> {
    let records = population.ranked_records(variable)?;
    draw_concomitant(
        &records,
        direction == RankDirection::Ascending,
        n,
        m,
        Direction::Min,
        rng,
    )
}

/// MaxPNS with natural ties: the ordinal order is reversed and the Min path reused.
pub fn draw_maxpns_concomitant<R: Rng + ?Sized>(
    population: &FinitePopulation,
    variable: &str,
    direction: RankDirection,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<(PnsSample<f64>, TieMatrix)> {
    let records = population.ranked_records(variable)?;
    draw_concomitant(
        &records,
        direction.reversed() == RankDirection::Ascending,
        n,
        m,
        Direction::Max,
        rng,
    )
}

/// Collects records usable by [`draw_concomitant_with`], so repeated draws do
/// not re-filter the population.
pub fn concomitant_records(population: &FinitePopulation, variable: &str) -> Result<Vec<(f64, usize)>> {
    population.ranked_records(variable)
}

/// MinPNS/MaxPNS concomitant draw over pre-collected `(value, level)` records.
pub fn draw_concomitant_with<R: Rng + ?Sized>(
    records: &[(f64, usize)],
    rank: RankDirection,
    design: Direction,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<(PnsSample<f64>, TieMatrix)> {
    if records.is_empty() {
        return Err(PnsError::InvalidConfig("no rankable records".into()));
    }
    let ascending = match design {
        Direction::Min => rank == RankDirection::Ascending,
        Direction::Max => rank == RankDirection::Descending,
    };
    draw_concomitant(records, ascending, n, m, design, rng)
}

/// Simple random sample of size `n`, with replacement for finite populations.
pub fn draw_srs<R: Rng + ?Sized>(population: &Population, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| population.draw(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_stat::{stratum_cdf, DesignSpec};
    use crate::rng::substream;

    fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
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

    fn one_hot(m: usize, r: usize) -> Vec<f64> {
        let mut w = vec![0.0; m];
        w[r - 1] = 1.0;
        w
    }

    fn finite(values: Vec<f64>, levels: Vec<Option<usize>>) -> FinitePopulation {
        let k = levels.iter().flatten().max().map_or(1, |l| l + 1);
        let var = OrdinalVariable {
            name: "v".into(),
            levels: (0..k).map(|i| i.to_string()).collect(),
            assignments: levels,
        };
        FinitePopulation::new(values, vec![var]).unwrap()
    }

    #[test]
    fn scenario_count_examples() {
        assert_eq!(scenario_counts(&[4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], 30).unwrap(), vec![20, 5, 5]);
        assert_eq!(scenario_counts(&[2.0 / 6.0; 3], 30).unwrap(), vec![10, 10, 10]);
        assert_eq!(scenario_counts(&[1.0], 7).unwrap(), vec![7]);
        assert_eq!(scenario_counts(&[0.4, 0.2, 0.2, 0.1, 0.1], 7).unwrap().iter().sum::<usize>(), 7);
        assert!(scenario_counts(&[0.5, 0.6], 10).is_err());
        assert!(scenario_counts(&[1.0], 0).is_err());
    }

    #[test]
    fn dell_clutter_limits() {
        assert_eq!(dell_clutter_score(3.0, 1.0, 2.0, 1.0, 9.0).unwrap(), 1.0);
        assert_eq!(dell_clutter_score(3.0, 1.0, 2.0, 0.0, -0.4).unwrap(), -0.4);
        assert!(dell_clutter_score(0.0, 0.0, 0.0, 0.5, 0.0).is_err());
        assert!(dell_clutter_score(0.0, 0.0, 1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn dell_clutter_correlation() {
        let mut rng = substream(11, 9, 0);
        let n = 1_000_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let y: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            let x = dell_clutter_score(y, 0.0, 1.0, 0.75, z).unwrap();
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let cov = sxy / nf - sx * sy / (nf * nf);
        let r = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        assert!((r - 0.75).abs() < 0.005, "{r}");
    }

    #[test]
    fn perfect_ranking_r1_is_the_set_extreme() {
        // With m = 1 there is nothing to rank, so perfect r = 1 equals the draw.
        let pop = finite(vec![1.0, 2.0, 3.0], vec![Some(0); 3]);
        let parent = Population::Finite(pop);
        let s = draw_minpns_fixed(&parent, &RankingModel::Perfect, &[1.0, 0.0, 0.0], 2000, 3, &mut substream(1, 0, 0)).unwrap();
        // The minimum of three draws from {1,2,3} is 3 only when all are 3.
        let threes = s.values().iter().filter(|&&v| v == 3.0).count() as f64 / 2000.0;
        assert!((threes - 1.0 / 27.0).abs() < 0.015, "{threes}");
        let s = draw_maxpns_fixed(&parent, &RankingModel::Perfect, &[1.0, 0.0, 0.0], 2000, 3, &mut substream(1, 0, 0)).unwrap();
        let ones = s.values().iter().filter(|&&v| v == 1.0).count() as f64 / 2000.0;
        assert!((ones - 1.0 / 27.0).abs() < 0.015, "{ones}");
    }

    #[test]
    fn perfect_stratum_matches_order_statistic_mixture() {
        let n = 100_000;
        for dir in [Direction::Min, Direction::Max] {
            for r in [1, 3] {
                let lambda = one_hot(3, r);
                let mut rng = substream(5, 0, r as u64);
                let s = draw_fixed(&Population::Uniform, &RankingModel::Perfect, &lambda, n, 3, dir, &mut rng).unwrap();
                assert_eq!(s.counts()[r - 1], n);
                let spec = DesignSpec::new(lambda.clone(), dir).unwrap();
                let d = ks(s.values().to_vec(), |x| stratum_cdf(x, r, &spec).unwrap());
                assert!(d < 0.01, "{dir:?} r={r}: D={d}");
            }
        }
    }

    #[test]
    fn zero_correlation_is_random_selection() {
        let n = 100_000;
        for r in [1, 2, 3] {
            let lambda = one_hot(3, r);
            let mut rng = substream(6, 0, r as u64);
            let s = draw_minpns_fixed(&Population::Uniform, &RankingModel::LinearError { rho: 0.0 }, &lambda, n, 3, &mut rng).unwrap();
            let d = ks(s.values().to_vec(), |x| x);
            assert!(d < 0.01, "r={r}: D={d}");
        }
    }

    #[test]
    fn max_equals_reflected_min() {
        let values: Vec<f64> = (0..50).map(|i| (i * 7 % 50) as f64 / 10.0).collect();
        let pop = FinitePopulation::new(values, vec![]).unwrap();
        let lambda = [0.5, 0.3, 0.2];
        let max = draw_maxpns_fixed(&Population::Finite(pop.clone()), &RankingModel::Perfect, &lambda, 300, 3, &mut substream(3, 0, 0)).unwrap();
        let min = draw_minpns_fixed(&Population::Finite(pop.negated()), &RankingModel::Perfect, &lambda, 300, 3, &mut substream(3, 0, 0)).unwrap();
        let flipped: Vec<f64> = min.values().iter().map(|v| -v).collect();
        assert_eq!(max.values(), flipped.as_slice());
        assert_eq!(max.counts(), min.counts());
    }

    #[test]
    fn fixed_counts_follow_scenario() {
        let lambda = LambdaScenario::named("A", 5).unwrap();
        let s = draw_minpns_fixed(&Population::Exponential, &RankingModel::linear_error(0.75).unwrap(), &lambda.weights, 60, 5, &mut substream(1, 0, 0)).unwrap();
        assert_eq!(s.counts(), scenario_counts(&lambda.weights, 60).unwrap().as_slice());
        assert!(draw_minpns_fixed(&Population::Uniform, &RankingModel::Perfect, &lambda.weights, 60, 3, &mut substream(1, 0, 0)).is_err());
    }

    #[test]
    fn seeded_draws_repeat() {
        let lambda = LambdaScenario::named("B", 3).unwrap().weights;
        let draw = || draw_minpns_fixed(&Population::normal(0.0, 2.0).unwrap(), &RankingModel::LinearError { rho: 0.5 }, &lambda, 40, 3, &mut substream(42, 0, 7)).unwrap();
        assert_eq!(draw(), draw());
    }

    #[test]
    fn concomitant_all_tied_and_all_distinct() {
        // Single category: every set is fully tied.
        let pop = finite(vec![1.0, 2.0, 3.0, 4.0], vec![Some(0); 4]);
        let (s, ties) = draw_minpns_concomitant(&pop, "v", RankDirection::Ascending, 50, 4, &mut substream(1, 0, 0)).unwrap();
        assert!(s.strata().iter().all(|&r| r == 4));
        assert!(ties.rows().iter().all(|row| row[0] == 1));

        // One record: every set repeats it, so r = m.
        let pop = finite(vec![1.0], vec![Some(0)]);
        let (s, _) = draw_minpns_concomitant(&pop, "v", RankDirection::Ascending, 5, 3, &mut substream(1, 0, 0)).unwrap();
        assert!(s.strata().iter().all(|&r| r == 3));

        // Many distinct levels and m = 1: pure NS, always r = 1.
        let pop = finite((0..20).map(|i| i as f64).collect(), (0..20).map(Some).collect());
        let (s, ties) = draw_maxpns_concomitant(&pop, "v", RankDirection::Ascending, 30, 1, &mut substream(1, 0, 0)).unwrap();
        assert!(s.strata().iter().all(|&r| r == 1));
        assert!(ties.rows().iter().all(|row| row[0] == 1));
    }

    #[test]
    fn concomitant_picks_extreme_level() {
        // Two records on levels 0 and 1: the other value is measured only when
        // the whole set landed on it, in which case every unit is tied.
        let pop = finite(vec![10.0, 20.0], vec![Some(0), Some(1)]);
        let records = concomitant_records(&pop, "v").unwrap();
        let mut rng = substream(2, 0, 0);
        let cases = [
            (RankDirection::Ascending, Direction::Min, 20.0),
            (RankDirection::Descending, Direction::Min, 10.0),
            (RankDirection::Ascending, Direction::Max, 10.0),
            (RankDirection::Descending, Direction::Max, 20.0),
        ];
        for (rank, design, off_extreme) in cases {
            let (s, ties) = draw_concomitant_with(&records, rank, design, 400, 2, &mut rng).unwrap();
            let mut seen_off = 0;
            for (&v, &r) in s.values().iter().zip(s.strata()) {
                if v == off_extreme {
                    assert_eq!(r, 2, "{rank:?} {design:?}");
                    seen_off += 1;
                }
            }
            assert!(seen_off > 50 && seen_off < 150, "{seen_off}");
            let anchor = if design == Direction::Min { 0 } else { 1 };
            assert!(ties.rows().iter().all(|row| row[anchor] == 1));
        }
    }

    #[test]
    fn missing_levels_are_skipped() {
        let pop = finite(vec![1.0, 2.0, 3.0], vec![None, Some(0), None]);
        let (s, _) = draw_minpns_concomitant(&pop, "v", RankDirection::Ascending, 20, 2, &mut substream(1, 0, 0)).unwrap();
        assert!(s.values().iter().all(|&v| v == 2.0));
        let none = finite(vec![1.0], vec![None]);
        assert!(draw_minpns_concomitant(&none, "v", RankDirection::Ascending, 1, 2, &mut substream(1, 0, 0)).is_err());
        assert!(draw_minpns_concomitant(&none, "nope", RankDirection::Ascending, 1, 2, &mut substream(1, 0, 0)).is_err());
    }

    #[test]
    fn rejects_ordinal_model_in_fixed_draws() {
        let m = RankingModel::OrdinalConcomitant { variable: "v".into(), direction: RankDirection::Ascending };
        assert!(draw_minpns_fixed(&Population::Uniform, &m, &[1.0], 3, 1, &mut substream(1, 0, 0)).is_err());
        assert!(RankingModel::linear_error(-0.1).is_err());
        assert_eq!(RankingModel::Perfect.rho(), Some(1.0));
    }

    #[test]
    fn analytic_quantiles_invert_cdf() {
        for pop in [Population::Uniform, Population::Exponential, Population::normal(1.0, 3.0).unwrap()] {
            for p in [0.01, 0.3, 0.5, 0.99] {
                let q = pop.quantile(p).unwrap();
                assert!((pop.cdf(q) - p).abs() < 1e-12, "{pop:?} {p}");
            }
        }
        let fin = Population::Finite(finite(vec![1.0], vec![Some(0)]));
        assert!(fin.quantile(0.5).is_err());
    }
}
