//! Relative-efficiency experiments.
//!
//! Each replication draws one SRS sample and one PNS sample of size `n` and
//! evaluates every estimator at every evaluation point. Errors `F_hat - F` are
//! accumulated per (method, point) in streaming central moments.
//!
//! Replications are grouped in fixed-size blocks. Blocks run in parallel but are
//! merged in block order, and every replication owns RNG substreams keyed by its
//! index, so results are bit-identical for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PnsError, Result};
use crate::estimators::{are, ml_from_counts, Method};
use crate::order_stat::{g_inverse, DesignSpec, Direction};
use crate::rng::{substream, LANE_PNS, LANE_SRS};
use crate::sampler::{
    concomitant_records, draw_concomitant_with, draw_maxpns_fixed, draw_minpns_fixed, draw_srs,
    FinitePopulation, LambdaScenario, Population, RankDirection, RankingModel, TieScenario,
};

pub const DEFAULT_SEED: u64 = 20_160_301;
pub const DEFAULT_REPLICATIONS: usize = 20_000;
const BLOCK: usize = 64;

/// Streaming mean and central moments up to order four, mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        self.count += other.count;
        self.mean += delta * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
    }

    /// Variance with divisor `count`.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    /// Central moment of order `k` in 2..=4.
    pub fn central(&self, k: u32) -> f64 {
        let n = self.count.max(1) as f64;
        match k {
            2 => self.m2 / n,
            3 => self.m3 / n,
            4 => self.m4 / n,
            _ => panic!("central moment order {k} not tracked"),
        }
    }

    /// `E[x^2]`, i.e. the mean squared value.
    pub fn mean_square(&self) -> f64 {
        self.variance() + self.mean * self.mean
    }

    /// Sampling variance of the mean-square estimate.
    pub fn mean_square_var(&self) -> f64 {
        let (mu, c2, c3, c4) = (self.mean, self.central(2), self.central(3), self.central(4));
        let e2 = c2 + mu * mu;
        let e4 = c4 + 4.0 * mu * c3 + 6.0 * mu * mu * c2 + mu.powi(4);
        ((e4 - e2 * e2) / self.count.max(1) as f64).max(0.0)
    }

    /// Sampling variance of the variance estimate.
    pub fn variance_var(&self) -> f64 {
        let c2 = self.central(2);
        ((self.central(4) - c2 * c2) / self.count.max(1) as f64).max(0.0)
    }
}

/// Where estimators are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum EvalPoints {
    /// Parent quantile levels `p`; `t = Q(p)` and the target is `p`.
    Quantiles(Vec<f64>),
    /// Thresholds `t`; the target is the parent CDF at `t`.
    Thresholds(Vec<f64>),
}

impl EvalPoints {
    pub fn values(&self) -> &[f64] {
        match self {
            EvalPoints::Quantiles(v) | EvalPoints::Thresholds(v) => v,
        }
    }

    /// `0.05, 0.10, ..., 0.95`.
    pub fn default_grid() -> Self {
        EvalPoints::Quantiles((1..20).map(|k| k as f64 / 20.0).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub scenario: TieScenario,
    pub ranking: RankingModel,
    pub parent: Population,
    pub direction: Direction,
    pub replications: usize,
    pub points: EvalPoints,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// SRS and PNS draws of a replication share one substream.
    pub common_random_numbers: bool,
}

impl ExperimentConfig {
    /// MinPNS under perfect ranking on the default grid, MB and ML.
    pub fn new(n: usize, scenario: LambdaScenario, parent: Population) -> Self {
        ExperimentConfig {
            n,
            m: scenario.m(),
            scenario: TieScenario::FixedLambda(scenario),
            ranking: RankingModel::Perfect,
            parent,
            direction: Direction::Min,
            replications: DEFAULT_REPLICATIONS,
            points: EvalPoints::default_grid(),
            seed: DEFAULT_SEED,
            methods: vec![Method::Mb, Method::Ml],
            common_random_numbers: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PnsError::InvalidConfig(msg));
        if self.n == 0 || self.m == 0 {
            return bad("n and m must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no estimator selected".into());
        }
        if self.points.values().is_empty() {
            return bad("no evaluation points".into());
        }
        match &self.points {
            EvalPoints::Quantiles(ps) => {
                if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                    return bad(format!("quantile level {p} outside (0, 1)"));
                }
                if !self.parent.is_analytic() {
                    return bad("finite populations take thresholds, not quantile levels".into());
                }
            }
            EvalPoints::Thresholds(ts) => {
                if ts.iter().any(|t| !t.is_finite()) {
                    return bad("thresholds must be finite".into());
                }
            }
        }
        match (&self.scenario, &self.ranking) {
            (TieScenario::FixedLambda(l), RankingModel::Perfect | RankingModel::LinearError { .. }) => {
                if l.m() != self.m {
                    return bad(format!("scenario {} has {} weights for m = {}", l.name, l.m(), self.m));
                }
                if let RankingModel::LinearError { rho } = self.ranking {
                    RankingModel::linear_error(rho)?;
                }
            }
            (TieScenario::Natural, RankingModel::OrdinalConcomitant { variable, .. }) => match &self.parent {
                Population::Finite(p) => {
                    p.variable(variable)?;
                }
                _ => return bad("ordinal ranking needs a finite population".into()),
            },
            (TieScenario::Natural, _) => {
                return bad("natural ties need ordinal concomitant ranking".into())
            }
            (TieScenario::FixedLambda(_), _) => {
                return bad("fixed tie scenarios need perfect or linear-error ranking".into())
            }
        }
        Ok(())
    }

    fn rho_label(&self) -> String {
        match &self.ranking {
            RankingModel::Perfect => "1".into(),
            RankingModel::LinearError { rho } => rho.to_string(),
            RankingModel::OrdinalConcomitant { variable, .. } => variable.clone(),
        }
    }
}

/// One (method, evaluation point) row. Field order is the output column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub scenario: String,
    /// Ranking correlation, `1` for perfect ranking, or the ordinal variable name.
    pub rho: String,
    pub p_or_t: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub re: f64,
    /// Delta-method standard error of `re`.
    pub re_se: f64,
    pub srs_variance: f64,
    pub true_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub replications: usize,
    pub records: Vec<ResultRecord>,
}

impl ExperimentResult {
    pub fn get(&self, method: Method, p_or_t: f64) -> Option<&ResultRecord> {
        self.records
            .iter()
            .find(|r| r.method == method && (r.p_or_t - p_or_t).abs() < 1e-12)
    }
}

/// Per-block error accumulators: `srs[j]`, `est[method][j]`.
#[derive(Clone)]
struct Tally {
    srs: Vec<Moments>,
    est: Vec<Vec<Moments>>,
}

impl Tally {
    fn new(methods: usize, points: usize) -> Self {
        Tally {
            srs: vec![Moments::default(); points],
            est: vec![vec![Moments::default(); points]; methods],
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.srs.iter_mut().zip(&other.srs) {
            a.merge(b);
        }
        for (ra, rb) in self.est.iter_mut().zip(&other.est) {
            for (a, b) in ra.iter_mut().zip(rb) {
                a.merge(b);
            }
        }
    }
}

enum Plan {
    Fixed {
        lambda: Vec<f64>,
        spec: DesignSpec<f64>,
        counts: Vec<usize>,
        /// `g^{-1}(k / n)` for `k = 0..=n`.
        mb_table: Vec<f64>,
    },
    Natural {
        records: Vec<(f64, usize)>,
        rank: RankDirection,
    },
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    plan: Plan,
    ts: Vec<f64>,
    truth: Vec<f64>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (ts, truth) = match &cfg.points {
            EvalPoints::Quantiles(ps) => (
                ps.iter().map(|&p| cfg.parent.quantile(p)).collect::<Result<Vec<_>>>()?,
                ps.clone(),
            ),
            EvalPoints::Thresholds(ts) => {
                (ts.clone(), ts.iter().map(|&t| cfg.parent.cdf(t)).collect())
            }
        };
        let plan = match (&cfg.scenario, &cfg.ranking, &cfg.parent) {
            (TieScenario::FixedLambda(l), _, _) => {
                let counts = crate::sampler::scenario_counts(&l.weights, cfg.n)?;
                let spec = DesignSpec::from_counts(&counts, cfg.direction)?;
                let mb_table = (0..=cfg.n)
                    .map(|k| g_inverse(k as f64 / cfg.n as f64, &spec))
                    .collect::<Result<Vec<_>>>()?;
                Plan::Fixed {
                    lambda: l.weights.clone(),
                    spec,
                    counts,
                    mb_table,
                }
            }
            (
                TieScenario::Natural,
                RankingModel::OrdinalConcomitant {
                    variable,
                    direction,
                },
                Population::Finite(pop),
            ) => Plan::Natural {
                records: concomitant_records(pop, variable)?,
                rank: *direction,
            },
            _ => unreachable!("rejected by validate"),
        };
        Ok(Runner {
            cfg,
            plan,
            ts,
            truth,
        })
    }

    fn replicate(&self, rep: u64, tally: &mut Tally) -> Result<()> {
        let cfg = self.cfg;
        let (n, m) = (cfg.n, cfg.m);
        let mut rng = substream(cfg.seed, LANE_PNS, rep);
        let sample;
        let natural_spec;
        let (spec, counts, mb_table) = match &self.plan {
            Plan::Fixed {
                lambda,
                spec,
                counts,
                mb_table,
            } => {
                sample = match cfg.direction {
                    Direction::Min => draw_minpns_fixed(&cfg.parent, &cfg.ranking, lambda, n, m, &mut rng)?,
                    Direction::Max => draw_maxpns_fixed(&cfg.parent, &cfg.ranking, lambda, n, m, &mut rng)?,
                };
                (spec, counts.as_slice(), Some(mb_table))
            }
            Plan::Natural { records, rank } => {
                let (s, _) = draw_concomitant_with(records, *rank, cfg.direction, n, m, &mut rng)?;
                sample = s;
                natural_spec = DesignSpec::from_counts(sample.counts(), cfg.direction)?;
                (&natural_spec, sample.counts(), None)
            }
        };
        let mut srs_rng = if cfg.common_random_numbers {
            substream(cfg.seed, LANE_PNS, rep)
        } else {
            substream(cfg.seed, LANE_SRS, rep)
        };
        let srs = draw_srs(&cfg.parent, n, &mut srs_rng);

        let nf = n as f64;
        for (j, (&t, &truth)) in self.ts.iter().zip(&self.truth).enumerate() {
            let srs_hat = srs.iter().filter(|&&v| v <= t).count() as f64 / nf;
            tally.srs[j].push(srs_hat - truth);
            let successes = sample.successes(t);
            let total: usize = successes.iter().sum();
            for (k, method) in cfg.methods.iter().enumerate() {
                let est = match method {
                    Method::Edf => total as f64 / nf,
                    Method::Mb => match mb_table {
                        Some(table) => table[total],
                        None => g_inverse(total as f64 / nf, spec)?,
                    },
                    Method::Ml => ml_from_counts(spec, counts, &successes)?,
                };
                tally.est[k][j].push(est - truth);
            }
        }
        Ok(())
    }

    fn run(&self) -> Result<Tally> {
        let reps = self.cfg.replications;
        let blocks = reps.div_ceil(BLOCK);
        let (nm, np) = (self.cfg.methods.len(), self.ts.len());
        let partial: Vec<Tally> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut tally = Tally::new(nm, np);
                for rep in b * BLOCK..((b + 1) * BLOCK).min(reps) {
                    self.replicate(rep as u64, &mut tally)?;
                }
                Ok(tally)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = Tally::new(nm, np);
        for t in &partial {
            total.merge(t);
        }
        Ok(total)
    }
}

fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(PnsError::InvalidConfig("threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| PnsError::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs the SRS-vs-PNS experiment. `threads = None` uses the global pool.
pub fn run_re_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    let runner = Runner::new(config)?;
    let tally = with_threads(threads, || runner.run())??;
    let mut records = Vec::with_capacity(config.methods.len() * runner.ts.len());
    for (k, method) in config.methods.iter().enumerate() {
        for (j, &x) in config.points.values().iter().enumerate() {
            let srs = &tally.srs[j];
            let est = &tally.est[k][j];
            let srs_variance = srs.variance();
            let bias = est.mean;
            let variance = est.variance();
            let mse = variance + bias * bias;
            let re = srs_variance / mse;
            // Delta method for a ratio of independent estimates.
            let rel = srs.variance_var() / (srs_variance * srs_variance)
                + est.mean_square_var() / (mse * mse);
            records.push(ResultRecord {
                method: *method,
                n: config.n,
                m: config.m,
                scenario: config.scenario.label().to_string(),
                rho: config.rho_label(),
                p_or_t: x,
                bias,
                variance,
                mse,
                re,
                re_se: re.abs() * rel.sqrt(),
                srs_variance,
                true_f: runner.truth[j],
            });
        }
    }
    Ok(ExperimentResult {
        seed: config.seed,
        replications: config.replications,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreRecord {
    pub method: Method,
    pub m: usize,
    pub scenario: String,
    pub f: f64,
    pub are: f64,
}

/// Asymptotic relative efficiency over a grid of `F` values; no simulation.
pub fn run_are_curve(
    scenario: &LambdaScenario,
    direction: Direction,
    f_grid: &[f64],
    methods: &[Method],
) -> Result<Vec<AreRecord>> {
    let spec = DesignSpec::new(scenario.weights.clone(), direction)?;
    let mut out = Vec::with_capacity(f_grid.len() * methods.len());
    for &method in methods {
        for &f in f_grid {
            out.push(AreRecord {
                method,
                m: scenario.m(),
                scenario: scenario.name.clone(),
                f,
                are: are(f, &spec, method)?,
            });
        }
    }
    Ok(out)
}

/// Settings shared by every `(n, m)` cell of a dataset study.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStudy {
    pub variable: String,
    pub rank: RankDirection,
    pub n_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub t: f64,
    pub replications: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

/// SRS vs MinPNS with natural ties at threshold `t`, for every `(n, m)`.
pub fn run_dataset_study(
    population: &FinitePopulation,
    study: &DatasetStudy,
    threads: Option<usize>,
) -> Result<Vec<ResultRecord>> {
    let parent = Population::Finite(population.clone());
    let mut out = Vec::new();
    for &n in &study.n_list {
        for &m in &study.m_list {
            let config = ExperimentConfig {
                n,
                m,
                scenario: TieScenario::Natural,
                ranking: RankingModel::OrdinalConcomitant {
                    variable: study.variable.clone(),
                    direction: study.rank,
                },
                parent: parent.clone(),
                direction: Direction::Min,
                replications: study.replications,
                points: EvalPoints::Thresholds(vec![study.t]),
                seed: study.seed,
                methods: study.methods.clone(),
                common_random_numbers: false,
            };
            out.extend(run_re_experiment(&config, threads)?.records);
        }
    }
    Ok(out)
}
