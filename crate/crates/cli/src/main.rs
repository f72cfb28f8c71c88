//! `pns`: estimation, ARE curves, Monte Carlo experiments and dataset studies
//! for partial nomination sampling.

mod output;
mod sample_file;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pns_core::dataset::{
    self, load_population, prevalence_true, spearman_with_variable, summarize_table, synthetic,
    write_records, LoadOptions, AD, BMIC,
};
use pns_core::estimators::estimate;
use pns_core::montecarlo::{
    run_are_curve, run_dataset_study, run_re_experiment, DatasetStudy, EvalPoints,
    ExperimentConfig, DEFAULT_REPLICATIONS, DEFAULT_SEED,
};
use pns_core::sampler::{LambdaScenario, Population, RankDirection, RankingModel, TieScenario};
use pns_core::{Direction, Method, PnsSample};

use output::{Emitter, Format, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "pns", version, about = "Partial nomination sampling CDF estimation and simulation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// RNG seed for simulations and fixture generation.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "PNS_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_REPLICATIONS)]
    replications: usize,
    /// Output file; a `<out>.manifest.json` is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// EDF, moment-based and ML estimates from a sample file.
    Estimate(EstimateArgs),
    /// Asymptotic relative efficiency curve.
    Are(AreArgs),
    /// Monte Carlo relative efficiency against SRS.
    Simulate(SimulateArgs),
    /// Summary statistics, rank correlations and prevalence of a survey file.
    DatasetSummary(DatasetSummaryArgs),
    /// SRS vs MinPNS with natural ties on a survey file.
    DatasetStudy(DatasetStudyArgs),
    /// Writes the synthetic survey population.
    GenFixture,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DirArg {
    Min,
    Max,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Self {
        match d {
            DirArg::Min => Direction::Min,
            DirArg::Max => Direction::Max,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    /// Rows of `value, tie_1, ..., tie_m`; an optional header row is skipped.
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value_t = DirArg::Min)]
    direction: DirArg,
    #[arg(long, value_delimiter = ',', default_value = "edf,mb,ml")]
    methods: Vec<Method>,
}

#[derive(Debug, Args, Serialize)]
struct DesignArgs {
    #[arg(long)]
    m: usize,
    /// Built-in scenario A, B, C (m = 3 or 5) or NS.
    #[arg(long, conflicts_with = "weights")]
    scenario: Option<String>,
    /// Explicit stratum weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = DirArg::Min)]
    direction: DirArg,
}

impl DesignArgs {
    fn lambda(&self) -> Result<LambdaScenario> {
        let l = match (&self.scenario, &self.weights) {
            (Some(name), None) => LambdaScenario::named(name, self.m)?,
            (None, Some(w)) => LambdaScenario::new("custom", w.clone())?,
            (None, None) => bail!("give --scenario or --weights"),
            (Some(_), Some(_)) => unreachable!("rejected by clap"),
        };
        if l.m() != self.m {
            bail!("{} weights given for m = {}", l.m(), self.m);
        }
        Ok(l)
    }
}

#[derive(Debug, Args, Serialize)]
struct AreArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// `start:stop:step` or a comma list of F values in (0, 1).
    #[arg(long, default_value = "0.01:0.99:0.01")]
    grid: String,
    #[arg(long, value_delimiter = ',', default_value = "mb,ml")]
    methods: Vec<Method>,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long)]
    n: usize,
    /// Dell-Clutter ranking correlation; 1 is perfect ranking.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// uniform, exponential, or normal[:mean,sd].
    #[arg(long, default_value = "uniform")]
    parent: String,
    /// Quantile levels, `start:stop:step` or a comma list.
    #[arg(long, default_value = "0.05:0.95:0.05", conflicts_with = "thresholds")]
    grid: String,
    /// Evaluate at these thresholds instead of quantiles.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "mb,ml")]
    methods: Vec<Method>,
    /// Share one RNG substream between the SRS and PNS draws of a replication.
    #[arg(long)]
    crn: bool,
}

#[derive(Debug, Args, Serialize)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, default_value = "bmd")]
    bmd_column: String,
    #[arg(long, default_value = "bmi")]
    bmi_column: String,
    #[arg(long, default_value = "age")]
    age_column: String,
    /// Extra missing-value marker besides the empty cell.
    #[arg(long)]
    missing: Option<String>,
}

impl DataArgs {
    fn options(&self) -> Result<LoadOptions> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        Ok(LoadOptions {
            delimiter: self.delimiter as u8,
            bmd_column: self.bmd_column.clone(),
            bmi_column: self.bmi_column.clone(),
            age_column: self.age_column.clone(),
            missing_sentinel: self.missing.clone(),
        })
    }

    fn load(&self) -> Result<dataset::SurveyTable> {
        load_population(&self.data, &self.options()?)
            .with_context(|| format!("reading {}", self.data.display()))
    }
}

#[derive(Debug, Args, Serialize)]
struct DatasetSummaryArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0.56)]
    threshold: f64,
}

#[derive(Debug, Args, Serialize)]
struct DatasetStudyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Ranking variable: bmic or ad.
    #[arg(long, default_value = BMIC)]
    variable: String,
    /// Level order; defaults to ascending for bmic and descending for ad.
    #[arg(long)]
    rank: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,100")]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    m_list: Vec<usize>,
    #[arg(long, default_value_t = 0.56)]
    t: f64,
    #[arg(long, value_delimiter = ',', default_value = "mb,ml")]
    methods: Vec<Method>,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts[..] {
        [a, b, s] => {
            let (a, b, s): (f64, f64, f64) = (a.trim().parse()?, b.trim().parse()?, s.trim().parse()?);
            if !(s > 0.0) || b < a {
                bail!("grid {spec:?}: need start <= stop and step > 0");
            }
            let k = ((b - a) / s + 1e-9).floor() as usize;
            // Rounded to 12 places so 0.1 + 2*0.05 prints as 0.2.
            Ok((0..=k).map(|i| ((a + i as f64 * s) * 1e12).round() / 1e12).collect())
        }
        [_] => spec
            .split(',')
            .map(|v| v.trim().parse::<f64>().with_context(|| format!("grid value {v:?}")))
            .collect(),
        _ => bail!("grid {spec:?}: expected start:stop:step or a comma list"),
    }
}

fn parse_parent(spec: &str) -> Result<Population> {
    let lower = spec.to_ascii_lowercase();
    let (kind, args) = lower.split_once(':').unwrap_or((&lower, ""));
    Ok(match kind {
        "uniform" => Population::Uniform,
        "exponential" | "exp" => Population::Exponential,
        "normal" if args.is_empty() => Population::normal(0.0, 1.0)?,
        "normal" => {
            let v = parse_grid(args)?;
            let [mean, sd] = v[..] else {
                bail!("normal parent takes normal:mean,sd");
            };
            Population::normal(mean, sd)?
        }
        other => bail!("unknown parent {other:?} (uniform, exponential, normal[:mean,sd])"),
    })
}

fn cmd_estimate(args: &EstimateArgs, out: &mut Emitter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        method: Method,
        t: f64,
        estimate: f64,
        std_error: f64,
        n: usize,
        m: usize,
    }
    let (values, ties) = sample_file::read(&args.sample, args.direction.into())?;
    let sample = PnsSample::from_ties(values, &ties)?;
    let rows = args
        .methods
        .iter()
        .map(|&method| {
            let rep = estimate(&sample, args.t, method)?;
            Ok(Row {
                method,
                t: args.t,
                estimate: rep.estimate,
                std_error: rep.standard_error(),
                n: rep.n,
                m: sample.m(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.records(&rows)
}

fn cmd_are(args: &AreArgs, out: &mut Emitter) -> Result<()> {
    let lambda = args.design.lambda()?;
    let grid = parse_grid(&args.grid)?;
    out.records(&run_are_curve(&lambda, args.design.direction.into(), &grid, &args.methods)?)
}

fn cmd_simulate(args: &SimulateArgs, common: &Common, out: &mut Emitter) -> Result<()> {
    let lambda = args.design.lambda()?;
    let ranking = if args.rho == 1.0 {
        RankingModel::Perfect
    } else {
        RankingModel::linear_error(args.rho)?
    };
    let points = match &args.thresholds {
        Some(ts) => EvalPoints::Thresholds(ts.clone()),
        None => EvalPoints::Quantiles(parse_grid(&args.grid)?),
    };
    let config = ExperimentConfig {
        n: args.n,
        m: args.design.m,
        scenario: TieScenario::FixedLambda(lambda),
        ranking,
        parent: parse_parent(&args.parent)?,
        direction: args.design.direction.into(),
        replications: common.replications,
        points,
        seed: common.seed,
        methods: args.methods.clone(),
        common_random_numbers: args.crn,
    };
    let result = run_re_experiment(&config, common.threads)?;
    out.records(&result.records)
}

fn cmd_dataset_summary(args: &DatasetSummaryArgs, out: &mut Emitter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        missing: usize,
        min: f64,
        q1: f64,
        median: f64,
        q3: f64,
        max: f64,
        mean: f64,
        variance: f64,
        spearman_bmic: f64,
        spearman_ad: f64,
        threshold: f64,
        prevalence: f64,
    }
    let table = args.data.load()?;
    let pop = table.population()?;
    let s = summarize_table(&table)?;
    let row = Row {
        n: s.n,
        missing: s.missing,
        min: s.min,
        q1: s.q1,
        median: s.median,
        q3: s.q3,
        max: s.max,
        mean: s.mean,
        variance: s.variance,
        spearman_bmic: spearman_with_variable(&pop, BMIC)?,
        spearman_ad: spearman_with_variable(&pop, AD)?,
        threshold: args.threshold,
        prevalence: prevalence_true(&pop, args.threshold),
    };
    out.records(&[row])
}

fn cmd_dataset_study(args: &DatasetStudyArgs, common: &Common, out: &mut Emitter) -> Result<()> {
    let variable = args.variable.to_ascii_lowercase();
    let rank = match &args.rank {
        Some(r) => r.parse::<RankDirection>()?,
        None if variable == AD => RankDirection::Descending,
        None => RankDirection::Ascending,
    };
    let pop = args.data.load()?.population()?;
    let study = DatasetStudy {
        variable,
        rank,
        n_list: args.n_list.clone(),
        m_list: args.m_list.clone(),
        t: args.t,
        replications: common.replications,
        seed: common.seed,
        methods: args.methods.clone(),
    };
    out.records(&run_dataset_study(&pop, &study, common.threads)?)
}

fn cmd_gen_fixture(common: &Common, out: &mut Emitter) -> Result<()> {
    let records = synthetic::generate_synthetic(common.seed)?;
    let mut buf = Vec::new();
    write_records(&mut buf, &records)?;
    out.raw(&buf)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let started = Instant::now();
    let cli = Cli::parse();
    let common = &cli.common;
    let (name, params) = match &cli.command {
        Command::Estimate(a) => ("estimate", serde_json::to_value(a)?),
        Command::Are(a) => ("are", serde_json::to_value(a)?),
        Command::Simulate(a) => ("simulate", serde_json::to_value(a)?),
        Command::DatasetSummary(a) => ("dataset-summary", serde_json::to_value(a)?),
        Command::DatasetStudy(a) => ("dataset-study", serde_json::to_value(a)?),
        Command::GenFixture => ("gen-fixture", serde_json::Value::Null),
    };
    let manifest = RunManifest::new(name, std::env::args().collect(), params, serde_json::to_value(common)?);
    let mut out = Emitter::new(common.format, common.out.clone(), manifest);
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, &mut out)?,
        Command::Are(a) => cmd_are(a, &mut out)?,
        Command::Simulate(a) => cmd_simulate(a, common, &mut out)?,
        Command::DatasetSummary(a) => cmd_dataset_summary(a, &mut out)?,
        Command::DatasetStudy(a) => cmd_dataset_study(a, common, &mut out)?,
        Command::GenFixture => cmd_gen_fixture(common, &mut out)?,
    }
    out.finish(started.elapsed())
}
