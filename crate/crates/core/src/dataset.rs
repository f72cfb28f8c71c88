//! Survey population ingestion and preparation.
//!
//! Input is delimited text with a header row. The measurement column (bone
//! mineral density by default) may have missing cells; such rows are counted
//! but not measured. Two ordinal concomitants are derived for ranking: the WHO
//! body-mass-index category and the age decade.

use std::path::Path;

use serde::Serialize;

use crate::error::{PnsError, Result};
use crate::sampler::FinitePopulation;

pub mod synthetic;

/// Name of the BMI-category ranking variable.
pub const BMIC: &str = "bmic";
/// Name of the age-decade ranking variable.
pub const AD: &str = "ad";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurveyRecord {
    pub bmd: Option<f64>,
    pub bmi: Option<f64>,
    pub age: Option<u32>,
}

/// Ordered categories with a per-record level index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdinalVariable {
    pub name: String,
    pub levels: Vec<String>,
    pub assignments: Vec<Option<usize>>,
}

impl OrdinalVariable {
    pub fn new(
        name: impl Into<String>,
        levels: Vec<String>,
        assignments: Vec<Option<usize>>,
    ) -> Result<Self> {
        let name = name.into();
        if let Some(bad) = assignments.iter().flatten().find(|&&l| l >= levels.len()) {
            return Err(PnsError::InvalidConfig(format!(
                "variable {name}: level index {bad} outside 0..{}",
                levels.len()
            )));
        }
        Ok(OrdinalVariable {
            name,
            levels,
            assignments,
        })
    }

    /// Number of records per level.
    pub fn frequencies(&self) -> Vec<usize> {
        let mut f = vec![0; self.levels.len()];
        for l in self.assignments.iter().flatten() {
            f[*l] += 1;
        }
        f
    }

    pub fn level_name(&self, record: usize) -> Option<&str> {
        self.assignments
            .get(record)
            .copied()
            .flatten()
            .map(|l| self.levels[l].as_str())
    }
}

/// Column mapping and parsing options for [`load_population`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub bmd_column: String,
    pub bmi_column: String,
    pub age_column: String,
    /// Cell content treated as missing in addition to the empty cell.
    pub missing_sentinel: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            bmd_column: "bmd".into(),
            bmi_column: "bmi".into(),
            age_column: "age".into(),
            missing_sentinel: None,
        }
    }
}

/// Parsed survey file.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyTable {
    pub records: Vec<SurveyRecord>,
}

impl SurveyTable {
    pub fn rows(&self) -> usize {
        self.records.len()
    }

    pub fn missing_bmd(&self) -> usize {
        self.records.iter().filter(|r| r.bmd.is_none()).count()
    }

    /// Non-missing measurements, in file order.
    pub fn bmd_values(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.bmd).collect()
    }

    /// Finite population over the rows with a measurement, carrying the
    /// [`BMIC`] and [`AD`] variables. Rows missing BMI or age keep their
    /// measurement but get no level for that variable.
    pub fn population(&self) -> Result<FinitePopulation> {
        let measured: Vec<&SurveyRecord> = self.records.iter().filter(|r| r.bmd.is_some()).collect();
        if measured.is_empty() {
            return Err(PnsError::data(None, "no row has a measurement"));
        }
        let values = measured.iter().map(|r| r.bmd.unwrap()).collect();
        let bmi: Vec<Option<f64>> = measured.iter().map(|r| r.bmi).collect();
        let age: Vec<Option<u32>> = measured.iter().map(|r| r.age).collect();
        FinitePopulation::new(values, vec![derive_bmic(&bmi)?, derive_ad(&age)?])
    }
}

fn parse_cell<T: std::str::FromStr>(
    raw: &str,
    sentinel: Option<&str>,
    row: usize,
    column: &str,
) -> Result<Option<T>> {
    let cell = raw.trim();
    if cell.is_empty() || sentinel.is_some_and(|s| s == cell) {
        return Ok(None);
    }
    cell.parse::<T>()
        .map(Some)
        .map_err(|_| PnsError::data(Some(row), format!("column {column}: cannot parse {cell:?}")))
}

/// Reads a delimited survey file. Row numbers in errors count the header as row 1.
pub fn load_population(path: impl AsRef<Path>, options: &LoadOptions) -> Result<SurveyTable> {
    let file = std::fs::File::open(path.as_ref())?;
    read_population(file, options)
}

pub fn read_population<R: std::io::Read>(reader: R, options: &LoadOptions) -> Result<SurveyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(PnsError::data(None, "file is empty"));
    }
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| PnsError::data(Some(1), format!("missing column {name:?}")))
    };
    let (ib, im, ia) = (
        find(&options.bmd_column)?,
        find(&options.bmi_column)?,
        find(&options.age_column)?,
    );
    let sentinel = options.missing_sentinel.as_deref();
    let mut records = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| PnsError::data(Some(row), e.to_string()))?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        let bmd: Option<f64> = parse_cell(get(ib), sentinel, row, &options.bmd_column)?;
        let bmi: Option<f64> = parse_cell(get(im), sentinel, row, &options.bmi_column)?;
        let age: Option<f64> = parse_cell(get(ia), sentinel, row, &options.age_column)?;
        if let Some(v) = bmd {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PnsError::data(Some(row), format!("measurement {v} must be > 0")));
            }
        }
        if let Some(v) = bmi {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PnsError::data(Some(row), format!("BMI {v} must be > 0")));
            }
        }
        let age = match age {
            None => None,
            Some(a) if a >= 0.0 && a.fract() == 0.0 && a <= u32::MAX as f64 => Some(a as u32),
            Some(a) => {
                return Err(PnsError::data(
                    Some(row),
                    format!("age {a} must be a non-negative integer"),
                ))
            }
        };
        records.push(SurveyRecord { bmd, bmi, age });
    }
    if records.is_empty() {
        return Err(PnsError::data(None, "file has a header but no rows"));
    }
    Ok(SurveyTable { records })
}

/// Writes records in the default column layout; missing cells are left empty.
pub fn write_records<W: std::io::Write>(writer: W, records: &[SurveyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bmd", "bmi", "age"])?;
    for r in records {
        w.write_record([
            r.bmd.map(|v| format!("{v:.3}")).unwrap_or_default(),
            r.bmi.map(|v| format!("{v:.1}")).unwrap_or_default(),
            r.age.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    /// Rows including missing ones.
    pub n: usize,
    pub missing: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample variance (divisor `len - 1`).
    pub variance: f64,
}

/// Quantile by linear interpolation between order statistics
/// (`h = (len - 1) p`). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary, mean and variance of the present values.
pub fn summary_stats(values: &[Option<f64>]) -> Result<Summary> {
    let mut present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(PnsError::data(None, "no non-missing values to summarize"));
    }
    present.sort_by(f64::total_cmp);
    let len = present.len() as f64;
    let mean = present.iter().sum::<f64>() / len;
    let variance = if present.len() > 1 {
        present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0)
    } else {
        0.0
    };
    Ok(Summary {
        n: values.len(),
        missing: values.len() - present.len(),
        min: present[0],
        q1: quantile_sorted(&present, 0.25),
        median: quantile_sorted(&present, 0.5),
        q3: quantile_sorted(&present, 0.75),
        max: present[present.len() - 1],
        mean,
        variance,
    })
}

/// Summary of the measurement column of a table.
pub fn summarize_table(table: &SurveyTable) -> Result<Summary> {
    let bmd: Vec<Option<f64>> = table.records.iter().map(|r| r.bmd).collect();
    summary_stats(&bmd)
}

pub const BMIC_LEVELS: [&str; 4] = ["underweight", "normal", "overweight", "obese"];
pub const AD_LEVELS: [&str; 5] = ["50-59", "60-69", "70-79", "80-89", "90+"];

/// WHO categories: `< 18.5`, `[18.5, 25)`, `[25, 30)`, `>= 30`.
pub fn bmi_category(bmi: f64) -> usize {
    if bmi < 18.5 {
        0
    } else if bmi < 25.0 {
        1
    } else if bmi < 30.0 {
        2
    } else {
        3
    }
}

pub fn derive_bmic(bmi: &[Option<f64>]) -> Result<OrdinalVariable> {
    let levels = BMIC_LEVELS.iter().map(|s| s.to_string()).collect();
    OrdinalVariable::new(
        BMIC,
        levels,
        bmi.iter().map(|b| b.map(bmi_category)).collect(),
    )
}

/// Decade bins from 50; everything from 90 up shares the last bin.
pub fn age_decade(age: u32) -> Result<usize> {
    if age < 50 {
        return Err(PnsError::domain("age", age as f64, "50 and over"));
    }
    Ok((((age - 50) / 10) as usize).min(AD_LEVELS.len() - 1))
}

pub fn derive_ad(age: &[Option<u32>]) -> Result<OrdinalVariable> {
    let levels = AD_LEVELS.iter().map(|s| s.to_string()).collect();
    let assignments = age
        .iter()
        .map(|a| a.map(age_decade).transpose())
        .collect::<Result<Vec<_>>>()?;
    OrdinalVariable::new(AD, levels, assignments)
}

/// Midranks (1-based), ties share the average of their positions.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with midranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(PnsError::InvalidConfig(format!(
            "spearman: {} vs {} observations",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(PnsError::InvalidConfig("spearman needs at least two pairs".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(PnsError::InvalidConfig("spearman: non-finite input".into()));
    }
    let r = pearson(&midranks(x), &midranks(y));
    if r.is_nan() {
        return Err(PnsError::InvalidConfig(
            "spearman undefined: one argument is constant".into(),
        ));
    }
    Ok(r)
}

/// Spearman correlation between the population values and an ordinal
/// variable, over records that carry a level.
pub fn spearman_with_variable(population: &FinitePopulation, variable: &str) -> Result<f64> {
    let records = population.ranked_records(variable)?;
    let (v, l): (Vec<f64>, Vec<f64>) = records.iter().map(|&(v, l)| (v, l as f64)).unzip();
    spearman(&v, &l)
}

/// Fraction of measurements `<= threshold`.
pub fn prevalence_true(population: &FinitePopulation, threshold: f64) -> f64 {
    population.cdf(threshold)
}
