//! Synthetic stand-in for the women-50+ bone density survey extract.
//!
//! The measurement marginal is a fixed piecewise-linear quantile curve whose
//! summary matches the published one (N = 3978 rows, 667 missing, quartiles
//! 0.685 / 0.793 / 0.908, prevalence below 0.56 of about 0.061). BMI and age are
//! tied to the measurement through a Gaussian copula whose two latent
//! correlations are tuned so the Spearman correlations with the derived
//! categories come out at 0.475 (BMI category) and -0.466 (age decade).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{derive_ad, derive_bmic, spearman, SurveyRecord};
use crate::error::Result;
use crate::rng::{substream, LANE_FIXTURE};

pub const DEFAULT_SEED: u64 = 20_160_301;
pub const ROWS: usize = 3978;
pub const MISSING: usize = 667;
pub const TARGET_SPEARMAN_BMIC: f64 = 0.475;
pub const TARGET_SPEARMAN_AD: f64 = -0.466;

/// `(u, value)` knots of the measurement quantile function.
const KNOTS: [(f64, f64); 14] = [
    (0.0, 0.274),
    (0.002, 0.3379),
    (0.015, 0.4579),
    (0.061, 0.56),
    (0.12, 0.6246),
    (0.25, 0.685),
    (0.37, 0.7525),
    (0.5, 0.793),
    (0.63, 0.8486),
    (0.75, 0.908),
    (0.88, 0.9708),
    (0.985, 1.1345),
    (0.998, 1.2602),
    (1.0, 1.446),
];

/// Share of each age decade (50-59 .. 90+).
const AGE_SHARES: [f64; 5] = [0.30, 0.28, 0.24, 0.14, 0.04];
const BMI_LOG_MEDIAN: f64 = 3.314; // ln 27.5
const BMI_LOG_SD: f64 = 0.2;

fn quantile(u: f64) -> f64 {
    let k = KNOTS.partition_point(|&(x, _)| x <= u).clamp(1, KNOTS.len() - 1);
    let (u0, v0) = KNOTS[k - 1];
    let (u1, v1) = KNOTS[k];
    v0 + (u - u0) / (u1 - u0) * (v1 - v0)
}

/// The sorted measurement values, rounded to 3 decimals as in the survey.
pub fn measurement_values() -> Vec<f64> {
    let count = ROWS - MISSING;
    (0..count)
        .map(|k| (quantile(k as f64 / (count - 1) as f64) * 1000.0).round() / 1000.0)
        .collect()
}

struct Latents {
    /// Measurement latent for measured rows, then BMI and age noises for all rows.
    z: Vec<f64>,
    e_bmi: Vec<f64>,
    e_age: Vec<f64>,
    age_offset: Vec<u32>,
}

fn latent_draws(seed: u64) -> Latents {
    let mut rng = substream(seed, LANE_FIXTURE, 0);
    let mut normals = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let z = normals(ROWS);
    let e_bmi = normals(ROWS);
    let e_age = normals(ROWS);
    let mut rng = substream(seed, LANE_FIXTURE, 1);
    let age_offset = (0..ROWS).map(|_| rng.random_range(0..10)).collect();
    Latents {
        z,
        e_bmi,
        e_age,
        age_offset,
    }
}

fn bmi_from(a: f64, z: f64, e: f64) -> f64 {
    let w = a * z + (1.0 - a * a).sqrt() * e;
    ((BMI_LOG_MEDIAN + BMI_LOG_SD * w).exp() * 10.0).round() / 10.0
}

fn age_from(b: f64, z: f64, e: f64, offset: u32, normal: &Normal) -> u32 {
    let u = normal.cdf(-b * z + (1.0 - b * b).sqrt() * e);
    let mut acc = 0.0;
    let mut decade = AGE_SHARES.len() - 1;
    for (i, s) in AGE_SHARES.iter().enumerate() {
        acc += s;
        if u < acc {
            decade = i;
            break;
        }
    }
    50 + 10 * decade as u32 + offset
}

/// Bisection on a latent correlation in `[0, 0.99]` for a rank-correlation target.
fn calibrate(target: f64, eval: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 0.99);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generates the synthetic survey in shuffled row order.
pub fn generate_synthetic(seed: u64) -> Result<Vec<SurveyRecord>> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let lat = latent_draws(seed);
    let measured = ROWS - MISSING;

    // Measured rows get values in the order of their latent.
    let mut order: Vec<usize> = (0..measured).collect();
    order.sort_by(|&i, &j| lat.z[i].total_cmp(&lat.z[j]));
    let sorted = measurement_values();
    let mut bmd = vec![0.0; measured];
    for (rank, &i) in order.iter().enumerate() {
        bmd[i] = sorted[rank];
    }

    let bmic_rho = |a: f64| -> Result<f64> {
        let bmi: Vec<Option<f64>> = (0..measured)
            .map(|i| Some(bmi_from(a, lat.z[i], lat.e_bmi[i])))
            .collect();
        let var = derive_bmic(&bmi)?;
        let lv: Vec<f64> = var.assignments.iter().map(|l| l.unwrap() as f64).collect();
        spearman(&bmd, &lv)
    };
    let ad_rho = |b: f64| -> Result<f64> {
        let age: Vec<Option<u32>> = (0..measured)
            .map(|i| Some(age_from(b, lat.z[i], lat.e_age[i], lat.age_offset[i], &normal)))
            .collect();
        let var = derive_ad(&age)?;
        let lv: Vec<f64> = var.assignments.iter().map(|l| l.unwrap() as f64).collect();
        // Negated so it increases with `b`.
        spearman(&bmd, &lv).map(|r| -r)
    };
    let a = calibrate(TARGET_SPEARMAN_BMIC, bmic_rho)?;
    let b = calibrate(-TARGET_SPEARMAN_AD, ad_rho)?;

    let mut records: Vec<SurveyRecord> = (0..ROWS)
        .map(|i| SurveyRecord {
            bmd: (i < measured).then(|| bmd[i]),
            bmi: Some(bmi_from(a, lat.z[i], lat.e_bmi[i])),
            age: Some(age_from(b, lat.z[i], lat.e_age[i], lat.age_offset[i], &normal)),
        })
        .collect();
    records.shuffle(&mut substream(seed, LANE_FIXTURE, 2));
    Ok(records)
}
