//! Partial nomination sampling (PNS).
//!
//! A MinPNS (MaxPNS) design draws `n` sets of `m` units, judgment-ranks each
//! set, and measures one unit chosen at random among the units declared tied
//! for the lowest (highest) rank. The number of tied units `r` places the
//! measurement in stratum `r`, whose distribution is a uniform mixture of the
//! first (last) `r` order statistics of the parent.
//!
//! * [`order_stat`]: exact beta-mixture functions, the mixing map `g` and its inverse.
//! * [`estimators`]: tie matrices, samples, EDF / moment-based / ML CDF estimators and
//!   their asymptotic variances.
//! * [`sampler`]: PNS sample generation under perfect, linear-error and ordinal ranking.
//! * [`montecarlo`]: relative-efficiency experiments and ARE curves.
//! * [`dataset`]: survey population ingestion, summaries and a synthetic fixture.
//!
//! The order-statistic math and the estimators are generic over the float type
//! ([`Scalar`]); the simulation layers work in `f64`.

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod order_stat;
pub mod rng;
pub mod sampler;
mod scalar;

pub use error::{PnsError, Result};
pub use estimators::{EstimateReport, Method, PnsSample, TieMatrix};
pub use order_stat::{DesignSpec, Direction};
pub use scalar::Scalar;

/// Design specification in double precision.
pub type DesignSpecF64 = DesignSpec<f64>;
/// Design specification in single precision.
pub type DesignSpecF32 = DesignSpec<f32>;
/// PNS sample in double precision.
pub type PnsSampleF64 = PnsSample<f64>;
/// PNS sample in single precision.
pub type PnsSampleF32 = PnsSample<f32>;
/// Estimate report in double precision.
pub type EstimateReportF64 = EstimateReport<f64>;
