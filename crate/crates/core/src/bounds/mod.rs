//! Analytical upper bounds on the crest-factor CCDF and on distortion tails.
//!
//! Every evaluator works with logarithms internally: the coded bounds need
//! `cosh` of arguments as large as `ρ N^{5/4}`, which overflows `f64` long
//! before the bound itself stops being meaningful.

mod balance;
mod ccdf;
mod optimize;

use std::f64::consts::PI;
use std::ops::RangeInclusive;

pub use balance::{
    aom_scaling_bound, aom_scaling_schedule, balance_bound_bpsk, balance_bound_general, crossing_count_bound,
    crossing_count_bound_optimized, default_mu_grid, AnalyticTail, BalanceOptimum, BalanceQuery, CcdfBoundKind,
    DistortionMetric, TailBound,
};
pub use ccdf::{
    ln_thm1_at, ln_thm2_at, ln_union_chernoff_bpsk, thm1_bound, thm2_bound, thm3_bound, thm3_bound_best_k,
    union_chernoff_bpsk, union_chernoff_optimized, Thm3Form,
};
pub use optimize::{golden_section, minimize_rho, RhoSearch};

use crate::codes::DistanceDistribution;
use crate::error::{invalid, Error, Result};

/// Default projection counts searched.
pub const DEFAULT_K_RANGE: RangeInclusive<u32> = 3..=64;

/// Amplitude penalty of `K` projections, `C_K = 1 / cos(π/K)`.
pub fn ck(k: u32) -> Result<f64> {
    if k < 3 {
        return Err(Error::InvalidProjectionCount(k));
    }
    Ok(1.0 / (PI / k as f64).cos())
}

fn check_k_range(r: &RangeInclusive<u32>) -> Result<()> {
    if r.is_empty() {
        return Err(invalid("k_range", "must not be empty"));
    }
    if *r.start() < 3 {
        return Err(Error::InvalidProjectionCount(*r.start()));
    }
    Ok(())
}

/// Inputs shared by the CCDF bound evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub x: f64,
    pub n: usize,
    pub oversampling: usize,
    pub k_range: RangeInclusive<u32>,
    pub rho: RhoSearch,
    pub c_w: f64,
    pub distribution: Option<DistanceDistribution>,
}

impl BoundQuery {
    pub fn new(x: f64, n: usize, oversampling: usize) -> Self {
        Self {
            x,
            n,
            oversampling,
            k_range: DEFAULT_K_RANGE,
            rho: RhoSearch::default(),
            c_w: 0.0,
            distribution: None,
        }
    }

    pub fn with_distribution(mut self, d: DistanceDistribution) -> Self {
        self.distribution = Some(d);
        self
    }

    pub fn with_k_range(mut self, r: RangeInclusive<u32>) -> Self {
        self.k_range = r;
        self
    }

    pub fn with_c_w(mut self, c_w: f64) -> Self {
        self.c_w = c_w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x >= 0.0 && self.x.is_finite()) {
            return Err(invalid("x", format!("must be finite and >= 0, got {}", self.x)));
        }
        if self.n == 0 {
            return Err(Error::EmptyCodeword);
        }
        if self.oversampling == 0 {
            return Err(Error::InvalidOversampling(0));
        }
        if !(self.c_w >= 0.0 && self.c_w.is_finite()) {
            return Err(invalid("c_w", "must be finite and >= 0"));
        }
        check_k_range(&self.k_range)?;
        self.rho.validate()?;
        if let Some(d) = &self.distribution {
            if d.n() != self.n {
                return Err(Error::LengthMismatch {
                    expected: self.n,
                    found: d.n(),
                });
            }
        }
        Ok(())
    }
}

/// An optimized bound value and where the optimum was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub ln_value: f64,
    pub rho: Option<f64>,
    pub k: Option<u32>,
}

impl Optimum {
    /// Raw bound; may exceed one.
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    /// Bound clamped to a probability.
    pub fn display(&self) -> f64 {
        self.value().min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ck_values() {
        assert!((ck(3).unwrap() - 2.0).abs() < 1e-12);
        assert!((ck(4).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((ck(1_000_000).unwrap() - 1.0).abs() < 1e-11);
        assert_eq!(ck(2), Err(Error::InvalidProjectionCount(2)));
        let v: Vec<f64> = (3..50).map(|k| ck(k).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn query_validation() {
        assert!(BoundQuery::new(1.0, 8, 1).validate().is_ok());
        assert!(BoundQuery::new(-1.0, 8, 1).validate().is_err());
        assert!(BoundQuery::new(1.0, 8, 1).with_k_range(2..=5).validate().is_err());
        assert!(BoundQuery::new(1.0, 8, 1).with_c_w(-1.0).validate().is_err());
    }
}
