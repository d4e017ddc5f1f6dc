//! Balancing bounds: the tail of a summed per-sample distortion metric is
//! split at a crest-factor level `μ > λ` into a CCDF part and a
//! level-crossing part.

use std::ops::RangeInclusive;

use super::{check_k_range, ck, minimize_rho, thm3_bound_best_k, union_chernoff_optimized, BoundQuery, Optimum};
use super::{RhoSearch, Thm3Form, DEFAULT_K_RANGE};
use crate::error::{invalid, Error, Result};
use crate::metrics::CfDistribution;
use crate::numeric::{log_space, log_sum_exp};

/// A (bound on the) probability that the crest factor exceeds `x`.
pub trait TailBound {
    fn tail(&self, x: f64) -> f64;
}

impl TailBound for CfDistribution {
    fn tail(&self, x: f64) -> f64 {
        CfDistribution::tail(self, x)
    }
}

impl<F: Fn(f64) -> f64> TailBound for F {
    fn tail(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Which analytical CCDF bound to plug into the balancing bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcdfBoundKind {
    Thm3Linear,
    Thm3Nonlinear,
    UnionChernoff,
}

/// An analytical CCDF bound at `L = 1`, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticTail {
    pub kind: CcdfBoundKind,
    pub n: usize,
    pub c_w: f64,
    pub k_range: RangeInclusive<u32>,
    pub rho: RhoSearch,
}

impl AnalyticTail {
    pub fn new(kind: CcdfBoundKind, n: usize, c_w: f64) -> Self {
        Self {
            kind,
            n,
            c_w,
            k_range: DEFAULT_K_RANGE,
            rho: RhoSearch::default(),
        }
    }

    pub fn try_tail(&self, x: f64) -> Result<f64> {
        let opt = match self.kind {
            CcdfBoundKind::Thm3Linear => thm3_bound_best_k(x, self.n, 1, &self.k_range, self.c_w, Thm3Form::Linear)?,
            CcdfBoundKind::Thm3Nonlinear => {
                thm3_bound_best_k(x, self.n, 1, &self.k_range, self.c_w, Thm3Form::Nonlinear)?
            }
            CcdfBoundKind::UnionChernoff => {
                let mut q = BoundQuery::new(x, self.n, 1).with_k_range(self.k_range.clone());
                q.rho = self.rho;
                union_chernoff_optimized(&q)?
            }
        };
        Ok(opt.display())
    }
}

impl TailBound for AnalyticTail {
    fn tail(&self, x: f64) -> f64 {
        self.try_tail(x).unwrap_or(1.0)
    }
}

/// Per-sample performance metric `h`, increasing in the distortion magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistortionMetric {
    /// `h(d) = d² / N`; summed over the `N` samples this is the AOM.
    ScaledSquare { n: usize },
    /// `h(d) = d`.
    Magnitude,
}

impl DistortionMetric {
    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            Self::ScaledSquare { n } => d * d / n as f64,
            Self::Magnitude => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceQuery {
    pub lambda: f64,
    pub x: f64,
    pub mu_grid: Vec<f64>,
    pub h: DistortionMetric,
}

impl BalanceQuery {
    pub fn new(lambda: f64, x: f64, mu_grid: Vec<f64>, h: DistortionMetric) -> Result<Self> {
        let q = Self { lambda, x, mu_grid, h };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid(
                "lambda",
                format!("must be finite and > 0, got {}", self.lambda),
            ));
        }
        if !(self.x > 0.0) {
            return Err(invalid("x", format!("must be > 0, got {}", self.x)));
        }
        if self.mu_grid.is_empty() {
            return Err(Error::EmptyMuGrid);
        }
        if let Some(mu) = self.mu_grid.iter().find(|&&m| !(m > self.lambda && m.is_finite())) {
            return Err(invalid("mu_grid", format!("every mu must exceed lambda; found {mu}")));
        }
        Ok(())
    }
}

/// `64` log-spaced levels in `(λ, √N]`; empty when `λ ≥ √N`.
pub fn default_mu_grid(lambda: f64, n: usize) -> Vec<f64> {
    let top = (n as f64).sqrt();
    if !(lambda > 0.0 && lambda < top) {
        return Vec::new();
    }
    let mut g = log_space(lambda, top, 65);
    g.remove(0);
    g
}

/// Minimized balancing bound and the minimizing `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceOptimum {
    pub value: f64,
    pub mu: f64,
}

fn balance(q: &BalanceQuery, term: impl Fn(f64) -> f64) -> Result<BalanceOptimum> {
    q.validate()?;
    Ok(q.mu_grid
        .iter()
        .map(|&mu| BalanceOptimum { value: term(mu), mu })
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("grid validated non-empty"))
}

/// `min_μ [B(μ) + (B(λ) + B(λ)²) h(μ-λ)² / x²]` for uncoded BPSK.
pub fn balance_bound_bpsk(q: &BalanceQuery, b: &dyn TailBound) -> Result<BalanceOptimum> {
    q.validate()?;
    let bl = b.tail(q.lambda);
    balance(q, |mu| {
        let h = q.h.eval(mu - q.lambda);
        b.tail(mu) + (bl + bl * bl) * h * h / (q.x * q.x)
    })
}

/// `min_μ [B(μ) + B(λ) h(μ-λ) / x]` for any binary code.
pub fn balance_bound_general(q: &BalanceQuery, b: &dyn TailBound) -> Result<BalanceOptimum> {
    q.validate()?;
    let bl = b.tail(q.lambda);
    balance(q, |mu| b.tail(mu) + bl * q.h.eval(mu - q.lambda) / q.x)
}

fn ln_crossing(lambda: f64, x: f64, n: usize, k: u32, c: f64, rho: f64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let a = rho * lambda * nf.sqrt() / c;
    let first = (nf * kf).ln() + rho * rho * nf / 2.0 - a;
    let second = (nf * (nf - 1.0) * kf * kf).ln() + rho * rho * nf - 2.0 * a;
    log_sum_exp([first, second]) - 2.0 * x.ln()
}

/// Markov bound on the squared level-crossing count:
/// `(NK e^{ρ²N/2 - ρλ√N/C_K} + N(N-1)K² e^{ρ²N - 2ρλ√N/C_K}) / x²`.
pub fn crossing_count_bound(lambda: f64, x: f64, n: usize, k: u32, rho: f64) -> Result<f64> {
    let c = ck(k)?;
    if n == 0 {
        return Err(Error::EmptyCodeword);
    }
    if !(x > 0.0) {
        return Err(invalid("x", format!("must be > 0, got {x}")));
    }
    if !(rho > 0.0) {
        return Err(invalid("rho", format!("must be > 0, got {rho}")));
    }
    Ok(ln_crossing(lambda, x, n, k, c, rho).exp())
}

/// [`crossing_count_bound`] minimized over `ρ` and `K`.
pub fn crossing_count_bound_optimized(
    lambda: f64,
    x: f64,
    n: usize,
    k_range: &RangeInclusive<u32>,
    rho: &RhoSearch,
) -> Result<Optimum> {
    check_k_range(k_range)?;
    rho.validate()?;
    crossing_count_bound(lambda, x, n, *k_range.start(), 1.0)?;
    let mut best = Optimum {
        ln_value: f64::INFINITY,
        rho: None,
        k: None,
    };
    for k in k_range.clone() {
        let c = ck(k)?;
        let seed = lambda / (c * (n as f64).sqrt());
        let (r, v) = minimize_rho(|r| ln_crossing(lambda, x, n, k, c, r), seed, rho);
        if v < best.ln_value {
            best = Optimum {
                ln_value: v,
                rho: Some(r),
                k: Some(k),
            };
        }
    }
    Ok(best)
}

/// Clip level `λ_N = √((1+ε) ln ln N)` and split level `μ_N = √((1+ε) ln N)`.
pub fn aom_scaling_schedule(n: usize, eps: f64) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(invalid("n", format!("must be at least 3 for ln ln N > 0, got {n}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be finite and > 0, got {eps}")));
    }
    let ln_n = (n as f64).ln();
    Ok((((1.0 + eps) * ln_n.ln()).sqrt(), ((1.0 + eps) * ln_n).sqrt()))
}

/// `min_μ [NK e^{-μ²/(2C_K²)} + NK e^{-λ²/(2C_K²)} (μ-λ)² / (N x)]` at
/// `λ = λ_N`, over the default `μ` grid plus `μ_N`.
pub fn aom_scaling_bound(n: usize, x: f64, eps: f64, k: u32) -> Result<f64> {
    let c = ck(k)?;
    if !(x > 0.0) {
        return Err(invalid("x", format!("must be > 0, got {x}")));
    }
    let (lambda, mu_n) = aom_scaling_schedule(n, eps)?;
    let mut grid = default_mu_grid(lambda, n);
    if mu_n > lambda {
        grid.push(mu_n);
    }
    let (nf, kf) = (n as f64, k as f64);
    let two_c2 = 2.0 * c * c;
    let second = nf * kf * (-lambda * lambda / two_c2).exp() / (nf * x);
    grid.iter()
        .map(|&mu| nf * kf * (-mu * mu / two_c2).exp() + second * (mu - lambda).powi(2))
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptyMuGrid)
}
