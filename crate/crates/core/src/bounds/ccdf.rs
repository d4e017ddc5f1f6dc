use std::f64::consts::PI;
use std::ops::RangeInclusive;

use super::{check_k_range, ck, minimize_rho, BoundQuery, Optimum};
use crate::codes::{DistanceDistribution, DistributionFlavor};
use crate::error::{invalid, Error, Result};
use crate::numeric::{log_cosh, log_sum_exp};

/// Projection coefficients `cos(kθ + α) / √N` for every lattice point, flattened.
struct ProjectionTable {
    n: usize,
    coeffs: Vec<f64>,
}

impl ProjectionTable {
    fn new(n: usize, oversampling: usize, k: u32) -> Self {
        let ln = n * oversampling;
        let scale = 1.0 / (n as f64).sqrt();
        let mut coeffs = Vec::with_capacity(ln * k as usize * n);
        for l1 in 0..ln {
            let theta = 2.0 * PI * l1 as f64 / (2 * ln) as f64;
            for l2 in 0..k {
                let alpha = 2.0 * PI * l2 as f64 / k as f64;
                coeffs.extend((0..n).map(|i| (i as f64 * theta + alpha).cos() * scale));
            }
        }
        Self { n, coeffs }
    }

    /// `ln Σ_points exp(-ρ t) Π_i cosh(ρ coeff_i)`.
    fn ln_sum(&self, t: f64, rho: f64) -> f64 {
        let terms = self
            .coeffs
            .chunks(self.n)
            .map(|point| point.iter().map(|&c| log_cosh(rho * c)).sum::<f64>() - rho * t);
        log_sum_exp(terms.collect::<Vec<_>>())
    }
}

/// Log of the union-Chernoff bound for uncoded BPSK at a fixed `(K, ρ)`:
/// `Σ_{(θ,α)} exp(-ρx/C_K) Π_k cosh(ρ cos(kθ+α)/√N)`.
pub fn ln_union_chernoff_bpsk(x: f64, n: usize, oversampling: usize, k: u32, rho: f64) -> Result<f64> {
    let c = ck(k)?;
    if n == 0 {
        return Err(Error::EmptyCodeword);
    }
    if oversampling == 0 {
        return Err(Error::InvalidOversampling(0));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", format!("must be finite and > 0, got {rho}")));
    }
    Ok(ProjectionTable::new(n, oversampling, k).ln_sum(x / c, rho))
}

pub fn union_chernoff_bpsk(x: f64, n: usize, oversampling: usize, k: u32, rho: f64) -> Result<f64> {
    ln_union_chernoff_bpsk(x, n, oversampling, k, rho).map(f64::exp)
}

/// Union-Chernoff bound minimized over `ρ` and over `K` in the query's range.
pub fn union_chernoff_optimized(q: &BoundQuery) -> Result<Optimum> {
    q.validate()?;
    let mut best = Optimum {
        ln_value: f64::INFINITY,
        rho: None,
        k: None,
    };
    for k in q.k_range.clone() {
        let c = ck(k)?;
        let table = ProjectionTable::new(q.n, q.oversampling, k);
        let seed = 2.0 * q.x / (c * q.n as f64);
        let (rho, v) = minimize_rho(|r| table.ln_sum(q.x / c, r), seed, &q.rho);
        if v < best.ln_value {
            best = Optimum {
                ln_value: v,
                rho: Some(rho),
                k: Some(k),
            };
        }
    }
    Ok(best)
}

/// `min_K [ln(2LNK) - ρ√N x / C_K]` and its minimizer.
fn ln_prefactor(x: f64, n: usize, oversampling: usize, k_range: &RangeInclusive<u32>, rho: f64) -> (f64, u32) {
    let sqrt_n = (n as f64).sqrt();
    k_range
        .clone()
        .map(|k| {
            let c = 1.0 / (PI / k as f64).cos();
            let v = (2.0 * (oversampling * n) as f64 * k as f64).ln() - rho * sqrt_n * x / c;
            (v, k)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("k range checked non-empty")
}

fn require_flavor(d: &DistanceDistribution, flavor: DistributionFlavor) -> Result<()> {
    if d.flavor() != flavor {
        return Err(Error::WrongFlavor {
            expected: match flavor {
                DistributionFlavor::Distance => "distance",
                DistributionFlavor::Weight => "weight",
            },
        });
    }
    Ok(())
}

/// Log of the general-code bound at fixed `ρ`, minimized over `K`:
/// `½ [ln f*(ρ,x) + ln Σ_k W_k° cosh(ρ N^{1/4}(N-2k)) - ln M1]`.
pub fn ln_thm1_at(
    dist: &DistanceDistribution,
    x: f64,
    oversampling: usize,
    k_range: &RangeInclusive<u32>,
    rho: f64,
) -> Result<f64> {
    require_flavor(dist, DistributionFlavor::Distance)?;
    check_k_range(k_range)?;
    Ok(thm1_ln(dist, x, oversampling, k_range, rho).0)
}

fn thm1_ln(
    dist: &DistanceDistribution,
    x: f64,
    oversampling: usize,
    k_range: &RangeInclusive<u32>,
    rho: f64,
) -> (f64, u32) {
    let n = dist.n();
    let nf = n as f64;
    let (pre, k) = ln_prefactor(x, n, oversampling, k_range, rho);
    let ln_f = pre + 0.5 * log_cosh(rho * nf.powf(0.75));
    let q = nf.powf(0.25);
    let terms: Vec<f64> = dist
        .ln_counts()
        .iter()
        .enumerate()
        .map(|(i, &w)| w + log_cosh(rho * q * (nf - 2.0 * i as f64)))
        .collect();
    (0.5 * (ln_f + log_sum_exp(terms) - dist.ln_m1()), k)
}

/// Log of the linear-code bound at fixed `ρ`, minimized over `K`:
/// `ln f**(ρ,x) + ln Σ_k W_k cosh(ρ(N-2k)) - ln M1`.
pub fn ln_thm2_at(
    dist: &DistanceDistribution,
    x: f64,
    oversampling: usize,
    k_range: &RangeInclusive<u32>,
    rho: f64,
) -> Result<f64> {
    require_flavor(dist, DistributionFlavor::Weight)?;
    check_k_range(k_range)?;
    Ok(thm2_ln(dist, x, oversampling, k_range, rho).0)
}

fn thm2_ln(
    dist: &DistanceDistribution,
    x: f64,
    oversampling: usize,
    k_range: &RangeInclusive<u32>,
    rho: f64,
) -> (f64, u32) {
    let n = dist.n();
    let nf = n as f64;
    let (pre, k) = ln_prefactor(x, n, oversampling, k_range, rho);
    let terms: Vec<f64> = dist
        .ln_counts()
        .iter()
        .enumerate()
        .map(|(i, &w)| w + log_cosh(rho * (nf - 2.0 * i as f64)))
        .collect();
    (pre + log_sum_exp(terms) - dist.ln_m1(), k)
}

/// Log-bound evaluator at fixed `ρ`, returning the value and the best `K`.
type CodedEval = fn(&DistanceDistribution, f64, usize, &RangeInclusive<u32>, f64) -> (f64, u32);

fn optimize_coded(q: &BoundQuery, flavor: DistributionFlavor, eval: CodedEval) -> Result<Optimum> {
    q.validate()?;
    let dist = q
        .distribution
        .as_ref()
        .ok_or_else(|| invalid("distribution", "required by this bound"))?;
    require_flavor(dist, flavor)?;
    let c = ck(*q.k_range.end())?;
    let seed = 2.0 * q.x / (c * q.n as f64);
    let (rho, v) = minimize_rho(|r| eval(dist, q.x, q.oversampling, &q.k_range, r).0, seed, &q.rho);
    let (_, k) = eval(dist, q.x, q.oversampling, &q.k_range, rho);
    Ok(Optimum {
        ln_value: v,
        rho: Some(rho),
        k: Some(k),
    })
}

/// CCDF bound for any binary code from its distance distribution.
pub fn thm1_bound(q: &BoundQuery) -> Result<Optimum> {
    optimize_coded(q, DistributionFlavor::Distance, thm1_ln)
}

/// CCDF bound for linear codes from the weight distribution.
pub fn thm2_bound(q: &BoundQuery) -> Result<Optimum> {
    optimize_coded(q, DistributionFlavor::Weight, thm2_ln)
}

/// Which closed form of the Gaussian-tail bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm3Form {
    /// `2(1+C_w) LKN exp(-x² / (2 C_K²))`.
    Linear,
    /// `2(1+C_w) LKN exp(-x² / (2 C_K² √N))`.
    Nonlinear,
    /// `2(1+C_w) LKN exp(-x² / (C_K² √N))`, the variant reached by setting
    /// `ρ = 2x/(C_K N)` in the derivation.
    NonlinearDerived,
}

fn ln_thm3(x: f64, n: usize, oversampling: usize, k: u32, c_w: f64, form: Thm3Form) -> Result<f64> {
    let c = ck(k)?;
    if n == 0 {
        return Err(Error::EmptyCodeword);
    }
    if oversampling == 0 {
        return Err(Error::InvalidOversampling(0));
    }
    if !(c_w >= 0.0) {
        return Err(invalid("c_w", "must be >= 0"));
    }
    if !(x >= 0.0) {
        return Err(invalid("x", format!("must be >= 0, got {x}")));
    }
    let sqrt_n = (n as f64).sqrt();
    let denom = match form {
        Thm3Form::Linear => 2.0 * c * c,
        Thm3Form::Nonlinear => 2.0 * c * c * sqrt_n,
        Thm3Form::NonlinearDerived => c * c * sqrt_n,
    };
    let pre = 2.0 * (1.0 + c_w) * (oversampling * n) as f64 * k as f64;
    Ok(pre.ln() - x * x / denom)
}

/// Closed-form Gaussian-tail bound at a single `K`.
pub fn thm3_bound(x: f64, n: usize, oversampling: usize, k: u32, c_w: f64, form: Thm3Form) -> Result<f64> {
    ln_thm3(x, n, oversampling, k, c_w, form).map(f64::exp)
}

/// [`thm3_bound`] minimized over `K`.
pub fn thm3_bound_best_k(
    x: f64,
    n: usize,
    oversampling: usize,
    k_range: &RangeInclusive<u32>,
    c_w: f64,
    form: Thm3Form,
) -> Result<Optimum> {
    check_k_range(k_range)?;
    let mut best = Optimum {
        ln_value: f64::INFINITY,
        rho: None,
        k: None,
    };
    for k in k_range.clone() {
        let v = ln_thm3(x, n, oversampling, k, c_w, form)?;
        if v < best.ln_value {
            best.ln_value = v;
            best.k = Some(k);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm3_closed_forms() {
        let v = thm3_bound(4.0, 64, 1, 4, 0.0, Thm3Form::Linear).unwrap();
        assert!((v - 512.0 * (-4.0f64).exp()).abs() < 1e-12);
        assert!((v - 9.379).abs() < 5e-3);
        let v = thm3_bound(4.0, 64, 1, 4, 0.0, Thm3Form::Nonlinear).unwrap();
        assert!((v - 512.0 * (-0.5f64).exp()).abs() < 1e-10);
        let v = thm3_bound(4.0, 64, 1, 4, 0.0, Thm3Form::NonlinearDerived).unwrap();
        assert!((v - 512.0 * (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(thm3_bound(1e3, 64, 1, 4, 0.0, Thm3Form::Linear).unwrap(), 0.0);
        let with_cw = thm3_bound(4.0, 64, 1, 4, 1.0, Thm3Form::Linear).unwrap();
        assert!((with_cw - 2.0 * 512.0 * (-4.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn single_term_union_chernoff() {
        // N = L = 1, K = 3: each lattice term is exp(-ρx/2) cosh(ρ cos α).
        let (x, rho) = (0.7, 1.3);
        let v = union_chernoff_bpsk(x, 1, 1, 3, rho).unwrap();
        let oracle: f64 = (0..3)
            .map(|l| (-rho * x / 2.0).exp() * (rho * (2.0 * PI * l as f64 / 3.0).cos()).cosh())
            .sum();
        assert!((v - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn zero_threshold_bounds_are_vacuous() {
        assert!(union_chernoff_bpsk(0.0, 8, 2, 5, 0.4).unwrap() >= (8 * 2 * 5) as f64);
        let q = BoundQuery::new(0.0, 10, 1)
            .with_distribution(DistanceDistribution::full_space(10, DistributionFlavor::Distance));
        assert!(thm1_bound(&q).unwrap().value() >= 1.0);
        let q = BoundQuery::new(0.0, 10, 1)
            .with_distribution(DistanceDistribution::full_space(10, DistributionFlavor::Weight));
        assert!(thm2_bound(&q).unwrap().value() >= 1.0);
    }

    #[test]
    fn flavor_is_enforced() {
        let q = BoundQuery::new(1.0, 6, 1)
            .with_distribution(DistanceDistribution::full_space(6, DistributionFlavor::Weight));
        assert_eq!(thm1_bound(&q), Err(Error::WrongFlavor { expected: "distance" }));
        assert!(thm2_bound(&BoundQuery::new(1.0, 6, 1)).is_err());
    }

    #[test]
    fn repetition_code_two_term_sum() {
        // W_0 = W_8 = 1, M1 = 2: the sum collapses to cosh(8ρ).
        let dist = DistanceDistribution::from_counts(
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            2.0,
            DistributionFlavor::Weight,
        )
        .unwrap();
        let (x, rho) = (1.5, 0.2);
        let k_range = 3..=64;
        let got = ln_thm2_at(&dist, x, 1, &k_range, rho).unwrap().exp();
        let f = k_range
            .map(|k| 2.0 * 8.0 * k as f64 * (-rho * 8f64.sqrt() * x * (PI / k as f64).cos()).exp())
            .fold(f64::INFINITY, f64::min);
        let oracle = f * (2.0 * (8.0 * rho).cosh()) / 2.0;
        assert!((got - oracle).abs() < 1e-12 * oracle);
    }
}
