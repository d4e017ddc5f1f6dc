//! Experiment execution. Every row is computed by the library directly from
//! the resolved [`Plan`], in a fixed order, so the output depends only on
//! the config.

use ofdm_cf::bounds::{
    aom_scaling_bound, aom_scaling_schedule, balance_bound_bpsk, balance_bound_general, default_mu_grid, thm1_bound,
    thm2_bound, thm3_bound_best_k, union_chernoff_optimized, AnalyticTail, BalanceQuery, BoundQuery, CcdfBoundKind,
    TailBound, Thm3Form,
};
use ofdm_cf::codes::{
    check_wcond, distance_distribution, enumerate_code, weight_distribution, CodeSpec, DistanceDistribution,
    DistributionFlavor,
};
use ofdm_cf::hpa::{apply_cubic, apply_sel, DistortionRecord, SelParams};
use ofdm_cf::metrics::{
    aom, code_cf, crest_factor, effective_cf, exact_cf_distribution, monte_carlo_cf_distribution, CfDistribution,
};
use ofdm_cf::montecarlo::run_trials;
use ofdm_cf::numeric::log_space;
use ofdm_cf::signal::{synthesize, SampledSignal};
use ofdm_cf::{Error, Result};
use rayon::prelude::*;

use crate::config::{Amplifier, CcdfBoundSelector, HSelector, Plan, Sampling};

/// Grid step for the default effective-crest-factor threshold grid.
const EFFECTIVE_CF_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

pub fn run(plan: &Plan, columns: &'static [&'static str]) -> Result<Table> {
    let rows = match plan {
        Plan::Ccdf {
            code,
            oversampling,
            thresholds,
            sampling,
            amplifier,
        } => ccdf(code, *oversampling, thresholds, *sampling, *amplifier)?,
        Plan::BoundsCompare {
            code,
            oversampling,
            thresholds,
            sampling,
            k_range,
            c_w,
        } => {
            let cfs = cf_distribution(code, *oversampling, *sampling, None)?;
            let dist_d = distance_flavor(code)?;
            let dist_w = match code {
                CodeSpec::Explicit(_) => None,
                _ => Some(weight_flavor(code)?),
            };
            let c_w = match c_w {
                Some(c) => *c,
                None => check_wcond(&dist_d, code.k_bits())?,
            };
            thresholds
                .par_iter()
                .map(|&x| {
                    let q = BoundQuery::new(x, code.n(), *oversampling).with_k_range(k_range.clone());
                    let uc = union_chernoff_optimized(&q)?.value();
                    let t1 = thm1_bound(&q.clone().with_distribution(dist_d.clone()))?.value();
                    let t2 = match &dist_w {
                        Some(w) => Cell::Num(thm2_bound(&q.clone().with_distribution(w.clone()))?.value()),
                        None => Cell::Empty,
                    };
                    let t3 = thm3_bound_best_k(x, code.n(), *oversampling, k_range, c_w, Thm3Form::Linear)?.value();
                    Ok(vec![
                        Cell::Num(x),
                        Cell::Num(cfs.tail(x)),
                        Cell::Num(uc),
                        Cell::Num(t1),
                        t2,
                        Cell::Num(t3),
                    ])
                })
                .collect::<Result<Vec<_>>>()?
        }
        Plan::EffectiveCf {
            codes,
            oversampling,
            epsilons,
            thresholds,
            sampling,
        } => {
            let mut rows = Vec::new();
            for code in codes {
                let n = code.n();
                let cfs = cf_distribution(code, *oversampling, *sampling, None)?;
                let grid = match thresholds {
                    Some(t) => t.clone(),
                    None => {
                        let top = (n as f64).sqrt();
                        let count = (top / EFFECTIVE_CF_STEP).ceil() as usize + 1;
                        (0..count).map(|i| i as f64 * EFFECTIVE_CF_STEP).collect()
                    }
                };
                let curve = cfs.curve(&grid)?;
                let ln_n = (n as f64).ln();
                for &eps in epsilons {
                    let (v, ratio) = match effective_cf(&curve, eps) {
                        Ok(v) if ln_n > 0.0 => (Cell::Num(v), Cell::Num(v * v / ln_n)),
                        Ok(v) => (Cell::Num(v), Cell::Empty),
                        Err(Error::UnresolvedEpsilon { .. } | Error::GridTooShort { .. }) => (Cell::Empty, Cell::Empty),
                        Err(e) => return Err(e),
                    };
                    rows.push(vec![Cell::Int(n as u64), Cell::Num(eps), v, ratio]);
                }
            }
            rows
        }
        Plan::AomScaling {
            ns,
            oversampling,
            x,
            eps,
            k,
            trials,
            seed,
        } => {
            let mut rows = Vec::with_capacity(ns.len());
            for &n in ns {
                let (lambda, mu) = aom_scaling_schedule(n, *eps)?;
                let p = SelParams::new(lambda)?;
                let hits = run_trials(&CodeSpec::uncoded(n)?, *oversampling, *trials, *seed, |c, syn| {
                    let s = syn.synthesize(c).expect("length matches the synthesizer");
                    aom(&apply_sel(&s, &p)) > *x
                })?;
                let prob = hits.iter().filter(|&&h| h).count() as f64 / *trials as f64;
                let bound = aom_scaling_bound(n, *x, *eps, *k)?;
                rows.push(vec![
                    Cell::Int(n as u64),
                    Cell::Num(lambda),
                    Cell::Num(mu),
                    Cell::Num(prob),
                    Cell::Num(bound),
                ]);
            }
            rows
        }
        Plan::Balance {
            code,
            oversampling,
            lambda,
            xs,
            sampling,
            h,
            bound,
            k_range,
            c_w,
        } => balance(code, *oversampling, *lambda, xs, *sampling, *h, *bound, k_range, *c_w)?,
        Plan::CodeCf { code, oversampling } => oversampling
            .iter()
            .map(|&l| Ok(vec![Cell::Int(l as u64), Cell::Num(code_cf(code, l)?)]))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Table { columns, rows })
}

fn amplify(s: &SampledSignal, a: Amplifier) -> DistortionRecord {
    match a {
        Amplifier::Sel(p) => apply_sel(s, &p),
        Amplifier::Cubic(p) => apply_cubic(s, &p),
    }
}

/// Crest factors of the code's signals, after the amplifier when one is given.
fn cf_distribution(
    code: &CodeSpec,
    oversampling: usize,
    sampling: Sampling,
    amplifier: Option<Amplifier>,
) -> Result<CfDistribution> {
    match (sampling, amplifier) {
        (Sampling::Exhaustive, None) => exact_cf_distribution(code, oversampling),
        (Sampling::MonteCarlo { trials, seed }, None) => monte_carlo_cf_distribution(code, oversampling, trials, seed),
        (Sampling::Exhaustive, Some(a)) => {
            let values = enumerate_code(code)?
                .par_iter()
                .map(|w| Ok(crest_factor(amplify(&synthesize(w, oversampling)?, a).clipped())))
                .collect::<Result<Vec<_>>>()?;
            Ok(CfDistribution::from_values(values, true))
        }
        (Sampling::MonteCarlo { trials, seed }, Some(a)) => {
            let values = run_trials(code, oversampling, trials, seed, |c, syn| {
                let s = syn.synthesize(c).expect("length matches the synthesizer");
                crest_factor(amplify(&s, a).clipped())
            })?;
            Ok(CfDistribution::from_values(values, false))
        }
    }
}

fn ccdf(
    code: &CodeSpec,
    oversampling: usize,
    thresholds: &[f64],
    sampling: Sampling,
    amplifier: Option<Amplifier>,
) -> Result<Vec<Vec<Cell>>> {
    let curve = cf_distribution(code, oversampling, sampling, amplifier)?.curve(thresholds)?;
    Ok(curve
        .probabilities()
        .into_iter()
        .enumerate()
        .map(|(i, p)| vec![Cell::Num(thresholds[i]), Cell::Num(p), Cell::Bool(curve.is_reliable(i))])
        .collect())
}

/// Distance distribution in the form the general-code bound expects.
fn distance_flavor(code: &CodeSpec) -> Result<DistanceDistribution> {
    match code {
        CodeSpec::Uncoded(n) => Ok(DistanceDistribution::full_space(*n, DistributionFlavor::Distance)),
        CodeSpec::Generator(_) => {
            // Linear codes look the same from every codeword.
            let w = weight_distribution(code)?;
            DistanceDistribution::from_counts(&w.counts(), w.m1(), DistributionFlavor::Distance)
        }
        CodeSpec::Explicit(words) => distance_distribution(words),
    }
}

fn weight_flavor(code: &CodeSpec) -> Result<DistanceDistribution> {
    match code {
        CodeSpec::Uncoded(n) => Ok(DistanceDistribution::full_space(*n, DistributionFlavor::Weight)),
        _ => weight_distribution(code),
    }
}

#[allow(clippy::too_many_arguments)]
fn balance(
    code: &CodeSpec,
    oversampling: usize,
    lambda: f64,
    xs: &[f64],
    sampling: Sampling,
    h: HSelector,
    bound: CcdfBoundSelector,
    k_range: &std::ops::RangeInclusive<u32>,
    c_w: Option<f64>,
) -> Result<Vec<Vec<Cell>>> {
    let n = code.n();
    let metric = h.metric(n);
    let p = SelParams::new(lambda)?;
    // Per codeword: crest factor at L = 1 and the summed distortion metric,
    // normalized per oversampling factor so that h = d²/N gives the AOM.
    let per_word = |s1: &SampledSignal, s: &SampledSignal| {
        let d = apply_sel(s, &p);
        let total: f64 = d.distortion().iter().map(|z| metric.eval(z.norm())).sum();
        (crest_factor(s1), total / oversampling as f64)
    };
    let pairs: Vec<(f64, f64)> = match sampling {
        Sampling::Exhaustive => enumerate_code(code)?
            .par_iter()
            .map(|w| {
                let s1 = synthesize(w, 1)?;
                if oversampling == 1 {
                    Ok(per_word(&s1, &s1))
                } else {
                    Ok(per_word(&s1, &synthesize(w, oversampling)?))
                }
            })
            .collect::<Result<_>>()?,
        Sampling::MonteCarlo { trials, seed } => run_trials(code, oversampling, trials, seed, |c, syn| {
            let s = syn.synthesize(c).expect("length matches the synthesizer");
            if oversampling == 1 {
                per_word(&s, &s)
            } else {
                per_word(&synthesize(c, 1).expect("valid codeword"), &s)
            }
        })?,
    };
    let exact = matches!(sampling, Sampling::Exhaustive);
    let cfs = CfDistribution::from_values(pairs.iter().map(|p| p.0).collect(), exact);
    let mut metrics: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    metrics.sort_by(f64::total_cmp);

    let analytic = |kind| -> Result<AnalyticTail> {
        let c_w = match c_w {
            Some(c) => c,
            None => check_wcond(&distance_flavor(code)?, code.k_bits())?,
        };
        let mut t = AnalyticTail::new(kind, n, c_w);
        t.k_range = k_range.clone();
        Ok(t)
    };
    let tail: Box<dyn TailBound + Sync> = match bound {
        CcdfBoundSelector::Exact => Box::new(cfs),
        CcdfBoundSelector::Thm3Linear => Box::new(analytic(CcdfBoundKind::Thm3Linear)?),
        CcdfBoundSelector::Thm3Nonlinear => Box::new(analytic(CcdfBoundKind::Thm3Nonlinear)?),
        CcdfBoundSelector::UnionChernoff => Box::new(analytic(CcdfBoundKind::UnionChernoff)?),
    };

    let mut grid = default_mu_grid(lambda, n);
    if grid.is_empty() {
        // No crest factor exceeds λ; any levels above it will do.
        grid = log_space(lambda, 2.0 * lambda, 65);
        grid.remove(0);
    }
    xs.iter()
        .map(|&x| {
            let q = BalanceQuery::new(lambda, x, grid.clone(), metric)?;
            let above = metrics.len() - metrics.partition_point(|&v| v <= x);
            let empirical = above as f64 / metrics.len() as f64;
            let t4 = balance_bound_bpsk(&q, tail.as_ref())?.value;
            let t5 = balance_bound_general(&q, tail.as_ref())?.value;
            Ok(vec![Cell::Num(x), Cell::Num(empirical), Cell::Num(t4), Cell::Num(t5)])
        })
        .collect()
}
