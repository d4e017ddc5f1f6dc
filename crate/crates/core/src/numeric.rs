//! Log-domain helpers shared by the bound evaluators.

use std::f64::consts::LN_2;

/// `ln cosh(t)` without overflow: `|t| + ln(1 + e^{-2|t|}) - ln 2`.
#[inline]
pub fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `ln Σ exp(x_i)`; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.into_iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// `ln binom(n, k)` by summing logs; exact enough for weights up to several thousand.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `ln binom(n, k)` for every `k` in `0..=n`, built by the multiplicative recurrence.
pub fn ln_binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    row.push(acc);
    for k in 1..=n {
        acc += ((n - k + 1) as f64).ln() - (k as f64).ln();
        row.push(acc);
    }
    row
}

/// `n` points spaced evenly in log between `lo` and `hi`, inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cosh_matches_naive_where_finite() {
        for &t in &[0.0, 1e-6, 0.3, -2.5, 10.0, 300.0] {
            let naive = f64::cosh(t).ln();
            assert!((log_cosh(t) - naive).abs() <= 1e-12 * naive.abs().max(1e-300) + 1e-15);
        }
        assert!((log_cosh(1e6) - (1e6 - LN_2)).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(vec![f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let v = log_sum_exp(vec![1000.0, 1000.0]);
        assert!((v - (1000.0 + LN_2)).abs() < 1e-12);
        let v = log_sum_exp(vec![0.0_f64.ln(), 2.0_f64.ln(), 3.0_f64.ln()]);
        assert!((v - 5.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert!((ln_binomial(10, 3) - 120.0_f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(5, 0), 0.0);
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
        let row = ln_binomial_row(12);
        for (k, v) in row.iter().enumerate() {
            assert!((v - ln_binomial(12, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(1e-4, 1e2, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-4).abs() < 1e-16);
        assert!((g[6] - 1e2).abs() < 1e-10);
        assert!((g[2] - 1e-2).abs() < 1e-14);
    }
}
