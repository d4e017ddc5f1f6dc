use crate::error::{invalid, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const COARSE_POINTS: usize = 41;

/// Search interval and tolerance for the Chernoff parameter `ρ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSearch {
    pub lo: f64,
    pub hi: f64,
    /// Relative tolerance on `ρ` (absolute on `ln ρ`).
    pub tol: f64,
}

impl Default for RhoSearch {
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1e2,
            tol: 1e-6,
        }
    }
}

impl RhoSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo.is_finite()) {
            return Err(invalid("rho_lo", "must be finite and > 0"));
        }
        if !(self.hi > self.lo && self.hi.is_finite()) {
            return Err(invalid("rho_hi", "must be finite and above rho_lo"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("rho_tol", "must be > 0"));
        }
        Ok(())
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimizes `f(ρ)` over `[lo, hi]`.
///
/// A coarse log-spaced scan plus the analytic `seed` picks a bracket, which
/// golden-section search on `ln ρ` then refines. Returns `(ρ, f(ρ))` for the
/// best point seen.
pub fn minimize_rho(f: impl Fn(f64) -> f64, seed: f64, search: &RhoSearch) -> (f64, f64) {
    let (lo, hi) = (search.lo.ln(), search.hi.ln());
    let mut grid: Vec<f64> = (0..COARSE_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (COARSE_POINTS - 1) as f64)
        .collect();
    if seed.is_finite() && seed > 0.0 {
        let s = seed.ln().clamp(lo, hi);
        let pos = grid.partition_point(|&u| u < s);
        grid.insert(pos, s);
    }
    let values: Vec<f64> = grid.iter().map(|&u| f(u.exp())).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is not empty");

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (u, v) = golden_section(|u| f(u.exp()), a, b, search.tol);
    if v < values[best] {
        (u.exp(), v)
    } else {
        (grid[best].exp(), values[best])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rho_search_handles_edge_minimum() {
        let s = RhoSearch::default();
        let (rho, _) = minimize_rho(|r| r, 1.0, &s);
        assert!((rho - s.lo).abs() / s.lo < 1e-5);
        let (rho, _) = minimize_rho(|r| (r.ln() - 0.5f64.ln()).powi(2), 7.0, &s);
        assert!((rho - 0.5).abs() < 1e-5);
    }

    #[test]
    fn validation() {
        assert!(RhoSearch::default().validate().is_ok());
        assert!(RhoSearch {
            lo: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RhoSearch {
            hi: 1e-5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
