//! Figures of merit: crest factor, CCDF curves and their inversion, the
//! amplifier-oriented metric and level-crossing counts.

use crate::codes::{enumerate_code, CodeSpec};
use crate::error::{invalid, Error, Result};
use crate::hpa::DistortionRecord;
use crate::montecarlo::run_trials;
use crate::signal::{SampledSignal, Synthesizer};

/// Monte Carlo estimates need at least this many exceedances to be trusted.
pub const RELIABLE_COUNT: f64 = 10.0;

/// Largest sample magnitude on the grid.
pub fn crest_factor(s: &SampledSignal) -> f64 {
    s.samples().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest crest factor over every codeword.
pub fn code_cf(spec: &CodeSpec, oversampling: usize) -> Result<f64> {
    Ok(exact_cf_distribution(spec, oversampling)?
        .values()
        .last()
        .copied()
        .unwrap_or(0.0))
}

/// Mean squared distortion magnitude over all `LN` samples.
pub fn aom(d: &DistortionRecord) -> f64 {
    let dist = d.distortion();
    dist.iter().map(|z| z.norm_sqr()).sum::<f64>() / dist.len() as f64
}

/// Number of samples with `|S| > λ`.
pub fn crossing_count(s: &SampledSignal, lambda: f64) -> usize {
    s.samples().iter().filter(|z| z.norm() > lambda).count()
}

/// Sorted crest-factor values, either of every codeword (exact) or of
/// Monte Carlo draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CfDistribution {
    sorted: Vec<f64>,
    exact: bool,
}

impl CfDistribution {
    pub fn from_values(mut values: Vec<f64>, exact: bool) -> Self {
        values.sort_by(f64::total_cmp);
        Self { sorted: values, exact }
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Number of values strictly above `x`.
    pub fn exceed_count(&self, x: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&v| v <= x)
    }

    /// Fraction of values strictly above `x`.
    pub fn tail(&self, x: f64) -> f64 {
        self.exceed_count(x) as f64 / self.sorted.len() as f64
    }

    pub fn median(&self) -> f64 {
        let n = self.sorted.len();
        if n % 2 == 1 {
            self.sorted[n / 2]
        } else {
            0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])
        }
    }

    pub fn curve(&self, thresholds: &[f64]) -> Result<CcdfCurve> {
        check_thresholds(thresholds)?;
        Ok(CcdfCurve {
            thresholds: thresholds.to_vec(),
            exceed_counts: thresholds.iter().map(|&x| self.exceed_count(x) as u64).collect(),
            trials: self.sorted.len() as u64,
            exact: self.exact,
        })
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(invalid("thresholds", "must not be empty"));
    }
    if thresholds.iter().any(|x| !x.is_finite()) {
        return Err(invalid("thresholds", "must be finite"));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("thresholds", "must be strictly ascending"));
    }
    Ok(())
}

/// Crest factor of every codeword.
pub fn exact_cf_distribution(spec: &CodeSpec, oversampling: usize) -> Result<CfDistribution> {
    let words = enumerate_code(spec)?;
    let mut syn = Synthesizer::new(spec.n(), oversampling)?;
    let mut mags = Vec::new();
    let mut values = Vec::with_capacity(words.len());
    for w in &words {
        syn.magnitudes_into(w, &mut mags)?;
        values.push(mags.iter().copied().fold(0.0, f64::max));
    }
    Ok(CfDistribution::from_values(values, true))
}

/// Crest factors of `trials` seeded uniform draws from the code.
pub fn monte_carlo_cf_distribution(
    spec: &CodeSpec,
    oversampling: usize,
    trials: usize,
    seed: u64,
) -> Result<CfDistribution> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let values = run_trials(spec, oversampling, trials, seed, |c, syn| {
        let mut mags = Vec::new();
        syn.magnitudes_into(c, &mut mags).expect("length checked by spec");
        mags.into_iter().fold(0.0, f64::max)
    })?;
    Ok(CfDistribution::from_values(values, false))
}

/// Complementary CDF `B_L(x) = Pr(CF > x)` on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    thresholds: Vec<f64>,
    exceed_counts: Vec<u64>,
    trials: u64,
    exact: bool,
}

impl CcdfCurve {
    /// Builds a curve from raw counts; counts must be nonincreasing and at most `trials`.
    pub fn from_counts(thresholds: Vec<f64>, exceed_counts: Vec<u64>, trials: u64, exact: bool) -> Result<Self> {
        check_thresholds(&thresholds)?;
        if exceed_counts.len() != thresholds.len() {
            return Err(Error::LengthMismatch {
                expected: thresholds.len(),
                found: exceed_counts.len(),
            });
        }
        if trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if exceed_counts.windows(2).any(|w| w[1] > w[0]) || exceed_counts.iter().any(|&c| c > trials) {
            return Err(invalid("exceed_counts", "must be nonincreasing and at most trials"));
        }
        Ok(Self {
            thresholds,
            exceed_counts,
            trials,
            exact,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn exceed_counts(&self) -> &[u64] {
        &self.exceed_counts
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.exceed_counts
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }

    /// Number of trials, or the code size for exact curves.
    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Smallest probability this curve resolves: `10 / trials` for Monte
    /// Carlo, `1 / M1` for exact curves.
    pub fn resolution(&self) -> f64 {
        if self.exact {
            1.0 / self.trials as f64
        } else {
            RELIABLE_COUNT / self.trials as f64
        }
    }

    /// Whether point `i` is above the reliability floor.
    pub fn is_reliable(&self, i: usize) -> bool {
        self.exact || self.exceed_counts[i] as f64 >= RELIABLE_COUNT
    }

    /// Binomial standard error of point `i`.
    pub fn standard_error(&self, i: usize) -> f64 {
        let p = self.exceed_counts[i] as f64 / self.trials as f64;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Exact CCDF by enumerating every codeword.
pub fn exact_ccdf(spec: &CodeSpec, oversampling: usize, thresholds: &[f64]) -> Result<CcdfCurve> {
    exact_cf_distribution(spec, oversampling)?.curve(thresholds)
}

/// Monte Carlo CCDF: `p_i = #{draws with CF > x_i} / trials`.
pub fn empirical_ccdf(
    spec: &CodeSpec,
    oversampling: usize,
    thresholds: &[f64],
    trials: usize,
    seed: u64,
) -> Result<CcdfCurve> {
    check_thresholds(thresholds)?;
    monte_carlo_cf_distribution(spec, oversampling, trials, seed)?.curve(thresholds)
}

/// Smallest threshold at which the curve drops to `eps`.
///
/// Interpolates linearly in `(x, ln p)` between the last grid point above
/// `eps` and the first at or below it; falls back to linear `p` when the
/// lower point is zero.
pub fn effective_cf(curve: &CcdfCurve, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1], got {eps}")));
    }
    if eps < curve.resolution() {
        return Err(Error::UnresolvedEpsilon {
            eps,
            min_eps: curve.resolution(),
        });
    }
    let p = curve.probabilities();
    let x = curve.thresholds();
    let i = p.iter().position(|&v| v <= eps).ok_or(Error::GridTooShort { eps })?;
    if i == 0 {
        return Ok(x[0]);
    }
    let (x0, x1, p0, p1) = (x[i - 1], x[i], p[i - 1], p[i]);
    let t = if p1 > 0.0 {
        (p0.ln() - eps.ln()) / (p0.ln() - p1.ln())
    } else {
        (p0 - eps) / (p0 - p1)
    };
    Ok(x0 + t * (x1 - x0))
}
