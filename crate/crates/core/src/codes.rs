//! Binary codes over BPSK: sources, distance/weight distributions and the
//! symmetrization check.
//!
//! Bits map to symbols as `0 → +1`, `1 → -1`. Under this map the binary
//! all-one word is the all-negative symbol word, and adding it to a codeword
//! is symbol-wise negation.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{ln_binomial_row, log_sum_exp};
use crate::signal::{Codeword, Synthesizer};

/// Largest code that [`enumerate_code`] will materialize.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

/// A `k_b × N` binary generator matrix of full row rank over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    rows: Vec<Vec<u8>>,
    n: usize,
}

impl GeneratorMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::MalformedGenerator("no rows".into()))?;
        if n == 0 {
            return Err(Error::MalformedGenerator("rows are empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedGenerator(format!(
                    "row {} has length {}, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::MalformedGenerator(format!(
                    "row {} has a non-binary entry",
                    i + 1
                )));
            }
        }
        let rank = gf2_rank(&rows);
        if rank != rows.len() {
            return Err(Error::RankDeficient { rows: rows.len(), rank });
        }
        if rows.len() > n {
            return Err(Error::MalformedGenerator(format!(
                "{} rows exceed the code length {n}",
                rows.len()
            )));
        }
        Ok(Self { rows, n })
    }

    /// Parses the text format: one row per line of `0`/`1` characters,
    /// blank lines and `#` comment lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(Error::MalformedGenerator(format!(
                        "line {}: unexpected character {other:?}",
                        lineno + 1
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| u8::from(i == j)).collect()).collect())
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Codeword bits for the message whose bit `i` is `(message >> i) & 1`.
    fn encode(&self, message: impl Fn(usize) -> bool) -> Vec<u8> {
        let mut bits = vec![0u8; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            if message(i) {
                for (b, r) in bits.iter_mut().zip(row) {
                    *b ^= r;
                }
            }
        }
        bits
    }
}

fn gf2_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] == 1) else {
            continue;
        };
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] == 1 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Where codewords come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSpec {
    /// The full space `{±1}^N`.
    Uncoded(usize),
    /// Row span of a generator matrix.
    Generator(GeneratorMatrix),
    /// An explicit list of distinct codewords of equal length.
    Explicit(Vec<Codeword>),
}

impl CodeSpec {
    pub fn uncoded(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCodeword);
        }
        Ok(Self::Uncoded(n))
    }

    /// Explicit code; duplicates are dropped, first occurrence wins.
    pub fn explicit(words: Vec<Codeword>) -> Result<Self> {
        let n = words.first().map(Codeword::len).ok_or(Error::EmptyCode)?;
        let mut seen = HashSet::new();
        let mut distinct = Vec::with_capacity(words.len());
        for w in words {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
            if seen.insert(w.clone()) {
                distinct.push(w);
            }
        }
        Ok(Self::Explicit(distinct))
    }

    /// Repetition code of length `n`: `{(+1)^n, (-1)^n}`.
    pub fn repetition(n: usize) -> Result<Self> {
        Ok(Self::Generator(GeneratorMatrix::new(vec![vec![1; n]])?))
    }

    /// Even-weight (single parity check) code of length `n`.
    pub fn even_weight(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::MalformedGenerator("even-weight code needs n >= 2".into()));
        }
        let rows = (0..n - 1)
            .map(|i| {
                let mut r = vec![0; n];
                r[i] = 1;
                r[n - 1] = 1;
                r
            })
            .collect();
        Ok(Self::Generator(GeneratorMatrix::new(rows)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Uncoded(n) => *n,
            Self::Generator(g) => g.n(),
            Self::Explicit(w) => w[0].len(),
        }
    }

    /// Number of information bits; `log2 M1` for explicit codes.
    pub fn k_bits(&self) -> f64 {
        match self {
            Self::Uncoded(n) => *n as f64,
            Self::Generator(g) => g.k() as f64,
            Self::Explicit(w) => (w.len() as f64).log2(),
        }
    }

    pub fn rate(&self) -> f64 {
        self.k_bits() / self.n() as f64
    }

    /// `ln M1`.
    pub fn ln_size(&self) -> f64 {
        match self {
            Self::Explicit(w) => (w.len() as f64).ln(),
            _ => self.k_bits() * std::f64::consts::LN_2,
        }
    }

    /// `M1`, saturating to infinity for very large codes.
    pub fn size(&self) -> f64 {
        match self {
            Self::Explicit(w) => w.len() as f64,
            _ => self.k_bits().exp2(),
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, Self::Explicit(_))
    }
}

/// Draws a codeword uniformly from the code.
pub fn sample_codeword<R: Rng + ?Sized>(spec: &CodeSpec, rng: &mut R) -> Codeword {
    let symbols = match spec {
        CodeSpec::Uncoded(n) => {
            let mut out = Vec::with_capacity(*n);
            while out.len() < *n {
                let word: u64 = rng.gen();
                let take = (*n - out.len()).min(64);
                out.extend((0..take).map(|i| if (word >> i) & 1 == 0 { 1i8 } else { -1 }));
            }
            out
        }
        CodeSpec::Generator(g) => {
            let message: Vec<bool> = (0..g.k()).map(|_| rng.gen()).collect();
            g.encode(|i| message[i]).into_iter().map(|b| 1 - 2 * b as i8).collect()
        }
        CodeSpec::Explicit(words) => return words[rng.gen_range(0..words.len())].clone(),
    };
    Codeword::new(symbols).expect("sampled symbols are ±1")
}

/// Every codeword exactly once.
pub fn enumerate_code(spec: &CodeSpec) -> Result<Vec<Codeword>> {
    let size = spec.size();
    if size > ENUMERATION_LIMIT as f64 {
        return Err(Error::TooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let words = match spec {
        CodeSpec::Uncoded(n) => (0..1u64 << n)
            .map(|m| {
                Codeword::new((0..*n).map(|k| if (m >> k) & 1 == 0 { 1 } else { -1 }).collect()).expect("±1 symbols")
            })
            .collect(),
        CodeSpec::Generator(g) => (0..1u64 << g.k())
            .map(|m| {
                let bits = g.encode(|i| (m >> i) & 1 == 1);
                Codeword::from_bits(&bits).expect("binary bits")
            })
            .collect(),
        CodeSpec::Explicit(w) => w.clone(),
    };
    Ok(words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionFlavor {
    /// `W_k°`: ordered pairs at distance `k`, divided by `M1`.
    Distance,
    /// `W_k`: codewords of weight `k` (linear codes).
    Weight,
}

/// Counts `W_k` or `W_k°` for `k = 0..=N`, stored as natural logs so that
/// codes like the full space at `N = 4096` stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution {
    ln_counts: Vec<f64>,
    ln_m1: f64,
    flavor: DistributionFlavor,
}

impl DistanceDistribution {
    /// Builds a distribution from plain counts.
    pub fn from_counts(counts: &[f64], m1: f64, flavor: DistributionFlavor) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::EmptyCodeword);
        }
        if counts.iter().any(|&c| !(c >= 0.0 && c.is_finite())) || !(m1 >= 1.0) {
            return Err(crate::error::invalid(
                "counts",
                "must be finite and nonnegative with m1 >= 1",
            ));
        }
        Ok(Self {
            ln_counts: counts.iter().map(|c| c.ln()).collect(),
            ln_m1: m1.ln(),
            flavor,
        })
    }

    /// `binom(N, k)` for every `k`: the distribution of `{±1}^N` in either flavor.
    pub fn full_space(n: usize, flavor: DistributionFlavor) -> Self {
        Self {
            ln_counts: ln_binomial_row(n),
            ln_m1: n as f64 * std::f64::consts::LN_2,
            flavor,
        }
    }

    /// Code length `N`.
    pub fn n(&self) -> usize {
        self.ln_counts.len() - 1
    }

    pub fn flavor(&self) -> DistributionFlavor {
        self.flavor
    }

    pub fn ln_counts(&self) -> &[f64] {
        &self.ln_counts
    }

    pub fn counts(&self) -> Vec<f64> {
        self.ln_counts.iter().map(|c| c.exp()).collect()
    }

    pub fn ln_m1(&self) -> f64 {
        self.ln_m1
    }

    pub fn m1(&self) -> f64 {
        self.ln_m1.exp()
    }

    /// `ln Σ_k W_k`, which equals `ln M1` for a consistent distribution.
    pub fn ln_total(&self) -> f64 {
        log_sum_exp(self.ln_counts.iter().copied())
    }

    /// `W_k = W_{N-k}` for all `k`, up to a relative tolerance of `1e-12`.
    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (0..=n / 2).all(|k| {
            let (a, b) = (self.ln_counts[k], self.ln_counts[n - k]);
            a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0))
        })
    }
}

/// Word bits packed into `u64` chunks for XOR/popcount distance.
fn pack(c: &Codeword) -> Vec<u64> {
    c.symbols()
        .chunks(64)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &s)| acc | (u64::from(s < 0) << i))
        })
        .collect()
}

/// `W_k° = |{(c', c'') : d(c', c'') = k}| / M1` over all ordered pairs, including `(c, c)`.
pub fn distance_distribution(code: &[Codeword]) -> Result<DistanceDistribution> {
    let n = code.first().map(Codeword::len).ok_or(Error::EmptyCode)?;
    if let Some(w) = code.iter().find(|w| w.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: w.len(),
        });
    }
    let packed: Vec<Vec<u64>> = code.iter().map(pack).collect();
    let mut pairs = vec![0u64; n + 1];
    for (i, a) in packed.iter().enumerate() {
        pairs[0] += 1;
        for b in &packed[i + 1..] {
            let d: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
            pairs[d as usize] += 2;
        }
    }
    let m1 = code.len() as f64;
    let counts: Vec<f64> = pairs.iter().map(|&p| p as f64 / m1).collect();
    DistanceDistribution::from_counts(&counts, m1, DistributionFlavor::Distance)
}

/// `W_k = |{c : w(c) = k}|` for a linear code.
pub fn weight_distribution(spec: &CodeSpec) -> Result<DistanceDistribution> {
    match spec {
        CodeSpec::Uncoded(n) => Ok(DistanceDistribution::full_space(*n, DistributionFlavor::Weight)),
        CodeSpec::Generator(_) => {
            let words = enumerate_code(spec)?;
            let mut counts = vec![0f64; spec.n() + 1];
            for w in &words {
                counts[w.weight()] += 1.0;
            }
            DistanceDistribution::from_counts(&counts, words.len() as f64, DistributionFlavor::Weight)
        }
        CodeSpec::Explicit(_) => Err(Error::NotLinear),
    }
}

/// Smallest `C_w ≥ 0` with `W_k° ≤ (1 + C_w) binom(N, k) / 2^{N - k_b}` for every `k`.
pub fn check_wcond(dist: &DistanceDistribution, k_bits: f64) -> Result<f64> {
    let n = dist.n();
    let ln_binom = ln_binomial_row(n);
    let shift = (n as f64 - k_bits) * std::f64::consts::LN_2;
    let mut worst = f64::NEG_INFINITY;
    for (k, (&w, &b)) in dist.ln_counts().iter().zip(&ln_binom).enumerate() {
        if w == f64::NEG_INFINITY {
            continue;
        }
        if b == f64::NEG_INFINITY {
            return Err(Error::Infeasible { k });
        }
        worst = worst.max(w + shift - b);
    }
    // exp_m1 keeps C_w = 0 exact when the worst ratio is exactly one.
    Ok(worst.exp_m1().max(0.0))
}

/// Outcome of the symmetrization inequality check on one code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    pub code_size: usize,
    pub union_code_size: usize,
    pub exceed: usize,
    pub union_exceed: usize,
    /// `|A| / |C_A|`.
    pub ratio_a: f64,
    /// `|A ∪ B| / |C_A ∪ C_B|`.
    pub ratio_union: f64,
    /// `|A|/|C_A| ≤ 2 |A∪B|/|C_A∪C_B|`.
    pub lower_holds: bool,
    /// `2 |A∪B|/|C_A∪C_B| ≤ 4 |A|/|C_A|`.
    pub upper_holds: bool,
}

impl Lemma1Report {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Checks `|A|/|C_A| ≤ 2|A∪B|/|C_A∪C_B| ≤ 4|A|/|C_A|`, where `C_B` is `C_A`
/// negated and `A`, `B` are the words with crest factor above `x`.
///
/// Comparisons are done by integer cross-multiplication.
pub fn verify_lemma1(code_a: &[Codeword], x: f64, oversampling: usize) -> Result<Lemma1Report> {
    let n = code_a.first().map(Codeword::len).ok_or(Error::EmptyCode)?;
    let mut syn = Synthesizer::new(n, oversampling)?;
    let mut mags = Vec::new();
    let mut exceeds = |c: &Codeword| -> Result<bool> {
        syn.magnitudes_into(c, &mut mags)?;
        Ok(mags.iter().copied().fold(0.0, f64::max) > x)
    };

    let ca: HashSet<Codeword> = code_a.iter().cloned().collect();
    let cb: HashSet<Codeword> = ca.iter().map(Codeword::negated).collect();
    let union: HashSet<&Codeword> = ca.iter().chain(cb.iter()).collect();

    let mut a_count = 0usize;
    for c in &ca {
        if exceeds(c)? {
            a_count += 1;
        }
    }
    let mut union_count = 0usize;
    for c in &union {
        if exceeds(c)? {
            union_count += 1;
        }
    }

    let (a, ca_n) = (a_count as u128, ca.len() as u128);
    let (ab, u_n) = (union_count as u128, union.len() as u128);
    Ok(Lemma1Report {
        code_size: ca.len(),
        union_code_size: union.len(),
        exceed: a_count,
        union_exceed: union_count,
        ratio_a: a_count as f64 / ca.len() as f64,
        ratio_union: union_count as f64 / union.len() as f64,
        lower_holds: a * u_n <= 2 * ab * ca_n,
        upper_holds: 2 * ab * ca_n <= 4 * a * u_n,
    })
}
