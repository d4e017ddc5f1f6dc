//! BPSK codewords, oversampled OFDM baseband synthesis and the `(θ, α)` projection lattice.
//!
//! A codeword `c` of length `N` produces the baseband symbol
//! `S(θ) = N^{-1/2} Σ_k c_k e^{jkθ}`. The sampling grid is
//! `θ_l = 2πl / (2LN)` for `0 ≤ l < LN`, i.e. only the half circle `[0, π)`.
//! For real (BPSK) symbols `|S(θ)| = |S(2π - θ)|`, so the half circle
//! carries every distinct magnitude.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A length-`N` block of BPSK symbols, each exactly `+1` or `-1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword(Vec<i8>);

impl Codeword {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyCodeword);
        }
        if let Some((index, &v)) = symbols.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(Error::InvalidSymbol { index, value: v as f64 });
        }
        Ok(Self(symbols))
    }

    /// Builds a codeword from real symbols; anything other than exactly `±1.0` is rejected.
    pub fn from_reals(symbols: &[f64]) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyCodeword);
        }
        symbols
            .iter()
            .enumerate()
            .map(|(index, &v)| match v {
                1.0 => Ok(1),
                -1.0 => Ok(-1),
                value => Err(Error::InvalidSymbol { index, value }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Maps bit `b` to symbol `1 - 2b`, so a binary one becomes `-1`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyCodeword);
        }
        bits.iter()
            .enumerate()
            .map(|(index, &b)| match b {
                0 => Ok(1),
                1 => Ok(-1),
                other => Err(Error::InvalidSymbol {
                    index,
                    value: other as f64,
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[i8] {
        &self.0
    }

    /// Symbol-wise negation, i.e. adding the binary all-one word.
    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Hamming weight: the number of `-1` symbols.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&s| s < 0).count()
    }

    pub fn distance(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect();
        write!(f, "Codeword({s})")
    }
}

/// Samples `S(θ_l)` for `0 ≤ l < LN`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    n_subcarriers: usize,
    oversampling: usize,
}

impl SampledSignal {
    pub fn from_parts(samples: Vec<Complex64>, n_subcarriers: usize, oversampling: usize) -> Result<Self> {
        if oversampling == 0 {
            return Err(Error::InvalidOversampling(oversampling));
        }
        if n_subcarriers == 0 {
            return Err(Error::EmptyCodeword);
        }
        if samples.len() != n_subcarriers * oversampling {
            return Err(Error::LengthMismatch {
                expected: n_subcarriers * oversampling,
                found: samples.len(),
            });
        }
        Ok(Self {
            samples,
            n_subcarriers,
            oversampling,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid angle of sample `l`.
    pub fn theta(&self, l: usize) -> f64 {
        theta_point(l, self.oversampling, self.n_subcarriers)
    }

    /// `Re(S(θ_l) e^{jα})`.
    pub fn projection(&self, l: usize, alpha: f64) -> f64 {
        (self.samples[l] * Complex64::from_polar(1.0, alpha)).re
    }
}

#[inline]
fn theta_point(l: usize, oversampling: usize, n: usize) -> f64 {
    2.0 * PI * l as f64 / (2 * oversampling * n) as f64
}

/// The two-dimensional lattice of sample angles `θ_{l,L}` and rotations `α_{l,K} = 2πl/K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    n: usize,
    oversampling: usize,
    projections: u32,
}

impl Lattice {
    pub fn new(n: usize, oversampling: usize, projections: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCodeword);
        }
        if oversampling == 0 {
            return Err(Error::InvalidOversampling(oversampling));
        }
        if projections < 3 {
            return Err(Error::InvalidProjectionCount(projections));
        }
        Ok(Self {
            n,
            oversampling,
            projections,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn projections(&self) -> u32 {
        self.projections
    }

    /// Number of lattice points, `LNK`.
    pub fn len(&self) -> usize {
        self.oversampling * self.n * self.projections as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta_points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.oversampling * self.n).map(move |l| theta_point(l, self.oversampling, self.n))
    }

    pub fn alpha_points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.projections).map(move |l| 2.0 * PI * l as f64 / self.projections as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta_points()
            .flat_map(move |t| self.alpha_points().map(move |a| (t, a)))
    }
}

/// Zero-padded inverse-FFT synthesizer for a fixed `(N, L)`.
///
/// Holds the transform plan and work buffers so that Monte Carlo loops do not
/// re-plan per trial. One instance per worker thread.
pub struct Synthesizer {
    n: usize,
    oversampling: usize,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for Synthesizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Synthesizer")
            .field("n", &self.n)
            .field("oversampling", &self.oversampling)
            .finish()
    }
}

impl Synthesizer {
    pub fn new(n: usize, oversampling: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCodeword);
        }
        if oversampling == 0 {
            return Err(Error::InvalidOversampling(oversampling));
        }
        let len = 2 * oversampling * n;
        let fft = FftPlanner::new().plan_fft_inverse(len);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            n,
            oversampling,
            fft,
            buffer: vec![Complex64::default(); len],
            scratch,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Fills the internal buffer with all `2LN` samples of the full circle.
    fn transform(&mut self, c: &Codeword) -> Result<()> {
        if c.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: c.len(),
            });
        }
        let scale = 1.0 / (self.n as f64).sqrt();
        self.buffer.fill(Complex64::default());
        for (b, &s) in self.buffer.iter_mut().zip(c.symbols()) {
            *b = Complex64::new(s as f64 * scale, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buffer, &mut self.scratch);
        Ok(())
    }

    pub fn synthesize(&mut self, c: &Codeword) -> Result<SampledSignal> {
        self.transform(c)?;
        let ln = self.oversampling * self.n;
        SampledSignal::from_parts(self.buffer[..ln].to_vec(), self.n, self.oversampling)
    }

    /// Magnitudes `|S(θ_l)|` on the half-circle grid, without allocating a signal.
    pub fn magnitudes_into(&mut self, c: &Codeword, out: &mut Vec<f64>) -> Result<()> {
        self.transform(c)?;
        let ln = self.oversampling * self.n;
        out.clear();
        out.extend(self.buffer[..ln].iter().map(|z| z.norm()));
        Ok(())
    }

    /// All `2LN` samples `S(2πl/(2LN))` covering `[0, 2π)`.
    pub fn full_circle(&mut self, c: &Codeword) -> Result<Vec<Complex64>> {
        self.transform(c)?;
        Ok(self.buffer.clone())
    }
}

/// Samples of `S(θ_{l,L})` for `0 ≤ l < LN`.
pub fn synthesize(c: &Codeword, oversampling: usize) -> Result<SampledSignal> {
    if c.is_empty() {
        return Err(Error::EmptyCodeword);
    }
    Synthesizer::new(c.len(), oversampling)?.synthesize(c)
}

/// `2LN` samples of `S` over the full circle `[0, 2π)`; the first `LN` equal [`synthesize`].
pub fn synthesize_full_circle(c: &Codeword, oversampling: usize) -> Result<Vec<Complex64>> {
    if c.is_empty() {
        return Err(Error::EmptyCodeword);
    }
    Synthesizer::new(c.len(), oversampling)?.full_circle(c)
}

/// `Re(S(θ) e^{jα}) = N^{-1/2} Σ_k c_k cos(kθ + α)`, valid for any real `θ`.
pub fn phase_projection(c: &Codeword, theta: f64, alpha: f64) -> f64 {
    let sum: f64 = c
        .symbols()
        .iter()
        .enumerate()
        .map(|(k, &s)| s as f64 * (k as f64 * theta + alpha).cos())
        .sum();
    sum / (c.len() as f64).sqrt()
}

/// `Ψ_N(θ, α) = Σ_{k<N} cos²(kθ + α)`, always in `[0, N]`.
pub fn psi(theta: f64, alpha: f64, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let c = (k as f64 * theta + alpha).cos();
            c * c
        })
        .sum()
}
