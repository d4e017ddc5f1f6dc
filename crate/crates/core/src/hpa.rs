//! Memoryless amplifier models acting on the sampled signal.
//!
//! Both models report their output as `Φ(S) = S + D`. The stored output is
//! formed as `original + distortion`, so the decomposition is exact in
//! floating point rather than merely within rounding.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::signal::SampledSignal;

/// Soft envelope limiter with saturation level `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelParams {
    lambda: f64,
}

impl SelParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("must be finite and > 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Cubic polynomial model `a·S + b·S|S|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicParams {
    a: f64,
    b: f64,
}

impl CubicParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid("a", format!("must be finite and > 0, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(invalid("b", format!("must be finite and > 0, got {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Amplifier output together with the distortion `D = Φ(S) - S`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionRecord {
    clipped: SampledSignal,
    distortion: Vec<Complex64>,
}

impl DistortionRecord {
    /// `Φ(S)` per sample.
    pub fn clipped(&self) -> &SampledSignal {
        &self.clipped
    }

    pub fn distortion(&self) -> &[Complex64] {
        &self.distortion
    }

    fn build(original: &SampledSignal, distortion: Vec<Complex64>) -> Self {
        let out = original.samples().iter().zip(&distortion).map(|(s, d)| s + d).collect();
        let clipped = SampledSignal::from_parts(out, original.n_subcarriers(), original.oversampling())
            .expect("shape copied from a valid signal");
        Self { clipped, distortion }
    }
}

/// Distortion of one SEL sample. Samples with `|s| ≤ λ` pass untouched.
///
/// For clipped samples the scale is nudged down until the rounded output
/// `s + d` has magnitude at most `λ`, which makes the limiter idempotent.
fn sel_distortion(s: Complex64, lambda: f64) -> Complex64 {
    let mag = s.norm();
    if mag <= lambda {
        return Complex64::default();
    }
    let mut scale = lambda / mag;
    loop {
        let d = s * scale - s;
        if (s + d).norm() <= lambda {
            return d;
        }
        scale *= 1.0 - f64::EPSILON;
    }
}

pub fn apply_sel(s: &SampledSignal, p: &SelParams) -> DistortionRecord {
    let d = s.samples().iter().map(|&z| sel_distortion(z, p.lambda)).collect();
    DistortionRecord::build(s, d)
}

pub fn apply_cubic(s: &SampledSignal, p: &CubicParams) -> DistortionRecord {
    let d = s
        .samples()
        .iter()
        .map(|&z| (p.a * z + p.b * z * z.norm_sqr()) - z)
        .collect();
    DistortionRecord::build(s, d)
}
