//! Crest-factor analysis for BPSK-coded OFDM.
//!
//! The crate covers the whole chain from a codeword to a tail probability:
//!
//! - [`signal`]: oversampled baseband synthesis and the `(θ, α)` projection lattice
//! - [`hpa`]: soft envelope limiter and cubic amplifier models with their distortion
//! - [`codes`]: code sources, distance/weight distributions, the symmetrization check
//! - [`metrics`]: crest factor, CCDF curves, effective crest factor, AOM, crossing counts
//! - [`bounds`]: union-Chernoff and distance-distribution CCDF bounds, balancing bounds
//! - [`montecarlo`]: seed-deterministic parallel trials
//!
//! ```
//! use ofdm_cf::{codes::CodeSpec, metrics};
//!
//! let spec = CodeSpec::uncoded(8).unwrap();
//! let curve = metrics::exact_ccdf(&spec, 4, &[1.0, 2.0, 2.5]).unwrap();
//! assert_eq!(curve.trials(), 256);
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod codes;
pub mod error;
pub mod hpa;
pub mod metrics;
pub mod montecarlo;
pub mod numeric;
pub mod signal;

pub use error::{Error, Result};
