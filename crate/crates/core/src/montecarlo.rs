//! Seed-deterministic parallel trial engine.
//!
//! Trial `t` draws from its own ChaCha stream keyed by `(seed, t)`, so the
//! results depend only on the seed and the trial index, never on how rayon
//! schedules the work or how many threads it has.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{sample_codeword, CodeSpec};
use crate::error::Result;
use crate::signal::{Codeword, Synthesizer};

/// Independent random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent draws from `spec`, applying `f` to each sampled
/// codeword, and returns the results in trial order.
pub fn run_trials<T, F>(spec: &CodeSpec, oversampling: usize, trials: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Codeword, &mut Synthesizer) -> T + Sync,
{
    let n = spec.n();
    // Validate once so the per-thread constructor below cannot fail.
    Synthesizer::new(n, oversampling)?;
    let out = (0..trials)
        .into_par_iter()
        .map_init(
            || Synthesizer::new(n, oversampling).expect("validated above"),
            |syn, t| {
                let mut rng = trial_rng(seed, t as u64);
                let c = sample_codeword(spec, &mut rng);
                f(&c, syn)
            },
        )
        .collect();
    Ok(out)
}
