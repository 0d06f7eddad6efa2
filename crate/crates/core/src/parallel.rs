//! Path-level data parallelism with a sequential fallback.
//!
//! Every Monte Carlo sample owns an RNG stream derived from `(seed, index)`,
//! and results are collected in index order before any reduction, so the
//! output is bit-identical whichever execution mode produced it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
    #[cfg(not(feature = "parallel"))]
    #[default]
    Auto,
}

/// Independent stream for sample `index` under master `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f(0), …, f(count - 1)` and returns the results in index order.
pub fn map_indexed<T, F>(count: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}
