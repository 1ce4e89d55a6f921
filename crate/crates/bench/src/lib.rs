//! Fixtures shared by the solver benchmarks.

use bss_core::generate::generate;
use bss_core::{GenParams, Instance};

/// Seed used for every benchmark instance, so runs compare like with like.
pub const BENCH_SEED: u64 = 2008;

/// The default generated instance with `n_bts` sites.
pub fn instance(n_bts: usize) -> Instance {
    generate(&GenParams::new(n_bts, BENCH_SEED)).expect("default parameters are valid")
}
