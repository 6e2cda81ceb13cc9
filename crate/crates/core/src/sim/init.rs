use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::InitMode;
use crate::error::{Error, Result};
use crate::Scalar;

/// Uniform draw on [0, 1) from the top 53 bits of a 64-bit word.
fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Initial residual capacities for `n` receivers, mAh.
///
/// Uniform mode runs SplitMix64 from state `seed`; receiver `i` takes the
/// `i`-th output `x` and starts at `full_capacity * (x >> 11) / 2^53`.
/// SplitMix64's `i`-th output is a pure function of `seed + (i + 1) * γ`,
/// so each receiver's draw is independent of how many others exist.
pub fn init_capacities<T: Scalar>(
    n: usize,
    mode: InitMode,
    seed: Option<u64>,
    full_capacity: T,
) -> Result<Vec<T>> {
    match mode {
        InitMode::Zero => Ok(vec![T::zero(); n]),
        InitMode::Uniform => {
            let seed = seed.ok_or(Error::MissingSeed)?;
            let mut rng = SplitMix64::seed_from_u64(seed);
            Ok((0..n)
                .map(|_| {
                    let c = T::lit(unit_interval(rng.next_u64())) * full_capacity;
                    // f32 rounding can land exactly on full
                    if c >= full_capacity {
                        full_capacity - full_capacity * T::epsilon()
                    } else {
                        c
                    }
                })
                .collect())
        }
    }
}
