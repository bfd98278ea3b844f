//! Deterministic replicate-parallel Monte Carlo.
//!
//! Replicates are grouped in fixed batches of [`BATCH`]; batch `b` draws from
//! ChaCha stream `b` of the user seed. Per-batch moments are folded in batch
//! order, so results are bit-identical whatever the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{usage, Result};

pub type McRng = ChaCha8Rng;

/// Replicates per rng sub-stream.
pub const BATCH: usize = 1024;

/// The rng for sub-stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McSpec {
    pub replicates: usize,
    pub seed: u64,
}

impl McSpec {
    pub fn new(replicates: usize, seed: u64) -> Self {
        McSpec { replicates, seed }
    }

    /// Same replicate count, an unrelated seed. Used when one experiment
    /// needs several independent runs.
    pub fn derive(&self, salt: u64) -> McSpec {
        let mixed = self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
        McSpec { replicates: self.replicates, seed: mixed }
    }

    pub fn with_replicates(&self, replicates: usize) -> McSpec {
        McSpec { replicates, seed: self.seed }
    }
}

/// Running mean and sum of squared deviations (Welford, Chan merge).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Runs `spec.replicates` replicates of `f`, each writing `width` statistics
/// into its output slice, and returns the moments of every statistic.
///
/// `init` builds per-worker scratch state (buffers, samplers). It must not
/// hold randomness: all randomness comes from the rng handed to `f`.
pub fn replicate<S, I, F>(spec: &McSpec, width: usize, init: I, f: F) -> Result<Vec<Moments>>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut McRng, &mut [f64]) -> Result<()> + Sync + Send,
{
    if spec.replicates == 0 {
        return usage("at least one replicate is required");
    }
    let batches = spec.replicates.div_ceil(BATCH);
    let run_batch = |state: &mut S, b: usize| -> Result<Vec<Moments>> {
        let mut rng = stream(spec.seed, b as u64);
        let mut out = vec![0.0; width];
        let mut acc = vec![Moments::default(); width];
        let count = BATCH.min(spec.replicates - b * BATCH);
        for _ in 0..count {
            out.iter_mut().for_each(|v| *v = 0.0);
            f(state, &mut rng, &mut out)?;
            for (m, &x) in acc.iter_mut().zip(&out) {
                m.push(x);
            }
        }
        Ok(acc)
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Vec<Moments>>> = {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map_init(&init, run_batch).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Vec<Moments>>> = {
        let mut state = init();
        (0..batches).map(|b| run_batch(&mut state, b)).collect()
    };

    let mut total = vec![Moments::default(); width];
    for part in parts {
        for (t, m) in total.iter_mut().zip(part?) {
            t.merge(&m);
        }
    }
    Ok(total)
}

/// Collects `spec.replicates` raw values of a scalar statistic, in
/// replicate order. Used where the full sample is needed (quantiles,
/// empirical distribution functions).
pub fn collect<S, I, F>(spec: &McSpec, init: I, f: F) -> Result<Vec<f64>>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut McRng) -> Result<f64> + Sync + Send,
{
    if spec.replicates == 0 {
        return usage("at least one replicate is required");
    }
    let batches = spec.replicates.div_ceil(BATCH);
    let run_batch = |state: &mut S, b: usize| -> Result<Vec<f64>> {
        let mut rng = stream(spec.seed, b as u64);
        let count = BATCH.min(spec.replicates - b * BATCH);
        (0..count).map(|_| f(state, &mut rng)).collect()
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Vec<f64>>> = {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map_init(&init, run_batch).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Vec<f64>>> = {
        let mut state = init();
        (0..batches).map(|b| run_batch(&mut state, b)).collect()
    };

    let mut all = Vec::with_capacity(spec.replicates);
    for part in parts {
        all.extend(part?);
    }
    Ok(all)
}
