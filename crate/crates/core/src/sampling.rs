//! Uniform (Fubini–Study) sampling of `CP^n` in reproducible chunked streams.
//!
//! A draw is `2(n+1)` independent standard normals used as real and imaginary
//! parts, then normalized; the induced law on `CP^n` is the unitarily invariant
//! one. Work is split into `chunks` contiguous blocks, block `c` drawing from a
//! ChaCha8 stream keyed by `(seed, c)`. Blocks are always visited and reduced
//! in index order, so any schedule that respects that order is bit-identical.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::PureState;
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FsSampler {
    dim: usize,
    count: usize,
    seed: u64,
    chunks: usize,
}

impl FsSampler {
    pub fn new(dim: usize, count: usize, seed: u64, chunks: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if count == 0 {
            return Err(Error::param("count", "must be at least 1"));
        }
        if chunks == 0 {
            return Err(Error::param("chunks", "must be at least 1"));
        }
        Ok(FsSampler {
            dim,
            count,
            seed,
            chunks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunks(&self) -> usize {
        self.chunks
    }

    /// Global sample indices owned by `chunk`; the first `count % chunks`
    /// chunks take one extra sample.
    pub fn chunk_range(&self, chunk: usize) -> Range<usize> {
        let base = self.count / self.chunks;
        let extra = self.count % self.chunks;
        let start = chunk * base + chunk.min(extra);
        let len = base + usize::from(chunk < extra);
        start..start + len
    }

    fn rng_for(&self, chunk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk as u64);
        rng
    }

    /// Feeds every unit amplitude vector of `chunk` to `f`, in order.
    pub fn for_each_in_chunk<F: FnMut(&[C64])>(&self, chunk: usize, mut f: F) {
        let mut rng = self.rng_for(chunk);
        let mut buf = vec![C64::new(0.0, 0.0); self.dim];
        for _ in self.chunk_range(chunk) {
            draw_into(&mut rng, &mut buf);
            f(&buf);
        }
    }

    /// Runs `step` over every chunk with a fresh accumulator from `init`, and
    /// returns the per-chunk accumulators in chunk order.
    pub fn fold_chunks<A, I, S>(&self, init: I, mut step: S) -> Vec<A>
    where
        I: Fn() -> A,
        S: FnMut(&mut A, &[C64]),
    {
        (0..self.chunks)
            .map(|c| {
                let mut acc = init();
                self.for_each_in_chunk(c, |x| step(&mut acc, x));
                acc
            })
            .collect()
    }
}

fn draw_into(rng: &mut ChaCha8Rng, buf: &mut [C64]) {
    loop {
        let mut n2 = 0.0;
        for z in buf.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z = C64::new(re, im);
            n2 += re * re + im * im;
        }
        // A zero vector has probability zero but would poison the stream.
        if n2 > 1e-300 {
            let inv = 1.0 / n2.sqrt();
            buf.iter_mut().for_each(|z| *z *= inv);
            return;
        }
    }
}

/// Draws `count` states from the Fubini–Study measure on `CP^{dim-1}`.
pub fn sample_fs_uniform(
    dim: usize,
    count: usize,
    seed: u64,
    chunks: usize,
) -> Result<Vec<PureState>> {
    let sampler = FsSampler::new(dim, count, seed, chunks)?;
    let mut out = Vec::with_capacity(count);
    for c in 0..chunks {
        sampler.for_each_in_chunk(c, |x| out.push(PureState::from_unit(x.to_vec())));
    }
    Ok(out)
}
