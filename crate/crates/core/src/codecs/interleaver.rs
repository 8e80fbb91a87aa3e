//! Seeded pseudo-random interleavers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A permutation of `0..len`; position `k` of the interleaved frame carries
/// input position `perm[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "interleaver length must be at least 1".into(),
            ));
        }
        let mut inverse = vec![usize::MAX; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "not a permutation of 0..{n}: entry {p} at {k}"
                )));
            }
            inverse[p] = k;
        }
        Ok(Self { perm, inverse })
    }

    pub fn identity(len: usize) -> Result<Self> {
        Self::from_permutation((0..len).collect())
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        debug_assert_eq!(input.len(), self.len());
        self.perm.iter().map(|&p| input[p]).collect()
    }

    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        debug_assert_eq!(input.len(), self.len());
        self.inverse.iter().map(|&k| input[k]).collect()
    }
}

/// Uniformly random permutation of `0..len` (Fisher-Yates), fixed by `seed`.
pub fn make_interleaver(len: usize, seed: u64) -> Result<Interleaver> {
    let mut perm: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    Interleaver::from_permutation(perm)
}
