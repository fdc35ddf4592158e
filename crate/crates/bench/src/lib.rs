//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqpovm::random::{random_hermitian, random_mixed_state, random_povm};
use seqpovm::{ComplexMatrix, Povm, State};

pub const SEED: u64 = 0xbe7c4;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

pub fn hermitian(dim: usize) -> ComplexMatrix {
    random_hermitian(&mut rng(), dim)
}

/// A random `outcomes`-outcome POVM on `dim` together with a mixed input.
pub fn povm_and_state(outcomes: usize, dim: usize) -> (Povm, State) {
    let mut r = rng();
    let p = random_povm(&mut r, outcomes, dim);
    let s = random_mixed_state(&mut r, dim);
    (p, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(hermitian(4), hermitian(4));
        let (p, s) = povm_and_state(5, 3);
        assert_eq!((p.len(), p.dim(), s.dim()), (5, 3, 3));
        assert_eq!(povm_and_state(5, 3).1, s);
    }
}
