//! Seeded train/test partitioning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Shuffles `data` deterministically by `seed` and splits it so the
/// training side gets ⌊ratio·n⌋ items and the test side the rest. The two
/// sides are disjoint and together contain every input item exactly once.
pub fn train_test_split<T: Clone>(data: &[T], ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if data.is_empty() {
        return Err(Error::EmptyInput {
            context: "train_test_split",
        });
    }
    if !(ratio.is_finite() && 0.0 < ratio && ratio < 1.0) {
        return Err(Error::InvalidParameter {
            name: "ratio",
            message: format!("`{}` must lie strictly between 0 and 1", ratio),
        });
    }

    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let cut = (ratio * data.len() as f64).floor() as usize;
    let train = indices[..cut].iter().map(|&i| data[i].clone()).collect();
    let test = indices[cut..].iter().map(|&i| data[i].clone()).collect();
    Ok((train, test))
}
