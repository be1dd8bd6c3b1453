//! Seeded k-fold index splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::{Error, Prng, Result};

/// Splits `0..n_records` into `k` disjoint folds whose sizes differ by at
/// most one, shuffled by `seed`.
pub fn kfold_split(n_records: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k must be >= 2, got {k}")));
    }
    if n_records < k {
        return Err(Error::Config(format!(
            "cannot split {n_records} records into {k} folds"
        )));
    }
    let mut indices: Vec<usize> = (0..n_records).collect();
    let mut rng = Prng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let base = n_records / k;
    let remainder = n_records % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < remainder);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Complement of one fold: the training indices for that round.
pub fn fold_complement(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    folds
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != held_out)
        .flat_map(|(_, f)| f.iter().copied())
        .collect()
}
