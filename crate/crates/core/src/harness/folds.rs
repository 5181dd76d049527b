use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Splits document indices into `k` folds, stratified by
/// (disease, label). Each stratum is shuffled and dealt round-robin; the
/// deal continues across strata so overall fold sizes stay balanced too.
/// Indices within a fold are ascending.
pub fn stratified_kfold(docs: &[Document], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > docs.len() {
        return Err(Error::invalid(format!("{k} folds for {} documents", docs.len())));
    }
    let mut strata: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, d) in docs.iter().enumerate() {
        strata.entry((d.disease, d.label)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices not in `folds[test]`, ascending.
pub fn train_indices(folds: &[Vec<usize>], test: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != test)
        .flat_map(|(_, v)| v.iter().copied())
        .collect();
    idx.sort_unstable();
    idx
}
