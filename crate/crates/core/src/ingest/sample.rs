use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LabeledCollection, LabeledItem};
use crate::{Error, Result};

/// Draws exactly `total / 2` items from each class without replacement, then
/// shuffles the union. Deterministic for a given seed.
pub fn stratified_sample(
    coll: &LabeledCollection,
    total: usize,
    seed: u64,
) -> Result<LabeledCollection> {
    if total == 0 || !total.is_multiple_of(2) {
        return Err(Error::InvalidSampleSize(format!(
            "balanced sample size must be a positive even number, got {total}"
        )));
    }
    let half = total / 2;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, item) in coll.items.iter().enumerate() {
        by_class[item.label as usize].push(i);
    }
    for (label, members) in by_class.iter().enumerate() {
        if members.len() < half {
            return Err(Error::InsufficientClass {
                label: label as u8,
                available: members.len(),
                needed: half,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = Vec::with_capacity(total);
    for members in &by_class {
        let mut chosen = index::sample(&mut rng, members.len(), half).into_vec();
        chosen.sort_unstable();
        picked.extend(chosen.into_iter().map(|c| members[c]));
    }
    picked.shuffle(&mut rng);

    let items: Vec<LabeledItem> = picked.into_iter().map(|i| coll.items[i].clone()).collect();
    Ok(coll.with_items(items, &format!("balanced sample of {total}, seed {seed}")))
}

/// Draws `total` items uniformly without replacement, ignoring labels.
pub fn uniform_sample(
    coll: &LabeledCollection,
    total: usize,
    seed: u64,
) -> Result<LabeledCollection> {
    if total == 0 || total > coll.len() {
        return Err(Error::InvalidSampleSize(format!(
            "cannot draw {total} items from a collection of {}",
            coll.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, coll.len(), total).into_vec();
    picked.sort_unstable();
    picked.shuffle(&mut rng);
    let items = picked.into_iter().map(|i| coll.items[i].clone()).collect();
    Ok(coll.with_items(items, &format!("uniform sample of {total}, seed {seed}")))
}
