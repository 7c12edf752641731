use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AttributionError;

/// Uniform sample of `n` ids without replacement, determined by `seed` and
/// the id set alone (input order does not matter). Returned sorted.
pub fn sample_tasks<S: AsRef<str>>(task_ids: &[S], n: usize, seed: u64) -> Result<Vec<String>, AttributionError> {
    let mut ids: Vec<&str> = task_ids.iter().map(AsRef::as_ref).collect();
    ids.sort_unstable();
    ids.dedup();
    if n > ids.len() {
        return Err(AttributionError::SampleTooLarge {
            requested: n,
            available: ids.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<String> = rand::seq::index::sample(&mut rng, ids.len(), n)
        .into_iter()
        .map(|i| ids[i].to_string())
        .collect();
    picked.sort();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("task{i:03}")).collect()
    }

    #[test]
    fn same_seed_same_sample_regardless_of_order() {
        let mut shuffled = ids(149);
        shuffled.reverse();
        let a = sample_tasks(&ids(149), 50, 7).unwrap();
        assert_eq!(a, sample_tasks(&shuffled, 50, 7).unwrap());
        assert_eq!(a.len(), 50);
        let unique: std::collections::BTreeSet<_> = a.iter().collect();
        assert_eq!(unique.len(), 50);
        assert_ne!(a, sample_tasks(&ids(149), 50, 8).unwrap());
    }

    #[test]
    fn too_many_is_an_error() {
        assert!(matches!(
            sample_tasks(&ids(10), 11, 0),
            Err(AttributionError::SampleTooLarge { requested: 11, available: 10 })
        ));
        assert_eq!(sample_tasks(&ids(10), 10, 0).unwrap(), ids(10));
    }
}
