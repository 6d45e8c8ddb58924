use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::SliceType;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            stratified: true,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec { seed, ..Self::default() }
    }
}

/// Sorted, disjoint index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Each class (or the whole set when unstratified) is shuffled with its own
/// stream and `round((1 - f) * c)` members go to test. A class with a single
/// sample therefore stays in train.
pub fn stratified_split(labels: &[SliceType], spec: &SplitSpec) -> Result<Split> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "train fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let groups: Vec<Vec<usize>> = if spec.stratified {
        SliceType::ALL
            .iter()
            .map(|&s| (0..labels.len()).filter(|&i| labels[i] == s).collect::<Vec<_>>())
            .collect()
    } else {
        vec![(0..labels.len()).collect()]
    };
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::new();
    for (g, mut idx) in groups.into_iter().enumerate() {
        if idx.is_empty() {
            let what = if spec.stratified { SliceType::ALL[g].name() } else { "dataset" };
            return Err(Error::Data(format!("cannot split: {what} has no samples")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(g as u64 + 1);
        idx.shuffle(&mut rng);
        let n_test = ((1.0 - spec.train_fraction) * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(counts: [usize; 3]) -> Vec<SliceType> {
        SliceType::ALL
            .iter()
            .zip(counts)
            .flat_map(|(&s, c)| std::iter::repeat_n(s, c))
            .collect()
    }

    fn test_counts(l: &[SliceType], s: &Split) -> [usize; 3] {
        let mut c = [0; 3];
        for &i in &s.test {
            c[l[i].index()] += 1;
        }
        c
    }

    #[test]
    fn full_scale_proportions() {
        let l = labels([6000, 3000, 21_000]);
        let s = stratified_split(&l, &SplitSpec::with_seed(7)).unwrap();
        assert_eq!(test_counts(&l, &s), [1200, 600, 4200]);
        assert_eq!(s.train.len(), 24_000);
    }

    #[test]
    fn ten_sample_edge_case() {
        let l = labels([2, 1, 7]);
        let s = stratified_split(&l, &SplitSpec::with_seed(1)).unwrap();
        let c = test_counts(&l, &s);
        for (k, total) in [2usize, 1, 7].into_iter().enumerate() {
            let exact = 0.2 * total as f64;
            assert!(c[k] == exact.floor() as usize || c[k] == exact.ceil() as usize);
        }
        let mut all: Vec<_> = s.train.iter().chain(&s.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn empty_class_is_data_error() {
        let l = labels([5, 0, 5]);
        assert!(matches!(stratified_split(&l, &SplitSpec::default()), Err(Error::Data(_))));
    }

    #[test]
    fn bad_fraction_rejected() {
        let l = labels([5, 5, 5]);
        let spec = SplitSpec { train_fraction: 1.0, ..Default::default() };
        assert!(stratified_split(&l, &spec).is_err());
    }

    #[test]
    fn seeds_matter() {
        let l = labels([50, 50, 50]);
        let a = stratified_split(&l, &SplitSpec::with_seed(1)).unwrap();
        let b = stratified_split(&l, &SplitSpec::with_seed(2)).unwrap();
        assert_ne!(a, b);
    }

    proptest! {
        #[test]
        fn disjoint_exhaustive_deterministic(
            counts in proptest::array::uniform3(1usize..200),
            seed in any::<u64>(),
            stratified in any::<bool>(),
        ) {
            let l = labels(counts);
            let spec = SplitSpec { seed, stratified, ..Default::default() };
            let s = stratified_split(&l, &spec).unwrap();
            prop_assert_eq!(&s, &stratified_split(&l, &spec).unwrap());
            let mut all: Vec<_> = s.train.iter().chain(&s.test).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
            if stratified {
                let tc = test_counts(&l, &s);
                for k in 0..3 {
                    let train_k = counts[k] - tc[k];
                    let target = 0.8 * counts[k] as f64;
                    prop_assert!((train_k as f64 - target).abs() <= 1.0);
                }
            }
        }
    }
}
