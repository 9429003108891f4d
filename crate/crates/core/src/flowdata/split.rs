use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::{seed, Error, Result};

fn class_indices(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l.min(1))].push(i);
    }
    by_class
}

/// Stratified train/validation split over labels, returning index lists.
///
/// Each class is shuffled and its first `round(count * train_fraction)`
/// members go to training; both outputs are then shuffled.
pub fn stratified_split_indices(
    labels: &[u8],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class = class_indices(labels);
    if by_class.iter().any(Vec::is_empty) {
        return Err(Error::Data(
            "stratified split needs both classes present".into(),
        ));
    }
    let mut rng = seed::derived_rng(seed, "split", 0);
    let (mut train, mut valid) = (Vec::new(), Vec::new());
    for members in &mut by_class {
        members.shuffle(&mut rng);
        let cut = (members.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&members[..cut]);
        valid.extend_from_slice(&members[cut..]);
    }
    train.shuffle(&mut rng);
    valid.shuffle(&mut rng);
    Ok((train, valid))
}

pub fn stratified_split(
    data: &[FeatureVector],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>)> {
    let labels: Vec<u8> = data.iter().map(|v| v.label).collect();
    let (train, valid) = stratified_split_indices(&labels, train_fraction, seed)?;
    Ok((
        train.iter().map(|&i| data[i]).collect(),
        valid.iter().map(|&i| data[i]).collect(),
    ))
}

/// Assignment of every example to one of `k` stratified folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// Indices assigned to `fold`.
    pub fn fold(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f == fold).then_some(i))
            .collect()
    }

    /// Indices outside `fold`, i.e. the training set for that fold.
    pub fn complement(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f != fold).then_some(i))
            .collect()
    }
}

/// Stratified k-fold assignment.
///
/// Classes are shuffled independently, laid end to end (benign first), and
/// dealt round-robin into folds, so each fold receives either the floor or
/// the ceiling of `class_count / k` members of every class.
pub fn stratified_kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    let mut by_class = class_indices(labels);
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::Data(format!(
                "class {class} has {} examples, fewer than k = {k}",
                members.len()
            )));
        }
    }
    let mut rng = seed::derived_rng(seed, "kfold", k as u64);
    let mut assignments = vec![0; labels.len()];
    let mut position = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

pub fn stratified_kfold(data: &[FeatureVector], k: usize, seed: u64) -> Result<FoldPlan> {
    let labels: Vec<u8> = data.iter().map(|v| v.label).collect();
    stratified_kfold_labels(&labels, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(pos: usize, neg: usize) -> Vec<u8> {
        let mut l = vec![1; pos];
        l.extend(vec![0; neg]);
        l
    }

    fn vectors(pos: usize, neg: usize) -> Vec<FeatureVector> {
        labels(pos, neg)
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let mut values = [0.0; 15];
                values[0] = i as f64;
                FeatureVector::new(values, l)
            })
            .collect()
    }

    #[test]
    fn split_counts_follow_fraction() {
        let data = vectors(80, 20);
        let (train, valid) = stratified_split(&data, 0.8, 3).unwrap();
        assert_eq!(super::super::class_counts(&train), [16, 64]);
        assert_eq!(super::super::class_counts(&valid), [4, 16]);
        let (again, _) = stratified_split(&data, 0.8, 3).unwrap();
        assert_eq!(train, again);
    }

    #[test]
    fn large_capture_split() {
        let (train, valid) = stratified_split_indices(&labels(5931, 2645), 0.8, 1).unwrap();
        let l = labels(5931, 2645);
        let pos = train.iter().filter(|&&i| l[i] == 1).count();
        assert_eq!(pos, 4745);
        assert_eq!(train.len() - pos, 2116);
        assert_eq!(train.len() + valid.len(), 8576);
    }

    #[test]
    fn split_rejects_single_class_and_bad_fraction() {
        assert!(stratified_split_indices(&labels(10, 0), 0.8, 0).is_err());
        assert!(stratified_split_indices(&labels(10, 10), 1.0, 0).is_err());
        assert!(stratified_split_indices(&labels(10, 10), 0.0, 0).is_err());
    }

    #[test]
    fn kfold_small_examples() {
        let plan = stratified_kfold_labels(&labels(4, 4), 2, 9).unwrap();
        for f in 0..2 {
            let members = plan.fold(f);
            assert_eq!(members.len(), 4);
            assert_eq!(members.iter().filter(|&&i| i < 4).count(), 2);
        }
        let plan = stratified_kfold_labels(&labels(6, 3), 3, 9).unwrap();
        for f in 0..3 {
            let members = plan.fold(f);
            assert_eq!(members.len(), 3);
            assert_eq!(members.iter().filter(|&&i| i >= 6).count(), 1);
        }
    }

    #[test]
    fn kfold_rejects_small_class() {
        assert!(stratified_kfold_labels(&labels(10, 2), 3, 0).is_err());
        assert!(stratified_kfold_labels(&labels(10, 10), 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn kfold_is_stratified_partition(
            pos in 2usize..60, neg in 2usize..60, k in 2usize..6, seed in any::<u64>()
        ) {
            prop_assume!(pos >= k && neg >= k);
            let l = labels(pos, neg);
            let plan = stratified_kfold_labels(&l, k, seed).unwrap();
            prop_assert_eq!(plan.assignments.len(), l.len());
            let global = pos as f64 / l.len() as f64;
            let mut seen = vec![false; l.len()];
            for f in 0..k {
                let members = plan.fold(f);
                prop_assert!(!members.is_empty());
                for &i in &members {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
                let fold_pos = members.iter().filter(|&&i| l[i] == 1).count();
                let ratio = fold_pos as f64 / members.len() as f64;
                prop_assert!((ratio - global).abs() <= 1.0 / members.len() as f64 + 1e-12);
                // class counts within one example of the per-fold share
                prop_assert!((fold_pos as f64 - pos as f64 / k as f64).abs() < 1.0);
            }
            prop_assert!(seen.into_iter().all(|s| s));
        }

        #[test]
        fn split_is_partition(pos in 1usize..80, neg in 1usize..80, seed in any::<u64>()) {
            let l = labels(pos, neg);
            let (train, valid) = stratified_split_indices(&l, 0.8, seed).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&valid).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
        }
    }
}
