use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::LabeledIndex;
use crate::{Error, Result};

/// How many members of each class go to the training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSpec {
    /// `round(fraction · class size)`, clamped so both sides are non-empty.
    Fraction(f64),
    /// Dataset-level `train:test` ratio applied per class.
    Ratio { train: usize, test: usize },
    /// Fixed number per class; must leave at least one test member.
    PerClass(usize),
}

impl SplitSpec {
    pub const VASES: SplitSpec = SplitSpec::Ratio { train: 480, test: 236 };
    pub const LEAVES: SplitSpec = SplitSpec::Ratio { train: 300, test: 140 };
    pub const SHELLS: SplitSpec = SplitSpec::Ratio { train: 120, test: 115 };

    fn train_count(self, class_size: usize) -> Option<usize> {
        let by_fraction = |f: f64| {
            let raw = (f * class_size as f64 + 0.5) as usize;
            raw.clamp(1, class_size - 1)
        };
        match self {
            SplitSpec::Fraction(f) => Some(by_fraction(f)),
            SplitSpec::Ratio { train, test } => Some(by_fraction(train as f64 / (train + test) as f64)),
            SplitSpec::PerClass(c) => (c >= 1 && c < class_size).then_some(c),
        }
    }
}

/// The split generator: ChaCha8 seeded with `seed_from_u64(seed)`, stream
/// set to the replicate number. Bounded draws use rejection sampling on
/// `next_u64`, so the sequence is identical on every platform.
#[derive(Debug, Clone)]
pub struct SplitRng(ChaCha8Rng);

impl SplitRng {
    pub fn new(seed: u64, replicate: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        SplitRng(rng)
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.0.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }
}

/// Draws a stratified train/test split without replacement.
///
/// Classes are visited in label order; within a class, members are taken in
/// ascending index order and the first `t` positions of a partial
/// Fisher–Yates shuffle become training members. Both outputs are sorted by
/// index.
pub fn stratified_split(
    labels: &[LabeledIndex],
    spec: SplitSpec,
    rng: &mut SplitRng,
) -> Result<(Vec<LabeledIndex>, Vec<LabeledIndex>)> {
    let mut classes: BTreeMap<&str, Vec<&LabeledIndex>> = BTreeMap::new();
    for l in labels {
        classes.entry(l.label.as_str()).or_default().push(l);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut members) in classes {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall(label.into()));
        }
        members.sort_by_key(|m| m.index);
        let take = spec.train_count(members.len()).ok_or_else(|| Error::ClassTooSmall(label.into()))?;
        for i in 0..take {
            let j = i + rng.below(members.len() - i);
            members.swap(i, j);
        }
        train.extend(members[..take].iter().map(|m| (*m).clone()));
        test.extend(members[take..].iter().map(|m| (*m).clone()));
    }
    train.sort();
    test.sort();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(classes: &[(&str, usize)]) -> Vec<LabeledIndex> {
        let mut out = Vec::new();
        for (name, count) in classes {
            for _ in 0..*count {
                out.push(LabeledIndex::new(out.len(), *name));
            }
        }
        out
    }

    #[test]
    fn half_split_is_balanced_and_disjoint() {
        let l = labels(&[("a", 4), ("b", 4)]);
        let (train, test) = stratified_split(&l, SplitSpec::Fraction(0.5), &mut SplitRng::new(7, 0)).unwrap();
        assert_eq!(train.len(), 4);
        assert_eq!(test.len(), 4);
        assert_eq!(train.iter().filter(|t| t.label == "a").count(), 2);
        assert!(train.iter().all(|t| !test.contains(t)));
    }

    #[test]
    fn deterministic_per_seed_and_stream() {
        let l = labels(&[("a", 10), ("b", 12), ("c", 7)]);
        let run = |seed, rep| stratified_split(&l, SplitSpec::Fraction(0.6), &mut SplitRng::new(seed, rep)).unwrap();
        assert_eq!(run(3, 1), run(3, 1));
        assert_ne!(run(3, 1), run(3, 2));
    }

    #[test]
    fn ratio_presets() {
        let l = labels(&[("a", 30), ("b", 30)]);
        let (train, _) = stratified_split(&l, SplitSpec::VASES, &mut SplitRng::new(1, 0)).unwrap();
        // 480 / 716 of 30 = 20.1 -> 20 per class
        assert_eq!(train.len(), 40);
        let (train, _) = stratified_split(&l, SplitSpec::SHELLS, &mut SplitRng::new(1, 0)).unwrap();
        assert_eq!(train.len(), 30);
    }

    #[test]
    fn small_classes_rejected() {
        let l = labels(&[("a", 1), ("b", 5)]);
        let err = stratified_split(&l, SplitSpec::Fraction(0.5), &mut SplitRng::new(1, 0)).unwrap_err();
        assert_eq!(err, Error::ClassTooSmall("a".into()));
        let l = labels(&[("a", 3)]);
        assert!(stratified_split(&l, SplitSpec::PerClass(3), &mut SplitRng::new(1, 0)).is_err());
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = SplitRng::new(0, 0);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[rng.below(5)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
