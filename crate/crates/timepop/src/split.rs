//! Fixed-timestamp train/test splitting.
//!
//! One global timestamp separates every user's past from their future.
//! Interactions strictly before the split time form the training set; the
//! split instant itself and everything after it belongs to the test set.
//! A user is evaluated when the split leaves at least `min_train` training
//! and `min_test` test interactions; the search picks the timestamp that
//! maximizes the number of such users.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Dataset, Interaction};

/// A chosen split timestamp plus the eligibility constraints it was
/// selected under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub split_time: i64,
    pub min_train: usize,
    pub min_test: usize,
}

impl SplitSpec {
    pub fn new(split_time: i64, min_train: usize, min_test: usize) -> Self {
        SplitSpec {
            split_time,
            min_train,
            min_test,
        }
    }
}

/// Materialized split: training records, test records of evaluated users,
/// and the evaluated-user set.
#[derive(Debug, Clone)]
pub struct SplitResult {
    /// All pre-split interactions, evaluated users or not; ordered by
    /// (user, timestamp, item).
    pub train: Vec<Interaction>,
    /// Post-split interactions of evaluated users only; same ordering.
    pub test: Vec<Interaction>,
    pub evaluated_users: BTreeSet<String>,
    pub split_time: i64,
}

/// Number of users with at least `min_train` interactions strictly before
/// `candidate_time` and at least `min_test` at or after it.
pub fn count_eligible_users(
    dataset: &Dataset,
    candidate_time: i64,
    min_train: usize,
    min_test: usize,
) -> usize {
    dataset
        .profiles()
        .iter()
        .filter(|p| {
            let before = p.count_before(candidate_time);
            before >= min_train && p.len() - before >= min_test
        })
        .count()
}

/// Searches the distinct interaction timestamps for the split time that
/// maximizes the eligible-user count, breaking ties toward the earliest.
///
/// The eligible count only changes at interaction timestamps, so the
/// distinct-timestamp grid loses no maximizer. Each user is eligible on a
/// contiguous run of candidates, which a difference array accumulates in
/// O(|users| log |times| + |times|).
pub fn find_best_split(dataset: &Dataset, min_train: usize, min_test: usize) -> Result<SplitSpec> {
    assert!(
        min_train >= 1 && min_test >= 1,
        "split minimums must be >= 1"
    );
    let mut candidates: Vec<i64> = dataset
        .profiles()
        .iter()
        .flat_map(|p| p.entries.iter().map(|e| e.timestamp))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let mut deltas = vec![0i64; candidates.len() + 1];
    for profile in dataset.profiles() {
        if profile.len() < min_train + min_test {
            continue;
        }
        let times: Vec<i64> = profile.entries.iter().map(|e| e.timestamp).collect();
        // Eligible iff split_time > times[min_train - 1] (enough strictly
        // before) and split_time <= times[len - min_test] (enough at or
        // after).
        let lowest = times[min_train - 1];
        let highest = times[times.len() - min_test];
        let lo = candidates.partition_point(|&c| c <= lowest);
        let hi = candidates.partition_point(|&c| c <= highest);
        if lo < hi {
            deltas[lo] += 1;
            deltas[hi] -= 1;
        }
    }

    let mut best: Option<(usize, i64)> = None;
    let mut running = 0i64;
    for (index, delta) in deltas[..candidates.len()].iter().enumerate() {
        running += delta;
        let count = running as usize;
        if count > 0 && best.is_none_or(|(best_count, _)| count > best_count) {
            best = Some((count, candidates[index]));
        }
    }

    match best {
        Some((_, split_time)) => Ok(SplitSpec::new(split_time, min_train, min_test)),
        None => Err(Error::NoFeasibleSplit),
    }
}

/// Splits the dataset at `spec.split_time`.
///
/// Evaluated users contribute their past to train and their future to
/// test. Non-evaluated users keep their pre-split interactions in train as
/// collaborative signal; their post-split interactions are dropped.
pub fn apply_split(dataset: &Dataset, spec: &SplitSpec) -> Result<SplitResult> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut evaluated_users = BTreeSet::new();

    for profile in dataset.profiles() {
        let before = profile.count_before(spec.split_time);
        let after = profile.len() - before;
        let eligible = before >= spec.min_train && after >= spec.min_test;
        let user = dataset.user_label(profile.user);
        for entry in &profile.entries[..before] {
            train.push(Interaction::new(
                user,
                dataset.item_label(entry.item),
                entry.rating,
                entry.timestamp,
            ));
        }
        if eligible {
            evaluated_users.insert(user.to_owned());
            for entry in &profile.entries[before..] {
                test.push(Interaction::new(
                    user,
                    dataset.item_label(entry.item),
                    entry.rating,
                    entry.timestamp,
                ));
            }
        }
    }

    if evaluated_users.is_empty() {
        return Err(Error::NoEvaluatedUsers);
    }
    Ok(SplitResult {
        train,
        test,
        evaluated_users,
        split_time: spec.split_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_dataset;

    fn run_of_interactions(user: &str, times: impl Iterator<Item = i64>) -> Vec<Interaction> {
        times
            .enumerate()
            .map(|(i, t)| Interaction::new(user, format!("{user}-i{i}"), 3.0, t))
            .collect()
    }

    #[test]
    fn boundary_interaction_counts_as_test() {
        let ds = build_dataset(&run_of_interactions("u", 1..=20)).unwrap();
        assert_eq!(count_eligible_users(&ds, 16, 15, 5), 1);
        assert_eq!(count_eligible_users(&ds, 17, 15, 5), 0);
    }

    #[test]
    fn tie_breaks_toward_earliest_timestamp() {
        // Both t=3 and t=4 leave (>=2, >=2) for this user; expect 3.
        let ds = build_dataset(&run_of_interactions("u", 1..=5)).unwrap();
        let spec = find_best_split(&ds, 2, 2).unwrap();
        assert_eq!(spec.split_time, 3);
    }

    #[test]
    fn infeasible_dataset_errors() {
        let ds = build_dataset(&run_of_interactions("u", 1..=4)).unwrap();
        assert!(matches!(
            find_best_split(&ds, 15, 5),
            Err(Error::NoFeasibleSplit)
        ));
    }

    #[test]
    fn split_partitions_an_evaluated_user() {
        let ds = build_dataset(&run_of_interactions("u", 1..=20)).unwrap();
        let result = apply_split(&ds, &SplitSpec::new(16, 15, 5)).unwrap();
        assert_eq!(result.train.len(), 15);
        assert_eq!(result.test.len(), 5);
        assert!(result.evaluated_users.contains("u"));
        assert!(result.train.iter().all(|r| r.timestamp < 16));
        assert!(result.test.iter().all(|r| r.timestamp >= 16));
    }

    #[test]
    fn non_evaluated_user_keeps_past_only() {
        let mut records = run_of_interactions("big", 1..=20);
        records.extend(run_of_interactions("small", 1..=3));
        // One post-split record for the small user must be dropped.
        records.push(Interaction::new("small", "late", 2.0, 18));
        let ds = build_dataset(&records).unwrap();
        let result = apply_split(&ds, &SplitSpec::new(16, 15, 5)).unwrap();
        assert!(!result.evaluated_users.contains("small"));
        assert_eq!(result.train.iter().filter(|r| r.user == "small").count(), 3);
        assert!(result.test.iter().all(|r| r.user != "small"));
    }

    #[test]
    fn zero_evaluated_users_is_an_error() {
        let ds = build_dataset(&run_of_interactions("u", 1..=6)).unwrap();
        assert!(matches!(
            apply_split(&ds, &SplitSpec::new(100, 15, 5)),
            Err(Error::NoEvaluatedUsers)
        ));
    }

    #[test]
    fn search_is_record_order_invariant() {
        let mut records = run_of_interactions("a", (1..=30).map(|t| t * 7));
        records.extend(run_of_interactions("b", (1..=25).map(|t| t * 11)));
        records.extend(run_of_interactions("c", (1..=8).map(|t| t * 13)));
        let forward = build_dataset(&records).unwrap();
        records.reverse();
        let reversed = build_dataset(&records).unwrap();
        assert_eq!(
            find_best_split(&forward, 5, 3).unwrap(),
            find_best_split(&reversed, 5, 3).unwrap()
        );
    }
}
