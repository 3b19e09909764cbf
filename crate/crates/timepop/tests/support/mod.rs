//! Shared test support: brute-force reference implementations working on
//! raw interaction records, plus seeded random dataset generators.
//!
//! Nothing here touches the indexed dataset or the production scoring
//! paths; every oracle recomputes its answer from plain maps so the two
//! routes stay independent.

#![allow(dead_code)]

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timepop::Interaction;

pub const DAY: i64 = 86_400;

/// user -> item -> (timestamp, rating); duplicates keep the earliest
/// (timestamp, rating) pair, mirroring the documented ingestion policy.
pub type RawProfiles = BTreeMap<String, BTreeMap<String, (i64, f64)>>;

pub fn raw_profiles(records: &[Interaction]) -> RawProfiles {
    let mut profiles: RawProfiles = BTreeMap::new();
    for r in records {
        match profiles
            .entry(r.user.clone())
            .or_default()
            .entry(r.item.clone())
        {
            Entry::Vacant(slot) => {
                slot.insert((r.timestamp, r.rating));
            }
            Entry::Occupied(mut slot) => {
                let candidate = (r.timestamp, r.rating);
                if candidate < *slot.get() {
                    slot.insert(candidate);
                }
            }
        }
    }
    profiles
}

pub fn last_activity(profile: &BTreeMap<String, (i64, f64)>) -> i64 {
    profile
        .values()
        .map(|&(t, _)| t)
        .max()
        .expect("non-empty profile")
}

pub fn global_popularity(profiles: &RawProfiles) -> BTreeMap<String, usize> {
    let mut popularity = BTreeMap::new();
    for items in profiles.values() {
        for item in items.keys() {
            *popularity.entry(item.clone()).or_insert(0) += 1;
        }
    }
    popularity
}

/// All items ordered by (popularity desc, label asc).
pub fn popularity_ranking(popularity: &BTreeMap<String, usize>) -> Vec<String> {
    let mut items: Vec<(&String, usize)> = popularity.iter().map(|(i, &c)| (i, c)).collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    items.into_iter().map(|(i, _)| i.clone()).collect()
}

// ---------------------------------------------------------------------
// Precursor brute force: all-pairs scan of the definition.
// ---------------------------------------------------------------------

/// For every other user, the number of the target's items they rated
/// strictly earlier than the target did.
pub fn oracle_candidates(profiles: &RawProfiles, target: &str) -> BTreeMap<String, u32> {
    let target_items = &profiles[target];
    let mut counts = BTreeMap::new();
    for (other, items) in profiles {
        if other == target {
            continue;
        }
        let mut common_before = 0u32;
        for (item, &(t_target, _)) in target_items {
            if let Some(&(t_other, _)) = items.get(item) {
                if t_other < t_target {
                    common_before += 1;
                }
            }
        }
        if common_before > 0 {
            counts.insert(other.clone(), common_before);
        }
    }
    counts
}

pub fn oracle_tau(counts: &BTreeMap<String, u32>) -> f64 {
    let sum: u64 = counts.values().map(|&c| u64::from(c)).sum();
    sum as f64 / counts.len() as f64
}

pub fn oracle_precursors(counts: &BTreeMap<String, u32>, tau: f64) -> BTreeSet<String> {
    counts
        .iter()
        .filter(|(_, &count)| f64::from(count) >= tau)
        .map(|(user, _)| user.clone())
        .collect()
}

// ---------------------------------------------------------------------
// Brute-force recommenders.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub item: String,
    pub score: f64,
    pub backfill: bool,
}

fn oracle_rank(
    mut scored: Vec<(String, f64)>,
    popularity: &BTreeMap<String, usize>,
    target_items: &BTreeMap<String, (i64, f64)>,
    n: usize,
) -> Vec<OracleEntry> {
    scored.retain(|(_, s)| *s > 0.0);
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| popularity[&b.0].cmp(&popularity[&a.0]))
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(n);
    let mut out: Vec<OracleEntry> = scored
        .into_iter()
        .map(|(item, score)| OracleEntry {
            item,
            score,
            backfill: false,
        })
        .collect();
    if out.len() < n {
        for item in popularity_ranking(popularity) {
            if out.len() == n {
                break;
            }
            if target_items.contains_key(&item) || out.iter().any(|e| e.item == item) {
                continue;
            }
            out.push(OracleEntry {
                item,
                score: 0.0,
                backfill: true,
            });
        }
    }
    out
}

/// Direct scorer: enumerate every (precursor, item) pair from the
/// brute-force precursor set and sum the decayed contributions.
pub fn oracle_timepop(
    profiles: &RawProfiles,
    target: &str,
    t0: i64,
    beta: f64,
    n: usize,
) -> Vec<OracleEntry> {
    let popularity = global_popularity(profiles);
    let target_items = &profiles[target];
    let counts = oracle_candidates(profiles, target);
    if counts.is_empty() {
        return oracle_rank(Vec::new(), &popularity, target_items, n);
    }
    let tau = oracle_tau(&counts);
    let precursors = oracle_precursors(&counts, tau);

    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for precursor in &precursors {
        let history = &profiles[precursor];
        let last = last_activity(history);
        for (item, &(t, _)) in history {
            if target_items.contains_key(item) {
                continue;
            }
            let days = (t0 - 2 * last + t).abs() as f64 / 86_400.0;
            *scores.entry(item.clone()).or_insert(0.0) += (-beta * days).exp();
        }
    }
    oracle_rank(scores.into_iter().collect(), &popularity, target_items, n)
}

pub fn oracle_most_popular(profiles: &RawProfiles, target: &str, n: usize) -> Vec<String> {
    let popularity = global_popularity(profiles);
    let target_items = &profiles[target];
    popularity_ranking(&popularity)
        .into_iter()
        .filter(|item| !target_items.contains_key(item))
        .take(n)
        .collect()
}

fn decay_or_one(enabled: bool, beta: f64, t0: i64, t: i64) -> f64 {
    if enabled {
        (-beta * ((t0 - t) as f64 / 86_400.0)).exp()
    } else {
        1.0
    }
}

/// All-pairs cosine user kNN on binary occurrence vectors.
pub fn oracle_user_knn(
    profiles: &RawProfiles,
    target: &str,
    t0: i64,
    beta: f64,
    k: usize,
    decay_enabled: bool,
    n: usize,
) -> Vec<OracleEntry> {
    let popularity = global_popularity(profiles);
    let target_items = &profiles[target];

    let mut neighbors: Vec<(String, f64)> = profiles
        .iter()
        .filter(|(user, _)| user.as_str() != target)
        .filter_map(|(user, items)| {
            let overlap = items
                .keys()
                .filter(|item| target_items.contains_key(*item))
                .count();
            if overlap == 0 {
                return None;
            }
            let sim = overlap as f64 / ((target_items.len() as f64) * (items.len() as f64)).sqrt();
            Some((user.clone(), sim))
        })
        .collect();
    neighbors.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    neighbors.truncate(k);

    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for (neighbor, sim) in &neighbors {
        for (item, &(t, _)) in &profiles[neighbor] {
            if target_items.contains_key(item) {
                continue;
            }
            *scores.entry(item.clone()).or_insert(0.0) +=
                sim * decay_or_one(decay_enabled, beta, t0, t);
        }
    }
    oracle_rank(scores.into_iter().collect(), &popularity, target_items, n)
}

/// All-pairs cosine item kNN: a candidate is scored by the target's items
/// that sit inside the candidate's top-k neighborhood.
pub fn oracle_item_knn(
    profiles: &RawProfiles,
    target: &str,
    t0: i64,
    beta: f64,
    k: usize,
    decay_enabled: bool,
    n: usize,
) -> Vec<OracleEntry> {
    let popularity = global_popularity(profiles);
    let target_items = &profiles[target];

    let mut raters: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (user, items) in profiles {
        for item in items.keys() {
            raters.entry(item).or_default().insert(user);
        }
    }
    let all_items: Vec<&str> = raters.keys().copied().collect();

    // Target profile in (timestamp, item) order, matching the production
    // accumulation order.
    let mut target_ordered: Vec<(&String, i64)> = target_items
        .iter()
        .map(|(item, &(t, _))| (item, t))
        .collect();
    target_ordered.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));

    let mut scores: Vec<(String, f64)> = Vec::new();
    for &candidate in &all_items {
        if target_items.contains_key(candidate) {
            continue;
        }
        let candidate_raters = &raters[candidate];
        let mut sims: Vec<(&str, f64)> = all_items
            .iter()
            .filter(|&&other| other != candidate)
            .filter_map(|&other| {
                let overlap = raters[other]
                    .iter()
                    .filter(|user| candidate_raters.contains(*user))
                    .count();
                if overlap == 0 {
                    return None;
                }
                let sim = overlap as f64
                    / ((candidate_raters.len() as f64) * (raters[other].len() as f64)).sqrt();
                Some((other, sim))
            })
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        sims.truncate(k);
        let neighborhood: BTreeMap<&str, f64> = sims.into_iter().collect();

        let mut score = 0.0;
        for &(item, t) in &target_ordered {
            if let Some(&sim) = neighborhood.get(item.as_str()) {
                score += sim * decay_or_one(decay_enabled, beta, t0, t);
            }
        }
        if score > 0.0 {
            scores.push((candidate.to_owned(), score));
        }
    }
    oracle_rank(scores, &popularity, target_items, n)
}

// ---------------------------------------------------------------------
// Splitting brute force.
// ---------------------------------------------------------------------

pub fn oracle_count_eligible(
    profiles: &RawProfiles,
    candidate_time: i64,
    min_train: usize,
    min_test: usize,
) -> usize {
    profiles
        .values()
        .filter(|items| {
            let before = items.values().filter(|&&(t, _)| t < candidate_time).count();
            let after = items.len() - before;
            before >= min_train && after >= min_test
        })
        .count()
}

/// Exhaustive scan over all distinct timestamps; earliest maximizer.
pub fn oracle_best_split(
    profiles: &RawProfiles,
    min_train: usize,
    min_test: usize,
) -> Option<(i64, usize)> {
    let times: BTreeSet<i64> = profiles
        .values()
        .flat_map(|items| items.values().map(|&(t, _)| t))
        .collect();
    let mut best: Option<(i64, usize)> = None;
    for &t in &times {
        let count = oracle_count_eligible(profiles, t, min_train, min_test);
        if count > 0 && best.is_none_or(|(_, best_count)| count > best_count) {
            best = Some((t, count));
        }
    }
    best
}

// ---------------------------------------------------------------------
// Reference ranking metric.
// ---------------------------------------------------------------------

fn discounted_gain(gains: &[f64]) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(index, gain)| gain / ((index + 2) as f64).log2())
        .sum()
}

/// Binary nDCG@n computed from explicit achieved and ideal gain vectors.
pub fn reference_ndcg<S: AsRef<str>>(ranked: &[S], relevant: &BTreeSet<String>, n: usize) -> f64 {
    let achieved: Vec<f64> = ranked
        .iter()
        .take(n)
        .map(|item| {
            if relevant.contains(item.as_ref()) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let ideal = vec![1.0; relevant.len().min(n)];
    let normalizer = discounted_gain(&ideal);
    if normalizer == 0.0 {
        0.0
    } else {
        discounted_gain(&achieved) / normalizer
    }
}

/// End-to-end reference pipeline: mean nDCG@10 over the users with a
/// relevant test item, lists produced by the brute-force scorers.
pub enum OracleAlgo {
    TimePop,
    MostPopular,
}

pub fn oracle_mean_ndcg10(
    train: &[Interaction],
    test: &[Interaction],
    t0: i64,
    beta: f64,
    algo: OracleAlgo,
) -> f64 {
    let profiles = raw_profiles(train);
    let mut grouped: BTreeMap<&str, Vec<&Interaction>> = BTreeMap::new();
    for record in test {
        grouped
            .entry(record.user.as_str())
            .or_default()
            .push(record);
    }
    let mut total = 0.0;
    let mut included = 0usize;
    for (user, records) in grouped {
        let relevant: BTreeSet<String> = records
            .iter()
            .filter(|r| r.rating >= 4.0)
            .map(|r| r.item.clone())
            .collect();
        if relevant.is_empty() {
            continue;
        }
        let ranked: Vec<String> = match algo {
            OracleAlgo::TimePop => oracle_timepop(&profiles, user, t0, beta, 10)
                .into_iter()
                .map(|e| e.item)
                .collect(),
            OracleAlgo::MostPopular => oracle_most_popular(&profiles, user, 10),
        };
        total += reference_ndcg(&ranked, &relevant, 10);
        included += 1;
    }
    total / included as f64
}

// ---------------------------------------------------------------------
// Seeded random datasets.
// ---------------------------------------------------------------------

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const RATING_GRID: [f64; 7] = [1.0, 2.0, 3.0, 3.5, 4.0, 4.5, 5.0];

/// Random records with duplicate (user, item) pairs and timestamp ties,
/// to exercise the de-duplication and strict-precedence rules.
pub fn random_interactions(
    rng: &mut ChaCha8Rng,
    max_users: usize,
    max_items: usize,
    max_interactions: usize,
) -> Vec<Interaction> {
    let users = rng.random_range(2..=max_users.max(2));
    let items = rng.random_range(2..=max_items.max(2));
    let count = rng.random_range(1..=max_interactions.max(1));
    (0..count)
        .map(|_| {
            Interaction::new(
                format!("u{:03}", rng.random_range(0..users)),
                format!("i{:03}", rng.random_range(0..items)),
                RATING_GRID[rng.random_range(0..RATING_GRID.len())],
                i64::from(rng.random_range(0..200u32)) * 7,
            )
        })
        .collect()
}

/// Random records where every user has enough distinct interactions that a
/// 15/5 fixed-timestamp split is usually feasible.
pub fn random_splittable_interactions(rng: &mut ChaCha8Rng) -> Vec<Interaction> {
    let users = rng.random_range(4..=12);
    let mut records = Vec::new();
    for user in 0..users {
        let count = rng.random_range(22..=50);
        let mut chosen: BTreeSet<u32> = BTreeSet::new();
        while chosen.len() < count {
            chosen.insert(rng.random_range(0..400u32));
        }
        for item in chosen {
            records.push(Interaction::new(
                format!("u{user:03}"),
                format!("i{item:03}"),
                RATING_GRID[rng.random_range(0..RATING_GRID.len())],
                i64::from(rng.random_range(0..3000u32)),
            ));
        }
    }
    records
}
