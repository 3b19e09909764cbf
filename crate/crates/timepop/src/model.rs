//! Core data model: raw interactions and the immutable indexed dataset
//! every algorithm reads from.
//!
//! User and item identifiers are interned to dense integer handles. Handles
//! are assigned in lexicographic order of the external labels, so every
//! derived ordering is independent of the order records arrived in.

use std::collections::HashMap;

use crate::decay::DecayParams;
use crate::error::{Error, Result};
use crate::precursors::TauMode;

/// One observed (user, item, rating, timestamp) event.
///
/// Timestamps are integer seconds since the epoch; ratings are on the
/// dataset's native scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub user: String,
    pub item: String,
    pub rating: f64,
    pub timestamp: i64,
}

impl Interaction {
    pub fn new(
        user: impl Into<String>,
        item: impl Into<String>,
        rating: f64,
        timestamp: i64,
    ) -> Self {
        Interaction {
            user: user.into(),
            item: item.into(),
            rating,
            timestamp,
        }
    }
}

/// Dense handle for an interned user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

/// Dense handle for an interned item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One interaction inside a user profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEntry {
    pub item: ItemId,
    pub timestamp: i64,
    pub rating: f64,
}

/// A user's history, ordered by (timestamp, item).
#[derive(Debug, Clone)]
pub struct UserProfile {
    pub user: UserId,
    /// Ascending by timestamp, ties broken by item handle.
    pub entries: Vec<ProfileEntry>,
    /// Timestamp of the final entry.
    pub last_activity: i64,
    /// Item handles sorted ascending, for membership tests.
    rated: Vec<ItemId>,
}

impl UserProfile {
    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn contains(&self, item: ItemId) -> bool {
        self.rated.binary_search(&item).is_ok()
    }

    pub fn rated_items(&self) -> &[ItemId] {
        &self.rated
    }

    /// Number of entries with timestamp strictly before `t`.
    pub fn count_before(&self, t: i64) -> usize {
        self.entries.partition_point(|e| e.timestamp < t)
    }
}

/// One rating of an item, in the item's rater list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaterEntry {
    pub user: UserId,
    pub timestamp: i64,
    pub rating: f64,
}

/// Immutable bidirectional index over a set of interactions.
///
/// Holds one profile per user and one time-ordered rater list per item,
/// with global popularity counts. Duplicate (user, item) records collapse
/// to the earliest-timestamp one at build time. Once built, the dataset
/// never changes; readers may share it freely across threads.
#[derive(Debug, Clone)]
pub struct Dataset {
    user_labels: Vec<String>,
    item_labels: Vec<String>,
    user_index: HashMap<String, UserId>,
    item_index: HashMap<String, ItemId>,
    profiles: Vec<UserProfile>,
    /// Per item, ascending by timestamp, ties broken by user handle.
    item_raters: Vec<Vec<RaterEntry>>,
    /// Distinct-rater count per item.
    popularity: Vec<u32>,
    /// All items ordered by (popularity desc, item handle asc).
    popularity_order: Vec<ItemId>,
    max_timestamp: i64,
    interaction_count: usize,
}

/// Builds the indexed dataset from raw records.
///
/// Duplicate (user, item) pairs keep the earliest record (ties on timestamp
/// keep the lowest rating, so the result does not depend on record order).
pub fn build_dataset(records: &[Interaction]) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for r in records {
        if !r.rating.is_finite() {
            return Err(Error::NonFiniteRating {
                user: r.user.clone(),
                item: r.item.clone(),
                rating: r.rating,
            });
        }
        if r.timestamp < 0 {
            return Err(Error::NegativeTimestamp {
                user: r.user.clone(),
                item: r.item.clone(),
                timestamp: r.timestamp,
            });
        }
    }

    let user_labels = interned_labels(records.iter().map(|r| r.user.as_str()));
    let item_labels = interned_labels(records.iter().map(|r| r.item.as_str()));
    let user_index: HashMap<String, UserId> = user_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), UserId(i as u32)))
        .collect();
    let item_index: HashMap<String, ItemId> = item_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), ItemId(i as u32)))
        .collect();

    // Earliest record wins per (user, item).
    let mut deduped: HashMap<(UserId, ItemId), (i64, f64)> = HashMap::with_capacity(records.len());
    for r in records {
        let key = (user_index[&r.user], item_index[&r.item]);
        let value = (r.timestamp, r.rating);
        deduped
            .entry(key)
            .and_modify(|existing| {
                if value < *existing {
                    *existing = value;
                }
            })
            .or_insert(value);
    }

    let mut profile_entries: Vec<Vec<ProfileEntry>> = vec![Vec::new(); user_labels.len()];
    let mut item_raters: Vec<Vec<RaterEntry>> = vec![Vec::new(); item_labels.len()];
    for (&(user, item), &(timestamp, rating)) in &deduped {
        profile_entries[user.index()].push(ProfileEntry {
            item,
            timestamp,
            rating,
        });
        item_raters[item.index()].push(RaterEntry {
            user,
            timestamp,
            rating,
        });
    }

    let mut max_timestamp = i64::MIN;
    let mut profiles = Vec::with_capacity(user_labels.len());
    for (index, mut entries) in profile_entries.into_iter().enumerate() {
        entries.sort_unstable_by_key(|e| (e.timestamp, e.item));
        let last_activity = entries
            .last()
            .expect("every interned user has entries")
            .timestamp;
        max_timestamp = max_timestamp.max(last_activity);
        let mut rated: Vec<ItemId> = entries.iter().map(|e| e.item).collect();
        rated.sort_unstable();
        profiles.push(UserProfile {
            user: UserId(index as u32),
            entries,
            last_activity,
            rated,
        });
    }
    for raters in &mut item_raters {
        raters.sort_unstable_by_key(|r| (r.timestamp, r.user));
    }

    let popularity: Vec<u32> = item_raters.iter().map(|r| r.len() as u32).collect();
    let mut popularity_order: Vec<ItemId> = (0..item_labels.len() as u32).map(ItemId).collect();
    popularity_order.sort_unstable_by_key(|&i| (std::cmp::Reverse(popularity[i.index()]), i));

    Ok(Dataset {
        user_labels,
        item_labels,
        user_index,
        item_index,
        profiles,
        item_raters,
        popularity,
        popularity_order,
        max_timestamp,
        interaction_count: deduped.len(),
    })
}

fn interned_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut labels: Vec<&str> = labels.collect();
    labels.sort_unstable();
    labels.dedup();
    labels.into_iter().map(str::to_owned).collect()
}

impl Dataset {
    #[inline]
    pub fn num_users(&self) -> usize {
        self.user_labels.len()
    }

    #[inline]
    pub fn num_items(&self) -> usize {
        self.item_labels.len()
    }

    /// Total interactions after de-duplication.
    #[inline]
    pub fn len(&self) -> usize {
        self.interaction_count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.interaction_count == 0
    }

    pub fn user_id(&self, label: &str) -> Option<UserId> {
        self.user_index.get(label).copied()
    }

    pub fn item_id(&self, label: &str) -> Option<ItemId> {
        self.item_index.get(label).copied()
    }

    /// Looks up a user handle, erroring on unknown labels.
    pub fn require_user(&self, label: &str) -> Result<UserId> {
        self.user_id(label)
            .ok_or_else(|| Error::UnknownUser(label.to_owned()))
    }

    pub fn user_label(&self, user: UserId) -> &str {
        &self.user_labels[user.index()]
    }

    pub fn item_label(&self, item: ItemId) -> &str {
        &self.item_labels[item.index()]
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.num_users() as u32).map(UserId)
    }

    /// The item universe: every item with at least one interaction.
    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        (0..self.num_items() as u32).map(ItemId)
    }

    pub fn profile(&self, user: UserId) -> &UserProfile {
        &self.profiles[user.index()]
    }

    pub fn profiles(&self) -> &[UserProfile] {
        &self.profiles
    }

    pub fn item_raters(&self, item: ItemId) -> &[RaterEntry] {
        &self.item_raters[item.index()]
    }

    pub fn popularity(&self, item: ItemId) -> u32 {
        self.popularity[item.index()]
    }

    /// Items ordered by (popularity desc, item asc).
    pub fn popularity_order(&self) -> &[ItemId] {
        &self.popularity_order
    }

    pub fn max_timestamp(&self) -> i64 {
        self.max_timestamp
    }

    /// Flattens the index back to external records, ordered by
    /// (user, timestamp, item).
    pub fn interactions(&self) -> Vec<Interaction> {
        let mut out = Vec::with_capacity(self.len());
        for profile in &self.profiles {
            let user = self.user_label(profile.user);
            for e in &profile.entries {
                out.push(Interaction::new(
                    user,
                    self.item_label(e.item),
                    e.rating,
                    e.timestamp,
                ));
            }
        }
        out
    }
}

/// Shared parameters for producing one recommendation list: the reference
/// "now", the list length, the decay law and the precursor threshold mode.
#[derive(Debug, Clone)]
pub struct RecommendationContext {
    /// Reference timestamp; must not precede any training interaction.
    pub t0: i64,
    /// Maximum list length N.
    pub top_n: usize,
    pub decay: DecayParams,
    pub tau_mode: TauMode,
}

impl RecommendationContext {
    pub fn new(t0: i64, top_n: usize) -> Self {
        RecommendationContext {
            t0,
            top_n,
            decay: DecayParams::default(),
            tau_mode: TauMode::Auto,
        }
    }

    pub(crate) fn validate(&self, dataset: &Dataset) -> Result<()> {
        debug_assert!(self.top_n >= 1, "top_n must be at least 1");
        debug_assert!(self.decay.beta > 0.0, "decay rate must be positive");
        if self.t0 < dataset.max_timestamp() {
            return Err(Error::ReferenceBeforeTraining {
                t0: self.t0,
                max_timestamp: dataset.max_timestamp(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(user: &str, item: &str, rating: f64, t: i64) -> Interaction {
        Interaction::new(user, item, rating, t)
    }

    #[test]
    fn builds_profiles_and_popularity() {
        let ds = build_dataset(&[rec("u1", "i1", 5.0, 10), rec("u1", "i2", 4.0, 20)]).unwrap();
        let i1 = ds.item_id("i1").unwrap();
        let i2 = ds.item_id("i2").unwrap();
        assert_eq!(ds.popularity(i1), 1);
        assert_eq!(ds.popularity(i2), 1);
        let u1 = ds.user_id("u1").unwrap();
        assert_eq!(ds.profile(u1).last_activity, 20);
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn rater_lists_are_time_sorted() {
        let ds = build_dataset(&[rec("u1", "i1", 5.0, 10), rec("u2", "i1", 3.0, 5)]).unwrap();
        let i1 = ds.item_id("i1").unwrap();
        let raters = ds.item_raters(i1);
        assert_eq!(raters.len(), 2);
        assert_eq!(ds.user_label(raters[0].user), "u2");
        assert_eq!(raters[0].timestamp, 5);
        assert_eq!(raters[0].rating, 3.0);
        assert_eq!(ds.user_label(raters[1].user), "u1");
        assert_eq!(raters[1].timestamp, 10);
    }

    #[test]
    fn duplicate_pair_keeps_earliest() {
        let ds = build_dataset(&[rec("u1", "i1", 5.0, 10), rec("u1", "i1", 2.0, 30)]).unwrap();
        assert_eq!(ds.len(), 1);
        let u1 = ds.user_id("u1").unwrap();
        let entry = ds.profile(u1).entries[0];
        assert_eq!(entry.timestamp, 10);
        assert_eq!(entry.rating, 5.0);
        // Same result no matter which duplicate comes first.
        let ds2 = build_dataset(&[rec("u1", "i1", 2.0, 30), rec("u1", "i1", 5.0, 10)]).unwrap();
        assert_eq!(ds2.profile(u1).entries[0].timestamp, 10);
        assert_eq!(ds2.profile(u1).entries[0].rating, 5.0);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(build_dataset(&[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn non_finite_rating_names_the_record() {
        let err = build_dataset(&[rec("u9", "i7", f64::NAN, 1)]).unwrap_err();
        match err {
            Error::NonFiniteRating { user, item, .. } => {
                assert_eq!(user, "u9");
                assert_eq!(item, "i7");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn negative_timestamp_is_rejected() {
        assert!(build_dataset(&[rec("u1", "i1", 1.0, -5)]).is_err());
    }

    #[test]
    fn flattening_returns_user_time_item_order() {
        let ds = build_dataset(&[
            rec("b", "x", 1.0, 30),
            rec("a", "y", 2.0, 20),
            rec("a", "w", 3.0, 5),
        ])
        .unwrap();
        let flat = ds.interactions();
        assert_eq!(flat.len(), 3);
        assert_eq!((flat[0].user.as_str(), flat[0].item.as_str()), ("a", "w"));
        assert_eq!((flat[1].user.as_str(), flat[1].item.as_str()), ("a", "y"));
        assert_eq!((flat[2].user.as_str(), flat[2].item.as_str()), ("b", "x"));
    }

    #[test]
    fn handles_follow_label_order_not_record_order() {
        let ds = build_dataset(&[rec("zeta", "b", 1.0, 1), rec("alpha", "a", 1.0, 2)]).unwrap();
        assert_eq!(ds.user_label(UserId(0)), "alpha");
        assert_eq!(ds.user_label(UserId(1)), "zeta");
        assert_eq!(ds.item_label(ItemId(0)), "a");
    }
}
