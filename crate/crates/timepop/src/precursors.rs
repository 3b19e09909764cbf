//! Precursor discovery.
//!
//! A candidate precursor of a target user is any user who rated at least
//! one common item strictly earlier than the target did. Candidates whose
//! common-before count reaches the threshold tau become precursors, the
//! population whose recent behavior drives the target's recommendations.

use crate::error::{Error, Result};
use crate::model::{Dataset, UserId};

/// A candidate precursor together with the number of common items it rated
/// strictly before the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateEntry {
    pub candidate: UserId,
    pub common_before: u32,
}

/// How the per-target threshold tau is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    /// Mean common-before count over all candidates.
    Auto,
    /// Externally supplied threshold.
    Fixed(f64),
}

/// Candidates, threshold and qualifying precursors for one target user.
#[derive(Debug, Clone)]
pub struct PrecursorSet {
    pub target: UserId,
    /// Ascending by candidate handle.
    pub candidates: Vec<CandidateEntry>,
    /// Threshold actually applied; 0 marks the no-candidates case.
    pub tau: f64,
    /// Candidates with common_before >= tau, ascending by handle.
    pub precursors: Vec<UserId>,
}

impl PrecursorSet {
    pub fn is_precursor(&self, user: UserId) -> bool {
        self.precursors.binary_search(&user).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.precursors.is_empty()
    }
}

/// Finds every user who rated at least one of the target's items strictly
/// before the target, with the count of such items.
///
/// Walks the target profile and, per item, the time-ordered rater list up
/// to the target's own timestamp, so the cost is the number of earlier
/// raters rather than an all-pairs scan. Equal timestamps do not count as
/// earlier. Entries come back ascending by candidate handle.
pub fn candidate_precursors(dataset: &Dataset, target: UserId) -> Vec<CandidateEntry> {
    let profile = dataset.profile(target);
    let mut counts = vec![0u32; dataset.num_users()];
    let mut touched: Vec<UserId> = Vec::new();
    for entry in &profile.entries {
        let raters = dataset.item_raters(entry.item);
        let earlier = raters.partition_point(|r| r.timestamp < entry.timestamp);
        for rater in &raters[..earlier] {
            if rater.user == target {
                continue;
            }
            let slot = &mut counts[rater.user.index()];
            if *slot == 0 {
                touched.push(rater.user);
            }
            *slot += 1;
        }
    }
    touched.sort_unstable();
    touched
        .into_iter()
        .map(|candidate| CandidateEntry {
            candidate,
            common_before: counts[candidate.index()],
        })
        .collect()
}

/// The threshold for precursor membership: in auto mode, the mean
/// common-before count over all candidates.
pub fn compute_tau(candidates: &[CandidateEntry], mode: TauMode) -> Result<f64> {
    match mode {
        TauMode::Fixed(value) => Ok(value),
        TauMode::Auto => {
            if candidates.is_empty() {
                return Err(Error::NoCandidates);
            }
            let sum: u64 = candidates.iter().map(|c| u64::from(c.common_before)).sum();
            Ok(sum as f64 / candidates.len() as f64)
        }
    }
}

/// Full precursor computation for one target: candidates, tau and the
/// qualifying set (common_before >= tau, inclusive).
///
/// With no candidates the set is empty and tau is reported as 0; callers
/// fall back to global popularity.
pub fn precursor_set(dataset: &Dataset, target: UserId, mode: TauMode) -> PrecursorSet {
    let candidates = candidate_precursors(dataset, target);
    if candidates.is_empty() {
        let tau = match mode {
            TauMode::Fixed(value) => value,
            TauMode::Auto => 0.0,
        };
        return PrecursorSet {
            target,
            candidates,
            tau,
            precursors: Vec::new(),
        };
    }
    let tau = compute_tau(&candidates, mode).expect("candidates verified non-empty");
    let precursors = candidates
        .iter()
        .filter(|c| f64::from(c.common_before) >= tau)
        .map(|c| c.candidate)
        .collect();
    PrecursorSet {
        target,
        candidates,
        tau,
        precursors,
    }
}
