//! The time-aware local-popularity recommender.

use crate::decay::delta_t_days;
use crate::error::Result;
use crate::model::{Dataset, ItemId, RecommendationContext, UserId};
use crate::precursors::precursor_set;
use crate::recommend::{assemble_list, RankedList, Recommender};

/// Scores every item held by the target's precursors and absent from the
/// target's own profile. Each precursor contributes one decayed unit per
/// item, weighted by the two-anchor elapsed time between the reference
/// timestamp, the precursor's last activity and the rating itself.
///
/// With no precursors the whole list falls back to global popularity;
/// short lists are completed the same way.
pub fn timepop_recommend(
    dataset: &Dataset,
    target: UserId,
    ctx: &RecommendationContext,
) -> Result<RankedList> {
    ctx.validate(dataset)?;
    let set = precursor_set(dataset, target, ctx.tau_mode);
    if set.is_empty() {
        return Ok(assemble_list(dataset, target, Vec::new(), ctx.top_n));
    }

    let profile = dataset.profile(target);
    let mut scores = vec![0.0f64; dataset.num_items()];
    let mut seen = vec![false; dataset.num_items()];
    let mut touched: Vec<ItemId> = Vec::new();
    // Precursors are visited in ascending handle order so score sums are
    // reproducible bit for bit.
    for &precursor in &set.precursors {
        let history = dataset.profile(precursor);
        for entry in &history.entries {
            if profile.contains(entry.item) {
                continue;
            }
            let elapsed = delta_t_days(ctx.t0, history.last_activity, entry.timestamp)?;
            let weight = ctx.decay.weight(elapsed)?;
            scores[entry.item.index()] += weight;
            if !seen[entry.item.index()] {
                seen[entry.item.index()] = true;
                touched.push(entry.item);
            }
        }
    }

    touched.sort_unstable();
    let scored: Vec<(ItemId, f64)> = touched
        .into_iter()
        .map(|item| (item, scores[item.index()]))
        .collect();
    Ok(assemble_list(dataset, target, scored, ctx.top_n))
}

/// Marker type implementing [`Recommender`] for the algorithm above.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimePop;

impl Recommender for TimePop {
    fn name(&self) -> &'static str {
        "timepop"
    }

    fn recommend(
        &self,
        dataset: &Dataset,
        target: UserId,
        ctx: &RecommendationContext,
    ) -> Result<RankedList> {
        timepop_recommend(dataset, target, ctx)
    }
}
