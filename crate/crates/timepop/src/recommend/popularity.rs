//! Global-popularity baseline.

use crate::error::Result;
use crate::model::{Dataset, RecommendationContext, UserId};
use crate::recommend::{RankedList, Recommender, ScoredItem, Source};

/// Top-n items by distinct-rater count, excluding the target's training
/// items; popularity ties break by item label.
pub fn most_popular(dataset: &Dataset, target: UserId, n: usize) -> RankedList {
    let profile = dataset.profile(target);
    let entries = dataset
        .popularity_order()
        .iter()
        .filter(|&&item| !profile.contains(item))
        .take(n)
        .map(|&item| ScoredItem {
            item,
            score: f64::from(dataset.popularity(item)),
            source: Source::Scored,
        })
        .collect();
    RankedList {
        user: target,
        entries,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MostPopular;

impl Recommender for MostPopular {
    fn name(&self) -> &'static str {
        "mostpop"
    }

    fn recommend(
        &self,
        dataset: &Dataset,
        target: UserId,
        ctx: &RecommendationContext,
    ) -> Result<RankedList> {
        ctx.validate(dataset)?;
        Ok(most_popular(dataset, target, ctx.top_n))
    }
}
