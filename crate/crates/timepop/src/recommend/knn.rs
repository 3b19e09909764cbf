//! Memory-based kNN baselines over binary implicit feedback, with an
//! optional single-anchor temporal decay on the rating age.

use rayon::prelude::*;

use crate::decay::SECONDS_PER_DAY;
use crate::error::Result;
use crate::model::{Dataset, ItemId, RecommendationContext, UserId};
use crate::recommend::{assemble_list, RankedList, Recommender};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnVariant {
    User,
    Item,
}

/// Cosine similarity between two binary occurrence vectors, given the
/// overlap and the two set sizes.
#[inline]
fn cosine(overlap: u32, len_a: usize, len_b: usize) -> f64 {
    f64::from(overlap) / ((len_a as f64) * (len_b as f64)).sqrt()
}

/// User-based kNN: the k users most similar to the target vote for their
/// items, each vote weighted by similarity and, when enabled, by the decay
/// of the rating age relative to the reference timestamp.
#[derive(Debug, Clone, Copy)]
pub struct UserKnn {
    pub k: usize,
    pub decay_enabled: bool,
}

impl UserKnn {
    pub fn new(k: usize, decay_enabled: bool) -> Self {
        assert!(k >= 1, "k must be >= 1");
        UserKnn { k, decay_enabled }
    }
}

impl Recommender for UserKnn {
    fn name(&self) -> &'static str {
        "user-knn"
    }

    fn recommend(
        &self,
        dataset: &Dataset,
        target: UserId,
        ctx: &RecommendationContext,
    ) -> Result<RankedList> {
        ctx.validate(dataset)?;
        let profile = dataset.profile(target);

        // Overlap with every other user, via the rater lists of the
        // target's own items.
        let mut overlaps = vec![0u32; dataset.num_users()];
        let mut touched: Vec<UserId> = Vec::new();
        for entry in &profile.entries {
            for rater in dataset.item_raters(entry.item) {
                if rater.user == target {
                    continue;
                }
                let slot = &mut overlaps[rater.user.index()];
                if *slot == 0 {
                    touched.push(rater.user);
                }
                *slot += 1;
            }
        }

        let mut neighbors: Vec<(UserId, f64)> = touched
            .into_iter()
            .map(|v| {
                let sim = cosine(overlaps[v.index()], profile.len(), dataset.profile(v).len());
                (v, sim)
            })
            .collect();
        neighbors.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        neighbors.truncate(self.k);

        let mut scores = vec![0.0f64; dataset.num_items()];
        let mut seen = vec![false; dataset.num_items()];
        let mut candidates: Vec<ItemId> = Vec::new();
        for &(neighbor, sim) in &neighbors {
            for entry in &dataset.profile(neighbor).entries {
                if profile.contains(entry.item) {
                    continue;
                }
                let weight = if self.decay_enabled {
                    let age_days = (ctx.t0 - entry.timestamp) as f64 / SECONDS_PER_DAY;
                    ctx.decay.weight(age_days)?
                } else {
                    1.0
                };
                scores[entry.item.index()] += sim * weight;
                if !seen[entry.item.index()] {
                    seen[entry.item.index()] = true;
                    candidates.push(entry.item);
                }
            }
        }

        candidates.sort_unstable();
        let scored = candidates
            .into_iter()
            .map(|item| (item, scores[item.index()]))
            .collect();
        Ok(assemble_list(dataset, target, scored, ctx.top_n))
    }
}

/// Item-based kNN with the item-item neighborhood precomputed once per
/// dataset: a candidate item is scored by the target's rated items that
/// appear among its k most similar items.
#[derive(Debug, Clone)]
pub struct ItemKnn {
    decay_enabled: bool,
    /// incoming[j] lists every (i, sim(i, j)) with j in the top-k
    /// neighborhood of i, ascending by i.
    incoming: Vec<Vec<(ItemId, f64)>>,
}

impl ItemKnn {
    /// Builds the top-k neighbor lists for every item of `dataset`. The
    /// returned recommender is only valid for that dataset.
    pub fn fit(dataset: &Dataset, k: usize, decay_enabled: bool) -> Self {
        assert!(k >= 1, "k must be >= 1");
        let num_items = dataset.num_items();
        let top_k: Vec<Vec<(ItemId, f64)>> = (0..num_items as u32)
            .into_par_iter()
            .map(|raw| {
                let item = ItemId(raw);
                let mut overlaps = vec![0u32; num_items];
                let mut touched: Vec<ItemId> = Vec::new();
                for rater in dataset.item_raters(item) {
                    for entry in &dataset.profile(rater.user).entries {
                        if entry.item == item {
                            continue;
                        }
                        let slot = &mut overlaps[entry.item.index()];
                        if *slot == 0 {
                            touched.push(entry.item);
                        }
                        *slot += 1;
                    }
                }
                let len_i = dataset.item_raters(item).len();
                let mut sims: Vec<(ItemId, f64)> = touched
                    .into_iter()
                    .map(|other| {
                        let sim = cosine(
                            overlaps[other.index()],
                            len_i,
                            dataset.item_raters(other).len(),
                        );
                        (other, sim)
                    })
                    .collect();
                sims.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                sims.truncate(k);
                sims
            })
            .collect();

        let mut incoming: Vec<Vec<(ItemId, f64)>> = vec![Vec::new(); num_items];
        for (raw, neighbors) in top_k.into_iter().enumerate() {
            let item = ItemId(raw as u32);
            for (neighbor, sim) in neighbors {
                incoming[neighbor.index()].push((item, sim));
            }
        }

        ItemKnn {
            decay_enabled,
            incoming,
        }
    }
}

impl Recommender for ItemKnn {
    fn name(&self) -> &'static str {
        "item-knn"
    }

    fn recommend(
        &self,
        dataset: &Dataset,
        target: UserId,
        ctx: &RecommendationContext,
    ) -> Result<RankedList> {
        ctx.validate(dataset)?;
        assert_eq!(
            self.incoming.len(),
            dataset.num_items(),
            "recommender was fitted on a different dataset"
        );
        let profile = dataset.profile(target);

        let mut scores = vec![0.0f64; dataset.num_items()];
        let mut seen = vec![false; dataset.num_items()];
        let mut candidates: Vec<ItemId> = Vec::new();
        // The decay anchor is the target's own rating time of the profile
        // item j; contributions accumulate in profile order.
        for entry in &profile.entries {
            let weight = if self.decay_enabled {
                let age_days = (ctx.t0 - entry.timestamp) as f64 / SECONDS_PER_DAY;
                ctx.decay.weight(age_days)?
            } else {
                1.0
            };
            for &(candidate, sim) in &self.incoming[entry.item.index()] {
                if profile.contains(candidate) {
                    continue;
                }
                scores[candidate.index()] += sim * weight;
                if !seen[candidate.index()] {
                    seen[candidate.index()] = true;
                    candidates.push(candidate);
                }
            }
        }

        candidates.sort_unstable();
        let scored = candidates
            .into_iter()
            .map(|item| (item, scores[item.index()]))
            .collect();
        Ok(assemble_list(dataset, target, scored, ctx.top_n))
    }
}

/// One-shot kNN recommendation. The item variant refits its neighborhood
/// on every call; batch callers should fit [`ItemKnn`] once instead.
pub fn knn_recommend(
    dataset: &Dataset,
    target: UserId,
    ctx: &RecommendationContext,
    variant: KnnVariant,
    k: usize,
    decay_enabled: bool,
) -> Result<RankedList> {
    match variant {
        KnnVariant::User => UserKnn::new(k, decay_enabled).recommend(dataset, target, ctx),
        KnnVariant::Item => ItemKnn::fit(dataset, k, decay_enabled).recommend(dataset, target, ctx),
    }
}
