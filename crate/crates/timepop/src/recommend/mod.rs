//! Top-N list production: the time-aware local-popularity algorithm and
//! the MostPopular / kNN baselines, all sharing one ranking contract.
//!
//! Lists never contain items from the target's training profile, are
//! strictly ordered by (score desc, global popularity desc, item asc),
//! and short lists are completed with globally popular items flagged as
//! backfill below every scored entry.

mod knn;
mod popularity;
mod timepop;

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, ItemId, RecommendationContext, UserId};

pub use knn::{knn_recommend, ItemKnn, KnnVariant, UserKnn};
pub use popularity::{most_popular, MostPopular};
pub use timepop::{timepop_recommend, TimePop};

/// Whether an entry carries an algorithm score or was filled in from
/// global popularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Scored,
    Backfill,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Scored => "scored",
            Source::Backfill => "backfill",
        }
    }
}

/// One ranked entry. Backfill entries carry score 0 and always rank below
/// every scored entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredItem {
    pub item: ItemId,
    pub score: f64,
    pub source: Source,
}

/// A top-N list for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub user: UserId,
    pub entries: Vec<ScoredItem>,
}

impl RankedList {
    /// Ranked item labels, for metric computation and output.
    pub fn item_labels<'a>(&self, dataset: &'a Dataset) -> Vec<&'a str> {
        self.entries
            .iter()
            .map(|e| dataset.item_label(e.item))
            .collect()
    }
}

/// A top-N producer over an immutable dataset. Implementations are pure
/// functions of (dataset, user, context), so users can be fanned out
/// across threads freely.
pub trait Recommender: Sync {
    fn name(&self) -> &'static str;

    fn recommend(
        &self,
        dataset: &Dataset,
        target: UserId,
        ctx: &RecommendationContext,
    ) -> Result<RankedList>;
}

/// Sorts scored candidates into the ranking contract and pads with
/// popularity backfill. Zero-scored candidates are treated as unscored.
pub(crate) fn assemble_list(
    dataset: &Dataset,
    target: UserId,
    mut scored: Vec<(ItemId, f64)>,
    n: usize,
) -> RankedList {
    scored.retain(|&(_, score)| score > 0.0);
    scored.sort_unstable_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| dataset.popularity(b.0).cmp(&dataset.popularity(a.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(n);

    let mut entries: Vec<ScoredItem> = scored
        .iter()
        .map(|&(item, score)| ScoredItem {
            item,
            score,
            source: Source::Scored,
        })
        .collect();

    if entries.len() < n {
        let profile = dataset.profile(target);
        let listed: HashSet<ItemId> = entries.iter().map(|e| e.item).collect();
        for &item in dataset.popularity_order() {
            if entries.len() == n {
                break;
            }
            if profile.contains(item) || listed.contains(&item) {
                continue;
            }
            entries.push(ScoredItem {
                item,
                score: 0.0,
                source: Source::Backfill,
            });
        }
    }

    RankedList {
        user: target,
        entries,
    }
}

/// Writes lists as TSV rows: user, 1-based rank, item, score to six
/// decimals, source flag. Rows are grouped by user in label order.
pub fn write_recommendations(lists: &[RankedList], dataset: &Dataset, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut ordered: Vec<&RankedList> = lists.iter().collect();
    ordered.sort_by_key(|l| dataset.user_label(l.user));
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for list in ordered {
        let user = dataset.user_label(list.user);
        for (index, entry) in list.entries.iter().enumerate() {
            writeln!(
                writer,
                "{}\t{}\t{}\t{:.6}\t{}",
                user,
                index + 1,
                dataset.item_label(entry.item),
                entry.score,
                entry.source.as_str()
            )
            .map_err(|e| Error::io(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
