//! Time-aware local-popularity top-N recommendation.
//!
//! Instead of treating popularity as a global property, the core algorithm
//! personalizes it: for each target user it finds her *precursors*, the
//! users who rated the same items strictly earlier, and ranks the items
//! those precursors hold, weighting every contribution by an exponential
//! decay of a two-anchor elapsed time that penalizes both inactive users
//! and stale ratings. Targets without precursors, and list slots left
//! after scoring, fall back to global popularity.
//!
//! The crate also ships the offline experiment machinery around the
//! algorithm: rating-file ingestion, fixed-timestamp train/test splitting
//! that maximizes the number of evaluable users, MostPopular and kNN
//! baselines (with optional temporal decay), an nDCG@N evaluation harness
//! under the all-unrated-items protocol, paired significance testing and
//! seeded synthetic dataset generators.
//!
//! ```
//! use timepop::{build_dataset, timepop_recommend, Interaction, RecommendationContext};
//!
//! let records = vec![
//!     Interaction::new("ann", "dune", 5.0, 700),
//!     Interaction::new("bob", "dune", 4.0, 100),
//!     Interaction::new("bob", "solaris", 5.0, 900),
//! ];
//! let dataset = build_dataset(&records).unwrap();
//! let target = dataset.user_id("ann").unwrap();
//! let ctx = RecommendationContext::new(1_000, 10);
//! let list = timepop_recommend(&dataset, target, &ctx).unwrap();
//! assert_eq!(dataset.item_label(list.entries[0].item), "solaris");
//! ```

pub mod decay;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod model;
pub mod precursors;
pub mod recommend;
pub mod split;
pub mod stats;
pub mod synth;

pub use decay::{decay_weight, delta_t_days, DecayKind, DecayParams, SECONDS_PER_DAY};
pub use error::{Error, Result};
pub use eval::{
    evaluate, ndcg_at, paired_ttest, read_per_user, relevant_items, write_per_user, write_report,
    EvalConfig, EvalReport, PairedTTest,
};
pub use ingest::{parse_file, parse_interactions, write_split, ParseConfig};
pub use model::{
    build_dataset, Dataset, Interaction, ItemId, RecommendationContext, UserId, UserProfile,
};
pub use precursors::{
    candidate_precursors, compute_tau, precursor_set, CandidateEntry, PrecursorSet, TauMode,
};
pub use recommend::{
    knn_recommend, most_popular, timepop_recommend, write_recommendations, ItemKnn, KnnVariant,
    MostPopular, RankedList, Recommender, ScoredItem, Source, TimePop, UserKnn,
};
pub use split::{apply_split, count_eligible_users, find_best_split, SplitResult, SplitSpec};
