//! Seeded synthetic datasets.
//!
//! `planted_signal` builds a population where each test user's future
//! items come from the recent history of designated earlier adopters, so
//! a local, time-aware signal exists that global popularity cannot see.
//! `scaled_history` builds a million-interaction-class dataset with a
//! skewed popularity profile for throughput checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::Interaction;

const DAY: i64 = 86_400;

/// Layout of the planted-signal population: `groups` disjoint communities,
/// each with a few early-adopter leaders and a crowd of followers who
/// discover the leaders' early items later and whose future interactions
/// are drawn from the leaders' recent items.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub groups: usize,
    pub leaders_per_group: usize,
    pub followers_per_group: usize,
    /// Items each leader rates early and each follower repeats later.
    pub early_items_per_group: usize,
    /// Items each leader rates shortly before the reference timestamp.
    pub future_items_per_group: usize,
    /// Follower-unique filler items, one rater each.
    pub junk_items_per_follower: usize,
    /// Future (test) items per follower, sampled from the group's fresh
    /// items with ratings of 4 or 5.
    pub test_items_per_follower: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        // 10 x (5 + 45) = 500 users.
        PlantedConfig {
            groups: 10,
            leaders_per_group: 5,
            followers_per_group: 45,
            early_items_per_group: 10,
            future_items_per_group: 15,
            junk_items_per_follower: 6,
            test_items_per_follower: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedDataset {
    pub train: Vec<Interaction>,
    pub test: Vec<Interaction>,
    /// Reference timestamp separating train from test.
    pub t0: i64,
}

impl PlantedConfig {
    pub fn num_users(&self) -> usize {
        self.groups * (self.leaders_per_group + self.followers_per_group)
    }
}

/// Generates the planted-signal dataset for a seed. Identical seeds give
/// identical datasets.
pub fn planted_signal(config: &PlantedConfig, seed: u64) -> PlantedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let t0 = 80 * DAY;

    for group in 0..config.groups {
        let early_items: Vec<String> = (0..config.early_items_per_group)
            .map(|m| format!("g{group:02}-early{m:02}"))
            .collect();
        let fresh_items: Vec<String> = (0..config.future_items_per_group)
            .map(|m| format!("g{group:02}-fresh{m:02}"))
            .collect();

        for leader in 0..config.leaders_per_group {
            let name = format!("g{group:02}-lead{leader:02}");
            // Early adoption, strictly before any follower touches these.
            for item in &early_items {
                let t = rng.random_range(DAY..20 * DAY);
                train.push(Interaction::new(&name, item, rating(&mut rng), t));
            }
            // Recent activity close to the reference timestamp.
            for item in &fresh_items {
                let t = rng.random_range(60 * DAY..79 * DAY);
                train.push(Interaction::new(&name, item, rating(&mut rng), t));
            }
        }

        for follower in 0..config.followers_per_group {
            let name = format!("g{group:02}-fan{follower:02}");
            for item in &early_items {
                let t = rng.random_range(30 * DAY..50 * DAY);
                train.push(Interaction::new(&name, item, rating(&mut rng), t));
            }
            for junk in 0..config.junk_items_per_follower {
                let item = format!("junk-g{group:02}-fan{follower:02}-{junk}");
                let t = rng.random_range(30 * DAY..55 * DAY);
                train.push(Interaction::new(&name, &item, rating(&mut rng), t));
            }
            // The follower's future: a sample of the leaders' fresh items,
            // rated highly after the reference timestamp.
            let mut picks: Vec<usize> = (0..fresh_items.len()).collect();
            for slot in 0..config.test_items_per_follower.min(fresh_items.len()) {
                let choice = rng.random_range(slot..picks.len());
                picks.swap(slot, choice);
                let item = &fresh_items[picks[slot]];
                let t = rng.random_range(81 * DAY..90 * DAY);
                let r = if rng.random_bool(0.5) { 4.0 } else { 5.0 };
                test.push(Interaction::new(&name, item, r, t));
            }
        }
    }

    PlantedDataset { train, test, t0 }
}

fn rating(rng: &mut ChaCha8Rng) -> f64 {
    f64::from(rng.random_range(1..=5u8))
}

/// Size of a generated history for throughput checks.
#[derive(Debug, Clone, Copy)]
pub struct ScaleConfig {
    pub users: usize,
    pub items: usize,
    /// Approximate total interaction count.
    pub interactions: usize,
}

impl ScaleConfig {
    /// Movielens1M-class dimensions.
    pub fn movielens_1m() -> Self {
        ScaleConfig {
            users: 6_040,
            items: 3_706,
            interactions: 1_000_000,
        }
    }
}

/// Generates a skew-popularity interaction history spanning three years.
/// Item choice is quadratically biased toward low indices so a popular
/// head exists; most users stay active across the whole period so a
/// feasible fixed-timestamp split always exists.
pub fn scaled_history(config: &ScaleConfig, seed: u64) -> Vec<Interaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span_days: i64 = 1_095;
    let per_user = (config.interactions / config.users).max(4);
    let mut records = Vec::with_capacity(config.interactions + config.users * 4);

    for user in 0..config.users {
        let name = format!("u{user:06}");
        let count = rng.random_range((per_user / 2).max(4)..=per_user * 3 / 2 + 4);
        // 80% of users span the whole period; the rest are short-lived.
        let (start_day, end_day) = if rng.random_bool(0.8) {
            (rng.random_range(0..30), span_days - rng.random_range(0..30))
        } else {
            let start = rng.random_range(0..span_days - 200);
            (start, (start + rng.random_range(100..400)).min(span_days))
        };
        let start = start_day * DAY;
        let end = end_day * DAY;

        let mut chosen: Vec<u32> = Vec::with_capacity(count);
        while chosen.len() < count {
            let draw: f64 = rng.random();
            let item = ((config.items as f64) * draw * draw) as u32;
            let item = item.min(config.items as u32 - 1);
            if !chosen.contains(&item) {
                chosen.push(item);
            }
        }
        for item in chosen {
            let t = rng.random_range(start..end);
            records.push(Interaction::new(
                &name,
                format!("m{item:05}"),
                rating(&mut rng),
                t,
            ));
        }
    }
    records
}
