//! Offline evaluation protocol.
//!
//! Candidates follow the all-unrated-items rule: each evaluated user is
//! ranked over every item absent from her training profile. A test item is
//! relevant when its rating reaches the threshold (4 on the 1-5 scale by
//! default). nDCG@N is computed per user with binary gains for N from 2 up
//! to the configured maximum, then averaged over the evaluated users.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Dataset, Interaction, RecommendationContext};
use crate::recommend::Recommender;
use crate::stats::two_sided_p_value;

#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Metrics are reported for N in 2..=top_n_max.
    pub top_n_max: usize,
    /// Minimum test rating for an item to count as relevant.
    pub relevance_threshold: f64,
    /// Skip users with no relevant test item (nDCG undefined) instead of
    /// counting them as zero.
    pub skip_users_without_relevant: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            top_n_max: 10,
            relevance_threshold: 4.0,
            skip_users_without_relevant: true,
        }
    }
}

/// Per-N means plus the per-user curves they were averaged from.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// (N, mean nDCG@N) for N in 2..=top_n_max.
    pub per_n: Vec<(usize, f64)>,
    /// Per evaluated user, label order; values parallel `per_n`.
    pub per_user: Vec<(String, Vec<f64>)>,
    pub evaluated_count: usize,
}

/// Test items rated at or above the relevance threshold.
pub fn relevant_items<'a, I>(test_items: I, config: &EvalConfig) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a Interaction>,
{
    test_items
        .into_iter()
        .filter(|r| r.rating >= config.relevance_threshold)
        .map(|r| r.item.clone())
        .collect()
}

/// Binary-gain nDCG at cutoff `n`: hits discounted by log2(position + 1),
/// normalized by the ideal gain of placing relevant items first.
///
/// Errors when `relevant` is empty (the metric is undefined; the harness
/// skips such users).
pub fn ndcg_at<S: AsRef<str>>(ranked: &[S], relevant: &BTreeSet<String>, n: usize) -> Result<f64> {
    assert!(n >= 1, "cutoff must be >= 1");
    if relevant.is_empty() {
        return Err(Error::NoRelevantItems);
    }
    let mut dcg = 0.0;
    for (index, item) in ranked.iter().take(n).enumerate() {
        if relevant.contains(item.as_ref()) {
            dcg += 1.0 / ((index + 2) as f64).log2();
        }
    }
    let mut ideal = 0.0;
    for position in 0..n.min(relevant.len()) {
        ideal += 1.0 / ((position + 2) as f64).log2();
    }
    Ok(dcg / ideal)
}

/// Runs the full protocol: one ranked list per evaluated user over the
/// training dataset only, nDCG@N per user for N in 2..=top_n_max, means
/// over users. Test users must all exist in training; users without a
/// relevant test item are skipped or counted as zero per the config.
pub fn evaluate(
    train: &Dataset,
    test: &[Interaction],
    recommender: &dyn Recommender,
    config: &EvalConfig,
    ctx: &RecommendationContext,
) -> Result<EvalReport> {
    assert!(config.top_n_max >= 2, "top_n_max must be >= 2");
    if test.is_empty() {
        return Err(Error::EmptyInput("test"));
    }

    let mut grouped: BTreeMap<&str, Vec<&Interaction>> = BTreeMap::new();
    for record in test {
        grouped
            .entry(record.user.as_str())
            .or_default()
            .push(record);
    }

    let mut jobs = Vec::new();
    for (label, records) in grouped {
        let user = train
            .user_id(label)
            .ok_or_else(|| Error::TestUserNotInTraining(label.to_owned()))?;
        let relevant = relevant_items(records.iter().copied(), config);
        if relevant.is_empty() && config.skip_users_without_relevant {
            continue;
        }
        jobs.push((label, user, relevant));
    }
    if jobs.is_empty() {
        return Err(Error::NoUsersEvaluated);
    }

    let cutoffs: Vec<usize> = (2..=config.top_n_max).collect();
    let list_ctx = RecommendationContext {
        top_n: config.top_n_max,
        ..ctx.clone()
    };

    let per_user: Vec<(String, Vec<f64>)> = jobs
        .par_iter()
        .map(|(label, user, relevant)| {
            if relevant.is_empty() {
                return Ok((label.to_string(), vec![0.0; cutoffs.len()]));
            }
            let list = recommender.recommend(train, *user, &list_ctx)?;
            let labels = list.item_labels(train);
            let values = cutoffs
                .iter()
                .map(|&n| ndcg_at(&labels, relevant, n))
                .collect::<Result<Vec<f64>>>()?;
            Ok((label.to_string(), values))
        })
        .collect::<Result<Vec<_>>>()?;

    let evaluated_count = per_user.len();
    let mut per_n = Vec::with_capacity(cutoffs.len());
    for (index, &n) in cutoffs.iter().enumerate() {
        let sum: f64 = per_user.iter().map(|(_, values)| values[index]).sum();
        per_n.push((n, sum / evaluated_count as f64));
    }

    Ok(EvalReport {
        per_n,
        per_user,
        evaluated_count,
    })
}

/// Result of a two-sided paired Student's t-test.
#[derive(Debug, Clone, Copy)]
pub struct PairedTTest {
    pub t_statistic: f64,
    pub p_value: f64,
    pub pairs: usize,
}

/// Two-sided paired t-test over the users common to both score maps.
pub fn paired_ttest(
    per_user_a: &BTreeMap<String, f64>,
    per_user_b: &BTreeMap<String, f64>,
) -> Result<PairedTTest> {
    let differences: Vec<f64> = per_user_a
        .iter()
        .filter_map(|(user, &a)| per_user_b.get(user).map(|&b| a - b))
        .collect();
    let m = differences.len();
    if m < 2 {
        return Err(Error::NotEnoughPairs);
    }
    let mean = differences.iter().sum::<f64>() / m as f64;
    let variance = differences.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    if variance == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let standard_error = (variance / m as f64).sqrt();
    let t_statistic = mean / standard_error;
    let p_value = two_sided_p_value(t_statistic, (m - 1) as f64);
    Ok(PairedTTest {
        t_statistic,
        p_value,
        pairs: m,
    })
}

/// Writes the report as TSV rows: N, mean nDCG@N, evaluated-user count.
pub fn write_report(report: &EvalReport, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for &(n, mean) in &report.per_n {
        writeln!(writer, "{}\t{:.6}\t{}", n, mean, report.evaluated_count)
            .map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes per-user curves as TSV rows: user, N, nDCG@N.
pub fn write_per_user(report: &EvalReport, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for (user, values) in &report.per_user {
        for (&(n, _), value) in report.per_n.iter().zip(values) {
            writeln!(writer, "{}\t{}\t{:.6}", user, n, value).map_err(|e| Error::io(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads one cutoff's per-user scores back from a per-user TSV.
pub fn read_per_user(path: &Path, at_n: usize) -> Result<BTreeMap<String, f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scores = BTreeMap::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine {
            line: index + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(malformed(format!(
                "expected 3 fields, found {}",
                fields.len()
            )));
        }
        let n: usize = fields[1]
            .parse()
            .map_err(|_| malformed(format!("bad cutoff `{}`", fields[1])))?;
        if n != at_n {
            continue;
        }
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| malformed(format!("bad score `{}`", fields[2])))?;
        scores.insert(fields[0].to_owned(), value);
    }
    Ok(scores)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}
