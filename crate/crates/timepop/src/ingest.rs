//! Rating-file parsing and train/test split persistence.
//!
//! Two input formats are supported: the `::`-separated MovieLens dat
//! layout and single-character-delimited files with a configurable column
//! order. The canonical interchange format for splits is four-column TSV
//! (user, item, rating, timestamp), one record per line, grouped by user
//! and time-ascending within each user.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::Interaction;

/// Input layout of a ratings file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingFormat {
    /// `user::item::rating::timestamp`
    MovielensDat,
    /// Single-character delimiter with configurable column order.
    Delimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimestampUnit {
    Seconds,
    Milliseconds,
}

/// Record fields, for describing delimited column orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    User,
    Item,
    Rating,
    Timestamp,
}

#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub format: RatingFormat,
    pub delimiter: char,
    pub column_order: [Field; 4],
    pub timestamp_unit: TimestampUnit,
    pub has_header: bool,
}

pub const DEFAULT_COLUMNS: [Field; 4] = [Field::User, Field::Item, Field::Rating, Field::Timestamp];

impl ParseConfig {
    pub fn movielens_dat() -> Self {
        ParseConfig {
            format: RatingFormat::MovielensDat,
            delimiter: ':',
            column_order: DEFAULT_COLUMNS,
            timestamp_unit: TimestampUnit::Seconds,
            has_header: false,
        }
    }

    /// Canonical split format: tab-separated user, item, rating, timestamp.
    pub fn tsv() -> Self {
        ParseConfig {
            format: RatingFormat::Delimited,
            delimiter: '\t',
            column_order: DEFAULT_COLUMNS,
            timestamp_unit: TimestampUnit::Seconds,
            has_header: false,
        }
    }

    pub fn csv() -> Self {
        ParseConfig {
            delimiter: ',',
            ..ParseConfig::tsv()
        }
    }

    fn validate(&self) -> Result<()> {
        for field in [Field::User, Field::Item, Field::Rating, Field::Timestamp] {
            if self.column_order.iter().filter(|&&f| f == field).count() != 1 {
                return Err(Error::InvalidConfig(format!(
                    "column order must name each field exactly once, got {:?}",
                    self.column_order
                )));
            }
        }
        Ok(())
    }
}

/// Parses one ratings stream. Blank lines are ignored, CRLF is accepted,
/// and malformed lines report their 1-based line number.
pub fn parse_interactions<R: BufRead>(source: R, config: &ParseConfig) -> Result<Vec<Interaction>> {
    config.validate()?;
    let mut records = Vec::new();
    for (index, line) in source.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if config.has_header && index == 0 {
            continue;
        }
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            continue;
        }
        records.push(parse_line(trimmed, line_no, config)?);
    }
    Ok(records)
}

/// Parses a ratings file from disk.
pub fn parse_file(path: &Path, config: &ParseConfig) -> Result<Vec<Interaction>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_interactions(BufReader::new(file), config)
}

fn parse_line(line: &str, line_no: usize, config: &ParseConfig) -> Result<Interaction> {
    let malformed = |message: String| Error::MalformedLine {
        line: line_no,
        message,
    };

    let tokens: Vec<&str> = match config.format {
        RatingFormat::MovielensDat => line.split("::").collect(),
        RatingFormat::Delimited => line.split(config.delimiter).collect(),
    };
    if tokens.len() != 4 {
        return Err(malformed(format!(
            "expected 4 fields, found {}",
            tokens.len()
        )));
    }

    let mut user = "";
    let mut item = "";
    let mut rating_token = "";
    let mut timestamp_token = "";
    for (token, field) in tokens.iter().zip(config.column_order.iter()) {
        let token = token.trim();
        match field {
            Field::User => user = token,
            Field::Item => item = token,
            Field::Rating => rating_token = token,
            Field::Timestamp => timestamp_token = token,
        }
    }

    if user.is_empty() || item.is_empty() {
        return Err(malformed("empty user or item id".to_owned()));
    }
    let rating: f64 = rating_token
        .parse()
        .map_err(|_| malformed(format!("bad rating `{rating_token}`")))?;
    if !rating.is_finite() {
        return Err(malformed(format!("non-finite rating `{rating_token}`")));
    }
    let raw_timestamp: i64 = timestamp_token
        .parse()
        .map_err(|_| malformed(format!("bad timestamp `{timestamp_token}`")))?;
    if raw_timestamp < 0 {
        return Err(malformed(format!("negative timestamp `{timestamp_token}`")));
    }
    let timestamp = match config.timestamp_unit {
        TimestampUnit::Seconds => raw_timestamp,
        TimestampUnit::Milliseconds => raw_timestamp / 1000,
    };

    Ok(Interaction::new(user, item, rating, timestamp))
}

/// Writes `destination.train.tsv` and `destination.test.tsv`, each sorted
/// by (user, timestamp, item). Returns the two paths.
pub fn write_split(
    train: &[Interaction],
    test: &[Interaction],
    destination: &Path,
) -> Result<(PathBuf, PathBuf)> {
    if train.is_empty() {
        return Err(Error::EmptyInput("train"));
    }
    if test.is_empty() {
        return Err(Error::EmptyInput("test"));
    }
    let train_path = path_with_suffix(destination, ".train.tsv");
    let test_path = path_with_suffix(destination, ".test.tsv");
    write_interactions(train, &train_path)?;
    write_interactions(test, &test_path)?;
    Ok((train_path, test_path))
}

/// Writes one interaction file in the canonical TSV layout.
pub fn write_interactions(records: &[Interaction], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut ordered: Vec<&Interaction> = records.iter().collect();
    ordered.sort_by(|a, b| {
        (a.user.as_str(), a.timestamp, a.item.as_str()).cmp(&(
            b.user.as_str(),
            b.timestamp,
            b.item.as_str(),
        ))
    });
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for r in ordered {
        writeln!(
            writer,
            "{}\t{}\t{}\t{}",
            r.user, r.item, r.rating, r.timestamp
        )
        .map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn path_with_suffix(destination: &Path, suffix: &str) -> PathBuf {
    let mut name = destination.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}
