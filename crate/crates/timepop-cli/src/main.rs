//! One binary driving the whole offline pipeline: split a ratings file at
//! the best fixed timestamp, produce top-N recommendations, evaluate
//! algorithms with nDCG@N, inspect precursor sets and compare runs with a
//! paired t-test.
//!
//! Every run writes a `manifest.txt` with the effective parameters so any
//! output can be reproduced byte for byte. `TIMEPOP_WORKERS` caps the
//! worker threads; results do not depend on it.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use timepop::synth::{planted_signal, PlantedConfig};
use timepop::{
    apply_split, evaluate, find_best_split, paired_ttest, precursor_set, read_per_user,
    write_per_user, write_recommendations, write_report, write_split, Dataset, DecayKind,
    DecayParams, Error as CoreError, EvalConfig, Interaction, ItemKnn, MostPopular, ParseConfig,
    RankedList, RecommendationContext, Recommender, SplitSpec, TauMode, TimePop, UserId, UserKnn,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_workers();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn init_workers() {
    if let Ok(value) = std::env::var("TIMEPOP_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            if workers >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global();
            }
        }
    }
}

// ---------------------------------------------------------------------
// Argument schema
// ---------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "timepop",
    about = "Time-aware local-popularity recommendations and offline evaluation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a ratings file at the fixed timestamp that maximizes the
    /// number of evaluable users.
    Split(SplitArgs),
    /// Produce top-N recommendation lists from a training file.
    Recommend(RecommendArgs),
    /// Evaluate an algorithm with nDCG@N over a train/test split.
    Evaluate(EvaluateArgs),
    /// Dump the candidate-precursor table for one user.
    InspectPrecursors(InspectArgs),
    /// Paired two-sided t-test between two per-user result files.
    Ttest(TtestArgs),
    /// Generate the seeded planted-signal synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// user::item::rating::timestamp
    MovielensDat,
    /// Tab-separated columns
    Tsv,
    /// Comma-separated columns
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitArg {
    Seconds,
    Milliseconds,
}

#[derive(Args)]
struct InputFormat {
    /// Input layout.
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,
    /// Delimiter override for delimited formats.
    #[arg(long)]
    delimiter: Option<char>,
    /// Column order as a permutation of the letters u, i, r, t.
    #[arg(long, default_value = "uirt")]
    columns: String,
    /// Unit of the timestamp column.
    #[arg(long, value_enum, default_value = "seconds")]
    timestamp_unit: UnitArg,
    /// Skip the first line.
    #[arg(long)]
    has_header: bool,
}

impl InputFormat {
    fn to_config(&self) -> Result<ParseConfig, CliError> {
        let mut config = match self.format {
            FormatArg::MovielensDat => ParseConfig::movielens_dat(),
            FormatArg::Tsv => ParseConfig::tsv(),
            FormatArg::Csv => ParseConfig::csv(),
        };
        if self.format != FormatArg::MovielensDat {
            if let Some(delimiter) = self.delimiter {
                config.delimiter = delimiter;
            }
            config.column_order = parse_columns(&self.columns)?;
        }
        config.timestamp_unit = match self.timestamp_unit {
            UnitArg::Seconds => timepop::ingest::TimestampUnit::Seconds,
            UnitArg::Milliseconds => timepop::ingest::TimestampUnit::Milliseconds,
        };
        config.has_header = self.has_header;
        Ok(config)
    }

    fn describe(&self, manifest: &mut Manifest) {
        manifest.push(
            "format",
            match self.format {
                FormatArg::MovielensDat => "movielens-dat",
                FormatArg::Tsv => "tsv",
                FormatArg::Csv => "csv",
            },
        );
        if let Some(delimiter) = self.delimiter {
            manifest.push("delimiter", delimiter);
        }
        manifest.push("columns", &self.columns);
        manifest.push(
            "timestamp_unit",
            match self.timestamp_unit {
                UnitArg::Seconds => "seconds",
                UnitArg::Milliseconds => "milliseconds",
            },
        );
        manifest.push("has_header", self.has_header);
    }
}

fn parse_columns(spec: &str) -> Result<[timepop::ingest::Field; 4], CliError> {
    use timepop::ingest::Field;
    let fields: Vec<Field> = spec
        .chars()
        .map(|c| match c {
            'u' => Ok(Field::User),
            'i' => Ok(Field::Item),
            'r' => Ok(Field::Rating),
            't' => Ok(Field::Timestamp),
            other => Err(CliError::Usage(format!(
                "unknown column letter `{other}` in `{spec}`"
            ))),
        })
        .collect::<Result<_, _>>()?;
    let array: [Field; 4] = fields.try_into().map_err(|_| {
        CliError::Usage(format!(
            "--columns needs exactly four letters, got `{spec}`"
        ))
    })?;
    Ok(array)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Timepop,
    Mostpop,
    UserKnn,
    ItemKnn,
}

impl AlgoArg {
    fn as_str(self) -> &'static str {
        match self {
            AlgoArg::Timepop => "timepop",
            AlgoArg::Mostpop => "mostpop",
            AlgoArg::UserKnn => "user-knn",
            AlgoArg::ItemKnn => "item-knn",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecayArg {
    Exp,
    Linear,
    None,
}

/// Precursor threshold: `auto` or a fixed number (plain or `fixed:2.5`).
#[derive(Clone, Copy, Debug)]
struct TauArg(TauMode);

impl std::str::FromStr for TauArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(TauArg(TauMode::Auto));
        }
        let value = s.strip_prefix("fixed:").unwrap_or(s);
        value
            .parse::<f64>()
            .map(|v| TauArg(TauMode::Fixed(v)))
            .map_err(|_| format!("expected `auto`, a number, or `fixed:<number>`, got `{s}`"))
    }
}

#[derive(Args)]
struct AlgoOptions {
    /// Algorithm producing the lists.
    #[arg(long, value_enum, default_value = "timepop")]
    algo: AlgoArg,
    /// Decay rate per day.
    #[arg(long, default_value_t = 0.005)]
    beta: f64,
    /// Decay shape; `none` disables temporal weighting.
    #[arg(long, value_enum, default_value = "exp")]
    decay: DecayArg,
    /// Precursor threshold: `auto` (mean) or a fixed value.
    #[arg(long, default_value = "auto")]
    tau: TauArg,
    /// Neighborhood size for the kNN algorithms.
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Reference timestamp; defaults to the latest training timestamp.
    #[arg(long)]
    t0: Option<i64>,
}

impl AlgoOptions {
    fn validate(&self) -> Result<(), CliError> {
        if self.beta <= 0.0 || self.beta.is_nan() {
            return Err(CliError::Usage(format!(
                "--beta must be positive, got {}",
                self.beta
            )));
        }
        if self.k < 1 {
            return Err(CliError::Usage("--k must be at least 1".to_owned()));
        }
        Ok(())
    }

    fn context(&self, dataset: &Dataset, top_n: usize) -> RecommendationContext {
        let kind = match self.decay {
            DecayArg::Exp => DecayKind::Exponential,
            DecayArg::Linear => DecayKind::Linear,
            DecayArg::None => DecayKind::None,
        };
        RecommendationContext {
            t0: self.t0.unwrap_or_else(|| dataset.max_timestamp()),
            top_n,
            decay: DecayParams {
                beta: self.beta,
                kind,
            },
            tau_mode: self.tau.0,
        }
    }

    fn recommender(&self, dataset: &Dataset) -> Box<dyn Recommender> {
        let decay_enabled = self.decay != DecayArg::None;
        match self.algo {
            AlgoArg::Timepop => Box::new(TimePop),
            AlgoArg::Mostpop => Box::new(MostPopular),
            AlgoArg::UserKnn => Box::new(UserKnn::new(self.k, decay_enabled)),
            AlgoArg::ItemKnn => Box::new(ItemKnn::fit(dataset, self.k, decay_enabled)),
        }
    }

    fn describe(&self, manifest: &mut Manifest, effective_t0: i64) {
        manifest.push("algo", self.algo.as_str());
        manifest.push("beta", self.beta);
        manifest.push(
            "decay",
            match self.decay {
                DecayArg::Exp => "exp",
                DecayArg::Linear => "linear",
                DecayArg::None => "none",
            },
        );
        match self.tau.0 {
            TauMode::Auto => manifest.push("tau", "auto"),
            TauMode::Fixed(value) => manifest.push("tau", format!("fixed:{value}")),
        }
        manifest.push("k", self.k);
        manifest.push("t0", effective_t0);
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Ratings file to split.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    input_format: InputFormat,
    /// Minimum training interactions per evaluated user.
    #[arg(long, default_value_t = 15)]
    min_train: usize,
    /// Minimum test interactions per evaluated user.
    #[arg(long, default_value_t = 5)]
    min_test: usize,
    /// Split at this timestamp instead of searching for the best one.
    #[arg(long)]
    split_time: Option<i64>,
    /// Side the split-instant interactions fall on. `train` shifts the
    /// effective timestamp by one second, since timestamps are integers.
    #[arg(long, value_enum, default_value = "test")]
    boundary: BoundaryArg,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Test,
    Train,
}

#[derive(Args)]
struct RecommendArgs {
    /// Training ratings file.
    #[arg(long)]
    train: PathBuf,
    #[command(flatten)]
    input_format: InputFormat,
    #[command(flatten)]
    algo: AlgoOptions,
    /// List length.
    #[arg(long, default_value_t = 10)]
    topn: usize,
    /// Restrict to these users (repeatable); default is every user.
    #[arg(long)]
    user: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Training ratings file.
    #[arg(long)]
    train: PathBuf,
    /// Test ratings file.
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    input_format: InputFormat,
    #[command(flatten)]
    algo: AlgoOptions,
    /// Largest cutoff N; the report covers 2..=N.
    #[arg(long, default_value_t = 10)]
    topn: usize,
    /// Relevance threshold on test ratings.
    #[arg(long, default_value_t = 4.0)]
    threshold: f64,
    /// Count users without relevant test items as zero instead of
    /// skipping them.
    #[arg(long)]
    count_users_without_relevant: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// Training ratings file.
    #[arg(long)]
    train: PathBuf,
    #[command(flatten)]
    input_format: InputFormat,
    /// Target user.
    #[arg(long)]
    user: String,
    /// Precursor threshold mode.
    #[arg(long, default_value = "auto")]
    tau: TauArg,
}

#[derive(Args)]
struct TtestArgs {
    /// Per-user TSV of the first system.
    #[arg(long)]
    a: PathBuf,
    /// Per-user TSV of the second system.
    #[arg(long)]
    b: PathBuf,
    /// Cutoff N at which the per-user scores are compared.
    #[arg(long, default_value_t = 10)]
    at: usize,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Communities in the population.
    #[arg(long, default_value_t = 10)]
    groups: usize,
    /// Early-adopter users per community.
    #[arg(long, default_value_t = 5)]
    leaders: usize,
    /// Follower (test) users per community.
    #[arg(long, default_value_t = 45)]
    followers: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

// ---------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    Core(CoreError),
    Usage(String),
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(err) => write!(f, "{err}"),
            CliError::Usage(message) => write!(f, "{message}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        CliError::Core(err)
    }
}

impl CliError {
    /// Distinct exit codes per failure family: 3 I/O, 4 malformed input,
    /// 5 infeasible split, 6 unknown user, 7 degenerate statistics.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(err) => match err {
                CoreError::Io { .. } => 3,
                CoreError::MalformedLine { .. }
                | CoreError::InvalidConfig(_)
                | CoreError::NonFiniteRating { .. }
                | CoreError::NegativeTimestamp { .. }
                | CoreError::EmptyDataset
                | CoreError::EmptyInput(_) => 4,
                CoreError::NoFeasibleSplit | CoreError::NoEvaluatedUsers => 5,
                CoreError::UnknownUser(_) | CoreError::TestUserNotInTraining(_) => 6,
                CoreError::NotEnoughPairs | CoreError::DegenerateSample => 7,
                _ => 1,
            },
        }
    }
}

// ---------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------

/// Ordered key-value run description; rewriting a run from its manifest
/// reproduces the outputs byte for byte.
struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    fn new(command: &str) -> Self {
        Manifest {
            entries: vec![("command".to_owned(), command.to_owned())],
        }
    }

    fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_owned(), value.to_string()));
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CoreError::Io {
            path: dir.to_owned(),
            source: e,
        })?;
        let path = dir.join("manifest.txt");
        let file = File::create(&path).map_err(|e| CoreError::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut writer = BufWriter::new(file);
        for (key, value) in &self.entries {
            writeln!(writer, "{key} = {value}").map_err(|e| CoreError::Io {
                path: path.clone(),
                source: e,
            })?;
        }
        writer
            .flush()
            .map_err(|e| CoreError::Io { path, source: e })?;
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Split(args) => run_split(args),
        Command::Recommend(args) => run_recommend(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::InspectPrecursors(args) => run_inspect(args),
        Command::Ttest(args) => run_ttest(args),
        Command::Synth(args) => run_synth(args),
    }
}

fn load_dataset(
    path: &Path,
    format: &InputFormat,
) -> Result<(Vec<Interaction>, Dataset), CliError> {
    let config = format.to_config()?;
    let records = timepop::parse_file(path, &config)?;
    let dataset = timepop::build_dataset(&records)?;
    Ok((records, dataset))
}

fn run_split(args: SplitArgs) -> Result<(), CliError> {
    if args.min_train < 1 || args.min_test < 1 {
        return Err(CliError::Usage(
            "--min-train and --min-test must be at least 1".to_owned(),
        ));
    }
    let (_, dataset) = load_dataset(&args.input, &args.input_format)?;
    let searched = match args.split_time {
        Some(time) => SplitSpec::new(time, args.min_train, args.min_test),
        None => find_best_split(&dataset, args.min_train, args.min_test)?,
    };
    // With integer timestamps, putting the boundary instant into train is
    // the same split shifted one second later.
    let effective = match args.boundary {
        BoundaryArg::Test => searched,
        BoundaryArg::Train => {
            SplitSpec::new(searched.split_time + 1, args.min_train, args.min_test)
        }
    };
    let result = apply_split(&dataset, &effective)?;
    let (train_path, test_path) =
        write_split(&result.train, &result.test, &args.out.join("split"))?;

    let mut manifest = Manifest::new("split");
    manifest.push("input", args.input.display());
    args.input_format.describe(&mut manifest);
    manifest.push("min_train", args.min_train);
    manifest.push("min_test", args.min_test);
    manifest.push(
        "boundary",
        match args.boundary {
            BoundaryArg::Test => "test",
            BoundaryArg::Train => "train",
        },
    );
    manifest.push("split_time", effective.split_time);
    manifest.push("evaluated_users", result.evaluated_users.len());
    manifest.push("train_records", result.train.len());
    manifest.push("test_records", result.test.len());
    manifest.write(&args.out)?;

    println!(
        "split at {} -> {} evaluated users, {} train / {} test records",
        effective.split_time,
        result.evaluated_users.len(),
        result.train.len(),
        result.test.len()
    );
    println!("wrote {} and {}", train_path.display(), test_path.display());
    Ok(())
}

fn run_recommend(args: RecommendArgs) -> Result<(), CliError> {
    args.algo.validate()?;
    if args.topn < 1 {
        return Err(CliError::Usage("--topn must be at least 1".to_owned()));
    }
    let (_, dataset) = load_dataset(&args.train, &args.input_format)?;
    let ctx = args.algo.context(&dataset, args.topn);
    let recommender = args.algo.recommender(&dataset);

    let targets: Vec<UserId> = if args.user.is_empty() {
        dataset.users().collect()
    } else {
        args.user
            .iter()
            .map(|label| dataset.require_user(label))
            .collect::<Result<_, _>>()?
    };
    let lists: Vec<RankedList> = targets
        .par_iter()
        .map(|&user| recommender.recommend(&dataset, user, &ctx))
        .collect::<Result<_, _>>()?;

    fs::create_dir_all(&args.out).map_err(|e| CoreError::Io {
        path: args.out.clone(),
        source: e,
    })?;
    let out_path = args.out.join("recommendations.tsv");
    write_recommendations(&lists, &dataset, &out_path)?;

    let mut manifest = Manifest::new("recommend");
    manifest.push("train", args.train.display());
    args.input_format.describe(&mut manifest);
    args.algo.describe(&mut manifest, ctx.t0);
    manifest.push("topn", args.topn);
    manifest.push("users", lists.len());
    manifest.write(&args.out)?;

    println!(
        "wrote {} lists ({}) to {}",
        lists.len(),
        recommender.name(),
        out_path.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    args.algo.validate()?;
    if args.topn < 2 {
        return Err(CliError::Usage(
            "--topn must be at least 2 (the report covers 2..=N)".to_owned(),
        ));
    }
    if !args.threshold.is_finite() {
        return Err(CliError::Usage("--threshold must be finite".to_owned()));
    }
    let (_, train_ds) = load_dataset(&args.train, &args.input_format)?;
    let test = timepop::parse_file(&args.test, &args.input_format.to_config()?)?;
    let ctx = args.algo.context(&train_ds, args.topn);
    let recommender = args.algo.recommender(&train_ds);
    let config = EvalConfig {
        top_n_max: args.topn,
        relevance_threshold: args.threshold,
        skip_users_without_relevant: !args.count_users_without_relevant,
    };
    let report = evaluate(&train_ds, &test, recommender.as_ref(), &config, &ctx)?;

    fs::create_dir_all(&args.out).map_err(|e| CoreError::Io {
        path: args.out.clone(),
        source: e,
    })?;
    write_report(&report, &args.out.join("report.tsv"))?;
    write_per_user(&report, &args.out.join("per_user.tsv"))?;

    let mut manifest = Manifest::new("evaluate");
    manifest.push("train", args.train.display());
    manifest.push("test", args.test.display());
    args.input_format.describe(&mut manifest);
    args.algo.describe(&mut manifest, ctx.t0);
    manifest.push("topn", args.topn);
    manifest.push("threshold", args.threshold);
    manifest.push(
        "skip_users_without_relevant",
        !args.count_users_without_relevant,
    );
    manifest.push("evaluated_users", report.evaluated_count);
    manifest.write(&args.out)?;

    for &(n, mean) in &report.per_n {
        println!(
            "{} nDCG@{n} = {mean:.6} over {} users",
            recommender.name(),
            report.evaluated_count
        );
    }
    Ok(())
}

fn run_inspect(args: InspectArgs) -> Result<(), CliError> {
    let (_, dataset) = load_dataset(&args.train, &args.input_format)?;
    let target = dataset.require_user(&args.user)?;
    let set = precursor_set(&dataset, target, args.tau.0);
    eprintln!("tau = {}", set.tau);
    let mut stdout = std::io::stdout().lock();
    for candidate in &set.candidates {
        let row = writeln!(
            stdout,
            "{}\t{}\t{}",
            dataset.user_label(candidate.candidate),
            candidate.common_before,
            set.is_precursor(candidate.candidate)
        );
        match row {
            Ok(()) => {}
            // Downstream consumers like `head` may close the pipe early.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
            Err(e) => {
                return Err(CoreError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }
                .into())
            }
        }
    }
    Ok(())
}

fn run_ttest(args: TtestArgs) -> Result<(), CliError> {
    let a = read_per_user(&args.a, args.at)?;
    let b = read_per_user(&args.b, args.at)?;
    let result = paired_ttest(&a, &b)?;
    println!("t\t{:.6}", result.t_statistic);
    println!("p\t{:.6}", result.p_value);
    println!("pairs\t{}", result.pairs);
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), CliError> {
    let config = PlantedConfig {
        groups: args.groups,
        leaders_per_group: args.leaders,
        followers_per_group: args.followers,
        ..PlantedConfig::default()
    };
    let data = planted_signal(&config, args.seed);
    let (train_path, test_path) = write_split(&data.train, &data.test, &args.out.join("synth"))?;

    let users: BTreeSet<&str> = data.train.iter().map(|r| r.user.as_str()).collect();
    let mut manifest = Manifest::new("synth");
    manifest.push("seed", args.seed);
    manifest.push("groups", config.groups);
    manifest.push("leaders_per_group", config.leaders_per_group);
    manifest.push("followers_per_group", config.followers_per_group);
    manifest.push("users", users.len());
    manifest.push("t0", data.t0);
    manifest.push("train_records", data.train.len());
    manifest.push("test_records", data.test.len());
    manifest.write(&args.out)?;

    println!(
        "wrote {} train / {} test records for {} users (t0 = {}) to {} and {}",
        data.train.len(),
        data.test.len(),
        users.len(),
        data.t0,
        train_path.display(),
        test_path.display()
    );
    Ok(())
}
