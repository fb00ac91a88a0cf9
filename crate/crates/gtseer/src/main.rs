//! Command-line front end: analyze check-in logs, train the embedding
//! ranker, evaluate against a held-out split, produce recommendations, and
//! generate synthetic corpora.
//!
//! Exit codes: 0 success, 1 usage error, 2 unreadable or invalid input,
//! 3 no data left after filtering, 4 training diverged, 5 model and data
//! index spaces disagree, 6 unknown user.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gtseer_core::checkin::{filter_checkins, Dataset, TemporalState};
use gtseer_core::metrics::{self, ModelScorer, PopularityScorer, RandomScorer};
use gtseer_core::model::codec::ModelFile;
use gtseer_core::model::{HyperParams, Variant};
use gtseer_core::trainer::TrainError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gtseer::{io, parallel, report, synth};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_DATA: u8 = 3;
const EXIT_DIVERGED: u8 = 4;
const EXIT_INDEX_MISMATCH: u8 = 5;
const EXIT_UNKNOWN_USER: u8 = 6;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "gtseer", version, about = "Sequential embedding rank for point-of-interest recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a check-in log: corpus statistics, sequence correlations,
    /// and an optional day-by-hour histogram.
    Analyze(AnalyzeArgs),
    /// Train a model and write it to a file.
    Train(TrainArgs),
    /// Evaluate a trained model with precision and recall at N.
    Evaluate(EvaluateArgs),
    /// Print the top-N recommendations for one user.
    Recommend(RecommendArgs),
    /// Generate a synthetic check-in log with planted cluster structure.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Check-in log (user, poi, lat, lon, timestamp; tab-separated).
    #[arg(long)]
    input: PathBuf,
    /// Fail on the first malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Local-time offset from UTC in seconds, used to assign check-ins to days.
    #[arg(long, default_value_t = 0)]
    tz_offset: i32,
    /// Drop POIs visited by fewer than this many distinct users.
    #[arg(long, default_value_t = 1)]
    min_users_per_poi: usize,
    /// Drop users with fewer than this many check-ins.
    #[arg(long, default_value_t = 1)]
    min_checkins_per_user: usize,
}

#[derive(Args, Clone, Default)]
struct HyperArgs {
    /// Model variant: seer, t-seer, or gt-seer.
    #[arg(long)]
    variant: Option<String>,
    /// Latent dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Context window size.
    #[arg(long)]
    window: Option<usize>,
    /// Negative samples per context pair.
    #[arg(long)]
    negatives: Option<usize>,
    /// Unchecked candidate POIs sampled per check-in.
    #[arg(long)]
    candidates: Option<usize>,
    /// Embedding step weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Preference step weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Neighboring-POI distance threshold in kilometers.
    #[arg(long)]
    distance_km: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the day-by-hour histogram CSV here.
    #[arg(long)]
    histogram_out: Option<PathBuf>,
    /// Random POI pairs drawn for the correlation baseline.
    #[arg(long, default_value_t = 10000)]
    random_pairs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Output model file.
    #[arg(long)]
    output: PathBuf,
    /// Chronological per-user fraction used for training; 1.0 trains on
    /// everything.
    #[arg(long, default_value_t = 1.0)]
    split_ratio: f64,
    /// Worker threads. More than one trades reproducibility for speed.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Chronological per-user fraction treated as training history; the
    /// rest is the held-out test set.
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    /// Cutoffs, comma-separated.
    #[arg(long, default_value = "1,5,10,20", value_delimiter = ',')]
    ns: Vec<usize>,
    /// Also score reference baselines: popularity and random.
    #[arg(long)]
    baselines: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct RecommendArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    model: PathBuf,
    /// User id from the log; repeat for several users.
    #[arg(long, required = true)]
    user: Vec<String>,
    /// weekday or weekend.
    #[arg(long, default_value = "weekday")]
    state: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Keep already-visited POIs in the candidate pool.
    #[arg(long)]
    include_visited: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 100)]
    users: usize,
    #[arg(long, default_value_t = 200)]
    pois: usize,
    #[arg(long, default_value_t = 8)]
    clusters: usize,
    #[arg(long, default_value_t = 60)]
    days: usize,
    /// Per-check-in probability of a uniformly random POI.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Per-day probability that a user checks in at all.
    #[arg(long, default_value_t = 0.5)]
    participation: f64,
    #[arg(long, default_value_t = 2.0)]
    cluster_radius_km: f64,
    /// First simulated day, as days since 1970-01-01.
    #[arg(long, default_value_t = 14975)]
    start_day: i64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the planted cluster assignment here as CSV.
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Recommend(a) => cmd_recommend(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_dataset(args: &InputArgs) -> Result<Dataset, Failure> {
    let outcome = io::read_checkin_log(&args.input, args.strict)
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    for err in &outcome.skipped {
        eprintln!("skipped: {err}");
    }
    let kept = filter_checkins(
        &outcome.checkins,
        args.min_users_per_poi,
        args.min_checkins_per_user,
    );
    if kept.is_empty() {
        return Err(Failure::new(EXIT_NO_DATA, "no check-ins left after filtering"));
    }
    Dataset::from_checkins(&kept, args.tz_offset)
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))
}

fn parse_variant(s: &str) -> Result<Variant, Failure> {
    match s {
        "seer" => Ok(Variant::Seer),
        "t-seer" => Ok(Variant::TSeer),
        "gt-seer" => Ok(Variant::GtSeer),
        other => Err(Failure::new(
            EXIT_USAGE,
            format!("unknown variant {other:?}; expected seer, t-seer, or gt-seer"),
        )),
    }
}

fn read_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Failure::new(EXIT_USAGE, format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Resolves the training configuration with precedence
/// flags > config file > per-variant defaults.
fn resolve_hyper(args: &HyperArgs) -> Result<HyperParams, Failure> {
    let config = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    fn pick<T: std::str::FromStr>(
        flag: Option<T>,
        config: &BTreeMap<String, String>,
        key: &str,
    ) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        match config.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Failure::new(EXIT_USAGE, format!("config: bad value {raw:?} for {key}"))
            }),
            None => Ok(None),
        }
    }

    let variant_name = pick(args.variant.clone(), &config, "variant")?;
    let variant = match variant_name {
        Some(s) => parse_variant(&s)?,
        None => Variant::GtSeer,
    };
    let mut hyper = HyperParams::default_for(variant);
    if let Some(v) = pick(args.dim, &config, "dim")? {
        hyper.dim = v;
    }
    if let Some(v) = pick(args.window, &config, "window")? {
        hyper.window = v;
    }
    if let Some(v) = pick(args.negatives, &config, "negatives")? {
        hyper.negatives = v;
    }
    if let Some(v) = pick(args.candidates, &config, "candidates")? {
        hyper.candidates = v;
    }
    if let Some(v) = pick(args.alpha, &config, "alpha")? {
        hyper.alpha = v;
    }
    if let Some(v) = pick(args.beta, &config, "beta")? {
        hyper.beta = v;
    }
    if let Some(v) = pick(args.distance_km, &config, "distance_km")? {
        hyper.distance_km = v;
    }
    if let Some(v) = pick(args.epochs, &config, "epochs")? {
        hyper.epochs = v;
    }
    if let Some(v) = pick(args.seed, &config, "seed")? {
        hyper.seed = v;
    }
    hyper
        .validate()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    Ok(hyper)
}

/// Every subcommand echoes its effective options to stderr before working,
/// so a captured log always records what actually ran.
fn echo_kv(pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        eprintln!("{k}={v}");
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    echo_kv(&[
        ("input", args.input.input.display().to_string()),
        ("tz_offset", args.input.tz_offset.to_string()),
        ("strict", args.input.strict.to_string()),
        ("random_pairs", args.random_pairs.to_string()),
        ("seed", args.seed.to_string()),
    ]);
    let dataset = load_dataset(&args.input)?;
    print!("{}", report::dataset_summary(&dataset));
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let corr = gtseer_core::checkin::sequence_pair_correlation_report(
        &dataset,
        args.random_pairs,
        &mut rng,
    );
    print!("{}", report::correlation_summary(&corr));
    if let Some(path) = args.histogram_out {
        let hist = gtseer_core::checkin::day_hour_histogram(&dataset);
        std::fs::write(&path, report::histogram_csv(&hist))
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let hyper = resolve_hyper(&args.hyper)?;
    if args.threads == 0 {
        return Err(Failure::new(EXIT_USAGE, "--threads must be at least 1"));
    }
    let extra = [
        ("input", args.input.input.display().to_string()),
        ("split_ratio", args.split_ratio.to_string()),
        ("threads", args.threads.to_string()),
        ("tz_offset", args.input.tz_offset.to_string()),
    ];
    eprint!("{}", report::config_echo(&hyper, &extra));
    if args.threads > 1 {
        eprintln!("note: multi-threaded training is not bit-reproducible");
    }

    let full = load_dataset(&args.input)?;
    let train_set = if args.split_ratio >= 1.0 {
        full
    } else {
        let (train, _) = full
            .chronological_split(args.split_ratio)
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        if train.sequences.is_empty() {
            return Err(Failure::new(EXIT_NO_DATA, "training split is empty"));
        }
        train
    };

    let (params, train_report) = parallel::train_parallel(&train_set, &hyper, args.threads)
        .map_err(|e| match e {
            TrainError::Diverged { epoch } => Failure::new(
                EXIT_DIVERGED,
                format!("parameters exceeded the divergence bound in epoch {}", epoch + 1),
            ),
            TrainError::EmptyDataset => Failure::new(EXIT_NO_DATA, e.to_string()),
            other => Failure::new(EXIT_USAGE, other.to_string()),
        })?;
    print!("{}", report::train_summary(&train_report));

    let file = ModelFile {
        variant: hyper.variant,
        params,
        user_ids: train_set.user_ids.clone(),
        poi_ids: train_set.poi_ids.clone(),
    };
    io::save_model(&args.output, &file).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    Ok(())
}

/// The model's id tables must match the dataset's exactly; dense indices
/// are meaningless across different corpora.
fn check_index_space(file: &ModelFile, dataset: &Dataset) -> CmdResult {
    if file.user_ids != dataset.user_ids || file.poi_ids != dataset.poi_ids {
        return Err(Failure::new(
            EXIT_INDEX_MISMATCH,
            "model id tables do not match the dataset; was it trained on this input?",
        ));
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult {
    if args.ns.is_empty() || args.ns.contains(&0) {
        return Err(Failure::new(EXIT_USAGE, "--ns needs positive cutoffs"));
    }
    echo_kv(&[
        ("model", args.model.display().to_string()),
        ("input", args.input.input.display().to_string()),
        ("split_ratio", args.split_ratio.to_string()),
        ("ns", args.ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
        ("baselines", args.baselines.to_string()),
        ("seed", args.seed.to_string()),
        ("tz_offset", args.input.tz_offset.to_string()),
    ]);
    let file = io::load_model(&args.model).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let full = load_dataset(&args.input)?;
    check_index_space(&file, &full)?;
    let (train, test) = full
        .chronological_split(args.split_ratio)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    let scorer = ModelScorer { params: &file.params, variant: file.variant };
    let model_report = metrics::evaluate(&scorer, &train, &test, &args.ns)
        .map_err(|e| Failure::new(EXIT_NO_DATA, e.to_string()))?;

    if args.baselines {
        let pop = PopularityScorer { counts: train.checkin_counts.clone() };
        let rnd = RandomScorer { seed: args.seed };
        let pop_report = metrics::evaluate(&pop, &train, &test, &args.ns)
            .map_err(|e| Failure::new(EXIT_NO_DATA, e.to_string()))?;
        let rnd_report = metrics::evaluate(&rnd, &train, &test, &args.ns)
            .map_err(|e| Failure::new(EXIT_NO_DATA, e.to_string()))?;
        print!(
            "{}",
            report::comparison_table(&[
                (&file.variant.to_string(), &model_report),
                ("popularity", &pop_report),
                ("random", &rnd_report),
            ])
        );
    } else {
        print!("{}", report::eval_csv(&model_report));
    }
    Ok(())
}

fn cmd_recommend(args: RecommendArgs) -> CmdResult {
    let state = match args.state.as_str() {
        "weekday" => TemporalState::Weekday,
        "weekend" => TemporalState::Weekend,
        other => {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("unknown state {other:?}; expected weekday or weekend"),
            ))
        }
    };
    echo_kv(&[
        ("model", args.model.display().to_string()),
        ("input", args.input.input.display().to_string()),
        ("users", args.user.join(",")),
        ("state", args.state.clone()),
        ("n", args.n.to_string()),
        ("include_visited", args.include_visited.to_string()),
    ]);
    let file = io::load_model(&args.model).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let dataset = load_dataset(&args.input)?;
    check_index_space(&file, &dataset)?;

    let checked = dataset.user_checked_sets();
    let scorer = ModelScorer { params: &file.params, variant: file.variant };
    for user_id in &args.user {
        let user = *dataset.user_index.get(user_id).ok_or_else(|| {
            Failure::new(EXIT_UNKNOWN_USER, format!("unknown user {user_id:?}"))
        })?;
        let all = vec![false; dataset.n_pois()];
        let exclude = if args.include_visited { &all } else { &checked[user] };
        let list = metrics::recommend_top_n(&scorer, user, state, args.n, exclude)
            .map_err(|e| Failure::new(EXIT_NO_DATA, e.to_string()))?;
        println!("user {user_id}");
        println!("rank\tpoi\tscore");
        for (rank, (&poi, &score)) in list.pois.iter().zip(&list.scores).enumerate() {
            println!("{}\t{}\t{score:.6}", rank + 1, dataset.poi_ids[poi]);
        }
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CmdResult {
    let cfg = synth::SynthConfig {
        users: args.users,
        pois: args.pois,
        clusters: args.clusters,
        days: args.days,
        noise: args.noise,
        participation: args.participation,
        cluster_radius_km: args.cluster_radius_km,
        start_day: args.start_day,
        seed: args.seed,
    };
    echo_kv(&[
        ("output", args.output.display().to_string()),
        ("users", cfg.users.to_string()),
        ("pois", cfg.pois.to_string()),
        ("clusters", cfg.clusters.to_string()),
        ("days", cfg.days.to_string()),
        ("noise", cfg.noise.to_string()),
        ("participation", cfg.participation.to_string()),
        ("cluster_radius_km", cfg.cluster_radius_km.to_string()),
        ("start_day", cfg.start_day.to_string()),
        ("seed", cfg.seed.to_string()),
    ]);
    let (checkins, truth) =
        synth::generate(&cfg).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    io::write_checkin_log(&args.output, &checkins)
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    eprintln!("wrote {} check-ins to {}", checkins.len(), args.output.display());
    if let Some(path) = args.truth_out {
        let mut csv = String::from("kind,id,cluster\n");
        for (p, c) in truth.poi_cluster.iter().enumerate() {
            csv.push_str(&format!("poi,p{p},{c}\n"));
        }
        for (u, c) in truth.user_weekday_cluster.iter().enumerate() {
            csv.push_str(&format!("user_weekday,u{u},{c}\n"));
        }
        for (u, c) in truth.user_weekend_cluster.iter().enumerate() {
            csv.push_str(&format!("user_weekend,u{u},{c}\n"));
        }
        std::fs::write(&path, csv)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
