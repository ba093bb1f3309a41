//! Command-line harness: training, attacking, evaluating, and generating
//! synthetic data.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or file
//! format error, 3 internal invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use advtext::attack::{AttackConfig, AttackOutcome, AttackSummary};
use advtext::classifier::{
    load_model, save_model, AnyModel, BagOfEmbeddingsModel, ChunkedPoolingModel,
};
use advtext::embedding::EmbeddingTable;
use advtext::harness::{
    evaluate_accuracy, evaluate_robustness, fill_clean_accuracies, generate_synthetic_corpus,
    length_stats, load_corpus, write_split, Corpus, RunReport, SynthConfig,
};
use advtext::training::{
    adversarial_train, augment_with_examples, augmented_train, natural_train, EpochLog,
    SynonymSwapAugmenter, TrainConfig,
};
use advtext::Error;

#[derive(Parser)]
#[command(name = "advtext", version, about = "Word-substitution attacks and adversarial training for text classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier on the natural data only.
    Train(TrainArgs),
    /// Train naturally, then alternate adversarial-set generation and
    /// weighted training epochs.
    AdvTrain(TrainArgs),
    /// Train on the dataset augmented with synonym swaps or an external
    /// example file.
    AugTrain(AugTrainArgs),
    /// Attack a saved model and write per-example outcomes.
    Attack(AttackArgs),
    /// Clean accuracy of a saved model on one split.
    Eval(EvalArgs),
    /// Generate the synthetic corpus and its embedding file.
    Synth(SynthArgs),
    /// Token-length statistics of a corpus.
    Stats(StatsArgs),
}

/// Values mirror TrainConfig and AttackConfig; command-line flags override
/// file values, which override built-in defaults.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n_nat: Option<usize>,
    n_adv: Option<usize>,
    batch_size: Option<usize>,
    lr: Option<f64>,
    adv_fraction: Option<f64>,
    gamma: Option<f64>,
    seed: Option<u64>,
    k: Option<usize>,
    m: Option<usize>,
    threshold: Option<f64>,
    min_word_cos: Option<f64>,
}

#[derive(Args)]
struct CommonArgs {
    /// Corpus directory holding train.jsonl / dev.jsonl / test.jsonl.
    /// Defaults to $ADVTEXT_DATA_DIR.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Embedding file in word2vec text format.
    #[arg(long)]
    embeddings: PathBuf,
    /// TOML file with hyperparameter defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_nat: Option<usize>,
    #[arg(long)]
    n_adv: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    adv_fraction: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Words ranked for perturbation per attack.
    #[arg(long)]
    k: Option<usize>,
    /// Synonym candidates per word.
    #[arg(long)]
    m: Option<usize>,
    /// Sentence-similarity gate for committing a perturbation.
    #[arg(long)]
    threshold: Option<f64>,
    /// Minimum word cosine for a synonym candidate.
    #[arg(long)]
    min_word_cos: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Bag,
    Chunked,
}

#[derive(Args)]
struct ModelShapeArgs {
    #[arg(long, value_enum, default_value = "bag")]
    model_kind: ModelKind,
    /// Bag model: use only the last N tokens.
    #[arg(long)]
    truncate_last: Option<usize>,
    /// Chunked model: tokens per chunk.
    #[arg(long, default_value_t = 510)]
    chunk_size: usize,
    /// Chunked model: tokens shared between consecutive chunks.
    #[arg(long, default_value_t = 100)]
    overlap: usize,
    /// Chunked model: convolution filter count.
    #[arg(long, default_value_t = 32)]
    filters: usize,
    /// Chunked model: convolution filter width (odd).
    #[arg(long, default_value_t = 3)]
    filter_width: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    shape: ModelShapeArgs,
    /// Where to write the trained model.
    #[arg(long)]
    model_out: PathBuf,
    /// Where to write the run report (JSON).
    #[arg(long)]
    report_out: PathBuf,
    /// Optional epoch log (JSONL, includes wall times).
    #[arg(long)]
    train_log: Option<PathBuf>,
    /// Test examples to attack for the report's robustness block
    /// (0 disables).
    #[arg(long, default_value_t = 0)]
    attack_n: usize,
    /// Seed for robustness-block sampling; defaults to the training seed.
    #[arg(long)]
    attack_seed: Option<u64>,
}

#[derive(Args)]
struct AugTrainArgs {
    #[command(flatten)]
    train: TrainArgs,
    /// Synonym swaps per augmented example.
    #[arg(long, default_value_t = 2)]
    swaps: usize,
    /// JSONL of {"text", "label"} examples to merge instead of synonym
    /// swaps (externally produced augmentations).
    #[arg(long)]
    augment_file: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Split to attack.
    #[arg(long, default_value = "test")]
    split: String,
    /// Examples to attack (whole split if larger).
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Per-example outcomes (JSONL) with a trailing summary record.
    #[arg(long)]
    outcomes_out: PathBuf,
    /// Optional robustness report (JSON).
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the corpus splits and embeddings.txt.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    train_size: usize,
    #[arg(long, default_value_t = 200)]
    dev_size: usize,
    #[arg(long, default_value_t = 500)]
    test_size: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Probability of flipping an example's label.
    #[arg(long, default_value_t = 0.0)]
    noise_rate: f64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    bucket_width: usize,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError { code: 1, message: message.into() }
    }
    fn data(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match &e {
            Error::InvalidConfig(_) => 1,
            Error::EmbeddingParse { .. }
            | Error::EmptyEmbeddings
            | Error::CorpusParse { .. }
            | Error::MissingSplit(_)
            | Error::CorruptModel(_)
            | Error::ModelVersion { .. }
            | Error::ChecksumMismatch { .. }
            | Error::InvalidLabel { .. }
            | Error::Io(_) => 2,
            _ => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are successes, not usage errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args, Mode::Natural),
        Command::AdvTrain(args) => cmd_train(args, Mode::Adversarial),
        Command::AugTrain(args) => cmd_aug_train(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

fn data_dir(flag: &Option<PathBuf>) -> CliResult<PathBuf> {
    if let Some(dir) = flag {
        return Ok(dir.clone());
    }
    match std::env::var_os("ADVTEXT_DATA_DIR") {
        Some(dir) => Ok(PathBuf::from(dir)),
        None => Err(CliError::usage(
            "no data directory: pass --data or set ADVTEXT_DATA_DIR",
        )),
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn resolve_config(common: &CommonArgs) -> CliResult<TrainConfig> {
    let file: FileConfig = match &common.config {
        Some(path) => {
            let text = String::from_utf8(read_file(path)?)
                .map_err(|_| CliError::data(format!("{} is not UTF-8", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let defaults = TrainConfig::default();
    let pick = |flag: Option<usize>, file: Option<usize>, def: usize| flag.or(file).unwrap_or(def);
    let pickf = |flag: Option<f64>, file: Option<f64>, def: f64| flag.or(file).unwrap_or(def);
    let config = TrainConfig {
        n_nat: pick(common.n_nat, file.n_nat, defaults.n_nat),
        n_adv: pick(common.n_adv, file.n_adv, defaults.n_adv),
        batch_size: pick(common.batch_size, file.batch_size, defaults.batch_size),
        lr: pickf(common.lr, file.lr, defaults.lr),
        adv_fraction: pickf(common.adv_fraction, file.adv_fraction, defaults.adv_fraction),
        gamma: pickf(common.gamma, file.gamma, defaults.gamma),
        seed: common.seed.or(file.seed).unwrap_or(defaults.seed),
        attack: AttackConfig {
            k: pick(common.k, file.k, defaults.attack.k),
            m: pick(common.m, file.m, defaults.attack.m),
            threshold: pickf(common.threshold, file.threshold, defaults.attack.threshold),
            min_word_cos: pickf(
                common.min_word_cos,
                file.min_word_cos,
                defaults.attack.min_word_cos,
            ),
        },
    };
    config.validate()?;
    Ok(config)
}

fn load_table(path: &Path) -> CliResult<Arc<EmbeddingTable>> {
    let bytes = read_file(path)?;
    Ok(Arc::new(EmbeddingTable::load(bytes.as_slice())?))
}

fn load_data(common: &CommonArgs) -> CliResult<(Corpus, Arc<EmbeddingTable>)> {
    let dir = data_dir(&common.data)?;
    let (corpus, warnings) = load_corpus(&dir)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if corpus.class_count < 2 {
        return Err(CliError::data(format!(
            "corpus has {} classes; need at least 2",
            corpus.class_count
        )));
    }
    let table = load_table(&common.embeddings)?;
    Ok((corpus, table))
}

fn fresh_model(
    shape: &ModelShapeArgs,
    table: Arc<EmbeddingTable>,
    class_count: usize,
    seed: u64,
) -> CliResult<AnyModel> {
    Ok(match shape.model_kind {
        ModelKind::Bag => AnyModel::Bag(
            BagOfEmbeddingsModel::new(table, class_count, seed)
                .with_truncation(shape.truncate_last),
        ),
        ModelKind::Chunked => AnyModel::Chunked(ChunkedPoolingModel::new(
            table,
            class_count,
            shape.chunk_size,
            shape.overlap,
            shape.filters,
            shape.filter_width,
            seed,
        )?),
    })
}

enum Mode {
    Natural,
    Adversarial,
}

fn write_train_outputs(
    args: &TrainArgs,
    model: &AnyModel,
    report: &RunReport,
    logs: &[EpochLog],
) -> CliResult<()> {
    write_file(&args.model_out, &save_model(model))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write_file(&args.report_out, format!("{json}\n").as_bytes())?;
    if let Some(path) = &args.train_log {
        let mut out = String::new();
        for log in logs {
            out.push_str(&serde_json::to_string(log).expect("log serializes"));
            out.push('\n');
        }
        write_file(path, out.as_bytes())?;
    }
    Ok(())
}

fn finish_report(
    args: &TrainArgs,
    config: &TrainConfig,
    model: &AnyModel,
    corpus: &Corpus,
    table: &Arc<EmbeddingTable>,
    logs: &[EpochLog],
) -> CliResult<RunReport> {
    let mut report = RunReport::new(corpus, model.kind_name(), table.checksum())
        .with_training(config, logs);
    fill_clean_accuracies(&mut report, model, corpus);
    if args.attack_n > 0 {
        let seed = args.attack_seed.unwrap_or(config.seed);
        let (_, robustness) = evaluate_robustness(
            model,
            table,
            corpus,
            args.attack_n,
            &config.attack,
            seed,
        )?;
        report.robustness = Some(robustness);
    }
    Ok(report)
}

fn cmd_train(args: TrainArgs, mode: Mode) -> CliResult<()> {
    let config = resolve_config(&args.common)?;
    let (corpus, table) = load_data(&args.common)?;
    let mut model = fresh_model(&args.shape, table.clone(), corpus.class_count, config.seed)?;
    let logs = match mode {
        Mode::Natural => {
            // equal update counts across arms: natural-only runs n_nat+n_adv
            let flat = TrainConfig {
                n_nat: config.n_nat + config.n_adv,
                n_adv: 0,
                ..config.clone()
            };
            natural_train(&mut model, &corpus.train, &flat)?
        }
        Mode::Adversarial => adversarial_train(&mut model, &table, &corpus.train, &config)?,
    };
    let report = finish_report(&args, &config, &model, &corpus, &table, &logs)?;
    write_train_outputs(&args, &model, &report, &logs)?;
    print_report_line(&report);
    Ok(())
}

fn cmd_aug_train(args: AugTrainArgs) -> CliResult<()> {
    let config = resolve_config(&args.train.common)?;
    let (corpus, table) = load_data(&args.train.common)?;
    let mut model = fresh_model(
        &args.train.shape,
        table.clone(),
        corpus.class_count,
        config.seed,
    )?;
    let logs = match &args.augment_file {
        Some(path) => {
            let extra = load_examples(path)?;
            let merged = augment_with_examples(&corpus.train, &extra);
            let flat = TrainConfig {
                n_nat: config.n_nat + config.n_adv,
                n_adv: 0,
                ..config.clone()
            };
            natural_train(&mut model, &merged, &flat)?
        }
        None => {
            let augmenter = SynonymSwapAugmenter::new(table.clone(), args.swaps);
            augmented_train(&mut model, &corpus.train, &augmenter, &config)?
        }
    };
    let report = finish_report(&args.train, &config, &model, &corpus, &table, &logs)?;
    write_train_outputs(&args.train, &model, &report, &logs)?;
    print_report_line(&report);
    Ok(())
}

fn load_examples(path: &Path) -> CliResult<Vec<advtext::text::LabeledExample>> {
    #[derive(Deserialize)]
    struct Raw {
        text: String,
        label: usize,
    }
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| CliError::data(format!("{} is not UTF-8", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: Raw = serde_json::from_str(line).map_err(|e| {
            CliError::data(format!("{} line {}: {e}", path.display(), lineno + 1))
        })?;
        out.push(advtext::text::LabeledExample::new(
            advtext::text::tokenize(&raw.text),
            raw.label,
        ));
    }
    Ok(out)
}

/// Serialized per-outcome record; field order is the documented interface.
#[derive(Serialize)]
struct OutcomeLine<'a> {
    original_text: String,
    adversarial_text: String,
    label: usize,
    predicted_before: usize,
    predicted_after: usize,
    success: bool,
    skipped: bool,
    perturbed_indices: &'a [usize],
    similarity: f64,
    queries: u64,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a AttackSummary,
}

fn write_outcomes(path: &Path, outcomes: &[AttackOutcome], summary: &AttackSummary) -> CliResult<()> {
    let mut out = String::new();
    for o in outcomes {
        let line = OutcomeLine {
            original_text: o.original.document.detokenize(),
            adversarial_text: o.adversarial.detokenize(),
            label: o.original.label,
            predicted_before: o.predicted_before,
            predicted_after: o.predicted_after,
            success: o.success,
            skipped: o.skipped,
            perturbed_indices: &o.perturbed_indices,
            similarity: o.similarity,
            queries: o.queries,
        };
        out.push_str(&serde_json::to_string(&line).expect("outcome serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&SummaryLine { summary }).expect("summary serializes"));
    out.push('\n');
    write_file(path, out.as_bytes())
}

fn cmd_attack(args: AttackArgs) -> CliResult<()> {
    let config = resolve_config(&args.common)?;
    let (corpus, table) = load_data(&args.common)?;
    let model = load_model(&read_file(&args.model)?, table.clone())?;
    let split = corpus
        .split(&args.split)
        .ok_or_else(|| CliError::usage(format!("unknown split {:?}", args.split)))?;
    if split.is_empty() {
        return Err(CliError::data(format!("split {:?} is empty", args.split)));
    }
    let (outcomes, summary) = advtext::attack::attack_corpus(
        &model,
        &table,
        split,
        args.n,
        &config.attack,
        config.seed,
    )?;
    write_outcomes(&args.outcomes_out, &outcomes, &summary)?;
    if let Some(path) = &args.report_out {
        let report = advtext::harness::RobustnessReport {
            requested: args.n,
            sampled: outcomes.len(),
            seed: config.seed,
            attack: config.attack.clone(),
            summary: summary.clone(),
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(path, format!("{json}\n").as_bytes())?;
    }
    println!(
        "attacked {} of {} (skipped {}): clean {:.4} robust {:.4} success rate {:.4}",
        summary.attacked, summary.total, summary.skipped, summary.clean_accuracy,
        summary.robust_accuracy, summary.attack_success_rate
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let (corpus, table) = load_data(&args.common)?;
    let model = load_model(&read_file(&args.model)?, table)?;
    let split = corpus
        .split(&args.split)
        .ok_or_else(|| CliError::usage(format!("unknown split {:?}", args.split)))?;
    if split.is_empty() {
        return Err(CliError::data(format!("split {:?} is empty", args.split)));
    }
    println!("accuracy {:.4}", evaluate_accuracy(&model, split));
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let config = SynthConfig {
        train_size: args.train_size,
        dev_size: args.dev_size,
        test_size: args.test_size,
        seed: args.seed,
        noise_rate: args.noise_rate,
    };
    let output = generate_synthetic_corpus(&config)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", args.out.display())))?;
    write_split(&args.out.join("train.jsonl"), &output.corpus.train)?;
    write_split(&args.out.join("dev.jsonl"), &output.corpus.dev)?;
    write_split(&args.out.join("test.jsonl"), &output.corpus.test)?;
    write_file(
        &args.out.join("embeddings.txt"),
        output.embeddings_text.as_bytes(),
    )?;
    println!(
        "wrote {} train / {} dev / {} test examples to {}",
        output.corpus.train.len(),
        output.corpus.dev.len(),
        output.corpus.test.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> CliResult<()> {
    let dir = data_dir(&args.data)?;
    let (corpus, warnings) = load_corpus(&dir)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if args.bucket_width == 0 {
        return Err(CliError::usage("bucket width must be >= 1"));
    }
    let stats = length_stats(&corpus, args.bucket_width);
    println!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
    Ok(())
}

fn print_report_line(report: &RunReport) {
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |a| format!("{a:.4}"));
    let robust = report
        .robustness
        .as_ref()
        .map_or("n/a".to_string(), |r| format!("{:.4}", r.summary.robust_accuracy));
    println!(
        "clean train {} dev {} test {} | robust {}",
        fmt(report.clean_train_accuracy),
        fmt(report.clean_dev_accuracy),
        fmt(report.clean_test_accuracy),
        robust
    );
}
