//! `bitvoc` command line: vocabulary building and code mapping, the
//! convolutional code, output-layer parameter accounting and prediction,
//! plus the training/benchmark harness.

mod jsonout;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bitvoc::ecc::{channel_flip, BitProbabilities, EccCode};
use bitvoc::harness::{
    bench_heads, generate_task, run_experiment, train_head_with_model, BenchConfig, TrainConfig,
    ZipfTaskConfig,
};
use bitvoc::head::{human_count, human_ratio, HeadSpec};
use bitvoc::nn::load_checkpoint;
use bitvoc::vocab::{Codebook, Vocabulary};
use bitvoc::{bits, Head};

use jsonout::JsonValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Tsv,
}

#[derive(Parser)]
#[command(
    name = "bitvoc",
    version,
    about = "Binary-code word prediction toolkit"
)]
struct Cli {
    /// Default seed for any subcommand that needs randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vocabulary building and word/bit-array mapping.
    #[command(subcommand)]
    Vocab(VocabCommand),
    /// The rate-1/2 convolutional code.
    #[command(subcommand)]
    Ecc(EccCommand),
    /// Output-layer accounting and prediction.
    #[command(subcommand)]
    Head(HeadCommand),
    /// Train every requested head on a synthetic Zipfian task.
    Train(TrainArgs),
    /// Time the output-layer variants on CPU.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum VocabCommand {
    /// Count tokens and keep the most frequent words.
    Build {
        /// Whitespace-tokenized text file.
        #[arg(long)]
        input: PathBuf,
        /// Total vocabulary size including the three markers.
        #[arg(long)]
        v: usize,
    },
    /// Map words (one per line) to bit arrays.
    Map(MapArgs),
    /// Map bit arrays (one per line) back to words.
    Unmap(MapArgs),
}

#[derive(Args)]
struct MapArgs {
    /// Vocabulary file written by `vocab build`.
    #[arg(long)]
    vocab: PathBuf,
    /// Code width; defaults to the minimal ⌈log₂ V⌉.
    #[arg(long)]
    b: Option<usize>,
    /// Input file; stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EccCommand {
    /// Encode a 0/1 string into the redundant code.
    Encode {
        #[arg(long)]
        bits: String,
    },
    /// Soft-decision decode a comma-separated probability vector.
    Decode {
        #[arg(long)]
        probs: String,
    },
    /// Brute-force free-distance search.
    Fd {
        /// Largest probe input length to search.
        #[arg(long, default_value_t = 12)]
        max_b: usize,
    },
    /// Randomized bit-flip recovery experiment.
    Simulate {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        flips: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum HeadCommand {
    /// Output-layer size and parameter accounting for one configuration.
    Params {
        /// softmax | binary | hybrid
        #[arg(long)]
        kind: String,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        h: usize,
        /// Softmax size for the hybrid kind.
        #[arg(long)]
        n: Option<usize>,
        /// Apply error correction to the bit slice.
        #[arg(long)]
        ecc: bool,
    },
    /// Predict words from hidden vectors stored as little-endian f32.
    Predict {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        ecc: bool,
        /// Vocabulary file written by `vocab build`.
        #[arg(long)]
        vocab: PathBuf,
        /// Checkpoint holding the head layer (last layer is used).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Binary little-endian float32 file, one hidden vector after
        /// another.
        #[arg(long)]
        hidden: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Task family; only the synthetic Zipfian task is available.
    #[arg(long, default_value = "zipf")]
    task: String,
    /// Vocabulary size including markers.
    #[arg(long, default_value_t = 256)]
    v: usize,
    /// Comma-separated head list, e.g. softmax,binary,binary-ec,hybrid-64.
    #[arg(long, default_value = "softmax,binary,binary-ec,hybrid-64")]
    heads: String,
    #[arg(long, default_value_t = 1.0)]
    zipf_s: f64,
    #[arg(long, default_value_t = 32)]
    features: usize,
    #[arg(long, default_value_t = 8000)]
    train_size: usize,
    #[arg(long, default_value_t = 2000)]
    test_size: usize,
    /// Training label flip rate.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Save one checkpoint per head into this directory.
    #[arg(long)]
    save_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated vocabulary sizes.
    #[arg(long, default_value = "4096,16384,65536")]
    v: String,
    #[arg(long, default_value_t = 512)]
    h: usize,
    #[arg(long, default_value = "softmax,binary")]
    heads: String,
    #[arg(long, default_value_t = 8)]
    batch: usize,
    #[arg(long, default_value_t = 30)]
    trials: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Honors BITVOC_THREADS as a cap on worker parallelism.
fn configure_threads() {
    if let Ok(value) = std::env::var("BITVOC_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let sink = OutputSink {
        path: cli.out.clone(),
        format: cli.format,
    };
    match cli.command {
        Command::Vocab(cmd) => run_vocab(cmd, &sink),
        Command::Ecc(cmd) => run_ecc(cmd, cli.seed, &sink),
        Command::Head(cmd) => run_head(cmd, &sink),
        Command::Train(args) => run_train(args, cli.seed, &sink),
        Command::Bench(args) => run_bench(args, cli.seed, &sink),
    }
}

struct OutputSink {
    path: Option<PathBuf>,
    format: OutputFormat,
}

impl OutputSink {
    fn write_text(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    /// One flat record: a JSON object line or a TSV header + row.
    fn write_record(&self, value: &JsonValue) -> Result<()> {
        let text = match self.format {
            OutputFormat::Json => format!("{}\n", value.render()),
            OutputFormat::Tsv => value.render_tsv()?,
        };
        self.write_text(&text)
    }

    /// A single JSON array document (or TSV table), e.g. for bench output.
    fn write_array(&self, values: Vec<JsonValue>) -> Result<()> {
        let text = match self.format {
            OutputFormat::Json => format!("{}\n", JsonValue::Array(values).render()),
            OutputFormat::Tsv => jsonout::render_tsv_table(&values)?,
        };
        self.write_text(&text)
    }

    /// A sequence of flat records: JSON lines or one TSV table.
    fn write_records(&self, values: &[JsonValue]) -> Result<()> {
        let text = match self.format {
            OutputFormat::Json => {
                let mut buf = String::new();
                for v in values {
                    buf.push_str(&v.render());
                    buf.push('\n');
                }
                buf
            }
            OutputFormat::Tsv => jsonout::render_tsv_table(values)?,
        };
        self.write_text(&text)
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(path) => {
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
        }
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .context("reading stdin")?;
            Ok(buf)
        }
    }
}

fn load_vocab(path: &Path) -> Result<Arc<Vocabulary>> {
    Ok(Arc::new(
        Vocabulary::load_tsv(path).with_context(|| format!("loading {}", path.display()))?,
    ))
}

fn codebook(vocab: Arc<Vocabulary>, width: Option<usize>) -> Result<Codebook> {
    match width {
        Some(b) => Ok(Codebook::new(vocab, b)?),
        None => Ok(Codebook::minimal(vocab)),
    }
}

fn run_vocab(cmd: VocabCommand, sink: &OutputSink) -> Result<()> {
    match cmd {
        VocabCommand::Build { input, v } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let vocab = Vocabulary::build(text.split_whitespace(), v)?;
            let mut out = String::new();
            for (surface, count) in vocab.words() {
                out.push_str(surface);
                out.push('\t');
                out.push_str(&count.to_string());
                out.push('\n');
            }
            sink.write_text(&out)
        }
        VocabCommand::Map(args) => {
            let book = codebook(load_vocab(&args.vocab)?, args.b)?;
            let input = read_input(&args.input)?;
            let mut out = String::new();
            for line in input.lines() {
                out.push_str(&bits::to_ascii(&book.word_to_bits(line)));
                out.push('\n');
            }
            sink.write_text(&out)
        }
        VocabCommand::Unmap(args) => {
            let book = codebook(load_vocab(&args.vocab)?, args.b)?;
            let input = read_input(&args.input)?;
            let mut out = String::new();
            for line in input.lines() {
                let array = bits::from_ascii(line.trim())
                    .map_err(|e| anyhow::anyhow!("bad bit string {line:?}: {e}"))?;
                out.push_str(book.bits_to_word(&array));
                out.push('\n');
            }
            sink.write_text(&out)
        }
    }
}

fn run_ecc(cmd: EccCommand, seed: u64, sink: &OutputSink) -> Result<()> {
    match cmd {
        EccCommand::Encode { bits: raw } => {
            let input = bits::from_ascii(raw.trim())?;
            let code = EccCode::new(input.len())?;
            sink.write_text(&format!("{}\n", bits::to_ascii(&code.encode(&input)?)))
        }
        EccCommand::Decode { probs } => {
            let values: Vec<f64> = probs
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| anyhow::anyhow!("bad float {s:?}: {e}"))
                })
                .collect::<Result<_>>()?;
            if !values.len().is_multiple_of(2) || values.len() < 14 {
                bail!(
                    "probability vector length {} is not a valid 2(B+6)",
                    values.len()
                );
            }
            let code = EccCode::new(values.len() / 2 - 6)?;
            let decoded = code.viterbi_decode(&BitProbabilities::clamped(values)?)?;
            sink.write_text(&format!("{}\n", bits::to_ascii(&decoded)))
        }
        EccCommand::Fd { max_b } => {
            if !(1..=24).contains(&max_b) {
                bail!("--max-b must be in 1..=24");
            }
            let code = EccCode::new(max_b)?;
            let d = code.free_distance(max_b);
            sink.write_record(&jsonout::object([(
                "free_distance",
                JsonValue::from(d as u64),
            )]))
        }
        EccCommand::Simulate { b, flips, trials } => {
            if trials == 0 {
                bail!("--trials must be positive");
            }
            let code = EccCode::new(b)?;
            if flips > code.encoded_len() {
                bail!("cannot flip {flips} of {} coded bits", code.encoded_len());
            }
            let mut recovered = 0usize;
            use rand::Rng;
            let mut rng = rand_chacha_seeded(seed);
            for trial in 0..trials {
                let input: Vec<u8> = (0..b).map(|_| rng.gen_range(0..2u8)).collect();
                let corrupted =
                    channel_flip(&code.encode(&input)?, flips, seed ^ (trial as u64 + 1))?;
                let probs = BitProbabilities::from_hard_bits(&corrupted, 0.99)?;
                if code.viterbi_decode(&probs)? == input {
                    recovered += 1;
                }
            }
            sink.write_record(&jsonout::object([
                ("trials", JsonValue::from(trials as u64)),
                ("recovered", JsonValue::from(recovered as u64)),
                (
                    "recovery_rate",
                    JsonValue::from(recovered as f64 / trials as f64),
                ),
            ]))
        }
    }
}

fn rand_chacha_seeded(seed: u64) -> impl rand::Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn parse_head_config(
    kind: &str,
    n: Option<usize>,
    ecc: bool,
    v: usize,
    h: usize,
) -> Result<bitvoc::HeadConfig> {
    let mut name = kind.to_owned();
    if let Some(n) = n {
        if kind != "hybrid" {
            bail!("--n only applies to --kind hybrid");
        }
        name = format!("hybrid-{n}");
    } else if kind == "hybrid" {
        bail!("--kind hybrid requires --n");
    }
    if ecc {
        if kind == "softmax" {
            bail!("--ecc does not apply to the softmax head");
        }
        name.push_str("-ec");
    }
    let spec = HeadSpec::from_str(&name)?;
    Ok(spec.to_config(v, h)?)
}

fn run_head(cmd: HeadCommand, sink: &OutputSink) -> Result<()> {
    match cmd {
        HeadCommand::Params { kind, v, h, n, ecc } => {
            let config = parse_head_config(&kind, n, ecc, v, h)?;
            let accounting = config.param_accounting();
            let mut fields = vec![
                (
                    "kind",
                    JsonValue::from(
                        HeadSpec {
                            kind: config.kind,
                            softmax_size: config.softmax_size,
                        }
                        .to_string(),
                    ),
                ),
                ("v", JsonValue::from(v as u64)),
                ("h", JsonValue::from(h as u64)),
                ("out", JsonValue::from(accounting.rows as u64)),
                ("params", JsonValue::from(accounting.params)),
                (
                    "params_human",
                    JsonValue::from(human_count(accounting.params)),
                ),
                ("ratio", JsonValue::from(accounting.ratio_vs_softmax)),
                (
                    "ratio_human",
                    JsonValue::from(human_ratio(accounting.ratio_vs_softmax)),
                ),
            ];
            if let Some(bits) = config.code_bits() {
                fields.push(("bits", JsonValue::from(bits as u64)));
            }
            sink.write_record(&jsonout::object(fields))
        }
        HeadCommand::Predict {
            kind,
            n,
            ecc,
            vocab,
            checkpoint,
            hidden,
        } => {
            let vocab = load_vocab(&vocab)?;
            let layers = load_checkpoint(&checkpoint)?;
            let layer = layers.into_iter().last().context("empty checkpoint")?;
            let config = parse_head_config(&kind, n, ecc, vocab.size(), layer.input_len())?;
            let head = Head::from_layer(config, vocab, layer)?;
            let width = head.config().hidden_width;

            let bytes =
                std::fs::read(&hidden).with_context(|| format!("reading {}", hidden.display()))?;
            if !bytes.len().is_multiple_of(4) {
                bail!(
                    "hidden vector file length {} is not a multiple of 4",
                    bytes.len()
                );
            }
            let floats: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            if !floats.len().is_multiple_of(width) {
                bail!(
                    "hidden vector file holds {} floats, not a multiple of H = {width}",
                    floats.len()
                );
            }
            let mut records = Vec::new();
            let mut plain = String::new();
            for vector in floats.chunks_exact(width) {
                let prediction = head.predict(vector)?;
                plain.push_str(&prediction.word);
                plain.push('\n');
                records.push(jsonout::object([
                    ("word", JsonValue::from(prediction.word.clone())),
                    ("word_id", JsonValue::from(prediction.word_id as u64)),
                    ("score", JsonValue::from(prediction.score)),
                ]));
            }
            match sink.format {
                OutputFormat::Json => sink.write_records(&records),
                OutputFormat::Tsv => sink.write_text(&plain),
            }
        }
    }
}

fn parse_heads(raw: &str) -> Result<Vec<HeadSpec>> {
    raw.split(',')
        .map(|s| HeadSpec::from_str(s.trim()).map_err(Into::into))
        .collect::<Result<Vec<_>>>()
}

fn run_train(args: TrainArgs, seed: u64, sink: &OutputSink) -> Result<()> {
    if args.task != "zipf" {
        bail!("unknown task {:?}; only \"zipf\" is available", args.task);
    }
    let specs = parse_heads(&args.heads)?;
    if specs.is_empty() {
        bail!("--heads must name at least one head");
    }
    let task = ZipfTaskConfig {
        vocab_size: args.v,
        exponent: args.zipf_s,
        feature_dim: args.features,
        train_size: args.train_size,
        test_size: args.test_size,
        label_noise: args.noise,
        cluster_spread: 0.3,
    };
    let dataset = generate_task(&task, seed)?;
    let mut cfg = TrainConfig::standard(seed);
    cfg.hidden_width = args.hidden;
    cfg.epochs = args.epochs;
    cfg.batch_size = args.batch;

    let metrics = match &args.save_dir {
        None => run_experiment(&dataset, &specs, &cfg)?,
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            dataset.vocab.save_tsv(&dir.join("vocab.tsv"))?;
            let mut all = Vec::with_capacity(specs.len());
            for &spec in &specs {
                let (run, model) = train_head_with_model(&dataset, spec, &cfg)?;
                model.save(&dir.join(format!("{spec}.ckpt")))?;
                all.push(run);
            }
            all
        }
    };

    let mut records = Vec::new();
    for run in &metrics {
        for epoch in &run.epochs {
            records.push(jsonout::object([
                ("head", JsonValue::from(epoch.head.clone())),
                ("epoch", JsonValue::from(epoch.epoch as u64)),
                ("train_loss", JsonValue::from(epoch.train_loss)),
                ("accuracy", JsonValue::from(epoch.accuracy)),
                (
                    "frequent_accuracy",
                    JsonValue::from(epoch.frequent_accuracy),
                ),
                ("rare_accuracy", JsonValue::from(epoch.rare_accuracy)),
            ]));
        }
        records.push(jsonout::object([
            ("head", JsonValue::from(run.head.clone())),
            ("summary", JsonValue::from(true)),
            ("seed", JsonValue::from(run.seed)),
            ("rows", JsonValue::from(run.rows as u64)),
            ("param_count", JsonValue::from(run.param_count)),
            ("majority_baseline", JsonValue::from(run.majority_baseline)),
            ("final_accuracy", JsonValue::from(run.final_accuracy)),
            ("best_accuracy", JsonValue::from(run.best_accuracy)),
            (
                "final_frequent_accuracy",
                JsonValue::from(run.final_frequent_accuracy),
            ),
            (
                "final_rare_accuracy",
                JsonValue::from(run.final_rare_accuracy),
            ),
            ("forward_micros", JsonValue::from(run.forward_micros)),
            ("predict_micros", JsonValue::from(run.predict_micros)),
        ]));
    }
    sink.write_records(&records)
}

fn run_bench(args: BenchArgs, seed: u64, sink: &OutputSink) -> Result<()> {
    let sizes: Vec<usize> = args
        .v
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| anyhow::anyhow!("bad size {s:?}: {e}"))
        })
        .collect::<Result<_>>()?;
    let specs = parse_heads(&args.heads)?;
    let cfg = BenchConfig {
        hidden_width: args.h,
        batch: args.batch,
        trials: args.trials,
        warmup: 3,
        seed,
    };
    let rows = bench_heads(&sizes, &specs, &cfg)?;
    let records: Vec<JsonValue> = rows
        .iter()
        .map(|r| {
            jsonout::object([
                ("head", JsonValue::from(r.head.clone())),
                ("v", JsonValue::from(r.vocab_size as u64)),
                ("out", JsonValue::from(r.rows as u64)),
                ("params", JsonValue::from(r.params)),
                ("batch", JsonValue::from(r.batch as u64)),
                ("trials", JsonValue::from(r.trials as u64)),
                ("forward_micros", JsonValue::from(r.forward_micros)),
                ("predict_micros", JsonValue::from(r.predict_micros)),
            ])
        })
        .collect();
    sink.write_array(records)
}
