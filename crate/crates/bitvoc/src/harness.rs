//! Synthetic Zipfian prediction tasks and CPU timing benchmarks.
//!
//! The tasks stand in for the next-token workload: labels are drawn from a
//! Zipf distribution over the word ranks, features are Gaussian clusters
//! (one per word), and optional label noise keeps the models from fitting
//! perfectly so the robustness differences between head variants show up.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::head::{Head, HeadError, HeadSpec, Prediction};
use crate::nn::{self, AdamConfig, AdamOptimizer, DenseLayer, NnError};
use crate::vocab::{Vocabulary, NUM_MARKERS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid task configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged for head {head} at epoch {epoch} (non-finite loss)")]
    Diverged { head: String, epoch: usize },
    #[error(transparent)]
    Head(#[from] HeadError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Vocab(#[from] crate::vocab::VocabError),
}

/// Zipf distribution over ranks `1..=num_types` with priors `∝ 1/rank^s`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    priors: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(num_types: usize, exponent: f64) -> Self {
        assert!(num_types >= 1);
        let raw: Vec<f64> = (1..=num_types)
            .map(|r| (r as f64).powf(-exponent))
            .collect();
        let total: f64 = raw.iter().sum();
        let priors: Vec<f64> = raw.into_iter().map(|p| p / total).collect();
        let mut cumulative = Vec::with_capacity(num_types);
        let mut acc = 0.0;
        for &p in &priors {
            acc += p;
            cumulative.push(acc);
        }
        cumulative[num_types - 1] = 1.0;
        Self { priors, cumulative }
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Draws a 1-based rank.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c < u) + 1
    }
}

/// Shape of a synthetic Zipfian task.
#[derive(Debug, Clone)]
pub struct ZipfTaskConfig {
    /// Vocabulary size `V`, markers included; classes are the `V-3` words.
    pub vocab_size: usize,
    /// Zipf exponent `s` of the label marginal.
    pub exponent: f64,
    pub feature_dim: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Fraction of training labels replaced with a uniformly random word.
    /// Test labels are always clean.
    pub label_noise: f64,
    /// Standard deviation of each class cluster around its center.
    pub cluster_spread: f64,
}

impl ZipfTaskConfig {
    /// The task shape used throughout the experiment suite.
    pub fn standard(vocab_size: usize) -> Self {
        Self {
            vocab_size,
            exponent: 1.0,
            feature_dim: 32,
            train_size: 8000,
            test_size: 2000,
            label_noise: 0.1,
            cluster_spread: 0.3,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.vocab_size < 8 {
            return Err(HarnessError::InvalidConfig(format!(
                "vocabulary size {} below the minimum of 8",
                self.vocab_size
            )));
        }
        if self.feature_dim < 2 {
            return Err(HarnessError::InvalidConfig(
                "feature dimension must be >= 2".into(),
            ));
        }
        if self.train_size == 0 || self.test_size == 0 {
            return Err(HarnessError::InvalidConfig(
                "split sizes must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(HarnessError::InvalidConfig(
                "label noise must be in [0, 1]".into(),
            ));
        }
        if self.cluster_spread <= 0.0 || !self.cluster_spread.is_finite() {
            return Err(HarnessError::InvalidConfig(
                "cluster spread must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One labeled example; the label is a vocabulary code index (always a word,
/// never a marker).
#[derive(Debug, Clone)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone)]
pub struct ZipfDataset {
    pub config: ZipfTaskConfig,
    pub seed: u64,
    pub vocab: Arc<Vocabulary>,
    /// Per-rank class priors (index 0 = rank 1).
    pub priors: Vec<f64>,
    pub train: Vec<Example>,
    pub test: Vec<Example>,
}

/// A vocabulary of `size - 3` synthetic words whose rank order is forced by
/// construction.
pub fn synthetic_vocabulary(size: usize) -> Arc<Vocabulary> {
    assert!(size > NUM_MARKERS);
    let num_words = size - NUM_MARKERS;
    let counts: Vec<(String, u64)> = (1..=num_words)
        .map(|rank| {
            (
                format!("w{rank:06}"),
                (1e12 / (rank as f64)).max(1.0) as u64,
            )
        })
        .collect();
    Arc::new(Vocabulary::from_counts(counts).expect("non-empty synthetic counts"))
}

/// Generates a class-separable Zipfian dataset: one Gaussian cluster per
/// word, labels drawn from the Zipf marginal, train/test from disjoint
/// seeded streams.
pub fn generate_task(config: &ZipfTaskConfig, seed: u64) -> Result<ZipfDataset, HarnessError> {
    config.validate()?;
    let num_classes = config.vocab_size - NUM_MARKERS;
    let sampler = ZipfSampler::new(num_classes, config.exponent);
    let vocab = synthetic_vocabulary(config.vocab_size);

    let mut center_rng = stream_rng(seed, 0);
    let centers: Vec<Vec<f64>> = (0..num_classes)
        .map(|_| {
            (0..config.feature_dim)
                .map(|_| center_rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();

    let sample_split = |stream: u64, count: usize, noisy: bool| -> Vec<Example> {
        let mut rng = stream_rng(seed, stream);
        (0..count)
            .map(|_| {
                let rank = sampler.sample(&mut rng);
                let features: Vec<f64> = centers[rank - 1]
                    .iter()
                    .map(|&c| {
                        let noise: f64 = rng.sample(StandardNormal);
                        c + config.cluster_spread * noise
                    })
                    .collect();
                let label = if noisy && rng.gen::<f64>() < config.label_noise {
                    2 + rng.gen_range(1..=num_classes)
                } else {
                    2 + rank
                };
                Example { features, label }
            })
            .collect()
    };

    let train = sample_split(1, config.train_size, true);
    let test = sample_split(2, config.test_size, false);
    Ok(ZipfDataset {
        config: config.clone(),
        seed,
        vocab,
        priors: sampler.priors().to_vec(),
        train,
        test,
    })
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Least-squares slope of `ln count` against `ln rank`; zero counts are
/// skipped. A Zipf(1) sample sits near -1.
pub fn log_log_slope(counts_by_rank: &[u64]) -> f64 {
    let points: Vec<(f64, f64)> = counts_by_rank
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (((i + 1) as f64).ln(), (c as f64).ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    cov / var
}

/// Training-loop settings shared by every head in an experiment.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub hidden_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Labels with code index below this count as "frequent" in the
    /// accuracy breakdown.
    pub frequent_cutoff: usize,
}

impl TrainConfig {
    pub fn standard(seed: u64) -> Self {
        Self {
            hidden_width: 64,
            epochs: 15,
            batch_size: 32,
            init_scale: 0.1,
            adam: AdamConfig::default(),
            seed,
            frequent_cutoff: 64,
        }
    }
}

/// Feature extractor plus prediction head: `features -> dense -> sigmoid ->
/// head`. The single hidden layer keeps the toy models trainable while the
/// output layer stays the component under study.
pub struct Model {
    hidden: DenseLayer,
    head: Head,
    activation: Option<Vec<f64>>,
}

impl Model {
    pub fn new(
        spec: HeadSpec,
        vocab: Arc<Vocabulary>,
        feature_dim: usize,
        hidden_width: usize,
        init_scale: f64,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let mut rng = stream_rng(seed, 7);
        let hidden = DenseLayer::init_uniform(hidden_width, feature_dim, init_scale, &mut rng);
        let config = spec.to_config(vocab.size(), hidden_width)?;
        let head = Head::init_uniform(config, vocab, init_scale, &mut rng)?;
        Ok(Self {
            hidden,
            head,
            activation: None,
        })
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    pub fn head_mut(&mut self) -> &mut Head {
        &mut self.head
    }

    pub fn hidden_layer(&self) -> &DenseLayer {
        &self.hidden
    }

    fn hidden_activation(&self, features: &[f64]) -> Result<Vec<f64>, HarnessError> {
        Ok(nn::sigmoid_vec(&self.hidden.affine(features)?))
    }

    /// Loss without touching any training caches.
    pub fn loss(&self, features: &[f64], label: usize) -> Result<f64, HarnessError> {
        Ok(self.head.loss(&self.hidden_activation(features)?, label)?)
    }

    /// Forward + backward for one example, accumulating gradients in both
    /// layers. Returns the example loss.
    pub fn training_step(&mut self, features: &[f64], label: usize) -> Result<f64, HarnessError> {
        let pre = self.hidden.forward(features)?;
        let activation = nn::sigmoid_vec(&pre);
        let loss = self.head.training_forward(&activation, label)?;
        let upstream_activation = self.head.backward()?;
        let upstream_pre: Vec<f64> = upstream_activation
            .iter()
            .zip(&activation)
            .map(|(&g, &a)| g * a * (1.0 - a))
            .collect();
        self.hidden.backward(&upstream_pre)?;
        self.activation = Some(activation);
        Ok(loss)
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction, HarnessError> {
        Ok(self.head.predict(&self.hidden_activation(features)?)?)
    }

    pub fn zero_grads(&mut self) {
        self.hidden.zero_grads();
        self.head.layer_mut().zero_grads();
    }

    pub fn scale_grads(&mut self, factor: f64) {
        self.hidden.scale_grads(factor);
        self.head.layer_mut().scale_grads(factor);
    }

    pub fn optimizer_step(&mut self, adam: &mut AdamOptimizer) {
        adam.step([&mut self.hidden, self.head.layer_mut()]);
    }

    /// Flat parameter indexing across both layers (hidden first), for
    /// finite-difference checking.
    pub fn num_params(&self) -> usize {
        self.hidden.num_params() + self.head.layer().num_params()
    }

    pub fn param(&self, index: usize) -> f64 {
        let nh = self.hidden.num_params();
        if index < nh {
            self.hidden.param(index)
        } else {
            self.head.layer().param(index - nh)
        }
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let nh = self.hidden.num_params();
        if index < nh {
            self.hidden.set_param(index, value);
        } else {
            self.head.layer_mut().set_param(index - nh, value);
        }
    }

    pub fn grad(&self, index: usize) -> f64 {
        let nh = self.hidden.num_params();
        if index < nh {
            self.hidden.grad(index)
        } else {
            self.head.layer().grad(index - nh)
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), HarnessError> {
        Ok(nn::save_checkpoint(
            path,
            &[&self.hidden, self.head.layer()],
        )?)
    }
}

/// One (head, epoch) measurement.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub head: String,
    pub epoch: usize,
    pub train_loss: f64,
    pub accuracy: f64,
    pub frequent_accuracy: f64,
    pub rare_accuracy: f64,
}

/// Final per-head summary of an experiment run.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub head: String,
    pub seed: u64,
    pub rows: usize,
    pub param_count: u64,
    pub majority_baseline: f64,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub final_frequent_accuracy: f64,
    pub final_rare_accuracy: f64,
    pub epochs: Vec<EpochRecord>,
    /// Mean wall-clock per forward pass, microseconds. Timing fields are the
    /// only outputs that vary between identical runs.
    pub forward_micros: f64,
    pub predict_micros: f64,
}

struct SplitAccuracy {
    overall: f64,
    frequent: f64,
    rare: f64,
}

fn evaluate(
    model: &Model,
    examples: &[Example],
    cutoff: usize,
) -> Result<SplitAccuracy, HarnessError> {
    let mut hit = [0usize; 2];
    let mut total = [0usize; 2];
    for example in examples {
        let bucket = usize::from(example.label >= cutoff);
        total[bucket] += 1;
        if model.predict(&example.features)?.word_id == example.label {
            hit[bucket] += 1;
        }
    }
    let ratio = |h: usize, t: usize| if t == 0 { 0.0 } else { h as f64 / t as f64 };
    Ok(SplitAccuracy {
        overall: ratio(hit[0] + hit[1], total[0] + total[1]),
        frequent: ratio(hit[0], total[0]),
        rare: ratio(hit[1], total[1]),
    })
}

/// Trains one head on the dataset and reports its metrics.
pub fn train_head(
    dataset: &ZipfDataset,
    spec: HeadSpec,
    cfg: &TrainConfig,
) -> Result<RunMetrics, HarnessError> {
    train_head_with_model(dataset, spec, cfg).map(|(metrics, _)| metrics)
}

/// [`train_head`] variant that hands back the trained model, e.g. for
/// checkpointing.
pub fn train_head_with_model(
    dataset: &ZipfDataset,
    spec: HeadSpec,
    cfg: &TrainConfig,
) -> Result<(RunMetrics, Model), HarnessError> {
    let head_name = spec.to_string();
    let mut model = Model::new(
        spec,
        dataset.vocab.clone(),
        dataset.config.feature_dim,
        cfg.hidden_width,
        cfg.init_scale,
        cfg.seed,
    )?;
    let mut adam = AdamOptimizer::new(cfg.adam);
    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    let mut shuffle_rng = stream_rng(cfg.seed, 11);

    let mut records = Vec::with_capacity(cfg.epochs);
    let mut best_accuracy = 0.0f64;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            model.zero_grads();
            for &i in chunk {
                let example = &dataset.train[i];
                let loss = model.training_step(&example.features, example.label)?;
                if !loss.is_finite() {
                    return Err(HarnessError::Diverged {
                        head: head_name.clone(),
                        epoch,
                    });
                }
                loss_sum += loss;
            }
            model.scale_grads(1.0 / chunk.len() as f64);
            model.optimizer_step(&mut adam);
        }
        let accuracy = evaluate(&model, &dataset.test, cfg.frequent_cutoff)?;
        best_accuracy = best_accuracy.max(accuracy.overall);
        records.push(EpochRecord {
            head: head_name.clone(),
            epoch,
            train_loss: loss_sum / dataset.train.len() as f64,
            accuracy: accuracy.overall,
            frequent_accuracy: accuracy.frequent,
            rare_accuracy: accuracy.rare,
        });
    }

    let (final_accuracy, final_frequent, final_rare) = {
        let last = records.last().expect("at least one epoch");
        (last.accuracy, last.frequent_accuracy, last.rare_accuracy)
    };
    let (forward_micros, predict_micros) = measure_model(&model, &dataset.test)?;
    let metrics = RunMetrics {
        head: head_name,
        seed: cfg.seed,
        rows: model.head().config().rows(),
        param_count: model.head().config().param_count(),
        majority_baseline: majority_baseline(dataset),
        final_accuracy,
        best_accuracy,
        final_frequent_accuracy: final_frequent,
        final_rare_accuracy: final_rare,
        epochs: records,
        forward_micros,
        predict_micros,
    };
    Ok((metrics, model))
}

/// Accuracy of always predicting the most common training label.
pub fn majority_baseline(dataset: &ZipfDataset) -> f64 {
    let mut counts = std::collections::HashMap::new();
    for example in &dataset.train {
        *counts.entry(example.label).or_insert(0usize) += 1;
    }
    let majority = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(label, _)| label)
        .expect("non-empty train split");
    let hits = dataset.test.iter().filter(|e| e.label == majority).count();
    hits as f64 / dataset.test.len() as f64
}

fn measure_model(model: &Model, examples: &[Example]) -> Result<(f64, f64), HarnessError> {
    let sample: Vec<&Example> = examples.iter().take(200).collect();
    let start = Instant::now();
    for example in &sample {
        std::hint::black_box(model.hidden_activation(&example.features)?);
    }
    let forward = start.elapsed().as_secs_f64() * 1e6 / sample.len() as f64;
    let start = Instant::now();
    for example in &sample {
        std::hint::black_box(model.predict(&example.features)?);
    }
    let predict = start.elapsed().as_secs_f64() * 1e6 / sample.len() as f64;
    Ok((forward, predict))
}

/// Trains every head on the same dataset and seed; heads run in parallel
/// worker threads, each owning its model.
pub fn run_experiment(
    dataset: &ZipfDataset,
    specs: &[HeadSpec],
    cfg: &TrainConfig,
) -> Result<Vec<RunMetrics>, HarnessError> {
    specs
        .par_iter()
        .map(|&spec| train_head(dataset, spec, cfg))
        .collect()
}

/// Timing parameters for [`bench_heads`].
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub hidden_width: usize,
    pub batch: usize,
    pub trials: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl BenchConfig {
    pub fn standard() -> Self {
        Self {
            hidden_width: 512,
            batch: 8,
            trials: 30,
            warmup: 3,
            seed: 0,
        }
    }
}

/// One head/vocabulary timing measurement.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub head: String,
    pub vocab_size: usize,
    pub rows: usize,
    pub params: u64,
    pub batch: usize,
    pub trials: usize,
    /// Median wall-clock per batch, microseconds.
    pub forward_micros: f64,
    pub predict_micros: f64,
}

/// Measures forward and full-prediction wall-clock for each (vocabulary
/// size, head) pair over a fixed batch of random hidden vectors. Runs on the
/// calling thread; medians over `trials` after warmup.
pub fn bench_heads(
    vocab_sizes: &[usize],
    specs: &[HeadSpec],
    cfg: &BenchConfig,
) -> Result<Vec<BenchRow>, HarnessError> {
    let mut out = Vec::new();
    for &v in vocab_sizes {
        let vocab = synthetic_vocabulary(v);
        for &spec in specs {
            let mut rng = stream_rng(cfg.seed, 21);
            let config = spec.to_config(v, cfg.hidden_width)?;
            let accounting = config.param_accounting();
            let head = Head::init_uniform(config, vocab.clone(), 0.1, &mut rng)?;
            let batch: Vec<Vec<f64>> = (0..cfg.batch)
                .map(|_| {
                    (0..cfg.hidden_width)
                        .map(|_| rng.gen_range(0.0..1.0))
                        .collect()
                })
                .collect();

            let forward_batch = |head: &Head| -> Result<(), HarnessError> {
                for hidden in &batch {
                    match head.config().kind {
                        crate::head::HeadKind::Softmax => {
                            std::hint::black_box(head.softmax_forward(hidden)?);
                        }
                        crate::head::HeadKind::Binary | crate::head::HeadKind::BinaryEc => {
                            std::hint::black_box(head.binary_forward(hidden)?);
                        }
                        _ => {
                            std::hint::black_box(head.hybrid_forward(hidden)?);
                        }
                    }
                }
                Ok(())
            };
            let predict_batch = |head: &Head| -> Result<(), HarnessError> {
                for hidden in &batch {
                    std::hint::black_box(head.predict(hidden)?);
                }
                Ok(())
            };

            let mut forward_times = Vec::with_capacity(cfg.trials);
            let mut predict_times = Vec::with_capacity(cfg.trials);
            for _ in 0..cfg.warmup {
                forward_batch(&head)?;
                predict_batch(&head)?;
            }
            for _ in 0..cfg.trials {
                let start = Instant::now();
                forward_batch(&head)?;
                forward_times.push(start.elapsed().as_secs_f64() * 1e6);
                let start = Instant::now();
                predict_batch(&head)?;
                predict_times.push(start.elapsed().as_secs_f64() * 1e6);
            }
            out.push(BenchRow {
                head: spec.to_string(),
                vocab_size: v,
                rows: accounting.rows,
                params: accounting.params,
                batch: cfg.batch,
                trials: cfg.trials,
                forward_micros: median(&mut forward_times),
                predict_micros: median(&mut predict_times),
            });
        }
    }
    Ok(out)
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}
