//! The five output-layer variants: softmax, binary code, hybrid
//! softmax/binary, and the error-corrected binary/hybrid forms.
//!
//! All variants share one affine map `W h + β` over the hidden vector; they
//! differ in how rows are interpreted. A softmax head has `V` rows. A binary
//! head has one row per code bit (`B = ⌈log₂ V⌉`, or `B' = 2(B+6)` with error
//! correction) and squashes each through a logistic unit. A hybrid head
//! spends `N` rows on a softmax over the `N-1` most frequent words plus an
//! `OTHER` slot, and predicts the remaining rare words through the bit slice;
//! rare words are re-indexed from zero, so the bit slice only needs
//! `⌈log₂ (V-N+1)⌉` information bits.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::bits;
use crate::ecc::{BitProbabilities, EccCode, EccError};
use crate::nn::{self, DenseLayer};
use crate::vocab::{Codebook, Vocabulary, NUM_MARKERS, UNK_ID};

#[derive(Debug, Error)]
pub enum HeadError {
    #[error("operation not available for head kind {0:?}")]
    KindMismatch(HeadKind),
    #[error("invalid head configuration: {0}")]
    InvalidConfig(String),
    #[error("hidden vector contains a non-finite value")]
    NonFiniteInput,
    #[error("target index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("expected equal lengths, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("word id {id} belongs to the softmax slice, not the bit slice")]
    NotARareWord { id: usize },
    #[error("vocabulary has {vocab} entries but the head was configured for {config}")]
    VocabSizeMismatch { vocab: usize, config: usize },
    #[error(transparent)]
    Ecc(#[from] EccError),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
    #[error(transparent)]
    Vocab(#[from] crate::vocab::VocabError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadKind {
    Softmax,
    Binary,
    Hybrid,
    BinaryEc,
    HybridEc,
}

impl HeadKind {
    pub fn uses_ecc(self) -> bool {
        matches!(self, HeadKind::BinaryEc | HeadKind::HybridEc)
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, HeadKind::Hybrid | HeadKind::HybridEc)
    }

    pub fn has_bit_slice(self) -> bool {
        self != HeadKind::Softmax
    }
}

/// Loss applied to the bit slice. Squared distance is the default; both
/// satisfy the zero-at-target constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitLossFlavor {
    #[default]
    Squared,
    CrossEntropy,
}

/// Static shape of an output layer.
#[derive(Debug, Clone)]
pub struct HeadConfig {
    pub kind: HeadKind,
    /// Vocabulary size `V`, markers included.
    pub vocab_size: usize,
    /// Width `H` of the hidden vector feeding the head.
    pub hidden_width: usize,
    /// Softmax size `N` for the hybrid kinds (`N-1` frequent words + OTHER).
    pub softmax_size: Option<usize>,
    pub lambda_softmax: f64,
    pub lambda_bits: f64,
    pub bit_loss: BitLossFlavor,
}

impl HeadConfig {
    pub fn new(kind: HeadKind, vocab_size: usize, hidden_width: usize) -> Result<Self, HeadError> {
        Self::with_softmax_size(kind, vocab_size, hidden_width, None)
    }

    pub fn with_softmax_size(
        kind: HeadKind,
        vocab_size: usize,
        hidden_width: usize,
        softmax_size: Option<usize>,
    ) -> Result<Self, HeadError> {
        if vocab_size < NUM_MARKERS + 1 {
            return Err(HeadError::InvalidConfig(format!(
                "vocabulary size {vocab_size} too small"
            )));
        }
        if hidden_width == 0 {
            return Err(HeadError::InvalidConfig(
                "hidden width must be positive".into(),
            ));
        }
        match (kind.is_hybrid(), softmax_size) {
            (true, Some(n)) if n < 2 => {
                return Err(HeadError::InvalidConfig(format!(
                    "softmax size {n} must be >= 2"
                )));
            }
            (true, Some(n)) if n >= vocab_size => {
                return Err(HeadError::InvalidConfig(format!(
                    "softmax size {n} must be < vocabulary size {vocab_size}"
                )));
            }
            (true, None) => {
                return Err(HeadError::InvalidConfig(
                    "hybrid kinds need a softmax size".into(),
                ));
            }
            (false, Some(_)) => {
                return Err(HeadError::InvalidConfig(
                    "softmax size only applies to hybrid kinds".into(),
                ));
            }
            _ => {}
        }
        Ok(Self {
            kind,
            vocab_size,
            hidden_width,
            softmax_size,
            lambda_softmax: 1.0,
            lambda_bits: 1.0,
            bit_loss: BitLossFlavor::default(),
        })
    }

    /// Information bits of the bit slice before error correction:
    /// `⌈log₂ V⌉`, or `⌈log₂ (V-N+1)⌉` for hybrids. None for softmax.
    pub fn info_bits(&self) -> Option<usize> {
        match self.kind {
            HeadKind::Softmax => None,
            HeadKind::Binary | HeadKind::BinaryEc => Some(bits::ceil_log2(self.vocab_size)),
            HeadKind::Hybrid | HeadKind::HybridEc => {
                let n = self.softmax_size.expect("validated at construction");
                Some(bits::ceil_log2(self.vocab_size - n + 1))
            }
        }
    }

    /// Actual width of the bit slice: `B`, or `B' = 2(B+6)` with ECC.
    pub fn code_bits(&self) -> Option<usize> {
        self.info_bits()
            .map(|b| if self.kind.uses_ecc() { 2 * (b + 6) } else { b })
    }

    /// Output rows `#out` of the affine map.
    pub fn rows(&self) -> usize {
        match self.kind {
            HeadKind::Softmax => self.vocab_size,
            HeadKind::Binary | HeadKind::BinaryEc => self.code_bits().unwrap(),
            HeadKind::Hybrid | HeadKind::HybridEc => {
                self.softmax_size.unwrap() + self.code_bits().unwrap()
            }
        }
    }

    /// Exact parameter count `#W,β = rows·H + rows`.
    pub fn param_count(&self) -> u64 {
        let rows = self.rows() as u64;
        rows * self.hidden_width as u64 + rows
    }

    /// How many times smaller than the plain softmax layer this head is.
    pub fn ratio_vs_softmax(&self) -> f64 {
        let softmax = self.vocab_size as u64 * (self.hidden_width as u64 + 1);
        softmax as f64 / self.param_count() as f64
    }

    pub fn param_accounting(&self) -> ParamAccounting {
        ParamAccounting {
            rows: self.rows(),
            params: self.param_count(),
            ratio_vs_softmax: self.ratio_vs_softmax(),
        }
    }

    /// Index of the OTHER slot in the hybrid softmax slice; word ids below
    /// this are predicted by the softmax, ids at or above it by the bits.
    pub fn other_slot(&self) -> Option<usize> {
        self.softmax_size.map(|n| n - 1)
    }
}

/// One row of the size/parameter comparison table.
#[derive(Debug, Clone)]
pub struct ParamAccounting {
    pub rows: usize,
    pub params: u64,
    pub ratio_vs_softmax: f64,
}

/// Head name in experiment notation: `softmax`, `binary`, `binary-ec`,
/// `hybrid-<N>`, `hybrid-<N>-ec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeadSpec {
    pub kind: HeadKind,
    pub softmax_size: Option<usize>,
}

impl HeadSpec {
    pub fn to_config(
        self,
        vocab_size: usize,
        hidden_width: usize,
    ) -> Result<HeadConfig, HeadError> {
        HeadConfig::with_softmax_size(self.kind, vocab_size, hidden_width, self.softmax_size)
    }
}

impl fmt::Display for HeadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.softmax_size) {
            (HeadKind::Softmax, _) => write!(f, "softmax"),
            (HeadKind::Binary, _) => write!(f, "binary"),
            (HeadKind::BinaryEc, _) => write!(f, "binary-ec"),
            (HeadKind::Hybrid, Some(n)) => write!(f, "hybrid-{n}"),
            (HeadKind::HybridEc, Some(n)) => write!(f, "hybrid-{n}-ec"),
            _ => write!(f, "hybrid-?"),
        }
    }
}

impl FromStr for HeadSpec {
    type Err = HeadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HeadError::InvalidConfig(format!("unknown head name {s:?}"));
        match s {
            "softmax" => {
                return Ok(Self {
                    kind: HeadKind::Softmax,
                    softmax_size: None,
                })
            }
            "binary" => {
                return Ok(Self {
                    kind: HeadKind::Binary,
                    softmax_size: None,
                })
            }
            "binary-ec" => {
                return Ok(Self {
                    kind: HeadKind::BinaryEc,
                    softmax_size: None,
                })
            }
            _ => {}
        }
        let rest = s.strip_prefix("hybrid-").ok_or_else(bad)?;
        let (digits, kind) = match rest.strip_suffix("-ec") {
            Some(digits) => (digits, HeadKind::HybridEc),
            None => (rest, HeadKind::Hybrid),
        };
        let n: usize = digits.parse().map_err(|_| bad())?;
        Ok(Self {
            kind,
            softmax_size: Some(n),
        })
    }
}

/// Cross-entropy against a one-hot target: `-ln v_target`.
pub fn softmax_loss(probs: &[f64], target: usize) -> Result<f64, HeadError> {
    if target >= probs.len() {
        return Err(HeadError::IndexOutOfRange {
            index: target,
            size: probs.len(),
        });
    }
    Ok(-probs[target].ln())
}

/// Joint probability of a bit array under independent per-bit probabilities:
/// `Π_i (b_i q_i + (1-b_i)(1-q_i))`. Sums to one over all `2^B` arrays.
pub fn word_probability(probs: &BitProbabilities, array: &[u8]) -> Result<f64, HeadError> {
    if array.len() != probs.len() {
        return Err(HeadError::LengthMismatch {
            left: probs.len(),
            right: array.len(),
        });
    }
    Ok(probs
        .values()
        .iter()
        .zip(array)
        .map(|(&q, &b)| if b == 1 { q } else { 1.0 - q })
        .product())
}

/// Bit-slice loss: squared distance `Σ (q_i - b_i)²` or cross-entropy
/// `-Σ b_i ln q_i + (1-b_i) ln (1-q_i)`. Both are zero exactly when the
/// probabilities sit on the target bits.
pub fn bit_loss(
    probs: &BitProbabilities,
    target: &[u8],
    flavor: BitLossFlavor,
) -> Result<f64, HeadError> {
    if target.len() != probs.len() {
        return Err(HeadError::LengthMismatch {
            left: probs.len(),
            right: target.len(),
        });
    }
    let loss = match flavor {
        BitLossFlavor::Squared => probs
            .values()
            .iter()
            .zip(target)
            .map(|(&q, &b)| {
                let d = q - f64::from(b);
                d * d
            })
            .sum(),
        BitLossFlavor::CrossEntropy => -probs
            .values()
            .iter()
            .zip(target)
            .map(|(&q, &b)| if b == 1 { q.ln() } else { (1.0 - q).ln() })
            .sum::<f64>(),
    };
    Ok(loss)
}

/// One prediction with whatever posteriors the head variant produced.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub word_id: usize,
    pub word: String,
    /// Log-probability of the chosen word/codeword under the head's outputs.
    pub score: f64,
    pub bit_probabilities: Option<BitProbabilities>,
    pub class_probabilities: Option<Vec<f64>>,
}

struct TrainingCache {
    logits: Vec<f64>,
    target: usize,
}

/// An output layer bound to a vocabulary: parameters plus the code geometry
/// needed to turn bit posteriors back into words.
pub struct Head {
    config: HeadConfig,
    vocab: Arc<Vocabulary>,
    codebook: Option<Codebook>,
    ecc: Option<EccCode>,
    layer: DenseLayer,
    cache: Option<TrainingCache>,
}

impl Head {
    pub fn zeros(config: HeadConfig, vocab: Arc<Vocabulary>) -> Result<Self, HeadError> {
        let layer = DenseLayer::zeros(config.rows(), config.hidden_width);
        Self::from_layer(config, vocab, layer)
    }

    /// Head with parameters drawn uniformly from `[-scale, scale]`.
    pub fn init_uniform(
        config: HeadConfig,
        vocab: Arc<Vocabulary>,
        scale: f64,
        rng: &mut impl rand::Rng,
    ) -> Result<Self, HeadError> {
        let layer = DenseLayer::init_uniform(config.rows(), config.hidden_width, scale, rng);
        Self::from_layer(config, vocab, layer)
    }

    pub fn from_layer(
        config: HeadConfig,
        vocab: Arc<Vocabulary>,
        layer: DenseLayer,
    ) -> Result<Self, HeadError> {
        if vocab.size() != config.vocab_size {
            return Err(HeadError::VocabSizeMismatch {
                vocab: vocab.size(),
                config: config.vocab_size,
            });
        }
        if layer.output_len() != config.rows() || layer.input_len() != config.hidden_width {
            return Err(HeadError::InvalidConfig(format!(
                "layer shape {}x{} does not match head shape {}x{}",
                layer.output_len(),
                layer.input_len(),
                config.rows(),
                config.hidden_width
            )));
        }
        let codebook = match config.kind {
            HeadKind::Binary | HeadKind::BinaryEc => {
                Some(Codebook::new(vocab.clone(), config.info_bits().unwrap())?)
            }
            _ => None,
        };
        let ecc = if config.kind.uses_ecc() {
            Some(EccCode::new(config.info_bits().unwrap())?)
        } else {
            None
        };
        Ok(Self {
            config,
            vocab,
            codebook,
            ecc,
            layer,
            cache: None,
        })
    }

    pub fn config(&self) -> &HeadConfig {
        &self.config
    }

    /// Switches the bit-slice loss; safe to change after construction since
    /// it does not affect the head's shape or code geometry.
    pub fn set_bit_loss_flavor(&mut self, flavor: BitLossFlavor) {
        self.config.bit_loss = flavor;
    }

    pub fn set_loss_weights(&mut self, lambda_softmax: f64, lambda_bits: f64) {
        self.config.lambda_softmax = lambda_softmax;
        self.config.lambda_bits = lambda_bits;
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn layer(&self) -> &DenseLayer {
        &self.layer
    }

    pub fn layer_mut(&mut self) -> &mut DenseLayer {
        &mut self.layer
    }

    pub fn ecc(&self) -> Option<&EccCode> {
        self.ecc.as_ref()
    }

    fn logits(&self, hidden: &[f64]) -> Result<Vec<f64>, HeadError> {
        if hidden.iter().any(|v| !v.is_finite()) {
            return Err(HeadError::NonFiniteInput);
        }
        Ok(self.layer.affine(hidden)?)
    }

    /// Full-vocabulary softmax probabilities (softmax heads only).
    pub fn softmax_forward(&self, hidden: &[f64]) -> Result<Vec<f64>, HeadError> {
        if self.config.kind != HeadKind::Softmax {
            return Err(HeadError::KindMismatch(self.config.kind));
        }
        Ok(nn::softmax(&self.logits(hidden)?))
    }

    /// Per-bit probabilities (binary heads only).
    pub fn binary_forward(&self, hidden: &[f64]) -> Result<BitProbabilities, HeadError> {
        if !matches!(self.config.kind, HeadKind::Binary | HeadKind::BinaryEc) {
            return Err(HeadError::KindMismatch(self.config.kind));
        }
        let logits = self.logits(hidden)?;
        Ok(BitProbabilities::clamped(nn::sigmoid_vec(&logits))?)
    }

    /// Softmax slice over the `N-1` frequent words plus OTHER, and the
    /// independent bit posterior (hybrid heads only).
    pub fn hybrid_forward(
        &self,
        hidden: &[f64],
    ) -> Result<(Vec<f64>, BitProbabilities), HeadError> {
        if !self.config.kind.is_hybrid() {
            return Err(HeadError::KindMismatch(self.config.kind));
        }
        let logits = self.logits(hidden)?;
        let n = self.config.softmax_size.unwrap();
        let slice = nn::softmax(&logits[..n]);
        let bit_probs = BitProbabilities::clamped(nn::sigmoid_vec(&logits[n..]))?;
        Ok((slice, bit_probs))
    }

    /// The bit-slice target for a word: its code bits, ECC-encoded when the
    /// head uses error correction. For hybrid heads only rare words
    /// (ids at or past the OTHER threshold) have a code.
    pub fn code_target_bits(&self, id: usize) -> Result<Vec<u8>, HeadError> {
        if id >= self.config.vocab_size {
            return Err(HeadError::IndexOutOfRange {
                index: id,
                size: self.config.vocab_size,
            });
        }
        let info = match self.config.kind {
            HeadKind::Softmax => return Err(HeadError::KindMismatch(HeadKind::Softmax)),
            HeadKind::Binary | HeadKind::BinaryEc => self.codebook.as_ref().unwrap().id_to_bits(id),
            HeadKind::Hybrid | HeadKind::HybridEc => {
                let other = self.config.other_slot().unwrap();
                if id < other {
                    return Err(HeadError::NotARareWord { id });
                }
                bits::index_to_bits((id - other) as u64, self.config.info_bits().unwrap())
            }
        };
        match &self.ecc {
            Some(code) => Ok(code.encode(&info)?),
            None => Ok(info),
        }
    }

    /// Probability the hybrid model assigns to one word given a forward
    /// pass: the softmax entry for frequent words, or the OTHER mass times
    /// the joint bit probability for rare words.
    pub fn hybrid_word_probability(
        &self,
        slice: &[f64],
        bit_probs: &BitProbabilities,
        id: usize,
    ) -> Result<f64, HeadError> {
        let other = self
            .config
            .other_slot()
            .ok_or(HeadError::KindMismatch(self.config.kind))?;
        if id >= self.config.vocab_size {
            return Err(HeadError::IndexOutOfRange {
                index: id,
                size: self.config.vocab_size,
            });
        }
        if id < other {
            Ok(slice[id])
        } else {
            Ok(slice[other] * word_probability(bit_probs, &self.code_target_bits(id)?)?)
        }
    }

    /// Training loss of one (hidden, target word) pair under the configured
    /// variant and loss flavor.
    pub fn loss(&self, hidden: &[f64], target: usize) -> Result<f64, HeadError> {
        let logits = self.logits(hidden)?;
        self.loss_from_logits(&logits, target)
    }

    fn loss_from_logits(&self, logits: &[f64], target: usize) -> Result<f64, HeadError> {
        if target >= self.config.vocab_size {
            return Err(HeadError::IndexOutOfRange {
                index: target,
                size: self.config.vocab_size,
            });
        }
        match self.config.kind {
            HeadKind::Softmax => softmax_loss(&nn::softmax(logits), target),
            HeadKind::Binary | HeadKind::BinaryEc => {
                let probs = BitProbabilities::clamped(nn::sigmoid_vec(logits))?;
                bit_loss(
                    &probs,
                    &self.code_target_bits(target)?,
                    self.config.bit_loss,
                )
            }
            HeadKind::Hybrid | HeadKind::HybridEc => {
                let n = self.config.softmax_size.unwrap();
                let other = n - 1;
                let slice = nn::softmax(&logits[..n]);
                if target < other {
                    Ok(self.config.lambda_softmax * softmax_loss(&slice, target)?)
                } else {
                    let probs = BitProbabilities::clamped(nn::sigmoid_vec(&logits[n..]))?;
                    let soft = self.config.lambda_softmax * softmax_loss(&slice, other)?;
                    let bits_part = self.config.lambda_bits
                        * bit_loss(
                            &probs,
                            &self.code_target_bits(target)?,
                            self.config.bit_loss,
                        )?;
                    Ok(soft + bits_part)
                }
            }
        }
    }

    /// Forward pass that caches what [`Head::backward`] needs; returns the loss.
    pub fn training_forward(&mut self, hidden: &[f64], target: usize) -> Result<f64, HeadError> {
        if target >= self.config.vocab_size {
            return Err(HeadError::IndexOutOfRange {
                index: target,
                size: self.config.vocab_size,
            });
        }
        if hidden.iter().any(|v| !v.is_finite()) {
            return Err(HeadError::NonFiniteInput);
        }
        let logits = self.layer.forward(hidden)?;
        let loss = self.loss_from_logits(&logits, target)?;
        self.cache = Some(TrainingCache { logits, target });
        Ok(loss)
    }

    /// Backpropagates the cached loss, accumulating parameter gradients and
    /// returning the gradient with respect to the hidden vector.
    pub fn backward(&mut self) -> Result<Vec<f64>, HeadError> {
        let cache = self
            .cache
            .take()
            .ok_or(crate::nn::NnError::BackwardBeforeForward)?;
        let grad = self.logit_gradient(&cache.logits, cache.target)?;
        Ok(self.layer.backward(&grad)?)
    }

    fn bit_logit_gradient(&self, logit: f64, target_bit: u8) -> f64 {
        let q = nn::sigmoid(logit);
        let b = f64::from(target_bit);
        match self.config.bit_loss {
            BitLossFlavor::Squared => 2.0 * (q - b) * q * (1.0 - q),
            BitLossFlavor::CrossEntropy => q - b,
        }
    }

    fn logit_gradient(&self, logits: &[f64], target: usize) -> Result<Vec<f64>, HeadError> {
        match self.config.kind {
            HeadKind::Softmax => {
                let mut grad = nn::softmax(logits);
                grad[target] -= 1.0;
                Ok(grad)
            }
            HeadKind::Binary | HeadKind::BinaryEc => {
                let target_bits = self.code_target_bits(target)?;
                Ok(logits
                    .iter()
                    .zip(&target_bits)
                    .map(|(&u, &b)| self.bit_logit_gradient(u, b))
                    .collect())
            }
            HeadKind::Hybrid | HeadKind::HybridEc => {
                let n = self.config.softmax_size.unwrap();
                let other = n - 1;
                let lambda_soft = self.config.lambda_softmax;
                let mut grad = vec![0.0; logits.len()];
                let slice = nn::softmax(&logits[..n]);
                let soft_target = if target < other { target } else { other };
                for (g, &v) in grad[..n].iter_mut().zip(&slice) {
                    *g = lambda_soft * v;
                }
                grad[soft_target] -= lambda_soft;
                if target >= other {
                    let target_bits = self.code_target_bits(target)?;
                    for ((g, &u), &b) in grad[n..].iter_mut().zip(&logits[n..]).zip(&target_bits) {
                        *g = self.config.lambda_bits * self.bit_logit_gradient(u, b);
                    }
                }
                Ok(grad)
            }
        }
    }

    /// Predicts a word from a hidden vector: softmax argmax, thresholded or
    /// Viterbi-decoded bits mapped back through the codebook (UNK when the
    /// pattern falls outside the table), or the hierarchical hybrid rule
    /// (frequent-word argmax first, bit decoding behind the OTHER slot).
    pub fn predict(&self, hidden: &[f64]) -> Result<Prediction, HeadError> {
        match self.config.kind {
            HeadKind::Softmax => {
                let probs = self.softmax_forward(hidden)?;
                let id = argmax(&probs);
                Ok(Prediction {
                    word_id: id,
                    word: self.vocab.surface(id).unwrap().to_owned(),
                    score: probs[id].ln(),
                    bit_probabilities: None,
                    class_probabilities: Some(probs),
                })
            }
            HeadKind::Binary | HeadKind::BinaryEc => {
                let probs = self.binary_forward(hidden)?;
                let info = match &self.ecc {
                    Some(code) => code.viterbi_decode(&probs)?,
                    None => probs.threshold(),
                };
                let codebook = self.codebook.as_ref().unwrap();
                let id = codebook.bits_to_id(&info);
                let codeword = match &self.ecc {
                    Some(code) => code.encode(&info)?,
                    None => info,
                };
                let score = probs.log_likelihood(&codeword)?;
                Ok(Prediction {
                    word_id: id,
                    word: self.vocab.surface(id).unwrap().to_owned(),
                    score,
                    bit_probabilities: Some(probs),
                    class_probabilities: None,
                })
            }
            HeadKind::Hybrid | HeadKind::HybridEc => {
                let (slice, probs) = self.hybrid_forward(hidden)?;
                let other = self.config.other_slot().unwrap();
                let top = argmax(&slice);
                if top < other {
                    return Ok(Prediction {
                        word_id: top,
                        word: self.vocab.surface(top).unwrap().to_owned(),
                        score: slice[top].ln(),
                        bit_probabilities: Some(probs),
                        class_probabilities: Some(slice),
                    });
                }
                let info = match &self.ecc {
                    Some(code) => code.viterbi_decode(&probs)?,
                    None => probs.threshold(),
                };
                let rare_index = bits::bits_to_index(&info).unwrap_or(u64::MAX) as usize;
                let id = match rare_index.checked_add(other) {
                    Some(id) if id < self.config.vocab_size => id,
                    _ => UNK_ID,
                };
                let codeword = match &self.ecc {
                    Some(code) => code.encode(&info)?,
                    None => info,
                };
                let score = slice[other].ln() + probs.log_likelihood(&codeword)?;
                Ok(Prediction {
                    word_id: id,
                    word: self.vocab.surface(id).unwrap().to_owned(),
                    score,
                    bit_probabilities: Some(probs),
                    class_probabilities: Some(slice),
                })
            }
        }
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Rounds to three significant figures with a metric suffix, matching the
/// compact table style: `33619968` -> `"33.6 M"`, `270864` -> `"271. k"`,
/// `7695` -> `"7.70 k"`.
pub fn human_count(count: u64) -> String {
    if count == 0 {
        return "0".to_owned();
    }
    let mag = count.ilog10() as usize + 1;
    let (mantissa, mag) = if mag <= 3 {
        (count * 10u64.pow(3 - mag as u32), mag)
    } else {
        let cut = 10u64.pow(mag as u32 - 3);
        let mut mantissa = count / cut;
        // round half up on the digit after the cut
        if (count % cut) * 10 / cut >= 5 {
            mantissa += 1;
        }
        if mantissa == 1000 {
            (100, mag + 1)
        } else {
            (mantissa, mag)
        }
    };
    render_3sf(mantissa, mag)
}

/// Three-significant-figure form of a parameter ratio, rendered as `1/...`.
pub fn human_ratio(ratio: f64) -> String {
    assert!(ratio.is_finite() && ratio > 0.0);
    if ratio == 1.0 {
        return "1/1".to_owned();
    }
    if ratio < 1.0 {
        return format!("{ratio:.3}");
    }
    let mag = ratio.log10().floor() as usize + 1;
    let mut mantissa = if mag >= 3 {
        (ratio / 10f64.powi(mag as i32 - 3) + 0.5).floor() as u64
    } else {
        (ratio * 10f64.powi(3 - mag as i32) + 0.5).floor() as u64
    };
    let mut mag = mag;
    if mantissa == 1000 {
        mantissa = 100;
        mag += 1;
    }
    format!("1/{}", render_3sf(mantissa, mag))
}

/// Renders a 3-digit mantissa with the decimal point placed for the given
/// decimal magnitude, choosing a k/M suffix.
fn render_3sf(mantissa: u64, mag: usize) -> String {
    debug_assert!((100..1000).contains(&mantissa) || mag <= 3);
    let (suffix_pow, suffix) = if mag >= 7 {
        (6, " M")
    } else if mag >= 4 {
        (3, " k")
    } else {
        (0, "")
    };
    let before_point = mag - suffix_pow;
    let digits = format!("{mantissa:03}");
    let (head, tail) = digits.split_at(before_point.min(3));
    if tail.is_empty() {
        format!("{head}.{suffix}")
    } else {
        format!("{head}.{tail}{suffix}")
    }
}
