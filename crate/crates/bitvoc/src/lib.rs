//! Binary-code word prediction for large-vocabulary output layers.
//!
//! Instead of a `V`-way softmax, an output word is represented as a short bit
//! array and each bit is predicted independently by a logistic unit. The crate
//! provides:
//!
//! - [`vocab`]: frequency-ranked vocabularies and the minimal word ↔ bit-array
//!   codebook (`B = ⌈log₂ V⌉` bits, rank-ordered code indices);
//! - [`ecc`]: a rate-1/2 terminated convolutional code with soft-decision
//!   Viterbi decoding, free-distance search, and a bit-flip channel;
//! - [`head`]: the five output-layer variants (softmax, binary, hybrid, and
//!   the error-corrected binary/hybrid forms) with their losses, word
//!   prediction, and exact parameter accounting;
//! - [`nn`]: a minimal dense-layer core with manual backprop and Adam,
//!   enough to train the heads end-to-end on toy tasks;
//! - [`harness`]: synthetic Zipfian classification tasks and CPU timing
//!   benchmarks comparing the head variants.

pub mod bits;
pub mod ecc;
pub mod harness;
pub mod head;
pub mod nn;
pub mod vocab;

pub use ecc::{BitProbabilities, EccCode};
pub use head::{Head, HeadConfig, HeadKind, HeadSpec, Prediction};
pub use nn::{AdamOptimizer, DenseLayer};
pub use vocab::{Codebook, Vocabulary};
