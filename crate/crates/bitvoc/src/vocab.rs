//! Frequency-ranked vocabularies and the minimal word ↔ bit-array codebook.
//!
//! A vocabulary of size `V` holds three reserved markers (`<unk>`, `<bos>`,
//! `<eos>` at code indices 0, 1, 2) plus the `V-3` most frequent words of a
//! token stream, ranked by descending count. A word's code index is
//! `2 + rank(w)`, so the whole table lives in `{0, ..., V-1}` and any width
//! `B >= ⌈log₂ V⌉` represents every word injectively. Bit arrays are
//! least-significant bit first, which makes high bits of frequent words zero.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::bits;

pub const UNK_ID: usize = 0;
pub const BOS_ID: usize = 1;
pub const EOS_ID: usize = 2;
pub const NUM_MARKERS: usize = 3;

pub const UNK_SURFACE: &str = "<unk>";
pub const BOS_SURFACE: &str = "<bos>";
pub const EOS_SURFACE: &str = "<eos>";

const MARKER_SURFACES: [&str; NUM_MARKERS] = [UNK_SURFACE, BOS_SURFACE, EOS_SURFACE];

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary size must be at least {}, got {requested}", NUM_MARKERS + 1)]
    VocabSizeTooSmall { requested: usize },
    #[error("token stream contained no countable tokens")]
    EmptyTokenStream,
    #[error("bit width {got} is below the minimum ⌈log₂ V⌉ = {required}")]
    WidthTooSmall { required: usize, got: usize },
    #[error("vocabulary file has no entries")]
    EmptyFile,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate surface {surface:?}")]
    DuplicateSurface { line: usize, surface: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An immutable frequency-ranked word table with the three reserved markers.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    /// Index = code index `x`; the first three entries are the markers.
    entries: Vec<(String, u64)>,
    lookup: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from a token stream, keeping the `max_size - 3`
    /// most frequent surfaces. Count ties break lexicographically by surface
    /// so ranking is deterministic. Tokens spelled exactly like a marker are
    /// ignored. When the stream has fewer distinct surfaces than requested,
    /// the built size shrinks to fit.
    pub fn build<I, S>(tokens: I, max_size: usize) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if max_size < NUM_MARKERS + 1 {
            return Err(VocabError::VocabSizeTooSmall {
                requested: max_size,
            });
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut saw_token = false;
        for token in tokens {
            let token = token.as_ref();
            saw_token = true;
            if MARKER_SURFACES.contains(&token) {
                continue;
            }
            *counts.entry(token.to_owned()).or_insert(0) += 1;
        }
        if !saw_token {
            return Err(VocabError::EmptyTokenStream);
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size - NUM_MARKERS);
        Ok(Self::from_ranked(ranked))
    }

    /// Builds a vocabulary from already-counted entries; ranks are assigned
    /// by sorting on (count descending, surface ascending).
    pub fn from_counts(counts: Vec<(String, u64)>) -> Result<Self, VocabError> {
        if counts.is_empty() {
            return Err(VocabError::EmptyTokenStream);
        }
        let mut ranked = counts;
        ranked.retain(|(surface, _)| !MARKER_SURFACES.contains(&surface.as_str()));
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self::from_ranked(ranked))
    }

    fn from_ranked(ranked: Vec<(String, u64)>) -> Self {
        let mut entries = Vec::with_capacity(NUM_MARKERS + ranked.len());
        for marker in MARKER_SURFACES {
            entries.push((marker.to_owned(), 0));
        }
        entries.extend(ranked);
        let lookup = entries
            .iter()
            .enumerate()
            .map(|(id, (surface, _))| (surface.clone(), id))
            .collect();
        Self { entries, lookup }
    }

    /// Total size `V`, markers included.
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Code index of a surface; out-of-vocabulary surfaces map to `UNK`.
    pub fn id_of(&self, surface: &str) -> usize {
        self.lookup.get(surface).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.lookup.contains_key(surface)
    }

    pub fn surface(&self, id: usize) -> Option<&str> {
        self.entries.get(id).map(|(surface, _)| surface.as_str())
    }

    pub fn count(&self, id: usize) -> Option<u64> {
        self.entries.get(id).map(|&(_, count)| count)
    }

    /// Frequency rank of a word id (`id = 2 + rank`); markers have no rank.
    pub fn rank_of_id(&self, id: usize) -> Option<usize> {
        (id >= NUM_MARKERS && id < self.entries.len()).then(|| id - 2)
    }

    /// Non-marker entries in rank order.
    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries
            .iter()
            .skip(NUM_MARKERS)
            .map(|(surface, count)| (surface.as_str(), *count))
    }

    /// Minimum usable code width: `⌈log₂ V⌉`.
    pub fn min_code_width(&self) -> usize {
        bits::ceil_log2(self.size())
    }

    /// Writes the `surface<TAB>count` table, markers omitted, in rank order.
    pub fn save_tsv(&self, path: &Path) -> Result<(), VocabError> {
        let mut out = String::new();
        for (surface, count) in self.words() {
            let _ = writeln!(out, "{surface}\t{count}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Reads a `surface<TAB>count` table. Ranks are recomputed from the
    /// counts, so the file order does not have to be trusted.
    pub fn load_tsv(path: &Path) -> Result<Self, VocabError> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        let mut entries = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.is_empty() {
                continue;
            }
            let (surface, count) = raw.split_once('\t').ok_or_else(|| VocabError::Parse {
                line,
                message: "missing tab".into(),
            })?;
            if surface.is_empty() {
                return Err(VocabError::Parse {
                    line,
                    message: "empty surface".into(),
                });
            }
            let count: u64 = count.trim().parse().map_err(|e| VocabError::Parse {
                line,
                message: format!("bad count {count:?}: {e}"),
            })?;
            if seen.insert(surface, line).is_some() {
                return Err(VocabError::DuplicateSurface {
                    line,
                    surface: surface.to_owned(),
                });
            }
            entries.push((surface.to_owned(), count));
        }
        if entries.is_empty() {
            return Err(VocabError::EmptyFile);
        }
        Self::from_counts(entries)
    }
}

/// The word ↔ bit-array mapping at a fixed width `B >= ⌈log₂ V⌉`.
///
/// Forward: code index `x` (0/1/2 for the markers, `2 + rank(w)` otherwise)
/// expanded least-significant bit first. Reverse: any bit array folds back to
/// an index; indexes outside the table give `UNK`.
#[derive(Debug, Clone)]
pub struct Codebook {
    vocab: Arc<Vocabulary>,
    width: usize,
}

impl Codebook {
    pub fn new(vocab: Arc<Vocabulary>, width: usize) -> Result<Self, VocabError> {
        let required = vocab.min_code_width();
        if width < required {
            return Err(VocabError::WidthTooSmall {
                required,
                got: width,
            });
        }
        Ok(Self { vocab, width })
    }

    /// Codebook at the minimal width `B = ⌈log₂ V⌉`.
    pub fn minimal(vocab: Arc<Vocabulary>) -> Self {
        let width = vocab.min_code_width();
        Self { vocab, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn id_to_bits(&self, id: usize) -> Vec<u8> {
        debug_assert!(id < self.vocab.size());
        bits::index_to_bits(id as u64, self.width)
    }

    /// Bit array of a surface; out-of-vocabulary surfaces get the UNK code.
    pub fn word_to_bits(&self, surface: &str) -> Vec<u8> {
        self.id_to_bits(self.vocab.id_of(surface))
    }

    /// Code index of a bit array, `UNK` when the value falls outside the
    /// table. Total over arrays of any length.
    pub fn bits_to_id(&self, array: &[u8]) -> usize {
        match bits::bits_to_index(array) {
            Some(value) if (value as usize) < self.vocab.size() => value as usize,
            _ => UNK_ID,
        }
    }

    pub fn bits_to_word(&self, array: &[u8]) -> &str {
        self.vocab
            .surface(self.bits_to_id(array))
            .expect("id is always in range")
    }
}
