//! Bit-array helpers shared by the codebook, the convolutional code and the
//! prediction heads.
//!
//! Bit arrays are `Vec<u8>`/`&[u8]` with values 0 or 1, stored
//! least-significant bit first: element `i` carries weight `2^i`. The ASCII
//! form writes the first element leftmost, e.g. code index 2 over 4 bits is
//! `"0100"`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {found:?} at position {position}")]
    InvalidCharacter { position: usize, found: char },
    #[error("empty bit string")]
    Empty,
}

/// Expands `index` into `width` bits, least-significant first.
///
/// `index` must fit in `width` bits.
pub fn index_to_bits(index: u64, width: usize) -> Vec<u8> {
    debug_assert!(
        width >= 64 || index >> width == 0,
        "index {index} does not fit in {width} bits"
    );
    (0..width).map(|i| ((index >> i) & 1) as u8).collect()
}

/// Folds a bit array back into its integer index.
///
/// Returns `None` when a set bit sits at position 64 or above, i.e. the value
/// does not fit in a `u64`.
pub fn bits_to_index(bits: &[u8]) -> Option<u64> {
    let mut value = 0u64;
    for (i, &b) in bits.iter().enumerate() {
        debug_assert!(b <= 1, "bit values must be 0 or 1");
        if b == 1 {
            if i >= 64 {
                return None;
            }
            value |= 1u64 << i;
        }
    }
    Some(value)
}

/// Renders a bit array as an ASCII string of '0'/'1', first element leftmost.
pub fn to_ascii(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 1 { '1' } else { '0' })
        .collect()
}

/// Parses an ASCII '0'/'1' string into a bit array.
pub fn from_ascii(s: &str) -> Result<Vec<u8>, BitsError> {
    if s.is_empty() {
        return Err(BitsError::Empty);
    }
    s.chars()
        .enumerate()
        .map(|(position, c)| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            found => Err(BitsError::InvalidCharacter { position, found }),
        })
        .collect()
}

/// XOR of two equal-length bit arrays.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x ^ y).collect()
}

/// Number of 1 bits.
pub fn weight(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

/// `⌈log₂ n⌉`: the fewest bits that give `n` distinct codes.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        ((n - 1).ilog2() + 1) as usize
    }
}
