use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sequence of bits stored packed in 64-bit words, least significant bit
/// first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitStream {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = BitStream::new();
        s.extend(bits);
        s
    }

    /// Bits from `bytes`, eight per byte, least significant first. `bits`
    /// truncates the stream; it defaults to all bits of the buffer.
    pub fn from_packed(bytes: &[u8], bits: Option<usize>) -> Result<Self> {
        let available = bytes.len() * 8;
        let len = bits.unwrap_or(available);
        if len > available {
            return Err(Error::Validation(format!(
                "{len} bits requested from a {available}-bit buffer"
            )));
        }
        let mut words: Vec<u64> = bytes
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        words.truncate(len.div_ceil(64));
        if let Some(last) = words.last_mut() {
            *last &= low_mask(len - (len - 1) / 64 * 64);
        }
        Ok(BitStream { words, len })
    }

    /// Parse ASCII `0`/`1` characters; whitespace is ignored.
    pub fn parse_ascii(text: &str) -> Result<Self> {
        let mut s = BitStream::with_capacity(text.len());
        for (line_no, line) in text.lines().enumerate() {
            for c in line.chars() {
                match c {
                    '0' => s.push(false),
                    '1' => s.push(true),
                    c if c.is_whitespace() => {}
                    c => {
                        return Err(Error::parse(
                            line_no + 1,
                            "bit",
                            format!("unexpected character {c:?}"),
                        ))
                    }
                }
            }
        }
        Ok(s)
    }

    /// Independent bits with P(1) = 1/2 + `bias`, reproducible from `seed`.
    pub fn simulate(n: usize, bias: f64, seed: u64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&bias) {
            return Err(Error::domain(format!("bias {bias} outside [-1/2, 1/2]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if bias == 0.0 {
            let mut words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.random()).collect();
            if let Some(last) = words.last_mut() {
                *last &= low_mask(n - (n - 1) / 64 * 64);
            }
            return Ok(BitStream { words, len: n });
        }
        let p = 0.5 + bias;
        Ok(BitStream::from_bits((0..n).map(|_| rng.random_bool(p))))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let slot = self.len % 64;
        if slot == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().expect("word pushed") |= 1 << slot;
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.words[i / 64] >> (i % 64) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.words[i / 64] >> (i % 64) & 1 == 1)
    }

    /// The 64 bits starting at `pos`, zero beyond the end.
    pub(crate) fn word_at(&self, pos: usize) -> u64 {
        let (w, shift) = (pos / 64, pos % 64);
        let lo = self.words.get(w).copied().unwrap_or(0);
        if shift == 0 {
            return lo;
        }
        let hi = self.words.get(w + 1).copied().unwrap_or(0);
        lo >> shift | hi << (64 - shift)
    }

    /// Ones in `[start, end)`.
    pub(crate) fn ones_in(&self, start: usize, end: usize) -> u64 {
        let mut ones = 0u64;
        let mut k = start;
        while k < end {
            let m = (end - k).min(64);
            ones += u64::from((self.word_at(k) & low_mask(m)).count_ones());
            k += 64;
        }
        ones
    }

    /// Positions k in `[start, end − lag)` with q_k ≠ q_{k+lag}.
    pub(crate) fn disagreements_in(&self, start: usize, end: usize, lag: usize) -> u64 {
        let stop = end.saturating_sub(lag);
        let mut count = 0u64;
        let mut k = start;
        while k < stop {
            let m = (stop - k).min(64);
            let x = (self.word_at(k) ^ self.word_at(k + lag)) & low_mask(m);
            count += u64::from(x.count_ones());
            k += 64;
        }
        count
    }

    /// The `width`-bit block starting at `pos` as an integer, first bit least
    /// significant.
    pub(crate) fn block_at(&self, pos: usize, width: usize) -> u64 {
        self.word_at(pos) & low_mask(width)
    }

    /// Every bit flipped.
    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= low_mask(self.len - (self.len - 1) / 64 * 64);
        }
        BitStream { words, len: self.len }
    }

    pub fn reversed(&self) -> Self {
        BitStream::from_bits((0..self.len).rev().map(|i| self.get(i).expect("in range")))
    }

    /// Bits `[start, start + len)` as a new stream.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len {
            return Err(Error::domain("slice exceeds the stream"));
        }
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|j| self.word_at(start + 64 * j)).collect();
        if let Some(last) = words.last_mut() {
            *last &= low_mask(len - (len - 1) / 64 * 64);
        }
        Ok(BitStream { words, len })
    }

    /// Packed bytes, least significant bit first, zero-padded.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl Extend<bool> for BitStream {
    fn extend<I: IntoIterator<Item = bool>>(&mut self, iter: I) {
        for b in iter {
            self.push(b);
        }
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitStream::from_bits(iter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitFormat {
    /// Raw bytes, eight bits each, least significant first.
    Packed,
    /// Text of `0` and `1` characters.
    Ascii,
}

impl BitFormat {
    /// `.txt` and `.bits` are ASCII, anything else packed.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") | Some("bits") => BitFormat::Ascii,
            _ => BitFormat::Packed,
        }
    }
}

impl FromStr for BitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "packed" | "bin" | "binary" => Ok(BitFormat::Packed),
            "ascii" | "text" | "txt" => Ok(BitFormat::Ascii),
            other => Err(Error::Validation(format!("unknown bit format {other:?}"))),
        }
    }
}

pub fn read_bits_path(path: &Path, format: Option<BitFormat>) -> Result<BitStream> {
    match format.unwrap_or_else(|| BitFormat::from_path(path)) {
        BitFormat::Packed => BitStream::from_packed(&fs::read(path)?, None),
        BitFormat::Ascii => BitStream::parse_ascii(&fs::read_to_string(path)?),
    }
}

pub fn write_bits<W: Write>(mut w: W, bits: &BitStream, format: BitFormat) -> Result<()> {
    match format {
        BitFormat::Packed => w.write_all(&bits.to_packed())?,
        BitFormat::Ascii => {
            for chunk in bits.to_ascii().as_bytes().chunks(64) {
                w.write_all(chunk)?;
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
