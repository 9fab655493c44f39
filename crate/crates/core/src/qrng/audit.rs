//! Bias, serial correlation, time evolution and the serial block test.
//!
//! For ±1/2-centred bits every product (q_k − 1/2)(q_{k+l} − 1/2) is ±1/4 and
//! every squared term is 1/4, so SCC_l = (agree − disagree)/n. All statistics
//! therefore reduce to integer counts, which merge exactly across chunks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bits::BitStream;
use crate::error::{Error, Result};
use crate::stats::chi_squared_sf;

/// Largest lag kept by [`SccAccumulator`].
pub const MAX_LAG: usize = 56;

/// Bits per parallel work unit.
const CHUNK_BITS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    /// n_ones/n − 1/2.
    pub bias: f64,
    /// 1/(2√n).
    pub sigma: f64,
    pub n: u64,
}

/// Running count of ones; constant memory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BiasAccumulator {
    pub ones: u64,
    pub n: u64,
}

impl BiasAccumulator {
    pub fn push(&mut self, bit: bool) {
        self.ones += u64::from(bit);
        self.n += 1;
    }

    pub fn merge(&mut self, other: &BiasAccumulator) {
        self.ones += other.ones;
        self.n += other.n;
    }

    pub fn estimate(&self) -> Result<BiasEstimate> {
        if self.n == 0 {
            return Err(Error::EmptyDataset);
        }
        let n = self.n as f64;
        Ok(BiasEstimate {
            bias: bias_value(self.ones, self.n),
            sigma: 0.5 / n.sqrt(),
            n: self.n,
        })
    }
}

/// ones/n − 1/2 as (2·ones − n)/2n, which negates exactly under complement.
fn bias_value(ones: u64, n: u64) -> f64 {
    let excess = 2 * i128::from(ones) - i128::from(n);
    excess as f64 / (2.0 * n as f64)
}

pub fn bias(stream: &BitStream) -> Result<BiasEstimate> {
    if stream.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = stream.len();
    let ones = (0..n.div_ceil(CHUNK_BITS))
        .into_par_iter()
        .map(|c| stream.ones_in(c * CHUNK_BITS, ((c + 1) * CHUNK_BITS).min(n)))
        .sum();
    BiasAccumulator { ones, n: n as u64 }.estimate()
}

/// Streaming serial-correlation counts for lags 1..=max_lag. Keeps the first
/// and last `max_lag` bits so that partial results over consecutive chunks
/// merge exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccAccumulator {
    max_lag: usize,
    n: u64,
    /// disagree[l − 1]: pairs at lag l with different bits.
    disagree: Vec<u64>,
    head: Vec<bool>,
    tail: std::collections::VecDeque<bool>,
}

impl SccAccumulator {
    pub fn new(max_lag: usize) -> Result<Self> {
        if !(1..=MAX_LAG).contains(&max_lag) {
            return Err(Error::domain(format!("lag range must be within 1..={MAX_LAG}")));
        }
        Ok(SccAccumulator {
            max_lag,
            n: 0,
            disagree: vec![0; max_lag],
            head: Vec::with_capacity(max_lag),
            tail: std::collections::VecDeque::with_capacity(max_lag + 1),
        })
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn push(&mut self, bit: bool) {
        for (l, d) in self.disagree.iter_mut().enumerate() {
            if let Some(&prev) = self.tail.iter().rev().nth(l) {
                *d += u64::from(prev != bit);
            }
        }
        if self.head.len() < self.max_lag {
            self.head.push(bit);
        }
        self.tail.push_back(bit);
        if self.tail.len() > self.max_lag {
            self.tail.pop_front();
        }
        self.n += 1;
    }

    /// Append the counts of the stream that immediately follows this one.
    pub fn merge(&mut self, next: &SccAccumulator) -> Result<()> {
        if next.max_lag != self.max_lag {
            return Err(Error::domain("cannot merge accumulators with different lag ranges"));
        }
        let left: Vec<bool> = self.tail.iter().copied().collect();
        for l in 1..=self.max_lag {
            let mut cross = 0u64;
            // Pairs (i, j) with i in the left tail, j in the right head, and
            // distance l.
            for d in 1..=l.min(left.len()) {
                if let Some(&right) = next.head.get(l - d) {
                    cross += u64::from(left[left.len() - d] != right);
                }
            }
            self.disagree[l - 1] += next.disagree[l - 1] + cross;
        }
        for &b in &next.head {
            if self.head.len() < self.max_lag {
                self.head.push(b);
            }
        }
        for &b in &next.tail {
            self.tail.push_back(b);
            if self.tail.len() > self.max_lag {
                self.tail.pop_front();
            }
        }
        self.n += next.n;
        Ok(())
    }

    /// SCC_l from the accumulated counts.
    pub fn scc(&self, lag: usize) -> Result<f64> {
        if lag == 0 || lag > self.max_lag {
            return Err(Error::domain(format!("lag {lag} outside 1..={}", self.max_lag)));
        }
        if (lag as u64) >= self.n {
            return Err(Error::domain(format!("lag {lag} needs more than {} bits", self.n)));
        }
        let pairs = self.n - lag as u64;
        let d = self.disagree[lag - 1];
        Ok(((pairs - d) as f64 - d as f64) / self.n as f64)
    }
}

/// SCC_l = Σ_{k=1}^{n−l}(q_k − 1/2)(q_{k+l} − 1/2) / Σ_{k=1}^{n}(q_k − 1/2)².
pub fn scc(stream: &BitStream, lag: usize) -> Result<f64> {
    let n = stream.len();
    if lag == 0 || lag >= n {
        return Err(Error::domain(format!("lag {lag} requires 1 ≤ lag < n = {n}")));
    }
    let d: u64 = (0..n.div_ceil(CHUNK_BITS))
        .into_par_iter()
        .map(|c| stream.disagreements_in(c * CHUNK_BITS, ((c + 1) * CHUNK_BITS + lag).min(n), lag))
        .sum();
    let pairs = (n - lag) as u64;
    Ok(((pairs - d) as f64 - d as f64) / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SccPoint {
    pub lag: usize,
    pub scc: f64,
    /// 1/√n, the null standard deviation.
    pub sigma: f64,
}

/// SCC for every lag in `lags`.
pub fn scc_range(stream: &BitStream, lags: std::ops::RangeInclusive<usize>) -> Result<Vec<SccPoint>> {
    let sigma = 1.0 / (stream.len() as f64).sqrt();
    lags.map(|lag| scc(stream, lag).map(|scc| SccPoint { lag, scc, sigma }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowStatistic {
    Bias,
    /// Lag-1 serial correlation.
    Scc1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub start: usize,
    pub len: usize,
    pub value: f64,
    pub sigma: f64,
}

impl WindowPoint {
    pub fn within(&self, k: f64) -> bool {
        self.value.abs() <= k * self.sigma
    }
}

/// The statistic over consecutive windows of `window` bits, in stream order.
/// A shorter trailing window is kept when the statistic is defined on it.
pub fn windowed_evolution(
    stream: &BitStream,
    statistic: WindowStatistic,
    window: usize,
) -> Result<Vec<WindowPoint>> {
    if window == 0 {
        return Err(Error::domain("window must be at least 1 bit"));
    }
    let n = stream.len();
    let points: Vec<Option<WindowPoint>> = (0..n.div_ceil(window))
        .into_par_iter()
        .map(|w| {
            let start = w * window;
            let len = window.min(n - start);
            let nf = len as f64;
            match statistic {
                WindowStatistic::Bias => Some(WindowPoint {
                    start,
                    len,
                    value: bias_value(stream.ones_in(start, start + len), len as u64),
                    sigma: 0.5 / nf.sqrt(),
                }),
                WindowStatistic::Scc1 if len >= 2 => {
                    let d = stream.disagreements_in(start, start + len, 1);
                    let pairs = (len - 1) as u64;
                    Some(WindowPoint {
                        start,
                        len,
                        value: ((pairs - d) as f64 - d as f64) / nf,
                        sigma: 1.0 / nf.sqrt(),
                    })
                }
                WindowStatistic::Scc1 => None,
            }
        })
        .collect();
    Ok(points.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialTest {
    pub block_length: usize,
    pub blocks: u64,
    pub chi_squared: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Largest block length accepted by [`serial_test`].
pub const MAX_BLOCK_LENGTH: usize = 20;

/// χ² test of non-overlapping `block_length`-bit block frequencies against
/// the uniform distribution; upper-tail p-value with 2^L − 1 degrees of
/// freedom. Needs at least 5·2^L complete blocks.
pub fn serial_test(stream: &BitStream, block_length: usize) -> Result<SerialTest> {
    if !(1..=MAX_BLOCK_LENGTH).contains(&block_length) {
        return Err(Error::domain(format!("block length must be within 1..={MAX_BLOCK_LENGTH}")));
    }
    let cells = 1usize << block_length;
    let blocks = stream.len() / block_length;
    if blocks < 5 * cells {
        return Err(Error::InsufficientData(format!(
            "{blocks} blocks of {block_length} bits; need at least {}",
            5 * cells
        )));
    }
    let per_chunk = (CHUNK_BITS / block_length).max(1);
    let counts = (0..blocks.div_ceil(per_chunk))
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, c| {
                for b in c * per_chunk..((c + 1) * per_chunk).min(blocks) {
                    acc[stream.block_at(b * block_length, block_length) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let expected = blocks as f64 / cells as f64;
    let chi_squared = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dof = (cells - 1) as u64;
    Ok(SerialTest {
        block_length,
        blocks: blocks as u64,
        chi_squared,
        dof,
        p_value: chi_squared_sf(chi_squared, dof as f64)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(s: &str) -> BitStream {
        BitStream::parse_ascii(s).unwrap()
    }

    #[test]
    fn bias_of_simple_streams() {
        let alt = BitStream::from_bits((0..1000).map(|i| i % 2 == 1));
        assert_eq!(bias(&alt).unwrap().bias, 0.0);
        let ones = BitStream::from_bits(std::iter::repeat_n(true, 77));
        assert_eq!(bias(&ones).unwrap().bias, 0.5);
        assert!(bias(&BitStream::new()).is_err());
    }

    #[test]
    fn bias_sigma_for_360_gigabits() {
        let acc = BiasAccumulator { ones: 180_000_000_000, n: 360_000_000_000 };
        let e = acc.estimate().unwrap();
        assert!((e.sigma - 8.33e-7).abs() < 5e-10);
    }

    #[test]
    fn scc_five_bit_example() {
        // Centred values −,+,+,−,+; lag-1 products sum to −1/2 over 5/4.
        assert!((scc(&stream("01101"), 1).unwrap() + 0.4).abs() < 1e-15);
    }

    #[test]
    fn scc_of_simple_streams() {
        let n = 1001;
        let constant = BitStream::from_bits(std::iter::repeat_n(false, n));
        assert_eq!(scc(&constant, 1).unwrap(), (n - 1) as f64 / n as f64);
        let alt = BitStream::from_bits((0..n).map(|i| i % 2 == 0));
        assert_eq!(scc(&alt, 2).unwrap(), (n - 2) as f64 / n as f64);
        assert!(scc(&alt, n).is_err());
        assert!(scc(&alt, 0).is_err());
    }

    #[test]
    fn accumulator_matches_direct_and_merges() {
        let s = BitStream::simulate(5_000, 0.1, 4).unwrap();
        let mut whole = SccAccumulator::new(MAX_LAG).unwrap();
        s.iter().for_each(|b| whole.push(b));
        for lag in [1, 2, 17, 56] {
            assert_eq!(whole.scc(lag).unwrap(), scc(&s, lag).unwrap());
        }
        // Uneven chunks, some shorter than the lag window.
        let cuts = [0, 3, 40, 41, 1000, 1030, 5000];
        let mut merged = SccAccumulator::new(MAX_LAG).unwrap();
        for w in cuts.windows(2) {
            let mut part = SccAccumulator::new(MAX_LAG).unwrap();
            s.slice(w[0], w[1] - w[0]).unwrap().iter().for_each(|b| part.push(b));
            merged.merge(&part).unwrap();
        }
        assert_eq!(merged, whole);
    }

    #[test]
    fn single_window_equals_whole_stream() {
        let s = BitStream::simulate(4_321, 0.02, 8).unwrap();
        let b = windowed_evolution(&s, WindowStatistic::Bias, s.len()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].value, bias(&s).unwrap().bias);
        let c = windowed_evolution(&s, WindowStatistic::Scc1, 10_000).unwrap();
        assert_eq!(c[0].value, scc(&s, 1).unwrap());
        assert!(windowed_evolution(&s, WindowStatistic::Bias, 0).is_err());
    }

    #[test]
    fn serial_test_edges() {
        let zeros = BitStream::from_bits(std::iter::repeat_n(false, 1000));
        assert!(serial_test(&zeros, 1).unwrap().p_value < 1e-100);
        assert!(serial_test(&zeros, 8).is_err());
        let r = serial_test(&BitStream::simulate(100_000, 0.0, 1).unwrap(), 4).unwrap();
        assert_eq!(r.dof, 15);
        assert_eq!(r.blocks, 25_000);
    }
}
