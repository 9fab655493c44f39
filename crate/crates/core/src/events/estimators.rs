use serde::{Deserialize, Serialize};

use super::{g_sign, pair_label, Choice, CorrelationTable, Herald, RunDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SMethod {
    /// Σ g·E over the four setting pairs of one herald.
    PerSetting,
    /// Mean of f_i = 4·g·x·y over all records (both heralds).
    EventBased,
    /// Inverse-variance mean of the two per-herald values.
    WeightedMean,
    /// Per-setting-pair mean of g·x·y pooled over both heralds, summed over
    /// the four pairs.
    CombinedEventBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SEstimate {
    pub value: f64,
    pub sigma: f64,
    pub method: SMethod,
}

/// Variance convention for a correlator estimated from a cell of `n` events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// (1 − E²)/n, the binomial variance of the mean.
    Binomial,
    /// (1 − E²)/(n − 1), the squared standard error from the unbiased sample
    /// variance of x·y.
    #[default]
    Sample,
}

impl ErrorModel {
    fn variance(self, e: f64, n: u64) -> f64 {
        let spread = (1.0 - e * e).max(0.0);
        match self {
            ErrorModel::Binomial => spread / n as f64,
            ErrorModel::Sample if n > 1 => spread / (n - 1) as f64,
            ErrorModel::Sample => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinCount {
    pub wins: u64,
    pub n: u64,
}

impl WinCount {
    pub fn fraction(&self) -> f64 {
        self.wins as f64 / self.n as f64
    }
}

impl std::ops::Add for WinCount {
    type Output = WinCount;

    fn add(self, rhs: WinCount) -> WinCount {
        WinCount {
            wins: self.wins + rhs.wins,
            n: self.n + rhs.n,
        }
    }
}

/// Σ g^h(a,b)·E(a,b) for one herald, with the sample error model.
pub fn s_per_state(table: &CorrelationTable, herald: Herald) -> Result<SEstimate> {
    s_per_state_with(table, herald, ErrorModel::Sample)
}

pub fn s_per_state_with(
    table: &CorrelationTable,
    herald: Herald,
    model: ErrorModel,
) -> Result<SEstimate> {
    let mut value = 0.0;
    let mut var = 0.0;
    for a in Choice::ALL {
        for b in Choice::ALL {
            let cell = table.cell(herald, a, b);
            let c = cell.correlator().map_err(|_| Error::EmptyCell {
                pair: pair_label(a, b).into(),
                herald: herald.to_string(),
            })?;
            value += g_sign(herald, a, b) as f64 * c.e;
            var += model.variance(c.e, c.n);
        }
    }
    Ok(SEstimate {
        value,
        sigma: var.sqrt(),
        method: SMethod::PerSetting,
    })
}

pub fn wins(dataset: &RunDataset) -> WinCount {
    let wins = dataset.records.iter().filter(|r| r.is_win()).count() as u64;
    WinCount {
        wins,
        n: dataset.len() as u64,
    }
}

/// Mean of f_i = 4·g^{h_i}(a_i,b_i)·x_i·y_i. Since f_i = +4 on a win and −4
/// otherwise, the mean is 8W/N − 4; the sigma is the standard error from the
/// unbiased sample variance of f.
pub fn s_event_based(dataset: &RunDataset) -> Result<SEstimate> {
    s_event_based_from_wins(wins(dataset))
}

pub fn s_event_based_from_wins(w: WinCount) -> Result<SEstimate> {
    if w.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if w.wins > w.n {
        return Err(Error::domain("more wins than events"));
    }
    let n = w.n as f64;
    let value = 8.0 * w.wins as f64 / n - 4.0;
    let sigma = if w.n > 1 {
        // Σ f² = 16N, so the unbiased variance is N(16 − mean²)/(N − 1).
        let var = (16.0 - value * value).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(SEstimate {
        value,
        sigma,
        method: SMethod::EventBased,
    })
}

/// Pools both heralds per setting pair: E_ab = Σ_{i∈ab} g^{h_i}·x_i·y_i / N_ab,
/// S = Σ_ab E_ab, σ² = Σ_ab (1 − E_ab²)/(N_ab − 1).
pub fn s_combined_event_based(table: &CorrelationTable) -> Result<SEstimate> {
    let mut value = 0.0;
    let mut var = 0.0;
    for a in Choice::ALL {
        for b in Choice::ALL {
            let n = table.pair_total(a, b);
            if n == 0 {
                return Err(Error::EmptyCell {
                    pair: pair_label(a, b).into(),
                    herald: "any herald".into(),
                });
            }
            let signed: i128 = Herald::ALL
                .iter()
                .map(|&h| {
                    let c = table.cell(h, a, b);
                    g_sign(h, a, b) as i128 * (c.correlated() as i128 - c.anticorrelated() as i128)
                })
                .sum();
            let e = signed as f64 / n as f64;
            value += e;
            var += ErrorModel::Sample.variance(e, n);
        }
    }
    Ok(SEstimate {
        value,
        sigma: var.sqrt(),
        method: SMethod::CombinedEventBased,
    })
}

/// Inverse-variance weighted mean of the per-herald estimates.
pub fn combine_states(s_plus: &SEstimate, s_minus: &SEstimate) -> Result<SEstimate> {
    for s in [s_plus, s_minus] {
        if !(s.sigma > 0.0) || !s.sigma.is_finite() {
            return Err(Error::Degenerate(format!(
                "cannot weight an estimate with sigma {}",
                s.sigma
            )));
        }
    }
    let w_plus = s_plus.sigma.powi(-2);
    let w_minus = s_minus.sigma.powi(-2);
    let total = w_plus + w_minus;
    Ok(SEstimate {
        value: (w_plus * s_plus.value + w_minus * s_minus.value) / total,
        sigma: total.powf(-0.5),
        method: SMethod::WeightedMean,
    })
}
