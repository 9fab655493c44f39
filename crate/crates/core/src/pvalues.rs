//! LHV-exclusion P-value bounds.
//!
//! Two bounds are provided, both valid without assuming independent trials
//! and both corrected for partially predictable settings:
//!
//! * the martingale bound, a McDiarmid-type concentration inequality on the
//!   mean of the bounded increments Z_i = (f_i − 2)/8;
//! * the game bound, the upper binomial tail of the win count with per-round
//!   LHV win probability ξ = 3/4 + (τ − τ²).
//!
//! Everything is evaluated in log space; the published runs reach P-values
//! of order 1e-18.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Setting predictability τ ∈ [0, 1/2]: the largest deviation of a setting
/// probability from 1/2 given the run history.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Predictability(f64);

impl Predictability {
    pub const IDEAL: Predictability = Predictability(0.0);

    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&tau) {
            return Err(Error::domain(format!("tau {tau} outside [0, 1/2]")));
        }
        Ok(Predictability(tau))
    }

    /// Larger of |τ_a| and |τ_b|.
    pub fn from_sides(tau_a: f64, tau_b: f64) -> Result<Self> {
        Self::new(tau_a.abs().max(tau_b.abs()))
    }

    pub fn tau(self) -> f64 {
        self.0
    }

    /// ε = τ − τ², the shift of the LHV bound per unit of the normalized
    /// violation. Lies in [0, 1/4].
    pub fn correction(self) -> f64 {
        self.0 - self.0 * self.0
    }
}

impl TryFrom<f64> for Predictability {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Predictability::new(v)
    }
}

impl From<Predictability> for f64 {
    fn from(p: Predictability) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Martingale,
    Game,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValueReport {
    pub method: BoundMethod,
    pub p_bound: f64,
    /// Natural log of `p_bound`; stays finite when `p_bound` underflows.
    pub log_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wins: Option<u64>,
    pub n: u64,
    pub tau: f64,
}

/// Largest expected S reachable by an LHV model facing settings with
/// predictability τ: 2 + 8(τ − τ²).
pub fn lhv_s_bound(tau: f64) -> Result<f64> {
    let p = Predictability::new(tau)?;
    Ok(2.0 + 8.0 * p.correction())
}

/// Per-event log of the martingale bound: with A = 3/4 + ε and Ā = 1/4 − ε,
/// (A+t)·ln(A/(A+t)) + (Ā−t)·ln(Ā/(Ā−t)), for 0 < t ≤ Ā.
fn martingale_log_rate(t: f64, eps: f64) -> f64 {
    let a = 0.75 + eps;
    let a_bar = 0.25 - eps;
    let first = -(a + t) * (t / a).ln_1p();
    let rest = a_bar - t;
    // (Ā/(Ā−t))^(Ā−t) → 1 as t → Ā.
    let second = if rest <= 0.0 {
        0.0
    } else {
        -rest * (-t / a_bar).ln_1p()
    };
    first + second
}

/// Martingale (McDiarmid) P-value bound for an event-based S over N events.
pub fn pvalue_martingale(s: f64, n: u64, tau: Predictability) -> Result<PValueReport> {
    if n < 1 {
        return Err(Error::domain("N must be at least 1"));
    }
    if !s.is_finite() || s.abs() > 4.0 {
        return Err(Error::domain(format!("|S| = {} exceeds 4", s.abs())));
    }
    let eps = tau.correction();
    let t = (s - 2.0) / 8.0 - eps;
    let log_p = if t <= 0.0 {
        0.0
    } else {
        let t = t.min(0.25 - eps);
        (n as f64 * martingale_log_rate(t, eps)).min(0.0)
    };
    Ok(PValueReport {
        method: BoundMethod::Martingale,
        p_bound: log_p.exp(),
        log_p,
        s: Some(s),
        wins: None,
        n,
        tau: tau.tau(),
    })
}

/// Game-formalism P-value: probability of at least W wins in N rounds when
/// each round is won with probability at most ξ = 3/4 + (τ − τ²).
pub fn pvalue_game(wins: u64, n: u64, tau: Predictability) -> Result<PValueReport> {
    if n < 1 {
        return Err(Error::domain("N must be at least 1"));
    }
    if wins > n {
        return Err(Error::domain(format!("W = {wins} exceeds N = {n}")));
    }
    let xi = 0.75 + tau.correction();
    // At τ = 1/2 an LHV model wins every round.
    let log_p = if xi >= 1.0 {
        0.0
    } else {
        ln_binomial_tail(wins, n, xi)?
    };
    Ok(PValueReport {
        method: BoundMethod::Game,
        p_bound: log_p.exp(),
        log_p,
        s: None,
        wins: Some(wins),
        n,
        tau: tau.tau(),
    })
}

/// Upper tail P(X ≥ W) for X ~ Binomial(N, ξ).
pub fn binomial_tail(wins: u64, n: u64, xi: f64) -> Result<f64> {
    ln_binomial_tail(wins, n, xi).map(f64::exp)
}

/// Natural log of [`binomial_tail`].
///
/// Above the mean the tail is summed upward from W with the term ratio
/// (N−j)/(j+1)·ξ/(1−ξ), anchored at the log-pmf of W. At or below the mean
/// the complementary lower tail is summed downward from W−1 and subtracted
/// from one; that tail is never close to one there, so no precision is lost.
pub fn ln_binomial_tail(wins: u64, n: u64, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::domain(format!("xi {xi} outside (0, 1)")));
    }
    if wins > n {
        return Err(Error::domain(format!("W = {wins} exceeds N = {n}")));
    }
    if wins == 0 {
        return Ok(0.0);
    }
    let ln_xi = xi.ln();
    let ln_1m = (-xi).ln_1p();
    let ln_pmf = |j: u64| ln_binomial(n, j) + j as f64 * ln_xi + (n - j) as f64 * ln_1m;
    let odds = xi / (1.0 - xi);

    if wins as f64 > n as f64 * xi {
        let mut sum = 1.0;
        let mut term = 1.0;
        for j in wins..n {
            term *= (n - j) as f64 / (j + 1) as f64 * odds;
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        Ok(ln_pmf(wins) + sum.ln())
    } else {
        let top = wins - 1;
        let mut sum = 1.0;
        let mut term = 1.0;
        for j in (1..=top).rev() {
            term *= j as f64 / (n - j + 1) as f64 / odds;
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        let lower = (ln_pmf(top) + sum.ln()).exp();
        Ok((-lower).ln_1p())
    }
}
