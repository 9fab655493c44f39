use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::events::{g_sign, Choice, Herald, Outcome, TrialRecord};
use crate::pvalues::Predictability;

/// Local deterministic response: each side's outcome depends only on its own
/// setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    /// Outcome of side 1 for α and α′.
    pub x_of: [Outcome; 2],
    /// Outcome of side 2 for β and β′.
    pub y_of: [Outcome; 2],
}

fn outcome_bit(bit: usize) -> Outcome {
    if bit == 0 {
        Outcome::Up
    } else {
        Outcome::Down
    }
}

impl DeterministicStrategy {
    /// Strategy number `index` in 0..16; bit k of the index set to one means
    /// the k-th response (x(α), x(α′), y(β), y(β′)) is −1.
    pub fn from_index(index: usize) -> Self {
        assert!(index < 16, "strategy index {index} out of range");
        DeterministicStrategy {
            x_of: [outcome_bit(index & 1), outcome_bit((index >> 1) & 1)],
            y_of: [outcome_bit((index >> 2) & 1), outcome_bit((index >> 3) & 1)],
        }
    }

    pub fn index(&self) -> usize {
        let bit = |o: Outcome| usize::from(o == Outcome::Down);
        bit(self.x_of[0]) | bit(self.x_of[1]) << 1 | bit(self.y_of[0]) << 2 | bit(self.y_of[1]) << 3
    }

    /// x = +1 everywhere, y = −1 everywhere.
    pub fn always_anticorrelate() -> Self {
        DeterministicStrategy {
            x_of: [Outcome::Up; 2],
            y_of: [Outcome::Down; 2],
        }
    }

    pub fn respond(&self, a: Choice, b: Choice) -> (Outcome, Outcome) {
        (self.x_of[a.bit() as usize], self.y_of[b.bit() as usize])
    }

    /// E[4·g·x·y] when the settings are drawn independently with
    /// P(a = α) = `p_alpha` and P(b = β) = `p_beta`.
    pub fn expected_s(&self, herald: Herald, p_alpha: f64, p_beta: f64) -> f64 {
        let mut total = 0.0;
        for a in Choice::ALL {
            let pa = if a == Choice::Unprimed { p_alpha } else { 1.0 - p_alpha };
            for b in Choice::ALL {
                let pb = if b == Choice::Unprimed { p_beta } else { 1.0 - p_beta };
                let (x, y) = self.respond(a, b);
                let f = 4 * g_sign(herald, a, b) as i32 * (x.value() * y.value()) as i32;
                total += f as f64 * pa * pb;
            }
        }
        total
    }
}

/// All 16 deterministic strategies in index order.
pub fn enumerate_strategies() -> Vec<DeterministicStrategy> {
    (0..16).map(DeterministicStrategy::from_index).collect()
}

/// Strategy maximizing the expected S for the given setting probabilities.
/// Ties go to the lowest index.
pub fn best_strategy(herald: Herald, p_alpha: f64, p_beta: f64) -> (DeterministicStrategy, f64) {
    enumerate_strategies()
        .into_iter()
        .map(|s| (s, s.expected_s(herald, p_alpha, p_beta)))
        .fold(None, |best: Option<(DeterministicStrategy, f64)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .expect("sixteen strategies")
}

/// Expected S reached by an LHV model that switches to the best deterministic
/// strategy every round, with setting probabilities anywhere in
/// [1/2 − τ, 1/2 + τ]. The expectation is bilinear in the two probabilities,
/// so the maximum sits at a corner of that square.
pub fn optimal_biased_expected_s(tau: f64) -> Result<f64> {
    let tau = Predictability::new(tau)?.tau();
    let corners = [0.5 - tau, 0.5 + tau];
    let mut best = f64::NEG_INFINITY;
    for herald in Herald::ALL {
        for &pa in &corners {
            for &pb in &corners {
                best = best.max(best_strategy(herald, pa, pb).1);
            }
        }
    }
    Ok(best)
}

/// A history-dependent LHV rule. Before each round it sees the complete
/// transcript of earlier rounds and the current herald (the herald is
/// broadcast before the settings are chosen), and commits to a local
/// deterministic strategy.
pub trait MemoryPolicy: Send + Sync + std::fmt::Debug {
    fn choose(&self, transcript: &[TrialRecord], herald: Herald) -> DeterministicStrategy;
}

/// Strategies reaching the classical maximum S = 2 under `herald` with
/// unbiased settings.
pub fn optimal_strategies(herald: Herald) -> &'static [DeterministicStrategy] {
    static POOLS: OnceLock<[Vec<DeterministicStrategy>; 2]> = OnceLock::new();
    let pools = POOLS.get_or_init(|| {
        Herald::ALL.map(|h| {
            enumerate_strategies()
                .into_iter()
                .filter(|s| (s.expected_s(h, 0.5, 0.5) - 2.0).abs() < 1e-12)
                .collect()
        })
    });
    match herald {
        Herald::PsiPlus => &pools[0],
        Herald::PsiMinus => &pools[1],
    }
}

/// Rotates through the S = 2 strategies, driven by the number of losses in
/// the last eight rounds and by the setting pair of a just-lost round.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossReactive;

impl MemoryPolicy for LossReactive {
    fn choose(&self, transcript: &[TrialRecord], herald: Herald) -> DeterministicStrategy {
        let pool = optimal_strategies(herald);
        let losses_recent = transcript
            .iter()
            .rev()
            .take(8)
            .filter(|r| !r.is_win())
            .count();
        let pick = match transcript.last() {
            Some(last) if !last.is_win() => {
                losses_recent + 2 * last.a.bit() as usize + last.b.bit() as usize
            }
            _ => losses_recent,
        };
        pool[pick % pool.len()]
    }
}

/// Conditions the strategy on the current herald and the previous round's
/// settings, trying to follow whichever setting pair recently occurred.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeraldConditioned;

impl MemoryPolicy for HeraldConditioned {
    fn choose(&self, transcript: &[TrialRecord], herald: Herald) -> DeterministicStrategy {
        let Some(last) = transcript.last() else {
            return optimal_strategies(herald)[0];
        };
        // Bet that the previous settings repeat.
        if last.herald == herald {
            leaning_strategy(herald, last.a, last.b)
        } else {
            // Alternate between two fixed optimal choices on herald changes.
            let pool = optimal_strategies(herald);
            pool[(last.index as usize) % pool.len()]
        }
    }
}

/// Best strategy for settings leaning 90/10 toward (a, b), cached.
fn leaning_strategy(herald: Herald, a: Choice, b: Choice) -> DeterministicStrategy {
    static TABLE: OnceLock<Vec<DeterministicStrategy>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(8);
        for h in Herald::ALL {
            for a in Choice::ALL {
                for b in Choice::ALL {
                    let pa = if a == Choice::Unprimed { 0.9 } else { 0.1 };
                    let pb = if b == Choice::Unprimed { 0.9 } else { 0.1 };
                    out.push(best_strategy(h, pa, pb).0);
                }
            }
        }
        out
    });
    let h = usize::from(herald == Herald::PsiMinus);
    table[h * 4 + a.bit() as usize * 2 + b.bit() as usize]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_distinct_strategies() {
        let all = enumerate_strategies();
        assert_eq!(all.len(), 16);
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 16);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.index(), i);
        }
    }

    #[test]
    fn unbiased_ceiling_is_two() {
        for h in Herald::ALL {
            let max = enumerate_strategies()
                .iter()
                .map(|s| s.expected_s(h, 0.5, 0.5))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(max, 2.0);
            assert!(!optimal_strategies(h).is_empty());
        }
    }

    #[test]
    fn anticorrelate_under_psi_plus() {
        let s = DeterministicStrategy::always_anticorrelate();
        assert_eq!(s.expected_s(Herald::PsiPlus, 0.5, 0.5), 2.0);
    }

    #[test]
    fn biased_optimum_examples() {
        assert_eq!(optimal_biased_expected_s(0.0).unwrap(), 2.0);
        let t = 6.3e-4;
        assert!((optimal_biased_expected_s(t).unwrap() - (2.0 + 8.0 * (t - t * t))).abs() < 1e-12);
        assert!((optimal_biased_expected_s(0.25).unwrap() - 3.5).abs() < 1e-12);
        assert!(optimal_biased_expected_s(0.7).is_err());
    }
}
