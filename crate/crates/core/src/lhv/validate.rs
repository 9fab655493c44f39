//! Monte-Carlo check that the P-value bounds are sound: under any local model
//! the fraction of runs with P ≤ κ must not exceed κ beyond sampling noise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simulate::Simulator;
use crate::error::{Error, Result};
use crate::events::{s_event_based_from_wins, TrialRecord, WinCount};
use crate::pvalues::{pvalue_game, pvalue_martingale, Predictability};

pub const MIN_TRIALS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    /// Runs with P ≤ κ.
    pub hits: u64,
    pub frequency: f64,
    /// Wilson score interval for the exceedance probability at z = 3.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceReport {
    pub trials: u64,
    pub n_events: usize,
    pub kappa: f64,
    pub tau: f64,
    /// Binomial standard deviation of the hit frequency if it were exactly κ.
    pub sigma_at_kappa: f64,
    pub martingale: Exceedance,
    pub game: Exceedance,
    /// Mean event-based S over all runs.
    pub mean_s: f64,
}

impl ExceedanceReport {
    /// Largest frequency compatible with a sound bound: κ + 3σ.
    pub fn threshold(&self) -> f64 {
        self.kappa + 3.0 * self.sigma_at_kappa
    }

    pub fn martingale_sound(&self) -> bool {
        self.martingale.frequency <= self.threshold()
    }

    pub fn game_sound(&self) -> bool {
        self.game.frequency <= self.threshold()
    }
}

fn wilson(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn exceedance(hits: u64, trials: u64) -> Exceedance {
    let (ci_low, ci_high) = wilson(hits, trials, 3.0);
    Exceedance {
        hits,
        frequency: hits as f64 / trials as f64,
        ci_low,
        ci_high,
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    martingale: u64,
    game: u64,
    wins: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            martingale: self.martingale + o.martingale,
            game: self.game + o.game,
            wins: self.wins + o.wins,
        }
    }
}

/// Simulate `trials` independent runs of `n_events` and count how often each
/// bound falls at or below `kappa`. Bounds use the source's τ. Trial `k` draws
/// from stream `k` of `seed`.
pub fn validate_bound(
    sim: &Simulator,
    n_events: usize,
    trials: u64,
    kappa: f64,
    seed: u64,
) -> Result<ExceedanceReport> {
    if trials < MIN_TRIALS {
        return Err(Error::domain(format!("need at least {MIN_TRIALS} trials")));
    }
    if n_events < 1 {
        return Err(Error::domain("n_events must be at least 1"));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::domain("kappa outside (0, 1)"));
    }
    let tau = Predictability::new(sim.source().tau())?;

    let tally = (0..trials)
        .into_par_iter()
        .map_init(
            || Vec::<TrialRecord>::with_capacity(n_events),
            |buf, k| -> Result<Tally> {
                let mut rng = Simulator::rng(seed, k);
                sim.run_into(&mut rng, n_events, buf);
                let wins = buf.iter().filter(|r| r.is_win()).count() as u64;
                let w = WinCount {
                    wins,
                    n: n_events as u64,
                };
                let s = s_event_based_from_wins(w)?.value;
                let pm = pvalue_martingale(s, w.n, tau)?;
                let pg = pvalue_game(w.wins, w.n, tau)?;
                Ok(Tally {
                    martingale: u64::from(pm.p_bound <= kappa),
                    game: u64::from(pg.p_bound <= kappa),
                    wins,
                })
            },
        )
        .try_reduce(Tally::default, |a, b| Ok(a + b))?;

    Ok(ExceedanceReport {
        trials,
        n_events,
        kappa,
        tau: tau.tau(),
        sigma_at_kappa: (kappa * (1.0 - kappa) / trials as f64).sqrt(),
        martingale: exceedance(tally.martingale, trials),
        game: exceedance(tally.game, trials),
        mean_s: 8.0 * tally.wins as f64 / (trials as f64 * n_events as f64) - 4.0,
    })
}
