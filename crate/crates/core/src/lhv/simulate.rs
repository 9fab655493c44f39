use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::strategy::{best_strategy, DeterministicStrategy, MemoryPolicy};
use crate::error::{Error, Result};
use crate::events::{
    Choice, Herald, Outcome, RunDataset, RunMeta, SettingAngles, Side, TrialRecord,
};

/// How outcomes are produced from settings.
#[derive(Debug, Clone)]
pub enum OutcomeModel {
    /// One fixed local strategy every round.
    Deterministic(DeterministicStrategy),
    /// A history-dependent LHV policy.
    Memory(Arc<dyn MemoryPolicy>),
    /// The per-round best strategy for the known setting bias of the source.
    OptimalBiased,
    /// Quantum prediction with scalar visibility V.
    Quantum { visibility: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Deterministic,
    MemoryLhv,
    OptimalBiasedLhv,
    Quantum,
}

impl OutcomeModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            OutcomeModel::Deterministic(_) => ModelKind::Deterministic,
            OutcomeModel::Memory(_) => ModelKind::MemoryLhv,
            OutcomeModel::OptimalBiased => ModelKind::OptimalBiasedLhv,
            OutcomeModel::Quantum { .. } => ModelKind::Quantum,
        }
    }

    pub fn is_local(&self) -> bool {
        !matches!(self, OutcomeModel::Quantum { .. })
    }

    fn validate(&self) -> Result<()> {
        if let OutcomeModel::Quantum { visibility } = self {
            if !(0.0..=1.0).contains(visibility) {
                return Err(Error::domain(format!("visibility {visibility} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Setting generator with signed biases: P(a = α) = 1/2 + τ_a and
/// P(b = β) = 1/2 + τ_b, independently every round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SettingSource {
    pub tau_a: f64,
    pub tau_b: f64,
}

impl SettingSource {
    pub fn unbiased() -> Self {
        Self::default()
    }

    pub fn p_alpha(&self) -> f64 {
        0.5 + self.tau_a
    }

    pub fn p_beta(&self) -> f64 {
        0.5 + self.tau_b
    }

    /// τ = max(|τ_a|, |τ_b|).
    pub fn tau(&self) -> f64 {
        self.tau_a.abs().max(self.tau_b.abs())
    }

    fn validate(&self) -> Result<()> {
        for t in [self.tau_a, self.tau_b] {
            if !(-0.5..=0.5).contains(&t) {
                return Err(Error::domain(format!("setting bias {t} outside [-1/2, 1/2]")));
            }
        }
        Ok(())
    }
}

/// Heralding rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldModel {
    /// Probability of a herald per excitation attempt.
    pub p_herald: f64,
    /// Excitation attempts per second.
    pub attempt_rate: f64,
    /// Probability that a herald announces Psi+.
    pub psi_plus_fraction: f64,
}

impl Default for HeraldModel {
    fn default() -> Self {
        HeraldModel {
            p_herald: 0.7e-6,
            attempt_rate: 5.2e4,
            psi_plus_fraction: 0.5,
        }
    }
}

impl HeraldModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_herald) {
            return Err(Error::domain("p_herald outside [0, 1]"));
        }
        if !(self.attempt_rate > 0.0) {
            return Err(Error::domain("attempt rate must be positive"));
        }
        if !(0.0..=1.0).contains(&self.psi_plus_fraction) {
            return Err(Error::domain("psi_plus_fraction outside [0, 1]"));
        }
        Ok(())
    }
}

/// Heralded events per second.
pub fn expected_event_rate(herald: &HeraldModel) -> f64 {
    herald.p_herald * herald.attempt_rate
}

/// E(a, b) for the heralded state: −V·cos(a − b) for Psi-, −V·cos(a + b)
/// for Psi+. Angles in degrees.
pub fn quantum_correlator(herald: Herald, a_deg: f64, b_deg: f64, visibility: f64) -> f64 {
    let arg = match herald {
        Herald::PsiMinus => a_deg - b_deg,
        Herald::PsiPlus => a_deg + b_deg,
    };
    (-visibility * arg.to_radians().cos()).clamp(-1.0, 1.0)
}

/// A configured source of simulated runs.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: OutcomeModel,
    source: SettingSource,
    psi_plus_fraction: f64,
    angles: SettingAngles,
    biased_best: [DeterministicStrategy; 2],
}

impl Simulator {
    pub fn new(model: OutcomeModel, source: SettingSource, psi_plus_fraction: f64) -> Result<Self> {
        model.validate()?;
        source.validate()?;
        if !(0.0..=1.0).contains(&psi_plus_fraction) {
            return Err(Error::domain("herald mix outside [0, 1]"));
        }
        let biased_best = Herald::ALL.map(|h| best_strategy(h, source.p_alpha(), source.p_beta()).0);
        Ok(Simulator {
            model,
            source,
            psi_plus_fraction,
            angles: SettingAngles::default(),
            biased_best,
        })
    }

    pub fn with_angles(mut self, angles: SettingAngles) -> Self {
        self.angles = angles;
        self
    }

    pub fn model(&self) -> &OutcomeModel {
        &self.model
    }

    pub fn source(&self) -> &SettingSource {
        &self.source
    }

    /// Generator for run `stream` under `seed`. Every (seed, stream) pair is
    /// an independent ChaCha stream, so parallel trials do not depend on
    /// scheduling.
    pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    /// Fill `out` with `n_events` records drawn from `rng`.
    pub fn run_into<R: Rng>(&self, rng: &mut R, n_events: usize, out: &mut Vec<TrialRecord>) {
        out.clear();
        out.reserve(n_events);
        for i in 0..n_events {
            let herald = if rng.random_bool(self.psi_plus_fraction) {
                Herald::PsiPlus
            } else {
                Herald::PsiMinus
            };
            // A local model commits before the settings are drawn.
            let committed = match &self.model {
                OutcomeModel::Deterministic(s) => Some(*s),
                OutcomeModel::Memory(policy) => Some(policy.choose(out, herald)),
                OutcomeModel::OptimalBiased => Some(self.biased_best[herald_slot(herald)]),
                OutcomeModel::Quantum { .. } => None,
            };
            let a = draw_choice(rng, self.source.p_alpha());
            let b = draw_choice(rng, self.source.p_beta());
            let (x, y) = match (committed, &self.model) {
                (Some(s), _) => s.respond(a, b),
                (None, OutcomeModel::Quantum { visibility }) => {
                    let e = quantum_correlator(
                        herald,
                        self.angles.setting(Side::One, a).angle_deg,
                        self.angles.setting(Side::Two, b).angle_deg,
                        *visibility,
                    );
                    let x = if rng.random_bool(0.5) { Outcome::Up } else { Outcome::Down };
                    let same = rng.random_bool((1.0 + e) / 2.0);
                    (x, if same { x } else { x.flipped() })
                }
                (None, _) => unreachable!("only the quantum model is non-local"),
            };
            out.push(TrialRecord {
                index: i as u64 + 1,
                herald,
                a,
                b,
                x,
                y,
                timestamp_ns: None,
            });
        }
    }

    pub fn run(&self, n_events: usize, seed: u64, stream: u64) -> Result<RunDataset> {
        if n_events < 1 {
            return Err(Error::domain("n_events must be at least 1"));
        }
        let mut rng = Self::rng(seed, stream);
        let mut records = Vec::new();
        self.run_into(&mut rng, n_events, &mut records);
        let meta = RunMeta {
            label: format!("simulated {:?} seed={seed} stream={stream}", self.model.kind()),
            angles: self.angles,
            tau: self.source.tau(),
        };
        Ok(RunDataset::new(meta, records))
    }
}

fn herald_slot(h: Herald) -> usize {
    usize::from(h == Herald::PsiMinus)
}

fn draw_choice<R: Rng>(rng: &mut R, p_unprimed: f64) -> Choice {
    if rng.random_bool(p_unprimed) {
        Choice::Unprimed
    } else {
        Choice::Primed
    }
}

/// One reproducible simulated run.
pub fn simulate_run(
    model: OutcomeModel,
    source: SettingSource,
    psi_plus_fraction: f64,
    n_events: usize,
    seed: u64,
) -> Result<RunDataset> {
    Simulator::new(model, source, psi_plus_fraction)?.run(n_events, seed, 0)
}
