//! Event-ready CHSH trial records, correlation tables and S-parameter
//! estimators.
//!
//! A trial is one heralded round: the herald tag identifies which Bell state
//! was prepared, each side picks one of two analyzer settings, and each side
//! reports a ±1 outcome. Every record carries a herald, so there are no
//! undetected trials to account for.

mod estimators;
pub mod format;

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use estimators::{
    combine_states, s_combined_event_based, s_event_based, s_event_based_from_wins,
    s_per_state, s_per_state_with, wins, ErrorModel, SEstimate, SMethod, WinCount,
};

/// Heralded Bell state. `Psi+` is tagged `h = +1`, `Psi-` is `h = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Herald {
    PsiPlus,
    PsiMinus,
}

impl Herald {
    pub const ALL: [Herald; 2] = [Herald::PsiPlus, Herald::PsiMinus];

    pub fn tag(self) -> i8 {
        match self {
            Herald::PsiPlus => 1,
            Herald::PsiMinus => -1,
        }
    }

    pub fn from_tag(tag: i64) -> Option<Self> {
        match tag {
            1 => Some(Herald::PsiPlus),
            -1 => Some(Herald::PsiMinus),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Herald::PsiPlus => 0,
            Herald::PsiMinus => 1,
        }
    }
}

impl fmt::Display for Herald {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Herald::PsiPlus => write!(f, "Psi+"),
            Herald::PsiMinus => write!(f, "Psi-"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

/// Which of the two analyzer settings a side used. `Unprimed` is α (side 1)
/// or β (side 2); `Primed` is α′ or β′. Encoded as bit 0 / 1 in event files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    Unprimed,
    Primed,
}

impl Choice {
    pub const ALL: [Choice; 2] = [Choice::Unprimed, Choice::Primed];

    pub fn bit(self) -> u8 {
        match self {
            Choice::Unprimed => 0,
            Choice::Primed => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Choice::Unprimed),
            1 => Some(Choice::Primed),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self.bit() as usize
    }
}

/// Analyzer angles in spin space, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingAngles {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl Default for SettingAngles {
    fn default() -> Self {
        SettingAngles {
            alpha: 0.0,
            alpha_prime: 90.0,
            beta: -45.0,
            beta_prime: 45.0,
        }
    }
}

impl SettingAngles {
    pub fn setting(&self, side: Side, choice: Choice) -> Setting {
        let angle_deg = match (side, choice) {
            (Side::One, Choice::Unprimed) => self.alpha,
            (Side::One, Choice::Primed) => self.alpha_prime,
            (Side::Two, Choice::Unprimed) => self.beta,
            (Side::Two, Choice::Primed) => self.beta_prime,
        };
        Setting {
            side,
            choice,
            angle_deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub side: Side,
    pub choice: Choice,
    pub angle_deg: f64,
}

/// Measurement outcome. `Up` is +1, `Down` is −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Up => 1,
            Outcome::Down => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Outcome::Up),
            -1 => Some(Outcome::Down),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Up => Outcome::Down,
            Outcome::Down => Outcome::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based ordinal within the run.
    pub index: u64,
    pub herald: Herald,
    pub a: Choice,
    pub b: Choice,
    pub x: Outcome,
    pub y: Outcome,
    pub timestamp_ns: Option<u64>,
}

impl TrialRecord {
    /// Product x·y of the two outcomes.
    pub fn product(&self) -> i8 {
        self.x.value() * self.y.value()
    }

    /// The round is won when x·y equals the sign the herald requires.
    pub fn is_win(&self) -> bool {
        self.product() == g_sign(self.herald, self.a, self.b)
    }
}

/// Run metadata carried next to the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub label: String,
    pub angles: SettingAngles,
    /// Setting predictability assumed for P-value bounds.
    pub tau: f64,
}

impl Default for RunMeta {
    fn default() -> Self {
        RunMeta {
            label: String::new(),
            angles: SettingAngles::default(),
            tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunDataset {
    pub meta: RunMeta,
    pub records: Vec<TrialRecord>,
}

impl RunDataset {
    pub fn new(meta: RunMeta, records: Vec<TrialRecord>) -> Self {
        RunDataset { meta, records }
    }

    pub fn from_records(records: Vec<TrialRecord>) -> Self {
        RunDataset {
            meta: RunMeta::default(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn table(&self) -> CorrelationTable {
        CorrelationTable::from_records(&self.records)
    }

    /// Records heralded with `herald`, in original order.
    pub fn filter_herald(&self, herald: Herald) -> RunDataset {
        RunDataset {
            meta: self.meta.clone(),
            records: self
                .records
                .iter()
                .filter(|r| r.herald == herald)
                .copied()
                .collect(),
        }
    }
}

/// CHSH sign function g^±(a, b).
///
/// Under Psi+ only (α′, β′) requires correlation; under Psi- only (α′, β)
/// does. Every other setting pair requires anticorrelation.
pub fn g_sign(herald: Herald, a: Choice, b: Choice) -> i8 {
    match (herald, a, b) {
        (Herald::PsiPlus, Choice::Primed, Choice::Primed) => 1,
        (Herald::PsiMinus, Choice::Primed, Choice::Unprimed) => 1,
        _ => -1,
    }
}

/// Outcome counts for one (a, b, herald) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub up_up: u64,
    pub up_down: u64,
    pub down_up: u64,
    pub down_down: u64,
}

impl CellCounts {
    pub fn new(up_up: u64, up_down: u64, down_up: u64, down_down: u64) -> Self {
        CellCounts {
            up_up,
            up_down,
            down_up,
            down_down,
        }
    }

    pub fn total(&self) -> u64 {
        self.up_up + self.up_down + self.down_up + self.down_down
    }

    pub fn correlated(&self) -> u64 {
        self.up_up + self.down_down
    }

    pub fn anticorrelated(&self) -> u64 {
        self.up_down + self.down_up
    }

    pub fn record(&mut self, x: Outcome, y: Outcome) {
        match (x, y) {
            (Outcome::Up, Outcome::Up) => self.up_up += 1,
            (Outcome::Up, Outcome::Down) => self.up_down += 1,
            (Outcome::Down, Outcome::Up) => self.down_up += 1,
            (Outcome::Down, Outcome::Down) => self.down_down += 1,
        }
    }

    pub fn count(&self, x: Outcome, y: Outcome) -> u64 {
        match (x, y) {
            (Outcome::Up, Outcome::Up) => self.up_up,
            (Outcome::Up, Outcome::Down) => self.up_down,
            (Outcome::Down, Outcome::Up) => self.down_up,
            (Outcome::Down, Outcome::Down) => self.down_down,
        }
    }

    /// Correlator ⟨σ_a σ_b⟩ with its binomial standard deviation.
    pub fn correlator(&self) -> Result<Correlator> {
        let n = self.total();
        if n == 0 {
            return Err(Error::Degenerate("no events for setting pair".into()));
        }
        let diff = self.correlated() as i128 - self.anticorrelated() as i128;
        let e = diff as f64 / n as f64;
        let sigma = ((1.0 - e * e).max(0.0) / n as f64).sqrt();
        Ok(Correlator { e, sigma, n })
    }
}

impl Add for CellCounts {
    type Output = CellCounts;

    fn add(self, rhs: CellCounts) -> CellCounts {
        CellCounts {
            up_up: self.up_up + rhs.up_up,
            up_down: self.up_down + rhs.up_down,
            down_up: self.down_up + rhs.down_up,
            down_down: self.down_down + rhs.down_down,
        }
    }
}

impl AddAssign for CellCounts {
    fn add_assign(&mut self, rhs: CellCounts) {
        *self = *self + rhs;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlator {
    pub e: f64,
    pub sigma: f64,
    pub n: u64,
}

/// Free-standing form of [`CellCounts::correlator`].
pub fn correlator(cell: &CellCounts) -> Result<Correlator> {
    cell.correlator()
}

/// Per-(herald, a, b) outcome counts. Counts are additive, so tables built
/// from disjoint shards of a run can be merged with `+`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationTable {
    cells: [[[CellCounts; 2]; 2]; 2],
}

impl CorrelationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut table = CorrelationTable::new();
        for r in records {
            table.record(r);
        }
        table
    }

    pub fn record(&mut self, r: &TrialRecord) {
        self.cell_mut(r.herald, r.a, r.b).record(r.x, r.y);
    }

    pub fn cell(&self, herald: Herald, a: Choice, b: Choice) -> &CellCounts {
        &self.cells[herald.index()][a.index()][b.index()]
    }

    pub fn cell_mut(&mut self, herald: Herald, a: Choice, b: Choice) -> &mut CellCounts {
        &mut self.cells[herald.index()][a.index()][b.index()]
    }

    pub fn set_cell(&mut self, herald: Herald, a: Choice, b: Choice, counts: CellCounts) {
        *self.cell_mut(herald, a, b) = counts;
    }

    /// Cells in table order: herald, then (α,β), (α,β′), (α′,β), (α′,β′).
    pub fn iter(&self) -> impl Iterator<Item = (Herald, Choice, Choice, &CellCounts)> + '_ {
        Herald::ALL.into_iter().flat_map(move |h| {
            Choice::ALL.into_iter().flat_map(move |a| {
                Choice::ALL
                    .into_iter()
                    .map(move |b| (h, a, b, self.cell(h, a, b)))
            })
        })
    }

    pub fn total(&self) -> u64 {
        self.iter().map(|(_, _, _, c)| c.total()).sum()
    }

    pub fn herald_total(&self, herald: Herald) -> u64 {
        self.iter()
            .filter(|(h, _, _, _)| *h == herald)
            .map(|(_, _, _, c)| c.total())
            .sum()
    }

    /// Counts for a setting pair pooled over both heralds.
    pub fn pair_total(&self, a: Choice, b: Choice) -> u64 {
        Herald::ALL
            .iter()
            .map(|&h| self.cell(h, a, b).total())
            .sum()
    }

    /// Win count derived from the cell counts: correlated outcomes in the
    /// cells where g = +1, anticorrelated outcomes elsewhere.
    pub fn wins(&self) -> WinCount {
        let mut w = WinCount::default();
        for (h, a, b, c) in self.iter() {
            w.wins += if g_sign(h, a, b) == 1 {
                c.correlated()
            } else {
                c.anticorrelated()
            };
            w.n += c.total();
        }
        w
    }

    pub fn herald_wins(&self, herald: Herald) -> WinCount {
        let mut w = WinCount::default();
        for (h, a, b, c) in self.iter().filter(|(h, _, _, _)| *h == herald) {
            w.wins += if g_sign(h, a, b) == 1 {
                c.correlated()
            } else {
                c.anticorrelated()
            };
            w.n += c.total();
        }
        w
    }
}

impl Add for CorrelationTable {
    type Output = CorrelationTable;

    fn add(mut self, rhs: CorrelationTable) -> CorrelationTable {
        self += rhs;
        self
    }
}

impl AddAssign for CorrelationTable {
    fn add_assign(&mut self, rhs: CorrelationTable) {
        for h in Herald::ALL {
            for a in Choice::ALL {
                for b in Choice::ALL {
                    *self.cell_mut(h, a, b) += *rhs.cell(h, a, b);
                }
            }
        }
    }
}

pub(crate) fn pair_label(a: Choice, b: Choice) -> &'static str {
    match (a, b) {
        (Choice::Unprimed, Choice::Unprimed) => "(alpha, beta)",
        (Choice::Unprimed, Choice::Primed) => "(alpha, beta')",
        (Choice::Primed, Choice::Unprimed) => "(alpha', beta)",
        (Choice::Primed, Choice::Primed) => "(alpha', beta')",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(h: Herald, a: Choice, b: Choice, x: Outcome, y: Outcome) -> TrialRecord {
        TrialRecord {
            index: 1,
            herald: h,
            a,
            b,
            x,
            y,
            timestamp_ns: None,
        }
    }

    #[test]
    fn g_sign_pattern() {
        use Choice::*;
        assert_eq!(g_sign(Herald::PsiPlus, Primed, Primed), 1);
        assert_eq!(g_sign(Herald::PsiMinus, Primed, Unprimed), 1);
        assert_eq!(g_sign(Herald::PsiPlus, Unprimed, Unprimed), -1);
        let plus: i32 = Choice::ALL
            .iter()
            .flat_map(|&a| Choice::ALL.iter().map(move |&b| (a, b)))
            .map(|(a, b)| g_sign(Herald::PsiPlus, a, b) as i32)
            .sum();
        assert_eq!(plus, -2);
    }

    #[test]
    fn correlator_table_value() {
        let c = CellCounts::new(154, 483, 471, 135).correlator().unwrap();
        assert_eq!(c.n, 1243);
        assert!((c.e - (-0.535)).abs() < 5e-4);
        assert!((c.sigma - 0.024).abs() < 5e-4);
    }

    #[test]
    fn correlator_edges() {
        let c = CellCounts::new(7, 0, 0, 7).correlator().unwrap();
        assert_eq!(c.e, 1.0);
        assert_eq!(c.sigma, 0.0);
        let c = CellCounts::new(10, 10, 10, 10).correlator().unwrap();
        assert_eq!(c.e, 0.0);
        assert!((c.sigma - 1.0 / 40f64.sqrt()).abs() < 1e-15);
        let err = CellCounts::default().correlator().unwrap_err();
        assert!(err.to_string().contains("no events for setting pair"));
    }

    #[test]
    fn table_accumulates_and_merges() {
        use Choice::*;
        let recs = [
            rec(Herald::PsiPlus, Primed, Primed, Outcome::Up, Outcome::Up),
            rec(Herald::PsiMinus, Unprimed, Primed, Outcome::Up, Outcome::Down),
            rec(Herald::PsiMinus, Unprimed, Primed, Outcome::Down, Outcome::Down),
        ];
        let t = CorrelationTable::from_records(&recs);
        assert_eq!(t.total(), 3);
        assert_eq!(t.cell(Herald::PsiMinus, Unprimed, Primed).total(), 2);
        let merged = CorrelationTable::from_records(&recs[..1])
            + CorrelationTable::from_records(&recs[1..]);
        assert_eq!(merged, t);
        // (α′,β′) under Psi+ correlated → win; (α,β′) under Psi- needs anti.
        assert_eq!(t.wins(), WinCount { wins: 2, n: 3 });
    }
}
