//! Published coincidence counts of the reference runs and their expansion
//! into event streams.
//!
//! Each run lists, per herald, the counts (↑↑, ↑↓, ↓↑, ↓↓) for the setting
//! pairs (α, β), (α, β′), (α′, β), (α′, β′) in that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{
    CellCounts, Choice, CorrelationTable, Herald, Outcome, RunDataset, RunMeta, SettingAngles,
    TrialRecord,
};

/// Setting predictability of the reference runs.
pub const REFERENCE_TAU: f64 = 6.3e-4;

type Cells = [[u64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedRun {
    /// Short identifier, also used for fixture file names.
    pub id: &'static str,
    pub label: &'static str,
    pub psi_plus: Cells,
    pub psi_minus: Cells,
}

const PAIRS: [(Choice, Choice); 4] = [
    (Choice::Unprimed, Choice::Unprimed),
    (Choice::Unprimed, Choice::Primed),
    (Choice::Primed, Choice::Unprimed),
    (Choice::Primed, Choice::Primed),
];

const OUTCOMES: [(Outcome, Outcome); 4] = [
    (Outcome::Up, Outcome::Up),
    (Outcome::Up, Outcome::Down),
    (Outcome::Down, Outcome::Up),
    (Outcome::Down, Outcome::Down),
];

pub const NOV_27_2015: PublishedRun = PublishedRun {
    id: "2015-11-27",
    label: "Nov 27 2015",
    psi_plus: [[4, 16, 21, 4], [4, 12, 13, 4], [3, 24, 11, 2], [10, 4, 8, 10]],
    psi_minus: [[4, 11, 17, 2], [4, 16, 13, 3], [22, 4, 2, 10], [4, 19, 16, 3]],
};

pub const APR_07_2016: PublishedRun = PublishedRun {
    id: "2016-04-07",
    label: "Apr 7 2016",
    psi_plus: [[60, 182, 164, 47], [50, 182, 196, 47], [51, 168, 182, 29], [195, 60, 62, 159]],
    psi_minus: [[62, 192, 175, 73], [31, 189, 184, 29], [213, 38, 44, 187], [77, 166, 165, 52]],
};

pub const APR_15_2016: PublishedRun = PublishedRun {
    id: "2016-04-15",
    label: "Apr 15 2016",
    psi_plus: [[154, 483, 471, 135], [135, 471, 507, 107], [134, 499, 513, 117], [489, 160, 182, 443]],
    psi_minus: [[168, 443, 536, 149], [122, 492, 510, 117], [535, 115, 128, 461], [172, 439, 483, 130]],
};

pub const JUN_14_2016: PublishedRun = PublishedRun {
    id: "2016-06-14",
    label: "Jun 14 2016",
    psi_plus: [[118, 483, 510, 146], [144, 482, 450, 185], [161, 441, 427, 173], [506, 158, 127, 489]],
    psi_minus: [[133, 533, 537, 105], [162, 466, 410, 207], [431, 159, 160, 454], [104, 523, 484, 132]],
};

/// Every run from November 2015 to June 2016 pooled.
pub const ALL_RUNS: PublishedRun = PublishedRun {
    id: "all-runs",
    label: "all runs combined",
    psi_plus: [[778, 2621, 2770, 804], [809, 2629, 2708, 816], [873, 2686, 2644, 730], [2696, 966, 902, 2453]],
    psi_minus: [[817, 2596, 2873, 742], [696, 2570, 2788, 772], [2783, 787, 840, 2503], [865, 2620, 2640, 791]],
};

pub const PUBLISHED_RUNS: [PublishedRun; 5] =
    [NOV_27_2015, APR_07_2016, APR_15_2016, JUN_14_2016, ALL_RUNS];

pub fn find_run(id: &str) -> Result<PublishedRun> {
    PUBLISHED_RUNS
        .iter()
        .find(|r| r.id == id)
        .copied()
        .ok_or_else(|| {
            let known: Vec<_> = PUBLISHED_RUNS.iter().map(|r| r.id).collect();
            Error::Validation(format!("unknown run {id:?}; known runs: {}", known.join(", ")))
        })
}

impl PublishedRun {
    pub fn cells(&self, herald: Herald) -> &Cells {
        match herald {
            Herald::PsiPlus => &self.psi_plus,
            Herald::PsiMinus => &self.psi_minus,
        }
    }

    pub fn table(&self) -> CorrelationTable {
        let mut t = CorrelationTable::new();
        for h in Herald::ALL {
            for (&(a, b), c) in PAIRS.iter().zip(self.cells(h)) {
                t.set_cell(h, a, b, CellCounts::new(c[0], c[1], c[2], c[3]));
            }
        }
        t
    }

    pub fn total(&self) -> u64 {
        self.psi_plus.iter().chain(&self.psi_minus).flatten().sum()
    }

    pub fn meta(&self) -> RunMeta {
        RunMeta {
            label: self.label.to_string(),
            angles: SettingAngles::default(),
            tau: REFERENCE_TAU,
        }
    }

    /// An event stream with exactly these counts. Within a herald, records
    /// follow the table order (setting pair, then outcome pair); the two
    /// heralds alternate until one is exhausted.
    pub fn dataset(&self) -> RunDataset {
        let expand = |h: Herald| -> Vec<(Herald, Choice, Choice, Outcome, Outcome)> {
            let mut out = Vec::new();
            for (&(a, b), cell) in PAIRS.iter().zip(self.cells(h)) {
                for (&(x, y), &n) in OUTCOMES.iter().zip(cell) {
                    out.extend(std::iter::repeat_n((h, a, b, x, y), n as usize));
                }
            }
            out
        };
        let (plus, minus) = (expand(Herald::PsiPlus), expand(Herald::PsiMinus));
        let mut records = Vec::with_capacity(plus.len() + minus.len());
        let (mut p, mut m) = (plus.into_iter(), minus.into_iter());
        loop {
            let (np, nm) = (p.next(), m.next());
            if np.is_none() && nm.is_none() {
                break;
            }
            for (herald, a, b, x, y) in np.into_iter().chain(nm) {
                records.push(TrialRecord {
                    index: records.len() as u64 + 1,
                    herald,
                    a,
                    b,
                    x,
                    y,
                    timestamp_ns: None,
                });
            }
        }
        RunDataset::new(self.meta(), records)
    }
}
