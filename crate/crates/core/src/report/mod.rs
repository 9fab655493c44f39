//! Run manifests and the full certification report.

mod render;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use render::{parse_json, render, ReportFormat};

use crate::error::{Error, ErrorKind, Result};
use crate::events::format::{read_events_path, EventFormat};
use crate::events::{
    combine_states, s_combined_event_based, s_event_based_from_wins, s_per_state,
    s_per_state_with, CellCounts, Choice, Correlator, ErrorModel, Herald, RunDataset, RunMeta,
    SEstimate, SettingAngles, Side, WinCount,
};
use crate::nosignaling::{analyze_nosignaling, NoSignalingReport};
use crate::pvalues::{pvalue_game, pvalue_martingale, PValueReport, Predictability};
use crate::qrng::{predictability_budget, BudgetResult, PredictabilityBudget};
use crate::spacetime::{SpacetimeConfig, SpacetimeReport};

pub const DEFAULT_PRECISION: usize = 3;
pub const MAX_PRECISION: usize = 12;

fn default_tau() -> f64 {
    crate::fixtures::REFERENCE_TAU
}

fn default_precision() -> usize {
    DEFAULT_PRECISION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Decimals for S, correlators and their uncertainties in text output.
    #[serde(default = "default_precision")]
    pub precision: usize,
    #[serde(default)]
    pub formats: Vec<ReportFormat>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            precision: DEFAULT_PRECISION,
            formats: Vec::new(),
        }
    }
}

/// Everything fixed before a run is analyzed: the data file, the assumed
/// setting predictability, the analyzer angles and the report layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub id: String,
    #[serde(default)]
    pub label: String,
    /// Event file, relative to the manifest's directory.
    pub events: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<EventFormat>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Number of events fixed in advance; a file of any other length is
    /// rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_events: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default)]
    pub angles: SettingAngles,
    #[serde(default)]
    pub report: ReportOptions,
    /// Optional spacetime configuration, relative to the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacetime: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qrng_budget: Option<PredictabilityBudget>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunManifest {
    pub fn new(id: impl Into<String>, events: impl Into<PathBuf>) -> Self {
        RunManifest {
            id: id.into(),
            label: String::new(),
            events: events.into(),
            format: None,
            tau: default_tau(),
            expected_events: None,
            note: None,
            angles: SettingAngles::default(),
            report: ReportOptions::default(),
            spacetime: None,
            qrng_budget: None,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: RunManifest =
            toml::from_str(text).map_err(|e| Error::Validation(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut m = Self::from_toml(&fs::read_to_string(path)?)?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Validation(format!("manifest: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        Predictability::new(self.tau).map_err(|_| {
            Error::Validation(format!("tau {} outside [0, 1/2]", self.tau))
        })?;
        if self.id.trim().is_empty() {
            return Err(Error::Validation("manifest id is empty".into()));
        }
        if self.report.precision > MAX_PRECISION {
            return Err(Error::Validation(format!(
                "precision {} exceeds {MAX_PRECISION}",
                self.report.precision
            )));
        }
        Ok(())
    }

    pub fn events_path(&self) -> PathBuf {
        self.base_dir.join(&self.events)
    }

    pub fn spacetime_path(&self) -> Option<PathBuf> {
        self.spacetime.as_ref().map(|p| self.base_dir.join(p))
    }
}

/// Read and validate an event file. An empty file is an error.
pub fn ingest(path: &Path, format: Option<EventFormat>) -> Result<RunDataset> {
    let records = read_events_path(path, format)?;
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(RunDataset::from_records(records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorRow {
    pub a: Choice,
    pub b: Choice,
    pub a_deg: f64,
    pub b_deg: f64,
    pub counts: CellCounts,
    pub correlator: Correlator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub herald: Herald,
    pub n: u64,
    pub rows: Vec<CorrelatorRow>,
    /// Sum of signed correlators.
    pub s: SEstimate,
    pub wins: WinCount,
    /// 8W/N − 4, the input of the martingale bound.
    pub s_from_wins: SEstimate,
    pub p_martingale: PValueReport,
    pub p_game: PValueReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedReport {
    pub weighted_mean: SEstimate,
    /// Correlators of both states pooled per setting pair.
    pub event_based: SEstimate,
    pub wins: WinCount,
    pub s_from_wins: SEstimate,
    pub p_martingale: PValueReport,
    pub p_game: PValueReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub id: String,
    pub label: String,
    pub n_events: u64,
    pub tau: f64,
    pub angles: SettingAngles,
    pub states: Vec<StateReport>,
    pub combined: CombinedReport,
    pub nosignaling: Option<NoSignalingReport>,
    pub qrng: Option<BudgetResult>,
    pub spacetime: Option<SpacetimeReport>,
    pub notes: Vec<String>,
}

fn state_report(ds: &RunDataset, herald: Herald, tau: Predictability) -> Result<StateReport> {
    let table = ds.table();
    let angles = ds.meta.angles;
    let mut rows = Vec::with_capacity(4);
    for a in Choice::ALL {
        for b in Choice::ALL {
            let counts = *table.cell(herald, a, b);
            let correlator = counts.correlator().map_err(|_| Error::EmptyCell {
                pair: format!("({a:?}, {b:?})"),
                herald: herald.to_string(),
            })?;
            rows.push(CorrelatorRow {
                a,
                b,
                a_deg: angles.setting(Side::One, a).angle_deg,
                b_deg: angles.setting(Side::Two, b).angle_deg,
                counts,
                correlator,
            });
        }
    }
    let wins = table.herald_wins(herald);
    let s_from_wins = s_event_based_from_wins(wins)?;
    Ok(StateReport {
        herald,
        n: wins.n,
        rows,
        s: s_per_state(&table, herald)?,
        wins,
        s_from_wins,
        p_martingale: pvalue_martingale(s_from_wins.value, wins.n, tau)?,
        p_game: pvalue_game(wins.wins, wins.n, tau)?,
    })
}

/// The S estimates, win counts, P-value bounds and no-signaling tests of a
/// dataset.
pub fn certify(ds: &RunDataset, tau: Predictability) -> Result<CertificationReport> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let table = ds.table();
    let states = Herald::ALL
        .iter()
        .map(|&h| state_report(ds, h, tau))
        .collect::<Result<Vec<_>>>()?;
    // Inverse-variance weights from the binomial per-state uncertainties.
    let weighted_mean = combine_states(
        &s_per_state_with(&table, Herald::PsiPlus, ErrorModel::Binomial)?,
        &s_per_state_with(&table, Herald::PsiMinus, ErrorModel::Binomial)?,
    )?;
    let wins = table.wins();
    let s_from_wins = s_event_based_from_wins(wins)?;
    let combined = CombinedReport {
        weighted_mean,
        event_based: s_combined_event_based(&table)?,
        wins,
        s_from_wins,
        p_martingale: pvalue_martingale(s_from_wins.value, wins.n, tau)?,
        p_game: pvalue_game(wins.wins, wins.n, tau)?,
    };
    let mut notes = Vec::new();
    let nosignaling = match analyze_nosignaling(ds) {
        Ok(r) => Some(r),
        Err(e) if e.kind() == ErrorKind::Computation => {
            notes.push(format!("no-signaling tests skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(CertificationReport {
        id: String::new(),
        label: ds.meta.label.clone(),
        n_events: ds.len() as u64,
        tau: tau.tau(),
        angles: ds.meta.angles,
        states,
        combined,
        nosignaling,
        qrng: None,
        spacetime: None,
        notes,
    })
}

/// Ingest the manifest's event file and build its report.
pub fn analyze(manifest: &RunManifest) -> Result<CertificationReport> {
    manifest.validate()?;
    let path = manifest.events_path();
    if !path.exists() {
        return Err(Error::Validation(format!("event file {} does not exist", path.display())));
    }
    let mut ds = ingest(&path, manifest.format)?;
    if let Some(n) = manifest.expected_events {
        if ds.len() as u64 != n {
            return Err(Error::Validation(format!(
                "manifest fixes {n} events, file has {}",
                ds.len()
            )));
        }
    }
    ds.meta = RunMeta {
        label: manifest.label.clone(),
        angles: manifest.angles,
        tau: manifest.tau,
    };
    let mut report = certify(&ds, Predictability::new(manifest.tau)?)?;
    report.id = manifest.id.clone();
    if let Some(note) = &manifest.note {
        report.notes.insert(0, note.clone());
    }
    if let Some(budget) = &manifest.qrng_budget {
        report.qrng = Some(predictability_budget(budget)?);
    }
    if let Some(path) = manifest.spacetime_path() {
        report.spacetime = Some(SpacetimeConfig::read(&path)?.check()?);
    }
    Ok(report)
}
