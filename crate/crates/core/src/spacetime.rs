//! Spacelike-separation checks from distances and measured latency chains.
//!
//! Times are held as integer multiples of 0.1 ns so that margins add and
//! compare exactly. Uncertainties compose linearly, in the worst-case
//! direction.

use std::fmt;
use std::fs;
use std::ops::{Add, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A time in units of 0.1 ns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tenths(pub i64);

impl Tenths {
    pub const ZERO: Tenths = Tenths(0);

    /// Nearest 0.1 ns.
    pub fn from_ns(ns: f64) -> Self {
        Tenths((ns * 10.0).round() as i64)
    }

    pub fn ns(self) -> f64 {
        self.0 as f64 / 10.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{} ns", a / 10, a % 10)
    }
}

impl Add for Tenths {
    type Output = Tenths;
    fn add(self, o: Tenths) -> Tenths {
        Tenths(self.0 + o.0)
    }
}

impl Sub for Tenths {
    type Output = Tenths;
    fn sub(self, o: Tenths) -> Tenths {
        Tenths(self.0 - o.0)
    }
}

impl Neg for Tenths {
    type Output = Tenths;
    fn neg(self) -> Tenths {
        Tenths(-self.0)
    }
}

impl std::iter::Sum for Tenths {
    fn sum<I: Iterator<Item = Tenths>>(iter: I) -> Tenths {
        iter.fold(Tenths::ZERO, Add::add)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub duration_ns: f64,
    #[serde(default)]
    pub uncertainty_ns: f64,
}

impl Segment {
    pub fn new(label: impl Into<String>, duration_ns: f64, uncertainty_ns: f64) -> Self {
        Segment {
            label: label.into(),
            duration_ns,
            uncertainty_ns,
        }
    }
}

/// Ordered latencies from the setting choice to the end of a measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingChain {
    pub name: String,
    pub segments: Vec<Segment>,
    /// Independently measured uncertainty of the whole chain. When absent the
    /// segment uncertainties add linearly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_uncertainty_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTotal {
    pub total: Tenths,
    pub uncertainty: Tenths,
}

impl ChainTotal {
    /// Longest duration compatible with the uncertainty.
    pub fn worst_case(&self) -> Tenths {
        self.total + self.uncertainty
    }
}

impl TimingChain {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Validation(format!("chain {:?} has no segments", self.name)));
        }
        for s in &self.segments {
            if !(s.duration_ns >= 0.0 && s.uncertainty_ns >= 0.0) {
                return Err(Error::Validation(format!(
                    "segment {:?} of chain {:?} has a negative duration or uncertainty",
                    s.label, self.name
                )));
            }
        }
        if let Some(u) = self.total_uncertainty_ns {
            if !(u >= 0.0) {
                return Err(Error::Validation(format!("chain {:?} has a negative uncertainty", self.name)));
            }
        }
        Ok(())
    }
}

pub fn chain_total(chain: &TimingChain) -> Result<ChainTotal> {
    chain.validate()?;
    let total = chain.segments.iter().map(|s| Tenths::from_ns(s.duration_ns)).sum();
    let uncertainty = match chain.total_uncertainty_ns {
        Some(u) => Tenths::from_ns(u),
        None => chain.segments.iter().map(|s| Tenths::from_ns(s.uncertainty_ns)).sum(),
    };
    Ok(ChainTotal { total, uncertainty })
}

/// Where the measurement duration of a scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementSpec {
    /// Name of a chain in the same configuration.
    Chain { chain: String },
    Fixed {
        measurement_ns: f64,
        #[serde(default)]
        measurement_uncertainty_ns: f64,
    },
}

/// One direction of the separation argument: a setting choice at the remote
/// side against the completion of the local measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationScenario {
    pub name: String,
    pub distance_m: f64,
    /// Position uncertainty at each end, m.
    #[serde(default)]
    pub position_uncertainty_m: f64,
    /// How much earlier the remote side starts, ns; negative if it starts
    /// later.
    #[serde(default)]
    pub start_offset_ns: f64,
    #[serde(default)]
    pub offset_uncertainty_ns: f64,
    #[serde(flatten)]
    pub measurement: MeasurementSpec,
}

impl SeparationScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) {
            return Err(Error::Validation(format!("scenario {:?}: distance must be positive", self.name)));
        }
        if !(self.position_uncertainty_m >= 0.0 && self.offset_uncertainty_ns >= 0.0) {
            return Err(Error::Validation(format!(
                "scenario {:?}: uncertainties must be non-negative",
                self.name
            )));
        }
        Ok(())
    }
}

/// Shortest luminal travel time, (d − 2u)/c, rounded down to 0.1 ns.
pub fn light_travel_floor(scenario: &SeparationScenario) -> Result<Tenths> {
    scenario.validate()?;
    let effective = scenario.distance_m - 2.0 * scenario.position_uncertainty_m;
    if effective <= 0.0 {
        return Err(Error::domain(format!(
            "scenario {:?}: position uncertainty swallows the distance",
            scenario.name
        )));
    }
    let tenths = effective / SPEED_OF_LIGHT * 1e10;
    // Guard against representation error just below an exact tenth.
    Ok(Tenths((tenths + 1e-9).floor() as i64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginReport {
    pub name: String,
    pub light_floor: Tenths,
    pub start_offset: Tenths,
    pub offset_uncertainty: Tenths,
    /// Measurement duration including its uncertainty.
    pub measurement: Tenths,
    pub margin: Tenths,
    pub separated: bool,
}

/// light floor − start offset − offset uncertainty − worst-case measurement.
/// A negative margin is a valid result flagged as not separated.
pub fn separation_margin(scenario: &SeparationScenario, measurement: Tenths) -> Result<MarginReport> {
    let light_floor = light_travel_floor(scenario)?;
    let start_offset = Tenths::from_ns(scenario.start_offset_ns);
    let offset_uncertainty = Tenths::from_ns(scenario.offset_uncertainty_ns);
    let margin = light_floor - start_offset - offset_uncertainty - measurement;
    Ok(MarginReport {
        name: scenario.name.clone(),
        light_floor,
        start_offset,
        offset_uncertainty,
        measurement,
        margin,
        separated: margin > Tenths::ZERO,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetrized {
    /// Extra start delay applied to the side with the larger margin.
    pub delay: Tenths,
    /// Smaller of the two margins after the delay.
    pub margin: Tenths,
}

/// Delaying the start of the side with margin `larger` moves margin from it
/// to the other direction; half the difference, rounded up to 0.1 ns,
/// equalizes them.
pub fn symmetrize(a: Tenths, b: Tenths) -> Symmetrized {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let delay = Tenths((hi.0 - lo.0 + 1) / 2);
    Symmetrized {
        delay,
        margin: (hi - delay).min(lo + delay),
    }
}

/// Chains and scenarios read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeConfig {
    #[serde(default, rename = "chain")]
    pub chains: Vec<TimingChain>,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<SeparationScenario>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacetimeReport {
    pub chains: Vec<(String, ChainTotal)>,
    pub margins: Vec<MarginReport>,
    /// Present when there are exactly two scenarios.
    pub symmetric: Option<Symmetrized>,
}

impl SpacetimeReport {
    pub fn all_separated(&self) -> bool {
        self.margins.iter().all(|m| m.separated)
    }
}

impl SpacetimeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Validation(format!("spacetime config: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Validation(format!("spacetime config: {e}")))
    }

    /// The two-lab geometry and latency chains of the published runs.
    pub fn reference() -> Self {
        let chain = |name: &str, aom: f64, ion: f64, electronics: f64| TimingChain {
            name: name.into(),
            segments: vec![
                Segment::new("random bit generation", 80.0, 0.0),
                Segment::new("setting switch to ionization start", aom, 4.0),
                Segment::new("ionization and ion flight", ion, 3.0),
                Segment::new("detection electronics", electronics, 0.0),
            ],
            total_uncertainty_ns: Some(1.0),
        };
        let scenario = |name: &str, d: f64, offset: f64, chain: &str| SeparationScenario {
            name: name.into(),
            distance_m: d,
            position_uncertainty_m: 0.5,
            start_offset_ns: offset,
            offset_uncertainty_ns: 7.0,
            measurement: MeasurementSpec::Chain { chain: chain.into() },
        };
        SpacetimeConfig {
            chains: vec![chain("trap 1", 217.0, 570.0, 80.0), chain("trap 2", 204.0, 725.0, 84.0)],
            scenarios: vec![
                scenario("QRNG 2 to trap 1", 398.0, 28.5, "trap 1"),
                scenario("QRNG 1 to trap 2", 402.7, -28.5, "trap 2"),
            ],
        }
    }

    pub fn check(&self) -> Result<SpacetimeReport> {
        let mut chains = Vec::with_capacity(self.chains.len());
        for c in &self.chains {
            chains.push((c.name.clone(), chain_total(c)?));
        }
        let mut margins = Vec::with_capacity(self.scenarios.len());
        for s in &self.scenarios {
            let measurement = match &s.measurement {
                MeasurementSpec::Chain { chain } => chains
                    .iter()
                    .find(|(name, _)| name == chain)
                    .map(|(_, t)| t.worst_case())
                    .ok_or_else(|| {
                        Error::Validation(format!("scenario {:?} names unknown chain {chain:?}", s.name))
                    })?,
                MeasurementSpec::Fixed {
                    measurement_ns,
                    measurement_uncertainty_ns,
                } => {
                    if !(*measurement_ns >= 0.0 && *measurement_uncertainty_ns >= 0.0) {
                        return Err(Error::Validation(format!(
                            "scenario {:?}: negative measurement time",
                            s.name
                        )));
                    }
                    Tenths::from_ns(*measurement_ns) + Tenths::from_ns(*measurement_uncertainty_ns)
                }
            };
            margins.push(separation_margin(s, measurement)?);
        }
        let symmetric = match margins.as_slice() {
            [a, b] => Some(symmetrize(a.margin, b.margin)),
            _ => None,
        };
        Ok(SpacetimeReport {
            chains,
            margins,
            symmetric,
        })
    }
}

/// Plain-text pass/fail summary.
pub fn render_report(r: &SpacetimeReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "spacelike separation");
    for (name, t) in &r.chains {
        let _ = writeln!(out, "  chain {name:<36}{} ± {}", t.total, t.uncertainty);
    }
    for m in &r.margins {
        let verdict = if m.separated { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "  {verdict} {:<34}floor {}, margin {}",
            m.name, m.light_floor, m.margin
        );
    }
    if let Some(s) = r.symmetric {
        let _ = writeln!(out, "  symmetric margin {} after a {} delay", s.margin, s.delay);
    }
    out
}
