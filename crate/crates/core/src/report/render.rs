use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CertificationReport, StateReport};
use crate::error::{Error, Result};
use crate::pvalues::PValueReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// Aligned plain-text tables.
    Text,
    /// Pretty-printed JSON carrying every number at full precision.
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "table" | "txt" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Validation(format!("unknown report format {other:?}"))),
        }
    }
}

/// Render `report`. `precision` sets the decimals of S values, correlators
/// and their uncertainties in text output; JSON is always exact.
pub fn render(report: &CertificationReport, format: ReportFormat, precision: usize) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Validation(format!("report serialization: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Text => Ok(render_text(report, precision)),
    }
}

pub fn parse_json(text: &str) -> Result<CertificationReport> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), "report", e.to_string()))
}

/// Four significant digits in scientific notation, plain decimals near one.
fn fmt_p(p: f64) -> String {
    if p == 0.0 || p < 1e-3 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

fn p_line(out: &mut String, name: &str, p: &PValueReport, extra: &str) {
    let _ = writeln!(out, "  {name:<22}{}{extra}", fmt_p(p.p_bound));
}

fn state_block(out: &mut String, s: &StateReport, prec: usize) {
    let _ = writeln!(out, "{} (N = {})", s.herald, s.n);
    let _ = writeln!(
        out,
        "  {:<10}{:>7}{:>7}{:>7}{:>7}{:>8}   E ± σ",
        "a,b", "uu", "ud", "du", "dd", "N"
    );
    for r in &s.rows {
        let c = &r.counts;
        let _ = writeln!(
            out,
            "  {:<10}{:>7}{:>7}{:>7}{:>7}{:>8}   {:+.prec$} ± {:.prec$}",
            format!("{},{}", r.a_deg, r.b_deg),
            c.up_up,
            c.up_down,
            c.down_up,
            c.down_down,
            c.total(),
            r.correlator.e,
            r.correlator.sigma,
        );
    }
    let _ = writeln!(out, "  {:<22}{:.prec$} ± {:.prec$}", "S", s.s.value, s.s.sigma);
    p_line(out, "P_m", &s.p_martingale, "");
    p_line(out, "P_g", &s.p_game, &format!("  ({} wins)", s.wins.wins));
}

fn render_text(r: &CertificationReport, prec: usize) -> String {
    let mut out = String::new();
    let title = if r.label.is_empty() { r.id.clone() } else { format!("{} ({})", r.label, r.id) };
    let _ = writeln!(out, "run {title}");
    let _ = writeln!(out, "events {}, tau {}", r.n_events, r.tau);
    for note in &r.notes {
        let _ = writeln!(out, "note: {note}");
    }
    for s in &r.states {
        out.push('\n');
        state_block(&mut out, s, prec);
    }
    let c = &r.combined;
    out.push('\n');
    let _ = writeln!(out, "combined");
    let _ = writeln!(
        out,
        "  {:<22}{:.prec$} ± {:.prec$}",
        "weighted mean", c.weighted_mean.value, c.weighted_mean.sigma
    );
    let _ = writeln!(
        out,
        "  {:<22}{:.prec$} ± {:.prec$}",
        "event based", c.event_based.value, c.event_based.sigma
    );
    let _ = writeln!(out, "  {:<22}{} of {}", "wins", c.wins.wins, c.wins.n);
    p_line(&mut out, "P_m", &c.p_martingale, "");
    p_line(&mut out, "P_g", &c.p_game, "");
    if let Some(ns) = &r.nosignaling {
        out.push('\n');
        let _ = writeln!(out, "{ns}");
    }
    if let Some(q) = &r.qrng {
        out.push('\n');
        let _ = writeln!(out, "setting predictability");
        let _ = writeln!(out, "  {:<22}{:.3e}", "tau1 (bias)", q.tau1);
        let _ = writeln!(out, "  {:<22}{:.3e}", "threshold noise", q.threshold_component);
        let _ = writeln!(out, "  {:<22}{:.3e}", "temperature", q.temperature_component);
        let _ = writeln!(out, "  {:<22}{:.3e}", "tau2", q.tau2);
    }
    if let Some(st) = &r.spacetime {
        out.push('\n');
        out.push_str(&crate::spacetime::render_report(st));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::APR_15_2016;
    use crate::pvalues::Predictability;
    use crate::report::certify;

    fn report() -> CertificationReport {
        certify(&APR_15_2016.dataset(), Predictability::new(6.3e-4).unwrap()).unwrap()
    }

    #[test]
    fn text_contains_state_values() {
        let t = render(&report(), ReportFormat::Text, 3).unwrap();
        assert!(t.contains("2.204") && t.contains("2.240"), "{t}");
        assert!(t.contains("7775 of 10000"));
    }

    #[test]
    fn precision_two() {
        let t = render(&report(), ReportFormat::Text, 2).unwrap();
        assert!(t.contains("2.22 ± 0.03"), "{t}");
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let j = render(&r, ReportFormat::Json, 3).unwrap();
        assert_eq!(parse_json(&j).unwrap(), r);
        assert_eq!(j, render(&r, ReportFormat::Json, 3).unwrap());
    }
}
