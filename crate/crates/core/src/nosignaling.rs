//! Checks that the two setting bits are independent and that neither side's
//! outcomes depend on the remote setting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Outcome, RunDataset};
use crate::stats::{normal_two_sided, student_t_two_sided};

/// Counts indexed `[row][column]`, labels included for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub row_name: String,
    pub col_name: String,
    pub row_labels: [String; 2],
    pub col_labels: [String; 2],
    pub counts: [[u64; 2]; 2],
}

impl ContingencyTable2x2 {
    pub fn new(counts: [[u64; 2]; 2]) -> Self {
        ContingencyTable2x2 {
            row_name: "row".into(),
            col_name: "col".into(),
            row_labels: ["0".into(), "1".into()],
            col_labels: ["0".into(), "1".into()],
            counts,
        }
    }

    /// Setting a (rows) against setting b (columns).
    pub fn settings(counts: [[u64; 2]; 2]) -> Self {
        ContingencyTable2x2 {
            row_name: "a".into(),
            col_name: "b".into(),
            row_labels: ["a=0".into(), "a=1".into()],
            col_labels: ["b=0".into(), "b=1".into()],
            counts,
        }
    }

    /// Outcome `outcome` (columns +1, −1) grouped by the remote setting.
    pub fn outcome_by_setting(outcome: &str, setting: &str, counts: [[u64; 2]; 2]) -> Self {
        ContingencyTable2x2 {
            row_name: setting.into(),
            col_name: outcome.into(),
            row_labels: [format!("{setting}=0"), format!("{setting}=1")],
            col_labels: [format!("{outcome}=+1"), format!("{outcome}=-1")],
            counts,
        }
    }

    pub fn row_total(&self, r: usize) -> u64 {
        self.counts[r][0] + self.counts[r][1]
    }

    pub fn col_total(&self, c: usize) -> u64 {
        self.counts[0][c] + self.counts[1][c]
    }

    pub fn total(&self) -> u64 {
        self.row_total(0) + self.row_total(1)
    }

    /// Rows and columns swapped.
    pub fn transposed(&self) -> Self {
        let c = self.counts;
        ContingencyTable2x2 {
            row_name: self.col_name.clone(),
            col_name: self.row_name.clone(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            counts: [[c[0][0], c[1][0]], [c[0][1], c[1][1]]],
        }
    }
}

impl fmt::Display for ContingencyTable2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = 8;
        writeln!(f, "{:>w$} {:>w$} {:>w$} {:>w$}", "", self.col_labels[0], self.col_labels[1], "total")?;
        for r in 0..2 {
            writeln!(
                f,
                "{:>w$} {:>w$} {:>w$} {:>w$}",
                self.row_labels[r],
                self.counts[r][0],
                self.counts[r][1],
                self.row_total(r)
            )?;
        }
        write!(f, "{:>w$} {:>w$} {:>w$} {:>w$}", "total", self.col_total(0), self.col_total(1), self.total())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p_value: f64,
}

/// Two-sided two-proportion z-test of P(col = 1 | row = 0) against
/// P(col = 1 | row = 1) with the pooled standard error.
pub fn setting_independence_ztest(table: &ContingencyTable2x2) -> Result<ZTest> {
    let (n0, n1) = (table.row_total(0), table.row_total(1));
    if n0 == 0 || n1 == 0 {
        return Err(Error::InsufficientData("z-test needs both rows populated".into()));
    }
    let (k0, k1) = (table.counts[0][1], table.counts[1][1]);
    let pooled = (k0 + k1) as f64 / (n0 + n1) as f64;
    if pooled <= 0.0 || pooled >= 1.0 {
        return Err(Error::Degenerate(format!("pooled proportion {pooled} is degenerate")));
    }
    let (n0f, n1f) = (n0 as f64, n1 as f64);
    let se = (pooled * (1.0 - pooled) * (1.0 / n0f + 1.0 / n1f)).sqrt();
    let z = (k0 as f64 / n0f - k1 as f64 / n1f) / se;
    Ok(ZTest {
        z,
        p_value: normal_two_sided(z),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Two-sided pooled-variance two-sample t-test on ±1 outcomes. Row r of the
/// table is group r; column 0 counts +1 and column 1 counts −1.
pub fn nosignal_ttest(table: &ContingencyTable2x2) -> Result<TTest> {
    let mut stats = [(0.0f64, 0.0f64, 0.0f64); 2];
    for (r, slot) in stats.iter_mut().enumerate() {
        let n = table.row_total(r);
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "t-test needs at least two samples per group, {} has {n}",
                table.row_labels[r]
            )));
        }
        let nf = n as f64;
        let plus = table.counts[r][0] as f64;
        let mean = (2.0 * plus - nf) / nf;
        // Σ(x − mean)² for ±1 samples is n(1 − mean²).
        let ss = nf * (1.0 - mean * mean);
        *slot = (nf, mean, ss);
    }
    let [(n0, m0, ss0), (n1, m1, ss1)] = stats;
    let dof = n0 + n1 - 2.0;
    let pooled_var = (ss0 + ss1) / dof;
    if pooled_var <= 0.0 {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let t = (m0 - m1) / (pooled_var * (1.0 / n0 + 1.0 / n1)).sqrt();
    Ok(TTest {
        t,
        dof,
        p_value: student_t_two_sided(t, dof)?,
    })
}

/// The three tables drawn from one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoSignalingTables {
    /// a against b.
    pub settings: ContingencyTable2x2,
    /// Side-2 outcome y grouped by the remote setting a.
    pub y_by_a: ContingencyTable2x2,
    /// Side-1 outcome x grouped by the remote setting b.
    pub x_by_b: ContingencyTable2x2,
}

fn outcome_col(o: Outcome) -> usize {
    usize::from(o == Outcome::Down)
}

pub fn build_tables(dataset: &RunDataset) -> Result<NoSignalingTables> {
    if dataset.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut ab = [[0u64; 2]; 2];
    let mut ya = [[0u64; 2]; 2];
    let mut xb = [[0u64; 2]; 2];
    for r in &dataset.records {
        let (a, b) = (r.a.bit() as usize, r.b.bit() as usize);
        ab[a][b] += 1;
        ya[a][outcome_col(r.y)] += 1;
        xb[b][outcome_col(r.x)] += 1;
    }
    Ok(NoSignalingTables {
        settings: ContingencyTable2x2::settings(ab),
        y_by_a: ContingencyTable2x2::outcome_by_setting("y", "a", ya),
        x_by_b: ContingencyTable2x2::outcome_by_setting("x", "b", xb),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    pub tables: NoSignalingTables,
    pub settings_test: ZTest,
    pub y_by_a_test: TTest,
    pub x_by_b_test: TTest,
}

impl NoSignalingTables {
    pub fn test(self) -> Result<NoSignalingReport> {
        Ok(NoSignalingReport {
            settings_test: setting_independence_ztest(&self.settings)?,
            y_by_a_test: nosignal_ttest(&self.y_by_a)?,
            x_by_b_test: nosignal_ttest(&self.x_by_b)?,
            tables: self,
        })
    }
}

pub fn analyze_nosignaling(dataset: &RunDataset) -> Result<NoSignalingReport> {
    build_tables(dataset)?.test()
}

impl fmt::Display for NoSignalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "setting independence")?;
        writeln!(f, "{}", self.tables.settings)?;
        writeln!(f, "z = {:.3}, P = {:.3}", self.settings_test.z, self.settings_test.p_value)?;
        writeln!(f)?;
        writeln!(f, "side-2 outcome vs remote setting a")?;
        writeln!(f, "{}", self.tables.y_by_a)?;
        writeln!(f, "t = {:.3}, P = {:.3}", self.y_by_a_test.t, self.y_by_a_test.p_value)?;
        writeln!(f)?;
        writeln!(f, "side-1 outcome vs remote setting b")?;
        writeln!(f, "{}", self.tables.x_by_b)?;
        write!(f, "t = {:.3}, P = {:.3}", self.x_by_b_test.t, self.x_by_b_test.p_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Choice, Herald, RunMeta, TrialRecord};

    #[test]
    fn ztest_reference_example() {
        let t = ContingencyTable2x2::settings([[79, 69], [78, 74]]);
        let r = setting_independence_ztest(&t).unwrap();
        assert!((r.p_value - 0.72).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn ztest_proportional_rows() {
        let t = ContingencyTable2x2::new([[30, 10], [60, 20]]);
        let r = setting_independence_ztest(&t).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(setting_independence_ztest(&ContingencyTable2x2::new([[5, 0], [7, 0]])).is_err());
        assert!(setting_independence_ztest(&ContingencyTable2x2::new([[0, 0], [7, 1]])).is_err());
    }

    #[test]
    fn ttest_reference_examples() {
        let nov = ContingencyTable2x2::new([[80, 68], [76, 76]]);
        assert!((nosignal_ttest(&nov).unwrap().p_value - 0.483).abs() < 0.01);
        let apr7 = ContingencyTable2x2::new([[922, 941], [989, 859]]);
        assert!((nosignal_ttest(&apr7).unwrap().p_value - 0.014).abs() < 0.01);
    }

    #[test]
    fn ttest_edges() {
        let same = ContingencyTable2x2::new([[12, 8], [12, 8]]);
        assert_eq!(nosignal_ttest(&same).unwrap().p_value, 1.0);
        assert!(nosignal_ttest(&ContingencyTable2x2::new([[5, 0], [9, 0]])).is_err());
        assert!(nosignal_ttest(&ContingencyTable2x2::new([[1, 0], [9, 3]])).is_err());
    }

    #[test]
    fn single_record_tables() {
        let rec = TrialRecord {
            index: 1,
            herald: Herald::PsiPlus,
            a: Choice::Primed,
            b: Choice::Unprimed,
            x: Outcome::Down,
            y: Outcome::Up,
            timestamp_ns: None,
        };
        let ds = RunDataset::new(RunMeta::default(), vec![rec]);
        let t = build_tables(&ds).unwrap();
        assert_eq!(t.settings.counts, [[0, 0], [1, 0]]);
        assert_eq!(t.y_by_a.counts, [[0, 0], [1, 0]]);
        assert_eq!(t.x_by_b.counts, [[0, 1], [0, 0]]);
        assert!(build_tables(&RunDataset::new(RunMeta::default(), vec![])).is_err());
    }
}
