//! Statistical behaviour on simulated data, and the shipped fixture files.

use std::path::PathBuf;

use bellcert::fixtures::PUBLISHED_RUNS;
use bellcert::lhv::{OutcomeModel, SettingSource, Simulator};
use bellcert::nosignaling::analyze_nosignaling;
use bellcert::qrng::{bias, serial_test, windowed_evolution, BitStream, WindowStatistic};
use bellcert::report::{analyze, ingest, RunManifest};
use bellcert::stats::ks_uniform;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn serial_p_values(reps: u64, bits: usize, bias: f64, block: usize) -> Vec<f64> {
    (0..reps)
        .map(|seed| {
            let s = BitStream::simulate(bits, bias, 10_000 + seed).unwrap();
            serial_test(&s, block).unwrap().p_value
        })
        .collect()
}

#[test]
fn serial_test_is_uniform_for_an_ideal_source() {
    for block in [1, 4, 8] {
        let p = serial_p_values(1000, 40_000, 0.0, block);
        let ks = ks_uniform(&p).unwrap();
        assert!(ks.p_value > 0.01, "L={block}: KS D={} p={}", ks.statistic, ks.p_value);
    }
}

#[test]
fn biased_source_shifts_serial_p_values_to_zero() {
    let p = serial_p_values(300, 40_000, 1e-2, 4);
    let ks = ks_uniform(&p).unwrap();
    assert!(ks.p_value < 1e-6, "KS p={}", ks.p_value);
    let below = p.iter().filter(|&&x| x < 0.1).count() as f64 / p.len() as f64;
    assert!(below > 0.5, "only {below} below 0.1");
}

#[test]
fn windows_stay_within_three_sigma() {
    let s = BitStream::simulate(4_000_000, 0.0, 77).unwrap();
    for stat in [WindowStatistic::Bias, WindowStatistic::Scc1] {
        let w = windowed_evolution(&s, stat, 1000).unwrap();
        assert_eq!(w.len(), 4000);
        let frac = w.iter().filter(|p| p.within(3.0)).count() as f64 / w.len() as f64;
        // 99.73% expected; 3σ of the binomial count over 4000 windows is 0.25%.
        assert!(frac > 0.992, "{stat:?}: {frac}");
    }
}

#[test]
fn single_window_equals_whole_stream() {
    let s = BitStream::simulate(12_345, 0.01, 5).unwrap();
    let w = windowed_evolution(&s, WindowStatistic::Bias, s.len()).unwrap();
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].value, bias(&s).unwrap().bias);
}

#[test]
fn injected_bias_step_is_visible() {
    let clean = BitStream::simulate(200_000, 0.0, 1).unwrap();
    let step = BitStream::simulate(200_000, 0.02, 2).unwrap();
    let joined = BitStream::from_bits(clean.iter().chain(step.iter()));
    let w = windowed_evolution(&joined, WindowStatistic::Bias, 20_000).unwrap();
    assert_eq!(w.len(), 20);
    let (before, after) = w.split_at(10);
    assert!(before.iter().filter(|p| !p.within(3.0)).count() <= 1);
    // 0.02 is 5.7σ at 20000 bits.
    assert!(after.iter().all(|p| !p.within(3.0)), "{after:?}");
}

#[test]
fn nosignaling_p_values_are_not_small_on_simulated_quantum_data() {
    let sim = Simulator::new(OutcomeModel::Quantum { visibility: 0.8 }, SettingSource::unbiased(), 0.5).unwrap();
    let mut ya = Vec::new();
    let mut xb = Vec::new();
    let mut ab = Vec::new();
    for k in 0..400 {
        let ds = sim.run(2000, 31, k).unwrap();
        let r = analyze_nosignaling(&ds).unwrap();
        ab.push(r.settings_test.p_value);
        ya.push(r.y_by_a_test.p_value);
        xb.push(r.x_by_b_test.p_value);
    }
    for (name, p) in [("a|b", ab), ("y|a", ya), ("x|b", xb)] {
        let ks = ks_uniform(&p).unwrap();
        assert!(ks.p_value > 1e-3, "{name}: KS p={}", ks.p_value);
        let small = p.iter().filter(|&&x| x < 0.05).count() as f64 / p.len() as f64;
        let limit = 0.05 + 3.0 * (0.05f64 * 0.95 / p.len() as f64).sqrt();
        assert!(small <= limit, "{name}: {small} of p below 0.05");
    }
}

#[test]
fn shipped_fixtures_match_the_reference_counts() {
    for run in PUBLISHED_RUNS {
        let csv = fixture_dir().join(format!("{}.csv", run.id));
        let ds = ingest(&csv, None).unwrap();
        assert_eq!(ds.records, run.dataset().records, "{}", run.id);

        let manifest = RunManifest::read(&fixture_dir().join(format!("{}.toml", run.id))).unwrap();
        let report = analyze(&manifest).unwrap();
        assert_eq!(report.n_events, run.total());
        assert_eq!(report.combined.wins, run.table().wins());
    }
}
