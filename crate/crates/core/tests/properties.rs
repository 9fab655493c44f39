//! Invariants checked over generated inputs.

use bellcert::events::{s_per_state, CellCounts, Choice, CorrelationTable, Herald};
use bellcert::lhv::enumerate_strategies;
use bellcert::nosignaling::{nosignal_ttest, setting_independence_ztest, ContingencyTable2x2};
use bellcert::pvalues::{binomial_tail, pvalue_game, pvalue_martingale, Predictability};
use bellcert::qrng::{
    bias, predictability_budget, scc, xor_reduction, BitFormat, BitStream, PredictabilityBudget,
    SccAccumulator, MAX_LAG,
};
use bellcert::spacetime::{
    chain_total, separation_margin, MeasurementSpec, SeparationScenario, Segment, Tenths, TimingChain,
};
use proptest::prelude::*;

fn bits() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 2..600)
}

fn table_counts() -> impl Strategy<Value = [[u64; 2]; 2]> {
    [[1u64..5000, 1u64..5000], [1u64..5000, 1u64..5000]]
}

proptest! {
    #[test]
    fn bias_is_antisymmetric_under_complement(b in bits()) {
        let s = BitStream::from_bits(b);
        prop_assert_eq!(bias(&s.complement()).unwrap().bias, -bias(&s).unwrap().bias);
    }

    #[test]
    fn scc_is_invariant_under_complement_and_reversal(b in bits(), lag in 1usize..20) {
        let s = BitStream::from_bits(b);
        prop_assume!(lag < s.len());
        let v = scc(&s, lag).unwrap();
        prop_assert_eq!(scc(&s.complement(), lag).unwrap(), v);
        prop_assert_eq!(scc(&s.reversed(), lag).unwrap(), v);
        prop_assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn scc_accumulators_merge_like_one_pass(b in bits(), cut in 0usize..600, lag in 1usize..=MAX_LAG) {
        let s = BitStream::from_bits(b.clone());
        prop_assume!(lag < s.len());
        let cut = cut.min(b.len());
        let mut head = SccAccumulator::new(MAX_LAG).unwrap();
        let mut tail = SccAccumulator::new(MAX_LAG).unwrap();
        b[..cut].iter().for_each(|&x| head.push(x));
        b[cut..].iter().for_each(|&x| tail.push(x));
        head.merge(&tail).unwrap();
        prop_assert_eq!(head.scc(lag).unwrap(), scc(&s, lag).unwrap());
    }

    #[test]
    fn bit_formats_round_trip(b in bits()) {
        let s = BitStream::from_bits(b);
        prop_assert_eq!(&BitStream::from_packed(&s.to_packed(), Some(s.len())).unwrap(), &s);
        prop_assert_eq!(&BitStream::parse_ascii(&s.to_ascii()).unwrap(), &s);
        let mut out = Vec::new();
        bellcert::qrng::write_bits(&mut out, &s, BitFormat::Packed).unwrap();
        prop_assert_eq!(out.len(), s.len().div_ceil(8));
    }

    #[test]
    fn xor_reduction_decreases_with_depth(tau in 0.0f64..0.4999, k in 1u32..40) {
        let a = xor_reduction(tau, k).unwrap();
        let b = xor_reduction(tau, k + 1).unwrap();
        prop_assert!(b <= a);
        prop_assert!(a <= tau);
    }

    #[test]
    fn budget_is_monotone(
        d_bias in 0.0f64..1e-5,
        d_sigma in 0.0f64..1e-6,
        d_noise in 0.0f64..0.1,
        d_conf in 0.0f64..2.0,
        d_coeff in 0.0f64..1e-5,
        d_temp in 0.0f64..0.5,
        which in 0usize..6,
    ) {
        let base = PredictabilityBudget::reference();
        let mut more = base.clone();
        match which {
            0 => more.bias.max_bias += d_bias,
            1 => more.bias.sigma += d_sigma,
            2 => more.threshold.sigma_falling_mv += d_noise,
            3 => more.noise_confidence += d_conf,
            4 => more.temperature.coefficients_v_per_c[0] += d_coeff,
            _ => more.temperature.excursion_c += d_temp,
        }
        let a = predictability_budget(&base).unwrap().tau2;
        let b = predictability_budget(&more).unwrap().tau2;
        prop_assert!(b >= a, "{} < {}", b, a);
    }

    #[test]
    fn ztest_ignores_labels(c in table_counts()) {
        let t = ContingencyTable2x2::settings(c);
        let Ok(z) = setting_independence_ztest(&t) else { return Ok(()) };
        let cols = ContingencyTable2x2::settings([[c[0][1], c[0][0]], [c[1][1], c[1][0]]]);
        let rows = ContingencyTable2x2::settings([c[1], c[0]]);
        for other in [cols, rows] {
            let p = setting_independence_ztest(&other).unwrap().p_value;
            prop_assert!((p - z.p_value).abs() < 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&z.p_value));
    }

    #[test]
    fn ztest_is_one_for_proportional_rows(a in 1u64..500, b in 1u64..500, k in 1u64..20) {
        let t = ContingencyTable2x2::settings([[a, b], [a * k, b * k]]);
        let z = setting_independence_ztest(&t).unwrap();
        prop_assert!(z.z.abs() < 1e-9);
        prop_assert!((z.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ztest_sharpens_with_scale(c in table_counts(), k in 2u64..10) {
        let t = ContingencyTable2x2::settings(c);
        let scaled = ContingencyTable2x2::settings(c.map(|r| r.map(|v| v * k)));
        let (Ok(a), Ok(b)) = (setting_independence_ztest(&t), setting_independence_ztest(&scaled)) else {
            return Ok(());
        };
        prop_assert!((b.z - a.z * (k as f64).sqrt()).abs() < 1e-6 * (1.0 + b.z.abs()));
        prop_assert!(b.p_value <= a.p_value + 1e-12);
    }

    #[test]
    fn ttest_ignores_group_order(c in table_counts()) {
        let t = ContingencyTable2x2::outcome_by_setting("y", "a", c);
        let swapped = ContingencyTable2x2::outcome_by_setting("y", "a", [c[1], c[0]]);
        let (Ok(a), Ok(b)) = (nosignal_ttest(&t), nosignal_ttest(&swapped)) else { return Ok(()) };
        prop_assert!((a.t + b.t).abs() < 1e-9);
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn margin_is_monotone(
        d in 300.0f64..500.0,
        u in 0.0f64..2.0,
        off in -50.0f64..50.0,
        ou in 0.0f64..10.0,
        m in 0.0f64..1500.0,
        dd in 0.0f64..20.0,
        dm in 0.0f64..50.0,
    ) {
        let scenario = |d: f64, u: f64, ou: f64| SeparationScenario {
            name: "s".into(),
            distance_m: d,
            position_uncertainty_m: u,
            start_offset_ns: off,
            offset_uncertainty_ns: ou,
            measurement: MeasurementSpec::Fixed { measurement_ns: 0.0, measurement_uncertainty_ns: 0.0 },
        };
        let base = separation_margin(&scenario(d, u, ou), Tenths::from_ns(m)).unwrap().margin;
        let closer = separation_margin(&scenario(d - dd, u, ou), Tenths::from_ns(m)).unwrap().margin;
        let longer = separation_margin(&scenario(d, u, ou), Tenths::from_ns(m + dm)).unwrap().margin;
        let vaguer = separation_margin(&scenario(d, u + dd / 10.0, ou + dm), Tenths::from_ns(m)).unwrap().margin;
        prop_assert!(closer <= base);
        prop_assert!(longer <= base);
        prop_assert!(vaguer <= base);
    }

    #[test]
    fn chain_total_ignores_order(
        segs in prop::collection::vec((0.0f64..1000.0, 0.0f64..10.0), 1..8),
        seed in any::<u64>(),
    ) {
        let chain = |s: &[(f64, f64)]| TimingChain {
            name: "c".into(),
            segments: s.iter().enumerate().map(|(i, &(d, u))| Segment::new(format!("s{i}"), d, u)).collect(),
            total_uncertainty_ns: None,
        };
        let mut shuffled = segs.clone();
        let n = shuffled.len();
        for i in 0..n {
            shuffled.swap(i, (seed.rotate_left(i as u32) as usize) % n);
        }
        prop_assert_eq!(chain_total(&chain(&segs)).unwrap(), chain_total(&chain(&shuffled)).unwrap());
    }

    #[test]
    fn martingale_decreases_with_s_and_n(
        s in 1.5f64..4.0,
        ds in 0.0f64..0.5,
        n in 1u64..100_000,
        dn in 0u64..100_000,
        tau in 0.0f64..0.05,
    ) {
        let tau = Predictability::new(tau).unwrap();
        let base = pvalue_martingale(s, n, tau).unwrap();
        let higher = pvalue_martingale((s + ds).min(4.0), n, tau).unwrap();
        let longer = pvalue_martingale(s, n + dn, tau).unwrap();
        prop_assert!(higher.log_p <= base.log_p);
        prop_assert!(longer.log_p <= base.log_p);
        prop_assert!(base.log_p <= 0.0);
    }

    #[test]
    fn game_bound_is_monotone(n in 1u64..5000, w in 0u64..5000, tau in 0.0f64..0.05, dt in 0.0f64..0.05) {
        let w = w.min(n);
        let t0 = Predictability::new(tau).unwrap();
        let t1 = Predictability::new(tau + dt).unwrap();
        let base = pvalue_game(w, n, t0).unwrap();
        prop_assert!(pvalue_game(w, n, t1).unwrap().log_p >= base.log_p - 1e-12);
        if w < n {
            prop_assert!(pvalue_game(w + 1, n, t0).unwrap().log_p <= base.log_p + 1e-12);
        }
        prop_assert!(base.log_p <= 0.0);
    }

    #[test]
    fn binomial_tail_is_a_probability(n in 1u64..2000, w in 0u64..2000, xi in 0.01f64..0.99) {
        let w = w.min(n);
        let p = binomial_tail(w, n, xi).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if w > 0 {
            prop_assert!(binomial_tail(w - 1, n, xi).unwrap() >= p);
        }
    }

    #[test]
    fn s_per_state_is_bounded(cells in prop::collection::vec([1u64..400, 0u64..400, 0u64..400, 1u64..400], 8)) {
        let mut table = CorrelationTable::new();
        let mut it = cells.iter();
        for h in Herald::ALL {
            for a in Choice::ALL {
                for b in Choice::ALL {
                    let c = it.next().unwrap();
                    table.set_cell(h, a, b, CellCounts::new(c[0], c[1], c[2], c[3]));
                }
            }
        }
        for h in Herald::ALL {
            let s = s_per_state(&table, h).unwrap();
            prop_assert!(s.value.abs() <= 4.0 + 1e-12);
            prop_assert!(s.sigma >= 0.0);
        }
    }

    #[test]
    fn deterministic_strategies_respect_biased_bound(p_alpha in 0.0f64..=1.0, p_beta in 0.0f64..=1.0) {
        // Every local strategy stays under 2 + 8(τ − τ²) with τ the larger
        // deviation of the two setting probabilities from 1/2.
        let tau = (p_alpha - 0.5).abs().max((p_beta - 0.5).abs());
        let bound = 2.0 + 8.0 * (tau - tau * tau);
        for s in enumerate_strategies() {
            for h in Herald::ALL {
                prop_assert!(s.expected_s(h, p_alpha, p_beta) <= bound + 1e-12);
            }
        }
    }
}
