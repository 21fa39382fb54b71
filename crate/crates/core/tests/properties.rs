mod common;

use bdi_testgen::campaign::baseline_test;
use bdi_testgen::explorer::{
    boltzmann_probabilities, coverage_reward, extract_policy, random_subset, LearningConfig, NextState, QTable,
};
use bdi_testgen::monitors::{check_all, MonitorConfig, Requirement, Verdict, SPEED_LIMIT};
use bdi_testgen::scenario::{legal_next, run_beliefs, AgentCoverage, BeliefSubset, SensorTriple, VOCABULARY_SIZE};
use bdi_testgen::sim::{run_simulation, CodeCoverageMap, FaultConfig, SimEvent, SimLog, SimTime, COVERAGE_POINTS};
use bdi_testgen::testgen::{
    concretize, parse_concrete, trace_to_abstract, AbstractAction, AbstractTest, Channel, ParamRangeTable,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn row_and_mask() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (1usize..=VOCABULARY_SIZE).prop_flat_map(|n| {
        (prop::collection::vec(-500.0f64..500.0, n), prop::collection::vec(any::<bool>(), n)).prop_map(|(row, mut mask)| {
            mask[0] = true;
            (row, mask)
        })
    })
}

fn coverage_map() -> impl Strategy<Value = CodeCoverageMap> {
    prop::collection::vec(0u32..3, COVERAGE_POINTS.len()).prop_map(|hits| {
        let mut m = CodeCoverageMap::default();
        for (label, h) in COVERAGE_POINTS.iter().zip(hits) {
            for _ in 0..h {
                m.hit(label);
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn boltzmann_is_a_distribution_over_legal_moves((row, mask) in row_and_mask(), temp in 1e-3f64..1e6) {
        let p = boltzmann_probabilities(&row, &mask, temp).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for (pi, m) in p.iter().zip(&mask) {
            prop_assert!(*pi >= 0.0);
            if !m {
                prop_assert_eq!(*pi, 0.0);
            }
        }
    }

    #[test]
    fn boltzmann_temperature_limits((row, mask) in row_and_mask()) {
        let legal = mask.iter().filter(|&&m| m).count() as f64;
        let row: Vec<f64> = row.iter().map(|q| q / 5.0).collect();
        let hot = boltzmann_probabilities(&row, &mask, 1e6).unwrap();
        for (pi, m) in hot.iter().zip(&mask) {
            if *m {
                prop_assert!((pi - 1.0 / legal).abs() < 1e-3);
            }
        }
        let best = row.iter().zip(&mask).filter(|(_, &m)| m).map(|(&q, _)| q).fold(f64::NEG_INFINITY, f64::max);
        let runner_up = row.iter().zip(&mask).filter(|(&q, &m)| m && q < best).map(|(&q, _)| q).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(best - runner_up > 0.1);
        let cold = boltzmann_probabilities(&row, &mask, 1e-3).unwrap();
        let ties = row.iter().zip(&mask).filter(|(&q, &m)| m && q == best).count() as f64;
        for (i, pi) in cold.iter().enumerate() {
            if mask[i] && row[i] == best {
                prop_assert!((pi - 1.0 / ties).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn self_loop_contracts_to_fixed_point(r in -100.0f64..100.0, gamma in 0.0f64..0.9, start in -50.0f64..50.0) {
        let mut q = QTable::zeros(1);
        q.set(0, 0, start);
        let mask = [true];
        let target = r / (1.0 - gamma);
        let mut prev = (start - target).abs();
        for _ in 0..3000 {
            q.update(0, 0, r, Some(NextState { row: 0, mask: &mask }), 0.1, gamma);
            let gap = (q.get(0, 0) - target).abs();
            prop_assert!(gap <= prev + 1e-9);
            prev = gap;
        }
        prop_assert!(prev <= 1e-3);
    }

    #[test]
    fn reward_tiers_are_ordered(h in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        let max = AgentCoverage { human: 10.0 / 48.0, robot: 11.0 / 12.0 };
        let c = LearningConfig::default();
        let got = coverage_reward(AgentCoverage { human: h * max.human, robot: r * max.robot }, max, &c);
        prop_assert!([100.0, 6.0, 5.0, 1.0, -100.0].contains(&got));
        let full = coverage_reward(max, max, &c);
        prop_assert!(got <= full);
    }

    #[test]
    fn random_subsets_are_structurally_valid(seed in any::<u64>(), legs in prop::option::of(1u8..=4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_subset(&mut rng, legs);
        prop_assert!(s.is_valid(), "{}", s.to_line());
        if let Some(k) = legs {
            prop_assert_eq!(s.legs(), Some(k));
        }
    }

    #[test]
    fn legal_walks_end_in_valid_subsets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prefix = Vec::new();
        loop {
            let next = legal_next(&prefix);
            if next.is_empty() {
                break;
            }
            prefix.push(next[rng.gen_range(0..next.len())]);
        }
        prop_assert!(BeliefSubset::new(prefix).is_valid());
    }

    #[test]
    fn extracted_policies_are_valid(cells in prop::collection::vec((0usize..VOCABULARY_SIZE, 0usize..VOCABULARY_SIZE, -10.0f64..10.0), 0..80)) {
        let mut q = QTable::zeros(VOCABULARY_SIZE);
        for (r, c, v) in cells {
            q.set(r, c, v);
        }
        let out = extract_policy(&q);
        prop_assert!(!out.subsets.is_empty());
        let mut seen = std::collections::BTreeSet::new();
        for s in &out.subsets {
            prop_assert!(s.is_valid(), "{}", s.to_line());
            let mut key = s.beliefs().to_vec();
            key.sort();
            prop_assert!(seen.insert(key), "duplicate {}", s.to_line());
        }
    }

    #[test]
    fn concretization_preserves_order_and_ranges(seed in any::<u64>(), bseed in any::<u64>()) {
        let ranges = ParamRangeTable::defaults();
        let t = baseline_test(&mut ChaCha8Rng::seed_from_u64(bseed));
        let c = concretize(&t, &ranges, seed).unwrap();
        prop_assert_eq!(c.stimuli.len(), t.actions.len());
        for (st, a) in c.stimuli.iter().zip(&t.actions) {
            prop_assert_eq!(&st.action, a);
            prop_assert_eq!(Some(st.channel), Channel::for_action(a));
            let entry = ranges.get(a).unwrap();
            prop_assert!(entry.duration.contains(st.duration));
            for (p, range) in st.params.iter().zip(&entry.params) {
                prop_assert_eq!(&p.name, &range.name);
                prop_assert!(range.interval.contains(p.value), "{} = {} outside {}", p.name, p.value, range.interval);
            }
        }
        prop_assert_eq!(parse_concrete(&c.to_text()).unwrap(), c);
        prop_assert_eq!(AbstractTest::parse(&t.to_text()).unwrap().actions, t.actions);
    }

    #[test]
    fn coverage_union_is_a_least_upper_bound(a in coverage_map(), b in coverage_map()) {
        let u = a.union(&b);
        prop_assert!(a.is_subset_of(&u) && b.is_subset_of(&u));
        prop_assert_eq!(&u, &b.union(&a));
        prop_assert_eq!(&u.union(&u), &u);
        prop_assert!(u.covered() >= a.covered().max(b.covered()));
        prop_assert!(u.covered() <= a.covered() + b.covered());
        prop_assert_eq!(CodeCoverageMap::parse(&u.to_text()).unwrap(), u);
    }

    #[test]
    fn monitors_agree_with_oracles(seed in any::<u64>()) {
        let log = common::synthetic_log(&mut ChaCha8Rng::seed_from_u64(seed), 40);
        let config = MonitorConfig::default();
        let got = check_all(&log, &config);
        for req in Requirement::ALL {
            let want = common::oracle(req, &log, config.release_threshold.secs(), config.safe_distance, SPEED_LIMIT);
            prop_assert_eq!((got[req as usize].verdict, got[req as usize].triggers), want, "{}", req);
        }
        prop_assert_eq!(SimLog::parse(&log.to_text()).unwrap(), log);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Any human behaviour, including nonsense sequences.
    #[test]
    fn simulation_guards_releases_and_conserves_legs(bseed in any::<u64>(), cseed in any::<u64>(), seed in any::<u64>()) {
        let t = baseline_test(&mut ChaCha8Rng::seed_from_u64(bseed));
        let c = concretize(&t, &ParamRangeTable::defaults(), cseed).unwrap();
        let r = run_simulation(&c, &FaultConfig::default(), seed);
        let releases = r.log.count(|e| matches!(e, SimEvent::LegRelease));
        let discards = r.log.count(|e| matches!(e, SimEvent::LegDiscard));
        prop_assert!(r.delivered as usize <= releases && releases <= r.delivered as usize + 1);
        prop_assert_eq!(discards, r.discarded as usize);
        let done = r.delivered + r.discarded;
        prop_assert!(done <= r.accepted && r.accepted <= done + 1);
        prop_assert!(r.delivered <= 4);
        // every release follows a ready decision with no hand-off outcome in between
        let mut ready = false;
        for rec in &r.log.records {
            match &rec.event {
                SimEvent::Decision(d) => ready = *d == SensorTriple::READY,
                SimEvent::LegRelease => {
                    prop_assert!(ready, "release at {} without a ready decision", rec.time);
                    ready = false;
                }
                SimEvent::LegDiscard => ready = false,
                _ => {}
            }
        }
        let times: Vec<SimTime> = r.log.records.iter().map(|x| x.time).collect();
        prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(times.last().is_none_or(|&t| t <= SimTime::from_secs(300.0)));
        prop_assert_ne!(check_all(&r.log, &MonitorConfig::default())[1].verdict, Verdict::Failed);
        prop_assert_eq!(run_simulation(&c, &FaultConfig::default(), seed), r);
    }

    #[test]
    fn schedule_follows_stimulus_order(bseed in any::<u64>(), cseed in any::<u64>()) {
        let t = baseline_test(&mut ChaCha8Rng::seed_from_u64(bseed));
        let c = concretize(&t, &ParamRangeTable::defaults(), cseed).unwrap();
        let r = run_simulation(&c, &FaultConfig::default(), 1);
        let idx: Vec<usize> = r.schedule.iter().map(|s| s.index).collect();
        prop_assert_eq!(idx, (0..r.schedule.len()).collect::<Vec<_>>());
        for w in r.schedule.windows(2) {
            prop_assert!(w[0].start <= w[0].end && w[0].end <= w[1].start);
        }
    }
}

#[test]
fn gaze_ready_angles_stay_below_threshold() {
    let ranges = ParamRangeTable::defaults();
    let t = AbstractTest::new(vec![AbstractAction::SetParam { key: "gaze".into(), value: 1 }]);
    for seed in 0..100_000u64 {
        let c = concretize(&t, &ranges, seed).unwrap();
        let angle = c.stimuli[0].param("angle").unwrap();
        assert!((15.0..40.0).contains(&angle), "seed {seed}: angle {angle}");
    }
}

#[test]
fn model_derived_tests_only_use_mapped_actions() {
    let ranges = ParamRangeTable::defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let s = random_subset(&mut rng, None);
        let (t, warnings) = trace_to_abstract(&run_beliefs(s.beliefs()).trace);
        assert!(warnings.is_empty(), "{warnings:?}");
        assert!(t.actions.iter().all(|a| ranges.get(a).is_some()), "{}", s.to_line());
    }
}
