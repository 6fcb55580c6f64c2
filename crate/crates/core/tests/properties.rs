mod common;

use common::*;
use perfect_sampling::coalescence::TrackerState;
use perfect_sampling::model_zoo::MtfState;
use perfect_sampling::prelude::*;
use perfect_sampling::rational::{fmt_pq, parse_rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn bounding_detects_exactly_when_images_coalesce() {
    let toy = toy_chain();
    let walk4 = random_walk_chain(4).unwrap();
    for (kernel, rule) in [(&toy.kernel, &toy.monotone), (&walk4.0, &walk4.1)] {
        let b = MonotoneBounding::new(rule, kernel.space().order()).unwrap();
        let full = FullTracking::new(rule);
        for t in 0..=4 {
            for seq in all_sequences(rule, t) {
                let imgs = images(rule, &seq);
                let truth = imgs.iter().position(|v| is_constant(v));
                let bounded = run_detection(&b, &seq).unwrap();
                assert_eq!(bounded.first_hit, truth);
                assert_eq!(run_detection(&full, &seq).unwrap().first_hit, truth);
            }
        }
    }
}

fn walk_and_rule(n: usize) -> (DiscreteKernel, TransitionRule) {
    random_walk_chain(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn imputed_drivers_reproduce_backward_paths(n in 1usize..7, t in 1usize..20, seed in any::<u64>(), z in 0usize..7) {
        let (kernel, monotone) = walk_and_rule(n);
        let z = z % kernel.size();
        let rev = reverse_kernel(&kernel, ZeroMassPolicy::Strict).unwrap();
        let independent = TransitionRule::independent(&kernel);
        let icdf = TransitionRule::inverse_cdf(&kernel, &(0..kernel.size()).collect::<Vec<_>>()).unwrap();
        for rule in [&monotone, &independent, &icdf] {
            let full = FullTracking::new(rule);
            let sampler = FillSampler::new(&kernel, &rev, rule, &full).unwrap();
            let (record, drivers) = sampler.attempt_traced(t, &SeedSpec::State(z), 0, &mut stream_rng(seed, 0)).unwrap();
            prop_assert!(drivers.reproduces(rule, &record.trajectory));
            prop_assert_eq!(record.trajectory[t], z);
            prop_assert_eq!(record.output, record.accepted.then_some(record.trajectory[0]));
        }
    }

    #[test]
    fn random_table_rules_are_consistent(seed in any::<u64>(), n in 2usize..5) {
        let inst = random_instance(n, &mut ChaCha8Rng::seed_from_u64(seed));
        inst.rule.validate_against(&inst.kernel).unwrap();
        prop_assert!(bayes_consistency(&inst.kernel, &inst.rev, &inst.rule).unwrap().equal);
    }

    #[test]
    fn detection_is_sound(seed in any::<u64>(), len in 0usize..8) {
        let inst = random_instance(4, &mut ChaCha8Rng::seed_from_u64(seed));
        let full = FullTracking::new(&inst.rule);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let seq: Vec<Driver> = (0..len).map(|_| inst.rule.sample_driver(&mut rng)).collect();
        let imgs = images(&inst.rule, &seq);
        let d = run_detection(&full, &seq).unwrap();
        prop_assert_eq!(d.first_hit, imgs.iter().position(|v| is_constant(v)));
    }

    #[test]
    fn sandwich_holds(n in 1usize..9, seed in any::<u64>(), len in 0usize..30) {
        let (kernel, rule) = walk_and_rule(n);
        let b = MonotoneBounding::new(&rule, kernel.space().order()).unwrap();
        let tracker = Tracker::Bounding(b);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq: Vec<Driver> = (0..len).map(|_| rule.sample_driver(&mut rng)).collect();
        let imgs = images(&rule, &seq);
        let mut state = tracker.initial();
        for (s, img) in imgs.iter().enumerate() {
            let TrackerState::Interval(iv) = &state else { unreachable!() };
            prop_assert!(img.iter().all(|&y| iv.lower <= y && y <= iv.upper));
            prop_assert_eq!(iv.lower, img[0]);
            prop_assert_eq!(iv.upper, img[n]);
            if s < seq.len() {
                state = tracker.step(&state, &seq[s]).unwrap();
            }
        }
    }

    #[test]
    fn mtf_rank_roundtrip(n in 1usize..8, rank in any::<usize>()) {
        let rank = rank % perfect_sampling::model_zoo::factorial(n);
        prop_assert_eq!(MtfState::unrank(n, rank).rank(), rank);
    }

    #[test]
    fn rationals_roundtrip(p in -1000i64..1000, q in 1i64..1000) {
        let r = ratio(p, q);
        prop_assert_eq!(parse_rational(&fmt_pq(&r)).unwrap(), r);
    }

    #[test]
    fn cftp_replay_is_exact(seed in any::<u64>()) {
        let toy = toy_chain();
        let full = FullTracking::new(&toy.independent);
        let (run, log) = perfect_sampling::cftp::cftp_sample_logged(&toy.independent, &full, DEFAULT_WINDOW_CAP, &mut stream_rng(seed, 0)).unwrap();
        prop_assert_eq!(replay_cftp(&toy.independent, &full, &log).unwrap(), Some((run.t, run.output)));
    }
}
