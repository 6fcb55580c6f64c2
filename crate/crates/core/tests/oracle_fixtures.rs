mod common;

use std::collections::BTreeMap;

use common::*;
use num_traits::Zero;
use perfect_sampling::cftp::CheckPolicy;
use perfect_sampling::model_zoo::MtfState;
use perfect_sampling::prelude::*;
use perfect_sampling::rational::ExactDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_rev() -> (perfect_sampling::model_zoo::ToyChain, ReversedKernel) {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict).unwrap();
    (toy, rev)
}

/// Counts the equally likely outcomes of one attempt of the toy example
/// with the independent rule, t = 2, X_2 = 0, by listing them directly:
/// X_1 and X_0 each take one of two values, and each destination table has
/// two free entries with two equally likely values.
#[test]
fn toy_independent_outcomes_by_hand() {
    let support = [[0usize, 1], [0, 2], [1, 2]];
    let mut outcomes = 0;
    let mut coalesced = [0u32; 3];
    for x1 in support[0] {
        for x0 in support[x1] {
            for u1_bits in 0..8u32 {
                let u1: Vec<usize> = (0..3).map(|x| support[x][((u1_bits >> x) & 1) as usize]).collect();
                if u1[x0] != x1 {
                    continue;
                }
                for u2_bits in 0..8u32 {
                    let u2: Vec<usize> = (0..3).map(|x| support[x][((u2_bits >> x) & 1) as usize]).collect();
                    if u2[x1] != 0 {
                        continue;
                    }
                    outcomes += 1;
                    let ends: Vec<usize> = (0..3).map(|x| u2[u1[x]]).collect();
                    if is_constant(&ends) {
                        coalesced[x0] += 1;
                    }
                }
            }
        }
    }
    assert_eq!(outcomes, 64);
    assert_eq!(coalesced, [4, 4, 4]);

    let (toy, rev) = toy_rev();
    let full = FullTracking::new(&toy.independent);
    let report = exact_fill_report(&toy.kernel, &rev, &toy.independent, &full, 2, 0).unwrap();
    assert_eq!(report.p_accept, ratio(12, 64));
    assert_eq!(report.outcome_count, 64);
}

#[test]
fn toy_reports_at_t2() {
    let (toy, rev) = toy_rev();
    let full = FullTracking::new(&toy.independent);
    let r = exact_fill_report(&toy.kernel, &rev, &toy.independent, &full, 2, 0).unwrap();
    assert_eq!(r.p_accept, ratio(3, 16));
    assert_eq!(r.conditional_output, Some(ExactDistribution::uniform(3)));

    let full = FullTracking::new(&toy.monotone);
    for (z, p) in [(0, ratio(3, 4)), (1, ratio(0, 1)), (2, ratio(3, 4))] {
        let r = exact_fill_report(&toy.kernel, &rev, &toy.monotone, &full, 2, z).unwrap();
        assert_eq!(r.p_accept, p);
        if z == 1 {
            assert_eq!(r.conditional_output, None);
        } else {
            assert_eq!(r.conditional_output, Some(ExactDistribution::uniform(3)));
        }
    }
}

/// Frozen from the oracle.
#[test]
fn toy_regressions_at_t3() {
    let (toy, rev) = toy_rev();
    let full = FullTracking::new(&toy.monotone);
    for z in 0..3 {
        let r = exact_fill_report(&toy.kernel, &rev, &toy.monotone, &full, 3, z).unwrap();
        assert_eq!(fmt_pq(&r.p_accept), "3/4");
        assert_eq!(r.outcome_count, 8);
        assert_eq!(r.conditional_output, Some(ExactDistribution::uniform(3)));
    }
    let full = FullTracking::new(&toy.independent);
    for z in 0..3 {
        let r = exact_fill_report(&toy.kernel, &rev, &toy.independent, &full, 3, z).unwrap();
        assert_eq!(fmt_pq(&r.p_accept), "3/8");
        assert_eq!(r.outcome_count, 512);
    }
}

/// Frozen from the oracle and confirmed by counting table pairs.
#[test]
fn independent_forward_coalescence_at_t2() {
    let toy = toy_chain();
    let full = FullTracking::new(&toy.independent);
    assert_eq!(exact_forward_coalescence(&toy.independent, &full, 2).unwrap(), ratio(3, 16));

    let support = [[0usize, 1], [0, 2], [1, 2]];
    let tables: Vec<Vec<usize>> = (0..8u32).map(|b| (0..3).map(|x| support[x][((b >> x) & 1) as usize]).collect()).collect();
    let hits = tables
        .iter()
        .flat_map(|u1| tables.iter().map(move |u2| (u1, u2)))
        .filter(|(u1, u2)| is_constant(&(0..3).map(|x| u2[u1[x]]).collect::<Vec<_>>()))
        .count();
    assert_eq!(hits, 12);
}

#[test]
fn forward_coalescence_at_zero_is_zero() {
    let (kernel, rule) = random_walk_chain(4).unwrap();
    let _ = kernel;
    let full = FullTracking::new(&rule);
    assert!(exact_forward_coalescence(&rule, &full, 0).unwrap().is_zero());
}

#[test]
fn pi_average_matches_forward_coalescence() {
    let (toy, rev) = toy_rev();
    let b = MonotoneBounding::new(&toy.monotone, toy.kernel.space().order()).unwrap();
    let c = pi_average_check(&toy.kernel, &rev, &toy.monotone, &b, 2).unwrap();
    assert_eq!(c.lhs, ratio(1, 2));
    assert_eq!(c.rhs, ratio(1, 2));
    assert!(c.equal);
}

#[test]
fn random_chains_pi_average_and_conditional_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let inst = random_instance(3, &mut rng);
        let full = FullTracking::new(&inst.rule);
        let pi = pi_distribution(&inst.kernel);
        for t in 1..=3 {
            let check = pi_average_check(&inst.kernel, &inst.rev, &inst.rule, &full, t).unwrap();
            assert!(check.equal, "{check:?}");
            for z in 0..3 {
                let r = exact_fill_report(&inst.kernel, &inst.rev, &inst.rule, &full, t, z).unwrap();
                if let Some(cond) = r.conditional_output {
                    assert_eq!(cond, pi);
                } else {
                    assert!(r.p_accept.is_zero());
                }
            }
        }
    }
}

#[test]
fn random_n4_conditional_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let inst = random_instance(4, &mut rng);
        let full = FullTracking::new(&inst.rule);
        let pi = pi_distribution(&inst.kernel);
        for t in 1..=3 {
            for z in 0..4 {
                let r = exact_fill_report(&inst.kernel, &inst.rev, &inst.rule, &full, t, z).unwrap();
                if let Some(cond) = r.conditional_output {
                    assert_eq!(cond, pi);
                }
            }
        }
        assert!(bayes_consistency(&inst.kernel, &inst.rev, &inst.rule).unwrap().equal);
    }
}

/// The inverse-CDF rule and the table rule built from its cells give the
/// same report.
#[test]
fn inverse_cdf_equals_table() {
    let bd = birth_death_chain(&[ratio(1, 3), ratio(1, 4), ratio(0, 1)], &[ratio(0, 1), ratio(1, 6), ratio(2, 5)]).unwrap();
    let (toy, _) = toy_rev();
    let walk = random_walk_chain(3).unwrap().0;
    for kernel in [toy.kernel.clone(), walk, bd.0] {
        let rev = reverse_kernel(&kernel, ZeroMassPolicy::Strict).unwrap();
        let n = kernel.size();
        let icdf = TransitionRule::inverse_cdf(&kernel, &(0..n).collect::<Vec<_>>()).unwrap();
        let atoms: Vec<(Rational, Vec<usize>)> = icdf
            .enumerate_drivers(1_000_000)
            .unwrap()
            .into_iter()
            .map(|a| (a.prob, (0..n).map(|x| icdf.apply(x, &a.driver).unwrap()).collect()))
            .collect();
        let table = TransitionRule::table_exact(n, atoms).unwrap();
        table.validate_against(&kernel).unwrap();
        let fi = FullTracking::new(&icdf);
        let ft = FullTracking::new(&table);
        for t in 1..=3 {
            for z in 0..n {
                let a = exact_fill_report(&kernel, &rev, &icdf, &fi, t, z).unwrap();
                let b = exact_fill_report(&kernel, &rev, &table, &ft, t, z).unwrap();
                assert_eq!((a.p_accept, a.conditional_output), (b.p_accept, b.conditional_output));
            }
        }
    }
}

#[test]
fn joint_law_fixtures() {
    let (toy, rev) = toy_rev();
    let b = MonotoneBounding::new(&toy.monotone, toy.kernel.space().order()).unwrap();
    let joint = exact_joint_t_w(&toy.kernel, &rev, &toy.monotone, &b, 4, CheckPolicy::EveryT).unwrap();
    let cftp = exact_cftp_time_law(&toy.monotone, &b, 4, CheckPolicy::EveryT).unwrap();
    assert_eq!(joint.t_law(), cftp.t_law());
    assert!(joint.factorizes());
    // Cumulative T-law is the forward coalescence probability.
    let mut cumulative = Rational::zero();
    for t in 0..=4 {
        cumulative += joint.t_law().get(&t).cloned().unwrap_or_else(Rational::zero);
        assert_eq!(cumulative, exact_forward_coalescence(&toy.monotone, &b, t).unwrap());
    }
    assert_eq!(joint.residual, ratio(1, 1) - cumulative);
    // W is π-distributed over the enumerated block.
    let mass: Rational = joint.t_law().values().sum();
    for w in joint.w_marginal() {
        assert_eq!(w, &mass / ratio(3, 1));
    }
    let law_powers = exact_cftp_time_law(&toy.monotone, &b, 4, CheckPolicy::PowersOfTwo).unwrap();
    let joint_powers = exact_joint_t_w(&toy.kernel, &rev, &toy.monotone, &b, 4, CheckPolicy::PowersOfTwo).unwrap();
    assert_eq!(joint_powers.t_law(), law_powers.t_law());
    assert_eq!(law_powers.t_law().keys().copied().collect::<Vec<_>>(), vec![2, 4]);
}

#[test]
fn mtf_detection_by_two_requests() {
    let w = RequestWeights::uniform(3).unwrap();
    let (rule, detection) = mtf_process(&w);
    // Exact weights of 1/3 each: nine equally likely request pairs, six
    // with distinct records.
    let p = exact_forward_coalescence(&rule, &detection, 2).unwrap();
    assert_eq!(p, ratio(2, 3));
    let full = FullTracking::new(&rule);
    assert_eq!(exact_forward_coalescence(&rule, &full, 2).unwrap(), ratio(2, 3));
    assert_eq!(MtfState::identity(3).rank(), 0);
}

#[test]
fn bayes_consistency_on_fixtures() {
    let (toy, rev) = toy_rev();
    let icdf = TransitionRule::inverse_cdf(&toy.kernel, &[0, 1, 2]).unwrap();
    for rule in [&toy.monotone, &toy.independent, &icdf] {
        let check = bayes_consistency(&toy.kernel, &rev, rule).unwrap();
        assert!(check.equal);
        let total: Rational = check.forward.values().sum();
        assert_eq!(total, ratio(1, 1));
    }
    let mut counts: BTreeMap<bool, usize> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let inst = random_instance(3, &mut rng);
        *counts.entry(bayes_consistency(&inst.kernel, &inst.rev, &inst.rule).unwrap().equal).or_default() += 1;
    }
    assert_eq!(counts.get(&false), None);
}
