use perfect_sampling::prelude::*;
use perfect_sampling::stats::{chi_square_sf, gamma_q, state_counts, MIN_INTERRUPT_RECORDS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn survival_function_matches_statrs() {
    for dof in [1usize, 2, 3, 5, 8, 23, 60, 200] {
        let reference = ChiSquared::new(dof as f64).unwrap();
        for x in [0.01, 0.5, 1.0, 2.5, 7.0, 15.0, 40.0, 90.0, 250.0] {
            let ours = chi_square_sf(x, dof);
            let theirs = reference.sf(x);
            assert!((ours - theirs).abs() < 1e-10, "dof {dof} x {x}: {ours} vs {theirs}");
        }
    }
    assert!((gamma_q(0.5, 0.0) - 1.0).abs() < 1e-15);
}

fn rejection_rate_ok(rejections: usize, reps: usize, alpha: f64) -> bool {
    let rate = rejections as f64 / reps as f64;
    (rate - alpha).abs() <= 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt()
}

fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter().enumerate().map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs())).fold(0.0, f64::max)
}

#[test]
fn gof_null_rejection_rate_and_uniform_p_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let expected = ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let reps = 1000;
    let mut rejections = 0;
    let mut p_values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let samples = (0..2000).map(|_| expected.sample(&mut rng));
        let report = chi_square_gof(&state_counts(samples, 4), &expected).unwrap();
        rejections += report.rejects(0.05) as usize;
        p_values.push(report.p_value);
    }
    assert!(rejection_rate_ok(rejections, reps, 0.05), "{rejections}");
    // Kolmogorov critical value at level 0.01.
    assert!(ks_uniform(p_values) < 1.63 / (reps as f64).sqrt());
}

#[test]
fn independence_null_rejection_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let reps = 1000;
    let mut rejections = 0;
    let mut p_values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let pairs: Vec<(usize, u64)> = (0..2000).map(|_| (rng.gen_range(0..3), rng.gen_range(0..1000))).collect();
        let report = independence_test(&pairs, 4).unwrap();
        assert_eq!(report.total(), 2000);
        rejections += report.rejects(0.05) as usize;
        p_values.push(report.p_value);
    }
    assert!(rejection_rate_ok(rejections, reps, 0.05), "{rejections}");
    assert!(ks_uniform(p_values) < 1.63 / (reps as f64).sqrt());
}

#[test]
fn interruptibility_requires_enough_successful_records() {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict).unwrap();
    let full = FullTracking::new(&toy.monotone);
    let sampler = FillSampler::new(&toy.kernel, &rev, &toy.monotone, &full).unwrap();
    let config = FillConfig::new(2, SeedSpec::State(0));
    let record = sampler.sample(&config).unwrap().attempts.pop().unwrap();
    assert!(matches!(interruptibility_test(std::slice::from_ref(&record), 4), Err(Error::TooFewSamples { .. })));
    let mut failed = record;
    failed.accepted = false;
    failed.output = None;
    let many = vec![failed; MIN_INTERRUPT_RECORDS];
    assert!(matches!(interruptibility_test(&many, 4), Err(Error::InvalidInput(_))));
}

#[test]
fn fill_is_interruptible_and_cftp_is_not() {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict).unwrap();
    let b = MonotoneBounding::new(&toy.monotone, toy.kernel.space().order()).unwrap();
    let sampler = FillSampler::new(&toy.kernel, &rev, &toy.monotone, &b).unwrap();
    let config = FillConfig::new(2, SeedSpec::Distribution(toy.kernel.pi().clone())).with_retry(RetryPolicy::FixedT { max_attempts: 1000 });
    let records: Vec<RunRecord> = (0..20_000)
        .map(|r| sampler.sample(&config.clone().with_rng_seed(replication_seed(31, r))).unwrap().attempts.pop().unwrap())
        .collect();
    let report = interruptibility_test(&records, 4).unwrap();
    assert!(report.bucket_bounds.len() > 1);
    assert!(!report.rejects(0.001), "{report:?}");

    let pairs: Vec<(usize, u64)> = (0..20_000)
        .map(|r| {
            let run = cftp_sample(&toy.monotone, &b, DEFAULT_WINDOW_CAP, &mut stream_rng(32, r)).unwrap();
            (run.output, run.t as u64)
        })
        .collect();
    let report = independence_test(&pairs, 4).unwrap();
    assert!(report.rejects(0.001), "{report:?}");
    // Width-2 windows never output the middle state.
    let col = report.bucket_bounds.iter().position(|&b| b == 2).unwrap();
    let row = report.states.iter().position(|&s| s == 1).unwrap();
    assert_eq!(report.table[row][col], 0);
}

#[test]
fn csv_table() {
    let pairs = vec![(0, 1), (1, 5), (0, 5), (1, 1)];
    let report = independence_test(&pairs, 2).unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "state,runtime>=1,runtime>=5\n0,1,1\n1,1,1\n");
}
