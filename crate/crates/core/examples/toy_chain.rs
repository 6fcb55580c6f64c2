//! Fill's algorithm on the three-state toy chain, with both rules.

use perfect_sampling::prelude::*;
use perfect_sampling::stats::state_counts;

fn main() -> Result<()> {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict)?;
    for (name, rule) in [("monotone", &toy.monotone), ("independent", &toy.independent)] {
        let full = FullTracking::new(rule);
        let sampler = FillSampler::new(&toy.kernel, &rev, rule, &full)?;
        let config = FillConfig::new(2, SeedSpec::State(0)).with_retry(RetryPolicy::FixedT { max_attempts: 1000 });
        let outcomes =
            (0..10_000).map(|r| sampler.sample(&config.clone().with_rng_seed(replication_seed(1, r)))).collect::<Result<Vec<_>>>()?;
        let attempts: usize = outcomes.iter().map(|o| o.attempts.len()).sum();
        let counts = state_counts(outcomes.iter().map(|o| o.output), 3);
        let gof = chi_square_gof(&counts, toy.kernel.pi())?;
        println!("{name:>11}: counts {counts:?}, mean attempts {:.3}, GoF p = {:.3}", attempts as f64 / outcomes.len() as f64, gof.p_value);
    }
    Ok(())
}
