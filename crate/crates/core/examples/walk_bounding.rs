//! Fill with two-endpoint bounding on a reflecting random walk.

use perfect_sampling::prelude::*;
use perfect_sampling::stats::state_counts;

fn main() -> Result<()> {
    let n = 8;
    let (kernel, rule) = random_walk_chain(n)?;
    let rev = reverse_kernel(&kernel, ZeroMassPolicy::Strict)?;
    let bounding = MonotoneBounding::new(&rule, kernel.space().order())?;
    let sampler = FillSampler::new(&kernel, &rev, &rule, &bounding)?;
    let config = FillConfig::new(64, SeedSpec::State(0));
    let outcomes = (0..5_000).map(|r| sampler.sample(&config.clone().with_rng_seed(replication_seed(7, r)))).collect::<Result<Vec<_>>>()?;
    let counts = state_counts(outcomes.iter().map(|o| o.output), kernel.size());
    let steps: u64 = outcomes.iter().map(|o| o.attempts.last().unwrap().total_steps).sum();
    println!("counts {counts:?}");
    println!("mean Markov steps per sample {:.1}", steps as f64 / outcomes.len() as f64);
    println!("GoF p = {:.3}", chi_square_gof(&counts, kernel.pi())?.p_value);
    Ok(())
}
