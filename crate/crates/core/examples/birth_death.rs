//! Forward coalescence and acceptance on a birth-death chain, exact and simulated.

use perfect_sampling::prelude::*;
use perfect_sampling::rational::to_f64;

fn main() -> Result<()> {
    let up = [ratio(1, 2), ratio(1, 3), ratio(1, 4), ratio(0, 1)];
    let down = [ratio(0, 1), ratio(1, 4), ratio(1, 3), ratio(1, 2)];
    let (kernel, rule) = birth_death_chain(&up, &down)?;
    let rev = reverse_kernel(&kernel, ZeroMassPolicy::Strict)?;
    let bounding = MonotoneBounding::new(&rule, kernel.space().order())?;
    let sampler = FillSampler::new(&kernel, &rev, &rule, &bounding)?;
    println!("pi = {:?}", kernel.pi().as_slice());
    for t in [1, 2, 4, 8] {
        let exact = exact_forward_coalescence(&rule, &bounding, t)?;
        let hits = (0..20_000)
            .filter(|&r| sampler.attempt(t, &SeedSpec::State(0), 0, &mut stream_rng(9, r)).map(|a| a.accepted).unwrap_or(false))
            .count();
        println!("t={t}: P(coalesce) = {} ({:.4}), P(accept | z=0) ~ {:.4}", fmt_pq(&exact), to_f64(&exact), hits as f64 / 20_000.0);
    }
    Ok(())
}
