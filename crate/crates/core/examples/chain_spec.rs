//! Loading a chain and transition rule from JSON.

use std::path::Path;

use perfect_sampling::prelude::*;
use perfect_sampling::spec_file::load_chain_spec;

fn main() -> Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/lazy_cycle.json");
    let chain = load_chain_spec(&path)?;
    let rule = chain.rule.expect("the file defines a rule");
    let rev = reverse_kernel(&chain.kernel, ZeroMassPolicy::Strict)?;
    let full = FullTracking::new(&rule);
    println!("pi = {:?}", chain.kernel.pi().as_slice());
    for t in 2..=6 {
        let per_seed = (0..chain.kernel.size())
            .map(|z| exact_fill_report(&chain.kernel, &rev, &rule, &full, t, z).map(|r| fmt_pq(&r.p_accept)))
            .collect::<Result<Vec<_>>>()?;
        let forward = exact_forward_coalescence(&rule, &full, t)?;
        println!("t={t}: P(accept | z) = [{}], forward coalescence {}", per_seed.join(", "), fmt_pq(&forward));
    }
    Ok(())
}
