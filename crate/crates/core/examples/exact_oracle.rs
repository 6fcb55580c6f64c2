//! Exact acceptance probabilities and conditional output laws by enumeration.

use perfect_sampling::prelude::*;

fn main() -> Result<()> {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict)?;
    for (name, rule) in [("monotone", &toy.monotone), ("independent", &toy.independent)] {
        let full = FullTracking::new(rule);
        for t in 1..=3 {
            for z in 0..3 {
                let r = exact_fill_report(&toy.kernel, &rev, rule, &full, t, z)?;
                let cond = r.conditional_output.map_or("undefined".to_string(), |d| serde_json::to_string(&d).expect("serializable"));
                println!("{name} t={t} z={z}: P(accept) = {}, output law {cond}, {} outcomes", fmt_pq(&r.p_accept), r.outcome_count);
            }
        }
        let check = pi_average_check(&toy.kernel, &rev, rule, &full, 2)?;
        println!("{name}: pi-average {} vs forward coalescence {}", fmt_pq(&check.lhs), fmt_pq(&check.rhs));
    }
    Ok(())
}
