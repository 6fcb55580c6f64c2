//! The infinite-window form of Fill, and its exact link to CFTP.

use perfect_sampling::cftp::CheckPolicy;
use perfect_sampling::prelude::*;
use perfect_sampling::stats::state_counts;

fn main() -> Result<()> {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict)?;
    let bounding = MonotoneBounding::new(&toy.monotone, toy.kernel.space().order())?;
    let seed = SeedSpec::State(0);
    for policy in [CheckPolicy::EveryT, CheckPolicy::PowersOfTwo] {
        let runs = (0..10_000)
            .map(|r| {
                fill_infinite_window(&toy.kernel, &rev, &toy.monotone, &bounding, &seed, policy, DEFAULT_WINDOW_CAP, &mut stream_rng(3, r))
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = state_counts(runs.iter().map(|r| r.output), 3);
        let mean_t = runs.iter().map(|r| r.t as f64).sum::<f64>() / runs.len() as f64;
        println!("{policy}: W counts {counts:?}, mean T {mean_t:.3}, GoF p = {:.3}", chi_square_gof(&counts, toy.kernel.pi())?.p_value);
    }
    let report = connection_diagnostic(&toy.kernel, &rev, &toy.monotone, &bounding, 4)?;
    let law: Vec<String> = report.cftp_t_law.iter().map(|(t, p)| format!("{t}: {}", fmt_pq(p))).collect();
    println!("exact CFTP T-law up to 4: {{{}}}", law.join(", "));
    println!("matches infinite-window T-law: {}, all identities hold: {}", report.t_laws_equal, report.all_hold());
    Ok(())
}
