//! CFTP on the move-to-front chain, detected by the set of requested records.

use perfect_sampling::model_zoo::{mtf_stationary, MtfState};
use perfect_sampling::prelude::*;
use perfect_sampling::stats::state_counts;

fn main() -> Result<()> {
    let weights = RequestWeights::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let (rule, detection) = mtf_process(&weights);
    let runs =
        (0..20_000).map(|r| cftp_sample(&rule, &detection, DEFAULT_WINDOW_CAP, &mut stream_rng(5, r))).collect::<Result<Vec<_>>>()?;
    let counts = state_counts(runs.iter().map(|r| r.output), 24);
    let expected = ProbabilityVector::new(mtf_stationary(&weights))?;
    let mean_t = runs.iter().map(|r| r.t as f64).sum::<f64>() / runs.len() as f64;
    println!("mean window {mean_t:.2}");
    for (rank, (&count, p)) in counts.iter().zip(expected.as_slice()).enumerate().take(6) {
        println!("{:?}: {:.4} (exact {p:.4})", MtfState::unrank(4, rank).arrangement(), count as f64 / runs.len() as f64);
    }
    println!("GoF p = {:.3}", chi_square_gof(&counts, &expected)?.p_value);
    Ok(())
}
