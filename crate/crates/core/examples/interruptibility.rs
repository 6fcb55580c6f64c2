//! Runtime and output are independent for Fill but not for CFTP.

use perfect_sampling::prelude::*;

fn main() -> Result<()> {
    let toy = toy_chain();
    let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict)?;
    let bounding = MonotoneBounding::new(&toy.monotone, toy.kernel.space().order())?;

    let sampler = FillSampler::new(&toy.kernel, &rev, &toy.monotone, &bounding)?;
    let config = FillConfig::new(2, SeedSpec::Distribution(toy.kernel.pi().clone())).with_retry(RetryPolicy::FixedT { max_attempts: 1000 });
    let records = (0..20_000)
        .map(|r| sampler.sample(&config.clone().with_rng_seed(replication_seed(11, r))).map(|mut o| o.attempts.pop().unwrap()))
        .collect::<Result<Vec<_>>>()?;
    let fill = interruptibility_test(&records, 4)?;
    println!("fill: chi2 = {:.2}, dof {}, p = {:.3}", fill.statistic, fill.dof, fill.p_value);

    let pairs = (0..20_000)
        .map(|r| cftp_sample(&toy.monotone, &bounding, DEFAULT_WINDOW_CAP, &mut stream_rng(12, r)).map(|run| (run.output, run.t as u64)))
        .collect::<Result<Vec<_>>>()?;
    let cftp = independence_test(&pairs, 4)?;
    println!("cftp: chi2 = {:.2}, dof {}, p = {:.3e}", cftp.statistic, cftp.dof, cftp.p_value);
    let mut table = Vec::new();
    cftp.write_csv(&mut table)?;
    print!("{}", String::from_utf8_lossy(&table));
    Ok(())
}
