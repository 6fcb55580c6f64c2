//! Chi-square goodness-of-fit and independence tests, and run-log plumbing.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chain::ProbabilityVector;
use crate::error::{Error, Result};
use crate::fill::RunRecord;

/// Significance levels reported in `reject_at`.
pub const LEVELS: [f64; 3] = [0.05, 0.01, 0.001];
/// Minimum number of successful runs for the interruptibility test.
pub const MIN_INTERRUPT_RECORDS: usize = 10_000;
pub const DEFAULT_BUCKETS: usize = 4;

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 10_000;

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_q needs a > 0");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Series for P(a, x).
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        (1.0 - sum * log_prefix.exp()).clamp(0.0, 1.0)
    } else {
        // Modified Lentz continued fraction for Q(a, x).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        (log_prefix.exp() * h).clamp(0.0, 1.0)
    }
}

/// P(χ²_dof ≥ statistic). A test with zero degrees of freedom never rejects.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if statistic.is_nan() {
        return f64::NAN;
    }
    gamma_q(dof as f64 / 2.0, statistic / 2.0)
}

fn reject_map(p_value: f64) -> BTreeMap<String, bool> {
    LEVELS.iter().map(|&a| (a.to_string(), p_value < a)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub reject_at: BTreeMap<String, bool>,
}

impl GofReport {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Pearson goodness of fit. States with zero expected mass do not count
/// towards the degrees of freedom; any observation there gives p = 0.
pub fn chi_square_gof(counts: &[u64], expected: &ProbabilityVector) -> Result<GofReport> {
    let n = expected.len();
    if counts.len() != n {
        return Err(Error::InvalidInput(format!("{} counts for {} states", counts.len(), n)));
    }
    let total: u64 = counts.iter().sum();
    let need = 5 * n as u64;
    if total < need {
        return Err(Error::TooFewSamples { have: total, need });
    }
    let mut statistic = 0.0;
    let mut cells = 0;
    for (x, &c) in counts.iter().enumerate() {
        let e = expected[x] * total as f64;
        if e > 0.0 {
            cells += 1;
            let d = c as f64 - e;
            statistic += d * d / e;
        } else if c > 0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = cells.max(1) - 1;
    let p_value = if statistic.is_infinite() { 0.0 } else { chi_square_sf(statistic, dof) };
    Ok(GofReport { statistic, dof, p_value, reject_at: reject_map(p_value) })
}

/// Frequencies of each state among `samples`.
pub fn state_counts(samples: impl IntoIterator<Item = usize>, n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    for s in samples {
        counts[s] += 1;
    }
    counts
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// Output states labelling the table rows.
    pub states: Vec<usize>,
    /// Lower bounds of the runtime buckets labelling the columns.
    pub bucket_bounds: Vec<u64>,
    /// `table[i][j]`: runs with output `states[i]` in bucket `j`.
    pub table: Vec<Vec<u64>>,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub reject_at: BTreeMap<String, bool>,
}

impl IndependenceReport {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }

    pub fn total(&self) -> u64 {
        self.table.iter().flatten().sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = self.bucket_bounds.iter().map(|b| format!("runtime>={b}")).collect();
        writeln!(out, "state,{}", header.join(","))?;
        for (s, row) in self.states.iter().zip(&self.table) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{s},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Cut points splitting `values` into at most `buckets` groups by empirical
/// quantiles. Tied cut points are merged.
pub fn quantile_cuts(values: &[u64], buckets: usize) -> Vec<u64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut cuts = Vec::new();
    if sorted.is_empty() {
        return cuts;
    }
    cuts.push(sorted[0]);
    for k in 1..buckets {
        let c = sorted[k * sorted.len() / buckets];
        if c > *cuts.last().expect("nonempty") {
            cuts.push(c);
        }
    }
    cuts
}

/// Chi-square test of independence between an output state and a runtime,
/// the runtime bucketed by quantiles. Empty rows and columns are dropped.
pub fn independence_test(pairs: &[(usize, u64)], buckets: usize) -> Result<IndependenceReport> {
    if buckets == 0 {
        return Err(Error::InvalidInput("need at least one bucket".into()));
    }
    if pairs.is_empty() {
        return Err(Error::TooFewSamples { have: 0, need: 1 });
    }
    let runtimes: Vec<u64> = pairs.iter().map(|p| p.1).collect();
    let cuts = quantile_cuts(&runtimes, buckets);
    let mut table: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for &(state, runtime) in pairs {
        let j = cuts.partition_point(|&c| c <= runtime) - 1;
        table.entry(state).or_insert_with(|| vec![0; cuts.len()])[j] += 1;
    }
    let states: Vec<usize> = table.keys().copied().collect();
    let rows: Vec<Vec<u64>> = table.into_values().collect();
    let col_sums: Vec<u64> = (0..cuts.len()).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let keep: Vec<usize> = (0..cuts.len()).filter(|&j| col_sums[j] > 0).collect();
    let bucket_bounds: Vec<u64> = keep.iter().map(|&j| cuts[j]).collect();
    let table: Vec<Vec<u64>> = rows.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect();
    let total = pairs.len() as f64;
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..keep.len()).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total;
            let d = obs as f64 - e;
            statistic += d * d / e;
        }
    }
    let dof = (table.len() - 1) * (keep.len() - 1);
    let p_value = chi_square_sf(statistic, dof);
    Ok(IndependenceReport { states, bucket_bounds, table, statistic, dof, p_value, reject_at: reject_map(p_value) })
}

/// Independence of the accepted output and the total number of Markov steps
/// spent on the sample.
pub fn interruptibility_test(records: &[RunRecord], buckets: usize) -> Result<IndependenceReport> {
    if records.len() < MIN_INTERRUPT_RECORDS {
        return Err(Error::TooFewSamples { have: records.len() as u64, need: MIN_INTERRUPT_RECORDS as u64 });
    }
    let pairs = records
        .iter()
        .map(|r| match r.output {
            Some(out) if r.accepted => Ok((out, r.total_steps)),
            _ => Err(Error::InvalidInput(format!("record {} did not accept", r.attempt_index))),
        })
        .collect::<Result<Vec<_>>>()?;
    independence_test(&pairs, buckets)
}

pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub records: usize,
    pub accepted: usize,
    pub mean_markov_steps: f64,
    pub output_counts: BTreeMap<usize, u64>,
}

pub fn summarize(records: &[RunRecord]) -> LogSummary {
    let mut output_counts = BTreeMap::new();
    for out in records.iter().filter_map(|r| r.output) {
        *output_counts.entry(out).or_insert(0) += 1;
    }
    let steps: u64 = records.iter().map(|r| r.markov_steps).sum();
    LogSummary {
        records: records.len(),
        accepted: records.iter().filter(|r| r.accepted).count(),
        mean_markov_steps: if records.is_empty() { 0.0 } else { steps as f64 / records.len() as f64 },
        output_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sf_known_values() {
        // χ²_1 at 3.841458820694124 is the 0.95 quantile.
        assert!((chi_square_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-10);
        assert!((chi_square_sf(13.815_510_557_964_274, 2) - 0.001).abs() < 1e-10);
        // χ²_2 has survival exp(−x/2).
        for x in [0.1, 1.0, 5.0, 40.0] {
            assert!((chi_square_sf(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        assert_eq!(chi_square_sf(0.0, 3), 1.0);
    }

    #[test]
    fn gof_exact_fit() {
        let r = chi_square_gof(&[100, 100, 100], &ProbabilityVector::uniform(3)).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn gof_rejects_skew() {
        let r = chi_square_gof(&[40_000, 30_000, 30_000], &ProbabilityVector::uniform(3)).unwrap();
        let e = 100_000.0 / 3.0;
        let expected = [40_000.0, 30_000.0, 30_000.0].iter().map(|o: &f64| (o - e).powi(2) / e).sum::<f64>();
        assert!((r.statistic - expected).abs() < 1e-6);
        assert!(r.reject_at["0.001"]);
    }

    #[test]
    fn gof_too_few() {
        assert!(matches!(chi_square_gof(&[1, 2, 3], &ProbabilityVector::uniform(3)), Err(Error::TooFewSamples { have: 6, need: 15 })));
    }

    #[test]
    fn independence_on_dependent_table() {
        let mut pairs = Vec::new();
        for i in 0..3000u64 {
            pairs.push(((i % 2) as usize, (i % 2) * 10 + i % 3));
        }
        let r = independence_test(&pairs, 2).unwrap();
        assert!(r.rejects(0.001));
        assert_eq!(r.total(), 3000);
    }

    #[test]
    fn quantile_cuts_merge_ties() {
        assert_eq!(quantile_cuts(&[5, 5, 5, 5], 4), vec![5]);
        assert_eq!(quantile_cuts(&[1, 2, 3, 4], 2), vec![1, 3]);
    }

    #[test]
    fn jsonl_roundtrip() {
        let rec = RunRecord {
            attempt_index: 0,
            horizon: 2,
            seed_state: 0,
            accepted: true,
            output: Some(1),
            trajectory: vec![1, 0, 0],
            markov_steps: 4,
            total_steps: 4,
            first_hit: Some(2),
        };
        let mut buf = Vec::new();
        write_jsonl(&[rec.clone(), rec.clone()], &mut buf).unwrap();
        let back: Vec<RunRecord> = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, vec![rec.clone(), rec]);
    }
}
