//! The interruptible rejection sampler.
//!
//! One attempt: pick `X_t` from the seed, run the reversed chain back to
//! `X_0`, impute drivers `U_1, …, U_t` from the observed transitions, and run
//! the detection process on those drivers alone. The attempt accepts iff
//! coalescence is detected, in which case `X_0` is an exact draw from π.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{step_backward, DiscreteKernel, ProbabilityVector, ReversedKernel};
use crate::coalescence::{first_detection, DetectionProcess, MonotoneBounding};
use crate::error::{Error, Result};
use crate::model_zoo::random_walk_chain;
use crate::rules::{ImputedDriverSequence, TransitionRule};

pub const DEFAULT_MAX_ATTEMPTS: usize = 30;

/// Deterministic rng for stream `stream` of a base seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Base seed of an independent replication.
pub fn replication_seed(seed: u64, replication: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng.set_word_pos(2 * replication as u128);
    rng.next_u64()
}

/// Where `X_t` comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedSpec {
    State(usize),
    Distribution(ProbabilityVector),
}

impl SeedSpec {
    /// Checks absolute continuity with respect to π.
    pub fn validate(&self, kernel: &DiscreteKernel) -> Result<()> {
        let pi = kernel.pi();
        match self {
            SeedSpec::State(z) => {
                kernel.space().check(*z)?;
                if pi[*z] <= 0.0 {
                    return Err(Error::InvalidInput(format!("seed state {z} has zero stationary mass")));
                }
            }
            SeedSpec::Distribution(d) => {
                if d.len() != kernel.size() {
                    return Err(Error::InvalidInput("seed distribution has the wrong length".into()));
                }
                if let Some(x) = (0..d.len()).find(|&x| d[x] > 0.0 && pi[x] <= 0.0) {
                    return Err(Error::InvalidInput(format!("seed puts mass on state {x}, which has zero stationary mass")));
                }
            }
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            SeedSpec::State(z) => *z,
            SeedSpec::Distribution(d) => d.sample(rng),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RetryPolicy {
    FixedT {
        max_attempts: usize,
    },
    /// The horizon doubles after each rejection.
    Doubling {
        max_attempts: usize,
    },
}

impl RetryPolicy {
    pub fn max_attempts(&self) -> usize {
        match *self {
            RetryPolicy::FixedT { max_attempts } | RetryPolicy::Doubling { max_attempts } => max_attempts,
        }
    }

    pub fn horizon(&self, initial: usize, attempt: usize) -> usize {
        match self {
            RetryPolicy::FixedT { .. } => initial,
            RetryPolicy::Doubling { .. } => initial.saturating_mul(1usize.checked_shl(attempt as u32).unwrap_or(usize::MAX)),
        }
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy::Doubling { max_attempts: DEFAULT_MAX_ATTEMPTS }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FillConfig {
    pub horizon: usize,
    pub seed: SeedSpec,
    pub retry: RetryPolicy,
    pub rng_seed: u64,
}

impl FillConfig {
    pub fn new(horizon: usize, seed: SeedSpec) -> Self {
        FillConfig { horizon, seed, retry: RetryPolicy::default(), rng_seed: 0 }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_rng_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }
}

/// Outcome of a single attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub attempt_index: usize,
    pub horizon: usize,
    pub seed_state: usize,
    pub accepted: bool,
    pub output: Option<usize>,
    /// X_0, …, X_t.
    pub trajectory: Vec<usize>,
    /// Backward steps plus detection steps of this attempt.
    pub markov_steps: u64,
    /// Markov steps of this and all earlier attempts of the same sample.
    pub total_steps: u64,
    pub first_hit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FillOutcome {
    pub output: usize,
    pub attempts: Vec<RunRecord>,
}

/// A kernel, its reversal, a rule and a detection process, bundled.
#[derive(Clone, Copy, Debug)]
pub struct FillSampler<'a, P> {
    kernel: &'a DiscreteKernel,
    rev: &'a ReversedKernel,
    rule: &'a TransitionRule,
    tracker: &'a P,
}

impl<'a, P: DetectionProcess> FillSampler<'a, P> {
    pub fn new(kernel: &'a DiscreteKernel, rev: &'a ReversedKernel, rule: &'a TransitionRule, tracker: &'a P) -> Result<Self> {
        if rev.size() != kernel.size() || rule.num_states() != kernel.size() {
            return Err(Error::InvalidInput("kernel, reversal and rule disagree on the number of states".into()));
        }
        Ok(FillSampler { kernel, rev, rule, tracker })
    }

    pub fn kernel(&self) -> &DiscreteKernel {
        self.kernel
    }

    /// One attempt with horizon `t`.
    pub fn attempt<R: Rng + ?Sized>(&self, t: usize, seed: &SeedSpec, attempt_index: usize, rng: &mut R) -> Result<RunRecord> {
        self.attempt_traced(t, seed, attempt_index, rng).map(|(record, _)| record)
    }

    /// One attempt, also returning the imputed drivers.
    pub fn attempt_traced<R: Rng + ?Sized>(
        &self,
        t: usize,
        seed: &SeedSpec,
        attempt_index: usize,
        rng: &mut R,
    ) -> Result<(RunRecord, ImputedDriverSequence)> {
        if t == 0 {
            return Err(Error::InvalidInput("horizon must be at least 1".into()));
        }
        let z = seed.draw(rng);
        let mut trajectory = vec![0; t + 1];
        trajectory[t] = z;
        for s in (0..t).rev() {
            trajectory[s] = step_backward(self.rev, trajectory[s + 1], rng);
        }
        let drivers = ImputedDriverSequence::impute(self.rule, &trajectory, rng)?;
        let detection = first_detection(self.tracker, drivers.drivers())?;
        let markov_steps = (t + detection.steps) as u64;
        let record = RunRecord {
            attempt_index,
            horizon: t,
            seed_state: z,
            accepted: detection.detected,
            output: detection.detected.then_some(trajectory[0]),
            trajectory,
            markov_steps,
            total_steps: markov_steps,
            first_hit: detection.first_hit,
        };
        Ok((record, drivers))
    }

    /// Repeats independent attempts under the retry policy. Attempt k draws
    /// from stream k of `config.rng_seed`.
    pub fn sample(&self, config: &FillConfig) -> Result<FillOutcome> {
        config.seed.validate(self.kernel)?;
        let mut attempts = Vec::new();
        let mut total = 0u64;
        for k in 0..config.retry.max_attempts() {
            let t = config.retry.horizon(config.horizon, k);
            let mut rng = stream_rng(config.rng_seed, k as u64);
            let mut record = self.attempt(t, &config.seed, k, &mut rng)?;
            total += record.markov_steps;
            record.total_steps = total;
            let output = record.output;
            attempts.push(record);
            if let Some(output) = output {
                return Ok(FillOutcome { output, attempts });
            }
        }
        Err(Error::MaxAttemptsExceeded { attempts })
    }
}

/// One point of the acceptance-probability curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub c: f64,
    pub t: usize,
    pub replications: usize,
    pub accepted: usize,
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo acceptance probability of a single attempt on the walk over
/// {0, …, n} from X_t = 0, with t = ⌈c n²⌉, for each c in the grid.
pub fn acceptance_curve(n: usize, c_grid: &[f64], replications: usize, seed: u64) -> Result<Vec<CurvePoint>> {
    if n < 2 {
        return Err(Error::InvalidInput("acceptance curve needs n >= 2".into()));
    }
    if replications == 0 {
        return Err(Error::InvalidInput("need at least one replication".into()));
    }
    let (kernel, rule) = random_walk_chain(n)?;
    let rev = crate::chain::reverse_kernel(&kernel, Default::default())?;
    let tracker = MonotoneBounding::new(&rule, kernel.space().order())?;
    let sampler = FillSampler::new(&kernel, &rev, &rule, &tracker)?;
    let seed_spec = SeedSpec::State(0);
    c_grid
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
            }
            let t = ((c * (n * n) as f64).ceil() as usize).max(1);
            let point_seed = replication_seed(seed, i as u64);
            let accepted: Vec<bool> = (0..replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream_rng(point_seed, r as u64);
                    sampler.attempt(t, &seed_spec, 0, &mut rng).map(|rec| rec.accepted)
                })
                .collect::<Result<_>>()?;
            let hits = accepted.iter().filter(|&&a| a).count();
            let p = hits as f64 / replications as f64;
            Ok(CurvePoint { c, t, replications, accepted: hits, estimate: p, std_error: (p * (1.0 - p) / replications as f64).sqrt() })
        })
        .collect()
}
