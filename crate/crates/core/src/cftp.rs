//! Coupling from the past and the infinite-window variant of the rejection
//! sampler.
//!
//! Both look at windows `[−t, 0]` of one backward driver sequence
//! `U_0, U_{−1}, …`, where `U_s` carries the chain from time `s − 1` to `s`.
//! CFTP draws the drivers i.i.d. from μ. The infinite-window sampler instead
//! runs the reversed chain from `X_0` and imputes each `U_s` from the pair
//! `(X_{s−1}, X_s)`, then reports `W = X_{−T}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{step_backward, DiscreteKernel, ReversedKernel};
use crate::coalescence::DetectionProcess;
use crate::error::{Error, Result};
use crate::fill::SeedSpec;
use crate::oracle::{exact_cftp_time_law, exact_joint_t_w, pi_average_check, serialize_law, window_detects, window_image, PiAverageCheck};
use crate::rational::Rational;
use crate::rules::{Driver, TransitionRule};

/// Largest window width tried before giving up.
pub const DEFAULT_WINDOW_CAP: usize = 1 << 20;

/// Which window widths are checked for detection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckPolicy {
    #[serde(rename = "every-t")]
    EveryT,
    #[default]
    #[serde(rename = "powers-of-2")]
    PowersOfTwo,
}

impl CheckPolicy {
    /// Candidate widths in increasing order, starting at 0.
    pub fn widths(self) -> impl Iterator<Item = usize> {
        let mut next = Some(0usize);
        std::iter::from_fn(move || {
            let t = next?;
            next = match self {
                CheckPolicy::EveryT => t.checked_add(1),
                CheckPolicy::PowersOfTwo if t == 0 => Some(1),
                CheckPolicy::PowersOfTwo => t.checked_mul(2),
            };
            Some(t)
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckPolicy::EveryT => "every-t",
            CheckPolicy::PowersOfTwo => "powers-of-2",
        }
    }
}

impl fmt::Display for CheckPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "every-t" => Ok(CheckPolicy::EveryT),
            "powers-of-2" => Ok(CheckPolicy::PowersOfTwo),
            other => Err(Error::InvalidInput(format!("unknown check policy {other:?}"))),
        }
    }
}

/// Drivers indexed by nonpositive time: entry `k` is `U_{−k}`. Entries are
/// only ever appended.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DriverLog {
    drivers: Vec<Driver>,
}

impl DriverLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_drivers(drivers: Vec<Driver>) -> Self {
        DriverLog { drivers }
    }

    pub fn len(&self) -> usize {
        self.drivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drivers.is_empty()
    }

    /// `U_{−k}`.
    pub fn get(&self, k: usize) -> Option<&Driver> {
        self.drivers.get(k)
    }

    pub fn as_slice(&self) -> &[Driver] {
        &self.drivers
    }

    /// Draws fresh drivers for times not yet assigned, down to `−(len − 1)`.
    pub fn extend_to<R: Rng + ?Sized>(&mut self, len: usize, rule: &TransitionRule, rng: &mut R) {
        while self.drivers.len() < len {
            self.drivers.push(rule.sample_driver(rng));
        }
    }

    fn push(&mut self, driver: Driver) {
        self.drivers.push(driver);
    }
}

/// Result of one backward run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackwardRun {
    #[serde(rename = "T")]
    pub t: usize,
    /// The reported observation: the time-0 state for CFTP, `W` for the
    /// infinite-window sampler.
    pub output: usize,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<usize>,
    /// `X_0, X_{−1}, …, X_{−T}` for the infinite-window sampler.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<usize>,
    pub policy: CheckPolicy,
    pub markov_steps: u64,
}

fn width_too_large(t: usize, cap: usize) -> Result<()> {
    if t > cap {
        return Err(Error::WindowLimitExceeded { cap });
    }
    Ok(())
}

/// Coupling from the past over windows 1, 2, 4, …; the output is the image
/// of state 0 through the first detecting window.
pub fn cftp_sample<P: DetectionProcess, R: Rng + ?Sized>(
    rule: &TransitionRule,
    tracker: &P,
    window_cap: usize,
    rng: &mut R,
) -> Result<BackwardRun> {
    cftp_sample_logged(rule, tracker, window_cap, rng).map(|(run, _)| run)
}

/// As [`cftp_sample`], also returning every driver drawn.
pub fn cftp_sample_logged<P: DetectionProcess, R: Rng + ?Sized>(
    rule: &TransitionRule,
    tracker: &P,
    window_cap: usize,
    rng: &mut R,
) -> Result<(BackwardRun, DriverLog)> {
    let mut log = DriverLog::new();
    let mut steps = 0u64;
    if window_detects(tracker, &[], 0)? {
        return Ok((cftp_run(0, 0, steps), log));
    }
    for t in CheckPolicy::PowersOfTwo.widths().skip(1) {
        width_too_large(t, window_cap)?;
        log.extend_to(t, rule, rng);
        steps += t as u64;
        if window_detects(tracker, log.as_slice(), t)? {
            let output = window_image(rule, log.as_slice(), t, 0)?;
            return Ok((cftp_run(t, output, steps + t as u64), log));
        }
    }
    unreachable!("window widths are unbounded")
}

fn cftp_run(t: usize, output: usize, markov_steps: u64) -> BackwardRun {
    BackwardRun { t, output, w: None, x0: None, trajectory: Vec::new(), policy: CheckPolicy::PowersOfTwo, markov_steps }
}

/// Recomputes `(T, output)` of a CFTP run from its driver log alone.
pub fn replay_cftp<P: DetectionProcess>(rule: &TransitionRule, tracker: &P, log: &DriverLog) -> Result<Option<(usize, usize)>> {
    if window_detects(tracker, &[], 0)? {
        return Ok(Some((0, 0)));
    }
    for t in CheckPolicy::PowersOfTwo.widths().skip(1).take_while(|&t| t <= log.len()) {
        if window_detects(tracker, log.as_slice(), t)? {
            return Ok(Some((t, window_image(rule, log.as_slice(), t, 0)?)));
        }
    }
    Ok(None)
}

/// The infinite-window sampler: `X_0` from the seed, the reversed chain run
/// backward as far as needed, drivers imputed pair by pair, and `W = X_{−T}`
/// reported for the first candidate width `T` whose window detects.
#[allow(clippy::too_many_arguments)]
pub fn fill_infinite_window<P: DetectionProcess, R: Rng + ?Sized>(
    kernel: &DiscreteKernel,
    rev: &ReversedKernel,
    rule: &TransitionRule,
    tracker: &P,
    seed: &SeedSpec,
    policy: CheckPolicy,
    window_cap: usize,
    rng: &mut R,
) -> Result<BackwardRun> {
    if rev.size() != kernel.size() || rule.num_states() != kernel.size() {
        return Err(Error::InvalidInput("kernel, reversal and rule disagree on the number of states".into()));
    }
    seed.validate(kernel)?;
    let x0 = seed.draw(rng);
    let mut trajectory = vec![x0];
    let mut log = DriverLog::new();
    let mut steps = 0u64;
    for t in policy.widths() {
        width_too_large(t, window_cap)?;
        while trajectory.len() <= t {
            let k = trajectory.len() - 1;
            let earlier = step_backward(rev, trajectory[k], rng);
            log.push(rule.impute_driver(earlier, trajectory[k], rng)?);
            trajectory.push(earlier);
            steps += 1;
        }
        steps += t as u64;
        if window_detects(tracker, log.as_slice(), t)? {
            trajectory.truncate(t + 1);
            let w = trajectory[t];
            return Ok(BackwardRun { t, output: w, w: Some(w), x0: Some(x0), trajectory, policy, markov_steps: steps });
        }
    }
    unreachable!("window widths are unbounded")
}

/// Exact checks relating the rejection sampler, its infinite-window variant
/// and CFTP on one enumerable instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionReport {
    pub t_max: usize,
    pub pi_average: Vec<PiAverageCheck>,
    /// (W, X_0, T) law of the infinite-window sampler with X_0 ~ π
    /// factorizes as π(w) times the (X_0, T) law.
    pub factorizes: bool,
    #[serde(serialize_with = "serialize_law")]
    pub infinite_window_t_law: BTreeMap<usize, Rational>,
    #[serde(serialize_with = "serialize_law")]
    pub cftp_t_law: BTreeMap<usize, Rational>,
    pub t_laws_equal: bool,
    /// The (T, X_0) law equals CFTP's (T, output) law.
    pub joint_laws_equal: bool,
}

impl ConnectionReport {
    pub fn all_hold(&self) -> bool {
        self.pi_average.iter().all(|c| c.equal) && self.factorizes && self.t_laws_equal && self.joint_laws_equal
    }
}

pub fn connection_diagnostic<P: DetectionProcess>(
    kernel: &DiscreteKernel,
    rev: &ReversedKernel,
    rule: &TransitionRule,
    tracker: &P,
    t_max: usize,
) -> Result<ConnectionReport> {
    let pi_average = (0..=t_max).map(|t| pi_average_check(kernel, rev, rule, tracker, t)).collect::<Result<Vec<_>>>()?;
    let joint = exact_joint_t_w(kernel, rev, rule, tracker, t_max, CheckPolicy::EveryT)?;
    let cftp = exact_cftp_time_law(rule, tracker, t_max, CheckPolicy::EveryT)?;
    let infinite_window_t_law = joint.t_law();
    let cftp_t_law = cftp.t_law();
    Ok(ConnectionReport {
        t_max,
        pi_average,
        factorizes: joint.factorizes(),
        t_laws_equal: infinite_window_t_law == cftp_t_law,
        joint_laws_equal: joint.t_x0_law() == cftp.cells,
        infinite_window_t_law,
        cftp_t_law,
    })
}
