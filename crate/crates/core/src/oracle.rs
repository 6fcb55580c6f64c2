//! Exact enumeration of small instances in rational arithmetic.
//!
//! The oracle never simulates. It walks every backward trajectory weighted
//! by K̃ and, for each, every atom of the imputed driver law, running the
//! detection process on each atom. Sums are exact, so identities such as
//! "the accepted output is distributed as π" can be asserted with `==`.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::cftp::CheckPolicy;
use crate::chain::{DiscreteKernel, ReversedKernel};
use crate::coalescence::DetectionProcess;
use crate::error::{Error, Result};
use crate::rational::{fmt_pq, pq, ExactDistribution, Rational};
use crate::rules::{Driver, DriverAtom, DriverKey, TransitionRule};

/// Maximum number of enumerated outcomes per call.
pub const ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceReport {
    /// P_z(C), the probability that one attempt from X_t = z accepts.
    #[serde(with = "pq")]
    pub p_accept: Rational,
    /// Law of X_0 given acceptance; absent when `p_accept` is zero.
    #[serde(rename = "conditional")]
    pub conditional_output: Option<ExactDistribution>,
    pub outcome_count: u64,
}

struct Enumerator<'a, P> {
    rule: &'a TransitionRule,
    tracker: &'a P,
    cap: u64,
    count: u64,
    conditional: HashMap<(usize, usize), Rc<Vec<DriverAtom>>>,
    unconditional: Option<Rc<Vec<DriverAtom>>>,
}

impl<'a, P: DetectionProcess> Enumerator<'a, P> {
    fn new(rule: &'a TransitionRule, tracker: &'a P) -> Self {
        Enumerator { rule, tracker, cap: ENUMERATION_CAP, count: 0, conditional: HashMap::new(), unconditional: None }
    }

    fn conditional(&mut self, x_prev: usize, x_next: usize) -> Result<Rc<Vec<DriverAtom>>> {
        if let Some(atoms) = self.conditional.get(&(x_prev, x_next)) {
            return Ok(atoms.clone());
        }
        let atoms = Rc::new(self.rule.conditional_atoms(x_prev, x_next, self.cap)?);
        self.conditional.insert((x_prev, x_next), atoms.clone());
        Ok(atoms)
    }

    fn unconditional(&mut self) -> Result<Rc<Vec<DriverAtom>>> {
        if self.unconditional.is_none() {
            self.unconditional = Some(Rc::new(self.rule.enumerate_drivers(self.cap)?));
        }
        Ok(self.unconditional.clone().expect("just set"))
    }

    fn tick(&mut self) -> Result<()> {
        self.count += 1;
        if self.count > self.cap {
            return Err(Error::EnumerationTooLarge { cap: self.cap });
        }
        Ok(())
    }

    /// Every driver sequence whose s-th entry has law `laws[s]`, with weights.
    fn driver_sequences(
        &mut self,
        laws: &[Rc<Vec<DriverAtom>>],
        on_leaf: &mut dyn FnMut(&[Driver], &Rational) -> Result<()>,
    ) -> Result<()> {
        let mut prefix = Vec::with_capacity(laws.len());
        self.sequences_rec(laws, &mut prefix, Rational::one(), on_leaf)
    }

    fn sequences_rec(
        &mut self,
        laws: &[Rc<Vec<DriverAtom>>],
        prefix: &mut Vec<Driver>,
        weight: Rational,
        on_leaf: &mut dyn FnMut(&[Driver], &Rational) -> Result<()>,
    ) -> Result<()> {
        let depth = prefix.len();
        if depth == laws.len() {
            self.tick()?;
            return on_leaf(prefix, &weight);
        }
        for atom in laws[depth].iter() {
            prefix.push(atom.driver.clone());
            self.sequences_rec(laws, prefix, &weight * &atom.prob, on_leaf)?;
            prefix.pop();
        }
        Ok(())
    }

    fn detects(&self, drivers: &[Driver]) -> Result<bool> {
        let mut state = self.tracker.initial();
        if self.tracker.in_target(&state) {
            return Ok(true);
        }
        for d in drivers {
            state = self.tracker.step(&state, d)?;
            if self.tracker.in_target(&state) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Every path `start, x_1, …, x_len` of `matrix` with its exact weight.
fn paths(matrix: &[Vec<Rational>], start: usize, len: usize) -> Vec<(Vec<usize>, Rational)> {
    let mut out = vec![(vec![start], Rational::one())];
    for _ in 0..len {
        let mut next = Vec::new();
        for (path, w) in &out {
            let last = *path.last().expect("nonempty");
            for (y, p) in matrix[last].iter().enumerate() {
                if p.is_positive() {
                    let mut np = path.clone();
                    np.push(y);
                    next.push((np, w * p));
                }
            }
        }
        out = next;
    }
    out
}

fn check_sizes(kernel: &DiscreteKernel, rev: &ReversedKernel, rule: &TransitionRule) -> Result<()> {
    if rev.size() != kernel.size() || rule.num_states() != kernel.size() {
        return Err(Error::InvalidInput("kernel, reversal and rule disagree on the number of states".into()));
    }
    Ok(())
}

/// Exact acceptance probability and conditional output law of one attempt
/// with horizon `t` from `X_t = z`.
pub fn exact_fill_report<P: DetectionProcess>(
    kernel: &DiscreteKernel,
    rev: &ReversedKernel,
    rule: &TransitionRule,
    tracker: &P,
    t: usize,
    z: usize,
) -> Result<AcceptanceReport> {
    check_sizes(kernel, rev, rule)?;
    kernel.space().check(z)?;
    let exact = kernel.require_exact()?;
    if exact.pi[z].is_zero() {
        return Err(Error::ZeroMassState { state: z });
    }
    let rev_exact = rev.require_exact()?;
    let n = kernel.size();
    let mut en = Enumerator::new(rule, tracker);
    let mut accept = Rational::zero();
    let mut by_output = vec![Rational::zero(); n];
    // Paths run X_t, X_{t-1}, …, X_0.
    for (backward, w_path) in paths(rev_exact, z, t) {
        let forward: Vec<usize> = backward.iter().rev().copied().collect();
        let laws = forward.windows(2).map(|pair| en.conditional(pair[0], pair[1])).collect::<Result<Vec<_>>>()?;
        let x0 = forward[0];
        let mut hits = Rational::zero();
        let mut detect_err = None;
        {
            let tracker_en = Enumerator::new(rule, tracker);
            en.driver_sequences(&laws, &mut |drivers, w| {
                match tracker_en.detects(drivers) {
                    Ok(true) => hits += w,
                    Ok(false) => {}
                    Err(e) => detect_err = Some(e),
                }
                Ok(())
            })?;
        }
        if let Some(e) = detect_err {
            return Err(e);
        }
        let mass = hits * &w_path;
        accept += &mass;
        by_output[x0] += mass;
    }
    let conditional_output = ExactDistribution::normalized(by_output);
    Ok(AcceptanceReport { p_accept: accept, conditional_output, outcome_count: en.count })
}

/// Exact probability that the detection process fires within `t` steps of
/// i.i.d. μ drivers (forward coupling).
pub fn exact_forward_coalescence<P: DetectionProcess>(rule: &TransitionRule, tracker: &P, t: usize) -> Result<Rational> {
    let mut en = Enumerator::new(rule, tracker);
    let law = en.unconditional()?;
    let laws = vec![law; t];
    let checker = Enumerator::new(rule, tracker);
    let mut total = Rational::zero();
    let mut err = None;
    en.driver_sequences(&laws, &mut |drivers, w| {
        match checker.detects(drivers) {
            Ok(true) => total += w,
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
        Ok(())
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiAverageCheck {
    pub t: usize,
    /// Σ_z π(z) P_z(C).
    #[serde(with = "pq")]
    pub lhs: Rational,
    /// Forward-coupling detection probability within t.
    #[serde(with = "pq")]
    pub rhs: Rational,
    pub equal: bool,
}

/// Compares the π-mixture of per-seed acceptance probabilities with the
/// forward detection probability. For `t = 0` both sides are the
/// probability that the process starts in its target.
pub fn pi_average_check<P: DetectionProcess>(
    kernel: &DiscreteKernel,
    rev: &ReversedKernel,
    rule: &TransitionRule,
    tracker: &P,
    t: usize,
) -> Result<PiAverageCheck> {
    let exact = kernel.require_exact()?;
    let mut lhs = Rational::zero();
    for (z, pz) in exact.pi.iter().enumerate() {
        if pz.is_positive() {
            lhs += pz * exact_fill_report(kernel, rev, rule, tracker, t, z)?.p_accept;
        }
    }
    let rhs = exact_forward_coalescence(rule, tracker, t)?;
    let equal = lhs == rhs;
    Ok(PiAverageCheck { t, lhs, rhs, equal })
}

/// Candidate window widths not exceeding `t_max`, in increasing order.
pub(crate) fn candidate_widths(policy: CheckPolicy, t_max: usize) -> Vec<usize> {
    policy.widths().take_while(|&t| t <= t_max).collect()
}

/// Runs the tracker over the window `[−t, 0]`, where `drivers[k]` is
/// `U_{−k}`. Returns whether it detects and the state reached from
/// `reference` at time 0.
pub(crate) fn window_detects<P: DetectionProcess>(tracker: &P, drivers: &[Driver], t: usize) -> Result<bool> {
    let mut state = tracker.initial();
    if tracker.in_target(&state) {
        return Ok(true);
    }
    for d in drivers[..t].iter().rev() {
        state = tracker.step(&state, d)?;
        if tracker.in_target(&state) {
            return Ok(true);
        }
    }
    Ok(false)
}

pub(crate) fn window_image(rule: &TransitionRule, drivers: &[Driver], t: usize, reference: usize) -> Result<usize> {
    drivers[..t].iter().rev().try_fold(reference, |x, d| rule.apply(x, d))
}

/// Exact joint law of (T, W, X_0) for the infinite-window algorithm started
/// from X_0 ~ π, restricted to T ≤ t_max.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTimeLaw {
    pub t_max: usize,
    /// (T, W, X_0) ↦ probability.
    pub cells: BTreeMap<(usize, usize, usize), Rational>,
    /// P(T > t_max).
    pub residual: Rational,
    pub pi: Vec<Rational>,
}

impl JointTimeLaw {
    pub fn t_law(&self) -> BTreeMap<usize, Rational> {
        let mut out = BTreeMap::new();
        for ((t, _, _), p) in &self.cells {
            *out.entry(*t).or_insert_with(Rational::zero) += p;
        }
        out
    }

    /// (T, X_0) ↦ probability.
    pub fn t_x0_law(&self) -> BTreeMap<(usize, usize), Rational> {
        let mut out = BTreeMap::new();
        for ((t, _, x0), p) in &self.cells {
            *out.entry((*t, *x0)).or_insert_with(Rational::zero) += p;
        }
        out.retain(|_, p: &mut Rational| !p.is_zero());
        out
    }

    pub fn w_marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.pi.len()];
        for ((_, w, _), p) in &self.cells {
            out[*w] += p;
        }
        out
    }

    /// P(W = w, X_0 = x, T = t) = π(w) · P(X_0 = x, T = t) for every cell.
    pub fn factorizes(&self) -> bool {
        let tx = self.t_x0_law();
        let n = self.pi.len();
        tx.iter().all(|((t, x0), p)| {
            (0..n).all(|w| {
                let cell = self.cells.get(&(*t, w, *x0)).cloned().unwrap_or_else(Rational::zero);
                cell == &self.pi[w] * p
            })
        }) && self.cells.iter().all(|((t, _, x0), _)| tx.contains_key(&(*t, *x0)) || true)
    }
}

pub fn exact_joint_t_w<P: DetectionProcess>(
    kernel: &DiscreteKernel,
    rev: &ReversedKernel,
    rule: &TransitionRule,
    tracker: &P,
    t_max: usize,
    policy: CheckPolicy,
) -> Result<JointTimeLaw> {
    check_sizes(kernel, rev, rule)?;
    let exact = kernel.require_exact()?;
    let rev_exact = rev.require_exact()?;
    let widths = candidate_widths(policy, t_max);
    let mut en = Enumerator::new(rule, tracker);
    let mut cells: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
    let mut total = Rational::zero();
    for (x0, p0) in exact.pi.iter().enumerate() {
        if p0.is_zero() {
            continue;
        }
        // backward[k] = X_{-k}; drivers[k] = U_{-k} carries X_{-k-1} to X_{-k}.
        for (backward, w_path) in paths(rev_exact, x0, t_max) {
            let laws = (0..t_max).map(|k| en.conditional(backward[k + 1], backward[k])).collect::<Result<Vec<_>>>()?;
            let base = p0 * &w_path;
            let mut err = None;
            en.driver_sequences(&laws, &mut |drivers, w| {
                for &t in &widths {
                    match window_detects(tracker, drivers, t) {
                        Ok(true) => {
                            let mass = &base * w;
                            total += &mass;
                            *cells.entry((t, backward[t], x0)).or_insert_with(Rational::zero) += mass;
                            return Ok(());
                        }
                        Ok(false) => {}
                        Err(e) => {
                            err = Some(e);
                            return Ok(());
                        }
                    }
                }
                Ok(())
            })?;
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    cells.retain(|_, p| !p.is_zero());
    Ok(JointTimeLaw { t_max, cells, residual: Rational::one() - total, pi: exact.pi.clone() })
}

/// Exact law of (T, output) for coupling from the past with i.i.d. drivers
/// U_0, U_{-1}, …, restricted to T ≤ t_max.
#[derive(Clone, Debug, PartialEq)]
pub struct CftpTimeLaw {
    pub t_max: usize,
    pub cells: BTreeMap<(usize, usize), Rational>,
    pub residual: Rational,
}

impl CftpTimeLaw {
    pub fn t_law(&self) -> BTreeMap<usize, Rational> {
        let mut out = BTreeMap::new();
        for ((t, _), p) in &self.cells {
            *out.entry(*t).or_insert_with(Rational::zero) += p;
        }
        out
    }
}

pub fn exact_cftp_time_law<P: DetectionProcess>(
    rule: &TransitionRule,
    tracker: &P,
    t_max: usize,
    policy: CheckPolicy,
) -> Result<CftpTimeLaw> {
    let widths = candidate_widths(policy, t_max);
    let mut en = Enumerator::new(rule, tracker);
    let law = en.unconditional()?;
    let laws = vec![law; t_max];
    let mut cells: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let mut total = Rational::zero();
    let mut err = None;
    en.driver_sequences(&laws, &mut |drivers, w| {
        for &t in &widths {
            let hit =
                window_detects(tracker, drivers, t).and_then(
                    |hit| {
                        if hit {
                            window_image(rule, drivers, t, 0).map(Some)
                        } else {
                            Ok(None)
                        }
                    },
                );
            match hit {
                Ok(Some(out)) => {
                    total += w;
                    *cells.entry((t, out)).or_insert_with(Rational::zero) += w;
                    return Ok(());
                }
                Ok(None) => {}
                Err(e) => {
                    err = Some(e);
                    return Ok(());
                }
            }
        }
        Ok(())
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    cells.retain(|_, p| !p.is_zero());
    Ok(CftpTimeLaw { t_max, cells, residual: Rational::one() - total })
}

/// Joint law of (x_prev, x_next, driver) computed two ways.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesCheck {
    /// x_prev ~ π, u ~ μ, x_next = φ(x_prev, u).
    pub forward: BTreeMap<(usize, usize, DriverKey), Rational>,
    /// x_next ~ π, x_prev ~ K̃(x_next, ·), u ~ L(U | φ(x_prev, U) = x_next).
    pub backward: BTreeMap<(usize, usize, DriverKey), Rational>,
    pub equal: bool,
}

pub fn bayes_consistency(kernel: &DiscreteKernel, rev: &ReversedKernel, rule: &TransitionRule) -> Result<BayesCheck> {
    check_sizes(kernel, rev, rule)?;
    let exact = kernel.require_exact()?;
    let rev_exact = rev.require_exact()?;
    let n = kernel.size();
    let mut forward = BTreeMap::new();
    let atoms = rule.enumerate_drivers(ENUMERATION_CAP)?;
    for (x, px) in exact.pi.iter().enumerate() {
        for a in &atoms {
            let y = rule.apply(x, &a.driver)?;
            *forward.entry((x, y, a.driver.key())).or_insert_with(Rational::zero) += px * &a.prob;
        }
    }
    let mut backward = BTreeMap::new();
    for y in 0..n {
        for x in 0..n {
            let w = &exact.pi[y] * &rev_exact[y][x];
            if w.is_zero() {
                continue;
            }
            for a in rule.conditional_atoms(x, y, ENUMERATION_CAP)? {
                *backward.entry((x, y, a.driver.key())).or_insert_with(Rational::zero) += &w * &a.prob;
            }
        }
    }
    forward.retain(|_, p: &mut Rational| !p.is_zero());
    backward.retain(|_, p: &mut Rational| !p.is_zero());
    let equal = forward == backward;
    Ok(BayesCheck { forward, backward, equal })
}

/// Serializes `(key, rational)` maps as `{"key": "p/q"}` objects.
pub(crate) fn serialize_law<S: Serializer>(law: &BTreeMap<usize, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(law.iter().map(|(k, v)| (k.to_string(), fmt_pq(v))))
}
