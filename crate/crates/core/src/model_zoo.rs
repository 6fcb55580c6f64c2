//! Canonical chains: the three-state toy walk, reflecting random walks on
//! {0, …, n}, birth–death chains, and the move-to-front list.

use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::chain::{DiscreteKernel, PartialOrder, StateSpace, STOCHASTIC_TOL};
use crate::coalescence::DetectionProcess;
use crate::error::{Error, Result};
use crate::rational::{exactify, ratio, Rational};
use crate::rules::{Driver, TransitionRule};

/// The three-state walk with holding 1/2 at the ends and its two rules.
#[derive(Clone, Debug)]
pub struct ToyChain {
    pub kernel: DiscreteKernel,
    /// Two atoms of mass 1/2: (0,1,2) ↦ (0,0,1) and (0,1,2) ↦ (1,2,2).
    pub monotone: TransitionRule,
    pub independent: TransitionRule,
}

pub fn toy_chain() -> ToyChain {
    let (kernel, monotone) = random_walk_chain(2).expect("n = 2 is valid");
    let independent = TransitionRule::independent(&kernel);
    ToyChain { kernel, monotone, independent }
}

/// Simple symmetric random walk on {0, …, n} holding with probability 1/2
/// at the endpoints, with its monotone two-atom rule (down / up).
pub fn random_walk_chain(n: usize) -> Result<(DiscreteKernel, TransitionRule)> {
    if n == 0 {
        return Err(Error::InvalidInput("random walk needs n >= 1".into()));
    }
    let size = n + 1;
    let down: Vec<usize> = (0..size).map(|x| x.saturating_sub(1)).collect();
    let up: Vec<usize> = (0..size).map(|x| (x + 1).min(n)).collect();
    let half = ratio(1, 2);
    let mut matrix = vec![vec![Rational::zero(); size]; size];
    for x in 0..size {
        matrix[x][down[x]] += &half;
        matrix[x][up[x]] += &half;
    }
    let kernel = DiscreteKernel::from_rational(matrix, Some(vec![ratio(1, size as i64); size]))?
        .with_space(StateSpace::new(size).with_order(PartialOrder::linear(size))?)?;
    let rule = TransitionRule::table_exact(size, vec![(half.clone(), down), (half, up)])?;
    Ok((kernel, rule))
}

/// Birth–death chain on {0, …, n}: from x move up with `up[x]`, down with
/// `down[x]`, otherwise hold. Returns the kernel (linear order attached) and
/// its inverse-CDF rule in the natural order, which is monotone whenever
/// `up[x] + down[x+1] <= 1` for all x.
pub fn birth_death_chain(up: &[Rational], down: &[Rational]) -> Result<(DiscreteKernel, TransitionRule)> {
    let size = up.len();
    if size == 0 || down.len() != size {
        return Err(Error::InvalidInput("up and down must have the same positive length".into()));
    }
    if !up[size - 1].is_zero() || !down[0].is_zero() {
        return Err(Error::InvalidInput("cannot move up from the top or down from the bottom".into()));
    }
    let mut matrix = vec![vec![Rational::zero(); size]; size];
    for x in 0..size {
        let hold = Rational::one() - &up[x] - &down[x];
        if up[x].is_negative() || down[x].is_negative() || hold.is_negative() {
            return Err(Error::InvalidInput(format!("bad probabilities at state {x}")));
        }
        if x + 1 < size {
            matrix[x][x + 1] = up[x].clone();
        }
        if x > 0 {
            matrix[x][x - 1] = down[x].clone();
        }
        matrix[x][x] = hold;
    }
    let kernel = DiscreteKernel::from_rational(matrix, None)?.with_space(StateSpace::new(size).with_order(PartialOrder::linear(size))?)?;
    let order: Vec<usize> = (0..size).collect();
    let rule = TransitionRule::inverse_cdf(&kernel, &order)?;
    Ok((kernel, rule))
}

/// Named chain presets: `toy`, `walk:n`, `mtf:n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Toy,
    Walk(usize),
    Mtf(usize),
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown chain preset {s:?}"));
        if s == "toy" {
            return Ok(Preset::Toy);
        }
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        let n: usize = arg.parse().map_err(|_| bad())?;
        match name {
            "walk" if n >= 1 => Ok(Preset::Walk(n)),
            "mtf" if (1..=MAX_MTF_RECORDS).contains(&n) => Ok(Preset::Mtf(n)),
            _ => Err(bad()),
        }
    }
}

/// Largest list length for which permutations are indexed as states.
pub const MAX_MTF_RECORDS: usize = 10;

/// A list arrangement: `arrangement[i]` is the record at position i.
/// Records are numbered 0..n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MtfState {
    arrangement: Vec<usize>,
}

impl MtfState {
    pub fn new(arrangement: Vec<usize>) -> Result<Self> {
        let n = arrangement.len();
        let mut seen = vec![false; n];
        for &r in &arrangement {
            if r >= n || std::mem::replace(&mut seen[r], true) {
                return Err(Error::InvalidInput("arrangement is not a permutation".into()));
            }
        }
        Ok(MtfState { arrangement })
    }

    pub fn identity(n: usize) -> Self {
        MtfState { arrangement: (0..n).collect() }
    }

    pub fn arrangement(&self) -> &[usize] {
        &self.arrangement
    }

    pub fn move_to_front(&mut self, record: usize) {
        if let Some(pos) = self.arrangement.iter().position(|&r| r == record) {
            self.arrangement[..=pos].rotate_right(1);
        }
    }

    /// Lehmer-code rank in 0..n!.
    pub fn rank(&self) -> usize {
        let n = self.arrangement.len();
        let mut rank = 0;
        for i in 0..n {
            let smaller = self.arrangement[i + 1..].iter().filter(|&&r| r < self.arrangement[i]).count();
            rank = rank * (n - i) + smaller;
        }
        rank
    }

    pub fn unrank(n: usize, mut rank: usize) -> Self {
        let mut digits = vec![0; n];
        for i in (0..n).rev() {
            let base = n - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let arrangement = digits.into_iter().map(|d| pool.remove(d)).collect();
        MtfState { arrangement }
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Request probabilities w_1, …, w_n.
#[derive(Clone, Debug, PartialEq)]
pub struct RequestWeights(Vec<f64>);

impl RequestWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.len() > MAX_MTF_RECORDS {
            return Err(Error::BadWeights(format!("need 1..={MAX_MTF_RECORDS} records")));
        }
        if w.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::BadWeights("request weights must be positive".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::BadWeights(format!("request weights sum to {total}")));
        }
        Ok(RequestWeights(w))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Stationary law of move-to-front, indexed by rank: the record in front is
/// record i with probability w_i, the next is j with probability
/// w_j / (1 − w_i), and so on.
pub fn mtf_stationary(weights: &RequestWeights) -> Vec<f64> {
    let w = weights.as_slice();
    let n = w.len();
    (0..factorial(n))
        .map(|rank| {
            let arrangement = MtfState::unrank(n, rank);
            let mut used = 0.0;
            let mut p = 1.0;
            for &r in &arrangement.arrangement()[..n - 1] {
                p *= w[r] / (1.0 - used);
                used += w[r];
            }
            p
        })
        .collect()
}

/// Move-to-front as a finite-atom rule on permutation ranks; the driver is
/// the requested record.
#[derive(Clone, Debug)]
pub struct MtfRule {
    weights: Vec<f64>,
    exact: Option<Vec<Rational>>,
    states: usize,
}

impl MtfRule {
    pub fn records(&self) -> usize {
        self.weights.len()
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn weight(&self, record: usize) -> f64 {
        self.weights[record]
    }

    pub fn exact_weights(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn apply_rank(&self, rank: usize, record: usize) -> usize {
        let mut s = MtfState::unrank(self.records(), rank);
        s.move_to_front(record);
        s.rank()
    }

    pub fn sample_request<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        crate::chain::sample_row(&self.weights, rng.gen::<f64>())
    }
}

/// Detection state for move-to-front: the set of records requested so far,
/// as a bitmask. The target is any set of size at least n − 1, since the
/// lone unrequested record (if any) is then forced to the back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MtfDetection {
    records: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MtfDetectionState {
    pub requested: u64,
}

impl MtfDetectionState {
    pub fn count(&self) -> usize {
        self.requested.count_ones() as usize
    }
}

impl MtfDetection {
    pub fn new(records: usize) -> Self {
        MtfDetection { records }
    }
}

impl DetectionProcess for MtfDetection {
    type State = MtfDetectionState;

    fn initial(&self) -> MtfDetectionState {
        MtfDetectionState { requested: 0 }
    }

    fn step(&self, state: &MtfDetectionState, driver: &Driver) -> Result<MtfDetectionState> {
        match driver {
            Driver::Atom(r) if *r < self.records => Ok(MtfDetectionState { requested: state.requested | (1 << r) }),
            _ => Err(Error::DriverMismatch { expected: "finite-atom" }),
        }
    }

    fn in_target(&self, state: &MtfDetectionState) -> bool {
        state.count() + 1 >= self.records
    }
}

/// The move-to-front rule on n! arrangements and its requested-set detector.
pub fn mtf_process(weights: &RequestWeights) -> (TransitionRule, MtfDetection) {
    let w = weights.as_slice().to_vec();
    let exact: Option<Vec<Rational>> = w.iter().map(|&p| exactify(p)).collect();
    let exact = exact.filter(|e| e.iter().sum::<Rational>().is_one());
    let n = w.len();
    let rule = MtfRule { weights: w, exact, states: factorial(n) };
    (TransitionRule::from_mtf(rule), MtfDetection::new(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalescence::{run_detection, FullTracking};
    use crate::rules::{Monotonicity, RULE_ENUMERATION_CAP};

    #[test]
    fn mtf_stationary_law() {
        let w = RequestWeights::new(vec![0.5, 0.3, 0.2]).unwrap();
        let pi = mtf_stationary(&w);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let front = MtfState::new(vec![1, 0, 2]).unwrap().rank();
        assert!((pi[front] - 0.3 * 0.5 / 0.7).abs() < 1e-15);
        // Stationarity under one random request.
        let (rule, _) = mtf_process(&w);
        let mut next = vec![0.0; pi.len()];
        for (x, px) in pi.iter().enumerate() {
            for r in 0..3 {
                next[rule.apply(x, &Driver::Atom(r)).unwrap()] += px * w.as_slice()[r];
            }
        }
        for (a, b) in pi.iter().zip(&next) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn toy_kernel_entries() {
        let toy = toy_chain();
        assert_eq!(toy.kernel.exact().unwrap().matrix[1], vec![ratio(1, 2), ratio(0, 1), ratio(1, 2)]);
        assert_eq!(toy.kernel.exact().unwrap().pi, vec![ratio(1, 3); 3]);
        assert_eq!(toy.monotone.is_monotone(toy.kernel.space().order()).unwrap(), Monotonicity::Monotone);
        assert_eq!(toy.independent.enumerate_drivers(RULE_ENUMERATION_CAP).unwrap().len(), 8);
        toy.monotone.validate_against(&toy.kernel).unwrap();
        toy.independent.validate_against(&toy.kernel).unwrap();
    }

    #[test]
    fn one_step_walk() {
        let (k, rule) = random_walk_chain(1).unwrap();
        for row in &k.exact().unwrap().matrix {
            assert_eq!(row, &vec![ratio(1, 2), ratio(1, 2)]);
        }
        rule.validate_against(&k).unwrap();
    }

    #[test]
    fn walk_rules_validate_exactly() {
        for n in 1..=32 {
            let (k, rule) = random_walk_chain(n).unwrap();
            rule.validate_against(&k).unwrap();
            assert_eq!(rule.is_monotone(k.space().order()).unwrap(), Monotonicity::Monotone);
        }
        assert!(random_walk_chain(0).is_err());
    }

    #[test]
    fn birth_death_monotone_rule() {
        let up = vec![ratio(1, 3), ratio(1, 4), ratio(0, 1)];
        let down = vec![ratio(0, 1), ratio(1, 4), ratio(1, 2)];
        let (k, rule) = birth_death_chain(&up, &down).unwrap();
        rule.validate_against(&k).unwrap();
        assert_eq!(rule.is_monotone(k.space().order()).unwrap(), Monotonicity::Monotone);
        // Detailed balance: pi(0)/3 = pi(1)/4, pi(1)/4 = pi(2)/2.
        assert_eq!(k.exact().unwrap().pi, vec![ratio(3, 9), ratio(4, 9), ratio(2, 9)]);
    }

    #[test]
    fn presets_parse() {
        assert_eq!("toy".parse::<Preset>().unwrap(), Preset::Toy);
        assert_eq!("walk:8".parse::<Preset>().unwrap(), Preset::Walk(8));
        assert_eq!("mtf:4".parse::<Preset>().unwrap(), Preset::Mtf(4));
        for bad in ["walk:0", "mtf:11", "walk", "grid:3", "walk:x"] {
            assert!(bad.parse::<Preset>().is_err(), "{bad}");
        }
    }

    #[test]
    fn permutation_ranks_round_trip() {
        for n in 1..=5 {
            for r in 0..factorial(n) {
                assert_eq!(MtfState::unrank(n, r).rank(), r);
            }
        }
        assert_eq!(MtfState::identity(4).rank(), 0);
    }

    #[test]
    fn move_to_front_moves() {
        let mut s = MtfState::new(vec![2, 0, 1]).unwrap();
        s.move_to_front(1);
        assert_eq!(s.arrangement(), &[1, 2, 0]);
        s.move_to_front(1);
        assert_eq!(s.arrangement(), &[1, 2, 0]);
        assert!(MtfState::new(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn mtf_detection_examples() {
        let (_, det) = mtf_process(&RequestWeights::uniform(3).unwrap());
        // Records are 0-based: requests "2, 1" are atoms 1, 0.
        let d = run_detection(&det, &[Driver::Atom(1), Driver::Atom(0)]).unwrap();
        assert!(d.detected);
        assert_eq!(d.first_hit, Some(2));
        assert_eq!(d.final_state.count(), 2);
        let (_, one) = mtf_process(&RequestWeights::uniform(1).unwrap());
        assert_eq!(run_detection(&one, &[]).unwrap().first_hit, Some(0));
    }

    #[test]
    fn mtf_detection_is_sound() {
        // Any driver sequence whose requested set reaches size n-1 leaves a
        // single arrangement, over all n! starting lists.
        for n in 1..=5 {
            let (rule, det) = mtf_process(&RequestWeights::uniform(n).unwrap());
            let full = FullTracking::new(&rule);
            let mut seqs: Vec<Vec<Driver>> = vec![vec![]];
            let mut frontier = seqs.clone();
            for _ in 0..n {
                frontier = frontier.iter().flat_map(|s| (0..n).map(move |a| [s.clone(), vec![Driver::Atom(a)]].concat())).collect();
                seqs.extend(frontier.iter().cloned());
            }
            for s in &seqs {
                let d = run_detection(&det, s).unwrap();
                if d.detected {
                    assert!(run_detection(&full, s).unwrap().detected, "n={n} seq={s:?}");
                }
            }
        }
    }

    #[test]
    fn mtf_rule_is_a_valid_kernel() {
        let w = RequestWeights::new(vec![0.5, 0.25, 0.25]).unwrap();
        let (rule, _) = mtf_process(&w);
        let k = rule.induced_kernel_exact().unwrap();
        for row in &k {
            assert!(row.iter().sum::<Rational>().is_one());
        }
        assert!(RequestWeights::new(vec![0.5, 0.6]).is_err());
        assert!(RequestWeights::new(vec![1.0, 0.0]).is_err());
    }
}
