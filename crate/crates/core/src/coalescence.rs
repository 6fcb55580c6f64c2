//! Coalescence detection.
//!
//! A detection process is driven by the drivers alone: `D_0 = d_0`,
//! `D_s = δ(D_{s−1}, U_s)`, and detection is the event that `D_s` enters
//! the target set for some `s ≤ t`. A sound process only enters the target
//! when every trajectory `Y_s(x)` has merged.

use fixedbitset::FixedBitSet;

use crate::chain::PartialOrder;
use crate::error::{Error, Result};
use crate::model_zoo::{MtfDetection, MtfDetectionState};
use crate::rules::{Driver, Monotonicity, TransitionRule};

pub trait DetectionProcess {
    type State: Clone + std::fmt::Debug;

    fn initial(&self) -> Self::State;

    fn step(&self, state: &Self::State, driver: &Driver) -> Result<Self::State>;

    fn in_target(&self, state: &Self::State) -> bool;
}

/// Current image {Y_s(x) : x ∈ X}, as a bitset over states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageSet(FixedBitSet);

impl ImageSet {
    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        ImageSet(bits)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(x)
    }

    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    /// The single state, if the image is a singleton.
    pub fn singleton(&self) -> Option<usize> {
        let mut it = self.0.ones();
        match (it.next(), it.next()) {
            (Some(x), None) => Some(x),
            _ => None,
        }
    }
}

/// Exact tracking of every trajectory; detects iff the image is a singleton.
#[derive(Clone, Copy, Debug)]
pub struct FullTracking<'r> {
    rule: &'r TransitionRule,
}

impl<'r> FullTracking<'r> {
    pub fn new(rule: &'r TransitionRule) -> Self {
        FullTracking { rule }
    }
}

impl DetectionProcess for FullTracking<'_> {
    type State = ImageSet;

    fn initial(&self) -> ImageSet {
        ImageSet::full(self.rule.num_states())
    }

    fn step(&self, state: &ImageSet, driver: &Driver) -> Result<ImageSet> {
        let mut next = FixedBitSet::with_capacity(self.rule.num_states());
        for x in state.0.ones() {
            next.insert(self.rule.apply(x, driver)?);
        }
        Ok(ImageSet(next))
    }

    fn in_target(&self, state: &ImageSet) -> bool {
        state.len() <= 1
    }
}

/// The pair (L_s, V_s) squeezing every trajectory of a monotone rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundingInterval {
    pub lower: usize,
    pub upper: usize,
}

/// Two-endpoint bounding for monotone rules, started from (0̂, 1̂).
#[derive(Clone, Copy, Debug)]
pub struct MonotoneBounding<'r> {
    rule: &'r TransitionRule,
    bottom: usize,
    top: usize,
}

impl<'r> MonotoneBounding<'r> {
    /// Requires the rule to be certified monotone for `order`, and the order
    /// to have a bottom and a top.
    pub fn new(rule: &'r TransitionRule, order: Option<&PartialOrder>) -> Result<Self> {
        if rule.is_monotone(order)? != Monotonicity::Monotone {
            return Err(Error::NotMonotone);
        }
        let order = order.ok_or(Error::NoOrder)?;
        let (bottom, top) = order.bottom().zip(order.top()).ok_or(Error::NoBounds)?;
        Ok(MonotoneBounding { rule, bottom, top })
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }
}

impl DetectionProcess for MonotoneBounding<'_> {
    type State = BoundingInterval;

    fn initial(&self) -> BoundingInterval {
        BoundingInterval { lower: self.bottom, upper: self.top }
    }

    fn step(&self, state: &BoundingInterval, driver: &Driver) -> Result<BoundingInterval> {
        Ok(BoundingInterval { lower: self.rule.apply(state.lower, driver)?, upper: self.rule.apply(state.upper, driver)? })
    }

    fn in_target(&self, state: &BoundingInterval) -> bool {
        state.lower == state.upper
    }
}

/// Outcome of driving a detection process.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection<S> {
    pub detected: bool,
    /// First s with D_s in the target, counting s = 0.
    pub first_hit: Option<usize>,
    pub final_state: S,
    /// Number of steps actually taken.
    pub steps: usize,
}

/// Runs the process over every driver and reports the first hit.
pub fn run_detection<P: DetectionProcess>(process: &P, drivers: &[Driver]) -> Result<Detection<P::State>> {
    drive(process, drivers, false)
}

/// Like [`run_detection`] but stops at the first hit.
pub fn first_detection<P: DetectionProcess>(process: &P, drivers: &[Driver]) -> Result<Detection<P::State>> {
    drive(process, drivers, true)
}

fn drive<P: DetectionProcess>(process: &P, drivers: &[Driver], stop_at_hit: bool) -> Result<Detection<P::State>> {
    let mut state = process.initial();
    let mut first_hit = process.in_target(&state).then_some(0);
    let mut steps = 0;
    for (s, driver) in drivers.iter().enumerate() {
        if stop_at_hit && first_hit.is_some() {
            break;
        }
        state = process.step(&state, driver)?;
        steps += 1;
        if first_hit.is_none() && process.in_target(&state) {
            first_hit = Some(s + 1);
        }
    }
    Ok(Detection { detected: first_hit.is_some(), first_hit, final_state: state, steps })
}

/// A detection process chosen at run time.
#[derive(Clone, Copy, Debug)]
pub enum Tracker<'r> {
    Full(FullTracking<'r>),
    Bounding(MonotoneBounding<'r>),
    Mtf(MtfDetection),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrackerState {
    Image(ImageSet),
    Interval(BoundingInterval),
    Requested(MtfDetectionState),
}

impl DetectionProcess for Tracker<'_> {
    type State = TrackerState;

    fn initial(&self) -> TrackerState {
        match self {
            Tracker::Full(p) => TrackerState::Image(p.initial()),
            Tracker::Bounding(p) => TrackerState::Interval(p.initial()),
            Tracker::Mtf(p) => TrackerState::Requested(p.initial()),
        }
    }

    fn step(&self, state: &TrackerState, driver: &Driver) -> Result<TrackerState> {
        match (self, state) {
            (Tracker::Full(p), TrackerState::Image(s)) => p.step(s, driver).map(TrackerState::Image),
            (Tracker::Bounding(p), TrackerState::Interval(s)) => p.step(s, driver).map(TrackerState::Interval),
            (Tracker::Mtf(p), TrackerState::Requested(s)) => p.step(s, driver).map(TrackerState::Requested),
            _ => Err(Error::InvalidInput("tracker state does not belong to this tracker".into())),
        }
    }

    fn in_target(&self, state: &TrackerState) -> bool {
        match (self, state) {
            (Tracker::Full(p), TrackerState::Image(s)) => p.in_target(s),
            (Tracker::Bounding(p), TrackerState::Interval(s)) => p.in_target(s),
            (Tracker::Mtf(p), TrackerState::Requested(s)) => p.in_target(s),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_zoo::{random_walk_chain, toy_chain};
    use crate::rules::RULE_ENUMERATION_CAP;

    fn atoms(seq: &[usize]) -> Vec<Driver> {
        seq.iter().map(|&a| Driver::Atom(a)).collect()
    }

    #[test]
    fn full_tracking_toy() {
        let toy = toy_chain();
        let full = FullTracking::new(&toy.monotone);
        let d = run_detection(&full, &atoms(&[0, 0])).unwrap();
        assert_eq!((d.detected, d.first_hit), (true, Some(2)));
        assert_eq!(d.final_state.singleton(), Some(0));
        let one = full.step(&full.initial(), &Driver::Atom(0)).unwrap();
        assert_eq!(one.states().collect::<Vec<_>>(), vec![0, 1]);
        let none = run_detection(&full, &[]).unwrap();
        assert_eq!((none.detected, none.first_hit, none.final_state.len()), (false, None, 3));
    }

    #[test]
    fn single_state_detects_at_zero() {
        let rule = TransitionRule::table_exact(1, vec![(crate::rational::ratio(1, 1), vec![0])]).unwrap();
        let d = run_detection(&FullTracking::new(&rule), &[]).unwrap();
        assert_eq!(d.first_hit, Some(0));
        let order = PartialOrder::linear(1);
        let b = MonotoneBounding::new(&rule, Some(&order)).unwrap();
        assert_eq!(run_detection(&b, &[]).unwrap().first_hit, Some(0));
    }

    #[test]
    fn bounding_toy() {
        let toy = toy_chain();
        let b = MonotoneBounding::new(&toy.monotone, toy.kernel.space().order()).unwrap();
        let s1 = b.step(&b.initial(), &Driver::Atom(0)).unwrap();
        assert_eq!(s1, BoundingInterval { lower: 0, upper: 1 });
        let d = run_detection(&b, &atoms(&[0, 0])).unwrap();
        assert_eq!((d.detected, d.final_state), (true, BoundingInterval { lower: 0, upper: 0 }));
        let d = run_detection(&b, &atoms(&[0, 1])).unwrap();
        assert_eq!((d.detected, d.final_state), (false, BoundingInterval { lower: 1, upper: 2 }));
    }

    #[test]
    fn bounding_requires_monotone_rule() {
        let toy = toy_chain();
        assert!(matches!(MonotoneBounding::new(&toy.independent, toy.kernel.space().order()), Err(Error::NotMonotone)));
        let antichain = PartialOrder::from_pairs(3, &[]).unwrap();
        assert!(matches!(MonotoneBounding::new(&toy.monotone, Some(&antichain)), Err(Error::NoBounds)));
    }

    #[test]
    fn first_detection_stops_early() {
        let toy = toy_chain();
        let full = FullTracking::new(&toy.monotone);
        let d = first_detection(&full, &atoms(&[0, 0, 1, 1])).unwrap();
        assert_eq!((d.steps, d.first_hit), (2, Some(2)));
        let d = run_detection(&full, &atoms(&[0, 0, 1, 1])).unwrap();
        assert_eq!((d.steps, d.final_state.singleton()), (4, Some(2)));
    }

    fn sequences(atom_count: usize, len: usize) -> Vec<Vec<Driver>> {
        (0..atom_count.pow(len as u32))
            .map(|mut code| {
                (0..len)
                    .map(|_| {
                        let a = code % atom_count;
                        code /= atom_count;
                        Driver::Atom(a)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn bounding_matches_full_tracking_and_sandwiches() {
        for n in 1..=5 {
            let (k, rule) = random_walk_chain(n).unwrap();
            let full = FullTracking::new(&rule);
            let b = MonotoneBounding::new(&rule, k.space().order()).unwrap();
            for len in 0..=6 {
                for seq in sequences(2, len) {
                    let (mut img, mut iv) = (full.initial(), b.initial());
                    assert_eq!(full.in_target(&img), b.in_target(&iv));
                    for d in &seq {
                        img = full.step(&img, d).unwrap();
                        iv = b.step(&iv, d).unwrap();
                        assert!(img.states().all(|y| iv.lower <= y && y <= iv.upper));
                        assert!(img.contains(iv.lower) && img.contains(iv.upper));
                        assert_eq!(full.in_target(&img), b.in_target(&iv));
                    }
                }
            }
        }
    }

    #[test]
    fn dynamic_tracker_agrees_with_static() {
        let toy = toy_chain();
        let drivers = toy.independent.enumerate_drivers(RULE_ENUMERATION_CAP).unwrap();
        let full = FullTracking::new(&toy.independent);
        let dynamic = Tracker::Full(full);
        for a in &drivers {
            for b in &drivers {
                let seq = [a.driver.clone(), b.driver.clone()];
                assert_eq!(run_detection(&full, &seq).unwrap().first_hit, run_detection(&dynamic, &seq).unwrap().first_hit);
            }
        }
    }
}
