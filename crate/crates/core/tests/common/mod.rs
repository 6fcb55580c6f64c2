#![allow(dead_code)]

use num_traits::{One, Zero};
use perfect_sampling::prelude::*;
use rand::Rng;

/// A random irreducible-enough chain on `n` states with a random finite-atom
/// rule; π is strictly positive.
pub struct RandomInstance {
    pub kernel: DiscreteKernel,
    pub rev: ReversedKernel,
    pub rule: TransitionRule,
}

fn random_weights<R: Rng>(k: usize, rng: &mut R) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|r| ratio(r, total)).collect()
}

pub fn random_instance<R: Rng>(n: usize, rng: &mut R) -> RandomInstance {
    loop {
        let atoms = rng.gen_range(2..=4);
        let weights = random_weights(atoms, rng);
        let maps: Vec<Vec<usize>> = (0..atoms).map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect()).collect();
        let rule = match TransitionRule::table_exact(n, weights.into_iter().zip(maps).collect()) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let matrix = rule.induced_kernel_exact().expect("exact rule");
        let Ok(kernel) = DiscreteKernel::from_rational(matrix, None) else { continue };
        if kernel.exact().unwrap().pi.iter().any(|p| p.is_zero()) {
            continue;
        }
        let rev = reverse_kernel(&kernel, ZeroMassPolicy::Strict).unwrap();
        return RandomInstance { kernel, rev, rule };
    }
}

/// Every driver sequence of length `len` over the atoms of `rule`.
pub fn all_sequences(rule: &TransitionRule, len: usize) -> Vec<Vec<Driver>> {
    let atoms: Vec<Driver> = rule.enumerate_drivers(1_000_000).unwrap().into_iter().map(|a| a.driver).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                atoms.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Images {φ_s ∘ … ∘ φ_1 (x)} of every state after each prefix.
pub fn images(rule: &TransitionRule, drivers: &[Driver]) -> Vec<Vec<usize>> {
    let n = rule.num_states();
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    for d in drivers {
        current = current.iter().map(|&x| rule.apply(x, d).unwrap()).collect();
        out.push(current.clone());
    }
    out
}

pub fn is_constant(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

pub fn pi_distribution(kernel: &DiscreteKernel) -> ExactDistribution {
    ExactDistribution::new(kernel.exact().unwrap().pi.clone()).unwrap()
}

pub fn sum(values: &[Rational]) -> Rational {
    values.iter().fold(Rational::zero(), |a, b| a + b)
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}
