//! Finite state spaces, row-stochastic kernels, stationary distributions and
//! time reversal.
//!
//! Every kernel carries a float matrix used by the samplers. Kernels built
//! from rational entries (or from decimals that convert exactly) also carry
//! an exact copy, which the enumeration oracle requires.

use fixedbitset::FixedBitSet;
use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{exact_stationary, exactify, to_f64, Rational};

/// Row-sum tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance for stationarity and reversal identities.
pub const STATIONARY_TOL: f64 = 1e-9;
/// Above this size the stationary solve switches to power iteration.
pub const DENSE_SOLVE_LIMIT: usize = 2000;

/// A partial order on state indices, stored as its full `≤` relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOrder {
    // leq[x][y] iff x ≤ y
    leq: Vec<FixedBitSet>,
    linear: bool,
}

impl PartialOrder {
    /// The natural order 0 < 1 < … < n−1.
    pub fn linear(n: usize) -> Self {
        let leq = (0..n)
            .map(|x| {
                let mut row = FixedBitSet::with_capacity(n);
                row.insert_range(x..n);
                row
            })
            .collect();
        PartialOrder { leq, linear: true }
    }

    /// Builds the reflexive-transitive closure of `pairs` (each `(x, y)`
    /// meaning x ≤ y) and rejects cycles.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut leq: Vec<FixedBitSet> = (0..n)
            .map(|x| {
                let mut row = FixedBitSet::with_capacity(n);
                row.insert(x);
                row
            })
            .collect();
        for &(x, y) in pairs {
            if x >= n || y >= n {
                return Err(Error::BadOrder(format!("pair ({x}, {y}) out of range")));
            }
            leq[x].insert(y);
        }
        // Warshall closure.
        for k in 0..n {
            for x in 0..n {
                if leq[x].contains(k) {
                    let row_k = leq[k].clone();
                    leq[x].union_with(&row_k);
                }
            }
        }
        for x in 0..n {
            for y in leq[x].ones() {
                if y != x && leq[y].contains(x) {
                    return Err(Error::BadOrder(format!("{x} and {y} are mutually related")));
                }
            }
        }
        let linear = (0..n).all(|x| (0..n).all(|y| leq[x].contains(y) == (x <= y)));
        Ok(PartialOrder { leq, linear })
    }

    pub fn size(&self) -> usize {
        self.leq.len()
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x].contains(y)
    }

    /// True when this is exactly the natural order on indices.
    pub fn is_natural_linear(&self) -> bool {
        self.linear
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.size()).find(|&b| self.leq[b].count_ones(..) == self.size())
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.size()).find(|&t| (0..self.size()).all(|x| self.leq(x, t)))
    }

    /// Every comparable pair `(x, y)` with x ≤ y, x ≠ y.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size()).flat_map(move |x| self.leq[x].ones().filter(move |&y| y != x).map(move |y| (x, y)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    size: usize,
    labels: Option<Vec<String>>,
    order: Option<PartialOrder>,
}

impl StateSpace {
    pub fn new(size: usize) -> Self {
        StateSpace { size, labels: None, order: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.size {
            return Err(Error::InvalidInput(format!("{} labels for {} states", labels.len(), self.size)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_order(mut self, order: PartialOrder) -> Result<Self> {
        if order.size() != self.size {
            return Err(Error::BadOrder(format!("order on {} states, space has {}", order.size(), self.size)));
        }
        self.order = Some(order);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn order(&self) -> Option<&PartialOrder> {
        self.order.as_ref()
    }

    pub fn bottom(&self) -> Option<usize> {
        self.order.as_ref().and_then(PartialOrder::bottom)
    }

    pub fn top(&self) -> Option<usize> {
        self.order.as_ref().and_then(PartialOrder::top)
    }

    pub fn label(&self, state: usize) -> String {
        match &self.labels {
            Some(l) => l[state].clone(),
            None => state.to_string(),
        }
    }

    pub fn check(&self, state: usize) -> Result<()> {
        if state < self.size {
            Ok(())
        } else {
            Err(Error::StateOutOfRange { state, size: self.size })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadDistribution("empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::BadDistribution(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::BadDistribution(format!("weights sum to {total}")));
        }
        Ok(ProbabilityVector(weights))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_row(&self.0, rng.gen::<f64>())
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Index of the half-open CDF segment containing `u`; zero-mass entries are
/// never returned.
pub(crate) fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (y, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = y;
            if u < acc {
                return y;
            }
        }
    }
    last
}

/// Exact companion data of a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactChain {
    pub matrix: Vec<Vec<Rational>>,
    pub pi: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub struct DiscreteKernel {
    space: StateSpace,
    matrix: Vec<Vec<f64>>,
    pi: ProbabilityVector,
    exact: Option<ExactChain>,
}

fn check_rows(matrix: &[Vec<f64>]) -> Result<()> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::InvalidInput("kernel needs at least one state".into()));
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidInput(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::BadEntry { row: i, col: j, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NonStochasticRow { row: i, sum });
        }
    }
    Ok(())
}

fn stationarity_defect(matrix: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = matrix.len();
    (0..n)
        .map(|y| {
            let flow: f64 = (0..n).map(|x| pi[x] * matrix[x][y]).sum();
            (flow - pi[y]).abs()
        })
        .fold(0.0, f64::max)
}

/// Validates a float kernel; computes π when it is not supplied.
pub fn validate_kernel(matrix: Vec<Vec<f64>>, pi: Option<ProbabilityVector>) -> Result<DiscreteKernel> {
    check_rows(&matrix)?;
    let pi = match pi {
        Some(pi) => {
            if pi.len() != matrix.len() {
                return Err(Error::BadDistribution(format!("pi has {} entries for {} states", pi.len(), matrix.len())));
            }
            let max_dev = stationarity_defect(&matrix, pi.as_slice());
            if max_dev > STATIONARY_TOL {
                return Err(Error::NotStationary { max_dev });
            }
            pi
        }
        None => solve_stationary(&matrix)?,
    };
    let exact = exact_companion(&matrix, &pi);
    Ok(DiscreteKernel { space: StateSpace::new(matrix.len()), matrix, pi, exact })
}

fn exact_companion(matrix: &[Vec<f64>], pi: &ProbabilityVector) -> Option<ExactChain> {
    let exact: Vec<Vec<Rational>> =
        matrix.iter().map(|row| row.iter().map(|&v| exactify(v)).collect::<Option<Vec<_>>>()).collect::<Option<_>>()?;
    if !exact.iter().all(|row| row.iter().sum::<Rational>().is_one()) {
        return None;
    }
    let supplied: Option<Vec<Rational>> = pi.as_slice().iter().map(|&p| exactify(p)).collect();
    let pi = match supplied {
        Some(p) if is_exactly_stationary(&exact, &p) => p,
        _ => exact_stationary(&exact)?,
    };
    Some(ExactChain { matrix: exact, pi })
}

fn is_exactly_stationary(matrix: &[Vec<Rational>], pi: &[Rational]) -> bool {
    let n = matrix.len();
    pi.len() == n
        && pi.iter().sum::<Rational>().is_one()
        && (0..n).all(|y| (0..n).map(|x| &pi[x] * &matrix[x][y]).sum::<Rational>() == pi[y])
}

impl DiscreteKernel {
    /// Builds a kernel from exact entries. Rows must sum to exactly one and a
    /// supplied π must be exactly stationary.
    pub fn from_rational(matrix: Vec<Vec<Rational>>, pi: Option<Vec<Rational>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidInput("kernel needs at least one state".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(j) = row.iter().position(|v| v.is_negative()) {
                return Err(Error::BadEntry { row: i, col: j, value: to_f64(&row[j]) });
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::NonStochasticRow { row: i, sum: to_f64(&sum) });
            }
        }
        let pi = match pi {
            Some(pi) => {
                if !is_exactly_stationary(&matrix, &pi) {
                    let fm: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(to_f64).collect()).collect();
                    let fp: Vec<f64> = pi.iter().map(to_f64).collect();
                    let max_dev = if fp.len() == n { stationarity_defect(&fm, &fp) } else { f64::INFINITY };
                    return Err(Error::NotStationary { max_dev });
                }
                pi
            }
            None => {
                let fm: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(to_f64).collect()).collect();
                // Surfaces multiple recurrent classes with the same error as the float path.
                closed_class_count_check(&fm)?;
                exact_stationary(&matrix).ok_or_else(|| Error::NoUniqueStationary("singular exact system".into()))?
            }
        };
        let fmatrix: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let fpi = ProbabilityVector(pi.iter().map(to_f64).collect());
        Ok(DiscreteKernel { space: StateSpace::new(n), matrix: fmatrix, pi: fpi, exact: Some(ExactChain { matrix, pi }) })
    }

    pub fn with_space(mut self, space: StateSpace) -> Result<Self> {
        if space.size() != self.size() {
            return Err(Error::InvalidInput(format!("space of {} states for a kernel on {}", space.size(), self.size())));
        }
        self.space = space;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    pub fn pi(&self) -> &ProbabilityVector {
        &self.pi
    }

    pub fn exact(&self) -> Option<&ExactChain> {
        self.exact.as_ref()
    }

    pub fn require_exact(&self) -> Result<&ExactChain> {
        self.exact.as_ref().ok_or_else(|| Error::IrrationalEntries("kernel entries are not all rationals with denominator <= 10^6".into()))
    }
}

/// Number of closed communicating classes must be exactly one.
fn closed_class_count_check(matrix: &[Vec<f64>]) -> Result<()> {
    let n = matrix.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (x, row) in matrix.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                g.add_edge(nodes[x], nodes[y], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut closed = 0;
    for comp in &sccs {
        let mut member = FixedBitSet::with_capacity(n);
        for v in comp {
            member.insert(v.index());
        }
        let leaves = comp.iter().any(|v| matrix[v.index()].iter().enumerate().any(|(y, &p)| p > 0.0 && !member.contains(y)));
        if !leaves {
            closed += 1;
        }
    }
    if closed == 1 {
        Ok(())
    } else {
        Err(Error::NoUniqueStationary(format!("{closed} closed communicating classes")))
    }
}

/// Stationary distribution of a chain with a single recurrent class.
pub fn solve_stationary(matrix: &[Vec<f64>]) -> Result<ProbabilityVector> {
    check_rows(matrix)?;
    closed_class_count_check(matrix)?;
    let n = matrix.len();
    let mut pi: Vec<f64> = if n <= DENSE_SOLVE_LIMIT {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = matrix[j][i] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let sol = a.lu().solve(&b).ok_or_else(|| Error::NoUniqueStationary("singular linear system".into()))?;
        sol.iter().copied().collect()
    } else {
        power_iteration(matrix)?
    };
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let max_dev = stationarity_defect(matrix, &pi);
    if max_dev > STATIONARY_TOL {
        return Err(Error::NoUniqueStationary(format!("solution defect {max_dev:e}")));
    }
    Ok(ProbabilityVector(pi))
}

fn power_iteration(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = matrix.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        // Lazy chain (I + K)/2: same stationary law, aperiodic.
        let mut next: Vec<f64> = pi.iter().map(|p| 0.5 * p).collect();
        for (x, row) in matrix.iter().enumerate() {
            let mass = 0.5 * pi[x];
            for (y, &p) in row.iter().enumerate() {
                next[y] += mass * p;
            }
        }
        let diff = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if diff < 1e-12 {
            return Ok(pi);
        }
    }
    Err(Error::NoUniqueStationary("power iteration did not converge".into()))
}

/// What to do with rows of K̃ at states where π vanishes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZeroMassPolicy {
    #[default]
    Strict,
    /// Fill such rows with the uniform distribution; they are never visited
    /// from a seed that is absolutely continuous with respect to π.
    Permissive,
}

/// The time-reversed kernel K̃(y, x) = π(x) K(x, y) / π(y).
#[derive(Clone, Debug)]
pub struct ReversedKernel {
    matrix: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<Rational>>>,
}

impl ReversedKernel {
    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn entry(&self, y: usize, x: usize) -> f64 {
        self.matrix[y][x]
    }

    pub fn exact(&self) -> Option<&[Vec<Rational>]> {
        self.exact.as_deref()
    }

    pub fn require_exact(&self) -> Result<&[Vec<Rational>]> {
        self.exact().ok_or_else(|| Error::IrrationalEntries("reversed kernel has no exact form".into()))
    }

    /// The state reached from `state` when the backward step is driven by
    /// the uniform draw `u`.
    pub fn state_from_uniform(&self, state: usize, u: f64) -> usize {
        sample_row(&self.matrix[state], u)
    }
}

pub fn reverse_kernel(kernel: &DiscreteKernel, policy: ZeroMassPolicy) -> Result<ReversedKernel> {
    let n = kernel.size();
    let pi = kernel.pi();
    let mut matrix = vec![vec![0.0; n]; n];
    for y in 0..n {
        if pi[y] <= 0.0 {
            match policy {
                ZeroMassPolicy::Strict => return Err(Error::ZeroMassState { state: y }),
                ZeroMassPolicy::Permissive => {
                    matrix[y] = vec![1.0 / n as f64; n];
                    continue;
                }
            }
        }
        for x in 0..n {
            matrix[y][x] = pi[x] * kernel.entry(x, y) / pi[y];
        }
        // Absorb rounding so rows stay stochastic.
        let sum: f64 = matrix[y].iter().sum();
        matrix[y].iter_mut().for_each(|v| *v /= sum);
    }
    let exact = kernel.exact().map(|ex| {
        (0..n)
            .map(|y| {
                if ex.pi[y].is_zero() {
                    vec![Rational::new(1.into(), (n as i64).into()); n]
                } else {
                    (0..n).map(|x| &ex.pi[x] * &ex.matrix[x][y] / &ex.pi[y]).collect()
                }
            })
            .collect()
    });
    Ok(ReversedKernel { matrix, exact })
}

/// One step of the reversed chain.
pub fn step_backward<R: Rng + ?Sized>(rev: &ReversedKernel, state: usize, rng: &mut R) -> usize {
    rev.state_from_uniform(state, rng.gen::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Vec<Vec<f64>> {
        vec![vec![0.5, 0.5, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 0.5, 0.5]]
    }

    #[test]
    fn toy_kernel_validates_with_uniform_pi() {
        let k = validate_kernel(toy(), Some(ProbabilityVector::uniform(3))).unwrap();
        assert_eq!(k.exact().unwrap().pi, vec![ratio(1, 3); 3]);
    }

    #[test]
    fn identity_accepts_any_supplied_pi() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let k = validate_kernel(id.clone(), Some(ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap())).unwrap();
        assert_eq!(k.pi().as_slice(), &[1.0, 0.0, 0.0]);
        assert!(matches!(validate_kernel(id, None), Err(Error::NoUniqueStationary(_))));
    }

    #[test]
    fn two_state_stationary() {
        let m = vec![vec![0.9, 0.1], vec![0.3, 0.7]];
        let k = validate_kernel(m.clone(), None).unwrap();
        assert!((k.pi()[0] - 0.75).abs() < 1e-12 && (k.pi()[1] - 0.25).abs() < 1e-12);
        assert_eq!(k.exact().unwrap().pi, vec![ratio(3, 4), ratio(1, 4)]);
        let rev = reverse_kernel(&k, ZeroMassPolicy::Strict).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                assert!((rev.entry(y, x) - m[y][x]).abs() < 1e-12);
            }
        }
        assert_eq!(rev.exact().unwrap(), k.exact().unwrap().matrix.as_slice());
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(validate_kernel(vec![vec![0.5, 0.4], vec![0.5, 0.5]], None), Err(Error::NonStochasticRow { row: 0, .. })));
        assert!(matches!(
            validate_kernel(vec![vec![0.9, 0.1], vec![0.3, 0.7]], Some(ProbabilityVector::uniform(2))),
            Err(Error::NotStationary { .. })
        ));
        assert!(matches!(validate_kernel(vec![vec![1.5, -0.5], vec![0.5, 0.5]], None), Err(Error::BadEntry { .. })));
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let m = vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.2, 0.3], vec![0.3, 0.5, 0.2]];
        let pi = solve_stationary(&m).unwrap();
        for &p in pi.as_slice() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_mass_rows() {
        // State 2 is transient, so pi(2) = 0.
        let m = vec![vec![0.5, 0.5, 0.0], vec![0.5, 0.5, 0.0], vec![0.5, 0.0, 0.5]];
        let k = validate_kernel(m, None).unwrap();
        assert!(matches!(reverse_kernel(&k, ZeroMassPolicy::Strict), Err(Error::ZeroMassState { state: 2 })));
        let rev = reverse_kernel(&k, ZeroMassPolicy::Permissive).unwrap();
        assert_eq!(rev.matrix()[2], vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn backward_step_from_uniform() {
        let k = validate_kernel(toy(), None).unwrap();
        let rev = reverse_kernel(&k, ZeroMassPolicy::Strict).unwrap();
        assert_eq!(rev.state_from_uniform(0, 0.49), 0);
        assert_eq!(rev.state_from_uniform(0, 0.5), 1);
        assert_eq!(rev.state_from_uniform(0, 0.999_999), 1);
        let id = validate_kernel(vec![vec![1.0, 0.0], vec![0.0, 1.0]], Some(ProbabilityVector::uniform(2))).unwrap();
        let rid = reverse_kernel(&id, ZeroMassPolicy::Strict).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(step_backward(&rid, 1, &mut rng), 1);
        }
    }

    #[test]
    fn backward_frequencies_match_row() {
        let k = validate_kernel(vec![vec![0.9, 0.1], vec![0.3, 0.7]], None).unwrap();
        let rev = reverse_kernel(&k, ZeroMassPolicy::Strict).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000;
        let zeros = (0..draws).filter(|_| step_backward(&rev, 1, &mut rng) == 0).count();
        assert!((zeros as f64 / draws as f64 - 0.3).abs() < 0.005);
    }

    #[test]
    fn orders() {
        let o = PartialOrder::from_pairs(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert!(o.leq(0, 3) && !o.leq(1, 2) && !o.leq(2, 1));
        assert_eq!((o.bottom(), o.top()), (Some(0), Some(3)));
        assert!(!o.is_natural_linear());
        assert!(PartialOrder::from_pairs(3, &[(0, 1), (1, 2)]).unwrap().is_natural_linear());
        assert!(matches!(PartialOrder::from_pairs(2, &[(0, 1), (1, 0)]), Err(Error::BadOrder(_))));
        let antichain = PartialOrder::from_pairs(2, &[]).unwrap();
        assert_eq!(antichain.bottom(), None);
    }

    #[test]
    fn rational_kernel_rejects_inexact_rows() {
        let m = vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(1, 2), ratio(1, 2)]];
        assert!(matches!(DiscreteKernel::from_rational(m, None), Err(Error::NonStochasticRow { .. })));
    }
}
