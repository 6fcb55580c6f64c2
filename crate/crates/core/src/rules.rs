//! Transition rules (φ, μ): a deterministic update `φ(x, u)` together with
//! a law μ for the driver `u`, such that `K(x, B) = μ{u : φ(x, u) ∈ B}`.
//!
//! Besides forward application and unconditional driver sampling, every rule
//! can *impute* a driver given an observed transition, i.e. sample from
//! `L(U | φ(x_prev, U) = x_next)`. Rules with exact data can also enumerate
//! their driver atoms, which the oracle uses.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::chain::{DiscreteKernel, PartialOrder, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::model_zoo::MtfRule;
use crate::rational::{exactify, to_f64, Rational};

/// Default cap on exact driver enumerations.
pub const RULE_ENUMERATION_CAP: u64 = 1_000_000;

/// One draw of the driving randomness.
#[derive(Clone, Debug, PartialEq)]
pub enum Driver {
    /// A full destination table: state `x` moves to `table[x]`.
    Table(Vec<usize>),
    /// A point of the unit interval.
    Unit(f64),
    /// Index of one of finitely many atoms.
    Atom(usize),
}

/// Hashable identity of a driver, used to compare exact joint laws.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DriverKey {
    Table(Vec<usize>),
    Unit(u64),
    Atom(usize),
}

impl Driver {
    pub fn key(&self) -> DriverKey {
        match self {
            Driver::Table(t) => DriverKey::Table(t.clone()),
            Driver::Unit(u) => DriverKey::Unit(u.to_bits()),
            Driver::Atom(a) => DriverKey::Atom(*a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriverKind {
    Table,
    UnitInterval,
    FiniteAtom,
}

impl DriverKind {
    fn name(self) -> &'static str {
        match self {
            DriverKind::Table => "table",
            DriverKind::UnitInterval => "unit-interval",
            DriverKind::FiniteAtom => "finite-atom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Monotone,
    NotMonotone,
    Unknown,
}

/// A driver together with its exact probability.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverAtom {
    pub driver: Driver,
    pub prob: Rational,
}

#[derive(Clone, Debug)]
pub struct TransitionRule {
    n: usize,
    kind: RuleKind,
}

#[derive(Clone, Debug)]
enum RuleKind {
    Independent(IndependentRule),
    InverseCdf(InverseCdfRule),
    Table(TableRule),
    MoveToFront(MtfRule),
}

#[derive(Clone, Debug)]
struct IndependentRule {
    rows: Vec<Vec<(usize, f64)>>,
    exact_rows: Option<Vec<Vec<(usize, Rational)>>>,
}

#[derive(Clone, Debug)]
struct Segment {
    state: usize,
    lo: f64,
    hi: f64,
}

#[derive(Clone, Debug)]
struct ExactSegment {
    state: usize,
    lo: Rational,
    hi: Rational,
}

#[derive(Clone, Debug)]
struct InverseCdfRule {
    ordering: Vec<usize>,
    segments: Vec<Vec<Segment>>,
    exact: Option<Vec<Vec<ExactSegment>>>,
}

#[derive(Clone, Debug)]
struct TableAtom {
    p: f64,
    exact: Option<Rational>,
    map: Vec<usize>,
}

#[derive(Clone, Debug)]
struct TableRule {
    atoms: Vec<TableAtom>,
    // (x_prev, x_next) -> atoms mapping x_prev to x_next
    by_transition: HashMap<(usize, usize), Vec<usize>>,
}

/// Picks an index from `(index, weight)` pairs with probability proportional
/// to weight.
fn pick_weighted<R: Rng + ?Sized>(items: &[(usize, f64)], rng: &mut R) -> usize {
    let total: f64 = items.iter().map(|&(_, w)| w).sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for &(i, w) in items {
        if w > 0.0 {
            acc += w;
            if target < acc {
                return i;
            }
        }
    }
    items.iter().rev().find(|&&(_, w)| w > 0.0).map_or(items[0].0, |&(i, _)| i)
}

fn product_size<I: IntoIterator<Item = usize>>(sizes: I, cap: u64) -> Result<u64> {
    let mut total: u64 = 1;
    for s in sizes {
        total = total.saturating_mul(s as u64);
        if total > cap {
            return Err(Error::EnumerationTooLarge { cap });
        }
    }
    Ok(total)
}

/// Cartesian product of per-state choices, weights multiplied.
fn product_tables(choices: &[Vec<(usize, Rational)>]) -> Vec<DriverAtom> {
    let mut out = vec![(Vec::with_capacity(choices.len()), Rational::one())];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for (prefix, w) in &out {
            for (y, p) in options {
                let mut table = prefix.clone();
                table.push(*y);
                next.push((table, w * p));
            }
        }
        out = next;
    }
    out.into_iter().map(|(t, prob)| DriverAtom { driver: Driver::Table(t), prob }).collect()
}

fn no_exact() -> Error {
    Error::IrrationalEntries("rule has no exact driver law".into())
}

impl TransitionRule {
    /// Independent-transitions rule: each state moves independently
    /// according to its own row.
    pub fn independent(kernel: &DiscreteKernel) -> Self {
        let rows =
            kernel.matrix().iter().map(|row| row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(y, &p)| (y, p)).collect()).collect();
        let exact_rows = kernel.exact().map(|ex| {
            ex.matrix
                .iter()
                .map(|row| row.iter().enumerate().filter(|(_, p)| p.is_positive()).map(|(y, p)| (y, p.clone())).collect())
                .collect()
        });
        TransitionRule { n: kernel.size(), kind: RuleKind::Independent(IndependentRule { rows, exact_rows }) }
    }

    /// Inverse-probability-transform rule with driver uniform on [0, 1).
    /// `ordering` lists the states in the order their CDF segments are laid out.
    pub fn inverse_cdf(kernel: &DiscreteKernel, ordering: &[usize]) -> Result<Self> {
        let n = kernel.size();
        let mut seen = vec![false; n];
        if ordering.len() != n || ordering.iter().any(|&s| s >= n || std::mem::replace(&mut seen[s], true)) {
            return Err(Error::BadOrder("inverse-CDF ordering must be a permutation of the states".into()));
        }
        let segments = kernel
            .matrix()
            .iter()
            .map(|row| {
                let mut segs = Vec::new();
                let mut acc = 0.0;
                for &y in ordering {
                    if row[y] > 0.0 {
                        segs.push(Segment { state: y, lo: acc, hi: acc + row[y] });
                        acc += row[y];
                    }
                }
                if let Some(last) = segs.last_mut() {
                    last.hi = 1.0;
                }
                segs
            })
            .collect();
        let exact = kernel.exact().map(|ex| {
            ex.matrix
                .iter()
                .map(|row| {
                    let mut segs = Vec::new();
                    let mut acc = Rational::zero();
                    for &y in ordering {
                        if row[y].is_positive() {
                            let hi = &acc + &row[y];
                            segs.push(ExactSegment { state: y, lo: acc.clone(), hi: hi.clone() });
                            acc = hi;
                        }
                    }
                    segs
                })
                .collect()
        });
        Ok(TransitionRule { n, kind: RuleKind::InverseCdf(InverseCdfRule { ordering: ordering.to_vec(), segments, exact }) })
    }

    /// Finite-atom rule from float weights; weights that convert exactly
    /// (see [`exactify`]) also give the rule an exact law.
    pub fn table(n: usize, atoms: Vec<(f64, Vec<usize>)>) -> Result<Self> {
        let exact: Option<Vec<Rational>> = atoms.iter().map(|(p, _)| exactify(*p)).collect();
        let exact = exact.filter(|ps| ps.iter().sum::<Rational>().is_one());
        let atoms =
            atoms.into_iter().enumerate().map(|(i, (p, map))| TableAtom { p, exact: exact.as_ref().map(|e| e[i].clone()), map }).collect();
        Self::build_table(n, atoms)
    }

    /// Finite-atom rule with exact weights.
    pub fn table_exact(n: usize, atoms: Vec<(Rational, Vec<usize>)>) -> Result<Self> {
        if atoms.iter().any(|(p, _)| p.is_negative()) {
            return Err(Error::BadWeights("negative atom weight".into()));
        }
        let total: Rational = atoms.iter().map(|(p, _)| p).sum();
        if !total.is_one() {
            return Err(Error::BadWeights(format!("atom weights sum to {}", crate::rational::fmt_pq(&total))));
        }
        let atoms = atoms.into_iter().map(|(p, map)| TableAtom { p: to_f64(&p), exact: Some(p), map }).collect();
        Self::build_table(n, atoms)
    }

    fn build_table(n: usize, atoms: Vec<TableAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::BadWeights("no atoms".into()));
        }
        if atoms.iter().any(|a| !a.p.is_finite() || a.p < 0.0) {
            return Err(Error::BadWeights("atom weights must be finite and nonnegative".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.p).sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::BadWeights(format!("atom weights sum to {total}")));
        }
        let mut by_transition: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, atom) in atoms.iter().enumerate() {
            if atom.map.len() != n || atom.map.iter().any(|&y| y >= n) {
                return Err(Error::BadWeights(format!("atom {i} is not a map on {n} states")));
            }
            if atom.p > 0.0 {
                for (x, &y) in atom.map.iter().enumerate() {
                    by_transition.entry((x, y)).or_default().push(i);
                }
            }
        }
        Ok(TransitionRule { n, kind: RuleKind::Table(TableRule { atoms, by_transition }) })
    }

    pub(crate) fn from_mtf(rule: MtfRule) -> Self {
        TransitionRule { n: rule.num_states(), kind: RuleKind::MoveToFront(rule) }
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn driver_kind(&self) -> DriverKind {
        match &self.kind {
            RuleKind::Independent(_) => DriverKind::Table,
            RuleKind::InverseCdf(_) => DriverKind::UnitInterval,
            RuleKind::Table(_) | RuleKind::MoveToFront(_) => DriverKind::FiniteAtom,
        }
    }

    fn mismatch(&self) -> Error {
        Error::DriverMismatch { expected: self.driver_kind().name() }
    }

    /// φ(x, u).
    pub fn apply(&self, x: usize, driver: &Driver) -> Result<usize> {
        if x >= self.n {
            return Err(Error::StateOutOfRange { state: x, size: self.n });
        }
        match (&self.kind, driver) {
            (RuleKind::Independent(_), Driver::Table(t)) if t.len() == self.n => Ok(t[x]),
            (RuleKind::InverseCdf(r), Driver::Unit(u)) if (0.0..1.0).contains(u) => {
                let segs = &r.segments[x];
                Ok(segs.iter().find(|s| *u < s.hi).unwrap_or(&segs[segs.len() - 1]).state)
            }
            (RuleKind::Table(r), Driver::Atom(a)) if *a < r.atoms.len() => Ok(r.atoms[*a].map[x]),
            (RuleKind::MoveToFront(r), Driver::Atom(a)) if *a < r.records() => Ok(r.apply_rank(x, *a)),
            _ => Err(self.mismatch()),
        }
    }

    /// Draws U ~ μ.
    pub fn sample_driver<R: Rng + ?Sized>(&self, rng: &mut R) -> Driver {
        match &self.kind {
            RuleKind::Independent(r) => Driver::Table(r.rows.iter().map(|row| pick_weighted(row, rng)).collect()),
            RuleKind::InverseCdf(_) => Driver::Unit(rng.gen::<f64>()),
            RuleKind::Table(r) => {
                let items: Vec<(usize, f64)> = r.atoms.iter().enumerate().map(|(i, a)| (i, a.p)).collect();
                Driver::Atom(pick_weighted(&items, rng))
            }
            RuleKind::MoveToFront(r) => Driver::Atom(r.sample_request(rng)),
        }
    }

    /// Draws U from its conditional law given φ(x_prev, U) = x_next.
    pub fn impute_driver<R: Rng + ?Sized>(&self, x_prev: usize, x_next: usize, rng: &mut R) -> Result<Driver> {
        if x_prev >= self.n || x_next >= self.n {
            return Err(Error::StateOutOfRange { state: x_prev.max(x_next), size: self.n });
        }
        let impossible = Error::ImpossibleTransition { from: x_prev, to: x_next };
        match &self.kind {
            RuleKind::Independent(r) => {
                if !r.rows[x_prev].iter().any(|&(y, _)| y == x_next) {
                    return Err(impossible);
                }
                let table = r.rows.iter().enumerate().map(|(x, row)| if x == x_prev { x_next } else { pick_weighted(row, rng) }).collect();
                Ok(Driver::Table(table))
            }
            RuleKind::InverseCdf(r) => {
                let seg = r.segments[x_prev].iter().find(|s| s.state == x_next).ok_or(impossible)?;
                let u = seg.lo + (seg.hi - seg.lo) * rng.gen::<f64>();
                Ok(Driver::Unit(if u < seg.hi && u < 1.0 { u } else { seg.lo }))
            }
            RuleKind::Table(r) => {
                let atoms = r.by_transition.get(&(x_prev, x_next)).ok_or(impossible)?;
                let items: Vec<(usize, f64)> = atoms.iter().map(|&i| (i, r.atoms[i].p)).collect();
                Ok(Driver::Atom(pick_weighted(&items, rng)))
            }
            RuleKind::MoveToFront(r) => {
                let items: Vec<(usize, f64)> = (0..r.records())
                    .filter(|&a| r.apply_rank(x_prev, a) == x_next)
                    .map(|a| (a, r.weight(a)))
                    .filter(|&(_, w)| w > 0.0)
                    .collect();
                if items.is_empty() {
                    return Err(impossible);
                }
                Ok(Driver::Atom(pick_weighted(&items, rng)))
            }
        }
    }

    /// Whether exact driver enumeration is available.
    pub fn is_exact(&self) -> bool {
        match &self.kind {
            RuleKind::Independent(r) => r.exact_rows.is_some(),
            RuleKind::InverseCdf(r) => r.exact.is_some(),
            RuleKind::Table(r) => r.atoms.iter().all(|a| a.exact.is_some()),
            RuleKind::MoveToFront(r) => r.exact_weights().is_some(),
        }
    }

    /// Every driver atom with its exact probability. The inverse-CDF rule is
    /// enumerated through the common refinement of all its CDF segments:
    /// within each cell φ(·, u) is constant, so the cell midpoint represents it.
    pub fn enumerate_drivers(&self, cap: u64) -> Result<Vec<DriverAtom>> {
        match &self.kind {
            RuleKind::Independent(r) => {
                let rows = r.exact_rows.as_ref().ok_or_else(no_exact)?;
                product_size(rows.iter().map(Vec::len), cap)?;
                Ok(product_tables(rows))
            }
            RuleKind::InverseCdf(r) => {
                let cells = r.cells()?;
                product_size([cells.len()], cap)?;
                Ok(cells.into_iter().map(|(lo, hi)| DriverAtom { driver: Driver::Unit(midpoint(&lo, &hi)), prob: hi - lo }).collect())
            }
            RuleKind::Table(r) => {
                product_size([r.atoms.len()], cap)?;
                r.atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.p > 0.0)
                    .map(|(i, a)| Ok(DriverAtom { driver: Driver::Atom(i), prob: a.exact.clone().ok_or_else(no_exact)? }))
                    .collect()
            }
            RuleKind::MoveToFront(r) => {
                let w = r.exact_weights().ok_or_else(no_exact)?;
                Ok(w.iter()
                    .enumerate()
                    .filter(|(_, p)| p.is_positive())
                    .map(|(a, p)| DriverAtom { driver: Driver::Atom(a), prob: p.clone() })
                    .collect())
            }
        }
    }

    /// Atoms of L(U | φ(x_prev, U) = x_next) with exact conditional weights
    /// μ(u)·[φ(x_prev, u) = x_next] / K(x_prev, x_next).
    pub fn conditional_atoms(&self, x_prev: usize, x_next: usize, cap: u64) -> Result<Vec<DriverAtom>> {
        let impossible = Error::ImpossibleTransition { from: x_prev, to: x_next };
        match &self.kind {
            RuleKind::Independent(r) => {
                let rows = r.exact_rows.as_ref().ok_or_else(no_exact)?;
                if !rows[x_prev].iter().any(|(y, _)| *y == x_next) {
                    return Err(impossible);
                }
                let choices: Vec<Vec<(usize, Rational)>> = rows
                    .iter()
                    .enumerate()
                    .map(|(x, row)| if x == x_prev { vec![(x_next, Rational::one())] } else { row.clone() })
                    .collect();
                product_size(choices.iter().map(Vec::len), cap)?;
                Ok(product_tables(&choices))
            }
            RuleKind::InverseCdf(r) => {
                let exact = r.exact.as_ref().ok_or_else(no_exact)?;
                let seg = exact[x_prev].iter().find(|s| s.state == x_next).ok_or(impossible)?;
                let width = &seg.hi - &seg.lo;
                Ok(r.cells()?
                    .into_iter()
                    .filter(|(lo, hi)| *lo >= seg.lo && *hi <= seg.hi)
                    .map(|(lo, hi)| DriverAtom { driver: Driver::Unit(midpoint(&lo, &hi)), prob: (hi - lo) / &width })
                    .collect())
            }
            RuleKind::Table(_) | RuleKind::MoveToFront(_) => {
                let all = self.enumerate_drivers(cap)?;
                let matching: Vec<DriverAtom> = all.into_iter().filter(|a| self.apply(x_prev, &a.driver).ok() == Some(x_next)).collect();
                let total: Rational = matching.iter().map(|a| &a.prob).sum();
                if !total.is_positive() {
                    return Err(impossible);
                }
                Ok(matching.into_iter().map(|a| DriverAtom { prob: a.prob / &total, driver: a.driver }).collect())
            }
        }
    }

    /// Pushforward of μ under φ(x, ·), for every x. Cost grows with the
    /// number of states; meant for validation on small chains.
    pub fn induced_kernel(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut k = vec![vec![0.0; n]; n];
        match &self.kind {
            RuleKind::Independent(r) => {
                for (x, row) in r.rows.iter().enumerate() {
                    for &(y, p) in row {
                        k[x][y] += p;
                    }
                }
            }
            RuleKind::InverseCdf(r) => {
                for (x, segs) in r.segments.iter().enumerate() {
                    for s in segs {
                        k[x][s.state] += s.hi - s.lo;
                    }
                }
            }
            RuleKind::Table(r) => {
                for a in &r.atoms {
                    for (x, &y) in a.map.iter().enumerate() {
                        k[x][y] += a.p;
                    }
                }
            }
            RuleKind::MoveToFront(r) => {
                for (x, row) in k.iter_mut().enumerate() {
                    for a in 0..r.records() {
                        row[r.apply_rank(x, a)] += r.weight(a);
                    }
                }
            }
        }
        k
    }

    /// Exact pushforward of μ under φ(x, ·).
    pub fn induced_kernel_exact(&self) -> Result<Vec<Vec<Rational>>> {
        let n = self.n;
        let mut k = vec![vec![Rational::zero(); n]; n];
        match &self.kind {
            RuleKind::Independent(r) => {
                for (x, row) in r.exact_rows.as_ref().ok_or_else(no_exact)?.iter().enumerate() {
                    for (y, p) in row {
                        k[x][*y] += p;
                    }
                }
            }
            RuleKind::InverseCdf(r) => {
                for (x, segs) in r.exact.as_ref().ok_or_else(no_exact)?.iter().enumerate() {
                    for s in segs {
                        k[x][s.state] += &s.hi - &s.lo;
                    }
                }
            }
            RuleKind::Table(_) | RuleKind::MoveToFront(_) => {
                for atom in self.enumerate_drivers(u64::MAX)? {
                    for (x, row) in k.iter_mut().enumerate() {
                        row[self.apply(x, &atom.driver)?] += &atom.prob;
                    }
                }
            }
        }
        Ok(k)
    }

    /// Checks that the rule induces `kernel`, exactly when both sides are
    /// exact, otherwise to within the stochasticity tolerance.
    pub fn validate_against(&self, kernel: &DiscreteKernel) -> Result<()> {
        if kernel.size() != self.n {
            return Err(Error::InvalidInput(format!("rule on {} states, kernel on {}", self.n, kernel.size())));
        }
        if let (Some(ex), true) = (kernel.exact(), self.is_exact()) {
            let induced = self.induced_kernel_exact()?;
            for x in 0..self.n {
                for y in 0..self.n {
                    if induced[x][y] != ex.matrix[x][y] {
                        return Err(Error::KernelMismatch {
                            row: x,
                            col: y,
                            induced: to_f64(&induced[x][y]),
                            expected: to_f64(&ex.matrix[x][y]),
                        });
                    }
                }
            }
            return Ok(());
        }
        let induced = self.induced_kernel();
        for x in 0..self.n {
            for y in 0..self.n {
                if (induced[x][y] - kernel.entry(x, y)).abs() > STOCHASTIC_TOL {
                    return Err(Error::KernelMismatch { row: x, col: y, induced: induced[x][y], expected: kernel.entry(x, y) });
                }
            }
        }
        Ok(())
    }

    /// Segment boundaries `F(x, ·)` of the inverse-CDF rule, per state.
    pub fn segment_boundaries(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            RuleKind::InverseCdf(r) => {
                Some(r.segments.iter().map(|segs| std::iter::once(0.0).chain(segs.iter().map(|s| s.hi)).collect()).collect())
            }
            _ => None,
        }
    }

    /// Whether φ(·, u) preserves `order` for every u.
    pub fn is_monotone(&self, order: Option<&PartialOrder>) -> Result<Monotonicity> {
        let order = order.ok_or(Error::NoOrder)?;
        if order.size() != self.n {
            return Err(Error::BadOrder(format!("order on {} states, rule on {}", order.size(), self.n)));
        }
        let verdict = |ok: bool| if ok { Monotonicity::Monotone } else { Monotonicity::NotMonotone };
        match &self.kind {
            RuleKind::Independent(r) => {
                // Rows are drawn independently, so every combination of supports occurs.
                Ok(verdict(
                    order.strict_pairs().all(|(x, y)| r.rows[x].iter().all(|&(a, _)| r.rows[y].iter().all(|&(b, _)| order.leq(a, b)))),
                ))
            }
            RuleKind::InverseCdf(r) => {
                let natural = r.ordering.iter().enumerate().all(|(i, &s)| i == s);
                if !(natural && order.is_natural_linear()) {
                    return Ok(Monotonicity::Unknown);
                }
                Ok(verdict(r.stochastically_monotone()))
            }
            RuleKind::Table(r) => {
                Ok(verdict(r.atoms.iter().filter(|a| a.p > 0.0).all(|a| order.strict_pairs().all(|(x, y)| order.leq(a.map[x], a.map[y])))))
            }
            RuleKind::MoveToFront(r) => Ok(verdict(
                (0..r.records())
                    .filter(|&a| r.weight(a) > 0.0)
                    .all(|a| order.strict_pairs().all(|(x, y)| order.leq(r.apply_rank(x, a), r.apply_rank(y, a)))),
            )),
        }
    }
}

fn midpoint(lo: &Rational, hi: &Rational) -> f64 {
    to_f64(&((lo + hi) / Rational::from_integer(2.into())))
}

impl InverseCdfRule {
    /// Common refinement of all rows' segments, as `[lo, hi)` cells.
    fn cells(&self) -> Result<Vec<(Rational, Rational)>> {
        let exact = self.exact.as_ref().ok_or_else(no_exact)?;
        let mut points: Vec<Rational> = vec![Rational::zero(), Rational::one()];
        for segs in exact {
            for s in segs {
                points.push(s.lo.clone());
                points.push(s.hi.clone());
            }
        }
        points.sort();
        points.dedup();
        Ok(points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
    }

    /// F(x, y) ≥ F(x+1, y) for all adjacent x and all y.
    fn stochastically_monotone(&self) -> bool {
        let n = self.segments.len();
        if let Some(exact) = &self.exact {
            let cdf = |x: usize, y: usize| -> Rational { exact[x].iter().filter(|s| s.state <= y).map(|s| &s.hi - &s.lo).sum() };
            return (0..n.saturating_sub(1)).all(|x| (0..n).all(|y| cdf(x, y) >= cdf(x + 1, y)));
        }
        let cdf = |x: usize, y: usize| -> f64 { self.segments[x].iter().filter(|s| s.state <= y).map(|s| s.hi - s.lo).sum() };
        (0..n.saturating_sub(1)).all(|x| (0..n).all(|y| cdf(x, y) >= cdf(x + 1, y) - STOCHASTIC_TOL))
    }
}

/// Drivers `U_1, …, U_t` aligned with a trajectory `x_0, …, x_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImputedDriverSequence {
    drivers: Vec<Driver>,
}

impl ImputedDriverSequence {
    /// Imputes each `U_s` independently from L(U | φ(x_{s−1}, U) = x_s).
    pub fn impute<R: Rng + ?Sized>(rule: &TransitionRule, trajectory: &[usize], rng: &mut R) -> Result<Self> {
        let drivers = trajectory.windows(2).map(|pair| rule.impute_driver(pair[0], pair[1], rng)).collect::<Result<Vec<_>>>()?;
        Ok(ImputedDriverSequence { drivers })
    }

    pub fn from_drivers(drivers: Vec<Driver>) -> Self {
        ImputedDriverSequence { drivers }
    }

    pub fn drivers(&self) -> &[Driver] {
        &self.drivers
    }

    pub fn into_drivers(self) -> Vec<Driver> {
        self.drivers
    }

    /// True when driver s carries x_{s−1} to x_s for every s.
    pub fn reproduces(&self, rule: &TransitionRule, trajectory: &[usize]) -> bool {
        self.drivers.len() + 1 == trajectory.len()
            && self.drivers.iter().zip(trajectory.windows(2)).all(|(d, pair)| rule.apply(pair[0], d).ok() == Some(pair[1]))
    }
}

pub fn make_independent_transitions_rule(kernel: &DiscreteKernel) -> TransitionRule {
    TransitionRule::independent(kernel)
}

pub fn make_inverse_cdf_rule(kernel: &DiscreteKernel, ordering: &[usize]) -> Result<TransitionRule> {
    TransitionRule::inverse_cdf(kernel, ordering)
}

/// Table rule from exact atoms, optionally checked against a kernel.
pub fn make_table_rule(atoms: Vec<(Rational, Vec<usize>)>, kernel: Option<&DiscreteKernel>) -> Result<TransitionRule> {
    let n = match (kernel, atoms.first()) {
        (Some(k), _) => k.size(),
        (None, Some((_, map))) => map.len(),
        (None, None) => return Err(Error::BadWeights("no atoms".into())),
    };
    let rule = TransitionRule::table_exact(n, atoms)?;
    if let Some(k) = kernel {
        rule.validate_against(k)?;
    }
    Ok(rule)
}
