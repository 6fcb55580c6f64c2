//! JSON chain-spec files.
//!
//! ```json
//! {
//!   "n": 3,
//!   "matrix": [["1/2", "1/2", 0], ["1/2", 0, "1/2"], [0, "1/2", "1/2"]],
//!   "order": "linear",
//!   "rule": {"kind": "table", "atoms": [{"p": "1/2", "map": [0, 0, 1]}, {"p": "1/2", "map": [1, 2, 2]}]}
//! }
//! ```
//!
//! Probabilities may be JSON numbers or `"p/q"` strings. When every entry is
//! rational (decimals convert if their denominator is at most 10^6) the chain
//! also carries exact arithmetic.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{validate_kernel, DiscreteKernel, PartialOrder, ProbabilityVector, StateSpace};
use crate::error::{Error, Result};
use crate::rational::{ProbEntry, Rational};
use crate::rules::{make_table_rule, TransitionRule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n: usize,
    pub matrix: Vec<Vec<ProbEntry>>,
    #[serde(default)]
    pub pi: Option<Vec<ProbEntry>>,
    #[serde(default)]
    pub order: Option<OrderSpec>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub rule: Option<RuleSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    /// Only `"linear"` is recognized.
    Named(String),
    /// Pairs `[x, y]` meaning x ≤ y; closed transitively.
    Pairs(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub kind: String,
    #[serde(default)]
    pub atoms: Option<Vec<AtomSpec>>,
    /// Segment order for `inverse-cdf`; defaults to 0, 1, …, n−1.
    #[serde(default)]
    pub ordering: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub p: ProbEntry,
    pub map: Vec<usize>,
}

/// A chain and, if the spec names one, its transition rule.
#[derive(Clone, Debug)]
pub struct LoadedChain {
    pub kernel: DiscreteKernel,
    pub rule: Option<TransitionRule>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn all_exact(entries: &[ProbEntry]) -> Result<Option<Vec<Rational>>> {
    entries.iter().map(|e| e.to_exact()).collect::<Result<Vec<_>>>().map(|v| v.into_iter().collect())
}

impl ChainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn build(&self) -> Result<LoadedChain> {
        let n = self.n;
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(invalid(format!("matrix must be {n} x {n}")));
        }
        if let Some(pi) = &self.pi {
            if pi.len() != n {
                return Err(invalid(format!("pi must have {n} entries")));
            }
        }
        let exact_rows: Option<Vec<Vec<Rational>>> =
            self.matrix.iter().map(|r| all_exact(r)).collect::<Result<Vec<_>>>()?.into_iter().collect();
        let exact_pi = match &self.pi {
            Some(pi) => all_exact(pi)?.map(Some),
            None => Some(None),
        };
        let kernel = match (exact_rows, exact_pi) {
            (Some(rows), Some(pi)) => DiscreteKernel::from_rational(rows, pi)?,
            _ => {
                let rows =
                    self.matrix.iter().map(|r| r.iter().map(ProbEntry::to_f64).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
                let pi = match &self.pi {
                    Some(pi) => Some(ProbabilityVector::new(pi.iter().map(ProbEntry::to_f64).collect::<Result<Vec<_>>>()?)?),
                    None => None,
                };
                validate_kernel(rows, pi)?
            }
        };
        let mut space = StateSpace::new(n);
        if let Some(labels) = &self.labels {
            space = space.with_labels(labels.clone())?;
        }
        if let Some(order) = &self.order {
            let order = match order {
                OrderSpec::Named(name) if name == "linear" => PartialOrder::linear(n),
                OrderSpec::Named(name) => return Err(invalid(format!("unknown order {name:?}"))),
                OrderSpec::Pairs(pairs) => PartialOrder::from_pairs(n, pairs)?,
            };
            space = space.with_order(order)?;
        }
        let kernel = kernel.with_space(space)?;
        let rule = self.rule.as_ref().map(|r| r.build(&kernel)).transpose()?;
        Ok(LoadedChain { kernel, rule })
    }
}

impl RuleSpec {
    pub fn build(&self, kernel: &DiscreteKernel) -> Result<TransitionRule> {
        let n = kernel.size();
        match self.kind.as_str() {
            "independent" => Ok(TransitionRule::independent(kernel)),
            "inverse-cdf" => {
                let ordering = self.ordering.clone().unwrap_or_else(|| (0..n).collect());
                TransitionRule::inverse_cdf(kernel, &ordering)
            }
            "table" => {
                let atoms = self.atoms.as_ref().ok_or_else(|| invalid("table rule needs \"atoms\""))?;
                let exact: Option<Vec<Rational>> = atoms.iter().map(|a| a.p.to_exact()).collect::<Result<Vec<_>>>()?.into_iter().collect();
                match exact {
                    Some(ps) => make_table_rule(ps.into_iter().zip(atoms.iter().map(|a| a.map.clone())).collect(), Some(kernel)),
                    None => {
                        let atoms = atoms.iter().map(|a| Ok((a.p.to_f64()?, a.map.clone()))).collect::<Result<Vec<_>>>()?;
                        let rule = TransitionRule::table(n, atoms)?;
                        rule.validate_against(kernel)?;
                        Ok(rule)
                    }
                }
            }
            other => Err(invalid(format!("unknown rule kind {other:?}"))),
        }
    }
}

pub fn load_chain_spec(path: &Path) -> Result<LoadedChain> {
    let text = std::fs::read_to_string(path)?;
    ChainSpec::from_json(&text)?.build()
}
