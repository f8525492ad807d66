//! STL formulas over linear atomic propositions and finite discrete-time
//! traces.
//!
//! A formula is built from atoms `a·x >= c` with the usual Boolean and
//! bounded temporal operators. Time is discrete: intervals are given in
//! steps, and traces are finite sequences `x_0 .. x_H` of real state
//! vectors. All evaluation windows are intersected with `[0, H]`; an
//! `always` over an empty window is true, an `eventually`/`until` over an
//! empty window is false.

mod monitor;
mod parser;

pub use monitor::{characteristic, satisfies, EvalError};
pub use parser::{parse_formula, print_formula, ParseError, ParseErrorKind};

use thiserror::Error;

/// A linear atomic proposition `coefficients · x >= constant`.
///
/// The coefficient vector length must match the state dimension of any
/// trace the atom is evaluated on; this is checked at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicProposition {
    /// Weights over state components; `mu(x) = coefficients · x`.
    pub coefficients: Vec<f64>,
    /// Threshold: the proposition holds iff `mu(x) >= constant`.
    pub constant: f64,
}

impl AtomicProposition {
    pub fn new(coefficients: Vec<f64>, constant: f64) -> Self {
        Self {
            coefficients,
            constant,
        }
    }

    /// Evaluates `mu(x) - constant` on one state vector.
    pub fn margin(&self, state: &[f64]) -> Result<f64, EvalError> {
        if state.len() != self.coefficients.len() {
            return Err(EvalError::DimensionMismatch {
                atom_dim: self.coefficients.len(),
                state_dim: state.len(),
            });
        }
        let mu: f64 = self
            .coefficients
            .iter()
            .zip(state)
            .map(|(a, x)| a * x)
            .sum();
        Ok(mu - self.constant)
    }

    /// Atom that holds on every state (`0 >= -1`).
    pub fn always_true(dim: usize) -> Self {
        Self::new(vec![0.0; dim], -1.0)
    }
}

/// A closed step interval `[lo, hi]` attached to a temporal operator.
///
/// Unbounded windows never appear here; the encoder realizes them through
/// the dedicated [`Formula::UnboundedUntil`] node instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    lo: usize,
    hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self, FormulaError> {
        if lo > hi {
            return Err(FormulaError::EmptyInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// The evaluation window `(t + I) ∩ [0, H]`, or `None` when empty.
    pub fn window(&self, t: usize, horizon: usize) -> Option<std::ops::RangeInclusive<usize>> {
        let lo = t.checked_add(self.lo)?;
        if lo > horizon {
            return None;
        }
        let hi = t.saturating_add(self.hi).min(horizon);
        Some(lo..=hi)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// STL abstract syntax tree.
///
/// `And`/`Or` are n-ary with at least two children. `UnboundedUntil` is
/// internal: it is produced only by the MILP encoder's until rewrite and is
/// rejected by the monitor; the parser never emits it.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(AtomicProposition),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    UnboundedUntil(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(coefficients: Vec<f64>, constant: f64) -> Self {
        Formula::Atom(AtomicProposition::new(coefficients, constant))
    }

    pub fn not(phi: Formula) -> Self {
        Formula::Not(Box::new(phi))
    }

    pub fn and(children: Vec<Formula>) -> Result<Self, FormulaError> {
        if children.len() < 2 {
            return Err(FormulaError::TooFewChildren(children.len()));
        }
        Ok(Formula::And(children))
    }

    pub fn or(children: Vec<Formula>) -> Result<Self, FormulaError> {
        if children.len() < 2 {
            return Err(FormulaError::TooFewChildren(children.len()));
        }
        Ok(Formula::Or(children))
    }

    pub fn until(interval: Interval, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(interval, Box::new(lhs), Box::new(rhs))
    }

    pub fn always(interval: Interval, phi: Formula) -> Self {
        Formula::Always(interval, Box::new(phi))
    }

    pub fn eventually(interval: Interval, phi: Formula) -> Self {
        Formula::Eventually(interval, Box::new(phi))
    }

    /// True if any node in the tree is an [`Formula::UnboundedUntil`].
    pub fn contains_unbounded_until(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Not(p) => p.contains_unbounded_until(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().any(|c| c.contains_unbounded_until()),
            Formula::Until(_, a, b) => a.contains_unbounded_until() || b.contains_unbounded_until(),
            Formula::Always(_, p) | Formula::Eventually(_, p) => p.contains_unbounded_until(),
            Formula::UnboundedUntil(_, _) => true,
        }
    }

    /// Largest nesting sum of interval upper ends; the formula's truth at
    /// `t` depends only on states up to `t + time_depth()`.
    pub fn time_depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(p) => p.time_depth(),
            Formula::And(cs) | Formula::Or(cs) => {
                cs.iter().map(|c| c.time_depth()).max().unwrap_or(0)
            }
            Formula::Until(i, a, b) => i.hi + a.time_depth().max(b.time_depth()),
            Formula::Always(i, p) | Formula::Eventually(i, p) => i.hi + p.time_depth(),
            Formula::UnboundedUntil(a, b) => usize::MAX / 2 + a.time_depth().max(b.time_depth()),
        }
    }

    /// A canonical byte encoding of the subtree, usable as a structural
    /// identity key. Floats are compared bit-exactly.
    pub(crate) fn structural_key(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_key(&mut buf);
        buf
    }

    fn write_key(&self, buf: &mut Vec<u8>) {
        match self {
            Formula::Atom(a) => {
                buf.push(0);
                buf.extend_from_slice(&(a.coefficients.len() as u64).to_le_bytes());
                for c in &a.coefficients {
                    buf.extend_from_slice(&c.to_bits().to_le_bytes());
                }
                buf.extend_from_slice(&a.constant.to_bits().to_le_bytes());
            }
            Formula::Not(p) => {
                buf.push(1);
                p.write_key(buf);
            }
            Formula::And(cs) => {
                buf.push(2);
                buf.extend_from_slice(&(cs.len() as u64).to_le_bytes());
                for c in cs {
                    c.write_key(buf);
                }
            }
            Formula::Or(cs) => {
                buf.push(3);
                buf.extend_from_slice(&(cs.len() as u64).to_le_bytes());
                for c in cs {
                    c.write_key(buf);
                }
            }
            Formula::Until(i, a, b) => {
                buf.push(4);
                buf.extend_from_slice(&(i.lo as u64).to_le_bytes());
                buf.extend_from_slice(&(i.hi as u64).to_le_bytes());
                a.write_key(buf);
                b.write_key(buf);
            }
            Formula::Always(i, p) => {
                buf.push(5);
                buf.extend_from_slice(&(i.lo as u64).to_le_bytes());
                buf.extend_from_slice(&(i.hi as u64).to_le_bytes());
                p.write_key(buf);
            }
            Formula::Eventually(i, p) => {
                buf.push(6);
                buf.extend_from_slice(&(i.lo as u64).to_le_bytes());
                buf.extend_from_slice(&(i.hi as u64).to_le_bytes());
                p.write_key(buf);
            }
            Formula::UnboundedUntil(a, b) => {
                buf.push(7);
                a.write_key(buf);
                b.write_key(buf);
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("interval [{lo},{hi}] is empty")]
    EmptyInterval { lo: usize, hi: usize },
    #[error("conjunction/disjunction needs at least 2 children, got {0}")]
    TooFewChildren(usize),
}

/// A finite trace `x_0 .. x_H` of states on discrete time steps.
///
/// `step_seconds` is the physical duration of one step and is only used
/// for unit conversion at the IO boundary; all semantics are in steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    states: Vec<Vec<f64>>,
    step_seconds: f64,
}

impl Trace {
    pub fn new(states: Vec<Vec<f64>>, step_seconds: f64) -> Result<Self, TraceError> {
        if states.len() < 2 {
            return Err(TraceError::TooShort(states.len()));
        }
        let dim = states[0].len();
        if let Some(bad) = states.iter().position(|s| s.len() != dim) {
            return Err(TraceError::RaggedStates {
                index: bad,
                expected: dim,
                got: states[bad].len(),
            });
        }
        if !(step_seconds > 0.0) {
            return Err(TraceError::NonPositiveStep(step_seconds));
        }
        Ok(Self {
            states,
            step_seconds,
        })
    }

    /// Horizon `H`; the trace holds `H + 1` states.
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn step_seconds(&self) -> f64 {
        self.step_seconds
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t]
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace needs at least 2 states (H >= 1), got {0}")]
    TooShort(usize),
    #[error("state {index} has dimension {got}, expected {expected}")]
    RaggedStates {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("step_seconds must be positive, got {0}")]
    NonPositiveStep(f64),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_window_clamps_and_empties() {
        let i = Interval::new(1, 3).unwrap();
        assert_eq!(i.window(0, 10), Some(1..=3));
        assert_eq!(i.window(8, 10), Some(9..=10));
        assert_eq!(i.window(10, 10), None);
        let j = Interval::new(0, 0).unwrap();
        assert_eq!(j.window(10, 10), Some(10..=10));
    }

    #[test]
    fn interval_rejects_reversed_bounds() {
        assert_eq!(
            Interval::new(3, 1),
            Err(FormulaError::EmptyInterval { lo: 3, hi: 1 })
        );
    }

    #[test]
    fn trace_validation() {
        assert!(matches!(
            Trace::new(vec![vec![0.0]], 1.0),
            Err(TraceError::TooShort(1))
        ));
        assert!(matches!(
            Trace::new(vec![vec![0.0], vec![0.0, 1.0]], 1.0),
            Err(TraceError::RaggedStates { index: 1, .. })
        ));
        assert!(matches!(
            Trace::new(vec![vec![0.0], vec![1.0]], 0.0),
            Err(TraceError::NonPositiveStep(_))
        ));
        let tr = Trace::new(vec![vec![0.0], vec![1.0], vec![2.0]], 0.5).unwrap();
        assert_eq!(tr.horizon(), 2);
        assert_eq!(tr.dim(), 1);
    }

    #[test]
    fn structural_keys_distinguish_shapes() {
        let a = Formula::atom(vec![1.0], 0.0);
        let b = Formula::atom(vec![1.0], -0.0);
        assert_ne!(a.structural_key(), b.structural_key());
        let and = Formula::and(vec![a.clone(), a.clone()]).unwrap();
        let or = Formula::or(vec![a.clone(), a.clone()]).unwrap();
        assert_ne!(and.structural_key(), or.structural_key());
        assert_eq!(a.structural_key(), Formula::atom(vec![1.0], 0.0).structural_key());
    }
}
