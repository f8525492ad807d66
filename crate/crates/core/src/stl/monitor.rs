//! Exact Boolean monitoring of STL formulas on finite traces.

use super::{Formula, Trace};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("atom has dimension {atom_dim} but the trace state has dimension {state_dim}")]
    DimensionMismatch { atom_dim: usize, state_dim: usize },
    #[error("time index {t} exceeds trace horizon {horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },
    #[error("unbounded until is encoder-internal and cannot be monitored")]
    UnboundedUntil,
}

/// Whether `(trace, t) |= phi`.
///
/// All temporal windows are intersected with `[0, H]`. An `until` (or
/// `eventually`) whose window is empty is false; an `always` over an empty
/// window is true.
pub fn satisfies(phi: &Formula, trace: &Trace, t: usize) -> Result<bool, EvalError> {
    if t > trace.horizon() {
        return Err(EvalError::TimeOutOfRange {
            t,
            horizon: trace.horizon(),
        });
    }
    eval(phi, trace, t)
}

fn eval(phi: &Formula, trace: &Trace, t: usize) -> Result<bool, EvalError> {
    let horizon = trace.horizon();
    match phi {
        Formula::Atom(a) => Ok(a.margin(trace.state(t))? >= 0.0),
        Formula::Not(p) => Ok(!eval(p, trace, t)?),
        Formula::And(cs) => {
            for c in cs {
                if !eval(c, trace, t)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(cs) => {
            for c in cs {
                if eval(c, trace, t)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Always(i, p) => {
            if let Some(win) = i.window(t, horizon) {
                for s in win {
                    if !eval(p, trace, s)? {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        Formula::Eventually(i, p) => {
            if let Some(win) = i.window(t, horizon) {
                for s in win {
                    if eval(p, trace, s)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        Formula::Until(i, lhs, rhs) => {
            let Some(win) = i.window(t, horizon) else {
                return Ok(false);
            };
            for witness in win {
                if eval(rhs, trace, witness)? {
                    let mut prefix_ok = true;
                    for s in t..witness {
                        if !eval(lhs, trace, s)? {
                            prefix_ok = false;
                            break;
                        }
                    }
                    if prefix_ok {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        Formula::UnboundedUntil(_, _) => Err(EvalError::UnboundedUntil),
    }
}

/// The characteristic function: `+1` if `(trace, t) |= phi`, else `-1`.
pub fn characteristic(phi: &Formula, trace: &Trace, t: usize) -> Result<i32, EvalError> {
    Ok(if satisfies(phi, trace, t)? { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::{AtomicProposition, Interval};

    fn trace1(values: &[f64]) -> Trace {
        Trace::new(values.iter().map(|v| vec![*v]).collect(), 1.0).unwrap()
    }

    fn atom_ge(c: f64) -> Formula {
        Formula::atom(vec![1.0], c)
    }

    #[test]
    fn atom_on_trace() {
        let tr = trace1(&[1.0, -1.0]);
        let phi = atom_ge(0.0);
        assert!(satisfies(&phi, &tr, 0).unwrap());
        assert!(!satisfies(&phi, &tr, 1).unwrap());
    }

    #[test]
    fn always_within_window() {
        let tr = trace1(&[1.0, 1.0, -1.0]);
        let phi = Formula::always(Interval::new(0, 1).unwrap(), atom_ge(0.0));
        assert!(satisfies(&phi, &tr, 0).unwrap());
        assert!(!satisfies(&phi, &tr, 1).unwrap());
    }

    #[test]
    fn until_finds_witness() {
        // Until([0,2], y>=0, y>=5) on [1, 2, 7, 0]: witness at t'=2.
        let tr = trace1(&[1.0, 2.0, 7.0, 0.0]);
        let phi = Formula::until(Interval::new(0, 2).unwrap(), atom_ge(0.0), atom_ge(5.0));
        assert!(satisfies(&phi, &tr, 0).unwrap());
        // From t=2 the window is [2,4]∩[0,3]=[2,3]; witness t'=2 directly.
        assert!(satisfies(&phi, &tr, 2).unwrap());
        // From t=3 only state 0.0 remains; 0 >= 5 fails.
        assert!(!satisfies(&phi, &tr, 3).unwrap());
    }

    #[test]
    fn until_prefix_must_hold() {
        // rhs true at 2 but lhs broken at 1.
        let tr = trace1(&[1.0, -3.0, 7.0, 0.0]);
        let phi = Formula::until(Interval::new(0, 2).unwrap(), atom_ge(0.0), atom_ge(5.0));
        assert!(!satisfies(&phi, &tr, 0).unwrap());
    }

    #[test]
    fn empty_windows() {
        let tr = trace1(&[-1.0, -1.0]);
        let g = Formula::always(Interval::new(5, 7).unwrap(), atom_ge(0.0));
        let f = Formula::eventually(Interval::new(5, 7).unwrap(), atom_ge(0.0));
        let u = Formula::until(Interval::new(5, 7).unwrap(), atom_ge(-10.0), atom_ge(-10.0));
        assert!(satisfies(&g, &tr, 0).unwrap());
        assert!(!satisfies(&f, &tr, 0).unwrap());
        assert!(!satisfies(&u, &tr, 0).unwrap());
    }

    #[test]
    fn characteristic_signs() {
        let tr = trace1(&[1.0, -1.0]);
        assert_eq!(characteristic(&atom_ge(0.0), &tr, 0).unwrap(), 1);
        assert_eq!(characteristic(&atom_ge(0.0), &tr, 1).unwrap(), -1);
    }

    #[test]
    fn errors() {
        let tr = trace1(&[1.0, -1.0]);
        let bad = Formula::atom(vec![1.0, 2.0], 0.0);
        assert_eq!(
            satisfies(&bad, &tr, 0),
            Err(EvalError::DimensionMismatch {
                atom_dim: 2,
                state_dim: 1
            })
        );
        assert_eq!(
            satisfies(&atom_ge(0.0), &tr, 5),
            Err(EvalError::TimeOutOfRange { t: 5, horizon: 1 })
        );
        let uu = Formula::UnboundedUntil(Box::new(atom_ge(0.0)), Box::new(atom_ge(0.0)));
        assert_eq!(satisfies(&uu, &tr, 0), Err(EvalError::UnboundedUntil));
    }

    #[test]
    fn table_fixture_characteristic_row() {
        // 1-D signal crossing 0, chosen so the chi row is the module fixture.
        let tr = trace1(&[-1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0]);
        let phi = atom_ge(0.0);
        let row: Vec<i32> = (0..=9).map(|t| characteristic(&phi, &tr, t).unwrap()).collect();
        assert_eq!(row, vec![-1, 1, 1, -1, -1, -1, 1, 1, 1, -1]);
    }
}
