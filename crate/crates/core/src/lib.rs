//! Resilient control of discrete-time linear systems under signal temporal
//! logic (STL) requirements.
//!
//! The toolkit covers the full loop from specification to closed-loop control:
//!
//! * [`stl`] — STL formulas over linear atomic propositions, a text parser,
//!   and exact Boolean monitoring over finite discrete-time traces.
//! * [`resilience`] — quantitative resilience monitoring: recovery and
//!   durability times, `(rec, dur)` resilience values for `SRS` atoms, the
//!   resiliency dominance order, maximum resilience sets, and signed time
//!   robustness as a reference monitor.
//! * [`system`] — linear plant models `x_{t+1} = F x_t + G u_t`, control
//!   constraint sets, and exact forward simulation.
//! * [`milp`] — a self-contained mixed-integer linear programming stack:
//!   model construction, bounded-variable simplex, branch-and-bound, and
//!   CPLEX-LP file export/import for external solvers.
//! * [`encoding`] — compilation of STL formulas over symbolic traces into
//!   MILP constraints, including the recovery/durability counter recursions.
//! * [`pareto`] — exact enumeration of the set of non-dominated optimally
//!   resilient control strategies via an epsilon-constraint sweep.
//! * [`mpc`] — receding-horizon control driven by decision-maker strategies
//!   that select among the enumerated optima at every step.
//! * [`cases`] — ready-made lane-keeping and package-delivery benchmark
//!   problems.
//! * [`io`] / [`cli`] — trace CSV and result JSON formats, plus the `stlres`
//!   command-line workbench.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cases;
pub mod cli;
pub mod encoding;
pub mod io;
pub mod milp;
pub mod mpc;
pub mod pareto;
pub mod resilience;
pub mod stl;
pub mod system;

pub use resilience::{ResvOrdering, ResvPair, SrsSpec};
pub use stl::{AtomicProposition, Formula, Interval, Trace};
pub use system::{ControlConstraintSet, ControlSequence, LinearSystem};

/// Feasibility tolerance shared by the MILP solver and constraint checks.
pub const FEASIBILITY_TOL: f64 = 1e-6;
