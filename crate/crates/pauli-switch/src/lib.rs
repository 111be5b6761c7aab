//! Exact simulation and verification of qubit Pauli channels under quantum
//! switches and nested superswitches.
//!
//! The crate is organised around three independent evaluation routes for the
//! same physics, which are cross-checked against each other in the test
//! suites and by the companion CLI's `verify` command:
//!
//! * [`switch`] — symbolic probability-vector evaluation of switch outcome
//!   ensembles, including the order-2 closed forms;
//! * [`recurrence`] — bucketed mass recurrences that propagate distillation
//!   rates to arbitrary order in O(1) state per step, with fixed-point
//!   analysis;
//! * [`kraus`] — a dense complex-matrix brute-force oracle (Kraus
//!   construction, ancilla projection, Bell-basis read-out) plus an exact
//!   scaled-Pauli enumeration engine.
//!
//! Supporting modules: [`channel`] (validated Pauli channels, geometric
//! classification), [`twirl`] (depolarising-parameter extraction and resource
//! accounting), [`multiqubit`] (symplectic multi-qubit engine witnessing the
//! failure of the identity-purification mechanism beyond one qubit),
//! [`choi`] (channel/state correspondence), and [`sample`] (deterministic
//! seeded generators for randomised property sweeps).
//!
//! All physics-bearing arithmetic runs in either exact rational or `f64`
//! mode through the [`scalar::Scalar`] abstraction; exact mode is the
//! default everywhere a claim is asserted.

pub mod channel;
pub mod choi;
pub mod kraus;
pub mod multiqubit;
pub mod recurrence;
pub mod sample;
pub mod scalar;
pub mod switch;
pub mod twirl;

pub use channel::{ChannelClass, PauliVec4, Region};
pub use scalar::{Exact, Scalar};
pub use switch::{OutcomeEnsemble, OutcomeString};

/// Unified error type for every engine in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A channel weight (or other probability) was negative.
    #[error("weights must be nonnegative")]
    NegativeWeight,
    /// Channel weights do not sum to one (exactly in rational mode, within
    /// 1e-12 in float mode), or a float input was not finite.
    #[error("weights must be finite and sum to one")]
    NotNormalised,
    /// A negative order was requested.
    #[error("order must be nonnegative")]
    OrderNegative,
    /// The requested order exceeds what the selected engine enumerates.
    #[error("order {got} exceeds the supported maximum {max} for this engine")]
    OrderTooLarge { got: i64, max: i64 },
    /// Two multi-qubit operators act on different qubit counts.
    #[error("operands act on different qubit counts")]
    SizeMismatch,
    /// A bucket state does not respect its region's zero pattern.
    #[error("bucket state violates its region's zero pattern")]
    ShapeMismatch,
    /// A Kraus list fails the completeness (trace-preservation) check.
    #[error("Kraus set is not trace preserving (completeness residual {0:.3e})")]
    NotCptp(f64),
    /// A projected Choi state acquired off-diagonal Bell components. For
    /// Pauli-channel inputs this signals an implementation bug, never a
    /// property of the input.
    #[error("projected state is not Bell-diagonal (residual {0:.3e})")]
    NonPauliResidual(f64),
    /// Unparseable numeric or channel text.
    #[error("cannot parse {0:?}")]
    Parse(String),
}
