//! Annotated logic programs over an interval lower semi-lattice.
//!
//! Programs are evaluated by a synchronous fixpoint operator ([`engine`]),
//! compiled to an equivalent unrolled recurrent network ([`neural`]), and
//! their parametrized rules can be learned from examples ([`trainer`]).

pub mod engine;
pub mod error;
pub mod gen;
pub mod lattice;
pub mod neural;
pub mod program;
pub mod syntax;
pub mod trainer;

pub use engine::{check_consistency, entails, lfp, FixpointResult, Interpretation};
pub use error::{EngineError, LatticeError, NeuralError, ParseError, ProgramError, TrainError};
pub use lattice::{Interval, LatticeConfig, LatticeMode};
pub use neural::{activation, CellState, UnrolledNet};
pub use program::{AtomId, Gate, Literal, Program, Rule};
pub use syntax::{parse_program, parse_query, serialize};
