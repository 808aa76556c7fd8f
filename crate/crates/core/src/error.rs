use thiserror::Error;

use crate::engine::FixpointResult;
use crate::lattice::LatticeConfig;
use crate::program::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
    #[error("cannot combine elements of {left} and {right}")]
    ConfigMismatch { left: LatticeConfig, right: LatticeConfig },
    #[error("supremum of an empty set")]
    EmptySup,
    #[error("value {value} is not a grid point of the {config} lattice")]
    OffGrid { value: String, config: LatticeConfig },
    #[error("coordinate {coord} outside 0..={resolution}")]
    OutOfRange { coord: u32, resolution: u32 },
    #[error("lower coordinate {lower} exceeds upper coordinate {upper}")]
    NotAnElement { lower: u32, upper: u32 },
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("cannot convert from {from} to {to} exactly")]
    Unconvertible { from: LatticeConfig, to: LatticeConfig },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("invalid program: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("`incon` is reserved and already defined by rule {rule}")]
    ReservedSymbol { rule: usize },
    #[error("rule {rule} is not parametrized")]
    NotParametrized { rule: usize },
    #[error("rule {rule}: expected {expected} weights, got {got}")]
    ThetaArity { rule: usize, expected: usize, got: usize },
    #[error("unknown literal `{0}`")]
    UnknownLiteral(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Error)]
pub enum EngineError {
    #[error("satisfaction is undefined on a conflicted interpretation")]
    ConflictedInterpretation,
    #[error("entailment is undefined: the program is inconsistent")]
    Inconsistent(Box<FixpointResult>),
    #[error("no convergence within {bound} applications on a conflict-free run")]
    BoundExceeded { bound: usize },
    #[error("incon detection and witness detection disagree: {0}")]
    DetectionMismatch(String),
    #[error("oracle search space of {size} interpretations exceeds cap {cap}")]
    OracleTooLarge { size: u128, cap: u128 },
    #[error("interpretation has {got} atoms, program has {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeuralError {
    #[error("weight vector has length {theta}, input has length {input}")]
    LengthMismatch { theta: usize, input: usize },
    #[error("value {0} is not in {{-1,1}}")]
    NotSigned(i32),
    #[error("the unrolled network needs a signed-mode program, got {0}")]
    ModeMismatch(LatticeConfig),
    #[error("requested {steps} steps but the network has {k} cells")]
    TooManySteps { steps: usize, k: usize },
    #[error("cell state has length {got}, network expects {expected}")]
    StateShape { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("the program has no parametrized rules")]
    NoParametrizedRules,
    #[error("the dataset is empty")]
    EmptyData,
    #[error("every update was rejected by the consistency check ({epochs} epochs)")]
    AllRejected { epochs: usize },
    #[error("literal `{0}` is both an input and a target")]
    InputTargetOverlap(String),
    #[error("value {value} for `{literal}` is not in {{-1,1}}")]
    BadLabel { literal: String, value: i64 },
    #[error("line {line}: {source}")]
    Dataset {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("discrete search space of {size} assignments exceeds cap {cap}")]
    OracleTooLarge { size: u128, cap: u128 },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}
