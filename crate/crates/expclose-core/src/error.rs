//! Crate-wide error type with pipeline stage labels.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // polynomial arithmetic
    #[error("arity mismatch: polynomial has {expected} variables, point has {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    VarIndexOutOfRange { index: usize, num_vars: usize },
    #[error("resultant requires positive degree in the eliminated variable (got {degree})")]
    ResultantDegreeZero { degree: usize },
    #[error("inexact polynomial division")]
    InexactDivision,
    #[error("term count {count} exceeds the configured bound {bound}")]
    TermBudgetExceeded { count: usize, bound: usize },
    #[error("polynomial parse error: {0}")]
    PolyParse(String),

    // numeric kernels
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("root finding did not converge within {max_iter} iterations")]
    RootsNoConvergence { max_iter: usize },
    #[error("leading coefficient vanishes numerically at the current point")]
    SingularLeadingCoefficient,

    // variety / hypothesis stage
    #[error("sampling did not converge within the retry budget ({retries} retries)")]
    SampleNoConvergence { retries: usize },
    #[error("all converged samples hit a coordinate hyperplane y_i = 0")]
    SamplesOnCoordinateHyperplane,
    #[error("numerical rank unstable across samples: {details}")]
    RankUnstable { details: String },
    #[error("dimension hypothesis failed: estimated {got}, expected {expected}")]
    DimensionHypothesisFailed { got: i64, expected: i64 },
    #[error("hypothesis gate failed: {0}")]
    HypothesisGate(String),

    // triangularization stage
    #[error("elimination collapsed to the zero polynomial for coordinate {coord}")]
    EliminationCollapsed { coord: usize },
    #[error("all candidate factors are extraneous at the witness for coordinate {coord} (best residual {best_residual})")]
    AllFactorsExtraneous { coord: usize, best_residual: String },
    #[error("generators with approximate coefficients cannot be eliminated exactly")]
    ApproxCoefficientsInElimination,

    // solver stage
    #[error("seed rejected: |f_{index}| entered the logarithm-singularity disc at step {step}")]
    SeedRejectedLogSingularity { index: usize, step: usize },
    #[error("seed has a zero component at index {index}")]
    SeedZeroComponent { index: usize },
    #[error("branch choice {chosen} out of range ({count} roots) for coordinate {coord}")]
    BranchChoiceOutOfRange { coord: usize, chosen: usize, count: usize },
    #[error("branch collision at step {step}, coordinate {coord}: two tracked roots within tolerance")]
    BranchCollision { coord: usize, step: usize },
    #[error("solver exceeded max_iter = {max_iter}")]
    MaxIterExceeded { max_iter: usize },
    #[error("iteration left the numeric range at step {step}")]
    NumericRangeExceeded { step: usize },
    #[error("solution lies on an extraneous component: generator residual {residual} exceeds tolerance")]
    ExtraneousComponent { residual: String },
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    // relation detection / audit
    #[error("precision {precision} too low for height bound {height} (need at least {needed})")]
    PrecisionTooLowForHeight {
        precision: usize,
        height: u64,
        needed: usize,
    },
    #[error("zero matrix rejected")]
    ZeroMatrix,
    #[error("matrix rows are not independent over Q")]
    DependentRows,

    // sweep
    #[error("invalid sweep plan: {0}")]
    InvalidPlan(String),
    #[error("seed budget exhausted with zero presumed-generic solutions ({attempted} seeds attempted)")]
    BudgetExhausted { attempted: usize },
    #[error("no solutions supplied")]
    NoSolutions,

    // configuration / io
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input parse error: {0}")]
    InputParse(String),
    #[error("numeric value is not finite")]
    NonFiniteValue,
}

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
