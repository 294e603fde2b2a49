use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid extent: l2 = {l2} must be greater than l1 = {l1}")]
    InvalidExtent { l1: f64, l2: f64 },
    #[error("invalid subdivision count: n1 = {0}, need at least 2")]
    InvalidCount(usize),
    #[error("node index {index:?} out of range for n1 = {n1}")]
    OutOfRange { index: [usize; 3], n1: usize },
    #[error("lex_index called on boundary node {0:?}")]
    BoundaryNode([usize; 3]),

    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable `{0}` not assigned")]
    MissingVariable(char),
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no feasible finite-difference variant at index {index} on a line of {len} samples")]
    NoFeasibleVariant { index: usize, len: usize },

    #[error("diffusion coefficient is not positive at node {node:?}: kappa = {value}")]
    NonpositiveKappa { node: [usize; 3], value: f64 },
    #[error("nonlinear problem requires a frozen iterate field")]
    MissingIterate,
    #[error("time history too short: integrator needs {needed} levels, got {got}")]
    HistoryUnderflow { needed: usize, got: usize },
    #[error("field length {got} does not match grid ({expected} nodes)")]
    GridMismatch { expected: usize, got: usize },

    #[error("singular matrix: zero pivot in row {0}")]
    SingularMatrix(usize),
    #[error("iterative solver did not reach tolerance {tol} in {iters} iterations (last residuals: {history:?})")]
    IterativeDivergence {
        tol: f64,
        iters: usize,
        history: Vec<f64>,
    },

    #[error("startup ratio tau/(h/2) = {0} is not a positive integer")]
    NonIntegralStartupRatio(f64),
    #[error("time horizon {t_end} is not an integer multiple of tau = {tau}")]
    NonIntegralStepCount { t_end: f64, tau: f64 },

    #[error("problem has no exact solution; cannot measure errors or manufacture a source")]
    MissingExactSolution,
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
