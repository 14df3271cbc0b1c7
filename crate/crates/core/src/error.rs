use thiserror::Error;

/// Broad failure classes. Each maps to one process exit code in the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Certificate,
    Numeric,
    Hum,
    Floor,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Certificate => 3,
            ErrorClass::Numeric => 4,
            ErrorClass::Hum => 5,
            ErrorClass::Floor => 6,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("non-finite state value at t = {t:.6}")]
    NonFiniteState { t: f64 },

    #[error("ratio field {what} is not admissible: sup norm {sup_norm:.6e} exceeds cap {cap:.3e}")]
    InadmissibleRatio {
        what: &'static str,
        sup_norm: f64,
        cap: f64,
    },

    #[error(
        "condition (ii) violated at node {node} (x = {x:.6}): numerator {value:.3e} where the denominator vanishes"
    )]
    ConditionTwoViolated { node: usize, x: f64, value: f64 },

    #[error("damping must be nonnegative, found {value:.3e} at node {node}")]
    P2Violated { node: usize, value: f64 },

    #[error("dissipativity violated: max <f(y) + b y, y> = {max_value:.6e} ({form})")]
    P3Violated { max_value: f64, form: &'static str },

    #[error("zero set compatibility violated at node {node} (x = {x:.6}): f(zeta) = {value:.3e} where zeta = 0")]
    P4Violated { node: usize, x: f64, value: f64 },

    #[error("support hypothesis violated: {hypothesis}")]
    SupportViolated { hypothesis: String },

    #[error("lifting function vanishes: min |zeta| = {min:.3e}, max |zeta| = {max:.3e}")]
    ZetaVanishes { min: f64, max: f64 },

    #[error("parameter violation: {0}")]
    ParamViolation(String),

    #[error("negative input {value:.3e} at node {node}")]
    NegativeInput { node: usize, value: f64 },

    #[error("decay fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("no exponential decay detected (fitted sigma = {sigma:.3e})")]
    NoDecay { sigma: f64 },

    #[error("state floor violated at node {node} (x = {x:.6}), t = {t:.6}: |psi + theta| = {value:.3e} < {floor:.3e}")]
    FloorViolated {
        node: usize,
        x: f64,
        t: f64,
        value: f64,
        floor: f64,
    },

    #[error("HUM solve failed after {iterations} iterations (terminal residual {residual:.3e}, target {target:.3e})")]
    HumFailed {
        iterations: usize,
        residual: f64,
        target: f64,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Config(_) | InvalidInput(_) | Io(_) | NegativeInput { .. } => ErrorClass::Config,
            InadmissibleRatio { .. }
            | ConditionTwoViolated { .. }
            | P2Violated { .. }
            | P3Violated { .. }
            | P4Violated { .. }
            | SupportViolated { .. }
            | ZetaVanishes { .. }
            | ParamViolation(_) => ErrorClass::Certificate,
            StabilityViolation { .. } | NonFiniteState { .. } | DegenerateFit(_) | NoDecay { .. } => {
                ErrorClass::Numeric
            }
            HumFailed { .. } => ErrorClass::Hum,
            FloorViolated { .. } => ErrorClass::Floor,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
