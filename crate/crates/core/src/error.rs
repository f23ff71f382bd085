use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: feature index {index} is not strictly increasing")]
    NonIncreasing { line: usize, index: usize },
    #[error("row {row}: index {index} is not strictly increasing")]
    UnsortedIndices { row: usize, index: usize },
    #[error("row {row}: feature index {index} outside [0, {n_features})")]
    IndexOutOfRange {
        row: usize,
        index: usize,
        n_features: usize,
    },
    #[error("dimension {requested} is smaller than the required {required}")]
    DimensionTooSmall { requested: usize, required: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("dataset has no samples")]
    Empty,
    #[error("dataset has no features")]
    NoFeatures,
    #[error("row {row}: non-finite label")]
    NonFiniteLabel { row: usize },
    #[error("row {row}: non-finite feature value")]
    NonFiniteValue { row: usize },
    #[error("sampling weight {index} must be positive and finite")]
    InvalidWeight { index: usize },
    #[error("sampling weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("batch size {b} outside [1, {n}]")]
    BatchSize { b: usize, n: usize },
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("row {row}: label {label} is not ±1, required by the {loss} loss")]
    NonBinaryLabel { row: usize, label: f64, loss: &'static str },
    #[error("regularization weight must be finite and non-negative, got {0}")]
    InvalidWeight(f64),
    #[error("the eigen-quadratic loss takes no regularizer")]
    RegularizedEigen,
    #[error("point has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the data matrix is zero; the leading direction is undefined")]
    Degenerate,
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("learning rate must satisfy Lη < 1/3, got Lη = {0}")]
    StepTooLarge(f64),
    #[error("invalid rate input: {0}")]
    Domain(String),
    #[error("the ridge normal equations are singular")]
    Singular,
    #[error("exact subset enumeration needs n ≤ {max} when b > 1, got n = {n}")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}
