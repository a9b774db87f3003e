use crate::ralgebra::Lambda;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("lambda mismatch: {0:?} vs {1:?}")]
    LambdaMismatch(Lambda, Lambda),
    #[error("element {re} + l*{im} is a zero divisor (lambda {lambda:?})")]
    NotInvertible { re: f64, im: f64, lambda: Lambda },
    #[error("{func}: argument outside domain ({detail})")]
    Domain { func: &'static str, detail: String },
    #[error("trace {0} is not hyperbolic")]
    NonHyperbolic(f64),
    #[error("determinant {0} is not 1")]
    NonUnitDeterminant(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("path not incident at position {0}")]
    NotIncident(usize),
    #[error("path backtracks at position {0}")]
    Backtrack(usize),
    #[error("path is open or empty")]
    OpenPath,
    #[error("edge {0} is a loop; the move is unsupported")]
    LoopEdge(String),
    #[error("coordinate vector belongs to a different graph")]
    GraphMismatch,
    #[error("constraint matrix is rank deficient")]
    RankDeficient,
    #[error("no gauge fixing supplied")]
    MissingGauge,
    #[error("gauge fixing is not admissible (Dirac matrix singular)")]
    InadmissibleGauge,
    #[error("degenerate point: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
