use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid field element: {0}")]
    InvalidElement(String),
    #[error("elements from GF({found}) used with GF({expected})")]
    FieldMismatch { expected: u32, found: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("determinant is not a square, so the matrix is not in PSL(2,{q})")]
    NotInPsl { q: u32 },
    #[error("elements of {found} used with {expected}")]
    GroupMismatch { expected: String, found: String },
    #[error("group of order {order} exceeds the enumeration limit {limit}")]
    GroupTooLarge { order: u64, limit: u64 },
    #[error("subgroup must be proper")]
    NotProper,
    #[error("subgroup of order {order} is not in the Dickson table")]
    NotInDicksonTable { order: usize },
    #[error("no conjugator in PGL(2,{q}) maps the first subgroup onto the second")]
    NoConjugator { q: u32 },
    #[error("invalid move {0}")]
    InvalidMove(String),
    #[error("tuple does not generate the group")]
    NotGenerating,
    #[error("tuples lie in different components")]
    NotConnected,
    #[error("state budget exceeded: {required} states needed, budget is {budget} (about {bytes} bytes)")]
    BudgetExceeded { required: u128, budget: u64, bytes: u128 },
    #[error("search budget exceeded: {0}")]
    SearchBudget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("connector failed at {stage}: {reason}")]
    Connector { stage: String, reason: String },
    #[error("cache file error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
