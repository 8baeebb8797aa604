use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operation needs a non-empty set")]
    EmptySet,
    #[error("arity must be positive")]
    ZeroArity,
    #[error("0 is an element, quotients are undefined")]
    DivisionByZeroElement,
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("bad arity: {0}")]
    BadArity(String),
    #[error("counter overflow: {0}")]
    Overflow(String),
    #[error("work exceeds guard: {0}")]
    TooLarge(String),
    #[error("0 is not allowed in multiplicative mode here")]
    ZeroElement,
    #[error("parts are not pairwise disjoint")]
    NotDisjoint,
    #[error("no value reaches the threshold")]
    EmptyResult,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("stage `{0}` produced an empty set")]
    StageCollapse(String),
    #[error("result is not a subset branch")]
    WrongBranch,
    #[error("adversary removed {removed} elements, at least {required} required")]
    BadAdversary { removed: u64, required: u64 },
    #[error("input or target below the admissible range")]
    TooSmall,
    #[error("parameter too large to evaluate: {0}")]
    ParameterTooLarge(String),
    #[error("comparison not decided at {0} bits of precision")]
    Undecided(u32),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Guard violations: the input is fine but the requested work is not.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::TooLarge(_) | Error::Overflow(_) | Error::ParameterTooLarge(_)
        )
    }
}
