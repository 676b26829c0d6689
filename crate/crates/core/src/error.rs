use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
///
/// Variants that "signal a bug" are conditions the underlying mathematics
/// rules out for valid input; they are surfaced instead of panicking so a
/// campaign can record them as witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // fields
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field order {p}^{e} does not fit in 32 bits")]
    OrderOverflow { p: u64, e: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    MixedFields,
    #[error("element encoding {value} is out of range for a field of order {q}")]
    ElementOutOfRange { value: u64, q: u32 },
    #[error("expected a field of order {expected}, got {actual}")]
    WrongFieldOrder { expected: u32, actual: u32 },

    // subsets
    #[error("{0} is not a codimension-one subset of {1}")]
    NotCodimensionOne(String, String),
    #[error("cannot take {n} elements from a ground set of size {ground}")]
    SubsetTooLarge { n: usize, ground: usize },
    #[error("index {index} outside ground set of size {ground}")]
    IndexOutOfRange { index: usize, ground: usize },

    // linear algebra
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no solution")]
    NoSolution,

    // arcs
    #[error("need at least {needed} vectors, got {got}")]
    TooFewVectors { needed: usize, got: usize },
    #[error("dimension {k} is too large for a field of order {q}")]
    DimensionTooLarge { k: usize, q: u32 },
    #[error("arc size {size} must exceed the dimension {k}")]
    SizeNotGreaterThanK { size: usize, k: usize },
    #[error("dual family is not an arc (degenerate subset {0:?})")]
    DualNotArc(Vec<usize>),
    #[error("family is not an arc (degenerate subset {0:?})")]
    NotAnArc(Vec<usize>),
    #[error("search space {space} exceeds budget {budget}")]
    BudgetExceeded { space: u128, budget: u128 },
    #[error("no arc of size {size} found within the retry budget")]
    Unsatisfiable { size: usize },
    #[error("index {0} appears twice")]
    IndexClash(usize),
    #[error("vectors do not form a basis")]
    SingularBasis,

    // tangents
    #[error("expected {expected} tangent hyperplanes, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("points {0} and {1} are proportional")]
    DegeneratePair(usize, usize),
    #[error("basis is not adapted to the given subset")]
    BasisNotAdapted,
    #[error("bad sizes: {0}")]
    BadSizes(String),

    // system matrices
    #[error("bad inclusion parameters r={r} a={a} b={b}")]
    BadParams { r: usize, a: usize, b: usize },
    #[error("rank formula requires b <= a <= r-b (r={r} a={a} b={b})")]
    ParamOrderViolated { r: usize, a: usize, b: usize },
    #[error("n={n} exceeds |G|-k+1={max}")]
    NTooLarge { n: usize, max: usize },
    #[error("|G|={g} but t+k+n={expected}")]
    SizeMismatch { g: usize, expected: usize },
    #[error("alpha vector has a zero entry at column {0}")]
    ZeroEntry(usize),
    #[error("matrices disagree at row {row}, column {col}")]
    MismatchEntry { row: usize, col: usize },
    #[error("index sets overlap")]
    OverlapError,
    #[error("requires k > p (k={k}, p={p})")]
    PreconditionKLEP { k: usize, p: u32 },
    #[error("requires k <= p (k={k}, p={p})")]
    KExceedsP { k: usize, p: u32 },
    #[error("zero coordinate in re-coordinatized vector {0}")]
    ZeroCoordinate(usize),
    #[error("nonzero residual for subset {0:?}")]
    ResidualNonzero(Vec<usize>),

    // harness / io
    #[error("arc generation exhausted: {0}")]
    GenerationExhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
