use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("Gram matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix has an odd diagonal entry at index {0}")]
    OddDiagonal(usize),
    #[error("Gram matrix is degenerate (determinant 0)")]
    Degenerate,
    #[error("unknown lattice name `{0}`")]
    UnknownName(String),
    #[error("bad parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },
    #[error("rescaling by {0} does not give an even integral lattice")]
    NonIntegralRescale(String),
    #[error("vector is zero")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sublattice is not primitive")]
    NotPrimitive,
    #[error("orthogonal complement is degenerate")]
    DegenerateSublattice,
    #[error("matrix is not an isometry of the lattice")]
    NotIsometry,
    #[error("enumeration budget exceeded: {what} is {size}, budget {budget}")]
    BudgetExceeded {
        what: String,
        size: u64,
        budget: u64,
    },
    #[error("value {0} does not fit the machine-word residue arithmetic")]
    TooLarge(String),
    #[error("subgroup is not isotropic")]
    NotIsotropic,
    #[error("subgroup is not contained in the ambient group")]
    SubgroupNotContained,
    #[error("element does not belong to the finite quadratic form")]
    NotAnElement,
    #[error("isotropic vector has divisor {0}, expected 1")]
    DivisorNotOne(String),
    #[error("vector is not isotropic and primitive")]
    NotPrimitiveIsotropic,
    #[error("vector does not lie in the complement of the hyperbolic plane")]
    VectorNotInComplement,
    #[error("isometry does not fix the isotropic vector")]
    DoesNotFixL,
    #[error("the two hyperbolic embeddings have different images of f")]
    FImagesDiffer,
    #[error("embedding is not a hyperbolic plane")]
    NotHyperbolic,
    #[error("no divisor-1 isotropic vector with |coordinates| <= {0}")]
    NoneFoundInWindow(u64),
    #[error("not a primitive isotropic plane")]
    NotIsotropicPlane,
    #[error("search bound {bound} is below the reduction bound {required}")]
    BoundTooSmall { bound: u64, required: u64 },
    #[error("lattice is not of rank 2")]
    NotRank2,
    #[error("incomplete inputs: {0}")]
    IncompleteInputs(String),
    #[error("no divisor-1 isotropic vector in NS within the search window")]
    NoSectionClass,
    #[error("hypothesis fails: {0}")]
    HypothesisFails(String),
    #[error("invalid K3 model: {0}")]
    InvalidModel(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("strategy `{strategy}` does not apply: {reason}")]
    NotApplicable { strategy: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
