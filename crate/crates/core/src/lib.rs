pub mod config;
pub mod counting;
pub mod discriminant;
pub mod error;
pub mod genus;
pub mod isotropic;
pub mod lattice;
pub mod linalg;
pub mod registry;

pub use config::Budget;
pub use discriminant::{FiniteQuadraticForm, FqfElement, FqfIsometry, FqfSubgroup};
pub use error::{Error, Result};
pub use lattice::{Embedding, EvenLattice, LatticeIsometry, LatticeVector, RootSign};
