//! Sharp exponents for multilinear inequalities on `S^{n-1}` whose functions
//! are invariant under rotations in disjoint coordinate blocks, with Monte
//! Carlo tools to test them.
//!
//! * [`symmetry`]: rotation fields, Lie closure and block decomposition.
//! * [`exponents`] and [`enumerate`]: exact exponents and balanced families.
//! * [`quadrature`] and [`sampling`]: seeded, sharded integration on spheres and balls.
//! * [`extremal`]: extremal functions and divergence and growth experiments.
//! * [`scenario`]: JSON scenarios, run records and CSV series.

pub mod enumerate;
pub mod error;
pub mod exponents;
pub mod extremal;
pub mod fit;
pub mod functions;
pub mod multi_index;
pub mod numbers;
pub mod quadrature;
pub mod sampling;
pub mod scenario;
pub mod symmetry;

pub use error::{Error, Result};
pub use exponents::BalancedType;
pub use multi_index::MultiIndex;
pub use quadrature::{Estimate, Integrand, QuadConfig};
pub use symmetry::{EdgeSet, Symmetry};
