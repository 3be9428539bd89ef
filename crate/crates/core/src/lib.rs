//! Information-theoretic and operational measures of quantum contextuality.
//!
//! The crate is organised bottom-up:
//!
//! - [`operator`]: dense Hermitian linear algebra, joint eigenspaces, norms and density matrices;
//! - [`measures`]: mutual information energy, the commutator measure `D` and its bound hierarchy;
//! - [`kcbs`]: spin-1 operators and the KCBS pentagon;
//! - [`majorana`]: the two-star representation of spin-1 states;
//! - [`uncertainty`]: maximisation of summed uncertainty products over pure states;
//! - [`scenario`]: JSON scenario files and the built-in scenarios.

pub mod error;
pub mod kcbs;
pub mod majorana;
pub mod measures;
pub mod operator;
pub mod scenario;
pub mod uncertainty;

pub use error::{Error, Result};
pub use kcbs::{kcbs_pentagon, Direction, KcbsPentagon};
pub use majorana::{StarPair, Triad, TriadCoefficients};
pub use measures::{BoundsRecord, BoundsReport, Context, ContextFamily, MieValue, RobertsonCheck};
pub use operator::{
    ComplexMatrix, DensityMatrix, HermitianOperator, JointEigenspaceFamily, SpectralDecomposition,
    StateVector, Tolerances,
};
pub use scenario::{Scenario, ScenarioDocument};
pub use uncertainty::{OptimizationProblem, OptimizationResult, OptimizerConfig};
