//! Extreme eigenpairs of large sparse symmetric matrices by weighted
//! trace-penalty minimization.
//!
//! The library minimizes
//!
//! ```text
//! f(X) = 1/2 tr(XᵀAX) + (μ/4) ‖XᵀX − W‖_F²
//! ```
//!
//! over dense or compressed-sparse `n×p` iterates. With strictly
//! decreasing diagonal weights `W`, the global minimizers are scaled
//! copies of the `p` lowest eigenvectors — not just a basis of their
//! span — so both solvers converge to eigenpairs directly and never
//! orthogonalize.
//!
//! Two solvers are provided: full gradient descent with Barzilai–Borwein
//! stepsizes ([`gd`]) for dense-friendly sizes, and a coordinate-descent
//! method over compressed sparse state ([`cd`]) for matrices that can
//! only be accessed one column at a time. The [`model`] module carries
//! the objective calculus and the closed-form Hessian condition number
//! that guides weight selection in [`weights`]; [`oracle`] holds the
//! dense verification tools.
//!
//! ```
//! use wtpm::cd::{cd_solve, CdConfig};
//! use wtpm::hamiltonian::{laplacian_eigenvalues, laplacian_operator};
//! use wtpm::model::WeightedPenaltyProblem;
//! use wtpm::weights::WeightVector;
//!
//! let a = laplacian_operator(12)?;
//! let weights = WeightVector::new(vec![3.0])?;
//! let prob = WeightedPenaltyProblem::new(&a, 1.0, weights)?;
//! let result = cd_solve(&prob, &CdConfig::new(1e-10, 100_000))?;
//! assert!(result.converged());
//! assert!((result.ritz[0] - laplacian_eigenvalues(12)[0]).abs() < 1e-6);
//! # Ok::<(), wtpm::Error>(())
//! ```

pub mod cd;
pub mod dense;
pub mod error;
pub mod gd;
pub mod hamiltonian;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod sparse;
pub mod trace;
pub mod weights;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use model::{Spectrum, WeightedPenaltyProblem};
pub use solver::{SolveResult, SolveStatus};
pub use sparse::{SparseColumnMatrix, SymmetricOperator};
pub use trace::{ConvergenceTrace, TraceRow};
pub use weights::WeightVector;
