//! Result types shared by the gradient and coordinate solvers.

use crate::dense::DenseMatrix;
use crate::trace::ConvergenceTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The stopping criterion was met.
    Converged,
    /// The iteration budget ran out first.
    IterationLimit,
    /// A non-finite quantity appeared; the result holds the last finite
    /// iterate.
    Diverged,
}

/// Final iterate, per-column Rayleigh quotients, and the checkpoint trace
/// of one solver run.
#[derive(Debug)]
pub struct SolveResult {
    pub x: DenseMatrix,
    pub ritz: Vec<f64>,
    pub trace: ConvergenceTrace,
    pub status: SolveStatus,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}
