//! Full-gradient solver with fixed or Barzilai–Borwein stepsizes.
//!
//! Each iteration moves the whole dense iterate along the negative
//! gradient, `X ← X - α ∇f(X)`. The BB stepsize alternates two secant
//! formulas built from the latest iterate and gradient differences.
//! BB steps are not monotone on this nonconvex objective and a secant
//! estimate can come out negative; such steps fall back to the bootstrap
//! stepsize, and every step is clamped to a sane range.

use std::time::Instant;

use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::model::WeightedPenaltyProblem;
use crate::oracle::eigen_error;
use crate::solver::{SolveResult, SolveStatus};
use crate::sparse::gershgorin_upper_bound;
use crate::trace::{ConvergenceTrace, TraceRow};

/// Stepsize clamp bounds for BB steps.
const ALPHA_MIN: f64 = 1e-12;
const ALPHA_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeMode {
    Fixed(f64),
    BarzilaiBorwein,
}

#[derive(Debug, Clone)]
pub struct GdConfig {
    pub max_iter: u64,
    /// Convergence threshold on the gradient Frobenius norm.
    pub tol_grad: f64,
    pub stepsize: StepsizeMode,
    /// Bootstrap stepsize for the first iteration and for BB fallbacks.
    /// `None` picks `1e-2 / max(1, λ̂ₙ)` with `λ̂ₙ` a Gershgorin bound.
    pub alpha0: Option<f64>,
    pub checkpoint_every: u64,
    /// Reference eigenvalues for the trace's error column.
    pub reference: Option<Vec<f64>>,
}

impl GdConfig {
    pub fn new(tol_grad: f64, max_iter: u64) -> Self {
        Self {
            max_iter,
            tol_grad,
            stepsize: StepsizeMode::BarzilaiBorwein,
            alpha0: None,
            checkpoint_every: 10,
            reference: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !(self.tol_grad > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tol_grad must be positive, got {}",
                self.tol_grad
            )));
        }
        if let StepsizeMode::Fixed(a) = self.stepsize {
            if !(a > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "fixed stepsize must be positive, got {a}"
                )));
            }
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidInput(
                "checkpoint_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbParity {
    Odd,
    Even,
}

/// Barzilai–Borwein stepsize from iterate difference `δX` and gradient
/// difference `δG`:
///
/// ```text
/// odd:  tr(δXᵀ δG) / ‖δG‖_F²
/// even: ‖δX‖_F² / tr(δXᵀ δG)
/// ```
///
/// Returns `None` when the denominator vanishes; the caller substitutes
/// its bootstrap stepsize.
pub fn bb_stepsize(delta_x: &DenseMatrix, delta_g: &DenseMatrix, parity: BbParity) -> Option<f64> {
    match parity {
        BbParity::Odd => {
            let denom = delta_g.inner(delta_g);
            if denom == 0.0 {
                None
            } else {
                Some(delta_x.inner(delta_g) / denom)
            }
        }
        BbParity::Even => {
            let denom = delta_x.inner(delta_g);
            if denom == 0.0 {
                None
            } else {
                Some(delta_x.inner(delta_x) / denom)
            }
        }
    }
}

fn rayleigh_quotients(x: &DenseMatrix, ax: &DenseMatrix) -> Vec<f64> {
    (0..x.cols())
        .map(|l| {
            let den = dot(x.col(l), x.col(l));
            if den == 0.0 {
                f64::NAN
            } else {
                dot(x.col(l), ax.col(l)) / den
            }
        })
        .collect()
}

/// Runs gradient descent from `x0` until the gradient norm falls below
/// `cfg.tol_grad` or the iteration budget runs out.
pub fn gd_solve(
    prob: &WeightedPenaltyProblem,
    x0: &DenseMatrix,
    cfg: &GdConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    if x0.rows() != prob.dim() || x0.cols() != prob.p() {
        return Err(Error::Dimension(format!(
            "initial iterate is {}x{}, problem needs {}x{}",
            x0.rows(),
            x0.cols(),
            prob.dim(),
            prob.p()
        )));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidInput("initial iterate is not finite".into()));
    }

    let alpha0 = match cfg.alpha0 {
        Some(a) if a > 0.0 => a,
        Some(a) => {
            return Err(Error::InvalidInput(format!(
                "alpha0 must be positive, got {a}"
            )))
        }
        None => 1e-2 / gershgorin_upper_bound(prob.operator()).abs().max(1.0),
    };

    let start = Instant::now();
    let mut trace = ConvergenceTrace::new();
    let mut last_emitted: Option<u64> = None;

    let mut x = x0.clone();
    let mut ax = prob.operator().apply(&x)?;
    let mut grad = prob.gradient_with_ax(&x, &ax);
    let mut prev: Option<(DenseMatrix, DenseMatrix)> = None; // (x, grad) one step back

    let mut iter: u64 = 0;
    let status;
    loop {
        let grad_norm = grad.frobenius_norm();
        let objective = prob.objective_with_ax(&x, &ax);

        if !objective.is_finite() || !grad_norm.is_finite() {
            status = SolveStatus::Diverged;
            // roll back to the previous (finite) iterate when possible
            if let Some((px, _)) = prev {
                x = px;
                ax = prob.operator().apply(&x)?;
            }
            break;
        }

        if iter % cfg.checkpoint_every == 0 {
            emit(
                &mut trace,
                &mut last_emitted,
                iter,
                &start,
                &x,
                &ax,
                Some(objective),
                Some(grad_norm),
                cfg.reference.as_deref(),
            );
        }

        if grad_norm <= cfg.tol_grad {
            status = SolveStatus::Converged;
            break;
        }
        if iter >= cfg.max_iter {
            status = SolveStatus::IterationLimit;
            break;
        }

        let alpha = match cfg.stepsize {
            StepsizeMode::Fixed(a) => a,
            StepsizeMode::BarzilaiBorwein => match &prev {
                None => alpha0,
                Some((px, pg)) => {
                    let dx = x.sub(px);
                    let dg = grad.sub(pg);
                    // first BB-eligible step is iteration 1, labelled odd
                    let parity = if iter % 2 == 1 {
                        BbParity::Odd
                    } else {
                        BbParity::Even
                    };
                    match bb_stepsize(&dx, &dg, parity) {
                        Some(a) if a > 0.0 && a.is_finite() => a.clamp(ALPHA_MIN, ALPHA_MAX),
                        _ => alpha0,
                    }
                }
            },
        };

        let mut x_new = x.clone();
        x_new.axpy(-alpha, &grad);
        let ax_new = prob.operator().apply(&x_new)?;
        let grad_new = prob.gradient_with_ax(&x_new, &ax_new);

        prev = Some((std::mem::replace(&mut x, x_new), std::mem::replace(&mut grad, grad_new)));
        ax = ax_new;
        iter += 1;
    }

    let objective = prob.objective_with_ax(&x, &ax);
    let grad_norm = prob.gradient_with_ax(&x, &ax).frobenius_norm();
    emit(
        &mut trace,
        &mut last_emitted,
        iter,
        &start,
        &x,
        &ax,
        objective.is_finite().then_some(objective),
        grad_norm.is_finite().then_some(grad_norm),
        cfg.reference.as_deref(),
    );

    let ritz = rayleigh_quotients(&x, &ax);
    Ok(SolveResult {
        x,
        ritz,
        trace,
        status,
    })
}

#[allow(clippy::too_many_arguments)]
fn emit(
    trace: &mut ConvergenceTrace,
    last_emitted: &mut Option<u64>,
    iter: u64,
    start: &Instant,
    x: &DenseMatrix,
    ax: &DenseMatrix,
    objective: Option<f64>,
    grad_norm: Option<f64>,
    reference: Option<&[f64]>,
) {
    if *last_emitted == Some(iter) {
        return;
    }
    let ritz = rayleigh_quotients(x, ax);
    let err = reference.and_then(|r| {
        if r.len() >= ritz.len() {
            eigen_error(&ritz, &r[..ritz.len()]).ok()
        } else {
            None
        }
    });
    trace.push(TraceRow {
        update_count: iter,
        relative_iteration: iter as f64,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        ritz,
        err,
        nnz_x: x.count_nonzeros(),
        nnz_y: ax.count_nonzeros(),
        objective,
        grad_norm,
    });
    *last_emitted = Some(iter);
}
