//! The weighted penalty objective, its derivatives, the closed-form
//! structure of its minimizers, and the exact condition number of its
//! Hessian at a global minimizer.
//!
//! The objective over dense `n×p` iterates `X` is
//!
//! ```text
//! f(X) = 1/2 tr(XᵀAX) + (μ/4) ‖XᵀX − W‖_F²
//! ```
//!
//! with `A` symmetric, `μ > 0` and `W` a diagonal matrix of strictly
//! decreasing weights. With `μ w_p` above the p-th eigenvalue, every
//! global minimizer has columns that are individually scaled eigenvectors
//! for the `p` smallest eigenvalues: column `i` equals
//! `±√(wᵢ - λᵢ/μ) vᵢ`. All other stationary points are strict saddles,
//! which is what lets plain first-order methods find eigenvectors without
//! any orthogonalization step.

use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::sparse::SymmetricOperator;
use crate::weights::WeightVector;

/// Leading gaps below this fraction of the spectral width are treated as
/// degenerate by weight construction and by [`condition_number`].
pub const DEGENERACY_RELATIVE_GAP: f64 = 1e-12;

/// Eigenvalues in ascending order with optional orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DenseMatrix>,
}

impl Spectrum {
    /// Validates ascending order and, when vectors are present,
    /// orthonormality of the columns to 1e-12.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Option<DenseMatrix>) -> Result<Self> {
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("eigenvalues must be finite".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "eigenvalues must be in ascending order".into(),
            ));
        }
        if let Some(v) = &eigenvectors {
            if v.cols() > eigenvalues.len() {
                return Err(Error::Dimension(format!(
                    "{} eigenvectors for {} eigenvalues",
                    v.cols(),
                    eigenvalues.len()
                )));
            }
            let g = v.gram();
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    if (g.get(i, j) - expected).abs() > 1e-12 {
                        return Err(Error::InvalidInput(format!(
                            "eigenvector block is not orthonormal: (VᵀV)[{i},{j}] = {}",
                            g.get(i, j)
                        )));
                    }
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&DenseMatrix> {
        self.eigenvectors.as_ref()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// The operator, penalty parameter and weight vector of one problem
/// instance. Immutable once built; shared freely between solver runs.
pub struct WeightedPenaltyProblem<'a> {
    operator: &'a dyn SymmetricOperator,
    mu: f64,
    weights: WeightVector,
}

impl<'a> WeightedPenaltyProblem<'a> {
    pub fn new(
        operator: &'a dyn SymmetricOperator,
        mu: f64,
        weights: WeightVector,
    ) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "penalty parameter must be positive, got {mu}"
            )));
        }
        if weights.len() > operator.dim() {
            return Err(Error::Dimension(format!(
                "block width {} exceeds operator dimension {}",
                weights.len(),
                operator.dim()
            )));
        }
        Ok(Self {
            operator,
            mu,
            weights,
        })
    }

    /// Like [`WeightedPenaltyProblem::new`] but additionally enforces
    /// `μ w_p > λ_p` against a reference spectrum.
    pub fn with_spectrum_check(
        operator: &'a dyn SymmetricOperator,
        mu: f64,
        weights: WeightVector,
        lambdas: &[f64],
    ) -> Result<Self> {
        let p = weights.len();
        if lambdas.len() < p {
            return Err(Error::InsufficientSpectrum {
                needed: p,
                got: lambdas.len(),
            });
        }
        if mu * weights.get(p - 1) <= lambdas[p - 1] {
            return Err(Error::InfeasibleWeights(format!(
                "μ w_p = {} must exceed λ_p = {}",
                mu * weights.get(p - 1),
                lambdas[p - 1]
            )));
        }
        Self::new(operator, mu, weights)
    }

    pub fn operator(&self) -> &dyn SymmetricOperator {
        self.operator
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn p(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    fn check_shape(&self, x: &DenseMatrix) -> Result<()> {
        if x.rows() != self.dim() || x.cols() != self.p() {
            return Err(Error::Dimension(format!(
                "iterate is {}x{}, problem needs {}x{}",
                x.rows(),
                x.cols(),
                self.dim(),
                self.p()
            )));
        }
        Ok(())
    }

    /// `1/2 tr(XᵀAX) + (μ/4) ‖XᵀX - W‖_F²`.
    pub fn objective(&self, x: &DenseMatrix) -> Result<f64> {
        self.check_shape(x)?;
        let ax = self.operator.apply(x)?;
        Ok(self.objective_with_ax(x, &ax))
    }

    /// Objective value reusing a precomputed `AX`.
    pub fn objective_with_ax(&self, x: &DenseMatrix, ax: &DenseMatrix) -> f64 {
        let quad = 0.5 * x.inner(ax);
        let penalty = 0.25 * self.mu * self.penalty_residual_sq(&x.gram());
        quad + penalty
    }

    /// `‖S - W‖_F²` for a gram matrix `S`.
    fn penalty_residual_sq(&self, s: &DenseMatrix) -> f64 {
        let p = self.p();
        let mut acc = 0.0;
        for j in 0..p {
            for i in 0..p {
                let w = if i == j { self.weights.get(i) } else { 0.0 };
                let r = s.get(i, j) - w;
                acc += r * r;
            }
        }
        acc
    }

    /// `∇f(X) = AX + μ X (XᵀX - W)`.
    pub fn gradient(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_shape(x)?;
        let ax = self.operator.apply(x)?;
        Ok(self.gradient_with_ax(x, &ax))
    }

    /// Gradient reusing a precomputed `AX`.
    pub fn gradient_with_ax(&self, x: &DenseMatrix, ax: &DenseMatrix) -> DenseMatrix {
        let mut s = x.gram();
        for i in 0..self.p() {
            let v = s.get(i, i) - self.weights.get(i);
            s.set(i, i, v);
        }
        let mut g = x.matmul(&s).expect("shapes agree");
        g.scale(self.mu);
        g.axpy(1.0, ax);
        g
    }

    /// Hessian action `A Z + μ (Z XᵀX + X ZᵀX + X XᵀZ - Z W)`.
    pub fn hessian_apply(&self, x: &DenseMatrix, z: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_shape(x)?;
        self.check_shape(z)?;
        let p = self.p();
        let s = x.gram();
        // (ZᵀX)[i][j] = z_i · x_j
        let ztx = DenseMatrix::from_fn(p, p, |i, j| dot(z.col(i), x.col(j)));
        let xtz = ztx.transpose();

        let mut out = self.operator.apply(z)?;
        let mut term = z.matmul(&s).expect("shapes agree");
        term.axpy(1.0, &x.matmul(&ztx).expect("shapes agree"));
        term.axpy(1.0, &x.matmul(&xtz).expect("shapes agree"));
        for j in 0..p {
            let w = self.weights.get(j);
            let (zc, tc) = (z.col(j), term.col_mut(j));
            for i in 0..zc.len() {
                tc[i] -= w * zc[i];
            }
        }
        out.axpy(self.mu, &term);
        Ok(out)
    }

    /// Closed-form objective value at any global minimizer:
    /// `Σᵢ [μ wᵢ²/4 - (λᵢ - μ wᵢ)²/(4μ)]`.
    pub fn minimum_value(&self, lambdas: &[f64]) -> f64 {
        let mu = self.mu;
        self.weights
            .as_slice()
            .iter()
            .zip(lambdas)
            .map(|(&w, &l)| 0.25 * mu * w * w - (l - mu * w) * (l - mu * w) / (4.0 * mu))
            .sum()
    }
}

/// Sign choice per column of a global minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Builds the global minimizer `X* = V_p diag(±sᵢ)` with
/// `sᵢ = √(wᵢ - λᵢ/μ)` from a spectrum carrying at least `p`
/// eigenvectors.
pub fn global_minimizer(
    spectrum: &Spectrum,
    mu: f64,
    weights: &WeightVector,
    signs: &[Sign],
) -> Result<DenseMatrix> {
    let p = weights.len();
    if signs.len() != p {
        return Err(Error::Dimension(format!(
            "{} signs for {p} columns",
            signs.len()
        )));
    }
    let vectors = spectrum.eigenvectors().ok_or_else(|| {
        Error::InvalidInput("spectrum carries no eigenvectors".into())
    })?;
    if vectors.cols() < p || spectrum.len() < p {
        return Err(Error::InsufficientSpectrum {
            needed: p,
            got: vectors.cols().min(spectrum.len()),
        });
    }
    let lambdas = spectrum.eigenvalues();
    let n = vectors.rows();
    let mut x = DenseMatrix::zeros(n, p);
    for i in 0..p {
        let radius = weights.get(i) - lambdas[i] / mu;
        if radius <= 0.0 {
            return Err(Error::InfeasibleWeights(format!(
                "μ w_{} = {} does not exceed λ_{} = {}",
                i + 1,
                mu * weights.get(i),
                i + 1,
                lambdas[i]
            )));
        }
        let scale = signs[i].as_f64() * radius.sqrt();
        let (src, dst) = (vectors.col(i), x.col_mut(i));
        for (d, s) in dst.iter_mut().zip(src) {
            *d = scale * s;
        }
    }
    Ok(x)
}

/// Extreme eigenvalues of the 2×2 block that couples the `(i, j)` and
/// `(j, i)` off-diagonal perturbation directions at a global minimizer:
///
/// ```text
/// 1/2 (μwᵢ + μwⱼ - λᵢ - λⱼ) ± √( 1/4 (μwᵢ + μwⱼ - λᵢ - λⱼ)² - μ(wᵢ - wⱼ)(λⱼ - λᵢ) )
/// ```
///
/// Returns `(smallest, largest)`. Both are positive whenever the weights
/// are feasible for the spectrum.
pub fn pair_hessian_eigenvalues(
    lambda_i: f64,
    lambda_j: f64,
    w_i: f64,
    w_j: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if lambda_i >= lambda_j {
        return Err(Error::InvalidInput(format!(
            "need λ_i < λ_j, got {lambda_i} and {lambda_j}"
        )));
    }
    if w_i <= w_j {
        return Err(Error::InvalidInput(format!(
            "need w_i > w_j, got {w_i} and {w_j}"
        )));
    }
    let half_trace = 0.5 * (mu * (w_i + w_j) - lambda_i - lambda_j);
    let det = mu * (w_i - w_j) * (lambda_j - lambda_i);
    let disc = half_trace * half_trace - det;
    if disc < 0.0 {
        return Err(Error::Internal(format!(
            "negative discriminant {disc} for pair block eigenvalues"
        )));
    }
    let root = disc.sqrt();
    Ok((half_trace - root, half_trace + root))
}

/// Exact condition number of the Hessian at any global minimizer:
///
/// ```text
///        max{ λₙ - λ₁,  2(μw₁ - λ₁),  max_{i<j} hi(i,j) }
/// κ  =  ─────────────────────────────────────────────────
///        min{ λ_{p+1} - λ_p,  2(μw_p - λ_p),  min_{i<j} lo(i,j) }
/// ```
///
/// where `lo`/`hi` are [`pair_hessian_eigenvalues`]. For `p = 1` the pair
/// terms are absent. `lambdas` must be the full ascending spectrum.
pub fn condition_number(lambdas: &[f64], mu: f64, weights: &WeightVector) -> Result<f64> {
    let p = weights.len();
    let n = lambdas.len();
    if n <= p {
        return Err(Error::InsufficientSpectrum { needed: p + 1, got: n });
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "eigenvalues must be in ascending order".into(),
        ));
    }
    let width = lambdas[n - 1] - lambdas[0];
    for i in 0..p {
        if lambdas[i + 1] - lambdas[i] <= DEGENERACY_RELATIVE_GAP * width {
            return Err(Error::DegenerateSpectrum(format!(
                "gap λ_{} - λ_{} = {} is below {} of the spectral width",
                i + 2,
                i + 1,
                lambdas[i + 1] - lambdas[i],
                DEGENERACY_RELATIVE_GAP
            )));
        }
    }
    if mu * weights.get(p - 1) <= lambdas[p - 1] {
        return Err(Error::InfeasibleWeights(format!(
            "μ w_p = {} must exceed λ_p = {}",
            mu * weights.get(p - 1),
            lambdas[p - 1]
        )));
    }

    let mut numerator = width.max(2.0 * (mu * weights.get(0) - lambdas[0]));
    let mut denominator =
        (lambdas[p] - lambdas[p - 1]).min(2.0 * (mu * weights.get(p - 1) - lambdas[p - 1]));
    for i in 0..p {
        for j in i + 1..p {
            let (lo, hi) = pair_hessian_eigenvalues(
                lambdas[i],
                lambdas[j],
                weights.get(i),
                weights.get(j),
                mu,
            )?;
            numerator = numerator.max(hi);
            denominator = denominator.min(lo);
        }
    }
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseColumnMatrix;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn diag_matrix(values: &[f64]) -> SparseColumnMatrix {
        let triplets: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect();
        SparseColumnMatrix::from_triplets(values.len(), &triplets).unwrap()
    }

    fn random_sparse(n: usize, fill: f64, rng: &mut impl Rng) -> SparseColumnMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, rng.gen_range(0.5..3.0)));
            for j in 0..i {
                if rng.gen_bool(fill) {
                    let v = rng.gen_range(-1.0..1.0);
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        SparseColumnMatrix::from_triplets(n, &t).unwrap()
    }

    fn random_decreasing_weights(p: usize, above: f64, rng: &mut impl Rng) -> WeightVector {
        let mut w: Vec<f64> = (0..p)
            .map(|_| above + rng.gen_range(0.5..4.0))
            .collect();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 1..p {
            // enforce strictness under ties
            if w[i] >= w[i - 1] {
                w[i] = w[i - 1] - 1e-3;
            }
        }
        WeightVector::new(w).unwrap()
    }

    #[test]
    fn objective_zero_iterate() {
        let a = diag_matrix(&[1.0, 1.0]);
        let w = WeightVector::new(vec![2.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let x = DenseMatrix::zeros(2, 1);
        assert_eq!(prob.objective(&x).unwrap(), 1.0);
    }

    #[test]
    fn objective_hand_value() {
        let a = diag_matrix(&[1.0, 2.0]);
        let w = WeightVector::new(vec![3.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let x = DenseMatrix::from_fn(2, 1, |i, _| if i == 0 { 2f64.sqrt() } else { 0.0 });
        assert_abs_diff_eq!(prob.objective(&x).unwrap(), 1.25, epsilon = 1e-15);
    }

    #[test]
    fn objective_shape_mismatch() {
        let a = diag_matrix(&[1.0, 2.0]);
        let w = WeightVector::new(vec![3.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        assert!(prob.objective(&DenseMatrix::zeros(3, 1)).is_err());
        assert!(prob.objective(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn objective_at_minimizer_matches_closed_form() {
        let a = diag_matrix(&[1.0, 2.0, 3.0]);
        let w = WeightVector::new(vec![4.0, 3.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let spectrum = Spectrum::new(
            vec![1.0, 2.0, 3.0],
            Some(DenseMatrix::identity(3)),
        )
        .unwrap();
        let x = global_minimizer(&spectrum, 1.0, prob.weights(), &[Sign::Plus, Sign::Plus])
            .unwrap();
        let closed = prob.minimum_value(&[1.0, 2.0]);
        assert_abs_diff_eq!(closed, 3.75, epsilon = 1e-15);
        assert_abs_diff_eq!(prob.objective(&x).unwrap(), closed, epsilon = 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_minimizer() {
        let a = diag_matrix(&[1.0, 2.0, 3.0]);
        let w = WeightVector::new(vec![4.0, 3.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let spectrum =
            Spectrum::new(vec![1.0, 2.0, 3.0], Some(DenseMatrix::identity(3))).unwrap();
        let x = global_minimizer(&spectrum, 1.0, prob.weights(), &[Sign::Plus, Sign::Minus])
            .unwrap();
        let g = prob.gradient(&x).unwrap();
        assert!(g.frobenius_norm() <= 1e-12);
    }

    #[test]
    fn gradient_hand_value() {
        let a = diag_matrix(&[1.0, 2.0]);
        let w = WeightVector::new(vec![1.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let x = DenseMatrix::from_fn(2, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let g = prob.gradient(&x).unwrap();
        assert_eq!(g.col(0), &[1.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let n = 20;
            let p = 3;
            let a = random_sparse(n, 0.2, &mut rng);
            let weights = random_decreasing_weights(p, 1.0, &mut rng);
            let mu = rng.gen_range(0.5..2.0);
            let prob = WeightedPenaltyProblem::new(&a, mu, weights).unwrap();
            let x = DenseMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
            let g = prob.gradient(&x).unwrap();

            let scale = x.frobenius_norm().max(1.0);
            let h = 1e-5 * scale;
            let mut g_fd = DenseMatrix::zeros(n, p);
            for l in 0..p {
                for i in 0..n {
                    let mut xp = x.clone();
                    xp.set(i, l, x.get(i, l) + h);
                    let mut xm = x.clone();
                    xm.set(i, l, x.get(i, l) - h);
                    let d = (prob.objective(&xp).unwrap() - prob.objective(&xm).unwrap())
                        / (2.0 * h);
                    g_fd.set(i, l, d);
                }
            }
            let rel = g.sub(&g_fd).frobenius_norm() / g.frobenius_norm();
            assert!(rel <= 1e-6, "finite-difference mismatch: {rel}");
        }
    }

    #[test]
    fn hessian_zero_direction() {
        let a = diag_matrix(&[1.0, 2.0]);
        let w = WeightVector::new(vec![3.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let x = DenseMatrix::from_fn(2, 1, |i, _| (i + 1) as f64);
        let z = DenseMatrix::zeros(2, 1);
        let h = prob.hessian_apply(&x, &z).unwrap();
        assert_eq!(h.frobenius_norm(), 0.0);
    }

    #[test]
    fn hessian_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_sparse(15, 0.3, &mut rng);
        let weights = random_decreasing_weights(2, 1.0, &mut rng);
        let prob = WeightedPenaltyProblem::new(&a, 1.0, weights).unwrap();
        let x = DenseMatrix::from_fn(15, 2, |_, _| rng.gen_range(-1.0..1.0));
        let z1 = DenseMatrix::from_fn(15, 2, |_, _| rng.gen_range(-1.0..1.0));
        let z2 = DenseMatrix::from_fn(15, 2, |_, _| rng.gen_range(-1.0..1.0));
        let mut sum = z1.clone();
        sum.axpy(1.0, &z2);
        let lhs = prob.hessian_apply(&x, &sum).unwrap();
        let mut rhs = prob.hessian_apply(&x, &z1).unwrap();
        rhs.axpy(1.0, &prob.hessian_apply(&x, &z2).unwrap());
        assert!(lhs.sub(&rhs).frobenius_norm() <= 1e-13 * lhs.frobenius_norm().max(1.0));
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = random_sparse(40, 0.15, &mut rng);
        let weights = random_decreasing_weights(3, 1.0, &mut rng);
        let prob = WeightedPenaltyProblem::new(&a, 1.0, weights).unwrap();
        let x = DenseMatrix::from_fn(40, 3, |_, _| rng.gen_range(-1.0..1.0));
        let z = DenseMatrix::from_fn(40, 3, |_, _| rng.gen_range(-1.0..1.0));
        let hz = prob.hessian_apply(&x, &z).unwrap();

        let h = 1e-6;
        let mut xp = x.clone();
        xp.axpy(h, &z);
        let mut xm = x.clone();
        xm.axpy(-h, &z);
        let mut fd = prob.gradient(&xp).unwrap();
        fd.axpy(-1.0, &prob.gradient(&xm).unwrap());
        fd.scale(1.0 / (2.0 * h));
        let rel = hz.sub(&fd).frobenius_norm() / hz.frobenius_norm();
        assert!(rel <= 1e-5, "hessian finite-difference mismatch: {rel}");
    }

    #[test]
    fn minimizer_hand_structure() {
        let spectrum =
            Spectrum::new(vec![1.0, 2.0, 3.0], Some(DenseMatrix::identity(3))).unwrap();
        let w = WeightVector::new(vec![4.0, 3.0]).unwrap();
        let x = global_minimizer(&spectrum, 1.0, &w, &[Sign::Plus, Sign::Plus]).unwrap();
        assert_abs_diff_eq!(x.get(0, 0), 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(x.get(1, 1), 1.0, epsilon = 1e-15);
        assert_eq!(x.get(2, 0), 0.0);
        assert_eq!(x.get(2, 1), 0.0);
        // column squared norms are wᵢ - λᵢ/μ
        assert_abs_diff_eq!(dot(x.col(0), x.col(0)), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dot(x.col(1), x.col(1)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn minimizer_sign_flip_preserves_objective() {
        let a = diag_matrix(&[1.0, 2.0, 3.0]);
        let w = WeightVector::new(vec![4.0, 3.0]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();
        let spectrum =
            Spectrum::new(vec![1.0, 2.0, 3.0], Some(DenseMatrix::identity(3))).unwrap();
        let mut values = Vec::new();
        for signs in [
            [Sign::Plus, Sign::Plus],
            [Sign::Plus, Sign::Minus],
            [Sign::Minus, Sign::Plus],
            [Sign::Minus, Sign::Minus],
        ] {
            let x = global_minimizer(&spectrum, 1.0, prob.weights(), &signs).unwrap();
            values.push(prob.objective(&x).unwrap());
        }
        for v in &values[1..] {
            assert_abs_diff_eq!(*v, values[0], epsilon = 1e-14);
        }
    }

    #[test]
    fn minimizer_boundary_weight_is_rejected() {
        let spectrum =
            Spectrum::new(vec![1.0, 2.0, 3.0], Some(DenseMatrix::identity(3))).unwrap();
        let w = WeightVector::new(vec![1.0]).unwrap(); // μ w₁ = λ₁
        assert!(matches!(
            global_minimizer(&spectrum, 1.0, &w, &[Sign::Plus]),
            Err(Error::InfeasibleWeights(_))
        ));
    }

    #[test]
    fn pair_eigenvalues_worked_case() {
        // the (i, j) = (1, 2) pair of λ = (1, 2, 4, 8) with w = (4.5, 3)
        let (lo, hi) = pair_hessian_eigenvalues(1.0, 2.0, 4.5, 3.0, 1.0).unwrap();
        let root = 14.25f64.sqrt();
        assert_abs_diff_eq!(lo, (4.5 - root) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, (4.5 + root) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lo, 0.36254, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, 4.13746, epsilon = 1e-5);
        assert!(lo > 0.0 && hi > 0.0);
        // cross-check with a direct 2x2 symmetric eigensolve
        let (a, b, d) = (4.5 - 2.0, (3.5f64).sqrt(), 3.0 - 1.0);
        let half = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        assert_abs_diff_eq!(lo, half - r, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, half + r, epsilon = 1e-14);
    }

    #[test]
    fn pair_eigenvalue_product_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let li = rng.gen_range(-2.0..2.0);
            let lj = li + rng.gen_range(0.1..3.0);
            let mu = rng.gen_range(0.5..2.0);
            // keep μ wⱼ above λⱼ so the pair block is positive definite
            let wj = (lj + rng.gen_range(0.1..2.0)) / mu;
            let wi = wj + rng.gen_range(0.1..2.0);
            let (lo, hi) = pair_hessian_eigenvalues(li, lj, wi, wj, mu).unwrap();
            let det = (mu * wi - lj) * (mu * wj - li) - (mu * wi - li) * (mu * wj - lj);
            assert_abs_diff_eq!(lo * hi, det, epsilon = 1e-10 * det.abs().max(1.0));
            assert!(lo > 0.0);
        }
    }

    #[test]
    fn pair_eigenvalue_preconditions() {
        assert!(pair_hessian_eigenvalues(2.0, 1.0, 4.0, 3.0, 1.0).is_err());
        assert!(pair_hessian_eigenvalues(1.0, 2.0, 3.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn condition_number_worked_case() {
        let lambdas = [1.0, 2.0, 4.0, 8.0];
        let w = WeightVector::new(vec![4.5, 3.0]).unwrap();
        let kappa = condition_number(&lambdas, 1.0, &w).unwrap();
        let lo = (4.5 - 14.25f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(kappa, 7.0 / lo, epsilon = 1e-12);
        assert_abs_diff_eq!(kappa, 19.308, epsilon = 1e-3);
    }

    #[test]
    fn condition_number_single_column() {
        let lambdas = [0.0, 1.0, 2.5, 7.0];
        let w = WeightVector::new(vec![2.0]).unwrap();
        let kappa = condition_number(&lambdas, 1.0, &w).unwrap();
        let num = (7.0f64).max(2.0 * 2.0);
        let den = (1.0f64).min(2.0 * 2.0);
        assert_abs_diff_eq!(kappa, num / den, epsilon = 1e-14);
    }

    #[test]
    fn condition_number_dominates_gap_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let p = rng.gen_range(1..5usize);
            let n = p + rng.gen_range(2..8usize);
            let mut lambdas = vec![rng.gen_range(-3.0..0.0)];
            for _ in 1..n {
                let prev = *lambdas.last().unwrap();
                lambdas.push(prev + rng.gen_range(0.1..2.0));
            }
            let w1_hi = 0.5 * (lambdas[0] + lambdas[n - 1]);
            let wp_lo = 0.5 * (lambdas[p - 1] + lambdas[p]);
            if w1_hi <= wp_lo {
                continue;
            }
            let w: Vec<f64> = (0..p)
                .map(|i| wp_lo + (w1_hi - wp_lo) * (p - i) as f64 / p as f64)
                .collect();
            let Ok(weights) = WeightVector::new(w) else {
                continue;
            };
            let kappa = condition_number(&lambdas, 1.0, &weights).unwrap();
            let ratio = (lambdas[n - 1] - lambdas[0]) / (lambdas[p] - lambdas[p - 1]);
            assert!(kappa >= ratio - 1e-10, "κ = {kappa} < {ratio}");
        }
    }

    #[test]
    fn condition_number_degenerate_gap_rejected() {
        let lambdas = [1.0, 1.0 + 1e-15, 4.0, 8.0];
        let w = WeightVector::new(vec![4.0, 3.0]).unwrap();
        assert!(matches!(
            condition_number(&lambdas, 1.0, &w),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn condition_number_needs_spectrum_beyond_p() {
        let w = WeightVector::new(vec![4.0, 3.0]).unwrap();
        assert!(matches!(
            condition_number(&[1.0, 2.0], 1.0, &w),
            Err(Error::InsufficientSpectrum { .. })
        ));
    }

    #[test]
    fn saddle_direction_traces_are_exact() {
        // diagonal instance: stationary point uses σ_j = λ₃ in column 2
        // while λ₂ < σ_j stays unused.
        let lambdas = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
        let a = diag_matrix(&lambdas);
        let w = WeightVector::new(vec![5.0, 4.5]).unwrap();
        let prob = WeightedPenaltyProblem::new(&a, 1.0, w).unwrap();

        // swapped stationary point: columns use (λ₁, λ₃)
        let mut x = DenseMatrix::zeros(8, 2);
        x.set(0, 0, (5.0f64 - 0.5).sqrt());
        x.set(2, 1, (4.5f64 - 1.5).sqrt());
        assert!(prob.gradient(&x).unwrap().frobenius_norm() <= 1e-12);

        // direction inserting the unused v₂ into column 2
        let mut z = DenseMatrix::zeros(8, 2);
        z.set(1, 1, 1.0);
        let t = z.inner(&prob.hessian_apply(&x, &z).unwrap());
        let expected = 1.0 - 1.5; // λ_i - σ_j
        assert_abs_diff_eq!(t, expected, epsilon = 1e-12);
        assert!(t < 0.0);

        // rank-deficient stationary point: second column zero
        let mut x = DenseMatrix::zeros(8, 2);
        x.set(0, 0, (5.0f64 - 0.5).sqrt());
        assert!(prob.gradient(&x).unwrap().frobenius_norm() <= 1e-12);
        let t = z.inner(&prob.hessian_apply(&x, &z).unwrap());
        let expected = 1.0 - 4.5; // λ_i - μ w_j
        assert_abs_diff_eq!(t, expected, epsilon = 1e-12);
        assert!(t < 0.0);
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![2.0, 1.0], None).is_err());
        assert!(Spectrum::new(vec![1.0, 1.0, 2.0], None).is_ok());
        let skewed = DenseMatrix::from_fn(2, 2, |i, j| ((i + 1) * (j + 1)) as f64);
        assert!(Spectrum::new(vec![1.0, 2.0], Some(skewed)).is_err());
    }
}
