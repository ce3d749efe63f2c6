//! Weight-vector construction strategies.
//!
//! The penalty term forces each column of a minimizer onto an individual
//! eigenvector only when the diagonal weights are distinct, and the local
//! convergence rate depends on how the weights spread over the leading
//! eigenvalue gaps. Three constructors are provided: evenly spaced
//! weights between spectral midpoints, gap-proportional weights that
//! maximize the pairwise spread score, and a cheap heuristic built from
//! initial Rayleigh quotients when no spectrum is known.

use crate::error::{Error, Result};

/// Strictly decreasing diagonal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates strict descent.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidInput("weight vector is empty".into()));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        if w.windows(2).any(|pair| pair[0] <= pair[1]) {
            return Err(Error::InfeasibleWeights(format!(
                "weights must be strictly decreasing, got {w:?}"
            )));
        }
        Ok(Self(w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Checks the spectral bracket `(λ₁+λₙ)/2 ≥ w₁` and
    /// `w_p ≥ (λ_p+λ_{p+1})/2` against a reference spectrum.
    pub fn satisfies_spectral_bracket(&self, lambdas: &[f64]) -> bool {
        let p = self.len();
        if lambdas.len() < p + 1 {
            return false;
        }
        let upper = 0.5 * (lambdas[0] + lambdas[lambdas.len() - 1]);
        let lower = 0.5 * (lambdas[p - 1] + lambdas[p]);
        upper >= self.get(0) && self.get(p - 1) >= lower
    }
}

fn check_leading_gaps(lambdas: &[f64]) -> Result<()> {
    for pair in lambdas.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::DegenerateSpectrum(format!(
                "leading eigenvalues must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

/// Evenly spaced weights: `w₁ = (λ₁+λₙ)/2`, `w_p = (λ_p+λ_{p+1})/2`,
/// interior entries on the straight line between them. For `p = 1` the
/// single entry is `(λ₁+λₙ)/2`.
pub fn uniform_weights(
    lambda_1: f64,
    lambda_p: f64,
    lambda_p1: f64,
    lambda_n: f64,
    p: usize,
) -> Result<WeightVector> {
    if p == 0 {
        return Err(Error::InvalidInput("block width must be positive".into()));
    }
    if !(lambda_1 <= lambda_p && lambda_p < lambda_p1 && lambda_p1 <= lambda_n) {
        return Err(Error::InvalidInput(format!(
            "need λ₁ ≤ λ_p < λ_{{p+1}} ≤ λ_n, got ({lambda_1}, {lambda_p}, {lambda_p1}, {lambda_n})"
        )));
    }
    let w1 = 0.5 * (lambda_1 + lambda_n);
    if p == 1 {
        return WeightVector::new(vec![w1]);
    }
    let wp = 0.5 * (lambda_p + lambda_p1);
    if w1 <= wp {
        return Err(Error::InfeasibleWeights(format!(
            "endpoints collapse: w₁ = {w1} ≤ w_p = {wp}; need λ_p + λ_{{p+1}} < λ₁ + λ_n"
        )));
    }
    let step = (w1 - wp) / (p - 1) as f64;
    let mut w: Vec<f64> = (0..p - 1).map(|i| w1 - step * i as f64).collect();
    w.push(wp);
    WeightVector::new(w)
}

/// Gap-proportional weights with the same endpoints as
/// [`uniform_weights`]: consecutive differences satisfy
/// `wᵢ - wᵢ₊₁ ∝ 1 / (λᵢ₊₁ - λᵢ)`, normalized so the increments telescope
/// to `w₁ - w_p`. This choice maximizes the pairwise spread score among
/// weight vectors with those endpoints.
///
/// `leading` must hold the first `p + 1` eigenvalues; `lambda_n` is the
/// largest eigenvalue or an upper bound for it.
pub fn gap_weights(leading: &[f64], lambda_n: f64) -> Result<WeightVector> {
    if leading.len() < 2 {
        return Err(Error::InsufficientSpectrum {
            needed: 2,
            got: leading.len(),
        });
    }
    check_leading_gaps(leading)?;
    let p = leading.len() - 1;
    let w1 = 0.5 * (leading[0] + lambda_n);
    if p == 1 {
        return WeightVector::new(vec![w1]);
    }
    let wp = 0.5 * (leading[p - 1] + leading[p]);
    if w1 <= wp {
        return Err(Error::InfeasibleWeights(format!(
            "endpoints collapse: w₁ = {w1} ≤ w_p = {wp}"
        )));
    }
    // Increments among the first p eigenvalues only.
    let inv_gap_sum: f64 = (0..p - 1).map(|j| 1.0 / (leading[j + 1] - leading[j])).sum();
    let scale = (w1 - wp) / inv_gap_sum;
    let mut w = Vec::with_capacity(p);
    let mut current = w1;
    w.push(current);
    for i in 0..p - 2 {
        current -= scale / (leading[i + 1] - leading[i]);
        w.push(current);
    }
    // the increments telescope to w₁ - w_p; pin the endpoint exactly
    w.push(wp);
    WeightVector::new(w)
}

/// Default margin for [`rayleigh_weights`]: scale-aware and strictly
/// positive even for degenerate Rayleigh values.
pub fn default_rayleigh_margin(rayleigh: &[f64]) -> f64 {
    let r1 = rayleigh[0];
    let rp = rayleigh[rayleigh.len() - 1];
    (1e-3 * (rp - r1)).max(1e-6 * rp.abs()).max(1e-8)
}

/// Weights from initial Rayleigh quotients: `w_p = r_p + ε`,
/// `w₁ = 2 w_p - r₁`, interior evenly spaced. For `p = 1` the entry is
/// `2 (r₁ + ε) - r₁`, keeping the same margin above `r₁`.
pub fn rayleigh_weights(rayleigh: &[f64], epsilon: f64) -> Result<WeightVector> {
    if rayleigh.is_empty() {
        return Err(Error::InvalidInput("no Rayleigh quotients supplied".into()));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "margin must be positive, got {epsilon}"
        )));
    }
    if rayleigh.windows(2).any(|pair| pair[1] < pair[0]) {
        return Err(Error::InvalidInput(
            "Rayleigh quotients must be ascending".into(),
        ));
    }
    let p = rayleigh.len();
    let wp = rayleigh[p - 1] + epsilon;
    let w1 = 2.0 * wp - rayleigh[0];
    if p == 1 {
        return WeightVector::new(vec![w1]);
    }
    let step = (w1 - wp) / (p - 1) as f64;
    let mut w: Vec<f64> = (0..p - 1).map(|i| w1 - step * i as f64).collect();
    w.push(wp);
    WeightVector::new(w)
}

/// Pairwise spread score `min_{i<j} (wᵢ - wⱼ)(λⱼ - λᵢ)` over the first
/// `p` eigenvalues. Returns `+∞` for `p = 1`, where the pair set is
/// empty.
pub fn spread_score(weights: &WeightVector, lambdas: &[f64]) -> f64 {
    let p = weights.len();
    assert!(
        lambdas.len() >= p,
        "need {p} eigenvalues, got {}",
        lambdas.len()
    );
    let mut best = f64::INFINITY;
    for i in 0..p {
        for j in i + 1..p {
            let score = (weights.get(i) - weights.get(j)) * (lambdas[j] - lambdas[i]);
            if score < best {
                best = score;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_endpoints_only() {
        let w = uniform_weights(1.0, 2.0, 4.0, 8.0, 2).unwrap();
        assert_eq!(w.as_slice(), &[4.5, 3.0]);
    }

    #[test]
    fn uniform_interior_midpoints() {
        // λ = (1, 2, 4, 5, ..., 9): first three 1, 2, 4, then λ₄ = 5, λₙ = 9.
        let w = uniform_weights(1.0, 4.0, 5.0, 9.0, 3).unwrap();
        assert_eq!(w.as_slice(), &[5.0, 4.75, 4.5]);
    }

    #[test]
    fn uniform_single_column() {
        let w = uniform_weights(1.0, 1.0, 2.0, 9.0, 1).unwrap();
        assert_eq!(w.as_slice(), &[5.0]);
    }

    #[test]
    fn uniform_endpoint_collapse_is_rejected() {
        // λ_p + λ_{p+1} ≥ λ₁ + λ_n
        assert!(matches!(
            uniform_weights(0.0, 5.0, 6.0, 7.0, 3),
            Err(Error::InfeasibleWeights(_))
        ));
    }

    #[test]
    fn gap_weights_hand_case() {
        let w = gap_weights(&[1.0, 2.0, 4.0, 5.0], 9.0).unwrap();
        assert_abs_diff_eq!(w.get(0), 5.0, epsilon = 0.0);
        assert_abs_diff_eq!(w.get(1), 5.0 - 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.get(2), 4.5, epsilon = 1e-15);
    }

    #[test]
    fn gap_weights_equal_gaps_match_uniform() {
        let gap = gap_weights(&[1.0, 2.0, 3.0, 4.0], 9.0).unwrap();
        let uni = uniform_weights(1.0, 3.0, 4.0, 9.0, 3).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(gap.get(i), uni.get(i), epsilon = 1e-14);
        }
    }

    #[test]
    fn gap_increments_telescope() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = rng.gen_range(2..7usize);
            let (lambdas, ln) = random_spectrum(&mut rng, p);
            let w = gap_weights(&lambdas, ln).unwrap();
            let total: f64 = (0..p - 1).map(|i| w.get(i) - w.get(i + 1)).sum();
            assert_abs_diff_eq!(total, w.get(0) - w.get(p - 1), epsilon = 1e-14);
        }
    }

    #[test]
    fn gap_weights_zero_gap_is_degenerate() {
        assert!(matches!(
            gap_weights(&[1.0, 1.0, 2.0], 9.0),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn rayleigh_degenerate_quotients_still_strict() {
        let w = rayleigh_weights(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(w.as_slice(), &[2.0, 1.5, 1.0]);
    }

    #[test]
    fn rayleigh_single_column_margin() {
        let w = rayleigh_weights(&[5.0], 0.5).unwrap();
        assert_eq!(w.as_slice(), &[6.0]);
    }

    #[test]
    fn rayleigh_fixture() {
        // r₁ = -75.7 with w_p pinned at -75.35 via the margin.
        let w = rayleigh_weights(&[-75.7, -75.62, -75.6], 0.25).unwrap();
        assert_abs_diff_eq!(w.get(0), -75.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.get(1), -75.175, epsilon = 1e-12);
        assert_eq!(w.get(2), -75.35);
    }

    #[test]
    fn default_margin_is_positive_and_scaled() {
        assert_eq!(default_rayleigh_margin(&[0.0, 0.0]), 1e-8);
        let m = default_rayleigh_margin(&[-75.7, -75.4]);
        assert!(m > 0.0 && m < 0.1);
        assert_abs_diff_eq!(
            default_rayleigh_margin(&[0.0, 10.0]),
            1e-2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn spread_score_single_pair() {
        let w = WeightVector::new(vec![4.5, 3.0]).unwrap();
        assert_eq!(spread_score(&w, &[1.0, 2.0]), 1.5);
    }

    #[test]
    fn spread_score_no_pair_sentinel() {
        let w = WeightVector::new(vec![2.0]).unwrap();
        assert_eq!(spread_score(&w, &[1.0]), f64::INFINITY);
    }

    // λₙ exceeds λ_{p+1} by more than the leading spread, which rules out
    // endpoint collapse (λ_p + λ_{p+1} < λ₁ + λₙ).
    fn random_spectrum(rng: &mut impl Rng, p: usize) -> (Vec<f64>, f64) {
        let mut lambdas = vec![rng.gen_range(-5.0..0.0)];
        for _ in 0..p {
            let prev = *lambdas.last().unwrap();
            lambdas.push(prev + rng.gen_range(0.1..2.0));
        }
        let ln = lambdas[p] + (lambdas[p] - lambdas[0]) + rng.gen_range(0.5..20.0);
        (lambdas, ln)
    }

    #[test]
    fn gap_weights_attain_closed_form_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let p = rng.gen_range(2..7usize);
            let (lambdas, ln) = random_spectrum(&mut rng, p);
            let w = gap_weights(&lambdas, ln).unwrap();
            let inv_gap_sum: f64 = (0..p - 1)
                .map(|j| 1.0 / (lambdas[j + 1] - lambdas[j]))
                .sum();
            let expected = (w.get(0) - w.get(p - 1)) / inv_gap_sum;
            let score = spread_score(&w, &lambdas[..p]);
            assert_abs_diff_eq!(score, expected, epsilon = 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn uniform_score_sandwiched_by_gap_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p = rng.gen_range(2..7usize);
            let (lambdas, ln) = random_spectrum(&mut rng, p);
            let gap = gap_weights(&lambdas, ln).unwrap();
            let uni = uniform_weights(lambdas[0], lambdas[p - 1], lambdas[p], ln, p).unwrap();
            let f_gap = spread_score(&gap, &lambdas[..p]);
            let f_uni = spread_score(&uni, &lambdas[..p]);
            assert!(f_uni <= f_gap + 1e-12);
            assert!(f_gap / (p - 1) as f64 <= f_uni + 1e-12);
        }
    }

    #[test]
    fn gap_weights_beat_random_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let lambdas = [0.3, 0.9, 1.2, 2.8, 3.1];
        let ln = 11.0;
        let p = 4;
        let w = gap_weights(&lambdas, ln).unwrap();
        let best = spread_score(&w, &lambdas[..p]);
        let (w1, wp) = (w.get(0), w.get(p - 1));
        for _ in 0..10_000 {
            let mut interior: Vec<f64> = (0..p - 2).map(|_| rng.gen_range(wp..w1)).collect();
            interior.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mut cand = vec![w1];
            cand.extend_from_slice(&interior);
            cand.push(wp);
            let Ok(cand) = WeightVector::new(cand) else {
                continue;
            };
            assert!(spread_score(&cand, &lambdas[..p]) <= best + 1e-12);
        }
    }

    #[test]
    fn constructors_satisfy_spectral_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..50 {
            let p = rng.gen_range(1..6usize);
            let (lambdas, ln) = random_spectrum(&mut rng, p);
            let mut full = lambdas.clone();
            full.push(ln);
            let uni = uniform_weights(lambdas[0], lambdas[p - 1], lambdas[p], ln, p).unwrap();
            assert!(uni.satisfies_spectral_bracket(&full));
            let gap = gap_weights(&lambdas, ln).unwrap();
            assert!(gap.satisfies_spectral_bracket(&full));
        }
    }
}
