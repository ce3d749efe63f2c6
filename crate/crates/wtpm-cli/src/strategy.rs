//! Weight-vector resolution for the CLI's `--weights` flag.

use anyhow::{bail, Context, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use wtpm::oracle::{operator_spectrum, DENSE_DIMENSION_CAP};
use wtpm::sparse::SymmetricOperator;
use wtpm::weights::{
    default_rayleigh_margin, gap_weights, rayleigh_weights, uniform_weights, WeightVector,
};

use crate::source::smallest_diagonal_indices;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightStrategy {
    /// Evenly spaced between the spectral midpoints; needs eigenvalues.
    AutoUniform,
    /// Gap-proportional between the spectral midpoints; needs eigenvalues.
    AutoGap,
    /// From the initial Rayleigh quotients (smallest diagonal entries);
    /// no spectrum needed.
    Rayleigh,
    /// Uniformly random strictly-decreasing weights in the feasible
    /// interval; needs eigenvalues. Used by bench sweeps.
    Random,
    /// Explicit comma-separated list.
    Explicit(Vec<f64>),
}

impl WeightStrategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto-uniform" | "uniform" => Ok(Self::AutoUniform),
            "auto-gap" | "gap" => Ok(Self::AutoGap),
            "rayleigh" => Ok(Self::Rayleigh),
            "random" => Ok(Self::Random),
            list => {
                let values: Vec<f64> = list
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .with_context(|| {
                        format!(
                            "--weights must be auto-uniform, auto-gap, rayleigh, or a \
                             comma-separated list; got {list:?}"
                        )
                    })?;
                Ok(Self::Explicit(values))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::AutoUniform => "uniform".into(),
            Self::AutoGap => "gap".into(),
            Self::Rayleigh => "rayleigh".into(),
            Self::Random => "random".into(),
            Self::Explicit(_) => "explicit".into(),
        }
    }

    pub fn needs_spectrum(&self) -> bool {
        matches!(self, Self::AutoUniform | Self::AutoGap | Self::Random)
    }

    /// Resolves the strategy to a concrete weight vector.
    ///
    /// `reference` supplies eigenvalues for the spectrum-based
    /// strategies; when absent and the matrix is small enough, the dense
    /// oracle computes them on the fly.
    pub fn resolve(
        &self,
        op: &dyn SymmetricOperator,
        p: usize,
        reference: Option<&[f64]>,
        epsilon: Option<f64>,
        seed: u64,
    ) -> Result<WeightVector> {
        match self {
            Self::Explicit(values) => {
                if values.len() != p {
                    bail!(
                        "--weights lists {} values but --p is {p}",
                        values.len()
                    );
                }
                Ok(WeightVector::new(values.clone())?)
            }
            Self::Rayleigh => {
                let (_, quotients) = smallest_diagonal_indices(op, p)?;
                let mut r = quotients;
                r.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let eps = epsilon.unwrap_or_else(|| default_rayleigh_margin(&r));
                Ok(rayleigh_weights(&r, eps)?)
            }
            Self::AutoUniform | Self::AutoGap | Self::Random => {
                let lambdas = self.spectrum(op, p, reference)?;
                let n = lambdas.len();
                match self {
                    Self::AutoUniform => Ok(uniform_weights(
                        lambdas[0],
                        lambdas[p - 1],
                        lambdas[p],
                        lambdas[n - 1],
                        p,
                    )?),
                    Self::AutoGap => Ok(gap_weights(&lambdas[..p + 1], lambdas[n - 1])?),
                    Self::Random => {
                        let hi = 0.5 * (lambdas[0] + lambdas[n - 1]);
                        let lo = 0.5 * (lambdas[p - 1] + lambdas[p]);
                        if hi <= lo {
                            bail!("feasible weight interval is empty: [{lo}, {hi}]");
                        }
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut w: Vec<f64>;
                        loop {
                            w = (0..p).map(|_| rng.gen_range(lo..hi)).collect();
                            w.sort_by(|a, b| b.partial_cmp(a).unwrap());
                            if w.windows(2).all(|pair| pair[0] > pair[1]) {
                                break;
                            }
                        }
                        Ok(WeightVector::new(w)?)
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    fn spectrum(
        &self,
        op: &dyn SymmetricOperator,
        p: usize,
        reference: Option<&[f64]>,
    ) -> Result<Vec<f64>> {
        if let Some(r) = reference {
            if r.len() < p + 1 {
                bail!(
                    "weight strategy {:?} needs at least {} reference eigenvalues, got {}",
                    self.label(),
                    p + 1,
                    r.len()
                );
            }
            return Ok(r.to_vec());
        }
        if op.dim() <= DENSE_DIMENSION_CAP {
            let s = operator_spectrum(op)?;
            return Ok(s.eigenvalues().to_vec());
        }
        bail!(
            "weight strategy {:?} needs --reference for matrices larger than {}",
            self.label(),
            DENSE_DIMENSION_CAP
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names_and_lists() {
        assert_eq!(
            WeightStrategy::parse("auto-uniform").unwrap(),
            WeightStrategy::AutoUniform
        );
        assert_eq!(
            WeightStrategy::parse("rayleigh").unwrap(),
            WeightStrategy::Rayleigh
        );
        assert_eq!(
            WeightStrategy::parse("-75.0,-75.175,-75.35").unwrap(),
            WeightStrategy::Explicit(vec![-75.0, -75.175, -75.35])
        );
        assert!(WeightStrategy::parse("bogus").is_err());
    }
}
