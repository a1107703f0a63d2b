//! Forward sampler for the mixture-of-finite-mixtures prior.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{BoxDomain, MixingMeasure, Point};
use crate::rng::{seeded, streams};

/// `K ~ q_K`, `p | K=k ~ Dirichlet(gamma/k, ..., gamma/k)`, atoms i.i.d.
/// uniform on `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfmPrior {
    /// `q_k[m]` is the probability of `K = m + 1`.
    pub q_k: Vec<f64>,
    pub gamma: f64,
    pub base: BoxDomain,
}

impl MfmPrior {
    pub fn new(q_k: Vec<f64>, gamma: f64, base: BoxDomain) -> Result<Self> {
        let prior = MfmPrior { q_k, gamma, base };
        prior.validate()?;
        Ok(prior)
    }

    /// Poisson(`lambda`) conditioned on `K >= 1`, cut at `k_max`.
    pub fn truncated_poisson(lambda: f64, k_max: usize, gamma: f64, base: BoxDomain) -> Result<Self> {
        if !(lambda > 0.0) || k_max == 0 {
            return Err(Error::Config("need lambda > 0 and k_max >= 1".into()));
        }
        let mut pmf = Vec::with_capacity(k_max);
        let mut term = (-lambda).exp();
        for k in 1..=k_max {
            term *= lambda / k as f64;
            pmf.push(term);
        }
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= total);
        MfmPrior::new(pmf, gamma, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_k.is_empty() || self.q_k.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Config("q_K must be a nonnegative pmf".into()));
        }
        let total: f64 = self.q_k.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("q_K sums to {total}")));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config("gamma must be positive".into()));
        }
        Ok(())
    }

    pub fn mean_k(&self) -> f64 {
        self.q_k.iter().enumerate().map(|(m, p)| (m + 1) as f64 * p).sum()
    }
}

pub fn mfm_forward_sample(prior: &MfmPrior, seed: u64) -> Result<MixingMeasure> {
    prior.validate()?;
    let mut rng = seeded(seed, streams::MFM);
    let u: f64 = rand::Rng::random(&mut rng);
    let mut acc = 0.0;
    let mut k = prior.q_k.len();
    for (m, p) in prior.q_k.iter().enumerate() {
        acc += p;
        if u < acc {
            k = m + 1;
            break;
        }
    }
    let shape = Gamma::new(prior.gamma / k as f64, 1.0).map_err(|e| Error::Config(e.to_string()))?;
    let mut w: Vec<f64> = (0..k).map(|_| shape.sample(&mut rng)).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        w.iter_mut().for_each(|x| *x /= total);
    } else {
        // Every gamma draw underflowed; the Dirichlet mass is then on a vertex.
        let pick = rand::Rng::random_range(&mut rng, 0..k);
        w = (0..k).map(|m| if m == pick { 1.0 } else { 0.0 }).collect();
    }
    let atoms: Vec<Point> = (0..k).map(|_| prior.base.sample_uniform(&mut rng)).collect();
    MixingMeasure::new(atoms, w)
}
