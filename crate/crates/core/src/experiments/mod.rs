//! The simulation study: the four data-generating cases, posterior chains,
//! MTM over a sweep of `c`, and frequency tables of the recovered counts.

mod mfm;
mod replicate;

pub use mfm::{mfm_forward_sample, MfmPrior};
pub use replicate::{replicate, replicate_draws, write_results, FrequencyTable, Manifest, Replication, RunConfig};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dpmm::DpmmModel;
use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use crate::measure::{BoxDomain, MixingMeasure, Point};
use crate::rng::{seeded, streams};

/// A three-component isotropic Gaussian mixture plus the DP prior settings
/// used to fit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCase {
    pub name: String,
    pub means: Vec<Point>,
    /// Component covariance is `cov_scale * I`.
    pub cov_scale: f64,
    pub weights: Vec<f64>,
    pub n: usize,
    pub base: BoxDomain,
    pub alpha: f64,
}

impl ExperimentCase {
    /// One of the four built-in configurations, `"A"` to `"D"`.
    pub fn preset(name: &str) -> Result<Self> {
        let near = [[0.8, 0.8], [0.8, -0.8], [-0.8, 0.8]];
        let far = [[1.8, 1.8], [1.8, -1.8], [-1.8, 1.8]];
        let (means, cov_scale, n) = match name.to_ascii_uppercase().as_str() {
            "A" => (near, 0.05, 500),
            "B" => (near, 0.05, 1500),
            "C" => (far, 0.05, 500),
            "D" => (near, 0.01, 1500),
            other => return Err(Error::Config(format!("unknown case {other:?}; expected A, B, C or D"))),
        };
        Ok(ExperimentCase {
            name: name.to_ascii_uppercase(),
            means: means.iter().map(|m| Point::from(*m)).collect(),
            cov_scale,
            weights: vec![0.4, 0.3, 0.3],
            n,
            base: BoxDomain::cube(2, -6.0, 6.0)?,
            alpha: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.truth()?;
        if !(self.cov_scale > 0.0) {
            return Err(Error::Config("covariance scale must be positive".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.base.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: self.base.dim() });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Point::dim)
    }

    /// The true mixing measure `G0`.
    pub fn truth(&self) -> Result<MixingMeasure> {
        MixingMeasure::new(self.means.clone(), self.weights.clone())
    }

    pub fn kernel(&self) -> Result<GaussianKernel> {
        GaussianKernel::isotropic(self.dim(), self.cov_scale)
    }

    /// DP mixture model for `data`, with the kernel fixed at the true
    /// covariance.
    pub fn model(&self, data: Vec<Point>) -> Result<DpmmModel> {
        DpmmModel::new(self.alpha, self.base.clone(), self.kernel()?, data)
    }
}

/// Observations with the component each one was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseData {
    pub points: Vec<Point>,
    pub labels: Vec<usize>,
}

pub fn generate_case_data(case: &ExperimentCase, seed: u64) -> Result<CaseData> {
    case.validate()?;
    let mut rng = seeded(seed, streams::DATA);
    let sd = case.cov_scale.sqrt();
    let mut points = Vec::with_capacity(case.n);
    let mut labels = Vec::with_capacity(case.n);
    for _ in 0..case.n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut label = case.weights.len() - 1;
        for (m, w) in case.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                label = m;
                break;
            }
        }
        let coords = case.means[label]
            .coords()
            .iter()
            .map(|mu| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + sd * z
            })
            .collect();
        points.push(Point::new(coords)?);
        labels.push(label);
    }
    Ok(CaseData { points, labels })
}

/// `1 - sum_i c / p_i`; may be negative.
pub fn posterior_mode_bound(weights: &[f64], c: f64) -> f64 {
    1.0 - weights.iter().map(|p| c / p).sum::<f64>()
}
