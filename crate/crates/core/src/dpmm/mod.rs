//! Dirichlet-process mixture of location Gaussians with a uniform base
//! measure on a box, sampled by Gibbs scans (auxiliary-parameter assignment
//! updates plus random-walk location updates) and non-conjugate
//! restricted-Gibbs split-merge moves.

mod chain;
mod gibbs;
pub mod split_merge;
pub mod truncnorm;

pub use chain::{run_chain, Sampler};
pub use gibbs::gibbs_scan;
pub use split_merge::split_merge_move;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use crate::measure::{BoxDomain, MixingMeasure, Point};

/// Observation model used by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Likelihood {
    Gaussian,
    /// Constant density; the chain then targets the prior (used to check the
    /// sampler against exact CRP marginals).
    Flat,
}

#[derive(Debug, Clone)]
pub struct DpmmModel {
    pub alpha: f64,
    pub base: BoxDomain,
    pub kernel: GaussianKernel,
    pub data: Vec<Point>,
    pub likelihood: Likelihood,
}

impl DpmmModel {
    pub fn new(alpha: f64, base: BoxDomain, kernel: GaussianKernel, data: Vec<Point>) -> Result<Self> {
        let model = DpmmModel { alpha, base, kernel, data, likelihood: Likelihood::Gaussian };
        model.validate()?;
        Ok(model)
    }

    /// Same model with the likelihood switched off.
    pub fn prior_only(mut self) -> Self {
        self.likelihood = Likelihood::Flat;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.data.is_empty() {
            return Err(Error::Config("no observations".into()));
        }
        let d = self.base.dim();
        if self.kernel.dim() != d {
            return Err(Error::Dimension { expected: d, got: self.kernel.dim() });
        }
        if let Some(p) = self.data.iter().find(|p| p.dim() != d) {
            return Err(Error::Dimension { expected: d, got: p.dim() });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `ln f(x_i | theta)`.
    #[inline]
    pub(crate) fn log_lik(&self, i: usize, theta: &[f64]) -> f64 {
        match self.likelihood {
            Likelihood::Gaussian => self.kernel.log_density_raw(theta, self.data[i].coords()),
            Likelihood::Flat => 0.0,
        }
    }

    pub(crate) fn cluster_log_lik(&self, members: &[usize], theta: &[f64]) -> f64 {
        match self.likelihood {
            Likelihood::Gaussian => members.iter().map(|&i| self.log_lik(i, theta)).sum(),
            Likelihood::Flat => 0.0,
        }
    }

    /// Log-density of the uniform base measure at `theta`.
    pub(crate) fn log_base(&self, theta: &[f64]) -> f64 {
        let inside = theta
            .iter()
            .zip(self.base.lower().iter().zip(self.base.upper()))
            .all(|(x, (l, u))| l <= x && x <= u);
        if inside {
            -self.base.volume().ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Per-iteration move counts: restricted scans to build the split launch
/// state, split-merge proposals, full Gibbs scans, and restricted updates to
/// build the merge launch state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveScheme {
    pub split_launch_scans: usize,
    pub split_merge_moves: usize,
    pub gibbs_scans: usize,
    pub merge_launch_scans: usize,
}

impl Default for MoveScheme {
    fn default() -> Self {
        MoveScheme { split_launch_scans: 5, split_merge_moves: 1, gibbs_scans: 1, merge_launch_scans: 5 }
    }
}

/// Tuning of the non-conjugate moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    /// Auxiliary parameters drawn from the base measure for the new-cluster
    /// option of each assignment update.
    pub aux_params: usize,
    /// Random-walk Metropolis updates per cluster location per Gibbs scan.
    pub location_updates: usize,
    /// Standard deviation of the random-walk proposal (reflected at the box).
    pub proposal_sd: f64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings { aux_params: 3, location_updates: 5, proposal_sd: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub iterations: usize,
    pub thin: usize,
    #[serde(default)]
    pub scheme: MoveScheme,
    #[serde(default)]
    pub sampler: SamplerSettings,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(burn_in: usize, iterations: usize, thin: usize, seed: u64) -> Result<Self> {
        let cfg = ChainConfig {
            burn_in,
            iterations,
            thin,
            scheme: MoveScheme::default(),
            sampler: SamplerSettings::default(),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 2000 burn-in, 18000 kept iterations, every 10th retained.
    pub fn full_protocol(seed: u64) -> Self {
        ChainConfig::new(2000, 18000, 10, seed).expect("valid protocol")
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.sampler.aux_params == 0 {
            return Err(Error::Config("need at least one auxiliary parameter".into()));
        }
        if !(self.sampler.proposal_sd > 0.0) {
            return Err(Error::Config("proposal sd must be positive".into()));
        }
        Ok(())
    }

    /// Number of draws `run_chain` emits.
    pub fn retained_draws(&self) -> usize {
        self.iterations / self.thin
    }
}

/// Partition of the observations with one location per cluster. Labels are
/// dense: `0..num_clusters()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpmmState {
    pub assignments: Vec<usize>,
    pub cluster_params: Vec<Point>,
    pub iteration: u64,
    #[serde(skip)]
    sizes: Vec<usize>,
}

impl DpmmState {
    /// Everything in one cluster located at the data mean, clamped to the box.
    pub fn single_cluster(model: &DpmmModel) -> Self {
        let d = model.dim();
        let mut mean = vec![0.0; d];
        for x in &model.data {
            for (m, v) in mean.iter_mut().zip(x.coords()) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= model.n() as f64;
        }
        let loc = model.base.clamp(&Point::from_vec_unchecked(mean));
        DpmmState { assignments: vec![0; model.n()], cluster_params: vec![loc], iteration: 0, sizes: vec![model.n()] }
    }

    /// Builds a state from explicit labels and locations; labels must be
    /// dense and every cluster non-empty.
    pub fn from_parts(assignments: Vec<usize>, cluster_params: Vec<Point>) -> Result<Self> {
        let mut sizes = vec![0; cluster_params.len()];
        for &z in &assignments {
            *sizes
                .get_mut(z)
                .ok_or_else(|| Error::InvalidMeasure(format!("label {z} has no location")))? += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidMeasure("empty cluster".into()));
        }
        Ok(DpmmState { assignments, cluster_params, iteration: 0, sizes })
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_params.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn members(&self, label: usize) -> Vec<usize> {
        self.assignments.iter().enumerate().filter(|(_, z)| **z == label).map(|(i, _)| i).collect()
    }

    /// Checks labels, sizes and that locations lie in the base box.
    pub fn validate(&self, model: &DpmmModel) -> Result<()> {
        if self.assignments.len() != model.n() {
            return Err(Error::InvalidMeasure("assignment vector has wrong length".into()));
        }
        let mut sizes = vec![0usize; self.num_clusters()];
        for &z in &self.assignments {
            if z >= sizes.len() {
                return Err(Error::InvalidMeasure(format!("label {z} has no location")));
            }
            sizes[z] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidMeasure("empty cluster".into()));
        }
        if sizes != self.sizes {
            return Err(Error::InvalidMeasure("cached cluster sizes are stale".into()));
        }
        if let Some(p) = self.cluster_params.iter().find(|p| !model.base.contains(p)) {
            return Err(Error::InvalidMeasure(format!("location {:?} outside the base box", p.coords())));
        }
        Ok(())
    }

    /// Atoms are cluster locations, weights are cluster sizes over `n`.
    pub fn to_mixing_measure(&self) -> MixingMeasure {
        let n = self.assignments.len() as f64;
        let weights = self.sizes.iter().map(|s| *s as f64 / n).collect();
        MixingMeasure::from_parts_unchecked(self.cluster_params.clone(), weights)
    }

    /// Removes an empty cluster by moving the last label into its slot.
    pub(crate) fn remove_cluster(&mut self, label: usize) {
        debug_assert_eq!(self.sizes[label], 0);
        let last = self.cluster_params.len() - 1;
        self.cluster_params.swap_remove(label);
        self.sizes.swap_remove(label);
        if label != last {
            for z in &mut self.assignments {
                if *z == last {
                    *z = label;
                }
            }
        }
    }

    pub(crate) fn add_cluster(&mut self, loc: Point) -> usize {
        self.cluster_params.push(loc);
        self.sizes.push(0);
        self.cluster_params.len() - 1
    }

    pub(crate) fn assign(&mut self, i: usize, label: usize) {
        self.sizes[self.assignments[i]] -= 1;
        self.assignments[i] = label;
        self.sizes[label] += 1;
    }
}

/// Draws an index from unnormalized log-weights.
pub(crate) fn sample_log_weights<R: rand::Rng + ?Sized>(logw: &[f64], rng: &mut R) -> usize {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logw.iter().map(|l| (l - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    for (k, l) in logw.iter().enumerate() {
        u -= (l - max).exp();
        if u < 0.0 {
            return k;
        }
    }
    logw.len() - 1
}
