//! Discrete mixing measures and the tools around them: kernel densities,
//! exact Wasserstein distances, the Merge-Truncate-Merge (MTM) estimator of
//! the number of mixture components, a Dirichlet-process Gaussian mixture
//! sampler, and the simulation harness that ties them together.

// `!(x > 0.0)` is used deliberately: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dpmm;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod measure;
pub mod mtm;
pub mod rng;
pub mod wasserstein;

pub use error::{Error, Result};
pub use kernel::{mixture_density, GaussianKernel, Kernel, LaplaceKernel};
pub use measure::{BoxDomain, MixingMeasure, Point};
pub use mtm::{mtm, omega_n, srswor_order, MtmConfig, MtmResult};
pub use wasserstein::{bottleneck_match, wasserstein, TransportPlan, WassersteinResult};
