//! Location kernels `f(x | theta)` and mixture densities `p_G(x)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::{MixingMeasure, Point};

const SYMMETRY_TOL: f64 = 1e-12;
const LAPLACE_DET_TOL: f64 = 1e-9;

/// Radius (in the `Sigma^{-1}` norm) below which the Laplace density is
/// evaluated at the clamped value; the formula is singular at `x = theta`.
pub const LAPLACE_MIN_RADIUS: f64 = 1e-8;

/// Cholesky factor and log-determinant of an SPD matrix.
#[derive(Debug, Clone)]
struct Factor {
    matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
    log_det: f64,
}

impl Factor {
    fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Kernel("matrix must be square and non-empty".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Kernel("matrix has non-finite entries".into()));
        }
        for i in 0..d {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Kernel("matrix is not symmetric".into()));
                }
            }
        }
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Kernel("matrix is not positive definite".into()))?;
        let lower = chol.l();
        let log_det = 2.0 * lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Factor { matrix, lower, log_det })
    }

    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(x - theta)^T M^{-1} (x - theta)` by a forward triangular solve.
    fn quad_form(&self, theta: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = x[i] - theta[i];
            for k in 0..i {
                s -= self.lower[(i, k)] * y[k];
            }
            y[i] = s / self.lower[(i, i)];
        }
        y.iter().map(|v| v * v).sum()
    }

    fn inverse(&self) -> DMatrix<f64> {
        self.matrix.clone().cholesky().expect("factored once already").inverse()
    }
}

/// Gaussian location kernel `N(x | theta, Sigma)` with fixed covariance.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    factor: Factor,
    precision: DMatrix<f64>,
}

impl GaussianKernel {
    pub fn new(sigma: Vec<Vec<f64>>) -> Result<Self> {
        let factor = Factor::new(sigma)?;
        let precision = factor.inverse();
        Ok(GaussianKernel { factor, precision })
    }

    /// `scale * I_d`.
    pub fn isotropic(d: usize, scale: f64) -> Result<Self> {
        let rows = (0..d).map(|i| (0..d).map(|j| if i == j { scale } else { 0.0 }).collect()).collect();
        Self::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.factor.matrix[(i, j)]).collect()).collect()
    }

    pub(crate) fn precision_entry(&self, i: usize, j: usize) -> f64 {
        self.precision[(i, j)]
    }

    /// `log |2 pi Sigma|^{-1/2}`, the log-density at `x = theta`.
    pub fn log_peak(&self) -> f64 {
        -0.5 * (self.dim() as f64 * (2.0 * std::f64::consts::PI).ln() + self.factor.log_det)
    }

    /// Unchecked log-density on raw coordinates; dimensions must agree.
    pub(crate) fn log_density_raw(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.log_peak() - 0.5 * self.factor.quad_form(theta, x)
    }

    pub fn log_density(&self, theta: &Point, x: &Point) -> Result<f64> {
        check_dim(self.dim(), theta)?;
        check_dim(self.dim(), x)?;
        Ok(self.log_density_raw(theta.coords(), x.coords()))
    }

    pub fn density(&self, theta: &Point, x: &Point) -> Result<f64> {
        self.log_density(theta, x).map(f64::exp)
    }
}

/// Multivariate Laplace location kernel with shape `Sigma` (`|Sigma| = 1`)
/// and scale `lambda`.
#[derive(Debug, Clone)]
pub struct LaplaceKernel {
    factor: Factor,
    lambda: f64,
}

impl LaplaceKernel {
    pub fn new(sigma: Vec<Vec<f64>>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Kernel(format!("lambda must be positive, got {lambda}")));
        }
        let factor = Factor::new(sigma)?;
        if (factor.log_det.exp() - 1.0).abs() > LAPLACE_DET_TOL {
            return Err(Error::Kernel("Laplace shape matrix must have unit determinant".into()));
        }
        Ok(LaplaceKernel { factor, lambda })
    }

    pub fn identity(d: usize, lambda: f64) -> Result<Self> {
        let rows = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(rows, lambda)
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Distance `||x - theta||` in the `Sigma^{-1}` norm.
    pub fn radius(&self, theta: &Point, x: &Point) -> Result<f64> {
        check_dim(self.dim(), theta)?;
        check_dim(self.dim(), x)?;
        Ok(self.factor.quad_form(theta.coords(), x.coords()).sqrt())
    }

    pub fn log_density(&self, theta: &Point, x: &Point) -> Result<f64> {
        let m = self.radius(theta, x)?.max(LAPLACE_MIN_RADIUS);
        let d = self.dim() as f64;
        let nu = d / 2.0 - 1.0;
        let z = (2.0 / self.lambda).sqrt() * m;
        let base = std::f64::consts::LN_2 - self.lambda.ln() - 0.5 * d * (2.0 * std::f64::consts::PI).ln();
        Ok(base + ln_bessel_k(nu, z) - nu * ((self.lambda / 2.0).sqrt() * m).ln())
    }

    pub fn density(&self, theta: &Point, x: &Point) -> Result<f64> {
        self.log_density(theta, x).map(f64::exp)
    }
}

/// Either supported location family.
#[derive(Debug, Clone)]
pub enum Kernel {
    Gaussian(GaussianKernel),
    Laplace(LaplaceKernel),
}

impl Kernel {
    pub fn dim(&self) -> usize {
        match self {
            Kernel::Gaussian(k) => k.dim(),
            Kernel::Laplace(k) => k.dim(),
        }
    }

    pub fn density(&self, theta: &Point, x: &Point) -> Result<f64> {
        match self {
            Kernel::Gaussian(k) => k.density(theta, x),
            Kernel::Laplace(k) => k.density(theta, x),
        }
    }
}

impl From<GaussianKernel> for Kernel {
    fn from(k: GaussianKernel) -> Self {
        Kernel::Gaussian(k)
    }
}

impl From<LaplaceKernel> for Kernel {
    fn from(k: LaplaceKernel) -> Self {
        Kernel::Laplace(k)
    }
}

/// Evaluates `p_G(x) = sum_i p_i f(x | theta_i)`.
pub fn mixture_density(g: &MixingMeasure, kernel: &Kernel, x: &Point) -> Result<f64> {
    check_dim(g.dim(), x)?;
    if kernel.dim() != g.dim() {
        return Err(Error::Dimension { expected: g.dim(), got: kernel.dim() });
    }
    g.iter().try_fold(0.0, |acc, (theta, w)| Ok(acc + w * kernel.density(theta, x)?))
}

/// Laplace density `f(x | theta)` under `kernel`.
pub fn laplace_density(kernel: &LaplaceKernel, theta: &Point, x: &Point) -> Result<f64> {
    kernel.density(theta, x)
}

fn check_dim(expected: usize, p: &Point) -> Result<()> {
    if p.dim() != expected {
        return Err(Error::Dimension { expected, got: p.dim() });
    }
    Ok(())
}

/// `ln K_nu(z)` for real order `nu` and `z > 0`, from the integral
/// representation `K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt`.
///
/// The integrand is scaled by `e^z` so large arguments do not underflow;
/// the trapezoid rule converges geometrically for this analytic integrand.
pub fn ln_bessel_k(nu: f64, z: f64) -> f64 {
    assert!(z > 0.0, "Bessel K needs a positive argument");
    let nu = nu.abs();
    let h = (0.1 / z.sqrt()).min(0.02);
    let mut sum = 0.5;
    let mut t = h;
    loop {
        // cosh(t) - 1 = 2 sinh^2(t/2) avoids cancellation near zero.
        let s = (0.5 * t).sinh();
        let log_term = -2.0 * z * s * s + ln_cosh(nu * t);
        if log_term < -45.0 && z * 2.0 * s * s > nu * t + 45.0 {
            break;
        }
        sum += log_term.exp();
        t += h;
    }
    (sum * h).ln() - z
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (0.5 * (1.0 + (-2.0 * a).exp())).ln()
}
