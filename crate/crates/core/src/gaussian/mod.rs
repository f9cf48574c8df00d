//! Lattice Gaussian measures: flatness factor, smoothing parameter, discrete
//! Gaussian sampling and the bounds built on them.

mod convolution;
mod pmf;
mod sampler;
mod subgaussian;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{realify, ComplexLattice, Interval};

pub use convolution::{convolution_distance, ConvolutionReport};
pub use pmf::{brute_force_pmf, Pmf, PmfEntry};
pub use sampler::{sample_discrete_gaussian, sample_z, KleinSampler, Sample, SamplerGate};
pub use subgaussian::{
    default_test_vectors, subgaussian_certificate, subgaussian_check, SubgaussianCertificate,
    SubgaussianReport, SubgaussianRow,
};

/// Relative precision requested from theta sums behind flatness values.
pub const FLATNESS_REL_TOL: f64 = 1e-6;

/// Covariance of a circularly symmetric complex Gaussian, per complex dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec {
    /// `Σ = σ² I`.
    Scalar(f64),
    /// Hermitian positive definite `Σ`.
    Matrix(DMatrix<Complex64>),
}

impl CovarianceSpec {
    pub fn scalar(sigma: f64) -> Self {
        Self::Scalar(sigma)
    }

    pub fn isotropic_sigma(&self) -> Option<f64> {
        match self {
            Self::Scalar(s) => Some(*s),
            Self::Matrix(_) => None,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            Self::Scalar(s) => {
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::Precondition(format!(
                        "σ must be positive and finite, got {s}"
                    )));
                }
            }
            Self::Matrix(m) => {
                if m.nrows() != k || m.ncols() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        got: m.nrows(),
                    });
                }
                let herm = (m - m.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if !scale.is_finite() || herm > 1e-10 * scale.max(1e-300) {
                    return Err(Error::Precondition("covariance is not Hermitian".into()));
                }
                let eig = self.eigenvalues(k);
                let trace: f64 = eig.iter().sum();
                if eig.iter().any(|&l| l <= 1e-12 * trace / k as f64) {
                    return Err(Error::Precondition(
                        "covariance is not positive definite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn matrix(&self, k: usize) -> DMatrix<Complex64> {
        match self {
            Self::Scalar(s) => DMatrix::identity(k, k) * Complex64::new(s * s, 0.0),
            Self::Matrix(m) => m.clone(),
        }
    }

    pub fn eigenvalues(&self, k: usize) -> Vec<f64> {
        match self {
            Self::Scalar(s) => vec![s * s; k],
            Self::Matrix(m) => SymmetricEigen::new(m.clone())
                .eigenvalues
                .iter()
                .copied()
                .collect(),
        }
    }

    fn spectral(&self, k: usize, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        match self {
            Self::Scalar(s) => DMatrix::identity(k, k) * Complex64::new(f(s * s), 0.0),
            Self::Matrix(m) => {
                let eig = SymmetricEigen::new(m.clone());
                let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0)));
                &eig.eigenvectors * d * eig.eigenvectors.adjoint()
            }
        }
    }

    /// `√Σ`.
    pub fn sqrt(&self, k: usize) -> DMatrix<Complex64> {
        self.spectral(k, f64::sqrt)
    }

    /// `√Σ^{-1}`, the whitening map.
    pub fn inverse_sqrt(&self, k: usize) -> DMatrix<Complex64> {
        self.spectral(k, |l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self, k: usize) -> DMatrix<Complex64> {
        self.spectral(k, |l| 1.0 / l)
    }

    pub fn determinant(&self, k: usize) -> f64 {
        self.eigenvalues(k).iter().product()
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Scalar(s) => Self::Scalar(s * c),
            Self::Matrix(m) => Self::Matrix(m * Complex64::new(c * c, 0.0)),
        }
    }

    /// `Σ₁ + Σ₂`.
    pub fn sum(&self, other: &Self, k: usize) -> Self {
        match (self, other) {
            (Self::Scalar(a), Self::Scalar(b)) => Self::Scalar((a * a + b * b).sqrt()),
            _ => Self::Matrix(self.matrix(k) + other.matrix(k)),
        }
    }

    /// `(Σ₁^{-1} + Σ₂^{-1})^{-1}`.
    pub fn harmonic(&self, other: &Self, k: usize) -> Self {
        match (self, other) {
            (Self::Scalar(a), Self::Scalar(b)) => {
                Self::Scalar(1.0 / (1.0 / (a * a) + 1.0 / (b * b)).sqrt())
            }
            _ => {
                let inv = self.inverse(k) + other.inverse(k);
                Self::Matrix(hermitian_part(
                    &inv.try_inverse()
                        .expect("sum of positive definite matrices"),
                ))
            }
        }
    }

    /// Real `2k × 2k` form of `Σ^{-1}` acting on `φ(z)`.
    pub fn real_precision(&self, k: usize) -> DMatrix<f64> {
        realify(&self.inverse(k))
    }
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// A discrete Gaussian `D_{Λ+c, √Σ}`.
#[derive(Debug, Clone)]
pub struct DiscreteGaussianSpec {
    pub lattice: ComplexLattice,
    pub shift: Vec<Complex64>,
    pub sigma: CovarianceSpec,
}

impl DiscreteGaussianSpec {
    pub fn new(
        lattice: ComplexLattice,
        shift: Vec<Complex64>,
        sigma: CovarianceSpec,
    ) -> Result<Self> {
        let k = lattice.k();
        if shift.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: shift.len(),
            });
        }
        if shift.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition("shift must be finite".into()));
        }
        sigma.validate(k)?;
        Ok(Self {
            lattice,
            shift,
            sigma,
        })
    }

    pub fn centered(lattice: ComplexLattice, sigma: f64) -> Result<Self> {
        let k = lattice.k();
        Self::new(
            lattice,
            vec![Complex64::new(0.0, 0.0); k],
            CovarianceSpec::Scalar(sigma),
        )
    }

    /// The equivalent isotropic problem `(√Σ^{-1}Λ, √Σ^{-1}c, σ = 1)`; lattice
    /// coordinates are shared with the original.
    pub(crate) fn whitened(&self) -> Result<(ComplexLattice, Vec<Complex64>, f64)> {
        match &self.sigma {
            CovarianceSpec::Scalar(s) => Ok((self.lattice.clone(), self.shift.clone(), *s)),
            CovarianceSpec::Matrix(_) => {
                let w = self.sigma.inverse_sqrt(self.lattice.k());
                let lat = self.lattice.apply_matrix(&w)?;
                let c = (&w * nalgebra::DVector::from_column_slice(&self.shift))
                    .iter()
                    .copied()
                    .collect();
                Ok((lat, c, 1.0))
            }
        }
    }
}

/// Enclosure of `ε_Λ(√Σ) = Σ_{λ*≠0} e^{-π²‖√Σ λ*‖²}`. Correlated covariances
/// are whitened first, `ε_Λ(√Σ) = ε_{√Σ^{-1}Λ}(I)`.
pub fn flatness_factor(lattice: &ComplexLattice, sigma: &CovarianceSpec) -> Result<Interval> {
    sigma.validate(lattice.k())?;
    match sigma {
        CovarianceSpec::Scalar(s) => dual_theta(lattice, *s),
        CovarianceSpec::Matrix(_) => flatness_whitened(lattice, sigma),
    }
}

/// The same quantity always computed through the whitened lattice.
pub fn flatness_whitened(lattice: &ComplexLattice, sigma: &CovarianceSpec) -> Result<Interval> {
    sigma.validate(lattice.k())?;
    let w = lattice.apply_matrix(&sigma.inverse_sqrt(lattice.k()))?;
    dual_theta(&w, 1.0)
}

fn dual_theta(lattice: &ComplexLattice, sigma: f64) -> Result<Interval> {
    let c = std::f64::consts::PI.powi(2) * sigma * sigma;
    Ok(lattice
        .dual()
        .theta_certified(c, FLATNESS_REL_TOL)?
        .interval())
}

/// `η_ε(Λ)` in the `s = √(2π)σ` convention, by bisection on the dual theta sum.
/// The returned value is an upper end of the bracket, so the theta sum at it
/// is certified `≤ eps`.
pub fn smoothing_parameter(lattice: &ComplexLattice, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let dual = lattice.dual();
    let tau = (2.0 * std::f64::consts::PI).sqrt();
    let ok = |s: f64| {
        let sigma = s / tau;
        dual.theta_at_most(std::f64::consts::PI.powi(2) * sigma * sigma, eps)
    };
    let mut hi = smoothing_dual_bound(lattice)?;
    while !ok(hi)? {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while ok(lo)? {
        hi = lo;
        lo /= 2.0;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `2√k / λ₁(Λ*)`.
pub fn smoothing_dual_bound(lattice: &ComplexLattice) -> Result<f64> {
    Ok(2.0 * (lattice.k() as f64).sqrt() / lattice.dual().minimum()?)
}

/// `max_z |V(Λ) Σ_λ f_{σ,λ}(z) − 1|` over a `grid × grid` sample of the basis
/// parallelogram, for `k = 1`. Returns the maximum and the grid indices where
/// it is attained.
pub fn flatness_by_definition(
    lattice: &ComplexLattice,
    sigma: f64,
    grid: usize,
) -> Result<(f64, (usize, usize))> {
    if lattice.k() != 1 {
        return Err(Error::Precondition(
            "direct flatness evaluation is limited to k = 1".into(),
        ));
    }
    let e = lattice.enumerator()?;
    let g = lattice.generators();
    let vol = lattice.volume();
    let norm = vol / (std::f64::consts::PI * sigma * sigma);
    let r2 = 60.0 * sigma * sigma;
    let mut best = (-1.0, (0, 0));
    for i in 0..grid {
        for j in 0..grid {
            let (a, b) = (i as f64 / grid as f64, j as f64 / grid as f64);
            let z = [a * g[(0, 0)] + b * g[(1, 0)], a * g[(0, 1)] + b * g[(1, 1)]];
            let mut s = 0.0;
            e.search(&z, r2, |_, d| {
                s += (-d / (sigma * sigma)).exp();
                None
            });
            let dev = (norm * s - 1.0).abs();
            if dev > best.0 + 1e-15 {
                best = (dev, (i, j));
            }
        }
    }
    Ok(best)
}

/// Flatness of the one-dimensional lattice `βℤ` under the per-real-coordinate
/// weight `e^{-x²/σ²}`: `Σ_{n≠0} e^{-π²σ²n²/β²}`.
pub(crate) fn flatness_1d(beta: f64, sigma: f64) -> f64 {
    let a = (std::f64::consts::PI * sigma / beta).powi(2);
    let mut s = 0.0;
    for n in 1..10_000 {
        let t = (-a * (n * n) as f64).exp();
        s += t;
        if t < 1e-18 * s || t == 0.0 {
            break;
        }
    }
    2.0 * s
}
