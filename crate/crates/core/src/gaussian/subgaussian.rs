//! Monte Carlo check of the subgaussian moment bound for discrete Gaussians.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{flatness_factor, DiscreteGaussianSpec, KleinSampler};
use crate::error::{Error, Result};
use crate::lattice::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgaussianCertificate {
    pub delta: f64,
    pub sigma_param: f64,
}

/// `δ = ln((1+ε)/(1−ε))`.
pub fn subgaussian_certificate(epsilon: f64, sigma: f64) -> Result<SubgaussianCertificate> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Precondition(format!(
            "flatness factor {epsilon:.4} is not below 1; no subgaussian certificate"
        )));
    }
    Ok(SubgaussianCertificate {
        delta: ((1.0 + epsilon) / (1.0 - epsilon)).ln(),
        sigma_param: sigma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgaussianRow {
    pub t: Vec<Complex64>,
    pub empirical: f64,
    pub std_err: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgaussianReport {
    pub certificate: SubgaussianCertificate,
    pub epsilon: Interval,
    pub rows: Vec<SubgaussianRow>,
}

impl SubgaussianReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }
}

/// `t = 0` plus `a·e_i` and `a·i·e_i` for `a ∈ {0.5, 1, 2}`.
pub fn default_test_vectors(k: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![vec![zero; k]];
    for i in 0..k {
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            for a in [0.5, 1.0, 2.0] {
                let mut t = vec![zero; k];
                t[i] = unit * a;
                out.push(t);
            }
        }
    }
    out
}

/// Estimates `E[e^{Re(t†Ax)}]` for `x ~ D_{Λ+c,σ}` and compares with
/// `e^δ e^{(σ²/2)‖A†t‖²}`; a row passes when the estimate minus three
/// standard errors stays below the bound.
pub fn subgaussian_check(
    spec: &DiscreteGaussianSpec,
    a: &DMatrix<Complex64>,
    ts: &[Vec<Complex64>],
    trials: usize,
    seed: u64,
) -> Result<SubgaussianReport> {
    let k = spec.lattice.k();
    if a.nrows() != k || a.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: a.nrows(),
        });
    }
    let sigma = spec
        .sigma
        .isotropic_sigma()
        .ok_or_else(|| Error::Precondition("subgaussian check needs an isotropic σ".into()))?;
    let epsilon = flatness_factor(&spec.lattice, &spec.sigma)?;
    let certificate = subgaussian_certificate(epsilon.hi, sigma)?;
    let sampler = KleinSampler::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<DVector<Complex64>> = (0..trials)
        .map(|_| a * DVector::from_vec(sampler.sample(&mut rng).point))
        .collect();
    let rows = ts
        .iter()
        .map(|t| {
            let tv = DVector::from_column_slice(t);
            let (mut s, mut s2) = (0.0, 0.0);
            for v in &samples {
                let e = tv.dotc(v).re.exp();
                s += e;
                s2 += e * e;
            }
            let n = trials as f64;
            let mean = s / n;
            let var = (s2 / n - mean * mean).max(0.0);
            let std_err = (var / n).sqrt();
            let at = a.adjoint() * &tv;
            let bound = certificate.delta.exp() * (0.5 * sigma * sigma * at.norm_squared()).exp();
            SubgaussianRow {
                t: t.clone(),
                empirical: mean,
                std_err,
                bound,
                ok: mean - 3.0 * std_err <= bound,
            }
        })
        .collect();
    Ok(SubgaussianReport {
        certificate,
        epsilon,
        rows,
    })
}
