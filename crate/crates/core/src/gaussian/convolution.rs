//! Numerical check of the convolution lemma: a discrete Gaussian plus an
//! independent continuous Gaussian is close to a continuous Gaussian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{brute_force_pmf, flatness_factor, CovarianceSpec, DiscreteGaussianSpec};
use crate::error::{Error, Result};
use crate::lattice::{to_real, ComplexLattice};
use crate::quadrature::{composite_legendre, ordered_sum};

const ORDER: usize = 6;
const MAX_NODES: usize = 1 << 22;
const DROP_PROB: f64 = 1e-13;
/// Truncation of the integration box in standard deviations.
const BOX_SD: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvolutionReport {
    /// Upper end of the enclosure of `ε_Λ(√Σ)`, `Σ^{-1} = Σ₁^{-1} + Σ₂^{-1}`.
    pub epsilon_used: f64,
    /// `∫ |g − f_{√Σ₀}|` over the truncated box.
    pub measured_v: f64,
    /// `4ε`.
    pub bound: f64,
    /// Resolution difference plus mass outside the box and dropped points.
    pub quadrature_error: f64,
    pub within_bound: bool,
}

/// `V(g, f_{√(Σ₁+Σ₂)})` for `g` the law of `X₁ + X₂`, `X₁ ~ D_{Λ+c,√Σ₁}`,
/// `X₂ ~ f_{√Σ₂}`. Refuses when `ε_Λ(√Σ) > 1/2`.
pub fn convolution_distance(
    lattice: &ComplexLattice,
    sigma1: &CovarianceSpec,
    sigma2: &CovarianceSpec,
    shift: &[Complex64],
) -> Result<ConvolutionReport> {
    let k = lattice.k();
    if k > 2 {
        return Err(Error::Precondition(format!(
            "L¹ quadrature is limited to k ≤ 2, got k = {k}"
        )));
    }
    sigma1.validate(k)?;
    sigma2.validate(k)?;
    let sigma = sigma1.harmonic(sigma2, k);
    let eps = flatness_factor(lattice, &sigma)?.hi;
    if eps > 0.5 {
        return Err(Error::Precondition(format!(
            "ε_Λ(√Σ) = {eps:.4} exceeds 1/2; the convolution lemma does not apply"
        )));
    }
    let spec = DiscreteGaussianSpec::new(lattice.clone(), shift.to_vec(), sigma1.clone())?;
    let pmf = brute_force_pmf(&spec, None)?;
    let mut dropped = pmf.tail_mass;
    let mut atoms = Vec::new();
    for e in &pmf.entries {
        if e.prob < DROP_PROB {
            dropped += e.prob;
        } else {
            atoms.push((to_real(&e.point), e.prob));
        }
    }

    let sigma0 = sigma1.sum(sigma2, k);
    let n = 2 * k;
    let pi_k = std::f64::consts::PI.powi(k as i32);
    let dens0 = Gauss {
        q: sigma0.real_precision(k),
        c: 1.0 / (pi_k * sigma0.determinant(k)),
    };
    let dens2 = Gauss {
        q: sigma2.real_precision(k),
        c: 1.0 / (pi_k * sigma2.determinant(k)),
    };

    let lmax = sigma0.eigenvalues(k).iter().copied().fold(0.0, f64::max);
    let lmin2 = sigma2
        .eigenvalues(k)
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let half = BOX_SD * (lmax / 2.0).sqrt();
    let h = 0.5 * (lmin2 / 2.0).sqrt();
    let max_per_dim = (MAX_NODES as f64).powf(1.0 / n as f64).floor() as usize;
    let panels = ((2.0 * half / h).ceil() as usize).clamp(2, (max_per_dim / ORDER).max(2));

    let fine = integrate(n, half, panels, &atoms, &dens0, &dens2);
    let coarse = integrate(n, half, panels / 2, &atoms, &dens0, &dens2);
    let outside = (1.0 - fine.mass_g).abs() + (1.0 - fine.mass_f).abs();
    let quadrature_error = (fine.v - coarse.v).abs() + outside + 2.0 * dropped;
    let bound = 4.0 * eps;
    Ok(ConvolutionReport {
        epsilon_used: eps,
        measured_v: fine.v,
        bound,
        quadrature_error,
        within_bound: fine.v <= bound + quadrature_error,
    })
}

struct Gauss {
    q: DMatrix<f64>,
    c: f64,
}

impl Gauss {
    fn eval(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut s = 0.0;
        for i in 0..n {
            let mut r = 0.0;
            for j in 0..n {
                r += self.q[(i, j)] * x[j];
            }
            s += x[i] * r;
        }
        self.c * (-s).exp()
    }
}

struct Quad {
    v: f64,
    mass_g: f64,
    mass_f: f64,
}

fn integrate(
    n: usize,
    half: f64,
    panels: usize,
    atoms: &[(Vec<f64>, f64)],
    f0: &Gauss,
    f2: &Gauss,
) -> Quad {
    let (nodes, weights) = composite_legendre(-half, half, panels.max(1), ORDER);
    let m = nodes.len();
    let total = m.pow(n as u32);
    let [v, mg, mf] = ordered_sum(total, |mut idx| {
        let mut x = vec![0.0; n];
        let mut w = 1.0;
        for xi in x.iter_mut() {
            let t = idx % m;
            idx /= m;
            *xi = nodes[t];
            w *= weights[t];
        }
        let mut d = vec![0.0; n];
        let g: f64 = atoms
            .iter()
            .map(|(y, p)| {
                for i in 0..n {
                    d[i] = x[i] - y[i];
                }
                p * f2.eval(&d)
            })
            .sum();
        let f = f0.eval(&x);
        [w * (g - f).abs(), w * g, w * f]
    });
    Quad {
        v,
        mass_g: mg,
        mass_f: mf,
    }
}
