//! Klein's randomized nearest-plane sampler.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{flatness_1d, DiscreteGaussianSpec};
use crate::error::{Error, Result};
use crate::lattice::{to_complex, to_real, ComplexLattice};

/// Integer-sampling window in units of the width.
const WINDOW: f64 = 6.0;

/// Draws `z ∈ ℤ` with probability proportional to `e^{-(z−c)²/s²}`.
pub fn sample_z<R: Rng + ?Sized>(rng: &mut R, c: f64, s: f64) -> i64 {
    let lo = (c - WINDOW * s).floor() as i64;
    let hi = (c + WINDOW * s).ceil() as i64;
    if hi - lo <= 48 {
        let lo = lo.min(c.floor() as i64 - 1);
        let hi = hi.max(c.ceil() as i64 + 1);
        let e: Vec<f64> = (lo..=hi).map(|z| -((z as f64 - c) / s).powi(2)).collect();
        let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|x| (x - m).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (i, wi) in w.iter().enumerate() {
            u -= wi;
            if u <= 0.0 {
                return lo + i as i64;
            }
        }
        return hi;
    }
    loop {
        let z = rng.random_range(lo..=hi);
        let d = (z as f64 - c) / s;
        if rng.random::<f64>() < (-d * d).exp() {
            return z;
        }
    }
}

/// Outcome of the sampler validity gate: the summed per-coordinate flatness
/// `Σ_i ε_{‖b̃_i‖ℤ}(σ)` must not exceed `2^{-2k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerGate {
    pub coordinate_flatness: f64,
    pub threshold: f64,
    /// Smallest `σ` that passes.
    pub min_sigma: f64,
}

impl SamplerGate {
    pub fn passes(&self) -> bool {
        self.coordinate_flatness <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Coordinates of `x − c` over the lattice generators.
    pub coords: Vec<i64>,
    /// `x ∈ Λ + c`.
    pub point: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct KleinSampler {
    lattice: ComplexLattice,
    shift: Vec<Complex64>,
    tau: Vec<f64>,
    widths: Vec<f64>,
    mu: DMatrix<f64>,
    gate: SamplerGate,
}

impl KleinSampler {
    /// Sampler for `D_{Λ+c,σ}`; refuses when the gate fails.
    pub fn new(spec: &DiscreteGaussianSpec) -> Result<Self> {
        let s = Self::new_unchecked(spec)?;
        if !s.gate.passes() {
            return Err(Error::SamplerRefused(format!(
                "σ = {:.6} is below the sampler validity threshold {:.6} (coordinate flatness {:.3e} > {:.3e})",
                spec.sigma.isotropic_sigma().unwrap_or(f64::NAN),
                s.gate.min_sigma,
                s.gate.coordinate_flatness,
                s.gate.threshold
            )));
        }
        Ok(s)
    }

    /// Same sampler without the validity gate; outside the smoothing regime
    /// its output is biased towards the randomized nearest-plane point.
    pub fn new_unchecked(spec: &DiscreteGaussianSpec) -> Result<Self> {
        let sigma = spec
            .sigma
            .isotropic_sigma()
            .ok_or_else(|| Error::Precondition("the Klein sampler needs an isotropic σ".into()))?;
        spec.sigma.validate(spec.lattice.k())?;
        let e = spec.lattice.enumerator()?;
        let target: Vec<f64> = to_real(&spec.shift).iter().map(|v| -v).collect();
        let tau = e.reduced_coords(&target);
        let norms: Vec<f64> = e.bstar_sq().iter().map(|b| b.sqrt()).collect();
        let widths = norms.iter().map(|b| sigma / b).collect();
        let gate = gate_for(&norms, sigma, spec.lattice.k());
        Ok(Self {
            lattice: spec.lattice.clone(),
            shift: spec.shift.clone(),
            tau,
            widths,
            mu: e.gso().mu.clone(),
            gate,
        })
    }

    pub fn gate(&self) -> SamplerGate {
        self.gate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        self.sample_from(&self.tau, &self.shift, rng)
    }

    /// Draw from `D_{Λ+c',σ}` for another shift `c'`, reusing the reduction.
    pub fn sample_shifted<R: Rng + ?Sized>(&self, shift: &[Complex64], rng: &mut R) -> Sample {
        let e = self.lattice.enumerator().expect("checked at construction");
        let target: Vec<f64> = to_real(shift).iter().map(|v| -v).collect();
        self.sample_from(&e.reduced_coords(&target), shift, rng)
    }

    fn sample_from<R: Rng + ?Sized>(
        &self,
        tau: &[f64],
        shift: &[Complex64],
        rng: &mut R,
    ) -> Sample {
        let n = tau.len();
        let mut z = vec![0i64; n];
        for i in (0..n).rev() {
            let mut c = tau[i];
            for j in i + 1..n {
                c -= self.mu[(j, i)] * (z[j] as f64 - tau[j]);
            }
            z[i] = sample_z(rng, c, self.widths[i]);
        }
        let e = self.lattice.enumerator().expect("checked at construction");
        let coords = e.to_original(&z);
        let lp = self.lattice.real_point(&coords);
        let shift = to_real(shift);
        let point = to_complex(
            &lp.iter()
                .zip(&shift)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        );
        Sample { coords, point }
    }
}

fn gate_for(norms: &[f64], sigma: f64, k: usize) -> SamplerGate {
    let threshold = 2f64.powi(-2 * k as i32);
    let total = |s: f64| norms.iter().map(|&b| flatness_1d(b, s)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, norms.iter().copied().fold(0.0, f64::max).max(1e-300));
    while total(hi) > threshold {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    SamplerGate {
        coordinate_flatness: total(sigma),
        threshold,
        min_sigma: hi,
    }
}

/// One draw from `D_{Λ+c,σ}` through the gated sampler.
pub fn sample_discrete_gaussian<R: Rng + ?Sized>(
    spec: &DiscreteGaussianSpec,
    rng: &mut R,
) -> Result<Sample> {
    Ok(KleinSampler::new(spec)?.sample(rng))
}
