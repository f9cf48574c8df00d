//! Fading wiretap channel models and their capacities (nats per complex use).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// z-value of a two-sided 99% normal interval.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingKind {
    Gaussian,
    Static { h: Vec<Complex64> },
    ErgodicRayleigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    #[serde(flatten)]
    pub kind: FadingKind,
    /// `σ²` per complex dimension.
    pub noise_variance: f64,
}

impl ChannelModel {
    pub fn new(kind: FadingKind, noise_variance: f64) -> Result<Self> {
        let m = Self {
            kind,
            noise_variance,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn gaussian(noise_variance: f64) -> Result<Self> {
        Self::new(FadingKind::Gaussian, noise_variance)
    }

    pub fn rayleigh(noise_variance: f64) -> Result<Self> {
        Self::new(FadingKind::ErgodicRayleigh, noise_variance)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance.is_finite() && self.noise_variance > 0.0) {
            return Err(Error::Precondition(format!(
                "noise variance must be positive, got {}",
                self.noise_variance
            )));
        }
        if let FadingKind::Static { h } = &self.kind {
            if h.is_empty() {
                return Err(Error::Precondition(
                    "static channel needs coefficients".into(),
                ));
            }
            if let Some(i) = h.iter().position(|z| z.norm() == 0.0) {
                return Err(Error::ZeroFading(i));
            }
        }
        Ok(())
    }

    /// Whether the per-block capacity is deterministic (no outage).
    pub fn is_deterministic(&self) -> bool {
        !matches!(self.kind, FadingKind::ErgodicRayleigh)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub noise_variance: f64,
}

impl ChannelRealization {
    pub fn k(&self) -> usize {
        self.h.len()
    }

    /// `k^{-1} Σ ln(1 + ρ|h_i|²)`.
    pub fn block_capacity(&self, snr: f64) -> f64 {
        self.h
            .iter()
            .map(|z| (snr * z.norm_sqr()).ln_1p())
            .sum::<f64>()
            / self.k() as f64
    }
}

/// Standard circularly symmetric complex normal scaled to `E|w|² = variance`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn sample_channel<R: Rng + ?Sized>(
    model: &ChannelModel,
    k: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let h = match &model.kind {
        FadingKind::Gaussian => vec![Complex64::new(1.0, 0.0); k],
        FadingKind::Static { h } => {
            if h.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: h.len(),
                });
            }
            h.clone()
        }
        FadingKind::ErgodicRayleigh => (0..k).map(|_| complex_normal(rng, 1.0)).collect(),
    };
    Ok(ChannelRealization {
        h,
        noise_variance: model.noise_variance,
    })
}

/// Noise draw `w` for one block.
pub fn sample_noise<R: Rng + ?Sized>(k: usize, variance: f64, rng: &mut R) -> Vec<Complex64> {
    (0..k).map(|_| complex_normal(rng, variance)).collect()
}

/// `y = h ⊙ x + w` with a fixed noise vector.
pub fn apply_channel(
    x: &[Complex64],
    real: &ChannelRealization,
    w: &[Complex64],
) -> Result<Vec<Complex64>> {
    if x.len() != real.k() || w.len() != real.k() {
        return Err(Error::DimensionMismatch {
            expected: real.k(),
            got: x.len().min(w.len()),
        });
    }
    Ok(x.iter()
        .zip(&real.h)
        .zip(w)
        .map(|((x, h), w)| h * x + w)
        .collect())
}

pub fn transmit<R: Rng + ?Sized>(
    x: &[Complex64],
    real: &ChannelRealization,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if x.len() != real.k() {
        return Err(Error::DimensionMismatch {
            expected: real.k(),
            got: x.len(),
        });
    }
    let w = sample_noise(real.k(), real.noise_variance, rng);
    apply_channel(x, real, &w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub estimate: f64,
    /// Half-width of the 99% interval; zero for closed forms.
    pub ci_halfwidth: f64,
}

/// Ergodic capacity `E ln(1 + ρ|h|²)`: closed form for Gaussian and static
/// channels, Monte Carlo over `samples` draws for Rayleigh.
pub fn capacity<R: Rng + ?Sized>(
    model: &ChannelModel,
    snr: f64,
    samples: usize,
    rng: &mut R,
) -> Result<CapacityEstimate> {
    if !(snr > 0.0) {
        return Err(Error::Precondition(format!(
            "snr must be positive, got {snr}"
        )));
    }
    model.validate()?;
    match &model.kind {
        FadingKind::Gaussian | FadingKind::Static { .. } => Ok(CapacityEstimate {
            estimate: capacity_exact(model, snr)?,
            ci_halfwidth: 0.0,
        }),
        FadingKind::ErgodicRayleigh => {
            if samples < 2 {
                return Err(Error::Precondition(
                    "Monte Carlo capacity needs at least 2 samples".into(),
                ));
            }
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..samples {
                let v = (snr * complex_normal(rng, 1.0).norm_sqr()).ln_1p();
                s += v;
                s2 += v * v;
            }
            let n = samples as f64;
            let mean = s / n;
            let var = (s2 - n * mean * mean) / (n - 1.0);
            Ok(CapacityEstimate {
                estimate: mean,
                ci_halfwidth: Z99 * (var.max(0.0) / n).sqrt(),
            })
        }
    }
}

/// Exact `C` where available: `ln(1+ρ)`, the static block value, or
/// `e^{1/ρ}E₁(1/ρ)` for unit-variance Rayleigh.
pub fn capacity_exact(model: &ChannelModel, snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::Precondition(format!(
            "snr must be positive, got {snr}"
        )));
    }
    model.validate()?;
    Ok(match &model.kind {
        FadingKind::Gaussian => snr.ln_1p(),
        FadingKind::Static { h } => ChannelRealization {
            h: h.clone(),
            noise_variance: model.noise_variance,
        }
        .block_capacity(snr),
        FadingKind::ErgodicRayleigh => rayleigh_capacity(snr),
    })
}

pub fn rayleigh_capacity(snr: f64) -> f64 {
    let x = 1.0 / snr;
    x.exp() * exp_integral_e1(x)
}

/// `C_s = C_b − C_e`, clamped at zero.
pub fn secrecy_capacity(c_b: f64, c_e: f64) -> f64 {
    (c_b - c_e).max(0.0)
}

/// `E₁(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 needs x > 0");
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -0.577_215_664_901_532_9 - x.ln() + sum
    } else {
        // Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Fraction of `trials` blocks of length `k` whose empirical capacity
/// deviates from the ergodic value by more than `delta`.
pub fn lln_diagnostic<R: Rng + ?Sized>(
    model: &ChannelModel,
    snr: f64,
    k: usize,
    delta: f64,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if trials == 0 {
        return Err(Error::Precondition("trials must be positive".into()));
    }
    let c = capacity_exact(model, snr)?;
    let mut bad = 0usize;
    for _ in 0..trials {
        let real = sample_channel(model, k, rng)?;
        if (real.block_capacity(snr) - c).abs() > delta {
            bad += 1;
        }
    }
    Ok(bad as f64 / trials as f64)
}
