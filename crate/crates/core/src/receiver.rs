//! Bob's MMSE-GDFE front end, lattice decoding and the reliability bounds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    apply_channel, sample_channel, sample_noise, ChannelModel, ChannelRealization, Z99,
};
use crate::error::{Error, Result};
use crate::gaussian::subgaussian_certificate;
use crate::seeds::stream_rng;
use crate::wiretap::{Message, WiretapCode};

/// Default `t` grid for the tail check.
pub const TAIL_TS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
/// Default `η` grid for the two-term error bound.
pub const ETAS: [f64; 3] = [0.1, 0.5, 1.0];

/// QR factorization of `[H_b ; ρ_b^{-1/2} I] = [Q₁ ; Q₂] R`.
#[derive(Debug, Clone)]
pub struct GdfePreprocessor {
    pub h: Vec<Complex64>,
    pub rho_b: f64,
    pub q1: DMatrix<Complex64>,
    pub q2: DMatrix<Complex64>,
    pub r_factor: DMatrix<Complex64>,
    r_inv_adj: DMatrix<Complex64>,
}

impl GdfePreprocessor {
    pub fn new(h: &[Complex64], rho_b: f64) -> Result<Self> {
        if !(rho_b > 0.0 && rho_b.is_finite()) {
            return Err(Error::Precondition(format!(
                "ρ_b must be positive, got {rho_b}"
            )));
        }
        let k = h.len();
        let reg = Complex64::new(rho_b.powf(-0.5), 0.0);
        let stacked = DMatrix::from_fn(2 * k, k, |i, j| {
            if i < k {
                if i == j {
                    h[i]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else if i - k == j {
                reg
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let qr = stacked.qr();
        let q = qr.q();
        let r_factor = qr.r();
        let r_inv_adj = r_factor
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("regularized channel".into()))?
            .adjoint();
        Ok(Self {
            h: h.to_vec(),
            rho_b,
            q1: q.rows(0, k).into_owned(),
            q2: q.rows(k, k).into_owned(),
            r_factor,
            r_inv_adj,
        })
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    /// `Q₁† y`.
    pub fn project(&self, y: &[Complex64]) -> Vec<Complex64> {
        (self.q1.adjoint() * DVector::from_column_slice(y))
            .iter()
            .copied()
            .collect()
    }

    /// `C(y) = ‖y‖² − ‖Q₁†y‖²`.
    pub fn constant(&self, y: &[Complex64]) -> f64 {
        let p: f64 = self.project(y).iter().map(|z| z.norm_sqr()).sum();
        y.iter().map(|z| z.norm_sqr()).sum::<f64>() - p
    }

    /// `|‖y−Hx‖² + ρ_b^{-1}‖x‖² − ‖Q₁†y − Rx‖² − C(y)|`.
    pub fn identity_residual(&self, y: &[Complex64], x: &[Complex64]) -> f64 {
        let lhs: f64 = y
            .iter()
            .zip(&self.h)
            .zip(x)
            .map(|((y, h), x)| (y - h * x).norm_sqr())
            .sum::<f64>()
            + x.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.rho_b;
        let rx = &self.r_factor * DVector::from_column_slice(x);
        let p = self.project(y);
        let rhs: f64 = p
            .iter()
            .zip(rx.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            + self.constant(y);
        (lhs - rhs).abs()
    }

    /// `v = Q₁†w − ρ_b^{-1} R^{-†} x`.
    pub fn effective_noise(&self, w: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let a = self.q1.adjoint() * DVector::from_column_slice(w);
        let b = &self.r_inv_adj * DVector::from_column_slice(x);
        a.iter()
            .zip(b.iter())
            .map(|(a, b)| a - b / self.rho_b)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// `argmin_{x∈Λ_b} ‖Q₁†y − Rx‖²`.
    Map,
    /// `argmin_{x∈Λ_b} ‖y − H_b x‖²`.
    Ml,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub message: Message,
    /// Fine coordinates of the decoded lattice point.
    pub coords: Vec<i64>,
}

pub fn decode_with(
    code: &WiretapCode,
    y: &[Complex64],
    pre: &GdfePreprocessor,
    mode: DecodeMode,
) -> Result<Decoded> {
    let k = code.k();
    if y.len() != k || pre.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: y.len(),
        });
    }
    let (lat, target) = match mode {
        DecodeMode::Map => (code.fine().apply_matrix(&pre.r_factor)?, pre.project(y)),
        DecodeMode::Ml => (code.fine().apply_diagonal(&pre.h)?, y.to_vec()),
    };
    let cp = lat.closest_vector(&target)?;
    Ok(Decoded {
        message: Message(code.cosets().message_of(&cp.coords)),
        coords: cp.coords,
    })
}

pub fn decode(code: &WiretapCode, y: &[Complex64], h: &[Complex64], rho_b: f64) -> Result<Message> {
    Ok(decode_with(code, y, &GdfePreprocessor::new(h, rho_b)?, DecodeMode::Map)?.message)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinDistance {
    /// Exact `d_R²` when enumeration is feasible.
    pub exact_sq: Option<f64>,
    /// `α_b² k_F min_blocks Π (ρ_b^{-1} + |h_i|²)^{1/k_F}`.
    pub amgm_sq: f64,
}

/// AM-GM lower bound on `d_R²`. For a single field block this is
/// `α_b² k Π(ρ_b^{-1} + |h_i|²)^{1/k}`; with several blocks a nonzero vector
/// may live in one block only, so the minimum over blocks is taken.
pub fn amgm_bound(code: &WiretapCode, h: &[Complex64], rho_b: f64) -> f64 {
    let kf = code.k() / code.copies();
    let block = |b: usize| {
        let logs: f64 = h[b * kf..(b + 1) * kf]
            .iter()
            .map(|z| (1.0 / rho_b + z.norm_sqr()).ln())
            .sum();
        kf as f64 * (logs / kf as f64).exp()
    };
    code.alpha_b().powi(2) * (0..code.copies()).map(block).fold(f64::INFINITY, f64::min)
}

pub fn received_min_distance_bound(
    code: &WiretapCode,
    h: &[Complex64],
    rho_b: f64,
) -> Result<MinDistance> {
    if h.len() != code.k() {
        return Err(Error::DimensionMismatch {
            expected: code.k(),
            got: h.len(),
        });
    }
    let pre = GdfePreprocessor::new(h, rho_b)?;
    let lat = code.fine().apply_matrix(&pre.r_factor)?;
    let exact_sq = lat.minimum().ok().map(|d| d * d);
    Ok(MinDistance {
        exact_sq,
        amgm_sq: amgm_bound(code, h, rho_b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// `1 + 2√(t/k) + 2t`.
    pub threshold: f64,
    pub exceedance: f64,
    pub std_err: f64,
    /// `e^δ e^{-t}`.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveNoiseStats {
    pub delta: f64,
    /// `σ_b`.
    pub sigma_eff: f64,
    /// `‖v‖²` per trial.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub stats: EffectiveNoiseStats,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }
}

fn code_delta(code: &WiretapCode) -> Result<f64> {
    let eps = code
        .flatness_e()
        .ok_or_else(|| Error::ThetaNotCertified("flatness of Λ_e at √P is unavailable".into()))?;
    Ok(subgaussian_certificate(eps.hi, code.power().sqrt())?.delta)
}

fn draw_message<R: Rng + ?Sized>(
    code: &WiretapCode,
    dist: Option<&WeightedIndex<f64>>,
    rng: &mut R,
) -> Message {
    match dist {
        Some(d) => Message(d.sample(rng) as u64),
        None => Message(rng.random_range(0..code.index())),
    }
}

/// Simulates `v` for uniformly drawn messages over a fixed `H_b` and compares
/// `P{‖v‖²/kσ_b² > 1+2√(t/k)+2t}` with `e^δ e^{-t}`.
pub fn tail_bound_check(
    code: &WiretapCode,
    h: &[Complex64],
    rho_b: f64,
    ts: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TailReport> {
    let k = code.k();
    let delta = code_delta(code)?;
    let pre = GdfePreprocessor::new(h, rho_b)?;
    let sigma2 = code.power() / rho_b;
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let m = draw_message(code, None, &mut rng);
            let x = code.encode(m, &mut rng)?.point;
            let w = sample_noise(k, sigma2, &mut rng);
            Ok(pre
                .effective_noise(&w, &x)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = trials as f64;
    let rows = ts
        .iter()
        .map(|&t| {
            let threshold = 1.0 + 2.0 * (t / k as f64).sqrt() + 2.0 * t;
            let p = samples
                .iter()
                .filter(|&&s| s / (k as f64 * sigma2) > threshold)
                .count() as f64
                / n;
            let std_err = (p * (1.0 - p) / n).sqrt();
            let bound = delta.exp() * (-t).exp();
            TailRow {
                t,
                threshold,
                exceedance: p,
                std_err,
                bound,
                ok: p <= bound + 3.0 * std_err,
            }
        })
        .collect();
    Ok(TailReport {
        stats: EffectiveNoiseStats {
            delta,
            sigma_eff: sigma2.sqrt(),
            samples,
        },
        rows,
    })
}

/// 99% Wilson interval for `x` successes in `n` trials.
pub fn wilson_interval(x: usize, n: usize) -> (f64, f64) {
    let n = n as f64;
    let p = x as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTermBound {
    pub eta: f64,
    /// Empirical `P{‖v‖²/kσ_b² ≥ 1+η}`.
    pub noise_term: f64,
    /// `min(1, e^δ e^{-kη²})`.
    pub noise_term_analytic: f64,
    /// Empirical `P{d_R²/4kσ_b² < 1+η}` with the AM-GM lower bound for `d_R²`.
    pub distance_term: f64,
    /// Same with the exact `d_R²`.
    pub distance_term_exact: f64,
    pub bound: f64,
    /// Sum of the 99% half-widths of the two empirical terms.
    pub bound_ci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateReport {
    pub snr: f64,
    pub trials: usize,
    pub errors: usize,
    pub pe: f64,
    pub ci: (f64, f64),
    pub delta: f64,
    pub bounds: Vec<TwoTermBound>,
}

impl ErrorRateReport {
    /// Whether `P_e` stays below every two-term bound up to three CI widths.
    pub fn within_bounds(&self) -> bool {
        let width = self.ci.1 - self.ci.0;
        self.bounds
            .iter()
            .all(|b| self.pe <= b.bound + 3.0 * (width + b.bound_ci))
    }
}

struct Trial {
    error: bool,
    v_stat: f64,
    d_exact: f64,
    d_amgm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRateOptions {
    pub trials: usize,
    pub seed: u64,
    pub mode: DecodeMode,
}

/// Monte Carlo `P_e` over messages, channel draws, encodings and noise with
/// `σ_b² = P/snr`, plus the two-term bound for each `η`.
pub fn error_rate(
    code: &WiretapCode,
    model: &ChannelModel,
    snr: f64,
    opts: ErrorRateOptions,
    message_dist: Option<&[f64]>,
    etas: &[f64],
) -> Result<ErrorRateReport> {
    if !(snr > 0.0) {
        return Err(Error::Precondition(format!(
            "snr must be positive, got {snr}"
        )));
    }
    if opts.trials == 0 {
        return Err(Error::Precondition("trials must be positive".into()));
    }
    let dist = match message_dist {
        Some(p) => {
            if p.len() as u64 != code.index() {
                return Err(Error::DimensionMismatch {
                    expected: code.index() as usize,
                    got: p.len(),
                });
            }
            Some(
                WeightedIndex::new(p)
                    .map_err(|e| Error::Precondition(format!("message distribution: {e}")))?,
            )
        }
        None => None,
    };
    let k = code.k();
    let delta = code_delta(code)?;
    let sigma2 = code.power() / snr;
    let outcomes = (0..opts.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(opts.seed, i as u64);
            let m = draw_message(code, dist.as_ref(), &mut rng);
            let real: ChannelRealization = sample_channel(model, k, &mut rng)?;
            let x = code.encode(m, &mut rng)?.point;
            let w = sample_noise(k, sigma2, &mut rng);
            let y = apply_channel(&x, &real, &w)?;
            let pre = GdfePreprocessor::new(&real.h, snr)?;
            let decoded = decode_with(code, &y, &pre, opts.mode)?;
            let v: f64 = pre
                .effective_noise(&w, &x)
                .iter()
                .map(|z| z.norm_sqr())
                .sum();
            let dist = received_min_distance_bound(code, &real.h, snr)?;
            let scale = 4.0 * k as f64 * sigma2;
            Ok(Trial {
                error: decoded.message != m,
                v_stat: v / (k as f64 * sigma2),
                d_exact: dist.exact_sq.unwrap_or(dist.amgm_sq) / scale,
                d_amgm: dist.amgm_sq / scale,
            })
        })
        .collect::<Result<Vec<Trial>>>()?;
    let n = opts.trials;
    let errors = outcomes.iter().filter(|t| t.error).count();
    let frac = |f: &dyn Fn(&Trial) -> bool| outcomes.iter().filter(|t| f(t)).count();
    let half = |x: usize| {
        let (lo, hi) = wilson_interval(x, n);
        0.5 * (hi - lo)
    };
    let bounds = etas
        .iter()
        .map(|&eta| {
            let a = frac(&|t: &Trial| t.v_stat >= 1.0 + eta);
            let b = frac(&|t: &Trial| t.d_amgm < 1.0 + eta);
            let b_exact = frac(&|t: &Trial| t.d_exact < 1.0 + eta);
            let noise_term = a as f64 / n as f64;
            let distance_term = b as f64 / n as f64;
            TwoTermBound {
                eta,
                noise_term,
                noise_term_analytic: (delta.exp() * (-(k as f64) * eta * eta).exp()).min(1.0),
                distance_term,
                distance_term_exact: b_exact as f64 / n as f64,
                bound: (noise_term + distance_term).min(1.0),
                bound_ci: half(a) + half(b),
            }
        })
        .collect();
    Ok(ErrorRateReport {
        snr,
        trials: n,
        errors,
        pe: errors as f64 / n as f64,
        ci: wilson_interval(errors, n),
        delta,
        bounds,
    })
}
