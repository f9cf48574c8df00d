//! Secrecy side: faded flatness, leakage bounds and their empirical checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{capacity_exact, sample_channel, ChannelModel};
use crate::error::{Error, Result};
use crate::gaussian::{brute_force_pmf, flatness_factor, CovarianceSpec, DiscreteGaussianSpec};
use crate::lattice::{to_real, Interval};
use crate::quadrature::{composite_legendre, ordered_sum};
use crate::seeds::stream_rng;
use crate::wiretap::WiretapCode;

const ORDER: usize = 6;
const MAX_NODES: usize = 1 << 22;
const BOX_SD: f64 = 8.0;
const MAX_MESSAGES: u64 = 16;

/// `Σ = ((H_e H_e†)^{-1}/P + I/σ_e²)^{-1}`, diagonal for diagonal `H_e`.
pub fn faded_covariance(h: &[Complex64], power: f64, sigma_e: f64) -> Result<CovarianceSpec> {
    if let Some(i) = h.iter().position(|z| z.norm() == 0.0) {
        return Err(Error::ZeroFading(i));
    }
    let s2 = sigma_e * sigma_e;
    let d: Vec<Complex64> = h
        .iter()
        .map(|z| Complex64::new(1.0 / (1.0 / (power * z.norm_sqr()) + 1.0 / s2), 0.0))
        .collect();
    Ok(CovarianceSpec::Matrix(DMatrix::from_diagonal(
        &nalgebra::DVector::from_vec(d),
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadedFlatness {
    /// `ε_{√Σ^{-1}H_eΛ_e}(1)`.
    pub eps: Interval,
    /// Upper bound on `η_{2^{-2k}}(√Σ^{-1}H_eΛ)` from the root discriminant.
    pub eta_bound: f64,
    /// `α_e · eta_bound / √(2π)`; at most 1 means `ε ≤ 2^{-2k}` is implied.
    pub sigma_condition: f64,
    pub condition_holds: bool,
    /// `!condition_holds || eps.hi ≤ 2^{-2k}`.
    pub consistent: bool,
}

/// `max_b Π_{i∈b} ((σ_e² + P|h_i|²)/(Pσ_e²))^{1/2k_F}` over field blocks.
fn block_profile(code: &WiretapCode, h: &[Complex64], power: f64, sigma_e: f64) -> f64 {
    let kf = code.k() / code.copies();
    let s2 = sigma_e * sigma_e;
    (0..code.copies())
        .map(|b| {
            let l: f64 = h[b * kf..(b + 1) * kf]
                .iter()
                .map(|z| ((s2 + power * z.norm_sqr()) / (power * s2)).ln())
                .sum();
            (l / (2 * kf) as f64).exp()
        })
        .fold(0.0, f64::max)
}

pub fn faded_flatness(
    code: &WiretapCode,
    h: &[Complex64],
    power: f64,
    sigma_e: f64,
) -> Result<FadedFlatness> {
    let k = code.k();
    if h.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: h.len(),
        });
    }
    let sigma = faded_covariance(h, power, sigma_e)?;
    let eps = flatness_factor(&code.coarse().apply_diagonal(h)?, &sigma)?;
    let eta_bound =
        code.g_eff() * (code.copies() as f64).sqrt() * block_profile(code, h, power, sigma_e);
    let sigma_condition = code.alpha_e() * eta_bound / (2.0 * std::f64::consts::PI).sqrt();
    let condition_holds = sigma_condition <= 1.0;
    let consistent = !condition_holds || eps.hi <= 2f64.powi(-2 * k as i32);
    Ok(FadedFlatness {
        eps,
        eta_bound,
        sigma_condition,
        condition_holds,
        consistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualMinimumCheck {
    /// `λ₁(√Σ (H_e†)^{-1} Λ*)` by enumeration.
    pub exact: f64,
    /// `2√k_F min_b Π_{i∈b}(Pσ_e²/(σ_e²+P|h_i|²))^{1/2k_F} / G`.
    pub bound: f64,
}

impl DualMinimumCheck {
    pub fn holds(&self) -> bool {
        self.exact >= self.bound * (1.0 - 1e-9)
    }
}

/// Exact minimum of the faded dual of the unscaled base lattice against the
/// root-discriminant bound.
pub fn faded_dual_minimum(
    code: &WiretapCode,
    h: &[Complex64],
    power: f64,
    sigma_e: f64,
) -> Result<DualMinimumCheck> {
    let k = code.k();
    if h.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: h.len(),
        });
    }
    let sigma = faded_covariance(h, power, sigma_e)?;
    let root = sigma.sqrt(k);
    let scale: Vec<Complex64> = h
        .iter()
        .enumerate()
        .map(|(i, z)| root[(i, i)] / z.conj())
        .collect();
    let lat = code.base_lattice().dual().apply_diagonal(&scale)?;
    let exact = lat.minimum()?;
    let kf = k / code.copies();
    let bound = 2.0 * (kf as f64).sqrt() / (code.g_eff() * block_profile(code, h, power, sigma_e));
    Ok(DualMinimumCheck { exact, bound })
}

/// `8kεR − 8ε ln(8ε)` nats.
pub fn leakage_bound(eps: f64, k: usize, rate: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Precondition(format!(
            "ε must lie in (0, 1/2], got {eps}"
        )));
    }
    Ok(8.0 * k as f64 * eps * rate - 8.0 * eps * (8.0 * eps).ln())
}

/// Fraction of draws with `Π(1 + P|h_i|²/σ_e²)^{1/k} > e^{C_e+δ}`.
pub fn outage_probability(
    model: &ChannelModel,
    power: f64,
    k: usize,
    c_e: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "δ must be positive, got {delta}"
        )));
    }
    if trials == 0 {
        return Err(Error::Precondition("trials must be positive".into()));
    }
    let snr = power / model.noise_variance;
    let limit = c_e + delta;
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| {
            let real = sample_channel(model, k, &mut stream_rng(seed, i as u64))?;
            Ok(usize::from(real.block_capacity(snr) > limit))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / trials as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageDecomposition {
    pub c_e: f64,
    pub delta: f64,
    pub outage_probability: f64,
    /// `P{outage} · kR`.
    pub outage_term: f64,
    /// `α_e G e^{(C_e+δ)/2} / √(2πP)` (times `√m` for `m` field blocks).
    pub sigma_condition: f64,
    /// `leakageBound(2^{-2k}, k, R)` when the condition holds.
    pub conditional_term: Option<f64>,
    /// Mean of `min(kR, leakageBound(ε(h)))` over non-outage draws, `ε(h)` the
    /// computed faded flatness.
    pub conditional_term_measured: Option<f64>,
    pub total: Option<f64>,
}

/// Splits the average leakage into the outage part and the conditional part.
/// `c_e = None` uses the exact ergodic capacity of `model` at `P/σ_e²`.
pub fn leakage_decomposition(
    code: &WiretapCode,
    model: &ChannelModel,
    c_e: Option<f64>,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<LeakageDecomposition> {
    let k = code.k();
    let power = code.power();
    let snr = power / model.noise_variance;
    let c_e = match c_e {
        Some(c) => c,
        None => capacity_exact(model, snr)?,
    };
    let p_out = outage_probability(model, power, k, c_e, delta, trials, seed)?;
    let kr = k as f64 * code.rate();
    let outage_term = if p_out == 0.0 { 0.0 } else { p_out * kr };
    let sigma_condition =
        code.alpha_e() * code.g_eff() * (code.copies() as f64).sqrt() * ((c_e + delta) / 2.0).exp()
            / (2.0 * std::f64::consts::PI * power).sqrt();
    let conditional_term = if sigma_condition <= 1.0 && code.copies() == 1 {
        Some(leakage_bound(2f64.powi(-2 * k as i32), k, code.rate())?)
    } else {
        None
    };
    let sigma_e = model.noise_variance.sqrt();
    let measured = (0..trials)
        .into_par_iter()
        .map(|i| {
            let real = sample_channel(model, k, &mut stream_rng(seed, i as u64))?;
            if real.block_capacity(snr) > c_e + delta {
                return Ok(None);
            }
            let eps = faded_flatness(code, &real.h, power, sigma_e)?.eps.hi;
            Ok(Some(if eps <= 0.5 {
                leakage_bound(eps, k, code.rate())?.min(kr)
            } else {
                kr
            }))
        })
        .collect::<Result<Vec<Option<f64>>>>();
    let conditional_term_measured = measured.ok().and_then(|v| {
        let vals: Vec<f64> = v.into_iter().flatten().collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    });
    Ok(LeakageDecomposition {
        c_e,
        delta,
        outage_probability: p_out,
        outage_term,
        sigma_condition,
        conditional_term,
        conditional_term_measured,
        total: conditional_term.map(|c| c + outage_term),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLeakage {
    /// `I(p_M; p_{Z|H_e})` in nats.
    pub value: f64,
    pub quadrature_error: f64,
    /// Upper end of the faded flatness enclosure.
    pub eps: f64,
    /// `leakageBound(eps, k, R)` when `eps ≤ 1/2`.
    pub bound: Option<f64>,
    /// `H(M)`.
    pub entropy: f64,
}

impl EmpiricalLeakage {
    pub fn within_bound(&self) -> bool {
        self.bound
            .is_none_or(|b| self.value <= b + self.quadrature_error)
    }
}

/// Mutual information between the message and Eve's output for a fixed
/// `H_e`, by quadrature over the mixture of per-message output densities.
pub fn empirical_leakage(
    code: &WiretapCode,
    h: &[Complex64],
    sigma_e: f64,
    p_m: Option<&[f64]>,
) -> Result<EmpiricalLeakage> {
    let k = code.k();
    if k > 2 {
        return Err(Error::Precondition(format!(
            "leakage quadrature is limited to k ≤ 2, got k = {k}"
        )));
    }
    if code.index() > MAX_MESSAGES {
        return Err(Error::Precondition(format!(
            "leakage quadrature needs at most {MAX_MESSAGES} messages"
        )));
    }
    if h.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: h.len(),
        });
    }
    if !(sigma_e > 0.0) {
        return Err(Error::Precondition("σ_e must be positive".into()));
    }
    let index = code.index() as usize;
    let uniform = vec![1.0 / index as f64; index];
    let p = p_m.unwrap_or(&uniform);
    if p.len() != index
        || p.iter().any(|&x| !(x >= 0.0))
        || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::Precondition(
            "message distribution must be a probability vector over all cosets".into(),
        ));
    }
    let power = code.power();
    let eps = faded_flatness(code, h, power, sigma_e)?.eps.hi;
    let bound = if eps <= 0.5 {
        Some(leakage_bound(eps, k, code.rate())?)
    } else {
        None
    };
    let entropy: f64 = -p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>();

    let mut atoms: Vec<Vec<(Vec<f64>, f64)>> = Vec::with_capacity(index);
    let mut dropped = 0.0;
    for m in 0..index {
        if p[m] == 0.0 {
            atoms.push(Vec::new());
            continue;
        }
        let shift = code.cosets().leader_point(m as u64);
        let spec = DiscreteGaussianSpec::new(
            code.coarse().clone(),
            shift,
            CovarianceSpec::Scalar(power.sqrt()),
        )?;
        let pmf = brute_force_pmf(&spec, None)?;
        dropped += p[m] * pmf.tail_mass;
        atoms.push(
            pmf.entries
                .iter()
                .filter(|e| e.prob > 1e-14)
                .map(|e| {
                    let hx: Vec<Complex64> = e.point.iter().zip(h).map(|(x, h)| x * h).collect();
                    (to_real(&hx), e.prob)
                })
                .collect(),
        );
    }
    let n = 2 * k;
    let hmax = h.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let half = BOX_SD * ((power * hmax + sigma_e * sigma_e) / 2.0).sqrt();
    let step = 0.5 * (sigma_e * sigma_e / 2.0).sqrt();
    let per_dim = (MAX_NODES as f64).powf(1.0 / n as f64).floor() as usize;
    let panels = ((2.0 * half / step).ceil() as usize).clamp(2, (per_dim / ORDER).max(2));
    let fine = mi_quadrature(n, half, panels, &atoms, p, sigma_e);
    let coarse = mi_quadrature(n, half, panels / 2, &atoms, p, sigma_e);
    let quadrature_error =
        (fine.0 - coarse.0).abs() + (1.0 - fine.1).abs() * entropy.max(1.0) + dropped;
    Ok(EmpiricalLeakage {
        value: fine.0.max(0.0),
        quadrature_error,
        eps,
        bound,
        entropy,
    })
}

/// `(Σ_m p_m ∫ g_m ln(g_m/g), ∫ g)` on a tensor Gauss–Legendre grid.
fn mi_quadrature(
    n: usize,
    half: f64,
    panels: usize,
    atoms: &[Vec<(Vec<f64>, f64)>],
    p: &[f64],
    sigma_e: f64,
) -> (f64, f64) {
    let (nodes, weights) = composite_legendre(-half, half, panels.max(1), ORDER);
    let m = nodes.len();
    let s2 = sigma_e * sigma_e;
    let norm = 1.0 / (std::f64::consts::PI * s2).powi((n / 2) as i32);
    let total = m.pow(n as u32);
    let [info, mass] = ordered_sum(total, |mut idx| {
        let mut x = vec![0.0; n];
        let mut w = 1.0;
        for xi in x.iter_mut() {
            let t = idx % m;
            idx /= m;
            *xi = nodes[t];
            w *= weights[t];
        }
        let g: Vec<f64> = atoms
            .iter()
            .map(|a| {
                norm * a
                    .iter()
                    .map(|(y, q)| {
                        q * (-(x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>()) / s2)
                            .exp()
                    })
                    .sum::<f64>()
            })
            .collect();
        let mix: f64 = g.iter().zip(p).map(|(g, p)| g * p).sum();
        let mut info = 0.0;
        for (gm, pm) in g.iter().zip(p) {
            if *pm > 0.0 && *gm > 0.0 && mix > 0.0 {
                info += pm * gm * (gm / mix).ln();
            }
        }
        [w * info, w * mix]
    });
    (info, mass)
}
