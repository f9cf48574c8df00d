//! Exact probabilities of a discrete Gaussian by enumeration.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use super::DiscreteGaussianSpec;
use crate::error::{Error, Result};
use crate::lattice::{tail_bound, to_complex, to_real};

const MASS_TOL: f64 = 1e-9;
const POINT_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfEntry {
    pub coords: Vec<i64>,
    pub point: Vec<Complex64>,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Pmf {
    /// Sorted by decreasing probability, ties by coordinates.
    pub entries: Vec<PmfEntry>,
    /// Upper bound on the probability outside the enumerated ball.
    pub tail_mass: f64,
    pub radius: f64,
}

impl Pmf {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    pub fn get(&self, coords: &[i64]) -> f64 {
        self.entries
            .iter()
            .find(|e| e.coords == coords)
            .map_or(0.0, |e| e.prob)
    }

    /// Total variation distance to the empirical law of `counts` (keyed by
    /// lattice coordinates) over `n` draws, including the truncated mass.
    pub fn tv_distance(&self, counts: &HashMap<Vec<i64>, u64>, n: u64) -> f64 {
        let mut seen = 0u64;
        let mut d = 0.0;
        for e in &self.entries {
            let c = counts.get(&e.coords).copied().unwrap_or(0);
            seen += c;
            d += (c as f64 / n as f64 - e.prob).abs();
        }
        d += (n - seen) as f64 / n as f64;
        0.5 * d + self.tail_mass
    }
}

/// Probabilities of `D_{Λ+c,√Σ}` on every point of `Λ + c` within `radius`
/// of the origin (in the whitened metric when `Σ` is a matrix). With
/// `radius = None` the ball grows until the truncated mass is below `1e-9`.
pub fn brute_force_pmf(spec: &DiscreteGaussianSpec, radius: Option<f64>) -> Result<Pmf> {
    let (lat, shift, sigma) = spec.whitened()?;
    let e = lat.enumerator()?;
    let lambda1 = lat.minimum()?;
    let n = lat.real_dim();
    let c = 1.0 / (sigma * sigma);
    let target: Vec<f64> = to_real(&shift).iter().map(|v| -v).collect();
    let shift_norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = radius.unwrap_or(shift_norm + sigma * (n as f64 + 30.0).sqrt());
    loop {
        let mut pts: Vec<(Vec<i64>, f64)> = Vec::new();
        let mut overflow = false;
        e.search(&target, r * r, |x, d| {
            pts.push((x.to_vec(), d));
            if pts.len() > POINT_BUDGET {
                overflow = true;
                Some(-1.0)
            } else {
                None
            }
        });
        if overflow {
            return Err(Error::Precondition(format!(
                "enumeration infeasible: more than {POINT_BUDGET} points within radius {r:.3}"
            )));
        }
        let partial: f64 = pts.iter().map(|(_, d)| (-c * d).exp()).sum();
        let tail = tail_bound(n, lambda1, c, r);
        let tail_mass = tail / (partial + tail);
        if partial > 0.0 && tail_mass < MASS_TOL {
            let z = partial + tail;
            let real_shift = to_real(&spec.shift);
            let mut entries: Vec<PmfEntry> = pts
                .into_iter()
                .map(|(x, d)| {
                    let coords = e.to_original(&x);
                    let p: Vec<f64> = spec
                        .lattice
                        .real_point(&coords)
                        .iter()
                        .zip(&real_shift)
                        .map(|(a, b)| a + b)
                        .collect();
                    PmfEntry {
                        point: to_complex(&p),
                        coords,
                        prob: (-c * d).exp() / z,
                    }
                })
                .collect();
            entries.sort_by(|a, b| {
                b.prob
                    .total_cmp(&a.prob)
                    .then_with(|| a.coords.cmp(&b.coords))
            });
            return Ok(Pmf {
                entries,
                tail_mass,
                radius: r,
            });
        }
        if radius.is_some() {
            return Err(Error::Precondition(format!(
                "radius {r:.3} leaves truncated mass {tail_mass:.3e} above {MASS_TOL:.0e}"
            )));
        }
        r *= 1.25;
    }
}
