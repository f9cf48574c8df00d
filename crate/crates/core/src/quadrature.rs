//! Gauss–Legendre and Gauss–Hermite rules via Golub–Welsch.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

const CHUNK: usize = 4096;

fn golub_welsch(n: usize, off: impl Fn(usize) -> f64, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = off(i);
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    golub_welsch(n, |i| i as f64 / ((4 * i * i - 1) as f64).sqrt(), 2.0)
}

/// Nodes and weights for `∫ f(x) e^{-x²} dx`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    golub_welsch(n, |i| (i as f64 / 2.0).sqrt(), std::f64::consts::PI.sqrt())
}

/// Composite Gauss–Legendre nodes over `[a, b]` split into `panels` pieces.
pub fn composite_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Parallel `Σ_{i<total} f(i)` with a summation order independent of the
/// thread count.
pub(crate) fn ordered_sum<const N: usize>(
    total: usize,
    f: impl Fn(usize) -> [f64; N] + Sync,
) -> [f64; N] {
    let partial: Vec<[f64; N]> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; N];
            for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                for (a, v) in acc.iter_mut().zip(f(i)) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    partial.iter().fold([0.0; N], |mut acc, p| {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
        acc
    })
}
