//! Truncated theta sums `Σ_{0<‖λ‖≤r} e^{-c‖λ‖²}` with a rigorous bound on the
//! remainder.

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]` enclosing a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn overlaps(&self, other: &Interval, slack: f64) -> bool {
        self.lo <= other.hi + slack && other.lo <= self.hi + slack
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSum {
    /// Sum over nonzero points with `‖λ‖ ≤ radius`.
    pub partial: f64,
    /// Upper bound on the sum over `‖λ‖ > radius`.
    pub tail: f64,
    pub radius: f64,
    pub points: usize,
}

impl ThetaSum {
    pub fn interval(&self) -> Interval {
        Interval::new(self.partial, self.partial + self.tail)
    }
}

/// Upper bound on `Σ_{‖λ‖>r} e^{-c‖λ‖²}` for a lattice of real dimension `n`
/// and minimum `λ₁`.
///
/// Shells `(a_j, a_j + h]` with `a_j = r + jh` hold at most
/// `(1 + 2(a_j+h)/λ₁)^n` points (disjoint balls of radius `λ₁/2`), each
/// contributing at most `e^{-c a_j²}`. The ratio of consecutive shell bounds is
/// decreasing in `j`, so once it drops below one the remainder is dominated by
/// a geometric series.
pub fn tail_bound(n: usize, lambda1: f64, c: f64, r: f64) -> f64 {
    let h = (0.5 * lambda1).min(0.5 / (c * r.max(lambda1)));
    let log_term = |j: f64| {
        let a = r + j * h;
        n as f64 * (1.0 + 2.0 * (a + h) / lambda1).ln() - c * a * a
    };
    let mut sum = 0.0;
    let mut j = 0.0;
    let mut lt = log_term(0.0);
    for _ in 0..1_000_000 {
        let next = log_term(j + 1.0);
        let q = (next - lt).exp();
        let term = lt.exp();
        if q < 0.5 {
            return sum + term / (1.0 - q);
        }
        sum += term;
        j += 1.0;
        lt = next;
    }
    f64::INFINITY
}
