//! Schnorr–Euchner enumeration over an LLL-reduced basis.

use nalgebra::DMatrix;

use super::reduce::{lll, Gso};

/// Largest real dimension handled by exact enumeration.
pub const MAX_ENUM_DIM: usize = 16;

const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Enumerator {
    reduced: DMatrix<f64>,
    reduced_inv: DMatrix<f64>,
    /// `reduced = transform · original`
    transform: DMatrix<i64>,
    gso: Gso,
}

impl Enumerator {
    pub fn new(generators: &DMatrix<f64>) -> Self {
        let mut reduced = generators.clone();
        let transform = lll(&mut reduced);
        let reduced_inv = reduced
            .clone()
            .try_inverse()
            .expect("lattice basis is nonsingular");
        let gso = Gso::new(&reduced);
        Self {
            reduced,
            reduced_inv,
            transform,
            gso,
        }
    }

    pub fn dim(&self) -> usize {
        self.reduced.nrows()
    }

    pub fn reduced_basis(&self) -> &DMatrix<f64> {
        &self.reduced
    }

    pub fn bstar_sq(&self) -> &[f64] {
        &self.gso.bstar_sq
    }

    pub fn gso(&self) -> &Gso {
        &self.gso
    }

    /// Maps coordinates over the reduced basis back to the original generators.
    pub fn to_original(&self, x: &[i64]) -> Vec<i64> {
        let n = self.dim();
        (0..n)
            .map(|c| (0..n).map(|r| x[r] * self.transform[(r, c)]).sum())
            .collect()
    }

    /// Real coordinates of `target` over the reduced basis.
    pub fn reduced_coords(&self, target: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| target[i] * self.reduced_inv[(i, j)]).sum())
            .collect()
    }

    /// Visits every lattice vector `v` with `‖v − target‖² ≤ bound`, where the
    /// visitor may shrink the bound by returning `Some(new_bound)`. Coordinates
    /// passed to the visitor are over the reduced basis.
    pub fn search<F>(&self, target: &[f64], bound: f64, mut visit: F)
    where
        F: FnMut(&[i64], f64) -> Option<f64>,
    {
        let n = self.dim();
        let tau = self.reduced_coords(target);
        let mut state = Search {
            mu: &self.gso.mu,
            bsq: &self.gso.bstar_sq,
            tau,
            x: vec![0; n],
            bound,
        };
        state.descend(n - 1, 0.0, &mut visit);
    }

    /// All nonzero lattice vectors with squared norm ≤ `r2`, as
    /// `(reduced coords, squared norm)`.
    pub fn for_each_in_ball<F: FnMut(&[i64], f64)>(&self, r2: f64, mut f: F) {
        let zero = vec![0.0; self.dim()];
        self.search(&zero, r2, |x, d| {
            if x.iter().any(|&v| v != 0) {
                f(x, d);
            }
            None
        });
    }

    /// Exact shortest nonzero vector: `(squared norm, original coords)`.
    pub fn shortest(&self) -> (f64, Vec<i64>) {
        let n = self.dim();
        let init = self
            .reduced
            .row_iter()
            .map(|r| r.norm_squared())
            .fold(f64::INFINITY, f64::min);
        let mut best = Best::new(init * (1.0 + 1e-9));
        let zero = vec![0.0; n];
        self.search(&zero, best.dist * (1.0 + TIE_TOL), |x, d| {
            if x.iter().all(|&v| v == 0) {
                return None;
            }
            best.offer(self.to_original(x), d)
        });
        (
            best.dist,
            best.coords
                .expect("a basis vector is always within the initial radius"),
        )
    }

    /// Exact closest vector to `target` (real coordinates), ties broken by
    /// lexicographic order on the original integer coordinates.
    pub fn closest(&self, target: &[f64]) -> (f64, Vec<i64>) {
        let mut best = Best::new(f64::INFINITY);
        self.search(target, f64::INFINITY, |x, d| {
            best.offer(self.to_original(x), d)
        });
        (
            best.dist,
            best.coords.expect("enumeration always reaches a leaf"),
        )
    }
}

struct Best {
    dist: f64,
    coords: Option<Vec<i64>>,
}

impl Best {
    fn new(dist: f64) -> Self {
        Self { dist, coords: None }
    }

    fn offer(&mut self, coords: Vec<i64>, d: f64) -> Option<f64> {
        let tol = TIE_TOL * self.dist.max(1e-300);
        let better = match &self.coords {
            None => d <= self.dist,
            Some(cur) => d < self.dist - tol || ((d - self.dist).abs() <= tol && coords < *cur),
        };
        if better {
            self.dist = d;
            self.coords = Some(coords);
            Some(d * (1.0 + TIE_TOL))
        } else {
            None
        }
    }
}

struct Search<'a> {
    mu: &'a DMatrix<f64>,
    bsq: &'a [f64],
    tau: Vec<f64>,
    x: Vec<i64>,
    bound: f64,
}

impl Search<'_> {
    fn descend<F>(&mut self, level: usize, partial: f64, visit: &mut F)
    where
        F: FnMut(&[i64], f64) -> Option<f64>,
    {
        let n = self.x.len();
        let mut c = self.tau[level];
        for j in level + 1..n {
            c -= self.mu[(j, level)] * (self.x[j] as f64 - self.tau[j]);
        }
        let b = self.bsq[level];
        let first = c.round() as i64;
        let (mut up, mut down) = (first, first - 1);
        let (mut up_open, mut down_open) = (true, true);
        while up_open || down_open {
            let take_up = match (up_open, down_open) {
                (true, true) => (up as f64 - c).abs() <= (down as f64 - c).abs(),
                (u, _) => u,
            };
            let z = if take_up { up } else { down };
            let diff = z as f64 - c;
            let d = partial + b * diff * diff;
            if d > self.bound {
                if take_up {
                    up_open = false;
                } else {
                    down_open = false;
                }
                continue;
            }
            self.x[level] = z;
            if level == 0 {
                if let Some(nb) = visit(&self.x, d) {
                    self.bound = nb;
                }
            } else {
                self.descend(level - 1, d, visit);
            }
            if take_up {
                up += 1;
            } else {
                down -= 1;
            }
        }
    }
}
