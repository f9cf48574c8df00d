//! Complex lattices in ℂ^k with the real inner product `⟨x, y⟩ = Re(x†y)`.
//!
//! A lattice is stored through its real generator matrix: row `j` is
//! `φ(g_j) = (Re g_j, Im g_j) ∈ ℝ^{2k}`. All metric questions (Gram matrix,
//! dual, enumeration) are answered in that real picture.

mod coset;
mod enumerate;
mod reduce;
mod snf;
mod theta;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numberfield::{FractionalIdeal, NumberField};

pub use coset::CosetSystem;
pub use enumerate::{Enumerator, MAX_ENUM_DIM};
pub use reduce::Gso;
pub use snf::{smith, Smith};
pub use theta::{tail_bound, Interval, ThetaSum};

/// Enumeration budget for theta sums.
const POINT_BUDGET: usize = 4_000_000;

/// `φ(z) = (Re z_1, …, Re z_k, Im z_1, …, Im z_k)`.
pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter()
        .map(|c| c.re)
        .chain(z.iter().map(|c| c.im))
        .collect()
}

pub fn to_complex(v: &[f64]) -> Vec<Complex64> {
    let k = v.len() / 2;
    (0..k).map(|i| Complex64::new(v[i], v[k + i])).collect()
}

/// Real `2k × 2k` matrix of the ℂ-linear map `z ↦ A z` in the `φ` layout.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let k = a.nrows();
    DMatrix::from_fn(2 * k, 2 * k, |i, j| {
        let (bi, bj) = (i / k, j / k);
        let z = a[(i % k, j % k)];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub k: usize,
    /// Row-major `2k × 2k` real generator matrix.
    pub real_generator_matrix: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ShortVector {
    pub norm: f64,
    /// Coordinates over the lattice generators.
    pub coords: Vec<i64>,
    pub point: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct ClosePoint {
    pub coords: Vec<i64>,
    pub point: Vec<Complex64>,
    pub dist_sq: f64,
}

/// Outcome of comparing a lattice with a second basis of (supposedly) the
/// same lattice.
#[derive(Debug, Clone, Serialize)]
pub struct BasisComparison {
    /// `det` of the change-of-basis matrix.
    pub det: f64,
    /// Largest distance of a change-of-basis entry from an integer.
    pub max_residual: f64,
    pub unimodular: bool,
}

#[derive(Debug, Clone)]
pub struct ComplexLattice {
    k: usize,
    generators: DMatrix<f64>,
    enumerator: OnceLock<Enumerator>,
    shortest: OnceLock<ShortVector>,
}

impl ComplexLattice {
    pub fn from_real_generators(k: usize, generators: DMatrix<f64>) -> Result<Self> {
        let n = 2 * k;
        if k == 0 || generators.nrows() != n || generators.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: generators.nrows(),
            });
        }
        if generators.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("non-finite generator entry".into()));
        }
        let det = generators.determinant();
        let scale = generators.row_iter().map(|r| r.norm()).product::<f64>();
        if det.abs() <= 1e-12 * scale || det == 0.0 {
            return Err(Error::Singular(
                "lattice generators are linearly dependent".into(),
            ));
        }
        Ok(Self {
            k,
            generators,
            enumerator: OnceLock::new(),
            shortest: OnceLock::new(),
        })
    }

    /// Generators given as `2k` complex vectors of length `k`.
    pub fn from_complex_generators(k: usize, gens: &[Vec<Complex64>]) -> Result<Self> {
        if gens.len() != 2 * k {
            return Err(Error::DimensionMismatch {
                expected: 2 * k,
                got: gens.len(),
            });
        }
        if let Some(g) = gens.iter().find(|g| g.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: g.len(),
            });
        }
        let rows: Vec<f64> = gens.iter().flat_map(|g| to_real(g)).collect();
        Self::from_real_generators(k, DMatrix::from_row_slice(2 * k, 2 * k, &rows))
    }

    /// `scale · ψ(O_F)`, generated by the embedded integral basis.
    pub fn from_ring(field: &NumberField, scale: f64) -> Result<Self> {
        let gens = (0..field.degree())
            .map(|j| {
                let mut e = vec![0i64; field.degree()];
                e[j] = 1;
                let z = field.embed(&crate::numberfield::FieldElement::from_ints(&e))?;
                Ok(z.into_iter().map(|c| c * scale).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_complex_generators(field.k(), &gens)
    }

    /// `scale · ψ(𝓘)` for a fractional ideal.
    pub fn from_ideal(field: &NumberField, ideal: &FractionalIdeal, scale: f64) -> Result<Self> {
        let gens = ideal
            .basis_elements()
            .iter()
            .map(|x| Ok(field.embed(x)?.into_iter().map(|c| c * scale).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_complex_generators(field.k(), &gens)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn real_dim(&self) -> usize {
        2 * self.k
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn complex_generators(&self) -> Vec<Vec<Complex64>> {
        self.generators
            .row_iter()
            .map(|r| to_complex(&r.iter().copied().collect::<Vec<_>>()))
            .collect()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        &self.generators * self.generators.transpose()
    }

    pub fn volume(&self) -> f64 {
        self.generators.determinant().abs()
    }

    /// Real point `Σ x_j φ(g_j)`.
    pub fn real_point(&self, coords: &[i64]) -> Vec<f64> {
        let n = self.real_dim();
        (0..n)
            .map(|c| {
                (0..n)
                    .map(|r| coords[r] as f64 * self.generators[(r, c)])
                    .sum()
            })
            .collect()
    }

    pub fn point(&self, coords: &[i64]) -> Vec<Complex64> {
        to_complex(&self.real_point(coords))
    }

    /// Real coordinates of `z` over the generators.
    pub fn coordinates(&self, z: &[Complex64]) -> Result<Vec<f64>> {
        if z.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: z.len(),
            });
        }
        let v = to_real(z);
        let inv = self
            .generators
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("generators".into()))?;
        let n = self.real_dim();
        Ok((0..n)
            .map(|j| (0..n).map(|i| v[i] * inv[(i, j)]).sum())
            .collect())
    }

    /// `Λ* = {x : ⟨x, y⟩ ∈ ℤ ∀ y ∈ Λ}` with generators satisfying `⟨b_i, b*_j⟩ = δ_ij`.
    pub fn dual(&self) -> Self {
        let inv = self
            .generators
            .clone()
            .try_inverse()
            .expect("generators are nonsingular");
        Self::from_real_generators(self.k, inv.transpose()).expect("dual of a lattice is a lattice")
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::Precondition(format!("invalid scale {alpha}")));
        }
        Self::from_real_generators(self.k, &self.generators * alpha)
    }

    pub fn conjugate(&self) -> Self {
        let mut g = self.generators.clone();
        for mut row in g.row_iter_mut() {
            for c in self.k..2 * self.k {
                row[c] = -row[c];
            }
        }
        Self::from_real_generators(self.k, g).expect("conjugation preserves rank")
    }

    /// `H·Λ` for diagonal `H = diag(h)`.
    pub fn apply_diagonal(&self, h: &[Complex64]) -> Result<Self> {
        if h.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: h.len(),
            });
        }
        if let Some(i) = h.iter().position(|z| z.norm() == 0.0) {
            return Err(Error::ZeroFading(i));
        }
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(h));
        self.apply_matrix(&a)
    }

    /// `A·Λ` for a nonsingular complex `k × k` matrix.
    pub fn apply_matrix(&self, a: &DMatrix<Complex64>) -> Result<Self> {
        if a.nrows() != self.k || a.ncols() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: a.nrows(),
            });
        }
        let ar = realify(a);
        Self::from_real_generators(self.k, &self.generators * ar.transpose())
    }

    fn check_guard(&self) -> Result<()> {
        if self.real_dim() > MAX_ENUM_DIM {
            return Err(Error::DimensionGuard {
                dim: self.real_dim(),
                max: MAX_ENUM_DIM,
            });
        }
        Ok(())
    }

    pub fn enumerator(&self) -> Result<&Enumerator> {
        self.check_guard()?;
        Ok(self
            .enumerator
            .get_or_init(|| Enumerator::new(&self.generators)))
    }

    /// Exact `λ₁` with a witness, by enumeration.
    pub fn shortest_vector(&self) -> Result<&ShortVector> {
        let e = self.enumerator()?;
        Ok(self.shortest.get_or_init(|| {
            let (d, coords) = e.shortest();
            ShortVector {
                norm: d.sqrt(),
                point: self.point(&coords),
                coords,
            }
        }))
    }

    pub fn minimum(&self) -> Result<f64> {
        Ok(self.shortest_vector()?.norm)
    }

    /// Exact closest lattice vector to a complex target.
    pub fn closest_vector(&self, target: &[Complex64]) -> Result<ClosePoint> {
        if target.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: target.len(),
            });
        }
        let e = self.enumerator()?;
        let (d, coords) = e.closest(&to_real(target));
        Ok(ClosePoint {
            point: self.point(&coords),
            coords,
            dist_sq: d,
        })
    }

    /// Nonzero points with `‖λ‖ ≤ radius`, as `(coords, squared norm)`.
    pub fn points_in_ball(&self, radius: f64) -> Result<Vec<(Vec<i64>, f64)>> {
        let e = self.enumerator()?;
        let mut out = Vec::new();
        e.for_each_in_ball(radius * radius * (1.0 + 1e-12), |x, d| {
            out.push((e.to_original(x), d))
        });
        Ok(out)
    }

    /// `Σ_{0<‖λ‖≤radius} e^{-c‖λ‖²}` plus a rigorous bound on the rest.
    pub fn theta_tail(&self, c: f64, radius: f64) -> Result<ThetaSum> {
        if !(c > 0.0) || !(radius > 0.0) {
            return Err(Error::Precondition(
                "theta sum needs c > 0 and radius > 0".into(),
            ));
        }
        let lambda1 = self.minimum()?;
        let e = self.enumerator()?;
        let (mut partial, mut points) = (0.0, 0usize);
        e.for_each_in_ball(radius * radius, |_, d| {
            partial += (-c * d).exp();
            points += 1;
        });
        let tail = tail_bound(self.real_dim(), lambda1, c, radius);
        Ok(ThetaSum {
            partial,
            tail,
            radius,
            points,
        })
    }

    /// Theta sum whose remainder bound is at most `rel_tol` of the partial sum
    /// (or below `1e-300` in absolute terms).
    pub fn theta_certified(&self, c: f64, rel_tol: f64) -> Result<ThetaSum> {
        let lambda1 = self.minimum()?;
        let n = self.real_dim() as f64;
        let mut r2 = lambda1 * lambda1 * 1.000_001 + (n + 5.0) / c;
        loop {
            let s = self.theta_tail(c, r2.sqrt())?;
            if s.tail <= rel_tol * s.partial || s.partial + s.tail < 1e-300 {
                return Ok(s);
            }
            if s.points > POINT_BUDGET {
                return Err(Error::ThetaNotCertified(format!(
                    "remainder {:.3e} exceeds {rel_tol:.1e} of partial sum {:.3e} after {} points",
                    s.tail, s.partial, s.points
                )));
            }
            r2 *= 1.5;
        }
    }

    /// Decides whether `Σ_{λ≠0} e^{-c‖λ‖²} ≤ eps`, stopping as soon as the
    /// partial sum or the certified enclosure settles the question.
    pub fn theta_at_most(&self, c: f64, eps: f64) -> Result<bool> {
        let lambda1 = self.minimum()?;
        let mut r2 = lambda1 * lambda1 * 1.000_001;
        loop {
            let s = self.theta_tail(c, r2.sqrt())?;
            if s.partial > eps {
                return Ok(false);
            }
            if s.partial + s.tail <= eps {
                return Ok(true);
            }
            if s.points > POINT_BUDGET {
                return Err(Error::ThetaNotCertified(format!(
                    "cannot separate theta sum from {eps:.3e} within the point budget"
                )));
            }
            r2 = r2 * 1.5 + 1.0 / c;
        }
    }

    /// Expresses `other`'s generators over this lattice's generators.
    pub fn compare_basis(&self, other: &ComplexLattice) -> BasisComparison {
        let inv = self.generators.clone().try_inverse().expect("nonsingular");
        let u = &other.generators * inv;
        let max_residual = u.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
        let det = u.determinant();
        let unimodular = max_residual < 1e-6 && (det.abs() - 1.0).abs() < 1e-6;
        BasisComparison {
            det,
            max_residual,
            unimodular,
        }
    }

    pub fn to_json(&self) -> LatticeJson {
        let n = self.real_dim();
        LatticeJson {
            k: self.k,
            real_generator_matrix: (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| self.generators[(i, j)])
                .collect(),
        }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        let n = 2 * j.k;
        if j.real_generator_matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: j.real_generator_matrix.len(),
            });
        }
        Self::from_real_generators(j.k, DMatrix::from_row_slice(n, n, &j.real_generator_matrix))
    }
}
