//! Quotients `Λ_b / Λ_e` of nested lattices.
//!
//! With `M` the integer change of basis (`coarse = M · fine`) and its Smith
//! form `U M V = diag(d)`, a fine vector with integer coordinates `x` lies in
//! `Λ_e` iff `(xV)_i ≡ 0 (mod d_i)` for every `i`. Messages are the residue
//! digits `(xV) mod d` read in mixed radix, least significant first.

use num_complex::Complex64;

use super::snf::{smith, unimodular_inverse};
use super::ComplexLattice;
use crate::error::{Error, Result};
use crate::numberfield::{q_det, q_inverse, FieldElement, NumberField, QMat, Q};

#[derive(Debug, Clone)]
pub struct CosetSystem {
    fine: ComplexLattice,
    coarse: ComplexLattice,
    change: Vec<Vec<i64>>,
    /// `adj(M)` and `det(M)`, so `M^{-1} = adj / det`.
    adj: Vec<Vec<i128>>,
    det: i128,
    v: Vec<Vec<i128>>,
    v_inv: Vec<Vec<i128>>,
    diag: Vec<i128>,
    index: u64,
    leaders: Vec<Vec<i64>>,
}

impl CosetSystem {
    /// `Λ_e = c · Λ_b`.
    pub fn from_scalar(fine: &ComplexLattice, c: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidNesting(
                "scalar nesting factor must be nonzero".into(),
            ));
        }
        let n = fine.real_dim();
        let change = (0..n)
            .map(|i| (0..n).map(|j| if i == j { c } else { 0 }).collect())
            .collect();
        let coarse = fine.scaled(c as f64)?;
        Self::build(fine.clone(), coarse, change)
    }

    /// `Λ_e = ψ(a) ⊙ Λ_b`, where `Λ_b` must be a scaled copy of `ψ(O_F)` with
    /// generators in integral-basis order.
    pub fn from_element(
        fine: &ComplexLattice,
        field: &NumberField,
        a: &FieldElement,
    ) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidNesting("zero element".into()));
        }
        if !a.is_integral() {
            return Err(Error::InvalidNesting(
                "non-integral change of basis: element is not in O_F".into(),
            ));
        }
        let mm = field.multiplication_matrix(a)?;
        let change: Vec<Vec<i64>> = mm
            .iter()
            .map(|row| {
                row.iter()
                    .map(|q| num_traits::ToPrimitive::to_i64(&q.to_integer()))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidNesting("multiplication matrix overflows i64".into()))?;
        let coarse = fine.apply_diagonal(&field.embed(a)?)?;
        let expected = integer_times(&change, fine);
        let err = (&expected - coarse.generators()).abs().max();
        let scale = fine.generators().abs().max();
        if err > 1e-8 * scale.max(1.0) {
            return Err(Error::InvalidNesting(
                "fine lattice generators are not a scaled embedding of the integral basis".into(),
            ));
        }
        Self::build(fine.clone(), coarse, change)
    }

    /// General nested pair; the change of basis must be integral.
    pub fn from_sublattice(fine: &ComplexLattice, coarse: &ComplexLattice) -> Result<Self> {
        if fine.k() != coarse.k() {
            return Err(Error::DimensionMismatch {
                expected: fine.k(),
                got: coarse.k(),
            });
        }
        let inv = fine
            .generators()
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("fine".into()))?;
        let m = coarse.generators() * inv;
        let residual = m.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
        if residual > 1e-6 {
            return Err(Error::InvalidNesting(format!(
                "non-integral change of basis (max residual {residual:.3e})"
            )));
        }
        let n = fine.real_dim();
        let change = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].round() as i64).collect())
            .collect();
        Self::build(fine.clone(), coarse.clone(), change)
    }

    fn build(fine: ComplexLattice, coarse: ComplexLattice, change: Vec<Vec<i64>>) -> Result<Self> {
        let s = smith(&change)
            .ok_or_else(|| Error::InvalidNesting("singular change of basis".into()))?;
        let v_inv = unimodular_inverse(&s.v).expect("Smith transform is unimodular");
        let det_abs: i128 = s.diag.iter().product();
        let index =
            u64::try_from(det_abs).map_err(|_| Error::InvalidNesting("index too large".into()))?;
        if index > 1 << 24 {
            return Err(Error::InvalidNesting(format!(
                "index {index} too large to enumerate cosets"
            )));
        }
        let (mut adj, mut det) = adjugate(&change);
        if det < 0 {
            det = -det;
            adj.iter_mut().flatten().for_each(|v| *v = -*v);
        }
        let mut sys = Self {
            fine,
            coarse,
            change,
            adj,
            det,
            v: s.v,
            v_inv,
            diag: s.diag,
            index,
            leaders: Vec::new(),
        };
        sys.leaders = (0..index)
            .map(|m| sys.reduce(&sys.digits_to_vector(m)))
            .collect();
        Ok(sys)
    }

    pub fn fine(&self) -> &ComplexLattice {
        &self.fine
    }

    pub fn coarse(&self) -> &ComplexLattice {
        &self.coarse
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Integer matrix `M` with `coarse generators = M · fine generators`.
    pub fn change_of_basis(&self) -> &[Vec<i64>] {
        &self.change
    }

    /// Elementary divisors of the quotient group.
    pub fn invariant_factors(&self) -> Vec<u64> {
        self.diag.iter().map(|&d| d as u64).collect()
    }

    /// Coset leaders as fine coordinates, indexed by message.
    pub fn leaders(&self) -> &[Vec<i64>] {
        &self.leaders
    }

    pub fn leader_point(&self, m: u64) -> Vec<Complex64> {
        self.fine.point(&self.leaders[m as usize])
    }

    fn digits_to_vector(&self, mut m: u64) -> Vec<i64> {
        let n = self.diag.len();
        let mut r = vec![0i128; n];
        for (ri, &d) in r.iter_mut().zip(&self.diag) {
            *ri = (m % d as u64) as i128;
            m /= d as u64;
        }
        (0..n)
            .map(|j| (0..n).map(|i| r[i] * self.v_inv[i][j]).sum::<i128>() as i64)
            .collect()
    }

    /// Message index of the coset containing the fine vector `x`.
    pub fn message_of(&self, x: &[i64]) -> u64 {
        let n = self.diag.len();
        let mut m = 0u64;
        let mut radix = 1u64;
        for i in 0..n {
            let xv: i128 = (0..n).map(|r| x[r] as i128 * self.v[r][i]).sum();
            let d = self.diag[i];
            m += xv.rem_euclid(d) as u64 * radix;
            radix *= d as u64;
        }
        m
    }

    /// Coarse-basis coordinates `x M^{-1}`, as exact numerators over `det`.
    fn coarse_numerators(&self, x: &[i64]) -> Vec<i128> {
        let n = x.len();
        (0..n)
            .map(|j| (0..n).map(|i| x[i] as i128 * self.adj[i][j]).sum())
            .collect()
    }

    pub fn in_coarse(&self, x: &[i64]) -> bool {
        self.coarse_numerators(x).iter().all(|v| v % self.det == 0)
    }

    /// Representative of `x + Λ_e` inside the basis parallelepiped of `Λ_e`.
    pub fn reduce(&self, x: &[i64]) -> Vec<i64> {
        let n = x.len();
        let floors: Vec<i128> = self
            .coarse_numerators(x)
            .iter()
            .map(|v| v.div_euclid(self.det))
            .collect();
        (0..n)
            .map(|j| {
                x[j] - (0..n)
                    .map(|i| floors[i] * self.change[i][j] as i128)
                    .sum::<i128>() as i64
            })
            .collect()
    }
}

fn integer_times(m: &[Vec<i64>], lat: &ComplexLattice) -> nalgebra::DMatrix<f64> {
    let mf = nalgebra::DMatrix::from_fn(m.len(), m.len(), |i, j| m[i][j] as f64);
    mf * lat.generators()
}

/// Exact `(adj(M), det(M))`.
fn adjugate(m: &[Vec<i64>]) -> (Vec<Vec<i128>>, i128) {
    use num_traits::ToPrimitive;
    let q: QMat = m
        .iter()
        .map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect())
        .collect();
    let det = q_det(&q);
    let inv = q_inverse(&q).expect("nonsingular change of basis");
    let adj = inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    (v * &det)
                        .to_integer()
                        .to_i128()
                        .expect("integral adjugate")
                })
                .collect()
        })
        .collect();
    (adj, det.to_integer().to_i128().expect("small determinant"))
}
