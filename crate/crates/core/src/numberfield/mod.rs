//! Totally complex number fields given by a minimal polynomial and a trusted
//! integral basis.
//!
//! Everything that has to hold exactly (trace forms, the codifferent, norms of
//! ideals) is computed over ℚ. Floating point only appears when elements are
//! pushed through the complex embeddings.

mod qmat;
mod roots;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use qmat::{QMat, Q};

const CATALOG_JSON: &str = include_str!("../../data/fields.json");

/// On-disk description of a field, as stored in `data/fields.json`.
///
/// `min_poly_coeffs` is in ascending order (constant term first) and must be
/// monic. Each row of `integral_basis` gives one basis element in coordinates
/// over the power basis `1, θ, …, θ^{n-1}`, as rational strings (`"1/2"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub degree: usize,
    pub min_poly_coeffs: Vec<i64>,
    pub integral_basis: Vec<Vec<String>>,
    pub discriminant: i64,
}

/// The built-in catalog of fields.
pub fn catalog() -> Vec<FieldSpec> {
    serde_json::from_str(CATALOG_JSON).expect("built-in field catalog is valid JSON")
}

pub fn catalog_names() -> Vec<String> {
    catalog().into_iter().map(|s| s.name).collect()
}

/// An element of the field, in coordinates over the integral basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coords: Vec<Q>,
}

impl FieldElement {
    pub fn new(coords: Vec<Q>) -> Self {
        Self { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self {
            coords: coords.iter().map(|&c| qmat::int(c)).collect(),
        }
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// Integer coordinates, if the element lies in the ring of integers.
    pub fn integer_coords(&self) -> Option<Vec<i64>> {
        self.coords
            .iter()
            .map(|c| {
                if c.is_integer() {
                    c.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }
}

/// A fractional ideal, stored as a ℤ-basis whose rows are coordinates over the
/// integral basis.
#[derive(Debug, Clone)]
pub struct FractionalIdeal {
    basis_matrix: QMat,
    norm: Q,
}

impl FractionalIdeal {
    pub fn new(basis_matrix: QMat) -> Result<Self> {
        let d = qmat::det(&basis_matrix);
        if d.is_zero() {
            return Err(Error::Singular("ideal basis matrix".into()));
        }
        Ok(Self {
            basis_matrix,
            norm: d.abs(),
        })
    }

    /// The principal ideal `a·O_F`.
    pub fn principal(field: &NumberField, a: &FieldElement) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidNesting(
                "zero element generates no ideal".into(),
            ));
        }
        Self::new(field.multiplication_matrix(a)?)
    }

    pub fn basis_matrix(&self) -> &QMat {
        &self.basis_matrix
    }

    pub fn norm(&self) -> &Q {
        &self.norm
    }

    pub fn norm_f64(&self) -> f64 {
        qmat::to_f64(&self.norm)
    }

    pub fn basis_elements(&self) -> Vec<FieldElement> {
        self.basis_matrix
            .iter()
            .cloned()
            .map(FieldElement::new)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct NumberField {
    spec: FieldSpec,
    degree: usize,
    min_poly: Vec<Q>,
    basis: QMat,
    basis_inv: QMat,
    /// All `n` roots: the `k` chosen embeddings first, then their conjugates.
    roots: Vec<Complex64>,
    /// `basis_values[i][j] = b_j(θ_i)` for every root.
    basis_values: Vec<Vec<Complex64>>,
    trace_gram: QMat,
    discriminant: i64,
}

impl NumberField {
    pub fn from_catalog(name: &str) -> Result<Self> {
        let spec = catalog()
            .into_iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownField(name.to_string()))?;
        Self::from_spec(spec)
    }

    pub fn from_spec(spec: FieldSpec) -> Result<Self> {
        let n = spec.degree;
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidField(format!(
                "degree {n} is not a positive even integer"
            )));
        }
        if spec.min_poly_coeffs.len() != n + 1 {
            return Err(Error::InvalidField(format!(
                "minimal polynomial has {} coefficients, expected {}",
                spec.min_poly_coeffs.len(),
                n + 1
            )));
        }
        if spec.min_poly_coeffs[n] != 1 {
            return Err(Error::InvalidField(
                "minimal polynomial is not monic".into(),
            ));
        }
        if spec.integral_basis.len() != n || spec.integral_basis.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidField(format!(
                "integral basis must be {n}x{n}"
            )));
        }
        let basis: QMat = spec
            .integral_basis
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| qmat::parse(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let basis_inv = qmat::inverse(&basis)
            .ok_or_else(|| Error::InvalidField("integral basis is singular".into()))?;
        let min_poly: Vec<Q> = spec.min_poly_coeffs.iter().map(|&c| qmat::int(c)).collect();

        let fcoeffs: Vec<f64> = spec.min_poly_coeffs.iter().map(|&c| c as f64).collect();
        let all_roots = roots::polynomial_roots(&fcoeffs);
        if all_roots.iter().any(|r| r.im.abs() < 1e-8) {
            return Err(Error::InvalidField(format!(
                "{} is not totally complex",
                spec.name
            )));
        }
        let mut chosen: Vec<Complex64> = all_roots.into_iter().filter(|r| r.im > 0.0).collect();
        if chosen.len() != n / 2 {
            return Err(Error::InvalidField(
                "roots do not split into conjugate pairs".into(),
            ));
        }
        chosen.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        let roots: Vec<Complex64> = chosen
            .iter()
            .copied()
            .chain(chosen.iter().map(|r| r.conj()))
            .collect();

        let basis_values = roots
            .iter()
            .map(|&r| {
                basis
                    .iter()
                    .map(|row| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        let mut pow = Complex64::new(1.0, 0.0);
                        for c in row {
                            acc += pow * qmat::to_f64(c);
                            pow *= r;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        let mut field = Self {
            spec,
            degree: n,
            min_poly,
            basis,
            basis_inv,
            roots,
            basis_values,
            trace_gram: Vec::new(),
            discriminant: 0,
        };

        let gram = field.compute_trace_gram();
        if !qmat::is_integral(&gram) {
            return Err(Error::InvalidField(
                "trace form is not integral: basis elements are not algebraic integers".into(),
            ));
        }
        let exact = qmat::det(&gram);
        if exact.is_zero() {
            return Err(Error::InvalidField("singular trace form".into()));
        }
        let exact = exact
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::InvalidField("discriminant overflows i64".into()))?;
        field.trace_gram = gram;
        let numeric = field.embedding_discriminant()?;
        if numeric != exact {
            return Err(Error::InvalidField(format!(
                "embedding discriminant {numeric} disagrees with trace-form discriminant {exact}"
            )));
        }
        if exact != field.spec.discriminant {
            return Err(Error::InvalidField(format!(
                "declared discriminant {} but the integral basis gives {exact}",
                field.spec.discriminant
            )));
        }
        field.discriminant = exact;
        Ok(field)
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Complex dimension `k = n/2`.
    pub fn k(&self) -> usize {
        self.degree / 2
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    /// `|d_F|^{1/n}`.
    pub fn root_discriminant(&self) -> f64 {
        (self.discriminant.unsigned_abs() as f64).powf(1.0 / self.degree as f64)
    }

    /// The chosen embeddings, one per conjugate pair.
    pub fn embeddings(&self) -> &[Complex64] {
        &self.roots[..self.k()]
    }

    pub fn trace_gram(&self) -> &QMat {
        &self.trace_gram
    }

    pub fn integral_basis(&self) -> &QMat {
        &self.basis
    }

    pub fn one(&self) -> FieldElement {
        self.from_power_coords(&self.power_unit(0))
    }

    /// The root `θ` of the minimal polynomial.
    pub fn generator(&self) -> FieldElement {
        self.from_power_coords(&self.power_unit(1))
    }

    pub fn integer(&self, v: i64) -> FieldElement {
        let one = self.one();
        FieldElement::new(one.coords.iter().map(|c| c * qmat::int(v)).collect())
    }

    fn power_unit(&self, i: usize) -> Vec<Q> {
        (0..self.degree)
            .map(|j| if j == i { Q::one() } else { Q::zero() })
            .collect()
    }

    pub fn from_power_coords(&self, pc: &[Q]) -> FieldElement {
        FieldElement::new(qmat::vec_mul(pc, &self.basis_inv))
    }

    pub fn to_power_coords(&self, x: &FieldElement) -> Vec<Q> {
        qmat::vec_mul(&x.coords, &self.basis)
    }

    fn check_len(&self, x: &FieldElement) -> Result<()> {
        if x.len() != self.degree {
            return Err(Error::DimensionMismatch {
                expected: self.degree,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Product of two power-basis polynomials reduced modulo the minimal polynomial.
    fn mul_power(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let n = self.degree;
        let mut prod = vec![Q::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for d in (n..prod.len()).rev() {
            let lead = std::mem::replace(&mut prod[d], Q::zero());
            if lead.is_zero() {
                continue;
            }
            for i in 0..n {
                let t = &lead * &self.min_poly[i];
                prod[d - n + i] -= t;
            }
        }
        prod.truncate(n);
        prod
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(FieldElement::new(
            x.coords.iter().zip(&y.coords).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        self.check_len(x)?;
        self.check_len(y)?;
        let p = self.mul_power(&self.to_power_coords(x), &self.to_power_coords(y));
        Ok(self.from_power_coords(&p))
    }

    /// Row `j` holds the coordinates of `x·b_j` over the integral basis.
    pub fn multiplication_matrix(&self, x: &FieldElement) -> Result<QMat> {
        self.check_len(x)?;
        let xp = self.to_power_coords(x);
        Ok(self
            .basis
            .iter()
            .map(|bj| self.from_power_coords(&self.mul_power(&xp, bj)).coords)
            .collect())
    }

    /// `ψ(x) = (σ_1(x), …, σ_k(x))`.
    pub fn embed(&self, x: &FieldElement) -> Result<Vec<Complex64>> {
        self.check_len(x)?;
        Ok(self.evaluate_at(x, self.k()))
    }

    /// All `n` embeddings, chosen ones first.
    pub fn embed_all(&self, x: &FieldElement) -> Result<Vec<Complex64>> {
        self.check_len(x)?;
        Ok(self.evaluate_at(x, self.degree))
    }

    fn evaluate_at(&self, x: &FieldElement, count: usize) -> Vec<Complex64> {
        let c: Vec<f64> = x.coords.iter().map(qmat::to_f64).collect();
        self.basis_values[..count]
            .iter()
            .map(|vals| vals.iter().zip(&c).map(|(v, ci)| v * ci).sum())
            .collect()
    }

    /// Exact `(N(x), Tr(x))` as determinant and trace of the multiplication matrix.
    pub fn norm_trace(&self, x: &FieldElement) -> Result<(Q, Q)> {
        let m = self.multiplication_matrix(x)?;
        let trace = (0..self.degree).fold(Q::zero(), |acc, i| acc + &m[i][i]);
        Ok((qmat::det(&m), trace))
    }

    /// The trace dual of the integral basis: a ℤ-basis of `O_F^∨`.
    pub fn codifferent(&self) -> Result<FractionalIdeal> {
        let inv = qmat::inverse(&self.trace_gram)
            .ok_or_else(|| Error::InvalidField("singular trace form".into()))?;
        FractionalIdeal::new(inv)
    }

    /// `det(T)²` with `T_{ij} = σ_i(b_j)` over all `n` embeddings, rounded to
    /// the nearest integer.
    pub fn embedding_discriminant(&self) -> Result<i64> {
        let n = self.degree;
        let t = DMatrix::from_fn(n, n, |i, j| self.basis_values[i][j]);
        let d = t.determinant();
        let d2 = d * d;
        let rounded = d2.re.round();
        let residual = (d2.re - rounded).abs() + d2.im.abs();
        if residual >= 0.5 {
            return Err(Error::InvalidField(format!(
                "embedding determinant squared {d2} is not close to an integer"
            )));
        }
        Ok(rounded as i64)
    }

    fn compute_trace_gram(&self) -> QMat {
        let p = self.power_sums(2 * self.degree - 1);
        let n = self.degree;
        let mut gram = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let prod = self.mul_power(&self.basis[i], &self.basis[j]);
                let tr = prod
                    .iter()
                    .zip(&p)
                    .fold(Q::zero(), |acc, (c, pm)| acc + c * pm);
                gram[i][j] = tr.clone();
                gram[j][i] = tr;
            }
        }
        gram
    }

    /// Newton's identities: `p_m = Σ θ_i^m` for `m < count`.
    fn power_sums(&self, count: usize) -> Vec<Q> {
        let n = self.degree;
        let a = &self.min_poly;
        let mut p: Vec<Q> = Vec::with_capacity(count);
        p.push(Q::from_integer(BigInt::from(n)));
        for m in 1..count {
            let mut s = Q::zero();
            for j in 1..=m.min(n) {
                if j < m {
                    s -= &a[n - j] * &p[m - j];
                } else {
                    s -= &a[n - m] * Q::from_integer(BigInt::from(m));
                }
            }
            p.push(s);
        }
        p
    }
}

pub(crate) fn q_det(m: &QMat) -> Q {
    qmat::det(m)
}

pub(crate) fn q_inverse(m: &QMat) -> Option<QMat> {
    qmat::inverse(m)
}
