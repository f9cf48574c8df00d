//! Nested ideal-lattice wiretap codes: design and coset encoding.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    flatness_factor, CovarianceSpec, DiscreteGaussianSpec, KleinSampler, SamplerGate,
};
use crate::lattice::{ComplexLattice, CosetSystem, Interval};
use crate::numberfield::{FieldElement, NumberField};

/// Largest coordinate tried by the automatic nesting search.
const AUTO_RANGE: i64 = 3;
/// Relative index mismatch accepted by the design.
const INDEX_TOLERANCE: f64 = 0.25;

/// How `Λ_e ⊂ Λ_b` is realized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NestingSpec {
    /// `Λ_e = c·Λ_b`.
    Scalar { c: i64 },
    /// `Λ_e = ψ(a)⊙Λ_b` for `a ∈ O_F` given in integral-basis coordinates.
    Element { coords: Vec<i64> },
    /// Smallest element (coordinates up to 3 in absolute value) whose index is
    /// closest to `e^{kR}`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Message(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    /// `x ∈ Λ_e + λ_m`.
    pub point: Vec<Complex64>,
    /// Coordinates of `x` over the fine generators.
    pub fine_coords: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub field_name: String,
    pub k: usize,
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "R_prime")]
    pub r_prime: f64,
    pub nesting_spec: NestingSpec,
    pub alpha_b: f64,
    pub alpha_e: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct WiretapCode {
    field_name: String,
    k: usize,
    copies: usize,
    base: ComplexLattice,
    cosets: CosetSystem,
    nesting: NestingSpec,
    alpha_b: f64,
    alpha_e: f64,
    power: f64,
    rate: f64,
    rate_target: f64,
    r_prime: f64,
    g_eff: f64,
    flatness_e: Option<Interval>,
    sampler: KleinSampler,
}

/// `ln(eG/2)`, the lower limit on `R′`.
pub fn r_prime_threshold(g_eff: f64) -> f64 {
    (std::f64::consts::E * g_eff / 2.0).ln()
}

/// `α_e² = 2πeP/(G e^{R′})`.
pub fn alpha_e_squared(power: f64, g_eff: f64, r_prime: f64) -> f64 {
    2.0 * std::f64::consts::PI * std::f64::consts::E * power / (g_eff * r_prime.exp())
}

/// `C_b − C_e − ln(2G²/π)`; negative values mean an empty region.
pub fn secrecy_rate_region(c_b: f64, c_e: f64, g_eff: f64) -> f64 {
    c_b - c_e - (2.0 * g_eff * g_eff / std::f64::consts::PI).ln()
}

/// `ψ(O_F)^m`: the ring lattice repeated over `m` consecutive blocks.
pub fn base_lattice(field: &NumberField, copies: usize) -> Result<ComplexLattice> {
    let ring = ComplexLattice::from_ring(field, 1.0)?;
    if copies == 1 {
        return Ok(ring);
    }
    let kf = field.k();
    let k = kf * copies;
    let zero = Complex64::new(0.0, 0.0);
    let gens: Vec<Vec<Complex64>> = (0..copies)
        .flat_map(|b| {
            ring.complex_generators().into_iter().map(move |g| {
                let mut v = vec![zero; k];
                v[b * kf..(b + 1) * kf].copy_from_slice(&g);
                v
            })
        })
        .collect();
    ComplexLattice::from_complex_generators(k, &gens)
}

fn element_norm(field: &NumberField, a: &FieldElement) -> Result<u64> {
    let (n, _) = field.norm_trace(a)?;
    n.abs()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidNesting("element norm does not fit in 64 bits".into()))
}

fn approx_norm(field: &NumberField, coords: &[i64]) -> Result<f64> {
    Ok(field
        .embed(&FieldElement::from_ints(coords))?
        .iter()
        .map(|z| z.norm_sqr())
        .product::<f64>())
}

/// Element coordinates whose index `|N(a)|^m` is closest to `target` in log scale.
fn auto_element(field: &NumberField, copies: usize, target: f64) -> Result<Vec<i64>> {
    let n = field.degree();
    let range = if n >= 8 { 2 } else { AUTO_RANGE };
    let width = (2 * range + 1) as usize;
    let total = width.pow(n as u32);
    let mut best: Option<(f64, i64, Vec<i64>)> = None;
    for idx in 0..total {
        let mut t = idx;
        let coords: Vec<i64> = (0..n)
            .map(|_| {
                let v = (t % width) as i64 - range;
                t /= width;
                v
            })
            .collect();
        if coords.iter().all(|&v| v == 0) {
            continue;
        }
        let norm = approx_norm(field, &coords)?.round();
        if norm < 1.0 {
            continue;
        }
        let index = norm.powi(copies as i32);
        let miss = (index.ln() - target.ln()).abs();
        let size = coords.iter().map(|v| v.abs()).max().unwrap_or(0);
        let better = match &best {
            None => true,
            Some((bm, bs, bc)) => {
                miss < bm - 1e-12 || ((miss - bm).abs() <= 1e-12 && (size, &coords) < (*bs, bc))
            }
        };
        if better {
            best = Some((miss, size, coords));
        }
    }
    Ok(best.expect("nonzero elements exist").2)
}

/// Designs a nested pair over `ψ(O_F)^{k/k_F}` with `α_e` from [`alpha_e_squared`] and
/// `α_b = α_e / index^{1/2k}`.
pub fn design_code(
    field: &NumberField,
    k: usize,
    power: f64,
    rate_target: f64,
    r_prime: f64,
    nesting: &NestingSpec,
) -> Result<WiretapCode> {
    let kf = field.k();
    if k == 0 || k % kf != 0 {
        return Err(Error::DesignRefused(format!(
            "k = {k} is not a multiple of the field's complex dimension {kf}"
        )));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::DesignRefused(format!(
            "power must be positive, got {power}"
        )));
    }
    if !(rate_target >= 0.0 && rate_target.is_finite()) {
        return Err(Error::DesignRefused(format!(
            "target rate must be nonnegative, got {rate_target}"
        )));
    }
    let g_eff = field.root_discriminant();
    let threshold = r_prime_threshold(g_eff);
    if !(r_prime > threshold) {
        return Err(Error::DesignRefused(format!(
            "R′ = {r_prime:.4} violates R′ > ln(eG/2) = {threshold:.4} (G_eff = {g_eff:.4})"
        )));
    }
    let copies = k / kf;
    let target_index = (k as f64 * rate_target).exp();
    let resolved = match nesting {
        NestingSpec::Auto => NestingSpec::Element {
            coords: auto_element(field, copies, target_index)?,
        },
        other => other.clone(),
    };
    let index = match &resolved {
        NestingSpec::Scalar { c } => {
            if *c == 0 {
                return Err(Error::InvalidNesting(
                    "scalar nesting factor must be nonzero".into(),
                ));
            }
            (c.unsigned_abs() as f64).powi(2 * k as i32)
        }
        NestingSpec::Element { coords } => {
            let a = FieldElement::from_ints(coords);
            if coords.len() != field.degree() {
                return Err(Error::DimensionMismatch {
                    expected: field.degree(),
                    got: coords.len(),
                });
            }
            if a.is_zero() {
                return Err(Error::InvalidNesting("zero element".into()));
            }
            (element_norm(field, &a)? as f64).powi(copies as i32)
        }
        NestingSpec::Auto => unreachable!(),
    };
    if (index / target_index - 1.0).abs() > INDEX_TOLERANCE {
        return Err(Error::DesignRefused(format!(
            "no realizable index within 25% of e^{{kR}} = {target_index:.3}: nearest index {index} gives R = {:.4}",
            index.ln() / k as f64
        )));
    }

    let alpha_e = alpha_e_squared(power, g_eff, r_prime).sqrt();
    let alpha_b = alpha_e / index.powf(1.0 / (2 * k) as f64);
    let base = base_lattice(field, copies)?;
    let fine = base.scaled(alpha_b)?;
    let cosets = match &resolved {
        NestingSpec::Scalar { c } => CosetSystem::from_scalar(&fine, *c)?,
        NestingSpec::Element { coords } => {
            let a = FieldElement::from_ints(coords);
            if copies == 1 {
                CosetSystem::from_element(&fine, field, &a)?
            } else {
                let h: Vec<Complex64> = field.embed(&a)?.repeat(copies);
                CosetSystem::from_sublattice(&fine, &fine.apply_diagonal(&h)?)?
            }
        }
        NestingSpec::Auto => unreachable!(),
    };
    WiretapCode::assemble(
        field.name().to_string(),
        k,
        copies,
        base,
        cosets,
        resolved,
        alpha_b,
        power,
        rate_target,
        r_prime,
        g_eff,
    )
}

impl WiretapCode {
    /// A code over an explicit nested pair with the given power and `R′`;
    /// `α_b` is 1 and `α_e` the volume-equivalent scaling.
    pub fn from_cosets(cosets: CosetSystem, power: f64, r_prime: f64, g_eff: f64) -> Result<Self> {
        let k = cosets.fine().k();
        let base = cosets.fine().clone();
        let rate = (cosets.index() as f64).ln() / k as f64;
        Self::assemble(
            "custom".into(),
            k,
            1,
            base,
            cosets,
            NestingSpec::Auto,
            1.0,
            power,
            rate,
            r_prime,
            g_eff,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        field_name: String,
        k: usize,
        copies: usize,
        base: ComplexLattice,
        cosets: CosetSystem,
        nesting: NestingSpec,
        alpha_b: f64,
        power: f64,
        rate_target: f64,
        r_prime: f64,
        g_eff: f64,
    ) -> Result<Self> {
        let index = cosets.index() as f64;
        let rate = index.ln() / k as f64;
        let alpha_e = alpha_b * index.powf(1.0 / (2 * k) as f64);
        let sigma = CovarianceSpec::Scalar(power.sqrt());
        let flatness_e = flatness_factor(cosets.coarse(), &sigma).ok();
        let spec = DiscreteGaussianSpec::centered(cosets.coarse().clone(), power.sqrt())?;
        let sampler = KleinSampler::new_unchecked(&spec)?;
        Ok(Self {
            field_name,
            k,
            copies,
            base,
            cosets,
            nesting,
            alpha_b,
            alpha_e,
            power,
            rate,
            rate_target,
            r_prime,
            g_eff,
            flatness_e,
            sampler,
        })
    }

    pub fn field_name(&self) -> &str {
        &self.field_name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of field blocks `k / k_F`.
    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Unscaled `ψ(O_F)^m`.
    pub fn base_lattice(&self) -> &ComplexLattice {
        &self.base
    }

    pub fn cosets(&self) -> &CosetSystem {
        &self.cosets
    }

    pub fn fine(&self) -> &ComplexLattice {
        self.cosets.fine()
    }

    pub fn coarse(&self) -> &ComplexLattice {
        self.cosets.coarse()
    }

    pub fn nesting(&self) -> &NestingSpec {
        &self.nesting
    }

    pub fn alpha_b(&self) -> f64 {
        self.alpha_b
    }

    pub fn alpha_e(&self) -> f64 {
        self.alpha_e
    }

    /// `α_e` recomputed from [`alpha_e_squared`].
    pub fn alpha_e_formula(&self) -> f64 {
        alpha_e_squared(self.power, self.g_eff, self.r_prime).sqrt()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn index(&self) -> u64 {
        self.cosets.index()
    }

    /// Realized `R = ln(index)/k`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn rate_target(&self) -> f64 {
        self.rate_target
    }

    pub fn r_prime(&self) -> f64 {
        self.r_prime
    }

    /// `R_b = R + R′`.
    pub fn rate_b(&self) -> f64 {
        self.rate + self.r_prime
    }

    pub fn g_eff(&self) -> f64 {
        self.g_eff
    }

    /// `ε_{Λ_e}(√P)`, when the theta sum is certifiable.
    pub fn flatness_e(&self) -> Option<Interval> {
        self.flatness_e
    }

    /// Whether `ε_{Λ_e}(√P) ≤ 2^{-2k}`.
    pub fn power_flatness_ok(&self) -> Option<bool> {
        self.flatness_e
            .map(|e| e.hi <= 2f64.powi(-2 * self.k as i32))
    }

    /// `R′ ≥ C_e + 1 + ln G`.
    pub fn meets_secrecy_rate(&self, c_e: f64) -> bool {
        self.r_prime >= c_e + 1.0 + self.g_eff.ln()
    }

    pub fn sampler_gate(&self) -> SamplerGate {
        self.sampler.gate()
    }

    pub fn check_message(&self, m: Message) -> Result<()> {
        if m.0 >= self.index() {
            return Err(Error::Precondition(format!(
                "message {} out of range 0..{}",
                m.0,
                self.index()
            )));
        }
        Ok(())
    }

    /// `λ_m`.
    pub fn leader(&self, m: Message) -> Result<Vec<Complex64>> {
        self.check_message(m)?;
        Ok(self.cosets.leader_point(m.0))
    }

    /// Draws `x ~ D_{Λ_e+λ_m,√P}`; refuses when the sampler gate fails.
    pub fn encode<R: Rng + ?Sized>(&self, m: Message, rng: &mut R) -> Result<Codeword> {
        let gate = self.sampler.gate();
        if !gate.passes() {
            return Err(Error::SamplerRefused(format!(
                "√P = {:.4} is below the sampler validity threshold {:.4} for Λ_e",
                self.power.sqrt(),
                gate.min_sigma
            )));
        }
        self.encode_unchecked(m, rng)
    }

    pub fn encode_unchecked<R: Rng + ?Sized>(&self, m: Message, rng: &mut R) -> Result<Codeword> {
        let shift = self.leader(m)?;
        let s = self.sampler.sample_shifted(&shift, rng);
        let change = self.cosets.change_of_basis();
        let leader = &self.cosets.leaders()[m.0 as usize];
        let n = leader.len();
        let fine_coords = (0..n)
            .map(|j| leader[j] + (0..n).map(|i| s.coords[i] * change[i][j]).sum::<i64>())
            .collect();
        Ok(Codeword {
            point: s.point,
            fine_coords,
        })
    }

    pub fn descriptor(&self, seed: u64) -> CodeDescriptor {
        CodeDescriptor {
            field_name: self.field_name.clone(),
            k: self.k,
            power: self.power,
            rate: self.rate,
            r_prime: self.r_prime,
            nesting_spec: self.nesting.clone(),
            alpha_b: self.alpha_b,
            alpha_e: self.alpha_e,
            seed,
        }
    }

    /// Rebuilds a designed code and checks the stored scalings.
    pub fn from_descriptor(d: &CodeDescriptor) -> Result<Self> {
        let field = NumberField::from_catalog(&d.field_name)?;
        let code = design_code(&field, d.k, d.power, d.rate, d.r_prime, &d.nesting_spec)?;
        if (code.alpha_b / d.alpha_b - 1.0).abs() > 1e-9
            || (code.alpha_e / d.alpha_e - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(
                "descriptor scalings do not match the redesigned code".into(),
            ));
        }
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(name: &str) -> NumberField {
        NumberField::from_catalog(name).unwrap()
    }

    #[test]
    fn alpha_e_example() {
        let code = design_code(
            &field("Q(i)"),
            1,
            10.0,
            4f64.ln(),
            2.0,
            &NestingSpec::Scalar { c: 2 },
        )
        .unwrap();
        let a2 = 2.0 * std::f64::consts::PI * std::f64::consts::E * 10.0
            / (2.0 * std::f64::consts::E.powi(2));
        assert!((code.alpha_e().powi(2) - a2).abs() < 1e-9);
        assert!((a2 - 11.56).abs() < 0.01);
        assert!((code.alpha_e() / code.alpha_e_formula() - 1.0).abs() < 0.05);
        assert_eq!(code.index(), 4);
        assert!((code.rate() - 4f64.ln()).abs() < 1e-12);
        assert!((code.rate_b() - code.rate() - code.r_prime()).abs() == 0.0);
        assert!((code.alpha_b() - code.alpha_e() / 2.0).abs() < 1e-12);
        let vol_ratio = code.coarse().volume() / code.fine().volume();
        assert!((vol_ratio - 4.0).abs() < 1e-9);
        assert_eq!(code.power_flatness_ok(), Some(true));
    }

    #[test]
    fn r_prime_gate() {
        let g = 2.0;
        let r = r_prime_threshold(g) - 0.01;
        let err = design_code(
            &field("Q(i)"),
            1,
            10.0,
            4f64.ln(),
            r,
            &NestingSpec::Scalar { c: 2 },
        )
        .unwrap_err();
        assert!(err.to_string().contains("R′ > ln(eG/2)"), "{err}");
    }

    #[test]
    fn index_tolerance() {
        let err = design_code(
            &field("Q(i)"),
            1,
            10.0,
            2.0,
            2.0,
            &NestingSpec::Scalar { c: 2 },
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::DesignRefused(ref s) if s.contains("R = 1.3863")),
            "{err}"
        );
    }

    #[test]
    fn auto_nesting_hits_target() {
        let code =
            design_code(&field("Q(i)"), 1, 10.0, 5f64.ln(), 2.0, &NestingSpec::Auto).unwrap();
        assert_eq!(code.index(), 5);
        assert!(matches!(code.nesting(), NestingSpec::Element { .. }));
        let code = design_code(
            &field("Q(zeta5)"),
            2,
            10.0,
            11f64.ln() / 2.0,
            3.0,
            &NestingSpec::Auto,
        )
        .unwrap();
        assert_eq!(code.index(), 11);
        let two_blocks = design_code(
            &field("Q(zeta3)"),
            2,
            10.0,
            3f64.ln(),
            2.0,
            &NestingSpec::Element { coords: vec![2, 1] },
        )
        .unwrap();
        assert_eq!(two_blocks.index(), 9);
        assert_eq!(two_blocks.copies(), 2);
    }

    #[test]
    fn rate_region() {
        assert!(
            (secrecy_rate_region(5.0, 1.0, 2.0) - (4.0 - (8.0 / std::f64::consts::PI).ln())).abs()
                < 1e-12
        );
        assert!((secrecy_rate_region(5.0, 1.0, 2.0) - 3.0651).abs() < 5e-4);
        assert!(secrecy_rate_region(5.0, 1.0, 92.368) < 0.0);
        assert!(secrecy_rate_region(1.0, 1.0, 2.0) < 0.0);
    }

    #[test]
    fn encoding_lands_in_coset() {
        let fine = ComplexLattice::from_real_generators(1, DMatrix::identity(2, 2)).unwrap();
        let cosets = CosetSystem::from_scalar(&fine, 2).unwrap();
        let code = WiretapCode::from_cosets(cosets, 9.0, 2.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let target = code.cosets().message_of(&code.cosets().leaders()[1]);
        for _ in 0..1000 {
            let x = code.encode(Message(1), &mut rng).unwrap();
            assert_eq!(code.cosets().message_of(&x.fine_coords), target);
            let p = code.fine().point(&x.fine_coords);
            assert!((p[0] - x.point[0]).norm() < 1e-9);
            assert!(code.cosets().in_coarse(
                &x.fine_coords
                    .iter()
                    .zip(&code.cosets().leaders()[1])
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            ));
        }
        assert!(code.encode(Message(4), &mut rng).is_err());
    }

    #[test]
    fn zero_width_encoding_is_coset_center() {
        let fine = ComplexLattice::from_real_generators(1, DMatrix::identity(2, 2)).unwrap();
        let code =
            WiretapCode::from_cosets(CosetSystem::from_scalar(&fine, 2).unwrap(), 1e-8, 2.0, 2.0)
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(code.encode(Message(0), &mut rng).is_err());
        let x = code.encode_unchecked(Message(0), &mut rng).unwrap();
        assert!(x.point[0].norm() < 1e-12);
    }

    #[test]
    fn average_power() {
        let code = design_code(
            &field("Q(zeta8)"),
            2,
            10.0,
            4f64.ln() / 2.0,
            3.0,
            &NestingSpec::Auto,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut s = 0.0;
        for t in 0..n {
            let m = Message(t as u64 % code.index());
            s += code
                .encode(m, &mut rng)
                .unwrap()
                .point
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                / 2.0;
        }
        let mean = s / n as f64;
        assert!((mean / 10.0 - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn descriptor_roundtrip() {
        let code = design_code(
            &field("Q(zeta3)"),
            1,
            5.0,
            3f64.ln(),
            2.0,
            &NestingSpec::Auto,
        )
        .unwrap();
        let d = code.descriptor(42);
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"R_prime\"") && json.contains("\"kind\":\"element\""));
        let back: CodeDescriptor = serde_json::from_str(&json).unwrap();
        let again = WiretapCode::from_descriptor(&back).unwrap();
        assert_eq!(again.index(), code.index());
    }
}
