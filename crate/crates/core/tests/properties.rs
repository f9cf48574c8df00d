use lattice_wiretap::lattice::{ComplexLattice, CosetSystem};
use lattice_wiretap::numberfield::{catalog_names, FieldElement, NumberField};
use lattice_wiretap::seeds::split_seed;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn fields() -> Vec<NumberField> {
    catalog_names()
        .iter()
        .map(|n| NumberField::from_catalog(n).unwrap())
        .collect()
}

fn element(f: &NumberField, raw: &[i64]) -> FieldElement {
    FieldElement::from_ints(&raw[..f.degree()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_multiplicative(a in prop::collection::vec(-6i64..=6, 8), b in prop::collection::vec(-6i64..=6, 8), which in 0usize..7) {
        let f = &fields()[which];
        let (x, y) = (element(f, &a), element(f, &b));
        let (nx, _) = f.norm_trace(&x).unwrap();
        let (ny, _) = f.norm_trace(&y).unwrap();
        let (nxy, _) = f.norm_trace(&f.mul(&x, &y).unwrap()).unwrap();
        prop_assert_eq!(nxy, nx * ny);
    }

    #[test]
    fn norm_and_trace_match_embeddings(a in prop::collection::vec(-6i64..=6, 8), which in 0usize..7) {
        let f = &fields()[which];
        let x = element(f, &a);
        let (n, t) = f.norm_trace(&x).unwrap();
        prop_assert!(n.is_integer() && t.is_integer());
        let e = f.embed(&x).unwrap();
        let prod: f64 = e.iter().map(|z| z.norm_sqr()).product();
        let tr: f64 = e.iter().map(|z| 2.0 * z.re).sum();
        let (n, t) = (n.to_f64().unwrap(), t.to_f64().unwrap());
        prop_assert!((prod - n.abs()).abs() <= 1e-9 * (1.0 + n.abs()), "{} vs {}", prod, n);
        prop_assert!((tr - t).abs() <= 1e-9 * (1.0 + t.abs()), "{} vs {}", tr, t);
    }

    #[test]
    fn coset_labels_are_a_homomorphism(x in prop::collection::vec(-20i64..=20, 2), y in prop::collection::vec(-20i64..=20, 2), c in 2i64..5) {
        let fine = ComplexLattice::from_real_generators(1, nalgebra::DMatrix::identity(2, 2)).unwrap();
        let sys = CosetSystem::from_scalar(&fine, c).unwrap();
        let sum: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let shifted: Vec<i64> = x.iter().map(|a| a + c).collect();
        prop_assert_eq!(sys.message_of(&shifted), sys.message_of(&x));
        let lx = sys.reduce(&x);
        let ly = sys.reduce(&y);
        let ls: Vec<i64> = lx.iter().zip(&ly).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sys.message_of(&ls), sys.message_of(&sum));
        prop_assert!(sys.message_of(&x) < sys.index());
    }

    #[test]
    fn closest_vector_beats_neighbours(t in prop::collection::vec(-5.0f64..5.0, 4)) {
        let f = NumberField::from_catalog("Q(zeta8)").unwrap();
        let lat = ComplexLattice::from_ring(&f, 1.0).unwrap();
        let target = lattice_wiretap::lattice::to_complex(&t);
        let cp = lat.closest_vector(&target).unwrap();
        let dist = |coords: &[i64]| {
            lat.real_point(coords).iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        };
        let best = dist(&cp.coords);
        for i in 0..4 {
            for s in [-1, 1] {
                let mut n = cp.coords.clone();
                n[i] += s;
                prop_assert!(dist(&n) >= best - 1e-9);
            }
        }
    }

    #[test]
    fn seed_streams_are_distinct(seed in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        prop_assume!(a != b);
        prop_assert_ne!(split_seed(seed, a), split_seed(seed, b));
        prop_assert_eq!(split_seed(seed, a), split_seed(seed, a));
    }
}
