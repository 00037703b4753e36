use dirac_core::io::{parse_complex, complex_to_json, parse_signal, write_signal};
use dirac_core::signals::{sample_noise, standard_normal};
use dirac_core::{
    attenuation, decompose, ngf_generate, Basis, LaplacianPart, NgfParams, NoiseModel, Operator, Order,
    SimplicialComplex, Spinor,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn ngf() -> impl Strategy<Value = SimplicialComplex> {
    (3usize..40, -1i32..=1, prop_oneof![Just(0.0), 0.0..3.0f64], any::<u64>())
        .prop_map(|(n, s, beta, seed)| ngf_generate(&NgfParams::new(n, s, beta, seed)).unwrap())
}

fn random_spinor(op: &Operator, seed: u64) -> Spinor {
    Spinor::from_vector(op.layout(), standard_normal(seed, 0, op.dim())).unwrap()
}

fn chirality_matrix(op: &Operator, order: Order) -> DMatrix<f64> {
    let n = op.dim();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = Spinor::zeros(op.layout());
        e.as_vector_mut()[i] = 1.0;
        g.set_column(i, op.chirality(order, &e).unwrap().as_vector());
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boundary_of_boundary_vanishes(k in ngf()) {
        let b1 = k.boundary_matrix(1).unwrap();
        let b2 = k.boundary_matrix(2).unwrap();
        prop_assert!(b1.product(&b2).unwrap().is_empty());
    }

    #[test]
    fn euler_characteristic_matches_betti(k in ngf()) {
        let [b0, b1, b2] = k.betti_numbers();
        prop_assert_eq!(b0 as i64 - b1 as i64 + b2 as i64, k.euler_characteristic());
        prop_assert_eq!(b0, 1);
        prop_assert_eq!(k.betti_numbers(), k.betti_numbers_exact());
    }

    #[test]
    fn ngf_counts(n in 3usize..80, seed in any::<u64>()) {
        let k = ngf_generate(&NgfParams::new(n, -1, 0.0, seed)).unwrap();
        prop_assert_eq!(k.links().len(), 2 * n - 3);
        prop_assert_eq!(k.triangles().len(), n - 2);
    }

    #[test]
    fn dirac_squares_to_super_laplacian(k in ngf()) {
        let op = Operator::new(&k);
        let d = op.full();
        let diff = &d * &d - op.super_laplacian();
        prop_assert!(diff.amax() <= 1e-10);
        for n in 0..3 {
            let full = op.hodge_laplacian(n, LaplacianPart::Full).unwrap();
            let parts = op.hodge_laplacian(n, LaplacianPart::Up).unwrap()
                + op.hodge_laplacian(n, LaplacianPart::Down).unwrap();
            prop_assert_eq!(full, parts);
        }
    }

    #[test]
    fn chirality_anticommutes(k in ngf()) {
        let op = Operator::new(&k);
        for order in Order::BOTH {
            let d = op.part(order);
            let g = chirality_matrix(&op, order);
            prop_assert!((&d * &g + &g * &d).amax() <= 1e-12);
        }
    }

    #[test]
    fn decomposition_is_orthogonal_and_complete(k in ngf(), seed in any::<u64>()) {
        let op = Operator::new(&k);
        let b1 = Basis::new(&op, Order::One).unwrap();
        let b2 = Basis::new(&op, Order::Two).unwrap();
        let s = random_spinor(&op, seed);
        let parts = decompose(&s, &b1, &b2).unwrap();
        let tol = 1e-9 * s.norm();
        prop_assert!(parts.first.dot(&parts.second).abs() <= tol);
        prop_assert!(parts.first.dot(&parts.harmonic).abs() <= tol);
        prop_assert!(parts.second.dot(&parts.harmonic).abs() <= tol);
        prop_assert!(op.apply(&parts.harmonic).unwrap().norm() <= tol);
        let sum = &(&parts.first + &parts.second) + &parts.harmonic;
        prop_assert!((sum.as_vector() - s.as_vector()).amax() <= tol);
        let [x, y, z] = k.betti_numbers();
        prop_assert_eq!(op.dim() - b1.nonharmonic_dim() - b2.nonharmonic_dim(), x + y + z);
    }

    #[test]
    fn eigenpairs_and_chiral_partners(k in ngf()) {
        let op = Operator::new(&k);
        for order in Order::BOTH {
            let b = Basis::new(&op, order).unwrap();
            for i in 0..b.nonharmonic_dim() {
                let v = b.eigenvector(i);
                let l = b.eigenvalue(i);
                let dv = op.apply_part(order, &v).unwrap();
                prop_assert!((dv.as_vector() - v.as_vector() * l).amax() <= 1e-9);
                let j = b.chiral_partner(i);
                prop_assert!((b.eigenvalue(j) + l).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn noise_lies_in_the_image(k in ngf(), seed in any::<u64>(), alpha in 0.0..2.0f64) {
        let op = Operator::new(&k);
        let b = Basis::new(&op, Order::One).unwrap();
        let eps = sample_noise(&NoiseModel { alpha1: alpha, alpha2: alpha, seed }, &b, 3).unwrap();
        let back = b.project(&eps).unwrap();
        prop_assert!((back.as_vector() - eps.as_vector()).amax() <= 1e-10);
    }

    #[test]
    fn attenuation_is_a_contraction(l in -5.0..5.0f64, tau in 0.0..50.0f64, m in -5.0..5.0f64) {
        let a = attenuation(l, tau, m);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert_eq!(attenuation(m, tau, m), 1.0);
    }

    #[test]
    fn files_round_trip(k in ngf(), seed in any::<u64>()) {
        let (back, _) = parse_complex(&complex_to_json(&k, serde_json::Value::Null)).unwrap();
        prop_assert_eq!(&back, &k);
        let op = Operator::new(&k);
        let s = random_spinor(&op, seed);
        let mut buf = Vec::new();
        write_signal(&mut buf, &s, &[]).unwrap();
        let read: Spinor = parse_signal(buf.as_slice(), k.layout()).unwrap();
        prop_assert_eq!(read, s);
    }
}
