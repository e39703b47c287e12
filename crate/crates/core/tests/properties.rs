use levymap::simulate::{sample_increment, Provenance, SampleBatch, SimConfig};
use levymap::verify::ecf;
use levymap::{exponent_of, i_transform, jbeta_transform, Family, LevyTriple};
use proptest::prelude::*;
use serde_json::Value;

fn batch(data: Vec<f64>) -> SampleBatch {
    SampleBatch::new(1, data, Provenance { config: SimConfig::default(), source: Value::Null }).unwrap()
}

fn fixture(kind: u8, a: f64) -> LevyTriple {
    match kind {
        0 => Family::gamma(a, 1.0 + a).triple(),
        1 => Family::compound_poisson(a, &[(1.5, 0.3), (-0.4, 0.7)]).triple(),
        _ => Family::stable(0.3 + a / 4.0, 1.0, Some(5.0)).triple(),
    }
    .unwrap()
}

fn close(a: num_complex::Complex64, b: num_complex::Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn ecf_is_bounded_and_hermitian(data in prop::collection::vec(-50.0f64..50.0, 1..40), y in -5.0f64..5.0) {
        let b = batch(data);
        let v = ecf(&b, &[vec![y], vec![-y]]).unwrap();
        prop_assert!(v[0].norm() <= 1.0 + 1e-12);
        prop_assert!((v[0] - v[1].conj()).norm() < 1e-12);
    }

    #[test]
    fn exponent_is_hermitian_with_nonpositive_real_part(kind in 0u8..3, a in 0.2f64..2.0, y in -8.0f64..8.0) {
        let phi = exponent_of(&fixture(kind, a)).unwrap();
        let (p, m) = (phi.eval(&[y]).unwrap(), phi.eval(&[-y]).unwrap());
        prop_assert!(p.re <= 1e-12);
        prop_assert!(close(p, m.conj(), 1e-9));
    }

    #[test]
    fn transforms_commute_with_convolution_powers(kind in 0u8..3, a in 0.2f64..2.0, c in 0.1f64..4.0, beta in 0.5f64..3.0, y in -4.0f64..4.0) {
        let nu = fixture(kind, a);
        let lhs = exponent_of(&jbeta_transform(&nu.conv_power(c).unwrap(), beta).unwrap()).unwrap().eval(&[y]).unwrap();
        let rhs = exponent_of(&jbeta_transform(&nu, beta).unwrap()).unwrap().eval(&[y]).unwrap() * c;
        prop_assert!(close(lhs, rhs, 1e-8));
        let lhs = exponent_of(&i_transform(&nu.conv_power(c).unwrap()).unwrap()).unwrap().eval(&[y]).unwrap();
        let rhs = exponent_of(&i_transform(&nu).unwrap()).unwrap().eval(&[y]).unwrap() * c;
        prop_assert!(close(lhs, rhs, 1e-8));
    }

    #[test]
    fn dilation_rescales_the_argument(kind in 0u8..3, a in 0.2f64..2.0, u in 0.2f64..5.0, y in -3.0f64..3.0) {
        let nu = fixture(kind, a);
        let lhs = exponent_of(&nu.dilate(u).unwrap()).unwrap().eval(&[y]).unwrap();
        let rhs = exponent_of(&nu).unwrap().eval(&[u * y]).unwrap();
        prop_assert!(close(lhs, rhs, 1e-8));
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(kind in 0u8..3, a in 0.2f64..2.0, seed in any::<u64>()) {
        let nu = fixture(kind, a);
        let cfg = SimConfig { seed, n_samples: 64, ..SimConfig::default() };
        let x = sample_increment(&nu, 0.5, &cfg, 64).unwrap();
        let y = sample_increment(&nu, 0.5, &cfg, 64).unwrap();
        prop_assert_eq!(x.data(), y.data());
    }
}
