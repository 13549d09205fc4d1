use proptest::prelude::*;
use tenrec_core::data::{read_tensor_from, write_tensor_to};
use tenrec_core::prox::Penalty;
use tenrec_core::tensor::{inner, DenseTensor};
use tenrec_core::{grad, grad_adjoint, gnhtt, identity_tensor, scalar_prox, tproduct, SeededRng, ShrinkStructure, Transform};

fn penalty() -> impl Strategy<Value = Penalty> {
    prop_oneof![
        Just(Penalty::L1),
        (1.01f64..8.0).prop_map(|gamma| Penalty::Firm { gamma }),
        (0.05f64..1.0).prop_map(|q| Penalty::Lq { q }),
        (0.05f64..1.0, 0.1f64..6.0).prop_map(|(q, cap)| Penalty::CappedLq { q, cap }),
        (1.01f64..8.0).prop_map(|gamma| Penalty::Mcp { gamma }),
        (2.01f64..8.0).prop_map(|a| Penalty::Scad { a }),
        (0.05f64..5.0).prop_map(|gamma| Penalty::Log { gamma }),
    ]
}

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 3..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prox_is_shrinking_odd_and_no_worse_than_endpoints(p in penalty(), mu in 0.01f64..5.0, v in -10.0f64..10.0) {
        let x = scalar_prox(&p, mu, v).unwrap();
        prop_assert!(x.abs() <= v.abs() + 1e-12);
        prop_assert!(x == 0.0 || x.signum() == v.signum());
        prop_assert!((scalar_prox(&p, mu, -v).unwrap() + x).abs() <= 1e-12);
        let f = p.objective(mu, x, v);
        prop_assert!(f <= p.objective(mu, 0.0, v) + 1e-12);
        prop_assert!(f <= p.objective(mu, v, v) + 1e-12);
    }

    #[test]
    fn prox_is_monotone(p in penalty(), mu in 0.01f64..5.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(scalar_prox(&p, mu, lo).unwrap() <= scalar_prox(&p, mu, hi).unwrap() + 1e-9);
    }

    #[test]
    fn gradient_adjoint_identity(d in dims(), seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let x = rng.normal_tensor(&d);
        let y = rng.normal_tensor(&d);
        for k in 0..d.len() {
            let lhs = inner(&grad(&x, k).unwrap(), &y).unwrap();
            let rhs = inner(&x, &grad_adjoint(&y, k).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn identity_is_neutral(d in dims(), seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let x = rng.normal_tensor(&d);
        let l = Transform::fft(&d[2..]).unwrap();
        let i = identity_tensor(d[1], &l).unwrap();
        let y = tproduct(&x, &i, &l).unwrap();
        prop_assert!(y.max_abs_diff(&x).unwrap() <= 1e-10);
    }

    #[test]
    fn group_shrinkage_never_grows(d in dims(), seed in any::<u64>(), lambda in 0.0f64..3.0, p in penalty()) {
        let mut rng = SeededRng::new(seed);
        let x = rng.normal_tensor(&d);
        for s in [ShrinkStructure::Entry, ShrinkStructure::Tube, ShrinkStructure::Slice] {
            let y = gnhtt(&x, &p, lambda, s).unwrap();
            prop_assert!(y.fro_norm() <= x.fro_norm() + 1e-12);
        }
    }

    #[test]
    fn gten_round_trip(d in prop::collection::vec(1usize..6, 1..5), seed in any::<u64>()) {
        let x = SeededRng::new(seed).normal_tensor(&d);
        let mut buf = Vec::new();
        write_tensor_to(&mut buf, &x).unwrap();
        let y: DenseTensor = read_tensor_from(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(y, x);
    }
}
