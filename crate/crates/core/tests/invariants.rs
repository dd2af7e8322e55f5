use proptest::prelude::*;

use powerseq::linalg::{frob, null_space, op_norm, range_basis, singular_values, CMat};
use powerseq::opcore::{DenseMatrix, OperatorDoc, OperatorExpr};
use powerseq::powerdyn::numerical_radius;
use powerseq::random::{gaussian, rng};
use powerseq::shiftlab::{shift_power_norm, BergerMoments, WeightRule};
use powerseq::Rat;

fn low_rank(seed: u64, n: usize, r: usize) -> CMat {
    let mut g = rng(seed);
    let a = gaussian(&mut g, n, r);
    let b = gaussian(&mut g, r, n);
    a * b
}

fn orthonormality_defect(q: &CMat) -> f64 {
    let k = q.ncols();
    op_norm(&(q.adjoint() * q - CMat::identity(k, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn singular_values_sorted_and_match_frobenius(seed in any::<u64>(), n in 1usize..9) {
        let m = gaussian(&mut rng(seed), n, n);
        let s = singular_values(&m);
        prop_assert_eq!(s.len(), n);
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let sq: f64 = s.iter().map(|x| x * x).sum();
        prop_assert!((sq.sqrt() - frob(&m)).abs() <= 1e-10 * frob(&m).max(1.0));
    }

    #[test]
    fn rank_nullity_with_orthonormal_bases(seed in any::<u64>(), n in 2usize..9, r in 0usize..9) {
        let r = r.min(n);
        let m = if r == 0 { CMat::zeros(n, n) } else { low_rank(seed, n, r) };
        let k = null_space(&m, 1e-10);
        let im = range_basis(&m, 1e-10);
        prop_assert_eq!(k.ncols(), n - r);
        prop_assert_eq!(im.ncols(), r);
        prop_assert!(orthonormality_defect(&k) <= 1e-10);
        prop_assert!(orthonormality_defect(&im) <= 1e-10);
        if k.ncols() > 0 {
            prop_assert!(op_norm(&(&m * &k)) <= 1e-8 * op_norm(&m).max(1.0));
        }
    }

    #[test]
    fn numerical_radius_between_half_norm_and_norm(seed in any::<u64>(), n in 1usize..7) {
        let m = gaussian(&mut rng(seed), n, n);
        let w = numerical_radius(&m, 360, 40).value;
        let norm = op_norm(&m);
        prop_assert!(w <= norm * (1.0 + 1e-9));
        prop_assert!(w >= norm / 2.0 * (1.0 - 1e-9));
    }

    #[test]
    fn finite_operator_json_round_trip(seed in any::<u64>(), n in 1usize..6) {
        let m = gaussian(&mut rng(seed), n, n);
        let doc: OperatorDoc<f64> = OperatorExpr::finite(DenseMatrix::from_cmat(&m).unwrap()).into();
        let json = serde_json::to_string(&doc).unwrap();
        let back: OperatorDoc<f64> = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, doc);
    }

    #[test]
    fn berger_power_norms_submultiplicative(c in 1i64..6, j in 1u64..40, k in 1u64..40) {
        let rule = WeightRule::berger(BergerMoments::two_point(Rat::integer(c))).unwrap();
        let log = |p: u64| shift_power_norm(&rule, p).unwrap().value.ln();
        prop_assert!(log(j + k) <= log(j) + log(k) + 1e-12);
        // weights increase to 2
        prop_assert!(log(j) <= j as f64 * std::f64::consts::LN_2 + 1e-12);
    }
}
