//! Real-valued property tests.
#![cfg(not(feature = "complex"))]

mod common;

use common::{conjugator, spd};
use conebary::{congruence, op_norm, Mat, SymMatrix};
use proptest::prelude::*;

proptest! {
    #[test]
    fn power_semigroup(m in (2usize..5).prop_flat_map(|n| spd(n, 1.5)), s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let lhs = m.powf(s).entries() * m.powf(t).entries();
        let err = (lhs - m.powf(s + t).entries()).norm();
        prop_assert!(err <= 1e-9 * m.norm(), "err {err:e}");
    }

    #[test]
    fn log_inverts_exp(v in prop::collection::vec(-10.0..10.0f64, 9)) {
        // Gershgorin keeps the spectrum inside [-30, 30]
        let m = Mat::from_vec(3, 3, v);
        let sym = SymMatrix::new((&m + m.transpose()) * 0.5).unwrap();
        let back = sym.exp().log();
        prop_assert!((back.entries() - sym.entries()).norm() <= 1e-9 * sym.norm().max(1.0));
    }

    #[test]
    fn congruence_stays_positive(m in spd(3, 2.0), a in conjugator(3, 0.9, 1e3)) {
        prop_assert!(congruence(&a, &m).unwrap().min_eigenvalue() > 0.0);
    }

    #[test]
    fn op_norm_submultiplicative(a in prop::collection::vec(-3.0..3.0f64, 16), b in prop::collection::vec(-3.0..3.0f64, 16)) {
        let (a, b) = (Mat::from_vec(4, 4, a), Mat::from_vec(4, 4, b));
        prop_assert!(op_norm(&(&a * &b)) <= op_norm(&a) * op_norm(&b) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn spectrum_reconstructs(m in (2usize..7).prop_flat_map(|n| spd(n, 1.5))) {
        let sp = m.spectrum();
        prop_assert!((sp.reconstruct() - m.entries()).norm() <= 1e-9 * m.norm());
        let ev = &sp.eigenvalues;
        prop_assert!(ev.iter().zip(ev.iter().skip(1)).all(|(a, b)| a <= b));
    }
}
