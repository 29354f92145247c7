mod common;

use commuprop::commutativity::{
    as_spatial_decomposition, check_functional_commutativity, check_with, martin_decompose, CheckOptions,
};
use commuprop::generator::{GeneratorSum, Term};
use commuprop::linalg::{commutator, ComplexMatrix, C64};
use commuprop::scalar::Interval;
use common::{c64, commuting_generator, matrix, scalar_fn};
use proptest::prelude::*;

fn rescaled(g: &GeneratorSum, c: C64) -> GeneratorSum {
    let terms = g.terms().iter().map(|t| Term::new(t.coeff.clone(), t.matrix.scale(c))).collect();
    GeneratorSum::new(g.dimension(), g.interval(), terms).unwrap()
}

/// `A + β(t)B` with `[A, B] ≠ 0` and a non-constant `β`.
fn non_commuting() -> impl Strategy<Value = GeneratorSum> {
    (matrix(2, 1.0), matrix(2, 1.0), scalar_fn(false))
        .prop_filter("needs [A, B] and β' away from zero", |(a, b, f)| {
            let (lo, hi) = (f.eval(0.0), f.eval(1.0));
            commutator(a, b).unwrap().frob_norm() > 0.1 && (hi - lo).norm() > 0.1
        })
        .prop_map(|(a, b, f)| {
            GeneratorSum::new(2, Interval::new(0.0, 1.0).unwrap(), vec![Term::new(1.0, a), Term::new(f, b)]).unwrap()
        })
}

fn scale() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(e, phase)| C64::from_polar(10f64.powf(e), phase))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commuting_generators_pass(g in commuting_generator(3, 3, 1.0)) {
        let report = check_functional_commutativity(&g, 17);
        prop_assert!(report.is_commutative, "{:?}", report.max_pairwise_ratio);
        prop_assert!(report.derivative_commutative);
        prop_assert!(report.warning.is_none());
    }

    #[test]
    fn verdict_survives_rescaling(g in commuting_generator(2, 3, 1.0), h in non_commuting(), c in scale()) {
        let opts = CheckOptions::with_grid(9);
        prop_assert_eq!(check_with(&g, &opts).is_commutative, check_with(&rescaled(&g, c), &opts).is_commutative);
        prop_assert!(!check_with(&h, &opts).is_commutative);
        prop_assert!(!check_with(&rescaled(&h, c), &opts).is_commutative);
    }

    #[test]
    fn martin_bounds(g in commuting_generator(3, 4, 1.0)) {
        let d = martin_decompose(&g, 33).unwrap();
        prop_assert!(!d.basis.is_empty() && d.basis.len() <= 9);
        prop_assert!(d.basis.len() <= g.terms().len());
        for (i, &t) in d.times.iter().enumerate() {
            let l = g.eval(t).unwrap();
            let mut recon = ComplexMatrix::zeros(3, 3);
            for (c, m) in d.coefficients[i].iter().zip(&d.basis) {
                recon = recon.add_scaled(m, *c);
            }
            prop_assert!(recon.distance(&l) <= 1e-9 * (1.0 + l.frob_norm()));
        }
    }

    #[test]
    fn spatial_parts_commute_and_reconstruct(g in commuting_generator(3, 4, 1.0), t in 0.0f64..1.0) {
        let d = as_spatial_decomposition(&g).unwrap();
        for (i, p) in d.parts().iter().enumerate() {
            for q in &d.parts()[i + 1..] {
                let norm = commutator(&p.matrix, &q.matrix).unwrap().frob_norm();
                prop_assert!(norm <= 1e-10 * (1.0 + p.matrix.frob_norm() * q.matrix.frob_norm()));
            }
        }
        let l = g.eval(t).unwrap();
        prop_assert!(d.eval(t).distance(&l) <= 1e-9 * (1.0 + l.frob_norm()));
    }

    #[test]
    fn sum_with_non_commuting_constant_is_rejected(g in commuting_generator(2, 2, 1.0), x in matrix(2, 1.0), k in c64(1.0)) {
        // A constant matrix that fails to commute with some term spoils
        // spatial decomposition, but never the scalar identity.
        let extra = GeneratorSum::constant(x.clone(), g.interval()).unwrap();
        let joined = g.concat(&extra).unwrap();
        let breaks = g.terms().iter().any(|t| {
            let n = commutator(&t.matrix, &x).unwrap().frob_norm();
            n > 1e-6 * (1.0 + t.matrix.frob_norm() * x.frob_norm())
        });
        if breaks {
            prop_assert!(as_spatial_decomposition(&joined).is_err());
        }
        let id = GeneratorSum::constant(ComplexMatrix::identity(2).scale(k), g.interval()).unwrap();
        prop_assert!(as_spatial_decomposition(&g.concat(&id).unwrap()).is_ok());
    }
}
