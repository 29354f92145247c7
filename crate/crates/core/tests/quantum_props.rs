mod common;

use commuprop::commutativity::CheckOptions;
use commuprop::generator::GeneratorSum;
use commuprop::linalg::{commutator, matrix_exp, unvec, vec, ComplexMatrix, C64};
use commuprop::quantum::{
    bilinear_term, conjugation_channel, dissipator, evolve_state, example1, example2_from_parts, example2_with_hbar,
    hamiltonian_part, DensityMatrix, PhysicalityPolicy, PhysicalityTol, QuantumProblem,
};
use commuprop::scalar::{Interval, ScalarFn};
use commuprop::solver::{CommutativeGenerator, Propagator};
use common::{c64, density, hermitian, matrix, scalar_fn};
use proptest::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

fn iv() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

fn apply(s: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    unvec(&(s * &vec(rho)), rho.rows()).unwrap()
}

fn exact(g: &GeneratorSum) -> Propagator {
    Propagator::exact(CommutativeGenerator::verify(g.clone(), &CheckOptions::default()).unwrap())
}

/// `vec(I)ᴴ·M`, i.e. the row of traces of the columns' matrices.
fn trace_row(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    &vec(&ComplexMatrix::identity(n)).adjoint() * m
}

fn example1_strategy(complex: bool) -> impl Strategy<Value = QuantumProblem> {
    let gamma = if complex { c64(1.0).boxed() } else { (0.0f64..1.5).prop_map(|x| C64::new(x, 0.0)).boxed() };
    (gamma, scalar_fn(complex), scalar_fn(complex), scalar_fn(complex))
        .prop_map(|(g, a1, a2, a3)| example1(g, a1, a2, a3, iv()).unwrap())
}

type Example2Args = (f64, f64, ScalarFn, ScalarFn, [[ScalarFn; 2]; 2]);

fn example2_args() -> impl Strategy<Value = Example2Args> {
    let f = || scalar_fn(false);
    (0.0f64..=1.0, 0.5f64..2.0, f(), f(), [[f(), f()], [f(), f()]])
}

fn bounded_rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.distance(b) / (1.0 + a.frob_norm().max(b.frob_norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builders_match_their_defining_formulas(
        n in 2usize..=4,
        seed in (matrix(4, 1.0), matrix(4, 1.0), matrix(4, 1.0), hermitian(4, 1.0), density(4)),
        hbar in 0.2f64..3.0,
    ) {
        let cut = |m: &ComplexMatrix| {
            let d = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
            ComplexMatrix::new(n, n, d).unwrap()
        };
        let (a, fa, fb, h) = (cut(&seed.0), cut(&seed.1), cut(&seed.2), cut(&seed.3));
        let rho = {
            let r = cut(&seed.4);
            let tr = r.trace();
            r.scale(tr.inv())
        };
        let u = matrix_exp(&h.scale(I)).unwrap();

        let s = conjugation_channel(&u).unwrap();
        let direct = &(&(&u * &rho) * &u.adjoint()) - &rho;
        prop_assert!(apply(s.matrix(), &rho).distance(&direct) <= 1e-12);

        let s = hamiltonian_part(&h, hbar).unwrap();
        let direct = commutator(&h, &rho).unwrap().scale(-I / hbar);
        prop_assert!(apply(s.matrix(), &rho).distance(&direct) <= 1e-12);

        let s = dissipator(&a).unwrap();
        let ada = &a.adjoint() * &a;
        let direct = &(&(&a * &rho) * &a.adjoint()) - &(&(&ada * &rho) + &(&rho * &ada)).scale_real(0.5);
        prop_assert!(apply(s.matrix(), &rho).distance(&direct) <= 1e-12);

        let s = bilinear_term(&fa, &fb).unwrap();
        let first = commutator(&fa, &(&rho * &fb)).unwrap();
        let second = commutator(&(&fa * &rho), &fb).unwrap();
        let direct = (&first + &second).scale_real(0.5);
        prop_assert!(apply(s.matrix(), &rho).distance(&direct) <= 1e-12);
        prop_assert!(s.apply(&rho).unwrap().distance(&direct) <= 1e-12);
    }

    #[test]
    fn lindblad_parts_preserve_trace(a in matrix(3, 1.0), fa in matrix(3, 1.0), fb in matrix(3, 1.0), h in hermitian(3, 1.0)) {
        for s in [dissipator(&a).unwrap(), bilinear_term(&fa, &fb).unwrap(), hamiltonian_part(&h, 1.0).unwrap()] {
            prop_assert!(trace_row(s.matrix(), 3).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn example1_generator_preserves_trace(p in example1_strategy(true), t in 0.0f64..1.0) {
        let l = p.generator.eval(t).unwrap();
        prop_assert!(trace_row(&l, 2).max_abs() <= 1e-10 * (1.0 + l.frob_norm()));
    }

    #[test]
    fn example2_generator_preserves_trace(args in example2_args(), t in 0.0f64..1.0) {
        let (mu, hbar, gamma, eps, cm) = args;
        let p = example2_with_hbar(mu, hbar, gamma, eps, cm, iv()).unwrap();
        let l = p.generator.eval(t).unwrap();
        prop_assert!(trace_row(&l, 2).max_abs() <= 1e-10 * (1.0 + l.frob_norm()));
    }

    #[test]
    fn example2_assembly_matches_the_decomposition(args in example2_args(), t in 0.0f64..1.0) {
        let (mu, hbar, gamma, eps, cm) = args;
        let parts = example2_from_parts(mu, hbar, gamma.clone(), eps.clone(), cm.clone(), iv()).unwrap();
        let p = example2_with_hbar(mu, hbar, gamma, eps, cm, iv()).unwrap();
        let (a, b) = (parts.eval(t).unwrap(), p.generator.eval(t).unwrap());
        prop_assert!(a.distance(&b) <= 1e-12 * (1.0 + a.frob_norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn example1_closed_form_matches_exponential(p in example1_strategy(true), t in 0.0f64..1.0) {
        let phi = exact(&p.generator).at(t).unwrap();
        let closed = p.reference.as_ref().unwrap().eval(t).unwrap();
        prop_assert!(bounded_rel(&phi, &closed) <= 1e-10, "{}", bounded_rel(&phi, &closed));
    }

    #[test]
    fn example2_closed_form_matches_exponential(args in example2_args(), t in 0.0f64..1.0) {
        let (mu, hbar, gamma, eps, cm) = args;
        let p = example2_with_hbar(mu, hbar, gamma, eps, cm, iv()).unwrap();
        let phi = exact(&p.generator).at(t).unwrap();
        let closed = p.reference.as_ref().unwrap().eval(t).unwrap();
        prop_assert!(bounded_rel(&phi, &closed) <= 1e-10, "{}", bounded_rel(&phi, &closed));
    }

    #[test]
    fn real_coefficients_keep_states_hermitian_with_unit_trace(p in example1_strategy(false), rho in density(2)) {
        let rho0 = DensityMatrix::new(rho).unwrap();
        let times = iv().grid(11);
        let traj = evolve_state(&exact(&p.generator), &rho0, &times, PhysicalityPolicy::ReportOnly).unwrap();
        for (phi_rho, report) in traj.trajectory.values.iter().zip(&traj.reports) {
            let scale = 1.0 + phi_rho.frob_norm();
            prop_assert!(report.hermiticity_defect <= 1e-8 * scale);
            prop_assert!(report.trace_defect <= 1e-8 * scale);
        }
    }

    #[test]
    fn propagator_preserves_the_trace_row(args in example2_args(), t in 0.0f64..1.0) {
        let (mu, hbar, gamma, eps, cm) = args;
        let p = example2_with_hbar(mu, hbar, gamma, eps, cm, iv()).unwrap();
        let phi = exact(&p.generator).at(t).unwrap();
        let row = trace_row(&phi, 2);
        let id_row = vec(&ComplexMatrix::identity(2)).adjoint();
        prop_assert!(row.distance(&id_row) <= 1e-8 * (1.0 + phi.frob_norm()));
    }

    #[test]
    fn zero_generator_leaves_states_alone(rho in density(3)) {
        let g = GeneratorSum::constant(ComplexMatrix::zeros(9, 9), iv()).unwrap();
        let rho0 = DensityMatrix::new(rho.clone()).unwrap();
        let traj = evolve_state(&exact(&g), &rho0, &iv().grid(5), PhysicalityPolicy::Enforce(PhysicalityTol::TRAJECTORY)).unwrap();
        for r in &traj.trajectory.values {
            prop_assert!(r.distance(&rho) <= 1e-15);
        }
    }
}
