#![allow(dead_code)]

use commuprop::generator::{GeneratorSum, Term};
use commuprop::linalg::{matrix_exp, ComplexMatrix, C64};
use commuprop::scalar::{Interval, ScalarFn};
use proptest::prelude::*;

pub fn c64(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| C64::new(re, im))
}

pub fn matrix(n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(c64(scale), n * n).prop_map(move |d| ComplexMatrix::new(n, n, d).unwrap())
}

/// Random matrix with Frobenius norm exactly `norm` (when nonzero).
pub fn matrix_with_norm(n: usize, norm: f64) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, 1.0).prop_map(move |m| {
        let f = m.frob_norm();
        if f > 0.0 {
            m.scale_real(norm / f)
        } else {
            m
        }
    })
}

pub fn hermitian(n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, scale).prop_map(|m| (&m + &m.adjoint()).scale_real(0.5))
}

/// `XX†/tr(XX†)`, full rank with probability one.
pub fn density(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, 1.0).prop_map(|x| {
        let p = &x * &x.adjoint();
        let tr = p.trace();
        p.scale(tr.inv())
    })
}

fn real(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi).prop_map(|x| C64::new(x, 0.0))
}

fn leaf(complex: bool) -> BoxedStrategy<ScalarFn> {
    let coef = move || if complex { c64(1.5).boxed() } else { real(-1.5, 1.5).boxed() };
    prop_oneof![
        coef().prop_map(ScalarFn::constant),
        Just(ScalarFn::t()),
        (coef(), coef()).prop_map(|(a, b)| ScalarFn::sin(a, b)),
        (coef(), coef()).prop_map(|(a, b)| ScalarFn::cos(a, b)),
        (coef(), coef()).prop_map(|(a, b)| ScalarFn::exp(a, b)),
    ]
    .boxed()
}

/// Small expressions: a leaf, a sum, a product, a power, or a scaled sum.
pub fn scalar_fn(complex: bool) -> BoxedStrategy<ScalarFn> {
    prop_oneof![
        leaf(complex),
        (leaf(complex), leaf(complex)).prop_map(|(a, b)| a + b),
        (leaf(complex), leaf(complex)).prop_map(|(a, b)| a * b),
        (leaf(complex), 2u32..4).prop_map(|(a, k)| a.pow(k)),
        (leaf(complex), leaf(complex), leaf(complex)).prop_map(|(a, b, c)| a * b + c),
    ]
    .boxed()
}

/// `L(t) = Σ β_i(t)·S D_i S⁻¹` with diagonal `D_i`, so every pair of term
/// matrices commutes. `S = exp(X)` keeps the similarity well conditioned.
pub fn commuting_generator(n: usize, max_terms: usize, hi: f64) -> impl Strategy<Value = GeneratorSum> {
    (
        matrix_with_norm(n, 0.5),
        prop::collection::vec((scalar_fn(true), prop::collection::vec(c64(1.0), n)), 1..=max_terms),
    )
        .prop_map(move |(x, terms)| {
            let s = matrix_exp(&x).unwrap();
            let s_inv = matrix_exp(&-&x).unwrap();
            let terms = terms
                .into_iter()
                .map(|(f, d)| Term::new(f, &(&s * &ComplexMatrix::diag(&d)) * &s_inv))
                .collect();
            GeneratorSum::new(n, Interval::new(0.0, hi).unwrap(), terms).unwrap()
        })
}
