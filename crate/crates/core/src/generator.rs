//! Time-dependent generators `L(t) = Σ_k β_k(t)·G_k` with scalar
//! coefficients and constant matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::scalar::{Interval, ScalarFn};

/// Default step for the numerical derivative of a generator.
pub const DEFAULT_DERIVATIVE_STEP: f64 = 1e-5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Term {
    pub coeff: ScalarFn,
    pub matrix: ComplexMatrix,
}

impl Term {
    pub fn new(coeff: impl Into<ScalarFn>, matrix: ComplexMatrix) -> Self {
        Self { coeff: coeff.into(), matrix }
    }
}

/// Finite sum of scalar functions times constant `n × n` matrices, on a
/// working interval containing 0.
///
/// Terms are kept exactly as given; nothing is merged or reordered.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GeneratorRepr", into = "GeneratorRepr")]
pub struct GeneratorSum {
    n: usize,
    interval: Interval,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorRepr {
    n: usize,
    interval: Interval,
    terms: Vec<Term>,
}

impl TryFrom<GeneratorRepr> for GeneratorSum {
    type Error = Error;

    fn try_from(r: GeneratorRepr) -> Result<Self> {
        GeneratorSum::new(r.n, r.interval, r.terms)
    }
}

impl From<GeneratorSum> for GeneratorRepr {
    fn from(g: GeneratorSum) -> Self {
        GeneratorRepr { n: g.n, interval: g.interval, terms: g.terms }
    }
}

impl GeneratorSum {
    pub fn new(n: usize, interval: Interval, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("generator needs at least one term".into()));
        }
        for (k, term) in terms.iter().enumerate() {
            if term.matrix.rows() != n || term.matrix.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term {k} has a {}x{} matrix, generator dimension is {n}",
                    term.matrix.rows(),
                    term.matrix.cols()
                )));
            }
        }
        Ok(Self { n, interval, terms })
    }

    /// Single constant-coefficient term `L(t) = A`.
    pub fn constant(a: ComplexMatrix, interval: Interval) -> Result<Self> {
        let n = a.rows();
        Self::new(n, interval, vec![Term::new(1.0, a)])
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Same terms on a different interval.
    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }

    /// Appends the terms of `other`; dimensions and intervals must agree.
    pub fn concat(&self, other: &GeneratorSum) -> Result<GeneratorSum> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch(format!("cannot join dimension {} with {}", self.n, other.n)));
        }
        if other.interval != self.interval {
            return Err(Error::InvalidInterval("generators live on different intervals".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(GeneratorSum { n: self.n, interval: self.interval, terms })
    }

    fn combine(&self, weights: impl Iterator<Item = C64>) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for (w, term) in weights.zip(&self.terms) {
            acc = acc.add_scaled(&term.matrix, w);
        }
        acc
    }

    /// `L(t)` without the interval check.
    pub(crate) fn eval_unchecked(&self, t: f64) -> ComplexMatrix {
        self.combine(self.terms.iter().map(|term| term.coeff.eval(t)))
    }

    pub fn eval(&self, t: f64) -> Result<ComplexMatrix> {
        self.interval.check(t)?;
        Ok(self.eval_unchecked(t))
    }

    /// `∫_0^t L(τ) dτ`, integrated term by term.
    pub fn integrate(&self, t: f64) -> Result<ComplexMatrix> {
        self.interval.check(t)?;
        let weights = self
            .terms
            .iter()
            .map(|term| term.coeff.integrate(0.0, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.combine(weights.into_iter()))
    }

    /// Central difference `(L(t+h) − L(t−h)) / 2h`.
    pub fn derivative(&self, t: f64, h: f64) -> Result<ComplexMatrix> {
        if h <= 0.0 || !h.is_finite() {
            return Err(Error::Invalid(format!("derivative step must be positive, got {h}")));
        }
        self.interval.check(t - h)?;
        self.interval.check(t + h)?;
        Ok(self.central_difference(t, h))
    }

    fn central_difference(&self, t: f64, h: f64) -> ComplexMatrix {
        (&self.eval_unchecked(t + h) - &self.eval_unchecked(t - h)).scale_real(0.5 / h)
    }

    /// Second-order derivative estimate usable anywhere in the interval:
    /// central in the interior, one-sided three-point at the ends.
    pub(crate) fn derivative_in_interval(&self, t: f64, h: f64) -> ComplexMatrix {
        let (lo, hi) = (self.interval.lo(), self.interval.hi());
        if t - h >= lo && t + h <= hi {
            self.central_difference(t, h)
        } else {
            let s = if t - h < lo { h } else { -h };
            let f0 = self.eval_unchecked(t);
            let f1 = self.eval_unchecked(t + s);
            let f2 = self.eval_unchecked(t + 2.0 * s);
            let num = &(&f1.scale_real(4.0) - &f0.scale_real(3.0)) - &f2;
            num.scale_real(0.5 / s)
        }
    }
}

pub fn eval_generator(g: &GeneratorSum, t: f64) -> Result<ComplexMatrix> {
    g.eval(t)
}

pub fn integrate_generator(g: &GeneratorSum, t: f64) -> Result<ComplexMatrix> {
    g.integrate(t)
}

pub fn derivative_generator(g: &GeneratorSum, t: f64, h: f64) -> Result<ComplexMatrix> {
    g.derivative(t, h)
}
