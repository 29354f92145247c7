//! Fundamental solutions `Φ(t)` of `Φ' = L(t)Φ`, `Φ(0) = I`.
//!
//! Three routes are provided:
//!
//! * `exp(∫_0^t L)`, valid only for functionally commutative generators,
//!   so it takes a [`CommutativeGenerator`] that can only be built by
//!   passing the commutativity check;
//! * the product `∏_i exp(∫_0^t f_i(τ, G_i) dτ)` over a spatial
//!   decomposition;
//! * classical fixed-step RK4, which works for any generator and serves as
//!   the reference.
//!
//! The second Magnus term is available as a diagnostic: it vanishes for
//! commutative generators.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::commutativity::{check_with, CheckOptions, CommutativityReport, SpatialDecomposition};
use crate::error::{Error, Result};
use crate::generator::GeneratorSum;
use crate::linalg::{matrix_exp, ComplexMatrix, C64};
use crate::output::fmt_f64;
use crate::par::{self, Exec};
use crate::quad;
use crate::scalar::Interval;

pub const DEFAULT_RK4_STEPS_PER_UNIT: usize = 10_000;

/// A generator that passed the functional-commutativity check.
#[derive(Clone, Debug)]
pub struct CommutativeGenerator {
    generator: GeneratorSum,
    report: CommutativityReport,
}

impl CommutativeGenerator {
    /// Runs the check and refuses generators that fail it.
    pub fn verify(generator: GeneratorSum, opts: &CheckOptions) -> Result<Self> {
        let report = check_with(&generator, opts);
        if !report.is_commutative {
            let (t, s) = report.witness_pair;
            return Err(Error::NotCommutative { norm: report.max_pairwise_commutator_norm, t, s });
        }
        Ok(Self { generator, report })
    }

    pub fn generator(&self) -> &GeneratorSum {
        &self.generator
    }

    pub fn report(&self) -> &CommutativityReport {
        &self.report
    }
}

/// `exp(∫_0^t L(τ) dτ)`.
pub fn propagate_exact(g: &CommutativeGenerator, t: f64) -> Result<ComplexMatrix> {
    matrix_exp(&g.generator.integrate(t)?)
}

/// `∏_i exp(∫_0^t f_i(τ, G_i) dτ)`, factors in part order.
pub fn propagate_zhu(d: &SpatialDecomposition, t: f64) -> Result<ComplexMatrix> {
    if let Some(iv) = d.interval() {
        iv.check(t)?;
    }
    let mut phi = ComplexMatrix::identity(d.dimension());
    for part in d.parts() {
        phi = &phi * &matrix_exp(&part.integrated(t)?)?;
    }
    Ok(phi)
}

/// Classical RK4 with `steps` equal steps from 0 to `t`.
pub fn propagate_rk4(g: &GeneratorSum, t: f64, steps: usize) -> Result<ComplexMatrix> {
    if steps == 0 {
        return Err(Error::Invalid("RK4 needs at least one step".into()));
    }
    g.interval().check(t)?;
    let n = g.dimension();
    let h = t / steps as f64;
    let mut phi = ComplexMatrix::identity(n);
    if t == 0.0 {
        return Ok(phi);
    }
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    for k in 0..steps {
        let t0 = h * k as f64;
        let l0 = g.eval_unchecked(t0);
        let lm = g.eval_unchecked(t0 + 0.5 * h);
        let l1 = g.eval_unchecked(t0 + h);
        let k1 = &l0 * &phi;
        let k2 = &lm * &phi.add_scaled(&k1, half);
        let k3 = &lm * &phi.add_scaled(&k2, half);
        let k4 = &l1 * &phi.add_scaled(&k3, full);
        let mut incr = k1;
        incr = incr.add_scaled(&k2, C64::new(2.0, 0.0));
        incr = incr.add_scaled(&k3, C64::new(2.0, 0.0));
        incr += &k4;
        phi = phi.add_scaled(&incr, C64::new(h / 6.0, 0.0));
    }
    Ok(phi)
}

/// `Ω₂(t) = −½ ∫_0^t [∫_0^{t₁} L(t₂) dt₂, L(t₁)] dt₁`.
///
/// The outer integral is adaptive Simpson over the matrix entries; the
/// inner one is the term-wise generator integral.
pub fn magnus2_term(g: &GeneratorSum, t: f64) -> Result<ComplexMatrix> {
    g.interval().check(t)?;
    let n = g.dimension();
    let integrand = |t1: f64| -> Result<Vec<C64>> {
        let inner = g.integrate(t1)?;
        let l = g.eval_unchecked(t1);
        Ok((&(&inner * &l) - &(&l * &inner)).into_vec())
    };
    let v = quad::adaptive_simpson(integrand, 0.0, t, quad::DEFAULT_ABS_TOL, quad::DEFAULT_MAX_DEPTH)?;
    Ok(ComplexMatrix::new(n, n, v)?.scale_real(-0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Zhu,
    Rk4,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Zhu => "zhu",
            Method::Rk4 => "rk4",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "exact-exp" => Ok(Method::Exact),
            "zhu" | "zhu-product" => Ok(Method::Zhu),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::Invalid(format!("unknown method '{other}' (exact, zhu, rk4)"))),
        }
    }
}

#[derive(Debug)]
enum Source {
    Exact(CommutativeGenerator),
    Zhu(SpatialDecomposition),
    Rk4 { generator: GeneratorSum, steps_per_unit: usize },
}

/// A fundamental solution evaluable at any time, with a per-time cache.
#[derive(Debug)]
pub struct Propagator {
    source: Source,
    cache: Mutex<HashMap<u64, ComplexMatrix>>,
}

impl Propagator {
    fn from_source(source: Source) -> Self {
        Self { source, cache: Mutex::new(HashMap::new()) }
    }

    pub fn exact(g: CommutativeGenerator) -> Self {
        Self::from_source(Source::Exact(g))
    }

    pub fn zhu(d: SpatialDecomposition) -> Self {
        Self::from_source(Source::Zhu(d))
    }

    /// RK4 with `ceil(|t|·steps_per_unit)` steps for an evaluation at `t`.
    pub fn rk4(g: GeneratorSum, steps_per_unit: usize) -> Self {
        Self::from_source(Source::Rk4 { generator: g, steps_per_unit: steps_per_unit.max(1) })
    }

    pub fn method(&self) -> Method {
        match self.source {
            Source::Exact(_) => Method::Exact,
            Source::Zhu(_) => Method::Zhu,
            Source::Rk4 { .. } => Method::Rk4,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.source {
            Source::Exact(g) => g.generator.dimension(),
            Source::Zhu(d) => d.dimension(),
            Source::Rk4 { generator, .. } => generator.dimension(),
        }
    }

    pub fn interval(&self) -> Option<Interval> {
        match &self.source {
            Source::Exact(g) => Some(g.generator.interval()),
            Source::Zhu(d) => d.interval(),
            Source::Rk4 { generator, .. } => Some(generator.interval()),
        }
    }

    fn compute(&self, t: f64) -> Result<ComplexMatrix> {
        match &self.source {
            Source::Exact(g) => propagate_exact(g, t),
            Source::Zhu(d) => propagate_zhu(d, t),
            Source::Rk4 { generator, steps_per_unit } => {
                let steps = ((t.abs() * *steps_per_unit as f64).ceil() as usize).max(1);
                propagate_rk4(generator, t, steps)
            }
        }
    }

    /// `Φ(t)`.
    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let key = t.to_bits();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let phi = self.compute(t)?;
        let mut cache = self.cache.lock().expect("cache lock");
        Ok(cache.entry(key).or_insert(phi).clone())
    }

    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        self.trajectory_with(times, Exec::default())
    }

    /// Evaluates at every time; results keep the order of `times`.
    pub fn trajectory_with(&self, times: &[f64], exec: Exec) -> Result<Trajectory> {
        check_times(times)?;
        if let Some(iv) = self.interval() {
            for &t in times {
                iv.check(t)?;
            }
        }
        let values = par::map(exec, times, |&t| self.at(t)).into_iter().collect::<Result<Vec<_>>>()?;
        Trajectory::new(TrajectoryKind::Propagator, times.to_vec(), values)
    }
}

pub fn trajectory(p: &Propagator, times: &[f64]) -> Result<Trajectory> {
    p.trajectory(times)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Invalid("no evaluation times".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invalid("evaluation times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("evaluation times must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    /// Values are `Φ(t)`.
    Propagator,
    /// Values are `ρ(t)`.
    State,
}

/// Sampled `(t, Φ(t))` or `(t, ρ(t))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub times: Vec<f64>,
    pub values: Vec<ComplexMatrix>,
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, times: Vec<f64>, values: Vec<ComplexMatrix>) -> Result<Self> {
        check_times(&times)?;
        if times.len() != values.len() {
            return Err(Error::Invalid(format!("{} times but {} values", times.len(), values.len())));
        }
        let shape = (values[0].rows(), values[0].cols());
        if values.iter().any(|v| (v.rows(), v.cols()) != shape) {
            return Err(Error::DimensionMismatch("trajectory values differ in shape".into()));
        }
        Ok(Self { kind, times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest pointwise Frobenius distance to another trajectory on the
    /// same times.
    pub fn max_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::Invalid("trajectories are sampled at different times".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.distance(b)).fold(0.0, f64::max))
    }

    /// `t,re_ij...,im_ij...` in row-major entry order.
    pub fn csv_header(&self) -> Vec<String> {
        let (r, c) = (self.values[0].rows(), self.values[0].cols());
        let label = |part: &str, i: usize, j: usize| {
            if r <= 10 && c <= 10 {
                format!("{part}_{i}{j}")
            } else {
                format!("{part}_{i}_{j}")
            }
        };
        let mut cols = vec!["t".to_string()];
        for part in ["re", "im"] {
            for i in 0..r {
                for j in 0..c {
                    cols.push(label(part, i, j));
                }
            }
        }
        cols
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.write_csv_with(w, &[])
    }

    /// CSV with additional per-row columns appended after the entries.
    pub fn write_csv_with<W: Write>(&self, mut w: W, extra: &[(String, Vec<f64>)]) -> Result<()> {
        if extra.iter().any(|(_, v)| v.len() != self.len()) {
            return Err(Error::Invalid("extra CSV column has the wrong length".into()));
        }
        let mut header = self.csv_header();
        header.extend(extra.iter().map(|(name, _)| name.clone()));
        writeln!(w, "{}", header.join(","))?;
        for (k, (t, m)) in self.times.iter().zip(&self.values).enumerate() {
            let mut row = vec![fmt_f64(*t)];
            row.extend(m.as_slice().iter().map(|z| fmt_f64(z.re)));
            row.extend(m.as_slice().iter().map(|z| fmt_f64(z.im)));
            row.extend(extra.iter().map(|(_, v)| fmt_f64(v[k])));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
