//! Functional commutativity of a generator and its finite decompositions.
//!
//! Two diagnostics are computed on a uniform grid: the pairwise commutators
//! `[L(t), L(s)]` and the derivative commutators `[L(t), L'(t)]`. For
//! integrable generators these vanish together, so a disagreement between
//! them is surfaced as a warning in the report.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::generator::{GeneratorSum, DEFAULT_DERIVATIVE_STEP};
use crate::linalg::{self, commutator, ComplexMatrix, C64};
use crate::par::{self, Exec};
use crate::scalar::{Interval, ScalarFn};

pub const DEFAULT_GRID: usize = 33;

/// Relative commutator tolerance: `‖[A,B]‖_F ≤ tol·(1 + ‖A‖_F‖B‖_F)`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The derivative diagnostic uses finite differences, whose error is far
/// above `DEFAULT_TOL`; it gets its own relative threshold.
pub const DEFAULT_DERIVATIVE_TOL: f64 = 1e-6;

/// Pairwise tolerance for the matrices of a spatial decomposition, relative
/// to `‖G_i‖_F‖G_j‖_F`.
pub const PART_COMMUTE_TOL: f64 = 1e-10;

/// Reconstruction residual tolerance relative to `1 + ‖L(t)‖_F`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub grid_size: usize,
    pub tol: f64,
    pub derivative_step: f64,
    pub derivative_tol: f64,
    pub exec: Exec,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            derivative_step: DEFAULT_DERIVATIVE_STEP,
            derivative_tol: DEFAULT_DERIVATIVE_TOL,
            exec: Exec::default(),
        }
    }
}

impl CheckOptions {
    pub fn with_grid(grid_size: usize) -> Self {
        Self { grid_size, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutativityReport {
    /// Verdict of the pairwise diagnostic.
    pub is_commutative: bool,
    /// Largest `‖[L(t), L(s)]‖_F` over grid pairs.
    pub max_pairwise_commutator_norm: f64,
    /// Largest `‖[L(t), L(s)]‖_F / (1 + ‖L(t)‖_F‖L(s)‖_F)`.
    pub max_pairwise_ratio: f64,
    /// Largest `‖[L(t), L'(t)]‖_F` over the grid.
    pub max_derivative_commutator_norm: f64,
    pub max_derivative_ratio: f64,
    pub derivative_commutative: bool,
    /// Grid pair `(t, s)` attaining `max_pairwise_commutator_norm`.
    pub witness_pair: (f64, f64),
    pub grid: Vec<f64>,
    /// Set when the two diagnostics disagree.
    pub warning: Option<String>,
}

impl CommutativityReport {
    /// `{"commutative", "max_pairwise", "max_derivative", "witness", "grid_size"}`,
    /// plus `"warning"` when present.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "commutative": self.is_commutative,
            "max_pairwise": self.max_pairwise_commutator_norm,
            "max_derivative": self.max_derivative_commutator_norm,
            "witness": [self.witness_pair.0, self.witness_pair.1],
            "grid_size": self.grid.len(),
        });
        if let Some(w) = &self.warning {
            v["warning"] = json!(w);
        }
        v
    }
}

/// Samples the generator on a uniform grid and measures both commutator
/// diagnostics.
pub fn check_functional_commutativity(g: &GeneratorSum, grid_size: usize) -> CommutativityReport {
    check_with(g, &CheckOptions::with_grid(grid_size))
}

pub fn check_with(g: &GeneratorSum, opts: &CheckOptions) -> CommutativityReport {
    assert!(opts.grid_size >= 3, "commutativity grid needs at least 3 points");
    let grid = g.interval().grid(opts.grid_size);
    let samples: Vec<(ComplexMatrix, f64)> = par::map(opts.exec, &grid, |&t| {
        let l = g.eval_unchecked(t);
        let nrm = l.frob_norm();
        (l, nrm)
    });

    let pairs: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|i| (i + 1..grid.len()).map(move |j| (i, j))).collect();
    let pair_norms: Vec<(f64, f64)> = par::map(opts.exec, &pairs, |&(i, j)| {
        let (a, na) = &samples[i];
        let (b, nb) = &samples[j];
        let c = (&(a * b) - &(b * a)).frob_norm();
        (c, c / (1.0 + na * nb))
    });

    let mut max_norm = 0.0;
    let mut max_ratio = 0.0;
    let mut witness = (grid[0], grid[1]);
    for (&(i, j), &(c, r)) in pairs.iter().zip(&pair_norms) {
        if c > max_norm {
            max_norm = c;
            witness = (grid[i], grid[j]);
        }
        max_ratio = f64::max(max_ratio, r);
    }

    let h = opts.derivative_step;
    let deriv: Vec<(f64, f64)> = par::map_range(opts.exec, grid.len(), |k| {
        let (l, nl) = &samples[k];
        let d = g.derivative_in_interval(grid[k], h);
        let c = (&(l * &d) - &(&d * l)).frob_norm();
        (c, c / (1.0 + nl * d.frob_norm()))
    });
    let max_dnorm = deriv.iter().map(|d| d.0).fold(0.0, f64::max);
    let max_dratio = deriv.iter().map(|d| d.1).fold(0.0, f64::max);

    let is_commutative = max_ratio <= opts.tol;
    let derivative_commutative = max_dratio <= opts.derivative_tol;
    let warning = (is_commutative != derivative_commutative).then(|| {
        format!(
            "pairwise and derivative diagnostics disagree (pairwise ratio {max_ratio:.3e}, derivative ratio {max_dratio:.3e})"
        )
    });

    CommutativityReport {
        is_commutative,
        max_pairwise_commutator_norm: max_norm,
        max_pairwise_ratio: max_ratio,
        max_derivative_commutator_norm: max_dnorm,
        max_derivative_ratio: max_dratio,
        derivative_commutative,
        witness_pair: witness,
        grid,
        warning,
    }
}

/// Sampled decomposition `L(t) ≈ Σ_k α_k(t)·L_k` with `L_k = L(t_k)`.
#[derive(Clone, Debug, Serialize)]
pub struct MartinDecomposition {
    pub basis: Vec<ComplexMatrix>,
    pub basis_times: Vec<f64>,
    pub times: Vec<f64>,
    /// `coefficients[i][k]` is `α_k(times[i])`.
    pub coefficients: Vec<Vec<C64>>,
    /// `‖Σ α_k L_k − L(t)‖_F` per grid time.
    pub residuals: Vec<f64>,
}

impl MartinDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn unit_vec(m: &ComplexMatrix) -> Vec<C64> {
    let v = linalg::vec(m).into_vec();
    let n = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    if n > 0.0 {
        v.into_iter().map(|z| z / n).collect()
    } else {
        v
    }
}

/// Picks linearly independent samples `L(t_k)` greedily (earliest grid time
/// first) and fits every grid sample against them by least squares.
pub fn martin_decompose(g: &GeneratorSum, grid_size: usize) -> Result<MartinDecomposition> {
    martin_decompose_with(g, grid_size, DEFAULT_TOL, Exec::default())
}

pub fn martin_decompose_with(
    g: &GeneratorSum,
    grid_size: usize,
    tol: f64,
    exec: Exec,
) -> Result<MartinDecomposition> {
    if grid_size < 2 {
        return Err(Error::Invalid("decomposition grid needs at least 2 points".into()));
    }
    let n = g.dimension();
    let times = g.interval().grid(grid_size);
    let samples: Vec<ComplexMatrix> = par::map(exec, &times, |&t| g.eval_unchecked(t));

    let mut basis = Vec::new();
    let mut basis_times = Vec::new();
    let mut directions: Vec<Vec<C64>> = Vec::new();
    for (t, l) in times.iter().zip(&samples) {
        if basis.len() == n * n {
            break;
        }
        if l.frob_norm() == 0.0 {
            continue;
        }
        directions.push(unit_vec(l));
        if linalg::column_rank(&directions) == directions.len() {
            basis.push(l.clone());
            basis_times.push(*t);
        } else {
            directions.pop();
        }
    }

    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let (a, b) = (&basis[i], &basis[j]);
            let norm = commutator(a, b)?.frob_norm();
            if norm > tol * (1.0 + a.frob_norm() * b.frob_norm()) {
                return Err(Error::NonCommutingParts { i, j, norm });
            }
        }
    }

    let columns: Vec<Vec<C64>> = basis.iter().map(|m| linalg::vec(m).into_vec()).collect();
    let fits: Vec<Result<(Vec<C64>, f64)>> = par::map(exec, &samples, |l| {
        let coeffs = linalg::least_squares(&columns, linalg::vec(l).as_slice())?;
        let mut recon = ComplexMatrix::zeros(n, n);
        for (c, m) in coeffs.iter().zip(&basis) {
            recon = recon.add_scaled(m, *c);
        }
        Ok((coeffs, recon.distance(l)))
    });

    let mut coefficients = Vec::with_capacity(times.len());
    let mut residuals = Vec::with_capacity(times.len());
    for ((fit, &t), l) in fits.into_iter().zip(&times).zip(&samples) {
        let (coeffs, residual) = fit?;
        let limit = RESIDUAL_TOL * (1.0 + l.frob_norm());
        if residual > limit {
            return Err(Error::Residual { t, residual, tol: limit });
        }
        coefficients.push(coeffs);
        residuals.push(residual);
    }

    Ok(MartinDecomposition { basis, basis_times, times, coefficients, residuals })
}

/// Proper function `F(t) = Σ_k c_k(t)·G^k` (`k` from 0), whose primitive
/// function is `f(t, λ) = Σ_k c_k(t)·λ^k`.
#[derive(Clone, Debug)]
pub struct ProperPart {
    pub coeffs: Vec<ScalarFn>,
    pub matrix: ComplexMatrix,
}

impl ProperPart {
    /// Linear primitive function `f(t, λ) = β(t)·λ`.
    pub fn linear(beta: ScalarFn, matrix: ComplexMatrix) -> Self {
        Self { coeffs: vec![ScalarFn::zero(), beta], matrix }
    }

    fn powers(&self) -> Vec<ComplexMatrix> {
        let n = self.matrix.rows();
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut p = ComplexMatrix::identity(n);
        for k in 0..self.coeffs.len() {
            if k > 0 {
                p = &p * &self.matrix;
            }
            out.push(p.clone());
        }
        out
    }

    /// `f(t, G)`.
    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let n = self.matrix.rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (c, p) in self.coeffs.iter().zip(self.powers()) {
            acc = acc.add_scaled(&p, c.eval(t));
        }
        acc
    }

    /// `∫_0^t f(τ, G) dτ`.
    pub fn integrated(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.matrix.rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (c, p) in self.coeffs.iter().zip(self.powers()) {
            acc = acc.add_scaled(&p, c.integrate(0.0, t)?);
        }
        Ok(acc)
    }
}

/// Sum of proper functions on mutually commuting constant matrices.
#[derive(Clone, Debug)]
pub struct SpatialDecomposition {
    n: usize,
    parts: Vec<ProperPart>,
    interval: Option<Interval>,
}

impl SpatialDecomposition {
    /// Validates dimensions and pairwise commutation
    /// `‖[G_i, G_j]‖_F ≤ 1e-10·‖G_i‖_F‖G_j‖_F`.
    pub fn new(n: usize, parts: Vec<ProperPart>) -> Result<Self> {
        for (k, p) in parts.iter().enumerate() {
            if p.matrix.rows() != n || p.matrix.cols() != n {
                return Err(Error::DimensionMismatch(format!("part {k} is not {n}x{n}")));
            }
        }
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let (a, b) = (&parts[i].matrix, &parts[j].matrix);
                let norm = commutator(a, b)?.frob_norm();
                if norm > PART_COMMUTE_TOL * a.frob_norm() * b.frob_norm() {
                    return Err(Error::NonCommutingParts { i, j, norm });
                }
            }
        }
        Ok(Self { n, parts, interval: None })
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = Some(interval);
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[ProperPart] {
        &self.parts
    }

    pub fn interval(&self) -> Option<Interval> {
        self.interval
    }

    /// Same parts in a different order; commutation is order-free.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.parts.len()];
        if order.len() != self.parts.len() {
            return Err(Error::Invalid("permutation has the wrong length".into()));
        }
        for &k in order {
            if k >= seen.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Invalid("not a permutation".into()));
            }
        }
        Ok(Self {
            n: self.n,
            parts: order.iter().map(|&k| self.parts[k].clone()).collect(),
            interval: self.interval,
        })
    }

    /// `Σ_i f_i(t, G_i)`.
    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for p in &self.parts {
            acc += &p.eval(t);
        }
        acc
    }

    /// Largest `‖Σ f_i(t,G_i) − L(t)‖_F / (1 + ‖L(t)‖_F)` over `times`.
    pub fn reconstruction_residual(&self, g: &GeneratorSum, times: &[f64]) -> f64 {
        times
            .iter()
            .map(|&t| {
                let l = g.eval_unchecked(t);
                self.eval(t).distance(&l) / (1.0 + l.frob_norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Reads each generator term `(β_i, G_i)` as a linear primitive function
/// `f_i(t, λ) = β_i(t)·λ`. The term matrices must commute pairwise.
pub fn as_spatial_decomposition(g: &GeneratorSum) -> Result<SpatialDecomposition> {
    let parts = g
        .terms()
        .iter()
        .map(|term| ProperPart::linear(term.coeff.clone(), term.matrix.clone()))
        .collect();
    let d = SpatialDecomposition::new(g.dimension(), parts)?.with_interval(g.interval());
    let grid = g.interval().grid(DEFAULT_GRID);
    let residual = d.reconstruction_residual(g, &grid);
    if residual > RESIDUAL_TOL {
        return Err(Error::Residual { t: f64::NAN, residual, tol: RESIDUAL_TOL });
    }
    Ok(d)
}
