//! Dense complex matrices and the matrix-analytic kernels the rest of the
//! crate is built on: commutators, Kronecker products, column-stacking
//! vectorization, the scaling-and-squaring exponential, rank and
//! minimal-polynomial degree, and a Jacobi eigensolver for Hermitian input.
//!
//! Nothing here needs eigenvalues of a general matrix. The exponential is a
//! pure Taylor/squaring scheme and ranks come from one-sided Jacobi singular
//! values.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_RTOL: f64 = 1e-10;

/// Frobenius distance to the adjoint tolerated by [`hermitian_eigenvalues`],
/// relative to `max(1, ‖A‖_F)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-12;
const EXP_SCALE_TARGET: f64 = 0.5;
const EXP_TERM_RTOL: f64 = 1e-16;
const EXP_MAX_TERMS: usize = 64;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Wire form: `{"rows": n, "cols": m, "data": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let data = r.data.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(r.rows, r.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Anti-diagonal matrix: `entries[0]` in the top-right corner,
    /// `entries[n-1]` in the bottom-left.
    pub fn adiag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, n - 1 - i)] = z;
        }
        m
    }

    pub fn adiag_real(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::adiag(&v)
    }

    /// Column vector from entries.
    pub fn column(entries: Vec<C64>) -> Self {
        Self { rows: entries.len(), cols: 1, data: entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(C64::conj).collect() }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖A − B‖_F`; panics on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Checked product.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * m];
        for i in 0..n {
            let row = &self.data[i * k..(i + 1) * k];
            let dst = &mut out[i * m..(i + 1) * m];
            for (l, &a) in row.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = &rhs.data[l * m..(l + 1) * m];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Self { rows: n, cols: m, data: out }
    }

    /// `self + s·other`, shapes must agree.
    pub fn add_scaled(&self, other: &Self, s: C64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + s * b).collect(),
        }
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>11.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.add_scaled(rhs, C64::new(1.0, 0.0))
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.add_scaled(rhs, C64::new(-1.0, 0.0))
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    if b.rows != n || b.cols != n {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {n}x{n} with {}x{}",
            b.rows, b.cols
        )));
    }
    Ok(&(a * b) - &(b * a))
}

/// Kronecker product, `(r_a·r_b) × (c_a·c_b)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization: the columns of `a`, top to bottom.
pub fn vec(a: &ComplexMatrix) -> ComplexMatrix {
    let mut v = Vec::with_capacity(a.rows * a.cols);
    for j in 0..a.cols {
        for i in 0..a.rows {
            v.push(a[(i, j)]);
        }
    }
    ComplexMatrix::column(v)
}

/// Inverse of [`vec()`] for an `n × n` result.
pub fn unvec(v: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if v.cols != 1 && v.rows != 1 {
        return Err(Error::DimensionMismatch(format!(
            "unvec expects a vector, got {}x{}",
            v.rows, v.cols
        )));
    }
    if n == 0 || v.data.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be reshaped to {n}x{n}",
            v.data.len()
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = v.data[j * n + i];
        }
    }
    Ok(out)
}

pub fn frob_norm(a: &ComplexMatrix) -> f64 {
    a.frob_norm()
}

/// Matrix exponential by scaling and squaring a truncated Taylor series.
///
/// The argument is halved until `‖A/2^s‖_F ≤ 0.5`; the series is summed
/// until a term falls below `1e-16` of the partial sum, then squared `s`
/// times.
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    let norm = a.frob_norm();
    if !norm.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries in exponent".into()));
    }
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > EXP_SCALE_TARGET {
        scaled *= 0.5;
        squarings += 1;
    }
    let x = a.scale_real(0.5f64.powi(squarings as i32));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=EXP_MAX_TERMS {
        term = (&term * &x).scale_real(1.0 / k as f64);
        sum += &term;
        if term.frob_norm() <= EXP_TERM_RTOL * sum.frob_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Hermitian 2×2 rotation `u = D·R` that zeroes the off-diagonal of
/// `[[a, g], [conj g, d]]` under `uᴴ M u`. Returned as `(u_pp, u_pq, u_qp, u_qq)`.
fn jacobi_rotation(a: f64, d: f64, g: C64) -> (C64, C64, C64, C64) {
    let mag = g.norm();
    let phase = if mag > 0.0 { g / mag } else { C64::new(1.0, 0.0) };
    let theta = 0.5 * (2.0 * mag).atan2(d - a);
    let (s, c) = theta.sin_cos();
    let ph = phase.conj();
    (C64::new(c, 0.0), C64::new(s, 0.0), -ph * s, ph * c)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi, ascending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.require_square()?;
    let defect = a.distance(&a.adjoint());
    if defect > HERMITIAN_TOL * a.frob_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    // Symmetrize so the iteration sees an exactly Hermitian matrix.
    let mut m = (a + &a.adjoint()).scale_real(0.5);
    let scale = m.frob_norm();
    let off = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&m) <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = m[(p, q)];
                if g.norm() == 0.0 {
                    continue;
                }
                let (upp, upq, uqp, uqq) = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, g);
                for k in 0..n {
                    let (x, y) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = x * upp + y * uqp;
                    m[(k, q)] = x * upq + y * uqq;
                }
                for k in 0..n {
                    let (x, y) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = upp.conj() * x + uqp.conj() * y;
                    m[(q, k)] = upq.conj() * x + uqq.conj() * y;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues with multiplicities, grouped within a tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub pairs: Vec<(C64, usize)>,
}

impl Spectrum {
    /// Groups the Hermitian eigenvalues of `a` that agree within
    /// `tol·max(1, ‖A‖_F)`.
    pub fn hermitian(a: &ComplexMatrix, tol: f64) -> Result<Self> {
        let eig = hermitian_eigenvalues(a)?;
        let eps = tol * a.frob_norm().max(1.0);
        let mut pairs: Vec<(C64, usize)> = Vec::new();
        for x in eig {
            match pairs.last_mut() {
                Some((z, m)) if (x - z.re).abs() <= eps => *m += 1,
                _ => pairs.push((C64::new(x, 0.0), 1)),
            }
        }
        Ok(Self { pairs })
    }

    pub fn dimension(&self) -> usize {
        self.pairs.iter().map(|p| p.1).sum()
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

/// Singular values of the matrix whose columns are `cols`, descending.
/// One-sided (Hestenes) Jacobi.
pub fn column_singular_values(cols: &[Vec<C64>]) -> Vec<f64> {
    let mut w: Vec<Vec<C64>> = cols.to_vec();
    let k = w.len();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&w[p], &w[p]).re;
                let beta = dot(&w[q], &w[q]).re;
                let gamma = dot(&w[p], &w[q]);
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let (upp, upq, uqp, uqq) = jacobi_rotation(alpha, beta, gamma);
                let (wp, wq) = (w[p].clone(), w[q].clone());
                for r in 0..wp.len() {
                    w[p][r] = wp[r] * upp + wq[r] * uqp;
                    w[q][r] = wp[r] * upq + wq[r] * uqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    // Work on whichever side has fewer vectors.
    let m = if a.cols <= a.rows { a.clone() } else { a.adjoint() };
    let cols: Vec<Vec<C64>> = (0..m.cols).map(|j| (0..m.rows).map(|i| m[(i, j)]).collect()).collect();
    column_singular_values(&cols)
}

/// Numerical rank of a column set: singular values above `RANK_RTOL·σ_max`.
pub fn column_rank(cols: &[Vec<C64>]) -> usize {
    let sv = column_singular_values(cols);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > RANK_RTOL * top).count(),
        _ => 0,
    }
}

pub fn rank(a: &ComplexMatrix) -> usize {
    let sv = singular_values(a);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > RANK_RTOL * top).count(),
        _ => 0,
    }
}

/// Smallest `m` with `{I, A, …, A^m}` linearly dependent (vectorized,
/// unit-normalized), i.e. the degree of the minimal polynomial.
pub fn min_poly_degree(a: &ComplexMatrix) -> Result<usize> {
    let n = a.require_square()?;
    let unit = |m: &ComplexMatrix| -> Vec<C64> {
        let v = vec(m).into_vec();
        let nrm = norm2(&v);
        if nrm > 0.0 {
            v.into_iter().map(|z| z / nrm).collect()
        } else {
            v
        }
    };
    let mut power = ComplexMatrix::identity(n);
    let mut cols = vec![unit(&power)];
    for m in 1..=n {
        power = &power * a;
        cols.push(unit(&power));
        if column_rank(&cols) < m + 1 {
            return Ok(m);
        }
    }
    Ok(n)
}

/// Least-squares coefficients `x` minimizing `‖Σ x_k cols[k] − rhs‖₂`.
/// Columns must be linearly independent. Modified Gram–Schmidt with one
/// reorthogonalization pass.
pub fn least_squares(cols: &[Vec<C64>], rhs: &[C64]) -> Result<Vec<C64>> {
    let k = cols.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let len = rhs.len();
    if cols.iter().any(|c| c.len() != len) {
        return Err(Error::DimensionMismatch("least-squares columns differ in length".into()));
    }
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(k);
    let mut r = vec![vec![C64::new(0.0, 0.0); k]; k];
    for (j, col) in cols.iter().enumerate() {
        let mut v = col.clone();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let h = dot(qi, &v);
                r[i][j] += h;
                for (x, y) in v.iter_mut().zip(qi) {
                    *x -= h * y;
                }
            }
        }
        let nrm = norm2(&v);
        if nrm <= RANK_RTOL * norm2(col) || nrm == 0.0 {
            return Err(Error::InvalidMatrix("least-squares columns are dependent".into()));
        }
        r[j][j] = C64::new(nrm, 0.0);
        q.push(v.into_iter().map(|z| z / nrm).collect());
    }
    let qb: Vec<C64> = q.iter().map(|qi| dot(qi, rhs)).collect();
    let mut x = vec![C64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut s = qb[i];
        for j in i + 1..k {
            s -= r[i][j] * x[j];
        }
        x[i] = s / r[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma1() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn sigma2() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]])
            .unwrap()
    }

    fn sigma3() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(0.0, f64::INFINITY)]).is_err());
        assert!(ComplexMatrix::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn json_layout() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(3.0, 0.0)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.0,2.0],[3.0,0.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }

    #[test]
    fn commutator_cases() {
        let id = ComplexMatrix::identity(2);
        let x = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(-3.0, 0.5)], vec![c(0.0, 1.0), c(7.0, 0.0)]])
            .unwrap();
        assert_eq!(commutator(&id, &x).unwrap().max_abs(), 0.0);
        // σ1σ2 = −iσ3, σ2σ1 = iσ3 under this σ2 convention.
        let expected = sigma3().scale(c(0.0, -2.0));
        assert!(commutator(&sigma1(), &sigma2()).unwrap().distance(&expected) < 1e-15);
        let d = commutator(&ComplexMatrix::diag_real(&[1.0, 2.0]), &ComplexMatrix::diag_real(&[3.0, 4.0]))
            .unwrap();
        assert_eq!(d.max_abs(), 0.0);
        assert!(commutator(&id, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn kron_cases() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        assert_eq!(
            kron(&ComplexMatrix::diag_real(&[1.0, 0.0]), &ComplexMatrix::diag_real(&[0.0, 1.0])),
            ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0])
        );
        assert_eq!(kron(&sigma1().conj(), &sigma1()), ComplexMatrix::adiag_real(&[1.0, 1.0, 1.0, 1.0]));
        let r = kron(&ComplexMatrix::zeros(2, 3), &ComplexMatrix::zeros(3, 1));
        assert_eq!((r.rows(), r.cols()), (6, 3));
    }

    #[test]
    fn vec_and_unvec() {
        let a = ComplexMatrix::from_real_rows(&[vec![11.0, 12.0], vec![21.0, 22.0]]).unwrap();
        let v: Vec<f64> = vec(&a).as_slice().iter().map(|z| z.re).collect();
        assert_eq!(v, [11.0, 21.0, 12.0, 22.0]);
        let v: Vec<f64> = vec(&sigma3()).as_slice().iter().map(|z| z.re).collect();
        assert_eq!(v, [1.0, 0.0, 0.0, -1.0]);
        let col = ComplexMatrix::column([1.0, 0.0, 0.0, 1.0].map(|x| c(x, 0.0)).to_vec());
        assert_eq!(unvec(&col, 2).unwrap(), ComplexMatrix::identity(2));
        let col = ComplexMatrix::column([1.0, 2.0, 3.0, 4.0].map(|x| c(x, 0.0)).to_vec());
        assert_eq!(
            unvec(&col, 2).unwrap(),
            ComplexMatrix::from_real_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap()
        );
        assert_eq!(unvec(&vec(&sigma1()), 2).unwrap(), sigma1());
        assert!(unvec(&col, 3).is_err());
    }

    #[test]
    fn exp_cases() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(matrix_exp(&z).unwrap(), ComplexMatrix::identity(3));
        let e = matrix_exp(&ComplexMatrix::diag_real(&[1.0, -1.0])).unwrap();
        assert!((e[(0, 0)].re - std::f64::consts::E).abs() < 1e-14);
        assert!((e[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], c(0.0, 0.0));

        let theta = 0.7;
        let g = ComplexMatrix::adiag_real(&[1.0, 0.0, 0.0, 1.0]);
        let got = matrix_exp(&g.scale_real(theta)).unwrap();
        let expected = &(&ComplexMatrix::diag_real(&[0.0, 1.0, 1.0, 0.0])
            + &ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0]).scale_real(theta.cosh()))
            + &g.scale_real(theta.sinh());
        assert!(got.distance(&expected) < 1e-14);
        assert!(matrix_exp(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn exp_large_norm_relative_accuracy() {
        // Rotation generator: exp(θJ) has closed form cos/sin.
        let theta = 9.5;
        let j = ComplexMatrix::from_real_rows(&[vec![0.0, -theta], vec![theta, 0.0]]).unwrap();
        let e = matrix_exp(&j).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]])
                .unwrap();
        assert!(e.distance(&expected) <= 1e-12 * expected.frob_norm());
    }

    #[test]
    fn min_poly_cases() {
        assert_eq!(min_poly_degree(&ComplexMatrix::identity(3)).unwrap(), 1);
        assert_eq!(min_poly_degree(&ComplexMatrix::zeros(2, 2)).unwrap(), 1);
        assert_eq!(min_poly_degree(&sigma1()).unwrap(), 2);
        assert_eq!(min_poly_degree(&ComplexMatrix::diag_real(&[1.0, 2.0, 3.0])).unwrap(), 3);
        // Jordan block of size 3 with a repeated eigenvalue.
        let j = ComplexMatrix::from_real_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![0.0, 2.0, 1.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(min_poly_degree(&j).unwrap(), 3);
        assert_eq!(min_poly_degree(&ComplexMatrix::diag_real(&[1.0, 1.0, 2.0])).unwrap(), 2);
    }

    #[test]
    fn frob_cases() {
        assert_eq!(frob_norm(&ComplexMatrix::zeros(2, 2)), 0.0);
        assert_eq!(frob_norm(&ComplexMatrix::identity(4)), 2.0);
        assert!((frob_norm(&sigma2()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hermitian_eigen_cases() {
        assert_eq!(hermitian_eigenvalues(&ComplexMatrix::identity(2)).unwrap(), [1.0, 1.0]);
        assert_eq!(hermitian_eigenvalues(&sigma3()).unwrap(), [-1.0, 1.0]);
        let e = hermitian_eigenvalues(&sigma1()).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
        let e = hermitian_eigenvalues(&sigma2()).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
        let not_h = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&not_h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn hermitian_eigen_complex_3x3() {
        // Eigenvalues checked through the characteristic polynomial.
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.5)],
            vec![c(1.0, -1.0), c(-1.0, 0.0), c(0.3, 0.2)],
            vec![c(0.0, 0.5), c(0.3, -0.2), c(0.5, 0.0)],
        ])
        .unwrap();
        let eig = hermitian_eigenvalues(&a).unwrap();
        assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        for &l in &eig {
            let m = &a - &ComplexMatrix::identity(3).scale_real(l);
            let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
            assert!(det.norm() < 1e-12, "det {det} at {l}");
        }
        let tr: f64 = eig.iter().sum();
        assert!((tr - 1.5).abs() < 1e-13);
        let spec = Spectrum::hermitian(&a, 1e-9).unwrap();
        assert_eq!(spec.dimension(), 3);
        assert_eq!(Spectrum::hermitian(&ComplexMatrix::identity(3), 1e-9).unwrap().pairs, [(c(1.0, 0.0), 3)]);
    }

    #[test]
    fn rank_and_singular_values() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(rank(&a), 1);
        let sv = singular_values(&a);
        assert!((sv[0] - 5.0).abs() < 1e-14);
        assert_eq!(rank(&ComplexMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&ComplexMatrix::identity(4)), 4);
        let sv = singular_values(&sigma2());
        assert!((sv[0] - 1.0).abs() < 1e-15 && (sv[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn least_squares_recovers_combination() {
        let cols = vec![vec![c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)], vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, -1.0)]];
        let x = [c(0.5, -1.0), c(2.0, 0.25)];
        let rhs: Vec<C64> = (0..3).map(|i| x[0] * cols[0][i] + x[1] * cols[1][i]).collect();
        let got = least_squares(&cols, &rhs).unwrap();
        assert!((got[0] - x[0]).norm() < 1e-14 && (got[1] - x[1]).norm() < 1e-14);
        let dep = vec![cols[0].clone(), cols[0].iter().map(|z| z * 2.0).collect()];
        assert!(least_squares(&dep, &rhs).is_err());
    }
}
