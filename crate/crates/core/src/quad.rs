//! Adaptive Simpson quadrature for vector-valued (complex) integrands.
//!
//! Scalars and matrices both go through the same routine: a scalar is a
//! length-one vector, a matrix its row-major entries.

use crate::error::{Error, Result};
use crate::linalg::C64;

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Initial panels, so symmetric integrands cannot fool the first estimate.
const INITIAL_PANELS: usize = 8;

fn axpy(acc: &mut [C64], s: f64, x: &[C64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b * s;
    }
}

fn simpson(h: f64, fa: &[C64], fm: &[C64], fb: &[C64]) -> Vec<C64> {
    fa.iter().zip(fm).zip(fb).map(|((a, m), b)| (a + m * 4.0 + b) * (h / 6.0)).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

struct Ctx<'f, F> {
    f: &'f F,
    max_depth: u32,
}

impl<F> Ctx<'_, F>
where
    F: Fn(f64) -> Result<Vec<C64>>,
{
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        a: f64,
        b: f64,
        fa: &[C64],
        fm: &[C64],
        fb: &[C64],
        whole: Vec<C64>,
        tol: f64,
        depth: u32,
    ) -> Result<Vec<C64>> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm)?;
        let frm = (self.f)(rm)?;
        let left = simpson(m - a, fa, &flm, fm);
        let right = simpson(b - m, fm, &frm, fb);
        let mut sum = left.clone();
        axpy(&mut sum, 1.0, &right);
        let err = max_diff(&sum, &whole);
        // Rounding floor keeps tiny tolerances from recursing on noise.
        let floor = 64.0 * f64::EPSILON * max_abs(&sum);
        if err <= 15.0 * tol.max(floor) {
            // Richardson correction.
            for (s, w) in sum.iter_mut().zip(&whole) {
                *s += (*s - w) / 15.0;
            }
            return Ok(sum);
        }
        if depth >= self.max_depth {
            return Err(Error::Quadrature { a, b });
        }
        let mut l = self.refine(a, m, fa, &flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, &frm, fb, right, 0.5 * tol, depth + 1)?;
        axpy(&mut l, 1.0, &r);
        Ok(l)
    }
}

/// Integrates a vector-valued function over `[a, b]` (either orientation)
/// to absolute tolerance `tol` measured entrywise.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<Vec<C64>>
where
    F: Fn(f64) -> Result<Vec<C64>>,
{
    if a == b {
        let len = f(a)?.len();
        return Ok(vec![C64::new(0.0, 0.0); len]);
    }
    if b < a {
        let v = adaptive_simpson(f, b, a, tol, max_depth)?;
        return Ok(v.into_iter().map(|z| -z).collect());
    }
    let ctx = Ctx { f: &f, max_depth };
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut total: Option<Vec<C64>> = None;
    let mut lo = a;
    let mut flo = f(lo)?;
    for k in 0..INITIAL_PANELS {
        let hi = if k + 1 == INITIAL_PANELS { b } else { a + h * (k + 1) as f64 };
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid)?;
        let fhi = f(hi)?;
        let whole = simpson(hi - lo, &flo, &fmid, &fhi);
        let part = ctx.refine(lo, hi, &flo, &fmid, &fhi, whole, tol / INITIAL_PANELS as f64, 0)?;
        match total.as_mut() {
            Some(t) => axpy(t, 1.0, &part),
            None => total = Some(part),
        }
        lo = hi;
        flo = fhi;
    }
    Ok(total.unwrap_or_default())
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let v = adaptive_simpson(|t| Ok(vec![f(t)]), a, b, tol, max_depth)?;
    Ok(v[0])
}
