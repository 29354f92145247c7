//! Scalar functions of time: a small expression language over `t` with
//! evaluation, printing, parsing and definite integration.
//!
//! Every expression the grammar admits is a finite sum of terms
//! `c · t^k · exp(r·t)` (sin and cos of affine arguments split into complex
//! exponentials), which is closed under antidifferentiation. Integrals are
//! taken from that expansion when it stays small and well conditioned, and
//! by adaptive Simpson quadrature otherwise.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quad;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Expansion size limits for the closed-form integration path.
const MAX_EXP_TERMS: usize = 256;
const MAX_POLY_POWER: u32 = 64;
/// Highest `t` power integrated in closed form against a non-trivial
/// exponential when the series path does not apply.
const MAX_CLOSED_FORM_POWER: u32 = 6;

/// Working interval `[lo, hi]` for time-dependent quantities; always
/// contains 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInterval(format!("bounds must be finite: [{lo}, {hi}]")));
        }
        if lo >= hi {
            return Err(Error::InvalidInterval(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if lo > 0.0 || hi < 0.0 {
            return Err(Error::InvalidInterval(format!("[{lo}, {hi}] does not contain 0")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideInterval { t, lo: self.lo, hi: self.hi })
        }
    }

    /// `n ≥ 2` uniformly spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let step = (self.hi - self.lo) / (n - 1) as f64;
        (0..n)
            .map(|k| if k + 1 == n { self.hi } else { self.lo + step * k as f64 })
            .collect()
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Expression tree in the time variable `t`.
///
/// Transcendental nodes carry their affine argument `a·t + b` directly.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn {
    Const(C64),
    T,
    Add(Box<ScalarFn>, Box<ScalarFn>),
    Mul(Box<ScalarFn>, Box<ScalarFn>),
    Neg(Box<ScalarFn>),
    Pow(Box<ScalarFn>, u32),
    Sin { a: C64, b: C64 },
    Cos { a: C64, b: C64 },
    Exp { a: C64, b: C64 },
}

impl ScalarFn {
    pub fn constant(c: C64) -> Self {
        ScalarFn::Const(c)
    }

    pub fn real(x: f64) -> Self {
        ScalarFn::Const(C64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        ScalarFn::Const(ZERO)
    }

    pub fn t() -> Self {
        ScalarFn::T
    }

    pub fn sin(a: C64, b: C64) -> Self {
        ScalarFn::Sin { a, b }
    }

    pub fn cos(a: C64, b: C64) -> Self {
        ScalarFn::Cos { a, b }
    }

    pub fn exp(a: C64, b: C64) -> Self {
        ScalarFn::Exp { a, b }
    }

    pub fn pow(self, k: u32) -> Self {
        ScalarFn::Pow(Box::new(self), k)
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            ScalarFn::Const(c) => *c,
            ScalarFn::T => C64::new(t, 0.0),
            ScalarFn::Add(l, r) => l.eval(t) + r.eval(t),
            ScalarFn::Mul(l, r) => l.eval(t) * r.eval(t),
            ScalarFn::Neg(x) => -x.eval(t),
            ScalarFn::Pow(x, k) => x.eval(t).powu(*k),
            ScalarFn::Sin { a, b } => (a * t + b).sin(),
            ScalarFn::Cos { a, b } => (a * t + b).cos(),
            ScalarFn::Exp { a, b } => (a * t + b).exp(),
        }
    }

    /// `∫_a^b f(τ) dτ`, exact where the expansion allows, quadrature
    /// (absolute tolerance 1e-12, depth 40) otherwise.
    pub fn integrate(&self, a: f64, b: f64) -> Result<C64> {
        match self.integrate_exact(a, b) {
            Some(v) => Ok(v),
            None => self.integrate_quadrature(a, b),
        }
    }

    /// Closed-form integral from the exponential-polynomial expansion, or
    /// `None` when the expansion is too large or badly conditioned.
    pub fn integrate_exact(&self, a: f64, b: f64) -> Option<C64> {
        let terms = self.expand()?;
        let reach = a.abs().max(b.abs());
        let mut total = ZERO;
        for term in &terms {
            total += term.coef * integrate_monomial_exp(term.power, term.rate, a, b, reach)?;
        }
        total.re.is_finite().then_some(total)
    }

    pub fn integrate_quadrature(&self, a: f64, b: f64) -> Result<C64> {
        quad::integrate_scalar(|t| self.eval(t), a, b, quad::DEFAULT_ABS_TOL, quad::DEFAULT_MAX_DEPTH)
    }

    /// Polynomial coefficients (ascending) if the tree is a polynomial in `t`.
    fn polynomial(&self) -> Option<Vec<C64>> {
        let p = match self {
            ScalarFn::Const(c) => vec![*c],
            ScalarFn::T => vec![ZERO, ONE],
            ScalarFn::Add(l, r) => {
                let (l, r) = (l.polynomial()?, r.polynomial()?);
                let mut out = vec![ZERO; l.len().max(r.len())];
                for (i, c) in l.iter().enumerate() {
                    out[i] += c;
                }
                for (i, c) in r.iter().enumerate() {
                    out[i] += c;
                }
                out
            }
            ScalarFn::Mul(l, r) => poly_mul(&l.polynomial()?, &r.polynomial()?)?,
            ScalarFn::Neg(x) => x.polynomial()?.into_iter().map(|c| -c).collect(),
            ScalarFn::Pow(x, k) => {
                let base = x.polynomial()?;
                let mut acc = vec![ONE];
                for _ in 0..*k {
                    acc = poly_mul(&acc, &base)?;
                }
                acc
            }
            ScalarFn::Sin { .. } | ScalarFn::Cos { .. } | ScalarFn::Exp { .. } => return None,
        };
        Some(p)
    }

    /// `(a, b)` with `self ≡ a·t + b`, if the tree is affine.
    pub fn as_affine(&self) -> Option<(C64, C64)> {
        let mut p = self.polynomial()?;
        while p.len() > 1 && p.last() == Some(&ZERO) {
            p.pop();
        }
        match p.as_slice() {
            [b] => Some((ZERO, *b)),
            [b, a] => Some((*a, *b)),
            _ => None,
        }
    }

    fn expand(&self) -> Option<Vec<ExpTerm>> {
        let terms = match self {
            ScalarFn::Const(c) => vec![ExpTerm { coef: *c, power: 0, rate: ZERO }],
            ScalarFn::T => vec![ExpTerm { coef: ONE, power: 1, rate: ZERO }],
            ScalarFn::Add(l, r) => {
                let mut out = l.expand()?;
                for term in r.expand()? {
                    push_term(&mut out, term);
                }
                out
            }
            ScalarFn::Mul(l, r) => mul_terms(&l.expand()?, &r.expand()?)?,
            ScalarFn::Neg(x) => {
                x.expand()?.into_iter().map(|t| ExpTerm { coef: -t.coef, ..t }).collect()
            }
            ScalarFn::Pow(x, k) => {
                let base = x.expand()?;
                let mut acc = vec![ExpTerm { coef: ONE, power: 0, rate: ZERO }];
                for _ in 0..*k {
                    acc = mul_terms(&acc, &base)?;
                }
                acc
            }
            ScalarFn::Exp { a, b } => vec![ExpTerm { coef: b.exp(), power: 0, rate: *a }],
            ScalarFn::Sin { a, b } => {
                // sin z = (e^{iz} − e^{−iz}) / 2i
                let i = C64::new(0.0, 1.0);
                vec![
                    ExpTerm { coef: (i * b).exp() / (2.0 * i), power: 0, rate: i * a },
                    ExpTerm { coef: -(-i * b).exp() / (2.0 * i), power: 0, rate: -i * a },
                ]
            }
            ScalarFn::Cos { a, b } => {
                let i = C64::new(0.0, 1.0);
                vec![
                    ExpTerm { coef: (i * b).exp() / 2.0, power: 0, rate: i * a },
                    ExpTerm { coef: (-i * b).exp() / 2.0, power: 0, rate: -i * a },
                ]
            }
        };
        (terms.len() <= MAX_EXP_TERMS).then_some(terms)
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Const(c) => write_complex(f, *c),
            ScalarFn::T => write!(f, "t"),
            ScalarFn::Sin { .. } | ScalarFn::Cos { .. } | ScalarFn::Exp { .. } => write!(f, "{self}"),
            _ => write!(f, "({self})"),
        }
    }
}

fn poly_mul(l: &[C64], r: &[C64]) -> Option<Vec<C64>> {
    if l.len() + r.len() > MAX_POLY_POWER as usize + 2 {
        return None;
    }
    let mut out = vec![ZERO; l.len() + r.len() - 1];
    for (i, a) in l.iter().enumerate() {
        for (j, b) in r.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Some(out)
}

/// `coef · t^power · exp(rate·t)`.
#[derive(Clone, Copy, Debug)]
struct ExpTerm {
    coef: C64,
    power: u32,
    rate: C64,
}

fn push_term(out: &mut Vec<ExpTerm>, term: ExpTerm) {
    match out.iter_mut().find(|o| o.power == term.power && o.rate == term.rate) {
        Some(o) => o.coef += term.coef,
        None => out.push(term),
    }
}

fn mul_terms(l: &[ExpTerm], r: &[ExpTerm]) -> Option<Vec<ExpTerm>> {
    let mut out = Vec::new();
    for x in l {
        for y in r {
            let power = x.power + y.power;
            if power > MAX_POLY_POWER {
                return None;
            }
            push_term(&mut out, ExpTerm { coef: x.coef * y.coef, power, rate: x.rate + y.rate });
        }
        if out.len() > MAX_EXP_TERMS {
            return None;
        }
    }
    Some(out)
}

/// `∫_a^b t^k e^{r t} dt`; `reach = max(|a|, |b|)`.
fn integrate_monomial_exp(k: u32, r: C64, a: f64, b: f64, reach: f64) -> Option<C64> {
    let kf = k as i32;
    if r == ZERO {
        let n = kf + 1;
        return Some(C64::new((b.powi(n) - a.powi(n)) / n as f64, 0.0));
    }
    let x = r.norm() * reach;
    if x <= 1.0 {
        // e^{rt} power series, integrated termwise.
        let mut sum = ZERO;
        let mut rm = ONE;
        let mut fact = 1.0;
        for m in 0..40 {
            if m > 0 {
                rm *= r;
                fact *= m as f64;
            }
            let n = kf + m + 1;
            sum += rm / fact * ((b.powi(n) - a.powi(n)) / n as f64);
            if x.powi(m) / fact < 1e-18 {
                break;
            }
        }
        return Some(sum);
    }
    if k > MAX_CLOSED_FORM_POWER {
        return None;
    }
    // F(t) = e^{rt} Σ_j (−1)^j k!/(k−j)! t^{k−j} / r^{j+1}
    let antideriv = |t: f64| -> C64 {
        let mut s = ZERO;
        let mut falling = 1.0;
        let mut rp = r;
        for j in 0..=k {
            if j > 0 {
                falling *= (k - j + 1) as f64;
                rp *= r;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += C64::new(sign * falling * t.powi((k - j) as i32), 0.0) / rp;
        }
        (r * t).exp() * s
    };
    Some(antideriv(b) - antideriv(a))
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_sign_negative() {
        write!(f, "({x})")
    } else {
        write!(f, "{x}")
    }
}

fn write_complex(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    if c.im == 0.0 {
        write_real(f, c.re)
    } else if c.re == 0.0 && !c.re.is_sign_negative() {
        write!(f, "({}i)", c.im)
    } else if c.im.is_sign_negative() {
        write!(f, "({}-{}i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}i)", c.re, c.im)
    }
}

/// Prints in the input grammar; `parse(&f.to_string())` evaluates exactly
/// like `f`.
impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Const(c) => write_complex(f, *c),
            ScalarFn::T => write!(f, "t"),
            ScalarFn::Add(l, r) => {
                l.fmt_atom(f)?;
                write!(f, "+")?;
                r.fmt_atom(f)
            }
            ScalarFn::Mul(l, r) => {
                l.fmt_atom(f)?;
                write!(f, "*")?;
                r.fmt_atom(f)
            }
            ScalarFn::Neg(x) => {
                write!(f, "-")?;
                x.fmt_atom(f)
            }
            ScalarFn::Pow(x, k) => {
                x.fmt_atom(f)?;
                write!(f, "^{k}")
            }
            ScalarFn::Sin { a, b } | ScalarFn::Cos { a, b } | ScalarFn::Exp { a, b } => {
                let name = match self {
                    ScalarFn::Sin { .. } => "sin",
                    ScalarFn::Cos { .. } => "cos",
                    _ => "exp",
                };
                write!(f, "{name}(")?;
                write_complex(f, *a)?;
                write!(f, "*t+")?;
                write_complex(f, *b)?;
                write!(f, ")")
            }
        }
    }
}

impl Serialize for ScalarFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScalarFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let src = String::deserialize(d)?;
        parse(&src).map_err(serde::de::Error::custom)
    }
}

impl From<C64> for ScalarFn {
    fn from(c: C64) -> Self {
        ScalarFn::Const(c)
    }
}

impl From<f64> for ScalarFn {
    fn from(x: f64) -> Self {
        ScalarFn::real(x)
    }
}

impl Add for ScalarFn {
    type Output = ScalarFn;

    fn add(self, rhs: ScalarFn) -> ScalarFn {
        ScalarFn::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for ScalarFn {
    type Output = ScalarFn;

    fn sub(self, rhs: ScalarFn) -> ScalarFn {
        ScalarFn::Add(Box::new(self), Box::new(ScalarFn::Neg(Box::new(rhs))))
    }
}

impl Mul for ScalarFn {
    type Output = ScalarFn;

    fn mul(self, rhs: ScalarFn) -> ScalarFn {
        ScalarFn::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Neg for ScalarFn {
    type Output = ScalarFn;

    fn neg(self) -> ScalarFn {
        ScalarFn::Neg(Box::new(self))
    }
}

pub fn eval(f: &ScalarFn, t: f64) -> C64 {
    f.eval(t)
}

pub fn integrate(f: &ScalarFn, a: f64, b: f64) -> Result<C64> {
    f.integrate(a, b)
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(C64),
    T,
    Func(&'static str),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'^' | b'(' | b')' => {
                let tok = match ch {
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'^' => Tok::Caret,
                    b'(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push((i, tok));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let x: f64 = text
                    .parse()
                    .map_err(|_| Error::Parse { pos: start, msg: format!("bad number '{text}'") })?;
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric());
                if imaginary {
                    i += 1;
                    out.push((start, Tok::Num(C64::new(0.0, x))));
                } else {
                    out.push((start, Tok::Num(C64::new(x, 0.0))));
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let tok = match &src[start..i] {
                    "t" => Tok::T,
                    "sin" => Tok::Func("sin"),
                    "cos" => Tok::Func("cos"),
                    "exp" => Tok::Func("exp"),
                    other => {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("unsupported name '{other}' (expected t, sin, cos or exp)"),
                        })
                    }
                };
                out.push((start, tok));
            }
            _ => {
                return Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character '{}'", src[i..].chars().next().unwrap_or('?')),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<ScalarFn> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarFn> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = lhs * self.unary()?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ScalarFn> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ScalarFn> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let at = self.offset();
            match self.peek() {
                Some(Tok::Num(c)) if c.im == 0.0 && c.re >= 0.0 && c.re.fract() == 0.0 && c.re <= u32::MAX as f64 => {
                    let k = c.re as u32;
                    self.pos += 1;
                    base = base.pow(k);
                }
                _ => return Err(Error::Parse { pos: at, msg: "exponent must be a non-negative integer".into() }),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ScalarFn> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(ScalarFn::Const(c))
            }
            Some(Tok::T) => {
                self.pos += 1;
                Ok(ScalarFn::T)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Func(name)) => {
                self.pos += 1;
                self.expect(Tok::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let (a, b) = arg.as_affine().ok_or_else(|| Error::Parse {
                    pos: at,
                    msg: format!("argument of {name} must be affine in t"),
                })?;
                Ok(match name {
                    "sin" => ScalarFn::Sin { a, b },
                    "cos" => ScalarFn::Cos { a, b },
                    _ => ScalarFn::Exp { a, b },
                })
            }
            Some(_) => self.err("expected a number, t, a function or '('"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses the expression grammar:
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := factor ('*' factor)*
/// factor := ('-' | '+') factor | primary ('^' uint)*
/// primary:= number ['i'] | 't' | func '(' expr ')' | '(' expr ')'
/// func   := sin | cos | exp      (argument must be affine in t)
/// ```
pub fn parse(src: &str) -> Result<ScalarFn> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let f = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn interval_rules() {
        assert!(Interval::new(0.0, 2.0).is_ok());
        assert!(Interval::new(-1.0, 1.0).is_ok());
        assert!(Interval::new(1.0, 2.0).is_err());
        assert!(Interval::new(2.0, 2.0).is_err());
        assert!(Interval::new(-2.0, -1.0).is_err());
        let g = Interval::new(0.0, 2.0).unwrap().grid(21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 2.0);
        assert!((g[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ScalarFn::constant(c(0.3, -1.0)).eval(5.0), c(0.3, -1.0));
        assert!((parse("sin(t)").unwrap().eval(PI / 2.0) - 1.0).norm() < 1e-15);
        assert_eq!(parse("2*t + exp(-t)").unwrap().eval(0.0), c(1.0, 0.0));
    }

    #[test]
    fn integrate_examples() {
        let v = ScalarFn::constant(c(2.0, -0.5)).integrate(0.0, 3.0).unwrap();
        assert!((v - c(6.0, -1.5)).norm() < 1e-14);
        let v = parse("sin(t)").unwrap().integrate(0.0, PI).unwrap();
        assert!((v - 2.0).norm() < 1e-14);
        let f = parse("t*exp(-t)").unwrap();
        let expected = 1.0 - 2.0 / E;
        assert!((f.integrate(0.0, 1.0).unwrap() - expected).norm() < 1e-14);
        assert!((f.integrate_quadrature(0.0, 1.0).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn integrate_closed_form_branch() {
        // |r|·reach > 1 forces the antiderivative formula.
        let f = parse("t^2*exp(-3*t)").unwrap();
        let exact = f.integrate_exact(0.0, 2.0).unwrap();
        let quad = f.integrate_quadrature(0.0, 2.0).unwrap();
        assert!((exact - quad).norm() < 1e-12);
        let f = parse("t*cos(5*t+1)").unwrap();
        let exact = f.integrate_exact(-1.0, 3.0).unwrap();
        let quad = f.integrate_quadrature(-1.0, 3.0).unwrap();
        assert!((exact - quad).norm() < 1e-11);
    }

    #[test]
    fn high_power_falls_back_to_quadrature() {
        let f = parse("t^9*exp(2*t)").unwrap();
        assert!(f.integrate_exact(0.0, 1.0).is_none());
        let v = f.integrate(0.0, 1.0).unwrap();
        // Series check: Σ 2^m/m! /(m+10)
        let mut s = 0.0;
        let mut term = 1.0;
        for m in 0..60 {
            if m > 0 {
                term *= 2.0 / m as f64;
            }
            s += term / (m + 10) as f64;
        }
        assert!((v.re - s).abs() < 1e-11);
    }

    #[test]
    fn parse_shapes() {
        let f = parse("0.5*sin(2*t)").unwrap();
        assert_eq!(
            f,
            ScalarFn::Mul(Box::new(ScalarFn::real(0.5)), Box::new(ScalarFn::Sin { a: c(2.0, 0.0), b: c(0.0, 0.0) }))
        );
        assert!(matches!(parse("exp(-t)+1").unwrap(), ScalarFn::Add(_, _)));
        let f = parse("1i*t").unwrap();
        assert_eq!(f.eval(2.0), c(0.0, 2.0));
        assert_eq!(f.as_affine(), Some((c(0.0, 1.0), c(0.0, 0.0))));
        assert_eq!(parse("t^2").unwrap().eval(3.0), c(9.0, 0.0));
        assert_eq!(parse("-t^2").unwrap().eval(3.0), c(-9.0, 0.0));
        assert_eq!(parse("2.5e-1").unwrap().eval(0.0), c(0.25, 0.0));
        assert_eq!(parse("(1+2i)*(1-2i)").unwrap().eval(0.0), c(5.0, 0.0));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse("1 + foo(t)") {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 4);
                assert!(msg.contains("foo"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("sin(t^2)"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse("t^1.5"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse("(t+1"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse("t t"), Err(Error::Parse { pos: 2, .. })));
        assert!(parse("").is_err());
        assert!(parse("t/2").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        for src in [
            "0.5*sin(2*t)",
            "exp(-t)+1",
            "1i*t",
            "-(t-0.1)^3*cos(-2*t+0.25i)",
            "(0.1-2i)*exp(1i*t-3)+t^2",
        ] {
            let f = parse(src).unwrap();
            let g = parse(&f.to_string()).unwrap();
            for k in 0..20 {
                let t = -2.0 + 0.23 * k as f64;
                assert_eq!(f.eval(t), g.eval(t), "{src} -> {f}");
            }
        }
    }

    #[test]
    fn serde_as_string() {
        let f = parse("2*t+1").unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: ScalarFn = serde_json::from_str(&s).unwrap();
        assert_eq!(f.eval(0.7), g.eval(0.7));
        assert!(serde_json::from_str::<ScalarFn>("\"sin(\"").is_err());
    }
}
