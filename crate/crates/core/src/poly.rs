//! Exact multivariate polynomials over the rationals.
//!
//! Text grammar accepted by [`Polynomial::parse`]:
//!
//! ```text
//! poly   := [sign] term (sign term)*
//! term   := factor ([*] factor)*
//! factor := number | 'x' index ['^' integer]
//! number := digits ['.' digits] ['/' digits]
//! ```
//!
//! Variables are 1-based (`x1 .. x{dim}`).

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{big_to_f64, format_big, parse_big, BigRational};

pub const MAX_DIM: usize = 8;

/// Monomial exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Multivariate polynomial with exact rational coefficients. Zero
/// coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<ExponentVector, BigRational>,
}

impl Polynomial {
    /// The zero polynomial. `dim` may be 0 for constants in zero variables.
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(ExponentVector::zero(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, BigRational::one())
    }

    /// The coordinate function `x_{j+1}` (0-based `j`).
    pub fn var(dim: usize, j: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(ExponentVector::unit(dim, j), BigRational::one());
        p
    }

    pub fn monomial(exp: Vec<u32>, c: BigRational) -> Self {
        let dim = exp.len();
        let mut p = Self::zero(dim);
        p.add_term(ExponentVector(exp), c);
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        if dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.len() });
            }
            p.add_term(ExponentVector(e), c);
        }
        Ok(p)
    }

    /// Adds `c * x^e`, collecting like monomials.
    pub fn add_term(&mut self, e: ExponentVector, c: BigRational) {
        debug_assert_eq!(e.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> BigRational {
        self.terms
            .get(&ExponentVector(e.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> Vec<ExponentVector> {
        self.terms.keys().cloned().collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.total_degree()).max().unwrap_or(0)
    }

    /// Value at the origin (the constant coefficient).
    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.dim])
    }

    pub fn filter<F: Fn(&ExponentVector) -> bool>(&self, keep: F) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to `x_{j+1}`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let k = e.0[j];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2.0[j] -= 1;
            out.add_term(e2, c * BigRational::from_integer(k.into()));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|j| self.derivative(j)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<Polynomial>> {
        let g = self.gradient();
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| g[i].derivative(j)).collect())
            .collect()
    }

    fn check_point(&self, n: usize) -> Result<()> {
        if n != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: n });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// Floating evaluation without the dimension check; callers guarantee
    /// `x.len() == self.dim()`.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = big_to_f64(c);
                for (xi, &k) in x.iter().zip(&e.0) {
                    if k > 0 {
                        m *= xi.powi(k as i32);
                    }
                }
                m
            })
            .sum()
    }

    pub fn evaluate_exact(&self, x: &[BigRational]) -> Result<BigRational> {
        self.check_point(x.len())?;
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (xi, &k) in x.iter().zip(&e.0) {
                if k > 0 {
                    m *= num::pow(xi.clone(), k as usize);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Coefficient-sum majorant `Σ |c_α| δ^{|α|}` of the sup norm on
    /// `[-δ, δ]^dim`.
    pub fn majorant(&self, delta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| big_to_f64(&c.abs()) * delta.powi(e.total_degree() as i32))
            .sum()
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        Parser { src: text.as_bytes(), pos: 0, dim }.parse()
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut acc: BTreeMap<ExponentVector, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                *acc.entry(ea.add(eb)).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial { dim: self.dim, terms: acc }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.keys().collect();
        keys.sort_by(|a, b| a.total_degree().cmp(&b.total_degree()).then(b.cmp(a)));
        for (i, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let vars: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("x{}", j + 1) } else { format!("x{}^{}", j + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", format_big(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_big(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn parse(mut self) -> Result<Polynomial> {
        let mut poly = Polynomial::zero(self.dim);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return self.err("empty input"),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    BigRational::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -BigRational::one()
                }
                Some(_) if first => BigRational::one(),
                Some(c) => return self.err(format!("expected '+' or '-', found {:?}", c as char)),
            };
            first = false;
            let (e, c) = self.term()?;
            poly.add_term(e, sign * c);
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(ExponentVector, BigRational)> {
        let mut exp = ExponentVector::zero(self.dim);
        let mut coeff = BigRational::one();
        let mut factors = 0;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    coeff *= self.number()?;
                }
                Some(b'x') | Some(b'X') => {
                    let (j, k) = self.variable()?;
                    exp.0[j] += k;
                }
                Some(b'*') if factors > 0 => {
                    self.pos += 1;
                    continue;
                }
                _ if factors == 0 => return self.err("expected a number or variable"),
                _ => break,
            }
            factors += 1;
        }
        Ok((exp, coeff))
    }

    fn number(&mut self) -> Result<BigRational> {
        let start = self.pos;
        self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.digits();
        }
        let mut text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let d = self.digits().to_string();
            if d.is_empty() {
                return self.err("expected denominator");
            }
            text = format!("{text}/{d}");
        }
        match parse_big(&text) {
            Some(v) => Ok(v),
            None => Err(Error::Syntax { pos: start, msg: format!("invalid number {text:?}") }),
        }
    }

    fn variable(&mut self) -> Result<(usize, u32)> {
        let start = self.pos;
        self.pos += 1;
        let idx = self.digits();
        if idx.is_empty() {
            return self.err("expected variable index after 'x'");
        }
        let index: usize = match idx.parse() {
            Ok(i) => i,
            Err(_) => return Err(Error::Syntax { pos: start, msg: "bad variable index".into() }),
        };
        if index == 0 || index > self.dim {
            return Err(Error::VariableOutOfRange { index, dim: self.dim });
        }
        let mut power = 1u32;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let p = self.digits();
            power = match p.parse() {
                Ok(v) => v,
                Err(_) => return self.err("expected integer exponent"),
            };
        }
        Ok((index - 1, power))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    #[serde(with = "crate::rational::serde_big")]
    coeff: BigRational,
    exp: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { coeff: c.clone(), exp: e.0.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        Polynomial::from_terms(raw.dim, raw.terms.into_iter().map(|t| (t.exp, t.coeff)))
            .map_err(serde::de::Error::custom)
    }
}

/// Reads a polynomial from either the JSON form or the text grammar. The text
/// form needs `dim`; when absent, the largest variable index is used.
pub fn read_polynomial(input: &str, dim: Option<usize>) -> Result<Polynomial> {
    let trimmed = input.trim();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| Error::Syntax {
            pos: e.column(),
            msg: e.to_string(),
        });
    }
    let dim = match dim {
        Some(d) => d,
        None => infer_dim(trimmed).max(1),
    };
    Polynomial::parse(trimmed, dim)
}

fn infer_dim(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' || bytes[i] == b'X' {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(v) = text[i + 1..j].parse::<usize>() {
                best = best.max(v);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}


/// Floating copy of a polynomial for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoly {
    pub dim: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl FloatPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = *c;
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        m *= xi.powi(k as i32);
                    }
                }
                m
            })
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (e, c) in &self.terms {
            for j in 0..self.dim {
                if e[j] == 0 {
                    continue;
                }
                let mut m = c * e[j] as f64;
                for (i, (xi, &k)) in x.iter().zip(e).enumerate() {
                    let k = if i == j { k - 1 } else { k };
                    if k > 0 {
                        m *= xi.powi(k as i32);
                    }
                }
                g[j] += m;
            }
        }
        g
    }
}

impl Polynomial {
    pub fn to_float(&self) -> FloatPoly {
        FloatPoly { dim: self.dim, terms: self.terms.iter().map(|(e, c)| (e.0.clone(), big_to_f64(c))).collect() }
    }
}
