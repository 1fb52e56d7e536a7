//! Sparse multivariate polynomials with exact rational coefficients in three
//! variables, by default named `x`, `y`, `C`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CrpcError, Result};

pub const NVARS: usize = 3;
pub const DEFAULT_NAMES: [&str; NVARS] = ["x", "y", "C"];

/// Exponent vector ordered graded-lexicographically: higher total degree
/// first, then lexicographically by exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u32; NVARS]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // descending graded-lex, so BTreeMap iteration starts at the leading term
        other.degree().cmp(&self.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial([0; NVARS], c)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(rat(c, 1))
    }

    pub fn monomial(exp: [u32; NVARS], c: BigRational) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(Monomial(exp), c);
        p
    }

    /// The variable with index `i` (0 = x, 1 = y, 2 = C).
    pub fn var(i: usize) -> Self {
        let mut exp = [0; NVARS];
        exp[i] = 1;
        Self::monomial(exp, BigRational::one())
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
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

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: [u32; NVARS]) -> BigRational {
        self.terms
            .get(&Monomial(exp))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next()
    }

    /// Total degree over all variables; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Total degree in the first two variables.
    pub fn degree_xy(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.0[0] + m.0[1]).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = MultiPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Replaces variable `var` by the polynomial `value`.
    pub fn substitute(&self, var: usize, value: &MultiPoly) -> Self {
        let max = self.degree_in(var).unwrap_or(0) as usize;
        let mut powers = vec![MultiPoly::one()];
        for i in 1..=max {
            let next = &powers[i - 1] * value;
            powers.push(next);
        }
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut rest = m.0;
            let e = rest[var] as usize;
            rest[var] = 0;
            let term = MultiPoly::monomial(rest, c.clone());
            out = &out + &(&term * &powers[e]);
        }
        out
    }

    /// Replaces variable `var` by `factor * var`.
    pub fn scale_var(&self, var: usize, factor: &BigRational) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut f = BigRational::one();
            for _ in 0..m.0[var] {
                f *= factor;
            }
            out.add_term(*m, c * f);
        }
        out
    }

    /// Exchanges the roles of two variables.
    pub fn swap_vars(&self, a: usize, b: usize) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut e = m.0;
            e.swap(a, b);
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Quotient and remainder by `var^2 + 1`, treating the other variables as
    /// coefficients.
    pub fn div_rem_square_plus_one(&self, var: usize) -> (MultiPoly, MultiPoly) {
        let mut rem = self.clone();
        let mut quo = MultiPoly::zero();
        loop {
            let top = match rem.degree_in(var) {
                Some(d) if d >= 2 => d,
                _ => break,
            };
            let leading: Vec<(Monomial, BigRational)> = rem
                .terms
                .iter()
                .filter(|(m, _)| m.0[var] == top)
                .map(|(m, c)| (*m, c.clone()))
                .collect();
            for (m, c) in leading {
                let mut e = m.0;
                e[var] -= 2;
                // c x^top = c x^(top-2) (x^2 + 1) - c x^(top-2)
                quo.add_term(Monomial(e), c.clone());
                rem.add_term(m, -c.clone());
                rem.add_term(Monomial(e), -c);
            }
        }
        (quo, rem)
    }

    /// Divides out every factor `var^2 + 1`; returns the cofactor and the
    /// number of factors removed.
    pub fn strip_square_plus_one(&self, var: usize) -> (MultiPoly, u32) {
        let mut p = self.clone();
        let mut count = 0;
        while !p.is_zero() {
            let (q, r) = p.div_rem_square_plus_one(var);
            if !r.is_zero() {
                break;
            }
            p = q;
            count += 1;
        }
        (p, count)
    }

    /// Substitutes a rational value for variable `var`.
    pub fn evaluate_var(&self, var: usize, value: &BigRational) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut e = m.0;
            let mut f = c.clone();
            for _ in 0..e[var] {
                f *= value;
            }
            e[var] = 0;
            out.add_term(Monomial(e), f);
        }
        out
    }

    pub fn eval_f64(&self, vals: [f64; NVARS]) -> f64 {
        self.eval_terms(vals).0
    }

    /// Value and largest absolute term at a point.
    pub fn eval_terms(&self, vals: [f64; NVARS]) -> (f64, f64) {
        let mut sum = 0.0;
        let mut max: f64 = 0.0;
        for (m, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (v, e) in vals.iter().zip(m.0) {
                term *= v.powi(e as i32);
            }
            sum += term;
            max = max.max(term.abs());
        }
        (sum, max)
    }

    /// Integer coefficients with gcd one and a positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g_num = BigInt::zero();
        let mut l_den = BigInt::one();
        for c in self.terms.values() {
            g_num = g_num.gcd(c.numer());
            l_den = l_den.lcm(c.denom());
        }
        let mut factor = BigRational::new(l_den, g_num);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// Scaled to leading coefficient one.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// `true` if the two polynomials differ by a nonzero rational factor.
    pub fn equal_up_to_scalar(&self, other: &MultiPoly) -> bool {
        self.monic() == other.monic()
    }

    pub fn display_with(&self, names: [&str; NVARS]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = fmt_rational(c);
                for (name, e) in names.iter().zip(m.0) {
                    match e {
                        0 => {}
                        1 => s.push_str(&format!(" * {name}")),
                        _ => s.push_str(&format!(" * {name}^{e}")),
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: DEFAULT_NAMES.iter().map(|s| s.to_string()).collect(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| PolyTerm {
                    exp: m.0,
                    coef: fmt_rational(c),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self> {
        if json.vars.len() != NVARS {
            return Err(CrpcError::InvalidParameter(format!("expected {NVARS} variables")));
        }
        let mut p = MultiPoly::zero();
        for t in &json.terms {
            p.add_term(Monomial(t.exp), parse_rational(&t.coef)?);
        }
        Ok(p)
    }
}

/// `p/q`, or just `p` for integers.
pub fn fmt_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-0.375` or `2.5e-3` into an
/// exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || CrpcError::InvalidParameter(format!("not a rational number: {text:?}"));
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = BigInt::from_str(&format!("0{int}{frac}")).map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(DEFAULT_NAMES))
    }
}

impl FromStr for MultiPoly {
    type Err = CrpcError;

    /// Parses the output of `Display`: `coef * x^i * y^j * C^l` terms joined by
    /// ` + `.
    fn from_str(text: &str) -> Result<Self> {
        let bad = |m: String| CrpcError::InvalidParameter(m);
        let text = text.trim();
        if text == "0" {
            return Ok(MultiPoly::zero());
        }
        let mut p = MultiPoly::zero();
        for term in text.split(" + ") {
            let mut factors = term.split('*').map(str::trim);
            let coef = parse_rational(factors.next().unwrap_or(""))?;
            let mut exp = [0u32; NVARS];
            for fac in factors {
                let (name, e) = match fac.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<u32>().map_err(|_| bad(format!("bad exponent in {fac:?}")))?,
                    ),
                    None => (fac, 1),
                };
                let idx = DEFAULT_NAMES
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| bad(format!("unknown variable {name:?}")))?;
                exp[idx] += e;
            }
            p.add_term(Monomial(exp), coef);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exp: [u32; NVARS],
    pub coef: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<PolyTerm>,
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut acc: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut e = [0; NVARS];
                for i in 0..NVARS {
                    e[i] = ma.0[i] + mb.0[i];
                }
                let entry = acc.entry(Monomial(e)).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultiPoly { terms: acc }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Quotient of two polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RationalFunction {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(CrpcError::InvalidParameter("zero denominator".into()));
        }
        Ok(RationalFunction { num, den })
    }

    pub fn eval_f64(&self, vals: [f64; NVARS]) -> f64 {
        self.num.eval_f64(vals) / self.den.eval_f64(vals)
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction {
            num: &(&self.num * &other.den) - &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    /// Cross-multiplied equality.
    pub fn same_as(&self, other: &RationalFunction) -> bool {
        (&self.num * &other.den) == (&other.num * &self.den)
    }
}
