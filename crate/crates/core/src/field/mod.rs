//! The coefficient field: canonical rational functions in `x`, `y` and a
//! tower of declared extension symbols, with the two commuting derivations.

mod poly;
mod tower;

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use poly::{rat, Monomial, Poly};
pub use tower::{SymbolId, SymbolInfo, SymbolOrigin, Tower};

/// Variable index of `x` inside polynomials.
pub const X_INDEX: usize = 0;
/// Variable index of `y` inside polynomials.
pub const Y_INDEX: usize = 1;

/// One of the two independent variables, used to select a derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Var::X => X_INDEX,
            Var::Y => Y_INDEX,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Frac {
    num: Poly,
    den: Poly,
}

/// An element of the coefficient field.
///
/// Always stored as `num / den` with `gcd(num, den) = 1` and `den` monic in
/// the lexicographic term order, so structural equality is field equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem(Arc<Frac>);

/// Sum of scaled products built without intermediate normalization: terms
/// over the same denominator are added as polynomials and each group is
/// reduced once at the end.
#[derive(Default)]
pub(crate) struct LazySum {
    groups: HashMap<Poly, Poly>,
}

impl LazySum {
    /// Adds `k * a * b`.
    pub(crate) fn add_product(&mut self, a: &FieldElem, b: &FieldElem, k: &BigRational) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let (a, b) = (&a.0, &b.0);
        // products of monic denominators are monic
        let den = if a.den.is_one() {
            b.den.clone()
        } else if b.den.is_one() {
            a.den.clone()
        } else {
            a.den.mul(&b.den)
        };
        let num = a.num.mul(&b.num).scale(k);
        match self.groups.entry(den) {
            Entry::Occupied(mut e) => {
                let n = e.get().add(&num);
                e.insert(n);
            }
            Entry::Vacant(e) => {
                e.insert(num);
            }
        }
    }

    pub(crate) fn finish(self) -> FieldElem {
        let mut parts: Vec<FieldElem> = self
            .groups
            .into_iter()
            .filter(|(_, n)| !n.is_zero())
            .map(|(d, n)| FieldElem::from_fraction(n, d).expect("nonzero denominator"))
            .collect();
        parts.sort_by_key(|p| p.0.den.len());
        parts
            .iter()
            .fold(FieldElem::zero(), |acc, p| acc.add(p))
    }
}

impl FieldElem {
    fn from_parts_unchecked(num: Poly, den: Poly) -> Self {
        FieldElem(Arc::new(Frac { num, den }))
    }

    pub fn zero() -> Self {
        Self::from_parts_unchecked(Poly::zero(), Poly::one())
    }

    pub fn one() -> Self {
        Self::from_parts_unchecked(Poly::one(), Poly::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_poly(Poly::from_int(n))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::from_poly(Poly::constant(q))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(rat(n, d))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(BigRational::from_integer(n))
    }

    pub fn x() -> Self {
        Self::from_poly(Poly::var(X_INDEX))
    }

    pub fn y() -> Self {
        Self::from_poly(Poly::var(Y_INDEX))
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(Poly::var(v.index()))
    }

    pub(crate) fn from_var_index(v: usize) -> Self {
        Self::from_poly(Poly::var(v))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::from_parts_unchecked(p, Poly::one())
    }

    /// Canonicalizes `num / den`.
    pub fn from_fraction(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        if den.is_constant() {
            let inv = den.leading_coeff().recip();
            return Ok(Self::from_poly(num.scale(&inv)));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            Ok(Self::from_parts_unchecked(num, den))
        } else {
            let inv = lc.recip();
            Ok(Self::from_parts_unchecked(num.scale(&inv), den.scale(&inv)))
        }
    }

    pub fn num(&self) -> &Poly {
        &self.0.num
    }

    pub fn den(&self) -> &Poly {
        &self.0.den
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    /// A rational constant (no variables at all).
    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_one()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.0.den.is_one() {
            self.0.num.constant_value()
        } else {
            None
        }
    }

    /// Variable indices that occur in numerator or denominator.
    pub fn vars(&self) -> Vec<usize> {
        let mut v = self.0.num.vars();
        v.extend(self.0.den.vars());
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.0.num.contains_var(v) || self.0.den.contains_var(v)
    }

    /// Rough size measure (number of stored terms).
    pub fn size(&self) -> usize {
        self.0.num.len() + self.0.den.len()
    }

    pub fn neg(&self) -> Self {
        Self::from_parts_unchecked(self.0.num.neg(), self.0.den.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        if a.den.is_one() && b.den.is_one() {
            return Self::from_poly(a.num.add(&b.num));
        }
        if a.den == b.den {
            return Self::from_fraction(a.num.add(&b.num), a.den.clone()).unwrap();
        }
        // Henrici: with g = gcd(b, d), the sum a*(d/g) + c*(b/g) over b*d/g
        // can only share factors with g.
        let g = a.den.gcd(&b.den);
        if g.is_one() {
            let num = a.num.mul(&b.den).add(&b.num.mul(&a.den));
            if num.is_zero() {
                return Self::zero();
            }
            let den = a.den.mul(&b.den);
            return Self::normalized(num, den);
        }
        let bd = b.den.div_exact(&g).unwrap();
        let ad = a.den.div_exact(&g).unwrap();
        let num = a.num.mul(&bd).add(&b.num.mul(&ad));
        if num.is_zero() {
            return Self::zero();
        }
        let den = a.den.mul(&bd);
        let g2 = num.gcd(&g);
        if g2.is_one() {
            return Self::normalized(num, den);
        }
        Self::normalized(
            num.div_exact(&g2).expect("gcd divides numerator"),
            den.div_exact(&g2).expect("gcd divides denominator"),
        )
    }

    /// Scales a coprime pair so the denominator is monic.
    pub(crate) fn from_coprime(num: Poly, den: Poly) -> Self {
        Self::normalized(num, den)
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            Self::from_parts_unchecked(num, den)
        } else {
            let inv = lc.recip();
            Self::from_parts_unchecked(num.scale(&inv), den.scale(&inv))
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        if a.den.is_one() && b.den.is_one() {
            return Self::from_poly(a.num.mul(&b.num));
        }
        // cross-cancel before multiplying
        let g1 = a.num.gcd(&b.den);
        let g2 = b.num.gcd(&a.den);
        let an = a.num.div_exact(&g1).unwrap();
        let bd = b.den.div_exact(&g1).unwrap();
        let bn = b.num.div_exact(&g2).unwrap();
        let ad = a.den.div_exact(&g2).unwrap();
        let num = an.mul(&bn);
        let den = ad.mul(&bd);
        let lc = den.leading_coeff();
        let inv = lc.recip();
        Self::from_parts_unchecked(num.scale(&inv), den.scale(&inv))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let lc = self.0.num.leading_coeff();
        let inv = lc.recip();
        Ok(Self::from_parts_unchecked(
            self.0.den.scale(&inv),
            self.0.num.scale(&inv),
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self::from_parts_unchecked(self.0.num.scale(q), self.0.den.clone())
    }

    pub fn pow(&self, e: i32) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let e = e as u32;
        Ok(Self::from_parts_unchecked(
            self.0.num.pow(e),
            self.0.den.pow(e),
        ))
    }

    /// Replaces each variable index `v` by `values(v)`, returning `None` for
    /// indices that should be kept as they are.
    pub fn substitute(&self, values: &dyn Fn(usize) -> Option<FieldElem>) -> Result<FieldElem> {
        let eval = |p: &Poly| {
            p.eval_with(
                FieldElem::zero(),
                |q| FieldElem::from_rational(q.clone()),
                |v| values(v).unwrap_or_else(|| FieldElem::from_var_index(v)),
                |a, b| a.add(b),
                |a, b| a.mul(b),
            )
        };
        eval(&self.0.num).checked_div(&eval(&self.0.den))
    }
}

impl Default for FieldElem {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", tower::format_elem(self, &|v| default_var_name(v)))
    }
}

pub(crate) fn default_var_name(v: usize) -> String {
    match v {
        X_INDEX => "x".to_string(),
        Y_INDEX => "y".to_string(),
        _ => format!("s{}", v - 2),
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::from_int(n)
    }
}

impl From<Poly> for FieldElem {
    fn from(p: Poly) -> Self {
        FieldElem::from_poly(p)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl $tr<&FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: &FieldElem) -> FieldElem {
                FieldElem::$imp(self, rhs)
            }
        }
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: FieldElem) -> FieldElem {
                FieldElem::$imp(&self, &rhs)
            }
        }
        impl $tr<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: &FieldElem) -> FieldElem {
                FieldElem::$imp(&self, rhs)
            }
        }
        impl $tr<FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: FieldElem) -> FieldElem {
                FieldElem::$imp(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::neg(&self)
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::neg(self)
    }
}

impl Zero for FieldElem {
    fn zero() -> Self {
        FieldElem::zero()
    }
    fn is_zero(&self) -> bool {
        FieldElem::is_zero(self)
    }
}

impl One for FieldElem {
    fn one() -> Self {
        FieldElem::one()
    }
}
