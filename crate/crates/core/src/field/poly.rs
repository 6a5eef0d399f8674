//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are plain indices (`0` is `x`, `1` is `y`, higher indices are
//! extension symbols). Terms are kept sorted in descending lexicographic
//! order with variable `0` most significant, so the first term is always the
//! leading term.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::{smallvec, SmallVec};

type Exps = SmallVec<[u32; 4]>;

/// Exponent vector with trailing zeros trimmed. Kept inline for the few
/// variables that usually occur.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Exps);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Exps::new())
    }

    pub fn var(v: usize, e: u32) -> Self {
        if e == 0 {
            return Monomial::one();
        }
        let mut exps: Exps = smallvec![0; v + 1];
        exps[v] = e;
        Monomial(exps)
    }

    pub fn from_exps(exps: impl IntoIterator<Item = u32>) -> Self {
        let mut exps: Exps = exps.into_iter().collect();
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exp(&self, v: usize) -> u32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let exps = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial(exps)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut exps = self.0.clone();
        for (i, &e) in other.0.iter().enumerate() {
            if exps[i] < e {
                return None;
            }
            exps[i] -= e;
        }
        Some(Monomial::from_exps(exps))
    }

    fn gcd_with(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().min(other.0.len());
        Monomial::from_exps((0..n).map(|i| self.0[i].min(other.0[i])))
    }

    fn without(&self, v: usize) -> Monomial {
        if v >= self.0.len() {
            return self.clone();
        }
        let mut exps = self.0.clone();
        exps[v] = 0;
        Monomial::from_exps(exps)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.0.len().max(other.0.len());
        for i in 0..n {
            match self.exp(i).cmp(&other.exp(i)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, BigRational)>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{:?}", c, m)?;
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(v: usize) -> Self {
        Poly {
            terms: vec![(Monomial::var(v, 1), BigRational::one())],
        }
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut acc: HashMap<Monomial, BigRational> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(BigRational::zero) += c;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.terms
            .first()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of variable slots touched (one past the highest variable index present).
    pub fn var_span(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.0.len()).max().unwrap_or(0)
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    pub fn vars(&self) -> Vec<usize> {
        (0..self.var_span()).filter(|&v| self.contains_var(v)).collect()
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.mul(mono), c * k))
                .collect(),
        }
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly { terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.is_constant() {
            return other.scale(&self.terms[0].1);
        }
        if other.is_constant() {
            return self.scale(&other.terms[0].1);
        }
        // over the integers: no coefficient normalisation in the inner loop
        let (pa, sa) = IPoly::primitive_with_scale(self);
        let (pb, sb) = IPoly::primitive_with_scale(other);
        pa.mul(&pb).to_poly_scaled(&(sa * sb))
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Formal partial derivative with respect to variable `v`.
    pub fn partial(&self, v: usize) -> Poly {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exp(v);
            if e == 0 {
                return None;
            }
            let mut exps = m.0.clone();
            exps[v] -= 1;
            Some((
                Monomial::from_exps(exps),
                c * BigRational::from_integer(BigInt::from(e)),
            ))
        });
        // Lex order is preserved by lowering one exponent uniformly except where
        // terms collide, which cannot happen for distinct monomials with e > 0.
        let mut terms: Vec<_> = terms.collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "polynomial division by zero");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.is_constant() {
            let inv = d.terms[0].1.recip();
            return Some(self.scale(&inv));
        }
        for v in d.vars() {
            if d.degree_in(v) > self.degree_in(v) {
                return None;
            }
        }
        // Gauss: a quotient of primitive parts is again integral
        let (pn, sn) = IPoly::primitive_with_scale(self);
        let (pd, sd) = IPoly::primitive_with_scale(d);
        let q = pn.div_exact(&pd)?;
        Some(q.to_poly_scaled(&(sn / sd)))
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let first = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Monomial::one(),
        };
        it.fold(first, |acc, (m, _)| acc.gcd_with(m))
    }

    /// Coefficients in `v`: `result[k]` is the coefficient of `v^k`.
    pub fn to_univariate(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Monomial, BigRational)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            buckets[m.exp(v) as usize].push((m.without(v), c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut terms| {
                terms.sort_by(|a, b| b.0.cmp(&a.0));
                Poly { terms }
            })
            .collect()
    }

    pub fn from_univariate(coeffs: &[Poly], v: usize) -> Poly {
        let mut terms = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            let mono = Monomial::var(v, k as u32);
            for (m, q) in &c.terms {
                terms.push((m.mul(&mono), q.clone()));
            }
        }
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Evaluates the polynomial with each variable replaced by `values[v]`
    /// using caller-supplied ring operations.
    pub fn eval_with<T: Clone>(
        &self,
        zero: T,
        from_rational: impl Fn(&BigRational) -> T,
        value_of: impl Fn(usize) -> T,
        add: impl Fn(&T, &T) -> T,
        mul: impl Fn(&T, &T) -> T,
    ) -> T {
        let mut powers: HashMap<(usize, u32), T> = HashMap::new();
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = from_rational(c);
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers
                    .entry((v, e))
                    .or_insert_with(|| {
                        let base = value_of(v);
                        let mut p = base.clone();
                        for _ in 1..e {
                            p = mul(&p, &base);
                        }
                        p
                    })
                    .clone();
                t = mul(&t, &p);
            }
            acc = add(&acc, &t);
        }
        acc
    }

    /// Renames variables through `map` (old index -> new index).
    pub fn rename_vars(&self, map: impl Fn(usize) -> usize) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let mut exps: Vec<u32> = Vec::new();
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let w = map(v);
                if exps.len() <= w {
                    exps.resize(w + 1, 0);
                }
                exps[w] += e;
            }
            (Monomial::from_exps(exps), c.clone())
        }))
    }

    /// Monic greatest common divisor over the rationals.
    pub fn gcd(&self, other: &Poly) -> Poly {
        gcd(self, other)
    }
}

fn highest_var(a: &Poly, b: &Poly) -> Option<usize> {
    let span = a.var_span().max(b.var_span());
    (0..span)
        .rev()
        .find(|&v| a.contains_var(v) || b.contains_var(v))
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mono = ma.gcd_with(&mb);
    let a = if ma.is_one() {
        a.clone()
    } else {
        a.div_exact(&Poly::monomial(ma, BigRational::one())).unwrap()
    };
    let b = if mb.is_one() {
        b.clone()
    } else {
        b.div_exact(&Poly::monomial(mb, BigRational::one())).unwrap()
    };
    let rest = gcd_no_monomial(&a, &b);
    rest.mul_monomial(&mono, &BigRational::one()).monic()
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() == 1 || b.len() == 1 {
        // a monomial with no monomial content in common
        return Poly::one();
    }
    // cheap divisibility probes
    if a.len() <= b.len() {
        if b.div_exact(a).is_some() {
            return a.monic();
        }
    } else if a.div_exact(b).is_some() {
        return b.monic();
    }
    if let Some(h) = heu_gcd(&IPoly::from_poly(a), &IPoly::from_poly(b)) {
        return h.to_poly().monic();
    }
    let v = match highest_var(a, b) {
        Some(v) => v,
        None => return Poly::one(),
    };
    let in_a = a.contains_var(v);
    let in_b = b.contains_var(v);
    if !in_a {
        return gcd(a, &content(b, v));
    }
    if !in_b {
        return gcd(&content(a, v), b);
    }
    let ca = content(a, v);
    let cb = content(b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = primitive_gcd(&pa, &pb, v);
    c.mul(&g).monic()
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content(p: &Poly, v: usize) -> Poly {
    let coeffs = p.to_univariate(v);
    let mut acc = Poly::zero();
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        acc = gcd(&acc, c);
        if acc.is_constant() {
            return Poly::one();
        }
    }
    acc
}

fn udeg(p: &[Poly]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn trim(p: &mut Vec<Poly>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Pseudo-remainder of `a` by `b` as univariate polynomials over the coefficient ring.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = udeg(b).expect("nonzero divisor");
    let lcb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    trim(&mut r);
    let da = match udeg(&r) {
        Some(d) => d,
        None => return Vec::new(),
    };
    if da < db {
        return r;
    }
    let mut e = da - db + 1;
    while let Some(dr) = udeg(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(lcb);
        }
        for (k, bc) in b.iter().enumerate().take(db + 1) {
            let t = lr.mul(bc);
            r[k + shift] = r[k + shift].sub(&t);
        }
        trim(&mut r);
        e -= 1;
    }
    if e > 0 {
        let f = lcb.pow(e as u32);
        for c in r.iter_mut() {
            *c = c.mul(&f);
        }
    }
    r
}

/// Gcd of two polynomials that are primitive with respect to `v`, via the
/// subresultant remainder sequence.
fn primitive_gcd(a: &Poly, b: &Poly, v: usize) -> Poly {
    let mut ua = a.to_univariate(v);
    let mut ub = b.to_univariate(v);
    if udeg(&ua) < udeg(&ub) {
        std::mem::swap(&mut ua, &mut ub);
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let da = udeg(&ua).unwrap();
        let db = udeg(&ub).unwrap();
        let delta = (da - db) as u32;
        let r = prem(&ua, &ub);
        match udeg(&r) {
            None => break,
            Some(0) => return Poly::one(),
            Some(_) => {}
        }
        let divisor = g.mul(&h.pow(delta));
        let r: Vec<Poly> = r
            .iter()
            .map(|c| c.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        ua = ub;
        ub = r;
        g = ua[udeg(&ua).unwrap()].clone();
        h = if delta == 0 {
            h
        } else {
            // h <- g^delta / h^(delta - 1)
            g.pow(delta)
                .div_exact(&h.pow(delta - 1))
                .expect("subresultant division is exact")
        };
    }
    let res = Poly::from_univariate(&ub, v);
    let c = content(&res, v);
    res.div_exact(&c).expect("content divides").monic()
}

/// `c * s` for reduced `s`: only `gcd(c, den(s))` can cancel.
fn scale_int(c: &BigInt, s: &BigRational) -> BigRational {
    if s.denom().is_one() {
        return BigRational::from_integer(c * s.numer());
    }
    let g = c.gcd(s.denom());
    if g.is_one() {
        BigRational::new_raw(c * s.numer(), s.denom().clone())
    } else {
        BigRational::new_raw(c / &g * s.numer(), s.denom() / &g)
    }
}

/// Integer-coefficient polynomial used inside the heuristic gcd; same term
/// order as `Poly`.
#[derive(Clone, Debug, PartialEq)]
struct IPoly(Vec<(Monomial, BigInt)>);

impl IPoly {
    /// `p` scaled to integer coefficients.
    fn from_poly(p: &Poly) -> IPoly {
        let mut l = BigInt::one();
        for (_, c) in &p.terms {
            l = l.lcm(c.denom());
        }
        IPoly(
            p.terms
                .iter()
                .map(|(m, c)| (m.clone(), c.numer() * (&l / c.denom())))
                .collect(),
        )
    }

    /// `p = scale * prim` with `prim` primitive and positive-leading.
    fn primitive_with_scale(p: &Poly) -> (IPoly, BigRational) {
        let mut l = BigInt::one();
        for (_, c) in &p.terms {
            if !c.denom().is_one() {
                l = l.lcm(c.denom());
            }
        }
        let mut g = BigInt::zero();
        let scaled: Vec<(Monomial, BigInt)> = p
            .terms
            .iter()
            .map(|(m, c)| {
                let v = if l.is_one() { c.numer().clone() } else { c.numer() * (&l / c.denom()) };
                if !g.is_one() {
                    g = g.gcd(&v);
                }
                (m.clone(), v)
            })
            .collect();
        if scaled.first().is_some_and(|(_, c)| c.is_negative()) {
            g = -g;
        }
        let prim = if g.is_one() {
            IPoly(scaled)
        } else {
            IPoly(scaled.into_iter().map(|(m, c)| (m, c / &g)).collect())
        };
        (prim, BigRational::new(g, l))
    }

    fn to_poly_scaled(&self, s: &BigRational) -> Poly {
        if s.is_one() {
            return self.to_poly();
        }
        Poly {
            terms: self
                .0
                .iter()
                .map(|(m, c)| (m.clone(), scale_int(c, s)))
                .collect(),
        }
    }

    fn mul(&self, other: &IPoly) -> IPoly {
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(self.0.len() * other.0.len());
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                *acc.entry(ma.mul(mb)).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        IPoly(terms)
    }

    fn to_poly(&self) -> Poly {
        Poly {
            terms: self
                .0
                .iter()
                .map(|(m, c)| (m.clone(), BigRational::from_integer(c.clone())))
                .collect(),
        }
    }

    fn from_unsorted(mut terms: Vec<(Monomial, BigInt)>) -> IPoly {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, BigInt)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        IPoly(out)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.0.iter().all(|(m, _)| m.is_one())
    }

    fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.0 {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn div_int(&self, k: &BigInt) -> IPoly {
        IPoly(self.0.iter().map(|(m, c)| (m.clone(), c / k)).collect())
    }

    fn mul_int(&self, k: &BigInt) -> IPoly {
        IPoly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    /// Divided by its content, leading coefficient positive.
    fn primitive(&self) -> IPoly {
        let c = self.content();
        let mut q = if c.is_one() || c.is_zero() {
            self.clone()
        } else {
            self.div_int(&c)
        };
        if q.0.first().is_some_and(|(_, c)| c.is_negative()) {
            q = q.mul_int(&BigInt::from(-1));
        }
        q
    }

    fn max_norm(&self) -> BigInt {
        self.0
            .iter()
            .map(|(_, c)| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn contains_var(&self, v: usize) -> bool {
        self.0.iter().any(|(m, _)| m.exp(v) > 0)
    }

    fn var_span(&self) -> usize {
        self.0.iter().map(|(m, _)| m.0.len()).max().unwrap_or(0)
    }

    fn degree_in(&self, v: usize) -> u32 {
        self.0.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    /// `p(.., v = at, ..)`.
    fn eval_var(&self, v: usize, at: &BigInt) -> IPoly {
        let mut powers: Vec<BigInt> = vec![BigInt::one()];
        let terms = self
            .0
            .iter()
            .map(|(m, c)| {
                let e = m.exp(v) as usize;
                while powers.len() <= e {
                    let next = powers.last().unwrap() * at;
                    powers.push(next);
                }
                (m.without(v), c * &powers[e])
            })
            .collect();
        IPoly::from_unsorted(terms)
    }

    /// Recovers a polynomial in `v` from its value at `v = at` by reading
    /// off balanced base-`at` digits.
    fn interpolate(&self, v: usize, at: &BigInt) -> IPoly {
        let half: BigInt = at / 2;
        let mut out: Vec<(Monomial, BigInt)> = Vec::new();
        for (m, c) in &self.0 {
            let mut c = c.clone();
            let mut i = 0u32;
            while !c.is_zero() {
                let mut r = c.mod_floor(at);
                if r > half {
                    r -= at;
                }
                c = (c - &r) / at;
                if !r.is_zero() {
                    out.push((m.mul(&Monomial::var(v, i)), r));
                }
                i += 1;
            }
        }
        IPoly::from_unsorted(out)
    }

    /// Exact quotient over the integers, if any.
    fn div_exact(&self, d: &IPoly) -> Option<IPoly> {
        if self.is_zero() {
            return Some(IPoly(Vec::new()));
        }
        for (m, _) in &d.0 {
            for (v, &e) in m.0.iter().enumerate() {
                if e > self.degree_in(v) {
                    return None;
                }
            }
        }
        let (dm, dc) = d.0.first()?.clone();
        let mut rem: BTreeMap<Monomial, BigInt> = self.0.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((rm, rc)) = rem.pop_last() {
            let m = rm.div(&dm)?;
            let (q, r) = rc.div_rem(&dc);
            if !r.is_zero() {
                return None;
            }
            for (tm, tc) in &d.0[1..] {
                let key = tm.mul(&m);
                let delta = tc * &q;
                match rem.entry(key) {
                    Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                    Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                }
            }
            quot.push((m, q));
        }
        Some(IPoly(quot))
    }
}

/// Heuristic gcd of integer polynomials: evaluate the highest variable at a
/// large integer, recurse, reconstruct, and verify by division. `None` when
/// every evaluation point was unlucky.
fn heu_gcd(f: &IPoly, g: &IPoly) -> Option<IPoly> {
    if f.is_zero() {
        return Some(g.primitive().mul_int(&g.content()));
    }
    if g.is_zero() {
        return Some(f.primitive().mul_int(&f.content()));
    }
    if f.is_constant() || g.is_constant() {
        let c = f.content().gcd(&g.content());
        return Some(IPoly(vec![(Monomial::one(), c)]));
    }
    let span = f.var_span().max(g.var_span());
    let v = (0..span)
        .rev()
        .find(|&v| f.contains_var(v) || g.contains_var(v))?;
    let cf = f.content();
    let cg = g.content();
    let c = cf.gcd(&cg);
    let f = f.div_int(&cf);
    let g = g.div_int(&cg);
    let fnorm = f.max_norm();
    let gnorm = g.max_norm();
    let b: BigInt = BigInt::from(2) * (&fnorm).min(&gnorm) + 29;
    let lf = f.0[0].1.abs();
    let lg = g.0[0].1.abs();
    let mut at = std::cmp::max(
        std::cmp::min(b.clone(), b.sqrt() * 99),
        std::cmp::min(&fnorm / lf, &gnorm / lg) * 2 + 4,
    );
    for _ in 0..6 {
        let ff = f.eval_var(v, &at);
        let gg = g.eval_var(v, &at);
        if !ff.is_zero() && !gg.is_zero() {
            let h = heu_gcd(&ff, &gg)?;
            let h = h.interpolate(v, &at).primitive();
            if !h.is_zero() && f.div_exact(&h).is_some() && g.div_exact(&h).is_some() {
                return Some(h.mul_int(&c));
            }
        }
        at = at.clone() * at.sqrt().sqrt() * 73794 / 27011;
    }
    None
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
