//! The noncommutative operator ring `K[Dx, Dy]`.
//!
//! Operators are finitely supported maps from `(i, j)` (standing for
//! `Dx^i Dy^j`) to field coefficients written on the left. Multiplication
//! follows the Leibniz rule `Dx f = f Dx + f_x`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, LazySum, Tower, Var};
use crate::schrodinger::SchrodingerOp;

/// `(x-order, y-order)` of a monomial `Dx^i Dy^j`.
pub type Exponent = (u32, u32);

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffOp {
    terms: BTreeMap<Exponent, FieldElem>,
}

/// Top orders `(d1, d2)` of a mixed-free operator
/// `alpha_i Dx^i + beta_j Dy^j + m0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BiDegree {
    pub d1: u32,
    pub d2: u32,
}

impl BiDegree {
    pub fn new(d1: u32, d2: u32) -> Self {
        BiDegree { d1, d2 }
    }

    pub fn total(&self) -> u32 {
        self.d1 + self.d2
    }
}

/// Result of reducing an operator modulo left multiples of `L`:
/// `M = normal_form + quotient * L`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub normal_form: DiffOp,
    pub quotient: DiffOp,
}

fn binomial(n: u32, k: u32) -> BigRational {
    let mut acc = BigInt::from(1);
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    BigRational::from_integer(acc)
}

/// Lazily filled table of `Dx^s Dy^t f`.
struct Jet<'a> {
    tower: &'a Tower,
    base: FieldElem,
    cache: HashMap<Exponent, FieldElem>,
}

impl<'a> Jet<'a> {
    fn new(tower: &'a Tower, base: &FieldElem) -> Self {
        let mut cache = HashMap::new();
        cache.insert((0, 0), base.clone());
        Jet {
            tower,
            base: base.clone(),
            cache,
        }
    }

    fn get(&mut self, s: u32, t: u32) -> FieldElem {
        if let Some(v) = self.cache.get(&(s, t)) {
            return v.clone();
        }
        if self.base.is_constant() {
            return FieldElem::zero();
        }
        let v = if t > 0 {
            let prev = self.get(s, t - 1);
            self.tower.derive(&prev, Var::Y)
        } else {
            let prev = self.get(s - 1, 0);
            self.tower.derive(&prev, Var::X)
        };
        self.cache.insert((s, t), v.clone());
        v
    }
}

fn accumulate(acc: &mut BTreeMap<Exponent, FieldElem>, e: Exponent, c: FieldElem) {
    if c.is_zero() {
        return;
    }
    match acc.get_mut(&e) {
        Some(existing) => {
            let sum = existing.add(&c);
            if sum.is_zero() {
                acc.remove(&e);
            } else {
                *existing = sum;
            }
        }
        None => {
            acc.insert(e, c);
        }
    }
}

impl DiffOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(FieldElem::one())
    }

    /// Multiplication by `f`.
    pub fn scalar(f: FieldElem) -> Self {
        Self::monomial(0, 0, f)
    }

    pub fn monomial(i: u32, j: u32, c: FieldElem) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        DiffOp { terms }
    }

    pub fn dx() -> Self {
        Self::monomial(1, 0, FieldElem::one())
    }

    pub fn dy() -> Self {
        Self::monomial(0, 1, FieldElem::one())
    }

    /// `Dv`.
    pub fn d(v: Var) -> Self {
        match v {
            Var::X => Self::dx(),
            Var::Y => Self::dy(),
        }
    }

    /// `Dv + c`.
    pub fn first_order(v: Var, c: FieldElem) -> Self {
        Self::d(v).add(&Self::scalar(c))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, FieldElem)>) -> Self {
        let mut acc = BTreeMap::new();
        for (e, c) in terms {
            accumulate(&mut acc, e, c);
        }
        DiffOp { terms: acc }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &FieldElem)> {
        self.terms.iter()
    }

    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().copied().collect()
    }

    pub fn coeff(&self, i: u32, j: u32) -> FieldElem {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(FieldElem::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0, 0).is_one()
    }

    /// Total order `max(i + j)`; zero for the zero operator.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    /// Highest power of `Dv` that occurs.
    pub fn order_in(&self, v: Var) -> u32 {
        self.terms
            .keys()
            .map(|&(i, j)| if v == Var::X { i } else { j })
            .max()
            .unwrap_or(0)
    }

    /// Restriction to the monomials of maximal total order.
    pub fn principal_symbol(&self) -> DiffOp {
        let ord = self.order();
        DiffOp {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i + j == ord)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn is_mixed_free(&self) -> bool {
        self.terms.keys().all(|&(i, j)| i == 0 || j == 0)
    }

    /// Only powers of `Dv` (including the zeroth) occur.
    pub fn is_ordinary_in(&self, v: Var) -> bool {
        self.terms.keys().all(|&(i, j)| match v {
            Var::X => j == 0,
            Var::Y => i == 0,
        })
    }

    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|&e| e == (0, 0))
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut acc = self.terms.clone();
        for (e, c) in &other.terms {
            accumulate(&mut acc, *e, c.clone());
        }
        DiffOp { terms: acc }
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        let mut acc = self.terms.clone();
        for (e, c) in &other.terms {
            accumulate(&mut acc, *e, c.neg());
        }
        DiffOp { terms: acc }
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    /// `f * P` (left multiplication acts on coefficients only).
    pub fn mul_left(&self, f: &FieldElem) -> DiffOp {
        if f.is_zero() {
            return DiffOp::zero();
        }
        DiffOp {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.mul(f)))
                .collect(),
        }
    }

    /// `P * f` as an operator.
    pub fn mul_right(&self, f: &FieldElem, tower: &Tower) -> DiffOp {
        self.compose(&DiffOp::scalar(f.clone()), tower)
    }

    /// Ring product `self * other`.
    pub fn compose(&self, other: &DiffOp, tower: &Tower) -> DiffOp {
        if self.is_zero() || other.is_zero() {
            return DiffOp::zero();
        }
        let mut sums: BTreeMap<Exponent, LazySum> = BTreeMap::new();
        for (&(k, l), q) in &other.terms {
            let mut jet = Jet::new(tower, q);
            for (&(i, j), p) in &self.terms {
                for s in 0..=i {
                    let bs = binomial(i, s);
                    for t in 0..=j {
                        let dq = jet.get(s, t);
                        if dq.is_zero() {
                            continue;
                        }
                        sums.entry((i - s + k, j - t + l))
                            .or_default()
                            .add_product(p, &dq, &(&bs * binomial(j, t)));
                    }
                }
            }
        }
        let terms = sums
            .into_iter()
            .map(|(e, s)| (e, s.finish()))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        DiffOp { terms }
    }

    /// `P^n` under composition.
    pub fn pow(&self, n: u32, tower: &Tower) -> DiffOp {
        let mut acc = DiffOp::one();
        for _ in 0..n {
            acc = acc.compose(self, tower);
        }
        acc
    }

    /// Applies the operator to a field element.
    pub fn apply(&self, f: &FieldElem, tower: &Tower) -> FieldElem {
        let mut jet = Jet::new(tower, f);
        let mut acc = FieldElem::zero();
        for (&(i, j), p) in &self.terms {
            let d = jet.get(i, j);
            acc = acc.add(&p.mul(&d));
        }
        acc
    }

    /// Variable of a monic first-order operator `Dv + d0` and its `d0`.
    fn as_monic_first_order(&self) -> Option<(Var, FieldElem)> {
        let v = if self.terms.contains_key(&(1, 0)) {
            Var::X
        } else if self.terms.contains_key(&(0, 1)) {
            Var::Y
        } else {
            return None;
        };
        let lead = match v {
            Var::X => (1, 0),
            Var::Y => (0, 1),
        };
        if !self.coeff(lead.0, lead.1).is_one() {
            return None;
        }
        if self.terms.keys().any(|&e| e != lead && e != (0, 0)) {
            return None;
        }
        Some((v, self.coeff(0, 0)))
    }

    /// Right division of an ordinary operator in `Dv` by a monic `Dv + d0`:
    /// returns `(q, r)` with `self = q * divisor + r`.
    pub fn right_divide_first_order(
        &self,
        divisor: &DiffOp,
        tower: &Tower,
    ) -> Result<(DiffOp, FieldElem)> {
        let (v, _) = divisor.as_monic_first_order().ok_or_else(|| {
            Error::MixedOperand("divisor must be a monic first-order Dx + d or Dy + d".into())
        })?;
        if !self.is_ordinary_in(v) {
            return Err(Error::MixedOperand(format!(
                "dividend must involve only powers of D{v}"
            )));
        }
        let mut rem = self.clone();
        let mut quot = DiffOp::zero();
        loop {
            let n = rem.order_in(v);
            if n == 0 {
                break;
            }
            let c = match v {
                Var::X => rem.coeff(n, 0),
                Var::Y => rem.coeff(0, n),
            };
            let (i, j) = match v {
                Var::X => (n - 1, 0),
                Var::Y => (0, n - 1),
            };
            let t = DiffOp::monomial(i, j, c);
            rem = rem.sub(&t.compose(divisor, tower));
            quot = quot.add(&t);
        }
        Ok((quot, rem.coeff(0, 0)))
    }

    /// Normal form modulo left multiples of `L`: removes every mixed
    /// monomial by subtracting `c * Dx^(i-1) Dy^(j-1) * L`, highest total
    /// order first.
    pub fn project(&self, l: &SchrodingerOp, tower: &Tower) -> Projection {
        let l_op = l.as_diffop();
        let mut shifted: HashMap<Exponent, DiffOp> = HashMap::new();
        let mut rem = self.clone();
        let mut quotient = BTreeMap::new();
        loop {
            let top = rem
                .terms
                .keys()
                .filter(|&&(i, j)| i >= 1 && j >= 1)
                .max_by_key(|&&(i, j)| (i + j, i))
                .copied();
            let Some((i, j)) = top else { break };
            let c = rem.coeff(i, j);
            let base = shifted
                .entry((i - 1, j - 1))
                .or_insert_with(|| DiffOp::monomial(i - 1, j - 1, FieldElem::one()).compose(&l_op, tower));
            rem = rem.sub(&base.mul_left(&c));
            accumulate(&mut quotient, (i - 1, j - 1), c);
        }
        Projection {
            normal_form: rem,
            quotient: DiffOp { terms: quotient },
        }
    }

    /// Bi-degree of the normal form modulo `L`.
    pub fn bidegree(&self, l: &SchrodingerOp, tower: &Tower) -> Result<BiDegree> {
        self.project(l, tower).normal_form.mixed_free_bidegree()
    }

    /// Bi-degree of an operator that is already mixed-free.
    pub fn mixed_free_bidegree(&self) -> Result<BiDegree> {
        if self.is_zero() {
            return Err(Error::ZeroOperator);
        }
        if !self.is_mixed_free() {
            return Err(Error::MixedOperand(
                "bi-degree is defined on mixed-free operators".into(),
            ));
        }
        Ok(BiDegree {
            d1: self.order_in(Var::X),
            d2: self.order_in(Var::Y),
        })
    }

    /// Conjugation `e^(-f) P e^f`, i.e. `Dx -> Dx + f_x`, `Dy -> Dy + f_y`.
    pub fn gauge(&self, f: &FieldElem, tower: &Tower) -> DiffOp {
        if f.is_zero() {
            return self.clone();
        }
        let gx = DiffOp::first_order(Var::X, tower.derive(f, Var::X));
        let gy = DiffOp::first_order(Var::Y, tower.derive(f, Var::Y));
        let mut xpow = vec![DiffOp::one()];
        let mut ypow = vec![DiffOp::one()];
        let mut acc = DiffOp::zero();
        for (&(i, j), c) in &self.terms {
            while xpow.len() <= i as usize {
                let next = xpow.last().unwrap().compose(&gx, tower);
                xpow.push(next);
            }
            while ypow.len() <= j as usize {
                let next = ypow.last().unwrap().compose(&gy, tower);
                ypow.push(next);
            }
            let mono = xpow[i as usize].compose(&ypow[j as usize], tower);
            acc = acc.add(&mono.mul_left(c));
        }
        acc
    }

    /// Splits a mixed-free operator into `(M^x, M^y, m0)`.
    pub fn split_mixed_free(&self) -> (DiffOp, DiffOp, FieldElem) {
        let mut mx = BTreeMap::new();
        let mut my = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            if i > 0 && j == 0 {
                mx.insert((i, j), c.clone());
            } else if j > 0 && i == 0 {
                my.insert((i, j), c.clone());
            }
        }
        (
            DiffOp { terms: mx },
            DiffOp { terms: my },
            self.coeff(0, 0),
        )
    }

    /// Renders in the operator DSL (`Dx`, `Dy`, `^`, `*`).
    pub fn format(&self, tower: &Tower) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(&(i, j), _)| std::cmp::Reverse((i + j, i)));
        let mut out = String::new();
        for (idx, (&(i, j), c)) in ordered.into_iter().enumerate() {
            let mut mono = String::new();
            for (name, e) in [("Dx", i), ("Dy", j)] {
                if e == 0 {
                    continue;
                }
                if !mono.is_empty() {
                    mono.push('*');
                }
                mono.push_str(name);
                if e > 1 {
                    let _ = write!(mono, "^{e}");
                }
            }
            let cs = tower.format(c);
            let neg_unit = c.neg().is_one();
            let term = if mono.is_empty() {
                cs
            } else if c.is_one() {
                mono
            } else if neg_unit {
                format!("-{mono}")
            } else {
                format!("({cs})*{mono}")
            };
            if idx > 0 {
                out.push_str(" + ");
            }
            out.push_str(&term);
        }
        out
    }
}

impl std::fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for (e, c) in &self.terms {
            m.entry(e, c);
        }
        m.finish()
    }
}
