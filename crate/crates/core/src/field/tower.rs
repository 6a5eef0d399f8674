use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::RwLock;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{default_var_name, FieldElem, Monomial, Poly, Var, X_INDEX, Y_INDEX};
use crate::error::{Error, Result};

/// Index of a symbol inside a [`Tower`].
pub type SymbolId = usize;

/// How a symbol entered the tower.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolOrigin {
    /// User declaration with explicit derivative images.
    Declared,
    /// `level`-th derivative in the other variable of an antiderivative of
    /// `integrand` with respect to `var`.
    Integral {
        var: Var,
        integrand: FieldElem,
        level: u32,
    },
    /// Jet coordinate `∂x^i ∂y^j` of a free function symbol.
    Jet { root: SymbolId, i: u32, j: u32 },
}

#[derive(Clone, Debug)]
struct Symbol {
    name: String,
    dx: Option<FieldElem>,
    dy: Option<FieldElem>,
    origin: SymbolOrigin,
}

/// Read-only view of a symbol.
#[derive(Clone, Debug)]
pub struct SymbolInfo {
    pub id: SymbolId,
    pub name: String,
    pub origin: SymbolOrigin,
}

#[derive(Default)]
struct State {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymbolId>,
    jets: HashMap<(SymbolId, u32, u32), SymbolId>,
    integral_next: HashMap<SymbolId, SymbolId>,
    fresh: usize,
}

/// Append-only table of extension symbols and their derivative images.
///
/// Symbols are algebraically independent variables; their derivatives are
/// table driven. Reads may happen concurrently; declarations must be
/// serialized by the caller.
#[derive(Default)]
pub struct Tower {
    state: RwLock<State>,
}

fn var_index(id: SymbolId) -> usize {
    id + 2
}

impl Tower {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.state.read().unwrap().symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symbols(&self) -> Vec<SymbolInfo> {
        let st = self.state.read().unwrap();
        st.symbols
            .iter()
            .enumerate()
            .map(|(id, s)| SymbolInfo {
                id,
                name: s.name.clone(),
                origin: s.origin.clone(),
            })
            .collect()
    }

    pub fn lookup(&self, name: &str) -> Option<FieldElem> {
        let st = self.state.read().unwrap();
        st.by_name
            .get(name)
            .map(|&id| FieldElem::from_var_index(var_index(id)))
    }

    pub fn symbol(&self, id: SymbolId) -> FieldElem {
        FieldElem::from_var_index(var_index(id))
    }

    pub fn var_name(&self, v: usize) -> String {
        match v {
            X_INDEX => "x".into(),
            Y_INDEX => "y".into(),
            _ => {
                let st = self.state.read().unwrap();
                st.symbols
                    .get(v - 2)
                    .map(|s| s.name.clone())
                    .unwrap_or_else(|| default_var_name(v))
            }
        }
    }

    fn check_name(st: &State, name: &str) -> Result<()> {
        let valid = !name.is_empty()
            && name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(Error::InvalidDeclaration(format!("bad symbol name `{name}`")));
        }
        if matches!(name, "x" | "y" | "Dx" | "Dy") {
            return Err(Error::InvalidDeclaration(format!("`{name}` is reserved")));
        }
        if st.by_name.contains_key(name) {
            return Err(Error::InvalidDeclaration(format!(
                "symbol `{name}` already declared"
            )));
        }
        Ok(())
    }

    fn push(&self, name: String, origin: SymbolOrigin) -> Result<SymbolId> {
        let mut st = self.state.write().unwrap();
        Self::check_name(&st, &name)?;
        let id = st.symbols.len();
        st.by_name.insert(name.clone(), id);
        st.symbols.push(Symbol {
            name,
            dx: None,
            dy: None,
            origin,
        });
        Ok(id)
    }

    fn fresh_name(&self, prefix: &str) -> String {
        let mut st = self.state.write().unwrap();
        loop {
            st.fresh += 1;
            let name = format!("{prefix}{}", st.fresh);
            if !st.by_name.contains_key(&name) {
                return name;
            }
        }
    }

    /// Declares a symbol whose derivative images may mention the symbol
    /// itself. `images` receives the new symbol and returns `(dx, dy)`.
    ///
    /// Rejected when the images mention later symbols or when
    /// `∂y(dx) != ∂x(dy)`.
    pub fn declare_with(
        &self,
        name: &str,
        images: impl FnOnce(&FieldElem) -> Result<(FieldElem, FieldElem)>,
    ) -> Result<FieldElem> {
        let id = self.push(name.to_string(), SymbolOrigin::Declared)?;
        let sym = self.symbol(id);
        let outcome = images(&sym).and_then(|(dx, dy)| {
            let limit = var_index(id);
            for e in [&dx, &dy] {
                if let Some(&v) = e.vars().iter().find(|&&v| v > limit) {
                    return Err(Error::InvalidDeclaration(format!(
                        "derivative image of `{name}` refers to later symbol `{}`",
                        self.var_name(v)
                    )));
                }
            }
            {
                let mut st = self.state.write().unwrap();
                st.symbols[id].dx = Some(dx.clone());
                st.symbols[id].dy = Some(dy.clone());
            }
            let lhs = self.derive(&dx, Var::Y);
            let rhs = self.derive(&dy, Var::X);
            if lhs != rhs {
                return Err(Error::InvalidDeclaration(format!(
                    "derivations do not commute on `{name}`: ∂y(dx) = {}, ∂x(dy) = {}",
                    self.format(&lhs),
                    self.format(&rhs)
                )));
            }
            Ok(())
        });
        match outcome {
            Ok(()) => Ok(sym),
            Err(e) => {
                let mut st = self.state.write().unwrap();
                if st.symbols.len() == id + 1 {
                    st.symbols.pop();
                    st.by_name.remove(name);
                }
                Err(e)
            }
        }
    }

    /// Declares a symbol with fixed derivative images.
    pub fn declare(&self, name: &str, dx: FieldElem, dy: FieldElem) -> Result<FieldElem> {
        self.declare_with(name, |_| Ok((dx, dy)))
    }

    /// Declares an arbitrary function of `x, y`: its derivatives are fresh
    /// jet symbols created on demand.
    pub fn declare_free_function(&self, name: &str) -> Result<FieldElem> {
        let id = self.push(
            name.to_string(),
            SymbolOrigin::Jet {
                root: usize::MAX,
                i: 0,
                j: 0,
            },
        )?;
        let mut st = self.state.write().unwrap();
        st.symbols[id].origin = SymbolOrigin::Jet { root: id, i: 0, j: 0 };
        st.jets.insert((id, 0, 0), id);
        drop(st);
        Ok(self.symbol(id))
    }

    /// Declares a fresh free function with a generated name.
    pub fn fresh_free_function(&self, prefix: &str) -> FieldElem {
        let name = self.fresh_name(prefix);
        self.declare_free_function(&name)
            .expect("fresh names are unique")
    }

    /// Fresh symbol `F` with `∂var F = integrand`; derivatives of `F` in the
    /// other variable become further fresh symbols, created on demand.
    pub fn declare_integral(&self, integrand: &FieldElem, var: Var) -> FieldElem {
        let name = self.fresh_name("_F");
        let id = self
            .push(
                name,
                SymbolOrigin::Integral {
                    var,
                    integrand: integrand.clone(),
                    level: 0,
                },
            )
            .expect("fresh names are unique");
        let mut st = self.state.write().unwrap();
        match var {
            Var::X => st.symbols[id].dx = Some(integrand.clone()),
            Var::Y => st.symbols[id].dy = Some(integrand.clone()),
        }
        drop(st);
        self.symbol(id)
    }

    fn jet(&self, root: SymbolId, i: u32, j: u32) -> FieldElem {
        if let Some(&id) = self.state.read().unwrap().jets.get(&(root, i, j)) {
            return self.symbol(id);
        }
        let root_name = self.state.read().unwrap().symbols[root].name.clone();
        let mut name = format!("{root_name}_");
        name.extend(std::iter::repeat_n('x', i as usize));
        name.extend(std::iter::repeat_n('y', j as usize));
        while self.state.read().unwrap().by_name.contains_key(&name) {
            name.push('_');
        }
        let id = self
            .push(name, SymbolOrigin::Jet { root, i, j })
            .expect("jet names are unique");
        self.state.write().unwrap().jets.insert((root, i, j), id);
        self.symbol(id)
    }

    fn integral_successor(&self, id: SymbolId, var: Var, integrand: &FieldElem, level: u32) -> FieldElem {
        if let Some(&next) = self.state.read().unwrap().integral_next.get(&id) {
            return self.symbol(next);
        }
        let base = self.state.read().unwrap().symbols[id].name.clone();
        let mut name = format!("{base}_{}", var.other().name());
        while self.state.read().unwrap().by_name.contains_key(&name) {
            name.push('_');
        }
        let next = self
            .push(
                name,
                SymbolOrigin::Integral {
                    var,
                    integrand: integrand.clone(),
                    level: level + 1,
                },
            )
            .expect("derived names are unique");
        self.state.write().unwrap().integral_next.insert(id, next);
        self.symbol(next)
    }

    /// Derivative image of symbol `id` with respect to `v`, computing lazy
    /// images on first use.
    fn image(&self, id: SymbolId, v: Var) -> FieldElem {
        let (cached, origin) = {
            let st = self.state.read().unwrap();
            let s = &st.symbols[id];
            let cached = match v {
                Var::X => s.dx.clone(),
                Var::Y => s.dy.clone(),
            };
            (cached, s.origin.clone())
        };
        if let Some(e) = cached {
            return e;
        }
        let value = match origin {
            SymbolOrigin::Declared => FieldElem::zero(),
            SymbolOrigin::Jet { root, i, j } => match v {
                Var::X => self.jet(root, i + 1, j),
                Var::Y => self.jet(root, i, j + 1),
            },
            SymbolOrigin::Integral {
                var,
                integrand,
                level,
            } => {
                if v == var {
                    let mut e = integrand.clone();
                    for _ in 0..level {
                        e = self.derive(&e, var.other());
                    }
                    e
                } else {
                    self.integral_successor(id, var, &integrand, level)
                }
            }
        };
        let mut st = self.state.write().unwrap();
        let slot = match v {
            Var::X => &mut st.symbols[id].dx,
            Var::Y => &mut st.symbols[id].dy,
        };
        slot.get_or_insert(value).clone()
    }

    fn var_image(&self, var: usize, v: Var) -> FieldElem {
        match var {
            X_INDEX => {
                if v == Var::X {
                    FieldElem::one()
                } else {
                    FieldElem::zero()
                }
            }
            Y_INDEX => {
                if v == Var::Y {
                    FieldElem::one()
                } else {
                    FieldElem::zero()
                }
            }
            _ => self.image(var - 2, v),
        }
    }

    fn derive_poly(&self, p: &Poly, v: Var) -> FieldElem {
        let mut poly_acc = Poly::zero();
        let mut field_acc = FieldElem::zero();
        for var in p.vars() {
            let img = self.var_image(var, v);
            if img.is_zero() {
                continue;
            }
            let dp = p.partial(var);
            if img.is_polynomial() {
                poly_acc = poly_acc.add(&dp.mul(img.num()));
            } else {
                field_acc = field_acc.add(&FieldElem::from_poly(dp).mul(&img));
            }
        }
        field_acc.add(&FieldElem::from_poly(poly_acc))
    }

    /// Exact partial derivative.
    pub fn derive(&self, e: &FieldElem, v: Var) -> FieldElem {
        if e.is_constant() {
            return FieldElem::zero();
        }
        let dnum = self.derive_poly(e.num(), v);
        if e.is_polynomial() {
            return dnum;
        }
        let dden = self.derive_poly(e.den(), v);
        if dden.is_zero() {
            return dnum.mul(&FieldElem::from_fraction(Poly::one(), e.den().clone()).unwrap());
        }
        if dnum.is_polynomial() && dden.is_polynomial() {
            // With g = gcd(d, d'), e = d/g: (n' e - n d'/g) / (d e), and only
            // factors of g can still cancel.
            let (n, d, dd) = (e.num(), e.den(), dden.num());
            let g = d.gcd(dd);
            let ee = d.div_exact(&g).expect("gcd divides");
            let num = dnum.num().mul(&ee).sub(&n.mul(&dd.div_exact(&g).expect("gcd divides")));
            if num.is_zero() {
                return FieldElem::zero();
            }
            let den = d.mul(&ee);
            if g.is_constant() {
                return FieldElem::from_coprime(num, den);
            }
            let h = num.gcd(&g);
            if h.is_constant() {
                return FieldElem::from_coprime(num, den);
            }
            return FieldElem::from_coprime(
                num.div_exact(&h).expect("gcd divides"),
                den.div_exact(&h).expect("gcd divides"),
            );
        }
        let inv_den = FieldElem::from_fraction(Poly::one(), e.den().clone()).unwrap();
        dnum.mul(&inv_den).sub(&e.mul(&dden).mul(&inv_den))
    }

    /// `∂x^i ∂y^j e`.
    pub fn derive_n(&self, e: &FieldElem, i: u32, j: u32) -> FieldElem {
        let mut r = e.clone();
        for _ in 0..i {
            r = self.derive(&r, Var::X);
        }
        for _ in 0..j {
            r = self.derive(&r, Var::Y);
        }
        r
    }

    /// True when `e` has zero derivative with respect to `v` and involves only
    /// variables that are constant in `v`.
    fn is_constant_in(&self, e: &FieldElem, v: Var) -> bool {
        e.vars().iter().all(|&w| self.var_image(w, v).is_zero())
    }

    /// Heuristic antiderivative with respect to `v`.
    ///
    /// Succeeds on polynomials in `v` whose coefficients are constant in `v`,
    /// and on expressions that are `v`-derivatives of a symbol or of a
    /// rational function with the same denominator shape. Returns `None`
    /// otherwise so the caller can extend the tower.
    pub fn antiderivative(&self, e: &FieldElem, v: Var) -> Option<FieldElem> {
        if e.is_zero() {
            return Some(FieldElem::zero());
        }
        let vi = v.index();
        let den = FieldElem::from_fraction(Poly::one(), e.den().clone()).ok()?;
        if self.is_constant_in(&den, v) {
            // integrate the numerator term by term in v
            let mut ok = true;
            let terms = e.num().terms().iter().map(|(m, c)| {
                let k = m.exp(vi);
                let mut exps = m.exps().to_vec();
                if exps.len() <= vi {
                    exps.resize(vi + 1, 0);
                }
                exps[vi] = 0;
                let rest = FieldElem::from_poly(Poly::monomial(
                    Monomial::from_exps(exps.clone()),
                    BigRational::one(),
                ));
                if !self.is_constant_in(&rest, v) {
                    ok = false;
                }
                exps[vi] = k + 1;
                let q = c / BigRational::from_integer((k as i64 + 1).into());
                (Monomial::from_exps(exps), q)
            });
            let integrated = Poly::from_terms(terms.collect::<Vec<_>>());
            if ok {
                let f = FieldElem::from_poly(integrated).mul(&den);
                debug_assert_eq!(self.derive(&f, v), *e);
                return Some(f);
            }
        }
        // e = ∂v(s) for a symbol s, up to a rational constant
        for w in e.vars() {
            if w < 2 {
                continue;
            }
            let img = self.var_image(w, v);
            if img.is_zero() {
                continue;
            }
            if let Ok(ratio) = e.checked_div(&img) {
                if let Some(q) = ratio.constant_value() {
                    return Some(FieldElem::from_var_index(w).scale(&q));
                }
            }
        }
        None
    }

    /// Antiderivative with respect to `v`, extending the tower with a fresh
    /// symbol when no closed form is found.
    pub fn integrate(&self, e: &FieldElem, v: Var) -> FieldElem {
        self.antiderivative(e, v)
            .unwrap_or_else(|| self.declare_integral(e, v))
    }

    /// Renders `e` in the textual field syntax, using this tower's names.
    pub fn format(&self, e: &FieldElem) -> String {
        let names: Vec<String> = {
            let st = self.state.read().unwrap();
            st.symbols.iter().map(|s| s.name.clone()).collect()
        };
        format_elem(e, &|v| match v {
            X_INDEX => "x".to_string(),
            Y_INDEX => "y".to_string(),
            _ => names
                .get(v - 2)
                .cloned()
                .unwrap_or_else(|| default_var_name(v)),
        })
    }
}

fn format_monomial(m: &Monomial, name: &dyn Fn(usize) -> String) -> String {
    let mut out = String::new();
    for (v, &e) in m.exps().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !out.is_empty() {
            out.push('*');
        }
        out.push_str(&name(v));
        if e > 1 {
            let _ = write!(out, "^{e}");
        }
    }
    out
}

pub(crate) fn format_poly(p: &Poly, name: &dyn Fn(usize) -> String) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = format_monomial(m, name);
        if mono.is_empty() {
            let _ = write!(out, "{a}");
        } else if a.is_one() {
            out.push_str(&mono);
        } else {
            let _ = write!(out, "{a}*{mono}");
        }
    }
    out
}

fn needs_parens_as_factor(p: &Poly) -> bool {
    if p.len() > 1 {
        return true;
    }
    match p.terms().first() {
        Some((m, c)) => c.is_negative() || (!m.is_one() && !c.is_one()) || !c.is_integer(),
        None => false,
    }
}

pub(crate) fn format_elem(e: &FieldElem, name: &dyn Fn(usize) -> String) -> String {
    let num = format_poly(e.num(), name);
    if e.is_polynomial() {
        return num;
    }
    let den = format_poly(e.den(), name);
    let num = if e.num().len() > 1 {
        format!("({num})")
    } else {
        num
    };
    let den = if needs_parens_as_factor(e.den()) || den.contains('*') || den.contains('^') {
        format!("({den})")
    } else {
        den
    };
    format!("{num}/{den}")
}
