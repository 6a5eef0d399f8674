//! Darboux transformations `N L = L1 M`, taken up to the equivalence
//! `(M, N) ~ (M + A L, N + L1 A)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, Tower, Var};
use crate::opring::{BiDegree, DiffOp, Exponent};
use crate::schrodinger::SchrodingerOp;

/// A verified intertwining pair. Every value of this type satisfies
/// `N L == L1 M` exactly and `M`, `N` share their principal symbol.
#[derive(Clone, Debug)]
pub struct DarbouxMorphism {
    source: SchrodingerOp,
    target: SchrodingerOp,
    m: DiffOp,
    n: DiffOp,
    normal_form: DiffOp,
    quotient: DiffOp,
    bidegree: BiDegree,
}

/// `N L - L1 M`; zero iff the pair intertwines.
pub fn intertwining_residual(
    l: &SchrodingerOp,
    m: &DiffOp,
    n: &DiffOp,
    l1: &SchrodingerOp,
    tower: &Tower,
) -> DiffOp {
    n.compose(&l.as_diffop(), tower)
        .sub(&l1.as_diffop().compose(m, tower))
}

pub fn verify_intertwining(
    l: &SchrodingerOp,
    m: &DiffOp,
    n: &DiffOp,
    l1: &SchrodingerOp,
    tower: &Tower,
) -> (bool, DiffOp) {
    let r = intertwining_residual(l, m, n, l1, tower);
    (r.is_zero(), r)
}

impl DarbouxMorphism {
    /// Fails unless `N L == L1 M` and the principal symbols of `M` and `N`
    /// agree.
    pub fn new(
        source: SchrodingerOp,
        target: SchrodingerOp,
        m: DiffOp,
        n: DiffOp,
        tower: &Tower,
    ) -> Result<Self> {
        let (ok, residual) = verify_intertwining(&source, &m, &n, &target, tower);
        if !ok {
            return Err(Error::IntertwiningFailed {
                residual: residual.format(tower),
            });
        }
        if m.principal_symbol() != n.principal_symbol() {
            return Err(Error::IntertwiningFailed {
                residual: format!(
                    "principal symbols differ: {} vs {}",
                    m.principal_symbol().format(tower),
                    n.principal_symbol().format(tower)
                ),
            });
        }
        Self::assemble(source, target, m, n, tower)
    }

    /// Builds a pair that intertwines by construction (products and
    /// rescalings of verified pairs), skipping the residual check.
    pub(crate) fn assemble(
        source: SchrodingerOp,
        target: SchrodingerOp,
        m: DiffOp,
        n: DiffOp,
        tower: &Tower,
    ) -> Result<Self> {
        let proj = m.project(&source, tower);
        let bidegree = proj.normal_form.mixed_free_bidegree()?;
        Ok(DarbouxMorphism {
            source,
            target,
            m,
            n,
            normal_form: proj.normal_form,
            quotient: proj.quotient,
            bidegree,
        })
    }

    pub fn identity(l: &SchrodingerOp) -> Self {
        DarbouxMorphism {
            source: l.clone(),
            target: l.clone(),
            m: DiffOp::one(),
            n: DiffOp::one(),
            normal_form: DiffOp::one(),
            quotient: DiffOp::zero(),
            bidegree: BiDegree::new(0, 0),
        }
    }

    pub fn source(&self) -> &SchrodingerOp {
        &self.source
    }

    pub fn target(&self) -> &SchrodingerOp {
        &self.target
    }

    pub fn m(&self) -> &DiffOp {
        &self.m
    }

    pub fn n(&self) -> &DiffOp {
        &self.n
    }

    /// `pi_L(M)`.
    pub fn normal_form(&self) -> &DiffOp {
        &self.normal_form
    }

    pub fn bidegree(&self) -> BiDegree {
        self.bidegree
    }

    /// `d1 + d2`.
    pub fn order(&self) -> u32 {
        self.bidegree.total()
    }

    /// The equivalent pair whose `M` has no mixed derivatives.
    pub fn standard_representative(&self, tower: &Tower) -> DarbouxMorphism {
        if self.quotient.is_zero() {
            return self.clone();
        }
        let n = self
            .n
            .sub(&self.target.as_diffop().compose(&self.quotient, tower));
        DarbouxMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            m: self.normal_form.clone(),
            n,
            normal_form: self.normal_form.clone(),
            quotient: DiffOp::zero(),
            bidegree: self.bidegree,
        }
    }

    /// `(M + A L, N + L1 A)`.
    pub fn perturb(&self, a: &DiffOp, tower: &Tower) -> Result<DarbouxMorphism> {
        let m = self.m.add(&a.compose(&self.source.as_diffop(), tower));
        let n = self.n.add(&self.target.as_diffop().compose(a, tower));
        DarbouxMorphism::new(self.source.clone(), self.target.clone(), m, n, tower)
    }

    /// `(g M, g N)` into `g L1 g^-1`.
    pub fn left_scale(&self, g: &FieldElem, tower: &Tower) -> Result<DarbouxMorphism> {
        let ginv = g.inv()?;
        let t = DiffOp::scalar(g.clone())
            .compose(&self.target.as_diffop(), tower)
            .compose(&DiffOp::scalar(ginv), tower);
        let target = SchrodingerOp::from_diffop(&t)?;
        // g N L = g L1 M = (g L1 g^-1)(g M)
        DarbouxMorphism::assemble(
            self.source.clone(),
            target,
            self.m.mul_left(g),
            self.n.mul_left(g),
            tower,
        )
    }

    /// `M(psi)`: maps `ker L` into `ker L1`.
    pub fn apply(&self, psi: &FieldElem, tower: &Tower) -> FieldElem {
        self.m.apply(psi, tower)
    }

    pub fn verify(&self, tower: &Tower) -> (bool, DiffOp) {
        verify_intertwining(&self.source, &self.m, &self.n, &self.target, tower)
    }
}

/// Same source, same target, and `M1 - M2` vanishes modulo `L`.
pub fn equivalent(m1: &DarbouxMorphism, m2: &DarbouxMorphism, tower: &Tower) -> Result<bool> {
    if m1.source != m2.source || m1.target != m2.target {
        return Err(Error::SourceTargetMismatch(
            "equivalence needs a common source and target".into(),
        ));
    }
    let proj = m1.m.sub(&m2.m).project(&m1.source, tower);
    if !proj.normal_form.is_zero() {
        return Ok(false);
    }
    let dn = m1.n.sub(&m2.n);
    Ok(dn == m1.target.as_diffop().compose(&proj.quotient, tower))
}

/// `(M2 M1, N2 N1)` for `m1: L -> L1`, `m2: L1 -> L2`.
pub fn compose_morphisms(
    m1: &DarbouxMorphism,
    m2: &DarbouxMorphism,
    tower: &Tower,
) -> Result<DarbouxMorphism> {
    if m1.target != m2.source {
        return Err(Error::SourceTargetMismatch(
            "target of the first morphism is not the source of the second".into(),
        ));
    }
    // N2 N1 L = N2 L1 M1 = L2 M2 M1
    DarbouxMorphism::assemble(
        m1.source.clone(),
        m2.target.clone(),
        m2.m.compose(&m1.m, tower),
        m2.n.compose(&m1.n, tower),
        tower,
    )
}

// ---------------------------------------------------------------------------
// Linear algebra over K

enum Linear {
    /// Particular solution (free unknowns at zero) and one direction per
    /// free unknown.
    Solved {
        particular: Vec<FieldElem>,
        directions: Vec<Vec<FieldElem>>,
    },
    Inconsistent(FieldElem),
}

fn solve_linear(mut rows: Vec<Vec<FieldElem>>, mut rhs: Vec<FieldElem>, unknowns: usize) -> Linear {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len())
            .filter(|&i| !rows[i][col].is_zero())
            .min_by_key(|&i| rows[i][col].size())
        else {
            continue;
        };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = rows[r][col].inv().expect("pivot is nonzero");
        for c in col..unknowns {
            rows[r][c] = rows[r][c].mul(&inv);
        }
        rhs[r] = rhs[r].mul(&inv);
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            for c in col..unknowns {
                let v = rows[i][c].sub(&f.mul(&rows[r][c]));
                rows[i][c] = v;
            }
            rhs[i] = rhs[i].sub(&f.mul(&rhs[r]));
        }
        pivots.push((r, col));
        r += 1;
    }
    if let Some(bad) = rhs[r..].iter().find(|v| !v.is_zero()) {
        return Linear::Inconsistent(bad.clone());
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free: Vec<usize> = (0..unknowns).filter(|c| !pivot_cols.contains(c)).collect();
    let mut particular = vec![FieldElem::zero(); unknowns];
    for &(row, col) in &pivots {
        particular[col] = rhs[row].clone();
    }
    let directions = free
        .iter()
        .map(|&fc| {
            let mut d = vec![FieldElem::zero(); unknowns];
            d[fc] = FieldElem::one();
            for &(row, col) in &pivots {
                d[col] = rows[row][fc].neg();
            }
            d
        })
        .collect();
    Linear::Solved {
        particular,
        directions,
    }
}

fn determinant(mut m: Vec<Vec<FieldElem>>) -> FieldElem {
    let n = m.len();
    let mut det = FieldElem::one();
    for col in 0..n {
        let Some(p) = (col..n)
            .filter(|&i| !m[i][col].is_zero())
            .min_by_key(|&i| m[i][col].size())
        else {
            return FieldElem::zero();
        };
        if p != col {
            m.swap(p, col);
            det = det.neg();
        }
        let piv = m[col][col].clone();
        det = det.mul(&piv);
        let inv = piv.inv().expect("pivot is nonzero");
        for i in col + 1..n {
            if m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].mul(&inv);
            for c in col..n {
                let v = m[i][c].sub(&f.mul(&m[col][c]));
                m[i][c] = v;
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// First-order transformations

/// Monic `Dv + m`: returns `v` and `m`.
fn monic_first_order(op: &DiffOp) -> Option<(Var, FieldElem)> {
    for v in [Var::X, Var::Y] {
        let lead: Exponent = match v {
            Var::X => (1, 0),
            Var::Y => (0, 1),
        };
        if op.coeff(lead.0, lead.1).is_one()
            && op.terms().all(|(&e, _)| e == lead || e == (0, 0))
        {
            return Some((v, op.coeff(0, 0)));
        }
    }
    None
}

/// Solutions `(N, L1)` of `N L = L1 M` for first-order `M = Dv + m`.
///
/// When the system is underdetermined the free coefficients are replaced by
/// fresh parameter symbols in `n`/`target`; `default_member` sets them to
/// zero.
#[derive(Clone, Debug)]
pub struct FirstOrderSolution {
    pub m: DiffOp,
    pub n: DiffOp,
    pub target: SchrodingerOp,
    pub parameters: Vec<FieldElem>,
    default_n: DiffOp,
    default_target: SchrodingerOp,
}

impl FirstOrderSolution {
    pub fn default_member(&self) -> (DiffOp, SchrodingerOp) {
        (self.default_n.clone(), self.default_target.clone())
    }

    pub fn into_morphism(self, source: &SchrodingerOp, tower: &Tower) -> Result<DarbouxMorphism> {
        DarbouxMorphism::new(
            source.clone(),
            self.default_target,
            self.m,
            self.default_n,
            tower,
        )
    }

    /// The morphism with the parameters left symbolic.
    pub fn family_morphism(&self, source: &SchrodingerOp, tower: &Tower) -> Result<DarbouxMorphism> {
        DarbouxMorphism::new(
            source.clone(),
            self.target.clone(),
            self.m.clone(),
            self.n.clone(),
            tower,
        )
    }
}

/// Left multipliers of the unknown target coefficients: `L1 M =
/// Dx Dy M + a1 Dx M + b1 Dy M + c1 M`.
fn target_columns(m: &DiffOp, tower: &Tower) -> [DiffOp; 4] {
    [
        DiffOp::monomial(1, 1, FieldElem::one()).compose(m, tower),
        DiffOp::dx().compose(m, tower),
        DiffOp::dy().compose(m, tower),
        m.clone(),
    ]
}

fn collect_rows(
    constant: &DiffOp,
    columns: &[DiffOp],
) -> (Vec<Vec<FieldElem>>, Vec<FieldElem>) {
    let mut support: Vec<Exponent> = constant.support();
    for c in columns {
        support.extend(c.support());
    }
    support.sort_unstable_by(|a, b| b.cmp(a));
    support.dedup();
    let rows = support
        .iter()
        .map(|&(i, j)| columns.iter().map(|c| c.coeff(i, j)).collect())
        .collect();
    let rhs = support
        .iter()
        .map(|&(i, j)| constant.coeff(i, j).neg())
        .collect();
    (rows, rhs)
}

pub fn solve_first_order(l: &SchrodingerOp, m: &DiffOp, tower: &Tower) -> Result<FirstOrderSolution> {
    let (v, _) = monic_first_order(m).ok_or_else(|| {
        Error::MixedOperand("M must have the shape Dx + m or Dy + m".into())
    })?;
    let lop = l.as_diffop();
    let [mxy, mx, my, m0] = target_columns(m, tower);
    // N L - L1 M with N = Dv + n:
    //   (Dv L - Dx Dy M) + n L - a1 Dx M - b1 Dy M - c1 M
    let constant = DiffOp::d(v).compose(&lop, tower).sub(&mxy);
    let columns = [mx.neg(), my.neg(), m0.neg(), lop];
    let (rows, rhs) = collect_rows(&constant, &columns);
    let (particular, directions) = match solve_linear(rows, rhs, 4) {
        Linear::Solved {
            particular,
            directions,
        } => (particular, directions),
        Linear::Inconsistent(r) => {
            return Err(Error::NoSolution {
                residual: tower.format(&r),
            })
        }
    };
    let build = |u: &[FieldElem]| {
        (
            DiffOp::first_order(v, u[3].clone()),
            SchrodingerOp::new(u[0].clone(), u[1].clone(), u[2].clone()),
        )
    };
    let (default_n, default_target) = build(&particular);
    let mut general = particular;
    let mut parameters = Vec::new();
    for d in &directions {
        let p = tower.fresh_free_function("n");
        for (g, di) in general.iter_mut().zip(d) {
            *g = g.add(&di.mul(&p));
        }
        parameters.push(p);
    }
    let (n, target) = build(&general);
    Ok(FirstOrderSolution {
        m: m.clone(),
        n,
        target,
        parameters,
        default_n,
        default_target,
    })
}

/// The unique `L1` with `N L = L1 M` for given `M`, `N`.
pub fn target_for(l: &SchrodingerOp, m: &DiffOp, n: &DiffOp, tower: &Tower) -> Result<SchrodingerOp> {
    let [mxy, mx, my, m0] = target_columns(m, tower);
    let constant = n.compose(&l.as_diffop(), tower).sub(&mxy);
    let (rows, rhs) = collect_rows(&constant, &[mx.neg(), my.neg(), m0.neg()]);
    match solve_linear(rows, rhs, 3) {
        Linear::Solved {
            particular,
            directions,
        } if directions.is_empty() => Ok(SchrodingerOp::new(
            particular[0].clone(),
            particular[1].clone(),
            particular[2].clone(),
        )),
        Linear::Solved { .. } => Err(Error::ZeroOperator),
        Linear::Inconsistent(r) => Err(Error::IntertwiningFailed {
            residual: tower.format(&r),
        }),
    }
}

/// Branch of the first-order construction from a kernel element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WronskianCase {
    /// `psi_v != 0`.
    I,
    /// `psi_v == 0`, `c != 0`.
    IIA,
    /// `psi_v == 0`, `c == 0`.
    IIB,
}

/// First-order transformation generated by `Dv - r` where `r = psi_v/psi`
/// for some `psi` in `ker L`. Only the logarithmic derivative is needed,
/// which lets callers work in a gauge where `psi` itself is not in `K`.
pub(crate) fn first_order_from_log_derivative(
    l: &SchrodingerOp,
    v: Var,
    r: &FieldElem,
    tower: &Tower,
) -> Result<(DarbouxMorphism, WronskianCase)> {
    let m = DiffOp::first_order(v, r.neg());
    let (case, n) = if !r.is_zero() {
        // With p the partner coefficient (b for Dx) this reads
        // N = Dv - r - (r + p)_v/(r + p); for p = 0 it is Dv - psi_vv/psi_v.
        let rp = r.add(l.partner(v));
        if rp.is_zero() {
            let sol = solve_first_order(l, &m, tower)?;
            (WronskianCase::I, sol.default_member().0)
        } else {
            let shift = r.add(&tower.derive(&rp, v).checked_div(&rp)?);
            (WronskianCase::I, DiffOp::first_order(v, shift.neg()))
        }
    } else if !l.c().is_zero() {
        let shift = tower.derive(l.c(), v).checked_div(l.c())?;
        (WronskianCase::IIA, DiffOp::first_order(v, shift.neg()))
    } else {
        let sol = solve_first_order(l, &m, tower)?;
        (WronskianCase::IIB, sol.default_member().0)
    };
    let target = target_for(l, &m, &n, tower)?;
    Ok((DarbouxMorphism::new(l.clone(), target, m, n, tower)?, case))
}

/// `M_psi = Dv - psi_v/psi` with its `N_psi` and target.
pub fn make_first_order_wronskian(
    l: &SchrodingerOp,
    psi: &FieldElem,
    v: Var,
    tower: &Tower,
) -> Result<(DarbouxMorphism, WronskianCase)> {
    l.certify_kernel(psi, tower)
        .map_err(|e| Error::NotCertified(e.to_string()))?;
    let r = tower.derive(psi, v).checked_div(psi)?;
    first_order_from_log_derivative(l, v, &r, tower)
}

/// Columns `f, Dx f, .., Dx^t f, Dy f, .., Dy^s f` of a `(t,s)`-Wronskian.
#[derive(Clone, Debug, PartialEq)]
pub struct WronskianSpec {
    pub t: u32,
    pub s: u32,
    /// The `t + s` fixed rows; the argument supplies the first row.
    pub rows: Vec<FieldElem>,
}

impl WronskianSpec {
    pub fn new(t: u32, s: u32, rows: Vec<FieldElem>) -> Result<Self> {
        if rows.len() != (t + s) as usize {
            return Err(Error::InvalidSplit(format!(
                "a ({t},{s})-Wronskian takes {} rows besides its argument, got {}",
                t + s,
                rows.len()
            )));
        }
        Ok(WronskianSpec { t, s, rows })
    }

    pub fn columns(&self) -> Vec<Exponent> {
        let mut cols = vec![(0, 0)];
        cols.extend((1..=self.t).map(|i| (i, 0)));
        cols.extend((1..=self.s).map(|j| (0, j)));
        cols
    }

    fn row(&self, f: &FieldElem, tower: &Tower) -> Vec<FieldElem> {
        self.columns()
            .into_iter()
            .map(|(i, j)| tower.derive_n(f, i, j))
            .collect()
    }
}

/// `W_{t,s}(f, f1, .., f_{t+s})`.
pub fn wronskian(spec: &WronskianSpec, f: &FieldElem, tower: &Tower) -> FieldElem {
    let mut m = vec![spec.row(f, tower)];
    m.extend(spec.rows.iter().map(|g| spec.row(g, tower)));
    determinant(m)
}

/// The operator `W_{m,n}(., psi_1, .., psi_{m+n})` normalized so that the
/// leading `Dx^m` coefficient is `(-1)^n` (division by `W_{m-1,n}`), or for
/// `m = 0` so that `Dy^n` is monic.
pub fn wronskian_operator(kernel: &[FieldElem], m: u32, n: u32, tower: &Tower) -> Result<DiffOp> {
    let spec = WronskianSpec::new(m, n, kernel.to_vec())?;
    if m + n == 0 {
        return Err(Error::InvalidSplit("split (0,0) has no kernel elements".into()));
    }
    let cols = spec.columns();
    let rows: Vec<Vec<FieldElem>> = spec.rows.iter().map(|g| spec.row(g, tower)).collect();
    let mut raw = Vec::with_capacity(cols.len());
    for (idx, &(i, j)) in cols.iter().enumerate() {
        let minor: Vec<Vec<FieldElem>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != idx)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let mut d = determinant(minor);
        if idx % 2 == 1 {
            d = d.neg();
        }
        raw.push(((i, j), d));
    }
    let lead_idx = cols.len() - 1 - if m > 0 { n as usize } else { 0 };
    let lead = raw[lead_idx].1.clone();
    if lead.is_zero() {
        return Err(Error::DegenerateWronskian);
    }
    // For m > 0 the cofactor of Dx^m is (-1)^m W_{m-1,n}; the overall sign
    // (-1)^(m+n) leaves (-1)^n on Dx^m.
    let norm = if m > 0 {
        let sign = if (m + n).is_multiple_of(2) { 1 } else { -1 };
        let lead_raw = if m.is_multiple_of(2) { lead.clone() } else { lead.neg() };
        lead_raw.mul(&FieldElem::from_int(sign)).inv()?
    } else {
        lead.inv()?
    };
    Ok(DiffOp::from_terms(
        raw.into_iter().map(|(e, c)| (e, c.mul(&norm))),
    ))
}

/// Wronskian-type transformation built from `m + n` kernel elements.
///
/// `M` is the normalized Wronskian operator; `N` and the target come from
/// composing first-order steps along the flag `psi_1, psi_2, ..` (the first
/// `m` in `x`, the rest in `y`) and rescaling the composite onto `M`.
pub fn make_wronskian_dt(
    l: &SchrodingerOp,
    kernel: &[FieldElem],
    m: u32,
    n: u32,
    tower: &Tower,
) -> Result<DarbouxMorphism> {
    if kernel.len() != (m + n) as usize || m + n == 0 {
        return Err(Error::InvalidSplit(format!(
            "split ({m},{n}) needs {} kernel elements, got {}",
            m + n,
            kernel.len()
        )));
    }
    for psi in kernel {
        l.certify_kernel(psi, tower)
            .map_err(|e| Error::NotCertified(e.to_string()))?;
    }
    let target_op = wronskian_operator(kernel, m, n, tower)?;
    for psi in kernel {
        debug_assert!(target_op.apply(psi, tower).is_zero());
    }

    let mut composite = DarbouxMorphism::identity(l);
    let mut images: Vec<FieldElem> = kernel.to_vec();
    for idx in 0..(m + n) as usize {
        let v = if (idx as u32) < m { Var::X } else { Var::Y };
        let phi = images[idx].clone();
        if phi.is_zero() {
            return Err(Error::DegenerateWronskian);
        }
        let (step, _) = make_first_order_wronskian(composite.target(), &phi, v, tower)?;
        for img in images.iter_mut().skip(idx + 1) {
            *img = step.apply(img, tower);
        }
        composite = compose_morphisms(&composite, &step, tower)?.standard_representative(tower);
    }

    let nf = composite.normal_form();
    let (&(i, j), lead) = target_op
        .terms()
        .max_by_key(|(&(i, j), _)| (i + j, i))
        .expect("normalized Wronskian operator is nonzero");
    let g = nf.coeff(i, j).checked_div(lead)?;
    if g.is_zero() || *nf != target_op.mul_left(&g) {
        return Err(Error::IntertwiningFailed {
            residual: nf.sub(&target_op.mul_left(&g)).format(tower),
        });
    }
    composite.left_scale(&g.inv()?, tower)
}
