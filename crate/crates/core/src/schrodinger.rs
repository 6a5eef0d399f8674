//! Operators `L = Dx Dy + a Dx + b Dy + c`, their Laplace invariants and
//! Laplace transformations.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::darboux::{solve_first_order, DarbouxMorphism};
use crate::error::{Error, Result};
use crate::field::{FieldElem, Tower, Var};
use crate::opring::DiffOp;

#[derive(Clone)]
pub struct SchrodingerOp {
    a: FieldElem,
    b: FieldElem,
    c: FieldElem,
    invariants: OnceLock<(FieldElem, FieldElem)>,
}

impl PartialEq for SchrodingerOp {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.c == other.c
    }
}

impl Eq for SchrodingerOp {}

impl Hash for SchrodingerOp {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
        self.c.hash(state);
    }
}

impl fmt::Debug for SchrodingerOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchrodingerOp")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .finish()
    }
}

/// Which Laplace transformation: `Right` is generated by `Dx + b` and needs
/// `k != 0`, `Left` by `Dy + a` and needs `h != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }

    /// The variable whose derivative leads the generating operator.
    pub fn var(self) -> Var {
        match self {
            Direction::Right => Var::X,
            Direction::Left => Var::Y,
        }
    }

    pub fn from_var(v: Var) -> Direction {
        match v {
            Var::X => Direction::Right,
            Var::Y => Direction::Left,
        }
    }

    pub fn invariant_name(self) -> &'static str {
        match self {
            Direction::Right => "k",
            Direction::Left => "h",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Right => "right",
            Direction::Left => "left",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(Direction::Right),
            "left" => Ok(Direction::Left),
            other => Err(Error::MixedOperand(format!(
                "direction must be right or left, got {other:?}"
            ))),
        }
    }
}

/// The two incomplete factorizations
/// `L = (Dy + a)(Dx + b) - k = (Dx + b)(Dy + a) - h`.
#[derive(Clone, Debug, PartialEq)]
pub struct IncompleteFactorizations {
    /// `(Dy + a, Dx + b)`, whose product is `L + k`.
    pub k_form: (DiffOp, DiffOp),
    /// `(Dx + b, Dy + a)`, whose product is `L + h`.
    pub h_form: (DiffOp, DiffOp),
    pub h: FieldElem,
    pub k: FieldElem,
}

/// A Laplace transformation `L -> L'` with its generating pair.
#[derive(Clone, Debug)]
pub struct LaplaceStep {
    pub direction: Direction,
    pub morphism: DarbouxMorphism,
}

/// Why a Laplace chain stopped before the requested length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// The needed invariant vanished: `L` factors there.
    Factorizable,
}

#[derive(Clone, Debug)]
pub struct LaplaceChain {
    pub direction: Direction,
    /// `operators[0]` is the input; each subsequent one is a transform of the
    /// previous.
    pub operators: Vec<SchrodingerOp>,
    pub steps: Vec<LaplaceStep>,
    pub termination: Option<Termination>,
    /// Each step carried the invariant it consumed over to the other slot:
    /// `h' == k` moving right, `k' == h` moving left.
    pub relations_hold: bool,
}

impl SchrodingerOp {
    pub fn new(a: FieldElem, b: FieldElem, c: FieldElem) -> Self {
        SchrodingerOp {
            a,
            b,
            c,
            invariants: OnceLock::new(),
        }
    }

    /// `Dx Dy` with no lower terms.
    pub fn wave() -> Self {
        Self::new(FieldElem::zero(), FieldElem::zero(), FieldElem::zero())
    }

    pub fn a(&self) -> &FieldElem {
        &self.a
    }

    pub fn b(&self) -> &FieldElem {
        &self.b
    }

    pub fn c(&self) -> &FieldElem {
        &self.c
    }

    /// The coefficient paired with `v` in the generating operator:
    /// `b` for `Dx + b`, `a` for `Dy + a`.
    pub fn partner(&self, v: Var) -> &FieldElem {
        match v {
            Var::X => &self.b,
            Var::Y => &self.a,
        }
    }

    pub fn as_diffop(&self) -> DiffOp {
        DiffOp::from_terms([
            ((1, 1), FieldElem::one()),
            ((1, 0), self.a.clone()),
            ((0, 1), self.b.clone()),
            ((0, 0), self.c.clone()),
        ])
    }

    pub fn from_diffop(op: &DiffOp) -> Result<Self> {
        let bad = op
            .terms()
            .any(|(&(i, j), _)| !matches!((i, j), (1, 1) | (1, 0) | (0, 1) | (0, 0)));
        if bad || !op.coeff(1, 1).is_one() {
            return Err(Error::NotSchrodinger(format!("{op:?}")));
        }
        Ok(Self::new(op.coeff(1, 0), op.coeff(0, 1), op.coeff(0, 0)))
    }

    /// `(h, k)` with `h = a_x + ab - c`, `k = b_y + ab - c`.
    pub fn laplace_invariants(&self, tower: &Tower) -> (FieldElem, FieldElem) {
        self.invariants
            .get_or_init(|| {
                let ab_c = self.a.mul(&self.b).sub(&self.c);
                let h = tower.derive(&self.a, Var::X).add(&ab_c);
                let k = tower.derive(&self.b, Var::Y).add(&ab_c);
                (h, k)
            })
            .clone()
    }

    pub fn h(&self, tower: &Tower) -> FieldElem {
        self.laplace_invariants(tower).0
    }

    pub fn k(&self, tower: &Tower) -> FieldElem {
        self.laplace_invariants(tower).1
    }

    /// The invariant that must be nonzero for a transform in `dir`.
    pub fn invariant_for(&self, dir: Direction, tower: &Tower) -> FieldElem {
        match dir {
            Direction::Right => self.k(tower),
            Direction::Left => self.h(tower),
        }
    }

    pub fn incomplete_factorizations(&self, tower: &Tower) -> IncompleteFactorizations {
        let (h, k) = self.laplace_invariants(tower);
        let mx = DiffOp::first_order(Var::Y, self.a.clone());
        let my = DiffOp::first_order(Var::X, self.b.clone());
        let l = self.as_diffop();
        debug_assert_eq!(mx.compose(&my, tower).sub(&DiffOp::scalar(k.clone())), l);
        debug_assert_eq!(my.compose(&mx, tower).sub(&DiffOp::scalar(h.clone())), l);
        IncompleteFactorizations {
            k_form: (mx.clone(), my.clone()),
            h_form: (my, mx),
            h,
            k,
        }
    }

    /// `Dx + b` for `Right`, `Dy + a` for `Left`.
    pub fn laplace_generator(&self, dir: Direction) -> DiffOp {
        let v = dir.var();
        DiffOp::first_order(v, self.partner(v).clone())
    }

    pub fn laplace_transform(&self, dir: Direction, tower: &Tower) -> Result<LaplaceStep> {
        if self.invariant_for(dir, tower).is_zero() {
            return Err(Error::VanishingInvariant {
                invariant: dir.invariant_name(),
                direction: dir.name(),
            });
        }
        let sol = solve_first_order(self, &self.laplace_generator(dir), tower)?;
        debug_assert!(sol.parameters.is_empty());
        let morphism = sol.into_morphism(self, tower)?;
        Ok(LaplaceStep {
            direction: dir,
            morphism,
        })
    }

    /// Iterates Laplace transformations: `steps > 0` moves right, `< 0` left.
    pub fn laplace_chain(&self, steps: i64, tower: &Tower) -> LaplaceChain {
        let dir = if steps < 0 {
            Direction::Left
        } else {
            Direction::Right
        };
        let mut chain = LaplaceChain {
            direction: dir,
            operators: vec![self.clone()],
            steps: Vec::new(),
            termination: None,
            relations_hold: true,
        };
        for _ in 0..steps.unsigned_abs() {
            let cur = chain.operators.last().unwrap();
            let step = match cur.laplace_transform(dir, tower) {
                Ok(step) => step,
                Err(_) => {
                    chain.termination = Some(Termination::Factorizable);
                    break;
                }
            };
            let next = step.morphism.target().clone();
            let carried = match dir {
                Direction::Right => next.h(tower) == cur.k(tower),
                Direction::Left => next.k(tower) == cur.h(tower),
            };
            chain.relations_hold &= carried;
            chain.operators.push(next);
            chain.steps.push(step);
        }
        chain
    }

    /// How many consecutive transforms in `dir` exist, up to `limit`.
    pub fn chain_extent(&self, dir: Direction, limit: usize, tower: &Tower) -> usize {
        let chain = self.laplace_chain(
            match dir {
                Direction::Right => limit as i64,
                Direction::Left => -(limit as i64),
            },
            tower,
        );
        chain.steps.len()
    }

    /// `e^(-f) L e^f`.
    pub fn gauge(&self, f: &FieldElem, tower: &Tower) -> SchrodingerOp {
        let fx = tower.derive(f, Var::X);
        let fy = tower.derive(f, Var::Y);
        let fxy = tower.derive(&fx, Var::Y);
        let c = self
            .c
            .add(&self.a.mul(&fx))
            .add(&self.b.mul(&fy))
            .add(&fxy)
            .add(&fx.mul(&fy));
        SchrodingerOp::new(self.a.add(&fy), self.b.add(&fx), c)
    }

    /// Gauges the coefficient paired with `v` to zero; returns the new
    /// operator and the gauge `f` (`f_v = -partner`).
    pub fn gauge_normalize(&self, v: Var, tower: &Tower) -> (SchrodingerOp, FieldElem) {
        let p = self.partner(v);
        if p.is_zero() {
            return (self.clone(), FieldElem::zero());
        }
        let f = tower.integrate(&p.neg(), v);
        let g = self.gauge(&f, tower);
        debug_assert!(g.partner(v).is_zero());
        (g, f)
    }

    /// `L -> L'` with `b' = 0`.
    pub fn gauge_normalize_b(&self, tower: &Tower) -> (SchrodingerOp, FieldElem) {
        self.gauge_normalize(Var::X, tower)
    }

    /// `L -> L'` with `a' = 0`.
    pub fn gauge_normalize_a(&self, tower: &Tower) -> (SchrodingerOp, FieldElem) {
        self.gauge_normalize(Var::Y, tower)
    }

    pub fn apply(&self, psi: &FieldElem, tower: &Tower) -> FieldElem {
        let psi_x = tower.derive(psi, Var::X);
        let psi_y = tower.derive(psi, Var::Y);
        let psi_xy = tower.derive(&psi_x, Var::Y);
        psi_xy
            .add(&self.a.mul(&psi_x))
            .add(&self.b.mul(&psi_y))
            .add(&self.c.mul(psi))
    }

    /// Accepts `psi` iff it is a nonzero element of `ker L`.
    pub fn certify_kernel(&self, psi: &FieldElem, tower: &Tower) -> Result<()> {
        if psi.is_zero() {
            return Err(Error::NotCertified("zero is not a kernel witness".into()));
        }
        let r = self.apply(psi, tower);
        if r.is_zero() {
            Ok(())
        } else {
            Err(Error::NotInKernel {
                residual: tower.format(&r),
            })
        }
    }

    /// The `c` that puts `psi` in the kernel for the given `a`, `b`.
    pub fn planted(a: FieldElem, b: FieldElem, psi: &FieldElem, tower: &Tower) -> Result<Self> {
        let psi_x = tower.derive(psi, Var::X);
        let psi_y = tower.derive(psi, Var::Y);
        let psi_xy = tower.derive(&psi_x, Var::Y);
        let num = psi_xy.add(&a.mul(&psi_x)).add(&b.mul(&psi_y));
        let c = num.checked_div(psi)?.neg();
        Ok(Self::new(a, b, c))
    }

    pub fn format(&self, tower: &Tower) -> String {
        self.as_diffop().format(tower)
    }
}

/// Certified kernel elements, keyed by the operator they annihilate.
#[derive(Clone, Debug, Default)]
pub struct HintRegistry {
    entries: Vec<(SchrodingerOp, Vec<FieldElem>)>,
}

impl HintRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn certify(&mut self, l: &SchrodingerOp, psi: FieldElem, tower: &Tower) -> Result<()> {
        l.certify_kernel(&psi, tower)?;
        match self.entries.iter_mut().find(|(owner, _)| owner == l) {
            Some((_, v)) => {
                if !v.contains(&psi) {
                    v.push(psi);
                }
            }
            None => self.entries.push((l.clone(), vec![psi])),
        }
        Ok(())
    }

    pub fn hints_for(&self, l: &SchrodingerOp) -> &[FieldElem] {
        self.entries
            .iter()
            .find(|(owner, _)| owner == l)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
