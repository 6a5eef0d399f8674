//! Factorization of Darboux transformations into first-order steps.
//!
//! The pipeline first makes `M` ordinary by precomposing with Laplace
//! transformations, then peels first-order factors off the right: a
//! Wronskian step whenever a certified common kernel element of `L` and `M`
//! is known, a Laplace step otherwise.

use serde::{Deserialize, Serialize};

use crate::darboux::{compose_morphisms, equivalent, first_order_from_log_derivative, DarbouxMorphism};
use crate::error::{Error, Result};
use crate::field::{FieldElem, Tower, Var};
use crate::schrodinger::{Direction, HintRegistry, SchrodingerOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    LaplaceRight,
    LaplaceLeft,
    /// A Laplace transformation emitted to undo the reduction prefix.
    InverseLaplace,
    WronskianX,
    WronskianY,
}

impl StepKind {
    pub fn is_laplace(self) -> bool {
        matches!(
            self,
            StepKind::LaplaceRight | StepKind::LaplaceLeft | StepKind::InverseLaplace
        )
    }

    fn laplace(v: Var) -> StepKind {
        match v {
            Var::X => StepKind::LaplaceRight,
            Var::Y => StepKind::LaplaceLeft,
        }
    }

    fn wronskian(v: Var) -> StepKind {
        match v {
            Var::X => StepKind::WronskianX,
            Var::Y => StepKind::WronskianY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FactorStep {
    pub kind: StepKind,
    pub morphism: DarbouxMorphism,
    /// The kernel element a Wronskian step was built from.
    pub witness: Option<FieldElem>,
}

#[derive(Clone, Debug)]
pub struct FactorizationChain {
    pub input: DarbouxMorphism,
    pub steps: Vec<FactorStep>,
    /// Number of leading `InverseLaplace` steps from the reduction.
    pub prefix_len: usize,
    /// Composition of all steps is equivalent to the input.
    pub composed_equivalent: bool,
    pub diagnostics: Vec<String>,
}

impl FactorizationChain {
    pub fn source(&self) -> &SchrodingerOp {
        self.input.source()
    }

    pub fn target(&self) -> &SchrodingerOp {
        self.input.target()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Product of the steps, reduced to its standard representative.
    pub fn composed(&self, tower: &Tower) -> Result<DarbouxMorphism> {
        let mut acc = DarbouxMorphism::identity(self.source());
        for s in &self.steps {
            acc = compose_morphisms(&acc, &s.morphism, tower)?.standard_representative(tower);
        }
        Ok(acc)
    }

    pub fn classify_invertible(&self) -> bool {
        classify_invertible(self)
    }
}

/// Invertible iff every step is a Laplace transformation.
pub fn classify_invertible(chain: &FactorizationChain) -> bool {
    chain.steps.iter().all(|s| s.kind.is_laplace())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorizeOptions {
    /// How far the Laplace chain is probed in each direction.
    pub probe_depth: usize,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        FactorizeOptions { probe_depth: 16 }
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub prefix: Vec<FactorStep>,
    /// Equivalent on the far end of the prefix, ordinary in `var`.
    pub reduced: DarbouxMorphism,
    pub var: Var,
}

/// The transformation `L' -> L` undoing the Laplace step `L -> L'` in
/// direction `dir`, up to equivalence.
fn laplace_inverse(step: &DarbouxMorphism, dir: Direction, tower: &Tower) -> Result<DarbouxMorphism> {
    let back = step
        .target()
        .laplace_transform(dir.opposite(), tower)?
        .morphism;
    let round = compose_morphisms(step, &back, tower)?;
    let nf = round.normal_form();
    if !nf.is_scalar() {
        return Err(Error::IntertwiningFailed {
            residual: format!("Laplace round trip is not scalar: {}", nf.format(tower)),
        });
    }
    let g = nf.coeff(0, 0);
    let inv = back.left_scale(&g.inv()?, tower)?;
    if inv.target() != step.source() {
        return Err(Error::SourceTargetMismatch(
            "rescaled Laplace inverse does not return to the source".into(),
        ));
    }
    Ok(inv)
}

/// Precomposes `m` with Laplace transformations until `M` involves only one
/// of `Dx`, `Dy`.
///
/// Eliminating `Dy` walks `d2` steps left (needs `h != 0` along the way),
/// eliminating `Dx` walks `d1` steps right (needs `k != 0`). The shorter walk
/// wins; ties eliminate `Dy`.
pub fn reduce_to_ordinary(
    m: &DarbouxMorphism,
    opts: &FactorizeOptions,
    tower: &Tower,
) -> Result<Reduction> {
    let m = m.standard_representative(tower);
    let bd = m.bidegree();
    if bd.d2 == 0 || bd.d1 == 0 {
        let var = if bd.d2 == 0 { Var::X } else { Var::Y };
        return Ok(Reduction {
            prefix: Vec::new(),
            reduced: m,
            var,
        });
    }
    let l = m.source();
    // Probe only as far as each walk needs, capped by the configured depth;
    // the preferred direction first.
    let need_left = bd.d2 as usize;
    let need_right = bd.d1 as usize;
    let candidates = if bd.d2 <= bd.d1 {
        [(Direction::Left, need_left), (Direction::Right, need_right)]
    } else {
        [(Direction::Right, need_right), (Direction::Left, need_left)]
    };
    let mut extents = [(Direction::Left, 0usize), (Direction::Right, 0usize)];
    let mut chosen = None;
    for (dir, need) in candidates {
        let reach = l.chain_extent(dir, need.min(opts.probe_depth), tower);
        for e in extents.iter_mut().filter(|e| e.0 == dir) {
            e.1 = reach;
        }
        if reach >= need {
            chosen = Some((dir, need));
            break;
        }
    }
    let Some((dir, count)) = chosen else {
        return Err(Error::ChainTooShort {
            needed_left: need_left,
            needed_right: need_right,
            left: extents[0].1,
            right: extents[1].1,
        });
    };

    let mut prefix = Vec::with_capacity(count);
    let mut cur = m;
    for _ in 0..count {
        let step = cur.source().laplace_transform(dir, tower)?.morphism;
        let inv = laplace_inverse(&step, dir, tower)?;
        cur = compose_morphisms(&inv, &cur, tower)?.standard_representative(tower);
        prefix.push(FactorStep {
            kind: StepKind::InverseLaplace,
            morphism: step,
            witness: None,
        });
    }
    let var = match dir {
        Direction::Left => Var::X,
        Direction::Right => Var::Y,
    };
    debug_assert!(cur.m().is_ordinary_in(var));
    Ok(Reduction {
        prefix,
        reduced: cur,
        var,
    })
}

fn require_ordinary(m: &DarbouxMorphism, v: Var) -> Result<()> {
    if m.m().is_ordinary_in(v) {
        Ok(())
    } else {
        Err(Error::MixedOperand(format!("M must involve only powers of D{v}")))
    }
}

fn require_invariant(l: &SchrodingerOp, v: Var, tower: &Tower) -> Result<()> {
    let dir = Direction::from_var(v);
    if l.invariant_for(dir, tower).is_zero() {
        Err(Error::FactorizableOperator {
            invariant: dir.invariant_name(),
        })
    } else {
        Ok(())
    }
}

/// Splits off the Wronskian step `Dv - psi_v/psi` for a common kernel
/// element `psi` of `L` and `M`.
///
/// Works in the gauge where the coefficient paired with `v` vanishes and
/// maps everything back before returning.
pub fn split_wronskian(
    m: &DarbouxMorphism,
    psi: &FieldElem,
    v: Var,
    tower: &Tower,
) -> Result<(FactorStep, DarbouxMorphism)> {
    require_ordinary(m, v)?;
    let l = m.source();
    let in_l = l.apply(psi, tower);
    let in_m = m.apply(psi, tower);
    if psi.is_zero() || !in_l.is_zero() || !in_m.is_zero() {
        let r = if in_l.is_zero() { in_m } else { in_l };
        return Err(Error::WitnessInvalid {
            remainder: tower.format(&r),
        });
    }
    require_invariant(l, v, tower)?;

    let (lg, f) = l.gauge_normalize(v, tower);
    let mg = m.m().gauge(&f, tower);
    let ng = m.n().gauge(&f, tower);
    // log-derivative of e^(-f) psi
    let r = tower
        .derive(psi, v)
        .checked_div(psi)?
        .sub(&tower.derive(&f, v));
    let (first_g, _) = first_order_from_log_derivative(&lg, v, &r, tower)?;

    let (mq, rem) = mg.right_divide_first_order(first_g.m(), tower)?;
    if !rem.is_zero() {
        return Err(Error::WitnessInvalid {
            remainder: tower.format(&rem),
        });
    }
    if !ng.is_ordinary_in(v) {
        return Err(Error::MixedOperand(format!("N must involve only powers of D{v}")));
    }
    let (nq, rem) = ng.right_divide_first_order(first_g.n(), tower)?;
    if !rem.is_zero() {
        return Err(Error::WitnessInvalid {
            remainder: tower.format(&rem),
        });
    }

    let back = f.neg();
    let mid = first_g.target().gauge(&back, tower);
    let first = DarbouxMorphism::new(
        l.clone(),
        mid.clone(),
        first_g.m().gauge(&back, tower),
        first_g.n().gauge(&back, tower),
        tower,
    )?;
    // (N' L_psi - L1 M') M_psi = N L - L1 M = 0, and M_psi is not a zero
    // divisor, so the quotient pair intertwines.
    let rest = DarbouxMorphism::assemble(
        mid,
        m.target().clone(),
        mq.gauge(&back, tower),
        nq.gauge(&back, tower),
        tower,
    )?;
    Ok((
        FactorStep {
            kind: StepKind::wronskian(v),
            morphism: first,
            witness: Some(psi.clone()),
        },
        rest,
    ))
}

/// Splits off the Laplace transformation generated by `Dx + b` (`v = x`) or
/// `Dy + a` (`v = y`). A nonzero remainder certifies that the split does not
/// apply.
pub fn split_laplace(
    m: &DarbouxMorphism,
    v: Var,
    tower: &Tower,
) -> Result<(FactorStep, DarbouxMorphism)> {
    require_ordinary(m, v)?;
    let l = m.source();
    require_invariant(l, v, tower)?;
    let lap = l.laplace_transform(Direction::from_var(v), tower)?.morphism;
    let (mq, rem) = m.m().right_divide_first_order(lap.m(), tower)?;
    if !rem.is_zero() {
        return Err(Error::NonzeroRemainder {
            what: "M",
            remainder: tower.format(&rem),
        });
    }
    if !m.n().is_ordinary_in(v) {
        return Err(Error::NonzeroRemainder {
            what: "N",
            remainder: format!("N is not ordinary in D{v}: {}", m.n().format(tower)),
        });
    }
    let (nq, rem) = m.n().right_divide_first_order(lap.n(), tower)?;
    if !rem.is_zero() {
        return Err(Error::NonzeroRemainder {
            what: "N",
            remainder: tower.format(&rem),
        });
    }
    // intertwines for the same reason as in `split_wronskian`
    let rest = DarbouxMorphism::assemble(lap.target().clone(), m.target().clone(), mq, nq, tower)?;
    Ok((
        FactorStep {
            kind: StepKind::laplace(v),
            morphism: lap,
            witness: None,
        },
        rest,
    ))
}

fn transport(hints: &[FieldElem], step: &DarbouxMorphism, tower: &Tower) -> Vec<FieldElem> {
    let mut out: Vec<FieldElem> = Vec::new();
    for h in hints {
        let img = step.apply(h, tower);
        if !img.is_zero() && !out.contains(&img) {
            out.push(img);
        }
    }
    out
}

pub fn factorize(
    m: &DarbouxMorphism,
    registry: &HintRegistry,
    tower: &Tower,
) -> Result<FactorizationChain> {
    factorize_with(m, registry, &FactorizeOptions::default(), tower)
}

pub fn factorize_with(
    input: &DarbouxMorphism,
    registry: &HintRegistry,
    opts: &FactorizeOptions,
    tower: &Tower,
) -> Result<FactorizationChain> {
    let mut diagnostics = Vec::new();
    if input.order() == 0 {
        let id = DarbouxMorphism::identity(input.source());
        if input.source() == input.target() && equivalent(input, &id, tower)? {
            return Ok(FactorizationChain {
                input: input.clone(),
                steps: Vec::new(),
                prefix_len: 0,
                composed_equivalent: true,
                diagnostics,
            });
        }
        return Err(Error::OrderZero);
    }

    let red = reduce_to_ordinary(input, opts, tower)?;
    let v = red.var;
    let prefix_len = red.prefix.len();
    if prefix_len > 0 {
        diagnostics.push(format!(
            "eliminated D{} with {} Laplace step(s)",
            v.other(),
            prefix_len
        ));
    }
    let mut hints: Vec<FieldElem> = registry.hints_for(input.source()).to_vec();
    for s in &red.prefix {
        hints = transport(&hints, &s.morphism, tower);
    }
    let mut steps = red.prefix;
    let mut cur = red.reduced;

    while cur.order() >= 1 {
        let before = cur.order();
        let l = cur.source().clone();
        require_invariant(&l, v, tower)?;
        let mut candidates = hints.clone();
        for h in registry.hints_for(&l) {
            if !candidates.contains(h) {
                candidates.push(h.clone());
            }
        }
        let mut split = None;
        for psi in &candidates {
            if !cur.apply(psi, tower).is_zero() {
                continue;
            }
            match split_wronskian(&cur, psi, v, tower) {
                Ok(s) => {
                    split = Some(s);
                    break;
                }
                Err(Error::WitnessInvalid { remainder }) => {
                    diagnostics.push(format!("witness {} rejected: {remainder}", tower.format(psi)));
                }
                Err(e) => return Err(e),
            }
        }
        let (step, rest) = match split {
            Some(s) => s,
            None => match split_laplace(&cur, v, tower) {
                Ok(s) => s,
                Err(Error::NonzeroRemainder { what, remainder }) => {
                    return Err(Error::StuckNoSplit(format!(
                        "order {} transformation from {}; {} candidate hint(s) failed; \
                         dividing {what} by the Laplace factor leaves {remainder}",
                        before,
                        l.format(tower),
                        candidates.len()
                    )));
                }
                Err(e) => return Err(e),
            },
        };
        hints = transport(&candidates, &step.morphism, tower);
        cur = rest.standard_representative(tower);
        steps.push(step);
        if cur.order() + 1 != before {
            return Err(Error::StuckNoSplit(format!(
                "split did not lower the order ({before} -> {})",
                cur.order()
            )));
        }
    }

    // What is left is multiplication by a function; fold it into the last step.
    if !(cur.m().is_one() && cur.source() == cur.target()) {
        let last = steps.pop().ok_or(Error::OrderZero)?;
        let merged = compose_morphisms(&last.morphism, &cur, tower)?.standard_representative(tower);
        let merged = DarbouxMorphism::new(
            merged.source().clone(),
            merged.target().clone(),
            merged.m().clone(),
            merged.n().clone(),
            tower,
        )?;
        steps.push(FactorStep {
            morphism: merged,
            ..last
        });
    }

    let mut chain = FactorizationChain {
        input: input.clone(),
        steps,
        prefix_len,
        composed_equivalent: false,
        diagnostics,
    };
    let composed = chain.composed(tower)?;
    chain.composed_equivalent = equivalent(&composed, input, tower)?;
    Ok(chain)
}

/// Identity morphism is returned for an empty product.
pub fn compose_steps(steps: &[FactorStep], source: &SchrodingerOp, tower: &Tower) -> Result<DarbouxMorphism> {
    let mut acc = DarbouxMorphism::identity(source);
    for s in steps {
        acc = compose_morphisms(&acc, &s.morphism, tower)?;
    }
    Ok(acc)
}
