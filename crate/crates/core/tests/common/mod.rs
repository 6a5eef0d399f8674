//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use darboux_core::field::{FieldElem, Tower, Var};
use darboux_core::opring::DiffOp;
use darboux_core::schrodinger::SchrodingerOp;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn x() -> FieldElem {
    FieldElem::x()
}

pub fn y() -> FieldElem {
    FieldElem::y()
}

pub fn int(n: i64) -> FieldElem {
    FieldElem::from_int(n)
}

/// Random polynomial in x, y of total degree <= `deg`, small integer
/// coefficients; about half the monomials are dropped.
pub fn poly(r: &mut ChaCha8Rng, deg: u32) -> FieldElem {
    let mut acc = FieldElem::zero();
    for i in 0..=deg {
        for j in 0..=(deg - i) {
            if r.gen_bool(0.5) {
                continue;
            }
            let c = r.gen_range(-3i64..=3);
            let mono = x().pow(i as i32).unwrap() * y().pow(j as i32).unwrap();
            acc = acc + int(c) * mono;
        }
    }
    acc
}

pub fn nonzero_poly(r: &mut ChaCha8Rng, deg: u32) -> FieldElem {
    loop {
        let p = poly(r, deg);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Polynomial depending on both variables.
pub fn mixed_poly(r: &mut ChaCha8Rng, deg: u32) -> FieldElem {
    loop {
        let p = poly(r, deg);
        if p.contains_var(0) && p.contains_var(1) {
            return p;
        }
    }
}

/// A random operator whose invariants h, k are both nonzero.
pub fn generic_schrodinger(r: &mut ChaCha8Rng, tower: &Tower) -> SchrodingerOp {
    loop {
        let l = SchrodingerOp::new(poly(r, 2), poly(r, 2), poly(r, 2));
        let (h, k) = l.laplace_invariants(tower);
        if !h.is_zero() && !k.is_zero() {
            return l;
        }
    }
}

/// Random operator of total order <= `ord` with polynomial coefficients.
pub fn random_op(r: &mut ChaCha8Rng, ord: u32, deg: u32) -> DiffOp {
    let mut terms = Vec::new();
    for i in 0..=ord {
        for j in 0..=(ord - i) {
            if r.gen_bool(0.4) {
                continue;
            }
            terms.push(((i, j), poly(r, deg)));
        }
    }
    DiffOp::from_terms(terms)
}

/// Random mixed-free operator with exact bi-degree `(d1, d2)`.
pub fn mixed_free_op(r: &mut ChaCha8Rng, d1: u32, d2: u32, deg: u32) -> DiffOp {
    let mut terms = vec![((0, 0), poly(r, deg))];
    for i in 1..=d1 {
        let c = if i == d1 { nonzero_poly(r, deg) } else { poly(r, deg) };
        terms.push(((i, 0), c));
    }
    for j in 1..=d2 {
        let c = if j == d2 { nonzero_poly(r, deg) } else { poly(r, deg) };
        terms.push(((0, j), c));
    }
    DiffOp::from_terms(terms)
}

fn d(tower: &Tower, f: &FieldElem, v: Var) -> FieldElem {
    tower.derive(f, v)
}

/// `(psi_xy, psi_x, psi_y, psi)` for the kernel equation
/// `psi_xy + a psi_x + b psi_y + c psi = 0`.
fn kernel_row(tower: &Tower, psi: &FieldElem) -> [FieldElem; 4] {
    let px = d(tower, psi, Var::X);
    let py = d(tower, psi, Var::Y);
    [d(tower, &px, Var::Y), px, py, psi.clone()]
}

fn det2(a: &FieldElem, b: &FieldElem, c: &FieldElem, e: &FieldElem) -> FieldElem {
    a.clone() * e.clone() - b.clone() * c.clone()
}

fn det3(m: &[[FieldElem; 3]; 3]) -> FieldElem {
    m[0][0].clone() * det2(&m[1][1], &m[1][2], &m[2][1], &m[2][2])
        - m[0][1].clone() * det2(&m[1][0], &m[1][2], &m[2][0], &m[2][2])
        + m[0][2].clone() * det2(&m[1][0], &m[1][1], &m[2][0], &m[2][1])
}

/// An operator with every `psi` in its kernel, found by solving the kernel
/// equations for the unknown coefficients by Cramer's rule. One element:
/// `a`, `b` random, `c` solved. Two: `a` random, `b`, `c` solved. Three:
/// all solved. Returns `None` for singular systems.
pub fn plant(r: &mut ChaCha8Rng, tower: &Tower, psis: &[FieldElem]) -> Option<SchrodingerOp> {
    let rows: Vec<[FieldElem; 4]> = psis.iter().map(|p| kernel_row(tower, p)).collect();
    match psis.len() {
        1 => {
            let a = poly(r, 1);
            let b = poly(r, 1);
            let [pxy, px, py, p] = rows[0].clone();
            let c = (pxy + a.clone() * px + b.clone() * py).neg().checked_div(&p).ok()?;
            Some(SchrodingerOp::new(a, b, c))
        }
        2 => {
            let a = poly(r, 1);
            // b*py + c*p = -(pxy + a px)
            let rhs: Vec<FieldElem> = rows
                .iter()
                .map(|rw| (rw[0].clone() + a.clone() * rw[1].clone()).neg())
                .collect();
            let den = det2(&rows[0][2], &rows[0][3], &rows[1][2], &rows[1][3]);
            if den.is_zero() {
                return None;
            }
            let b = det2(&rhs[0], &rows[0][3], &rhs[1], &rows[1][3]).checked_div(&den).ok()?;
            let c = det2(&rows[0][2], &rhs[0], &rows[1][2], &rhs[1]).checked_div(&den).ok()?;
            Some(SchrodingerOp::new(a, b, c))
        }
        3 => {
            let m = |i: usize| [rows[i][1].clone(), rows[i][2].clone(), rows[i][3].clone()];
            let mat = [m(0), m(1), m(2)];
            let den = det3(&mat);
            if den.is_zero() {
                return None;
            }
            let rhs: Vec<FieldElem> = rows.iter().map(|rw| rw[0].neg()).collect();
            let mut sol = Vec::new();
            for col in 0..3 {
                let mut mm = mat.clone();
                for i in 0..3 {
                    mm[i][col] = rhs[i].clone();
                }
                sol.push(det3(&mm).checked_div(&den).ok()?);
            }
            Some(SchrodingerOp::new(sol[0].clone(), sol[1].clone(), sol[2].clone()))
        }
        _ => None,
    }
}

/// `count` random kernel elements and an operator annihilating them, with
/// both Laplace invariants nonzero.
pub fn planted_instance(
    r: &mut ChaCha8Rng,
    tower: &Tower,
    count: usize,
    deg: u32,
) -> (SchrodingerOp, Vec<FieldElem>) {
    loop {
        let psis: Vec<FieldElem> = (0..count).map(|_| mixed_poly(r, deg)).collect();
        let Some(l) = plant(r, tower, &psis) else { continue };
        let (h, k) = l.laplace_invariants(tower);
        if h.is_zero() || k.is_zero() {
            continue;
        }
        if psis.iter().all(|p| l.apply(p, tower).is_zero()) {
            return (l, psis);
        }
    }
}
