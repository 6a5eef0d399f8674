//! Serializable views of the engine's values. Field elements are rendered
//! as strings in the operator DSL.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::darboux::DarbouxMorphism;
use crate::factorizer::{FactorizationChain, StepKind};
use crate::field::Tower;
use crate::opring::DiffOp;
use crate::schrodinger::SchrodingerOp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub a: String,
    pub b: String,
    pub c: String,
}

impl OperatorRecord {
    pub fn new(l: &SchrodingerOp, tower: &Tower) -> Self {
        OperatorRecord {
            a: tower.format(l.a()),
            b: tower.format(l.b()),
            c: tower.format(l.c()),
        }
    }
}

/// One entry of a Laplace chain listing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub index: i64,
    pub a: String,
    pub b: String,
    pub c: String,
    pub h: String,
    pub k: String,
}

impl ChainRecord {
    pub fn new(index: i64, l: &SchrodingerOp, tower: &Tower) -> Self {
        let (h, k) = l.laplace_invariants(tower);
        ChainRecord {
            index,
            a: tower.format(l.a()),
            b: tower.format(l.b()),
            c: tower.format(l.c()),
            h: tower.format(&h),
            k: tower.format(&k),
        }
    }
}

/// Sparse map `"i,j" -> coefficient` for `Dx^i Dy^j`.
pub fn sparse_operator(op: &DiffOp, tower: &Tower) -> BTreeMap<String, String> {
    op.terms()
        .map(|(&(i, j), c)| (format!("{i},{j}"), tower.format(c)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismRecord {
    pub source: OperatorRecord,
    pub target: OperatorRecord,
    #[serde(rename = "M")]
    pub m: BTreeMap<String, String>,
    #[serde(rename = "N")]
    pub n: BTreeMap<String, String>,
    pub verified: bool,
    pub bidegree: [u32; 2],
}

impl MorphismRecord {
    pub fn new(m: &DarbouxMorphism, tower: &Tower) -> Self {
        let bd = m.bidegree();
        MorphismRecord {
            source: OperatorRecord::new(m.source(), tower),
            target: OperatorRecord::new(m.target(), tower),
            m: sparse_operator(m.m(), tower),
            n: sparse_operator(m.n(), tower),
            verified: m.verify(tower).0,
            bidegree: [bd.d1, bd.d2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: StepKind,
    pub morphism: MorphismRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainReport {
    pub input: MorphismRecord,
    pub steps: Vec<StepRecord>,
    pub composed_equivalent: bool,
    pub invertible: bool,
    pub diagnostics: Vec<String>,
}

impl ChainReport {
    pub fn new(chain: &FactorizationChain, tower: &Tower) -> Self {
        ChainReport {
            input: MorphismRecord::new(&chain.input, tower),
            steps: chain
                .steps
                .iter()
                .map(|s| StepRecord {
                    kind: s.kind,
                    morphism: MorphismRecord::new(&s.morphism, tower),
                    witness: s.witness.as_ref().map(|w| tower.format(w)),
                })
                .collect(),
            composed_equivalent: chain.composed_equivalent,
            invertible: chain.classify_invertible(),
            diagnostics: chain.diagnostics.clone(),
        }
    }
}
