//! Exact symbolic engine for Darboux transformations of operators
//! `L = Dx*Dy + a*Dx + b*Dy + c`.
//!
//! The crate is layered bottom-up:
//!
//! * [`field`]: canonical rational functions with commuting derivations and a
//!   tower of extension symbols.
//! * [`opring`]: the operator ring `K[Dx, Dy]` with composition, application,
//!   first-order right division, gauge conjugation and normal forms modulo `L`.
//! * [`schrodinger`]: Laplace invariants, Laplace transformations and chains.
//! * [`darboux`]: intertwining pairs, the first-order solver and
//!   Wronskian-type constructions.
//! * [`factorizer`]: splitting a transformation into first-order steps.

pub mod darboux;
pub mod error;
pub mod factorizer;
pub mod field;
pub mod opring;
pub mod records;
pub mod schrodinger;

pub use darboux::DarbouxMorphism;
pub use error::{Error, Result};
pub use factorizer::{FactorStep, FactorizationChain, StepKind};
pub use field::{FieldElem, Tower, Var};
pub use opring::{BiDegree, DiffOp};
pub use schrodinger::SchrodingerOp;
