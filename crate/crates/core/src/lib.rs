//! Finite effect algebras: axiom checking, derived structure, exact states
//! and isomorph-free enumeration.

pub mod algebra;
pub mod canon;
pub mod construct;
pub mod enumerate;
pub mod lp;
pub mod order;
pub mod poset;
pub mod states;
pub mod structure;
pub mod theorems;

pub use algebra::{AlgebraError, Axiom, EffectAlgebra, Element, SumTable, ValidationReport, Violation};
pub use order::OrderStructure;
