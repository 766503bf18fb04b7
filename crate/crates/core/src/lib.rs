//! Nominally-typed generic classes whose type parameters may carry both a
//! lower and an upper bound, each of which may mention the parameter itself.
//!
//! The crate is split along the three settings the checker reasons about:
//!
//! - [`syntax`], [`classtable`], [`subtyping`] and [`validity`] implement a
//!   tiny class-declaration language and its type-argument checker. Bounds
//!   are instantiated once and compared by plain nominal subtyping; the
//!   instantiations produced on the bound side are never validated again.
//! - [`poset`] decides domains of bounded endomaps over finite partial
//!   orders and compares the one-shot decision against a greatest fixed
//!   point computation.
//! - [`realline`] decides the same kind of domain over the (window-clipped)
//!   real line by sampling and bisection.

#![forbid(unsafe_code)]

pub mod classtable;
pub mod poset;
pub mod realline;
pub mod subtyping;
pub mod syntax;
pub mod validity;

pub use classtable::{ClassTable, TableError, Warning};
pub use subtyping::{GroundType, SubtypeError};
pub use syntax::{
    parse_program, parse_type, ClassDecl, ParseError, Program, TypeExpr, TypeParamDecl,
};
pub use validity::{Status, Verdict};
