//! Exact wall-crossing engine for rank 0 and rank 2 Donaldson-Thomas invariants
//! on a Calabi-Yau threefold of Picard rank one.
//!
//! Everything is exact rational arithmetic. The only irrational quantities are the
//! square roots where lines meet the parabola `w = b^2/2`; those are carried by
//! [`QuadValue`].

pub mod acceptance;
pub mod error;
pub mod jswcf;
pub mod kgeom;
pub mod num;
pub mod oracles;
pub mod osv;
pub mod rank0direct;
pub mod rank0inductive;
pub mod rank2;
pub mod resolver;
pub mod series;
pub mod tables;
pub mod walls;

pub use error::{Error, MissingKey, Result};
pub use kgeom::{ChernData, ExtSlope, GeometryParams, LineBW, QuadValue};
pub use num::Rat;
pub use series::{Monomial, SparseSeries};

pub use tables::{InvariantTable, Rank0Cache, TableKind, TableSet};
