use std::fmt;

use thiserror::Error;

use crate::kgeom::ChernData;
use crate::num::Rat;
use crate::tables::TableKind;

pub type Result<T> = std::result::Result<T, Error>;

/// A table entry that a computation needed but no declared window covers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MissingKey {
    pub kind: TableKind,
    pub m: Rat,
    pub deg: Rat,
}

impl fmt::Display for MissingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} m={} deg={}", self.kind, self.m, self.deg)
    }
}

fn join_keys(keys: &[MissingKey]) -> String {
    keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("zero class")]
    ZeroClass,
    #[error("nu_H is only defined for rank 0 classes")]
    NuHRankNonzero,
    #[error("point ({b}, {w}) is outside U")]
    OutsideU { b: Rat, w: Rat },
    #[error("degenerate BMT line (discriminant zero)")]
    DegenerateLine,
    #[error("class {0} is not rank 0 with positive ch1")]
    NotRankZeroDim2(ChernData),
    #[error("projection undefined for rank 0 class")]
    RankZeroProjection,
    #[error("q = {q} exceeds the bound {max}")]
    QTooLarge { q: usize, max: usize },
    #[error("missing J value for {0}")]
    MissingJValue(ChernData),
    #[error("non-integral Euler pairing {0}")]
    NonIntegralChi(Rat),
    #[error("tuple does not sum to the total class")]
    BadFactorization,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate key {0}")]
    DuplicateKey(MissingKey),
    #[error("entry {0} lies outside every declared window")]
    EntryOutsideWindow(MissingKey),
    #[error("lookup {0} outside every declared window")]
    OutsideWindow(MissingKey),
    #[error("cache conflict for {class}: stored {old}, new {new}")]
    CacheConflict { class: ChernData, old: Rat, new: Rat },
    #[error("series is not nilpotent in its box")]
    NonNilpotent,
    #[error("non-integral z exponent in monomial {0}")]
    NonIntegralZExponent(String),
    #[error("Method I bound violated: {0}")]
    BoundViolated(String),
    #[error("incomplete input, missing table keys: {}", join_keys(.0))]
    IncompleteInput(Vec<MissingKey>),
    #[error("chi(O(-n), v) = 0")]
    ChiZero,
    #[error("n does not pass the sufficiency validator: {0}")]
    NSufficiencyFailed(String),
    #[error("no parameter solution: {0}")]
    NoSolution(String),
    #[error("d1 window too small: needs [{need_lo}, {need_hi}]")]
    WindowTooSmall { need_lo: i64, need_hi: i64 },
    #[error("classes do not share a slope on the JS wall")]
    NotOnWall,
    #[error("wrong input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
