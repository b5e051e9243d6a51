//! PT and rank one DT invariant tables, their text format, synthetic tables and
//! the memo store for rank 0 invariants.
//!
//! File format, one item per line:
//!
//! ```text
//! # comment
//! #range <P|I> <deg_min> <deg_max> <m_min> <m_max>
//! <P|I> <m> <deg> <value>
//! ```

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, MissingKey, Result};
use crate::kgeom::{ChernData, GeometryParams};
use crate::num::{int, parse_rat, rat, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableKind {
    /// Stable pair invariants `P_{m,beta}`.
    Pt,
    /// Rank one DT invariants `I_{m,beta}`.
    Dt1,
}

impl TableKind {
    fn letter(self) -> &'static str {
        match self {
            TableKind::Pt => "P",
            TableKind::Dt1 => "I",
        }
    }

    fn parse(s: &str) -> Option<TableKind> {
        match s {
            "P" => Some(TableKind::Pt),
            "I" => Some(TableKind::Dt1),
            _ => None,
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// A rectangle of keys declared complete: absent entries inside are zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Window {
    pub deg_min: i64,
    pub deg_max: i64,
    pub m_min: Rat,
    pub m_max: Rat,
}

impl Window {
    pub fn new(deg_min: i64, deg_max: i64, m_min: i64, m_max: i64) -> Self {
        Window { deg_min, deg_max, m_min: int(m_min), m_max: int(m_max) }
    }

    pub fn contains(&self, m: &Rat, deg: &Rat) -> bool {
        *deg >= int(self.deg_min) && *deg <= int(self.deg_max) && m >= &self.m_min && m <= &self.m_max
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantTable {
    pub kind: TableKind,
    pub entries: BTreeMap<(i64, Rat), Rat>,
    pub windows: Vec<Window>,
}

impl InvariantTable {
    pub fn new(kind: TableKind) -> Self {
        InvariantTable { kind, entries: BTreeMap::new(), windows: Vec::new() }
    }

    fn key(&self, m: &Rat, deg: &Rat) -> MissingKey {
        MissingKey { kind: self.kind, m: m.clone(), deg: deg.clone() }
    }

    pub fn covers(&self, m: &Rat, deg: &Rat) -> bool {
        self.windows.iter().any(|w| w.contains(m, deg))
    }

    pub fn insert(&mut self, m: Rat, deg: i64, value: Rat) -> Result<()> {
        let key = self.key(&m, &int(deg));
        if !self.covers(&m, &int(deg)) {
            return Err(Error::EntryOutsideWindow(key));
        }
        if self.entries.contains_key(&(deg, m.clone())) {
            return Err(Error::DuplicateKey(key));
        }
        if !value.is_zero() {
            self.entries.insert((deg, m), value);
        }
        Ok(())
    }

    /// Stored value, zero when absent inside a window, error outside every window.
    pub fn lookup(&self, m: &Rat, deg: &Rat) -> Result<Rat> {
        if !self.covers(m, deg) {
            return Err(Error::OutsideWindow(self.key(m, deg)));
        }
        if !deg.is_integer() {
            return Ok(Rat::zero());
        }
        let d: i64 = deg.to_integer().try_into().map_err(|_| Error::OutsideWindow(self.key(m, deg)))?;
        Ok(self.entries.get(&(d, m.clone())).cloned().unwrap_or_else(Rat::zero))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The PT and rank one DT tables loaded from one file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSet {
    pub pt: InvariantTable,
    pub dt1: InvariantTable,
}

impl Default for TableSet {
    fn default() -> Self {
        TableSet { pt: InvariantTable::new(TableKind::Pt), dt1: InvariantTable::new(TableKind::Dt1) }
    }
}

impl TableSet {
    pub fn table(&self, kind: TableKind) -> &InvariantTable {
        match kind {
            TableKind::Pt => &self.pt,
            TableKind::Dt1 => &self.dt1,
        }
    }

    pub fn table_mut(&mut self, kind: TableKind) -> &mut InvariantTable {
        match kind {
            TableKind::Pt => &mut self.pt,
            TableKind::Dt1 => &mut self.dt1,
        }
    }

    pub fn lookup(&self, kind: TableKind, m: &Rat, deg: &Rat) -> Result<Rat> {
        self.table(kind).lookup(m, deg)
    }

    /// `{P_{0,0} = 1, I_{0,0} = 1}` with the single-point windows.
    pub fn minimal() -> Self {
        let mut t = TableSet::default();
        for kind in [TableKind::Pt, TableKind::Dt1] {
            let tab = t.table_mut(kind);
            tab.windows.push(Window::new(0, 0, 0, 0));
            tab.insert(int(0), 0, int(1)).expect("inside window");
        }
        t
    }

    /// `P_{0,0} = I_{0,0} = 1` and every other key in `window` zero.
    pub fn minimal_values(window: Window) -> Self {
        let mut t = TableSet::default();
        for kind in [TableKind::Pt, TableKind::Dt1] {
            let tab = t.table_mut(kind);
            tab.windows.push(window.clone());
            tab.insert(int(0), 0, int(1)).expect("window must contain the origin");
        }
        t
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        TableSet::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = TableSet::default();
        let mut data = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: &str| Error::Parse { line: line_no, msg: msg.to_string() };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#range") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 5 {
                    return Err(err("#range needs 5 fields"));
                }
                let kind = TableKind::parse(f[0]).ok_or_else(|| err("kind must be P or I"))?;
                let deg_min: i64 = f[1].parse().map_err(|_| err("bad deg_min"))?;
                let deg_max: i64 = f[2].parse().map_err(|_| err("bad deg_max"))?;
                let m_min = parse_rat(f[3]).ok_or_else(|| err("bad m_min"))?;
                let m_max = parse_rat(f[4]).ok_or_else(|| err("bad m_max"))?;
                if deg_min > deg_max || m_min > m_max {
                    return Err(err("empty window"));
                }
                t.table_mut(kind).windows.push(Window { deg_min, deg_max, m_min, m_max });
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err("data line needs 4 fields"));
            }
            let kind = TableKind::parse(f[0]).ok_or_else(|| err("kind must be P or I"))?;
            let m = parse_rat(f[1]).ok_or_else(|| err("bad m"))?;
            let deg: i64 = f[2].parse().map_err(|_| err("bad deg"))?;
            let value = parse_rat(f[3]).ok_or_else(|| err("bad value"))?;
            data.push((kind, m, deg, value));
        }
        for (kind, m, deg, value) in data {
            t.table_mut(kind).insert(m, deg, value)?;
        }
        Ok(t)
    }

    /// Canonical text: windows, then entries sorted by kind, degree and m.
    pub fn save(&self) -> String {
        let mut out = String::new();
        for tab in [&self.pt, &self.dt1] {
            let mut windows = tab.windows.clone();
            windows.sort();
            for w in windows {
                out.push_str(&format!("#range {} {} {} {} {}\n", tab.kind, w.deg_min, w.deg_max, w.m_min, w.m_max));
            }
        }
        for tab in [&self.pt, &self.dt1] {
            for ((deg, m), v) in &tab.entries {
                out.push_str(&format!("{} {} {} {}\n", tab.kind, m, deg, v));
            }
        }
        out
    }
}

/// Pseudo-random table filling every integral key of the windows. Values are
/// `p/q` with `|p| <= 9` and `1 <= q <= denominator_bound`.
pub fn synthetic_table(seed: u64, windows: &[(TableKind, Window)], denominator_bound: i64) -> TableSet {
    synthetic_filtered(seed, windows, denominator_bound, |_, _, _| true)
}

/// As [`synthetic_table`], but leaving structurally vanishing keys empty.
pub fn synthetic_curve_tables(seed: u64, windows: &[(TableKind, Window)], denominator_bound: i64, geom: &GeometryParams) -> TableSet {
    synthetic_filtered(seed, windows, denominator_bound, |_, m, deg| !structurally_zero(geom, m, &int(deg)))
}

fn synthetic_filtered(
    seed: u64,
    windows: &[(TableKind, Window)],
    denominator_bound: i64,
    keep: impl Fn(TableKind, &Rat, i64) -> bool,
) -> TableSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TableSet::default();
    for (kind, w) in windows {
        t.table_mut(*kind).windows.push(w.clone());
    }
    for (kind, w) in windows {
        let m_lo: BigInt = w.m_min.ceil().to_integer();
        let m_hi: BigInt = w.m_max.floor().to_integer();
        for deg in w.deg_min..=w.deg_max {
            let mut m = m_lo.clone();
            while m <= m_hi {
                let mr = Rat::from_integer(m.clone());
                let p: i64 = rng.gen_range(-9..=9);
                let q: i64 = rng.gen_range(1..=denominator_bound.max(1));
                let tab = t.table_mut(*kind);
                if keep(*kind, &mr, deg) && !tab.entries.contains_key(&(deg, mr.clone())) && p != 0 {
                    tab.entries.insert((deg, mr), rat(p, q));
                }
                m += 1;
            }
        }
    }
    t
}

/// Keys whose PT / rank one DT invariant vanishes for structural reasons: a
/// non-integral key, a negative degree, or `m < -2/3 deg (deg + 1/(2 H^3))`.
pub fn structurally_zero(geom: &GeometryParams, m: &Rat, deg: &Rat) -> bool {
    if !m.is_integer() || !deg.is_integer() || deg.is_negative() {
        return true;
    }
    *m < castelnuovo_min(geom, deg)
}

/// Smallest `m` allowed by the Castelnuovo-type bound for curves of degree `deg`.
pub fn castelnuovo_min(geom: &GeometryParams, deg: &Rat) -> Rat {
    -(int(2) * deg * (deg + rat(1, 2 * geom.h3)) / int(3))
}

/// Table access for a pipeline: structural zeros short-circuit, keys outside
/// every window are recorded and read as zero so that the whole list of missing
/// keys can be reported at once.
pub struct Recorder<'a> {
    pub tables: &'a TableSet,
    pub geom: &'a GeometryParams,
    missing: RefCell<BTreeSet<MissingKey>>,
}

impl<'a> Recorder<'a> {
    pub fn new(tables: &'a TableSet, geom: &'a GeometryParams) -> Self {
        Recorder { tables, geom, missing: RefCell::new(BTreeSet::new()) }
    }

    pub fn get(&self, kind: TableKind, m: &Rat, deg: &Rat) -> Rat {
        self.peek(kind, m, deg).unwrap_or_else(|key| {
            self.missing.borrow_mut().insert(key);
            Rat::zero()
        })
    }

    /// As [`Recorder::get`] but hands a missing key back instead of recording it.
    pub fn peek(&self, kind: TableKind, m: &Rat, deg: &Rat) -> std::result::Result<Rat, MissingKey> {
        if structurally_zero(self.geom, m, deg) {
            return Ok(Rat::zero());
        }
        match self.tables.lookup(kind, m, deg) {
            Ok(v) => Ok(v),
            Err(Error::OutsideWindow(key)) => Err(key),
            Err(_) => Ok(Rat::zero()),
        }
    }

    /// Keys of one degree with `m` in `[lo, hi]` that can be non-zero: stored
    /// entries, and the keys outside every window (returned, not recorded).
    pub fn scan(&self, kind: TableKind, deg: &Rat, lo: &Rat, hi: &Rat) -> (Vec<(Rat, Rat)>, Vec<MissingKey>) {
        let (mut found, mut missing) = (Vec::new(), Vec::new());
        if !deg.is_integer() || deg.is_negative() {
            return (found, missing);
        }
        let lo = lo.max(&castelnuovo_min(self.geom, deg)).ceil();
        let hi = hi.floor();
        if lo > hi {
            return (found, missing);
        }
        let Ok(d) = i64::try_from(deg.to_integer()) else { return (found, missing) };
        let table = self.tables.table(kind);
        for ((_, m), v) in table.entries.range((d, lo.clone())..=(d, hi.clone())) {
            found.push((m.clone(), v.clone()));
        }
        let mut covered: Vec<(Rat, Rat)> = table
            .windows
            .iter()
            .filter(|w| d >= w.deg_min && d <= w.deg_max)
            .map(|w| (w.m_min.clone(), w.m_max.clone()))
            .collect();
        covered.sort();
        let mut m = lo;
        for (a, b) in covered {
            while m <= hi && m < a {
                missing.push(MissingKey { kind, m: m.clone(), deg: deg.clone() });
                m += Rat::one();
            }
            if b >= m {
                m = (b + Rat::one()).floor();
            }
        }
        while m <= hi {
            missing.push(MissingKey { kind, m: m.clone(), deg: deg.clone() });
            m += Rat::one();
        }
        (found, missing)
    }

    /// Merges keys reported missing by a nested computation.
    pub fn record(&self, keys: impl IntoIterator<Item = MissingKey>) {
        self.missing.borrow_mut().extend(keys);
    }

    pub fn missing(&self) -> Vec<MissingKey> {
        self.missing.borrow().iter().cloned().collect()
    }

    pub fn finish(&self) -> Result<()> {
        let missing = self.missing();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompleteInput(missing))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    Inductive,
    External,
}

/// Memo store for rank 0 invariants. Re-inserting an equal value is a no-op;
/// an unequal value is an error.
#[derive(Debug, Default)]
pub struct Rank0Cache {
    map: Mutex<BTreeMap<ChernData, (Rat, Provenance)>>,
}

impl Rank0Cache {
    pub fn new() -> Self {
        Rank0Cache::default()
    }

    pub fn get(&self, class: &ChernData) -> Option<(Rat, Provenance)> {
        self.map.lock().expect("cache lock").get(class).cloned()
    }

    pub fn insert(&self, class: ChernData, value: Rat, prov: Provenance) -> Result<()> {
        let mut map = self.map.lock().expect("cache lock");
        if let Some((old, _)) = map.get(&class) {
            if *old != value {
                return Err(Error::CacheConflict { class, old: old.clone(), new: value });
            }
            return Ok(());
        }
        map.insert(class, (value, prov));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let t = TableSet::parse("#range P 0 0 0 0\nP 0 0 1\n").unwrap();
        assert_eq!(t.lookup(TableKind::Pt, &int(0), &int(0)).unwrap(), int(1));
        assert!(matches!(t.lookup(TableKind::Pt, &int(1), &int(0)), Err(Error::OutsideWindow(_))));
        assert!(matches!(t.lookup(TableKind::Dt1, &int(0), &int(0)), Err(Error::OutsideWindow(_))));
        let m = TableSet::minimal();
        assert_eq!(m.lookup(TableKind::Dt1, &int(0), &int(0)).unwrap(), int(1));
    }

    #[test]
    fn window_semantics() {
        let t = TableSet::parse("#range I 0 2 -3 3\nI 1 1 -2/3\n").unwrap();
        assert_eq!(t.lookup(TableKind::Dt1, &int(1), &int(1)).unwrap(), rat(-2, 3));
        assert_eq!(t.lookup(TableKind::Dt1, &int(2), &int(2)).unwrap(), int(0));
        assert!(t.lookup(TableKind::Dt1, &int(4), &int(2)).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(TableSet::parse("#range P 0 0 0 0\nP 0 0 1/0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(TableSet::parse("P 0 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(TableSet::parse("Q 0 0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(TableSet::parse("#range P 0 0 0 0\nP 0 0 1\nP 0 0 2\n"), Err(Error::DuplicateKey(_))));
        assert!(matches!(TableSet::parse("#range P 0 0 0 0\nP 1 0 1\n"), Err(Error::EntryOutsideWindow(_))));
        assert!(matches!(TableSet::parse("#range P 1 0 0 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip() {
        let w = [(TableKind::Pt, Window::new(0, 2, -2, 4)), (TableKind::Dt1, Window::new(0, 1, -1, 3))];
        let t = synthetic_table(7, &w, 5);
        let text = t.save();
        let back = TableSet::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.save(), text);
        let messy = text.replace(' ', "   ").replace('\n', "  \n\n");
        assert_eq!(TableSet::parse(&messy).unwrap().save(), text);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let w = [(TableKind::Pt, Window::new(0, 3, -5, 5))];
        assert_eq!(synthetic_table(1, &w, 4), synthetic_table(1, &w, 4));
        assert_ne!(synthetic_table(1, &w, 4), synthetic_table(2, &w, 4));
        for v in synthetic_table(3, &w, 4).pt.entries.values() {
            assert!(*v.denom() <= BigInt::from(4));
        }
        assert!(synthetic_table(1, &[], 4).pt.is_empty());
    }

    #[test]
    fn curve_tables_respect_vanishing() {
        let g = GeometryParams::quintic();
        let w = [(TableKind::Pt, Window::new(0, 3, -8, 5))];
        let t = synthetic_curve_tables(5, &w, 1, &g);
        for ((deg, m), _) in &t.pt.entries {
            assert!(!structurally_zero(&g, m, &int(*deg)));
        }
        // deg 1 on the quintic: -2/3 * 11/10 = -11/15, so m >= 0
        assert!(structurally_zero(&g, &int(-1), &int(1)));
        assert!(!structurally_zero(&g, &int(0), &int(1)));
    }

    #[test]
    fn recorder_collects_missing() {
        let g = GeometryParams::quintic();
        let t = TableSet::minimal();
        let r = Recorder::new(&t, &g);
        assert_eq!(r.get(TableKind::Pt, &int(0), &int(0)), int(1));
        assert_eq!(r.get(TableKind::Pt, &rat(1, 2), &int(0)), int(0));
        assert_eq!(r.get(TableKind::Pt, &int(1), &int(1)), int(0));
        assert!(matches!(r.finish(), Err(Error::IncompleteInput(ref k)) if k.len() == 1));
    }

    #[test]
    fn cache_rules() {
        let c = Rank0Cache::new();
        let v = ChernData::new(int(0), int(5), rat(-5, 2), rat(5, 6));
        c.insert(v.clone(), int(5), Provenance::Direct).unwrap();
        c.insert(v.clone(), int(5), Provenance::Inductive).unwrap();
        assert!(matches!(c.insert(v.clone(), int(4), Provenance::Direct), Err(Error::CacheConflict { .. })));
        assert_eq!(c.get(&v).unwrap().0, int(5));
    }
}
