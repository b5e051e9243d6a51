//! Rank 0 invariants on demand: external values, then the cache, then Method I
//! (when allowed and its bound holds), then Method II with recursion on parts.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kgeom::{ChernData, GeometryParams};
use crate::num::Rat;
use crate::rank0direct::{bound_ok, divisor_multiple, method1};
use crate::rank0inductive::{method2_with, part_admissible, validate_n, Method2Options};
use crate::tables::{Provenance, Rank0Cache, Recorder, TableSet};

/// How many successive values of `n` are tried for a sub-invariant.
pub const N_ATTEMPTS: i64 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    InductiveOnly,
    PreferDirect,
}

pub struct Rank0Resolver<'a> {
    pub rec: Recorder<'a>,
    pub cache: &'a Rank0Cache,
    pub policy: Policy,
    pub n_start: i64,
    pub opts: Method2Options,
    pub external: Option<&'a BTreeMap<ChernData, Rat>>,
    log: RefCell<Vec<(ChernData, Rat, Provenance)>>,
}

impl<'a> Rank0Resolver<'a> {
    pub fn new(tables: &'a TableSet, geom: &'a GeometryParams, cache: &'a Rank0Cache, policy: Policy, n_start: i64) -> Self {
        Rank0Resolver {
            rec: Recorder::new(tables, geom),
            cache,
            policy,
            n_start,
            opts: Method2Options::default(),
            external: None,
            log: RefCell::new(Vec::new()),
        }
    }

    pub fn geom(&self) -> &GeometryParams {
        self.rec.geom
    }

    /// Smallest `n >= n_start` passing the validator, within [`N_ATTEMPTS`].
    pub fn choose_n(&self, v: &ChernData) -> Result<i64> {
        let mut last = None;
        for n in self.n_start.max(1)..self.n_start.max(1) + N_ATTEMPTS {
            match validate_n(v, n, self.geom()) {
                Ok(()) => return Ok(n),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::NSufficiencyFailed("no n tried".into())))
    }

    /// `J(v)`. Missing table keys are collected in `rec` and read as zero;
    /// call [`Rank0Resolver::finish`] before trusting the result.
    pub fn j(&self, v: &ChernData) -> Result<Rat> {
        let geom = self.geom();
        divisor_multiple(v, geom)?;
        if geom.q_of(v)?.is_negative() {
            return Ok(Rat::zero());
        }
        if !part_admissible(v, geom) {
            return Err(Error::Input(format!("{v} has a non-integral Hilbert polynomial")));
        }
        if let Some(x) = self.external.and_then(|t| t.get(v)) {
            self.note(v, x, Provenance::External)?;
            return Ok(x.clone());
        }
        if let Some((x, _)) = self.cache.get(v) {
            return Ok(x);
        }
        if self.policy == Policy::PreferDirect && bound_ok(v, geom)? {
            match method1(v, self.rec.tables, geom) {
                Ok(r) => {
                    self.note(v, &r.value, Provenance::Direct)?;
                    return Ok(r.value);
                }
                Err(Error::IncompleteInput(keys)) => {
                    self.rec.record(keys);
                    return Ok(Rat::zero());
                }
                Err(e) => return Err(e),
            }
        }
        let n = self.choose_n(v)?;
        let r = method2_with(v, n, &self.opts, &self.rec, &|c| self.j(c))?;
        self.note(v, &r.value, Provenance::Inductive)?;
        Ok(r.value)
    }

    fn note(&self, v: &ChernData, x: &Rat, prov: Provenance) -> Result<()> {
        self.log.borrow_mut().push((v.clone(), x.clone(), prov));
        // values computed while keys were missing are not trustworthy
        if self.rec.missing().is_empty() {
            self.cache.insert(v.clone(), x.clone(), prov)?;
        }
        Ok(())
    }

    /// Every value resolved so far, in resolution order.
    pub fn provenance(&self) -> Vec<(ChernData, Rat, Provenance)> {
        self.log.borrow().clone()
    }

    pub fn finish(&self) -> Result<()> {
        self.rec.finish()
    }

    /// `J(v)` with all missing keys reported.
    pub fn resolve(&self, v: &ChernData) -> Result<Rat> {
        let x = self.j(v)?;
        self.finish()?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::tables::{synthetic_curve_tables, TableKind, Window};

    #[test]
    fn direct_policy_uses_method1() {
        let g = GeometryParams::quintic();
        let t = TableSet::minimal();
        let cache = Rank0Cache::new();
        let r = Rank0Resolver::new(&t, &g, &cache, Policy::PreferDirect, 2);
        let o_s = ChernData::new(int(0), int(5), rat(-5, 2), rat(5, 6));
        assert_eq!(r.resolve(&o_s).unwrap(), int(5));
        assert_eq!(cache.get(&o_s), Some((int(5), Provenance::Direct)));
    }

    #[test]
    fn negative_q_and_external() {
        let g = GeometryParams::quintic();
        let t = TableSet::minimal();
        let cache = Rank0Cache::new();
        let v = ChernData::new(int(0), int(5), int(0), int(3));
        assert!(g.q_of(&v).unwrap().is_negative());
        let mut ext = BTreeMap::new();
        let w = ChernData::new(int(0), int(5), rat(-5, 2), rat(5, 6));
        ext.insert(w.clone(), int(11));
        let mut r = Rank0Resolver::new(&t, &g, &cache, Policy::InductiveOnly, 2);
        r.external = Some(&ext);
        assert_eq!(r.resolve(&v).unwrap(), int(0));
        assert_eq!(r.resolve(&w).unwrap(), int(11));
        assert_eq!(r.provenance().last().unwrap().2, Provenance::External);
    }

    #[test]
    fn inductive_reports_missing_keys() {
        let g = GeometryParams::quintic();
        let t = TableSet::minimal();
        let cache = Rank0Cache::new();
        let r = Rank0Resolver::new(&t, &g, &cache, Policy::InductiveOnly, 2);
        let o_s = ChernData::new(int(0), int(5), rat(-5, 2), rat(5, 6));
        match r.resolve(&o_s) {
            Err(Error::IncompleteInput(keys)) => {
                assert!(keys.iter().any(|k| k.m == int(-15) && k.deg == int(10)));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(cache.is_empty());
    }

    #[test]
    fn recursion_two_levels() {
        // k = 2 target: parts with k' = 1 are themselves resolved inductively
        let g = GeometryParams::quintic();
        let t = synthetic_curve_tables(7, &[(TableKind::Pt, Window::new(0, 60, -1200, 400))], 2, &g);
        let cache = Rank0Cache::new();
        let r = Rank0Resolver::new(&t, &g, &cache, Policy::InductiveOnly, 2);
        let v = ChernData::new(int(0), int(10), int(-5), rat(-1, 3));
        assert!(part_admissible(&v, &g));
        let x = r.resolve(&v).unwrap();
        let n = r.choose_n(&v).unwrap();
        let again = method2_with(&v, n, &r.opts, &r.rec, &|c| r.j(c)).unwrap();
        assert_eq!(again.value, x);
        // k' = 1 parts were resolved and memoized alongside the target
        assert!(r.provenance().iter().any(|(c, _, _)| c.c == int(5)));
        assert!(again.decompositions.iter().any(|d| !d.parts.is_empty()));
    }
}
