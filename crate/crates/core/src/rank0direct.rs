//! Method I: the explicit finite sum for rank 0 invariants when the class is
//! close enough to the Bogomolov-type bound that only two-factor walls occur.
//!
//! A splitting writes `v = v1 + v2` with `v1 = -e^{k1 H}(1, 0, -beta1, -m1)`
//! and `v2 = e^{k2 H}(1, 0, -beta2, -m2)`; its term is
//! `(-1)^(chi-1) chi P_{-m1,beta1} I_{m2,beta2}` with `chi = chi(v2, v1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kgeom::{rank_one_class, ChernData, GeometryParams, LineBW};
use crate::num::{int, rat, sign_pow, Rat};
use crate::tables::{Recorder, TableKind, TableSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Splitting {
    pub k1: i64,
    pub k2: i64,
    pub beta1: Rat,
    pub beta2: Rat,
    pub m1: Rat,
    pub m2: Rat,
    pub chi: Rat,
    pub wall: LineBW,
}

impl Splitting {
    /// The rank -1 factor.
    pub fn v1(&self, geom: &GeometryParams) -> ChernData {
        geom.twist(&rank_one_class(&self.beta1, &self.m1), &int(self.k1)).negate()
    }

    /// The rank 1 factor.
    pub fn v2(&self, geom: &GeometryParams) -> ChernData {
        geom.twist(&rank_one_class(&self.beta2, &self.m2), &int(self.k2))
    }
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k1={} k2={} beta1={} beta2={} m1={} m2={} chi={}",
            self.k1, self.k2, self.beta1, self.beta2, self.m1, self.m2, self.chi
        )
    }
}

/// Upper bounds on factor data for a class with `ch1 = kH`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvBounds {
    /// Bound on `beta_i.H`: `k/2 - 1/H^3`.
    pub beta_max: Rat,
    /// Bound on `(-1)^(i+1) m_i`: `k(k+1)/6`.
    pub m_max: Rat,
}

impl MvBounds {
    pub fn new(k: &Rat, geom: &GeometryParams) -> Self {
        MvBounds { beta_max: k / int(2) - rat(1, geom.h3), m_max: k * (k + int(1)) / int(6) }
    }
}

/// `k = c/H^3` for a rank 0 class with positive integral `k`.
pub fn divisor_multiple(v: &ChernData, geom: &GeometryParams) -> Result<i64> {
    v.require_rank0()?;
    let k = &v.c / geom.h3r();
    if !k.is_integer() || !k.is_positive() {
        return Err(Error::NotRankZeroDim2(v.clone()));
    }
    k.to_integer().try_into().map_err(|_| Error::Input("ch1 too large".into()))
}

pub fn q_negative(v: &ChernData, geom: &GeometryParams) -> Result<bool> {
    Ok(geom.q_of(v)?.is_negative())
}

/// Both printed forms of the Method I hypothesis; they must agree.
pub fn bound_forms(v: &ChernData, geom: &GeometryParams) -> Result<(bool, bool)> {
    let q = geom.q_of(v)?;
    let h = geom.h3r();
    let c = &v.c;
    let first = &h * &h * &q < c + int(2) / c - rat(5, 2) - int(2) / (c * c);
    let k = c / &h;
    let inner = &k - Rat::from_integer(1.into()) / &h + int(2) / (&k * &h * &h);
    let second = q < &k * &k / int(2) - &inner * &inner / int(2);
    Ok((first, second))
}

pub fn bound_ok(v: &ChernData, geom: &GeometryParams) -> Result<bool> {
    let (a, b) = bound_forms(v, geom)?;
    assert_eq!(a, b, "the two forms of the Method I bound disagree");
    Ok(a)
}

/// Membership of a factor in the bounded set of the target class: the degree
/// bound, the Euler characteristic bound, and non-negative degree.
pub fn in_mv(v: &ChernData, beta_i: &Rat, m_signed: &Rat, geom: &GeometryParams) -> Result<bool> {
    let k = int(divisor_multiple(v, geom)?);
    let b = MvBounds::new(&k, geom);
    Ok(!beta_i.is_negative() && *beta_i <= b.beta_max && *m_signed <= b.m_max)
}

/// Factor bound `(-1)^(i+1) m_i <= 2/3 beta_i (beta_i + 1/(2 H^3))`.
pub fn factor_m_bound(beta: &Rat, geom: &GeometryParams) -> Rat {
    int(2) * beta * (beta + rat(1, 2 * geom.h3)) / int(3)
}

#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub splittings: Vec<Splitting>,
    pub diagnostics: Vec<String>,
}

/// All splittings of `v`, found by solving `k1` from the `ch2` relation and
/// `m2` from the `ch3` relation. Splittings whose wall fails the geometric check
/// are dropped with a diagnostic.
pub fn enumerate_splittings(v: &ChernData, geom: &GeometryParams) -> Result<Enumeration> {
    let k = divisor_multiple(v, geom)?;
    let mut out = Enumeration::default();
    if q_negative(v, geom)? {
        return Ok(out);
    }
    let h = geom.h3r();
    let kr = int(k);
    let bounds = MvBounds::new(&kr, geom);
    let lf = geom.lf_rank0(v)?;
    let grad = &v.s / &v.c;
    let beta_hi = bounds.beta_max.floor().to_integer();
    let betas: Vec<Rat> = num_iter(0, &beta_hi);
    for beta1 in &betas {
        for beta2 in &betas {
            let twice_k1 = (&v.s + beta2 - beta1) * int(2) / (&kr * &h) - &kr;
            let k1r = twice_k1 / int(2);
            if !k1r.is_integer() {
                continue;
            }
            let k1: i64 = k1r.to_integer().try_into().map_err(|_| Error::Input("twist too large".into()))?;
            let k2 = k1 + k;
            let (k1r, k2r) = (int(k1), int(k2));
            // m2 = m1 + shift
            let shift = (&k2r * &k2r * &k2r - &k1r * &k1r * &k1r) * &h / int(6) - &k2r * beta2 + &k1r * beta1 - &v.d;
            let m1_hi = factor_m_bound(beta1, geom).min(bounds.m_max.clone());
            let m2_neg_hi = factor_m_bound(beta2, geom).min(bounds.m_max.clone());
            // -m2 <= m2_neg_hi  <=>  m1 >= -m2_neg_hi - shift
            let m1_lo = -&m2_neg_hi - &shift;
            let (lo, hi) = (m1_lo.ceil().to_integer(), m1_hi.floor().to_integer());
            let mut m1i = lo;
            while m1i <= hi {
                let m1 = Rat::from_integer(m1i.clone());
                let m2 = &m1 + &shift;
                m1i += 1;
                if !m2.is_integer() || !in_mv(v, beta1, &m1, geom)? || !in_mv(v, beta2, &(-&m2), geom)? {
                    continue;
                }
                let mut sp = Splitting {
                    k1,
                    k2,
                    beta1: beta1.clone(),
                    beta2: beta2.clone(),
                    m1,
                    m2,
                    chi: Rat::zero(),
                    wall: lf.clone(),
                };
                let (v1, v2) = (sp.v1(geom), sp.v2(geom));
                sp.chi = geom.euler_pairing(&v2, &v1);
                let (pb, pw) = geom.pi(&v2)?;
                sp.wall = LineBW::through(&pb, &pw, &grad);
                check_invariants(v, &sp, geom);
                if sp.wall.intercept() < lf.intercept() || !sp.wall.geometry().intersects_u {
                    out.diagnostics.push(format!("wall check pruned splitting {sp}"));
                    continue;
                }
                out.splittings.push(sp);
            }
        }
    }
    out.splittings.sort();
    Ok(out)
}

fn num_iter(lo: i64, hi: &num_bigint::BigInt) -> Vec<Rat> {
    let mut out = Vec::new();
    let mut j = num_bigint::BigInt::from(lo);
    while &j <= hi {
        out.push(Rat::from_integer(j.clone()));
        j += 1;
    }
    out
}

fn check_invariants(v: &ChernData, sp: &Splitting, geom: &GeometryParams) {
    let h = geom.h3r();
    let (k1, k2) = (int(sp.k1), int(sp.k2));
    assert_eq!(&k2 - &k1, &v.c / &h);
    assert_eq!((&k2 * &k2 - &k1 * &k1) * &h / int(2) - &sp.beta2 + &sp.beta1, v.s);
    assert_eq!(
        (&k2 * &k2 * &k2 - &k1 * &k1 * &k1) * &h / int(6) - &k2 * &sp.beta2 + &k1 * &sp.beta1 - &sp.m2 + &sp.m1,
        v.d
    );
    assert_eq!(sp.v1(geom) + sp.v2(geom), *v);
    assert!(sp.m1 <= factor_m_bound(&sp.beta1, geom));
    assert!(-&sp.m2 <= factor_m_bound(&sp.beta2, geom));
}

#[derive(Clone, Debug)]
pub struct Term {
    pub splitting: Splitting,
    pub pt: Rat,
    pub dt1: Rat,
    pub value: Rat,
}

#[derive(Clone, Debug)]
pub struct Method1Report {
    pub value: Rat,
    /// Set when `Q(v) < 0` forces the invariant to vanish.
    pub vanishing: bool,
    pub terms: Vec<Term>,
    pub diagnostics: Vec<String>,
}

pub fn method1(v: &ChernData, tables: &TableSet, geom: &GeometryParams) -> Result<Method1Report> {
    divisor_multiple(v, geom)?;
    let q = geom.q_of(v)?;
    if q.is_negative() {
        return Ok(Method1Report { value: Rat::zero(), vanishing: true, terms: vec![], diagnostics: vec![] });
    }
    if !bound_ok(v, geom)? {
        return Err(Error::BoundViolated(format!("Q(v) = {q} for v = {v}")));
    }
    let en = enumerate_splittings(v, geom)?;
    let mut diagnostics = en.diagnostics;
    if q.is_zero() {
        diagnostics.push("Q(v) = 0: boundary case, strictly semistable objects are not ruled out".into());
    }
    let rec = Recorder::new(tables, geom);
    let mut terms = Vec::new();
    let mut total = Rat::zero();
    for sp in en.splittings {
        let pt = rec.get(TableKind::Pt, &(-&sp.m1), &sp.beta1);
        let dt1 = rec.get(TableKind::Dt1, &sp.m2, &sp.beta2);
        let sign = sign_pow(&(&sp.chi - int(1))).ok_or_else(|| Error::NonIntegralChi(sp.chi.clone()))?;
        let value = int(sign) * &sp.chi * &pt * &dt1;
        total += &value;
        terms.push(Term { splitting: sp, pt, dt1, value });
    }
    rec.finish()?;
    let t = int(geom.tors);
    let value = &t * &t * total;
    if !value.is_integer() {
        diagnostics.push(format!("non-integral result {value}"));
    }
    Ok(Method1Report { value, vanishing: false, terms, diagnostics })
}

/// Rank 0 classes `(0, kH^3, s, d)` on the configured lattices with
/// `|s| <= s_abs_max`, integer-valued Hilbert polynomial, `Q >= 0` and the
/// Method I bound satisfied.
pub fn admissible_classes(k: i64, s_abs_max: i64, geom: &GeometryParams) -> Vec<ChernData> {
    let c = int(k * geom.h3);
    let kr = int(k);
    let limit = &kr * &kr / int(2) - {
        let inner = &kr - rat(1, geom.h3) + int(2) / (&kr * geom.h3r() * geom.h3r());
        &inner * &inner / int(2)
    };
    let mut out = Vec::new();
    for s in crate::num::lattice_points(&int(-s_abs_max), &int(s_abs_max), geom.beta_den) {
        let q0 = &kr * &kr / int(2) + int(6) * (&s / &c) * (&s / &c);
        // Q = q0 - 12 d / c in [0, limit)
        let d_hi = &q0 * &c / int(12);
        let d_lo = (&q0 - &limit) * &c / int(12);
        for d in crate::num::lattice_points(&d_lo, &d_hi, geom.m_den) {
            let v = ChernData::new(int(0), c.clone(), s.clone(), d);
            let integral = geom
                .hilbert_poly(&v)
                .map(|p| (-3..=3).all(|t| p.eval(&int(t)).is_integer()))
                .unwrap_or(false);
            if integral && !q_negative(&v, geom).unwrap_or(true) && bound_ok(&v, geom).unwrap_or(false) {
                out.push(v);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct WallsReport {
    pub lf: LineBW,
    pub lv: LineBW,
    /// Walls keyed by intercept, each with the splittings that produce it.
    pub walls: Vec<(LineBW, Vec<Splitting>)>,
}

pub fn walls_report(v: &ChernData, geom: &GeometryParams) -> Result<WallsReport> {
    let lf = geom.lf_rank0(v)?;
    let lv = geom.lv_line(v)?;
    let en = enumerate_splittings(v, geom)?;
    let mut by_line: BTreeMap<Rat, (LineBW, Vec<Splitting>)> = BTreeMap::new();
    for sp in en.splittings {
        by_line.entry(sp.wall.intercept()).or_insert_with(|| (sp.wall.clone(), Vec::new())).1.push(sp);
    }
    Ok(WallsReport { lf, lv, walls: by_line.into_values().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{synthetic_curve_tables, Window};
    use proptest::prelude::*;

    fn q5() -> GeometryParams {
        GeometryParams::quintic()
    }

    fn o_s() -> ChernData {
        ChernData::new(int(0), int(5), rat(-5, 2), rat(5, 6))
    }

    fn o_2s() -> ChernData {
        ChernData::new(int(0), int(10), int(-10), rat(20, 3))
    }

    #[test]
    fn hyperplane_class() {
        let g = q5();
        let en = enumerate_splittings(&o_s(), &g).unwrap();
        assert_eq!(en.splittings.len(), 1);
        let sp = &en.splittings[0];
        assert_eq!((sp.k1, sp.k2), (-1, 0));
        assert!(sp.beta1.is_zero() && sp.beta2.is_zero() && sp.m1.is_zero() && sp.m2.is_zero());
        assert_eq!(sp.chi, int(5));
        // independent: -chi(O(-1)) from the Hilbert polynomial
        assert_eq!(sp.chi, -g.hilbert_poly(&g.line_bundle(&int(-1))).unwrap().eval(&int(0)));
        assert_eq!(sp.wall, LineBW::Sloped { g: rat(-1, 2), c0: int(0) });
        let r = method1(&o_s(), &TableSet::minimal(), &g).unwrap();
        assert_eq!(r.value, int(5));
        assert!(r.diagnostics.iter().any(|d| d.contains("Q(v) = 0")));
    }

    #[test]
    fn double_hyperplane_class() {
        let g = q5();
        let en = enumerate_splittings(&o_2s(), &g).unwrap();
        assert_eq!(en.splittings.len(), 1);
        assert_eq!((en.splittings[0].k1, en.splittings[0].k2), (-2, 0));
        assert_eq!(en.splittings[0].chi, int(15));
        assert_eq!(method1(&o_2s(), &TableSet::minimal(), &g).unwrap().value, int(15));
    }

    #[test]
    fn vanishing_and_bounds() {
        let g = q5();
        let v = ChernData::new(int(0), int(10), int(0), rat(15, 2));
        assert!(q_negative(&v, &g).unwrap());
        let r = method1(&v, &TableSet::default(), &g).unwrap();
        assert!(r.vanishing && r.value.is_zero());
        assert!(enumerate_splittings(&v, &g).unwrap().splittings.is_empty());
        assert!(bound_ok(&o_s(), &g).unwrap());
        let far = ChernData::new(int(0), int(5), int(0), int(0));
        assert!(matches!(method1(&far, &TableSet::minimal(), &g), Err(Error::BoundViolated(_))));
    }

    #[test]
    fn mv_membership() {
        let g = q5();
        let b = MvBounds::new(&int(1), &g);
        assert_eq!(b.beta_max, rat(3, 10));
        assert_eq!(b.m_max, rat(1, 3));
        assert!(in_mv(&o_s(), &int(0), &int(0), &g).unwrap());
        assert!(!in_mv(&o_s(), &int(1), &int(0), &g).unwrap());
        assert!(!in_mv(&o_s(), &int(0), &int(1), &g).unwrap());
    }

    #[test]
    fn missing_window_is_reported() {
        let g = q5();
        match method1(&o_s(), &TableSet::default(), &g) {
            Err(Error::IncompleteInput(keys)) => assert_eq!(keys.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn admissible_pool() {
        let g = q5();
        let pool = admissible_classes(1, 5, &g);
        assert!(pool.contains(&o_s()));
        assert!(admissible_classes(2, 10, &g).contains(&o_2s()));
    }

    #[test]
    fn walls_for_hyperplane_class() {
        let g = q5();
        let w = walls_report(&o_s(), &g).unwrap();
        assert_eq!(w.walls.len(), 1);
        assert_eq!(w.walls[0].0, w.lf);
        assert_eq!(w.lf, w.lv);
        let w = walls_report(&ChernData::new(int(0), int(10), int(0), rat(15, 2)), &g).unwrap();
        assert!(w.walls.is_empty());
    }

    fn wide_tables(seed: u64) -> TableSet {
        let win = Window::new(0, 4, -12, 12);
        synthetic_curve_tables(seed, &[(TableKind::Pt, win.clone()), (TableKind::Dt1, win)], 1, &q5())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn bound_forms_agree(k in 1i64..6, s in -40i64..40, d in -200i64..200) {
            let g = q5();
            let v = ChernData::new(int(0), int(5 * k), rat(s, 2), rat(d, 6));
            let (a, b) = bound_forms(&v, &g).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn negative_q_vanishes(k in 1i64..5, s in -20i64..20, extra in 1i64..50) {
            let g = q5();
            let c = int(5 * k);
            let s = rat(s, 2);
            // pick d so that Q < 0
            let kk = int(k);
            let q0 = &kk * &kk / int(2) + int(6) * (&s / &c) * (&s / &c);
            let d = &q0 * &c / int(12) + rat(extra, 6);
            let v = ChernData::new(int(0), c, s, d);
            prop_assert!(q_negative(&v, &g).unwrap());
            prop_assert!(method1(&v, &TableSet::default(), &g).unwrap().value.is_zero());
        }

        #[test]
        fn twist_invariance_and_integrality(k in 1i64..4, idx in 0usize..1000, a in -2i64..3, seed in 0u64..20) {
            let g = q5();
            let pool = admissible_classes(k, 8, &g);
            prop_assume!(!pool.is_empty());
            let v = pool[idx % pool.len()].clone();
            let t = wide_tables(seed);
            let r = method1(&v, &t, &g).unwrap();
            prop_assert!(r.value.is_integer());
            let r2 = method1(&g.twist(&v, &int(a)), &t, &g).unwrap();
            prop_assert_eq!(r.value, r2.value);
        }
    }
}
