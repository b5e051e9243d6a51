//! The D4 / D6-anti-D6 generating series identity and its coefficient form.
//!
//! Series exponents follow the convention `x^{-m} y^{-beta}` for the rank 0
//! class `(0, kH, beta, m)`; curve classes enter through their `H`-degree.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, MissingKey, Result};
use crate::kgeom::{rank_one_class, ChernData, GeometryParams};
use crate::num::{int, lattice_points, pow, rat, sign_pow, Rat};
use crate::series::{Monomial, Range, SparseSeries, TruncBox};
use crate::tables::{structurally_zero, Recorder, TableKind, TableSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OsvParams {
    pub xi: Rat,
    pub mu: Rat,
    pub delta: Rat,
    pub kmin: i64,
}

/// Compares `a` with `b k^xi` exactly for rational `xi = p/q >= 0` and
/// `k >= 1`, by raising both sides to the `q`-th power.
fn cmp_scaled(a: &Rat, b: &Rat, k: i64, xi: &Rat) -> Ordering {
    use Ordering::*;
    match (a.signum().cmp(&Rat::zero()), b.signum().cmp(&Rat::zero())) {
        (Less, Equal | Greater) | (Equal, Greater) => return Less,
        (Greater, Equal | Less) | (Equal, Less) => return Greater,
        (Equal, Equal) => return Equal,
        _ => {}
    }
    let p: u32 = xi.numer().try_into().expect("xi numerator fits in u32");
    let q: u32 = xi.denom().try_into().expect("xi denominator fits in u32");
    let lhs = pow(&a.abs(), q);
    let rhs = pow(&b.abs(), q) * pow(&int(k), p);
    if a.is_positive() {
        lhs.cmp(&rhs)
    } else {
        rhs.cmp(&lhs)
    }
}

impl OsvParams {
    /// Condition (iii) at `k`: `mu/k^xi <= 1 - (1 - 1/(k H^3) + 2/(k^2 (H^3)^2))^2`.
    pub fn cond3(&self, k: i64, geom: &GeometryParams) -> bool {
        let h = geom.h3r();
        let kr = int(k);
        let inner = Rat::one() - Rat::one() / (&kr * &h) + int(2) / (&kr * &kr * &h * &h);
        let rhs = Rat::one() - &inner * &inner;
        cmp_scaled(&self.mu, &rhs, k, &self.xi) != Ordering::Greater
    }

    /// All three conditions at `k`.
    pub fn holds_at(&self, k: i64, geom: &GeometryParams) -> bool {
        let h = geom.h3r();
        let c1 = self.mu < int(2) * &self.delta / &h;
        let c2 = self.delta < rat(1, 4) - Rat::one() / (int(k) * &h);
        c1 && c2 && self.cond3(k, geom)
    }

    /// `epsilon = delta / k^xi`; requires an integral `xi` or a perfect power.
    pub fn epsilon(&self, k: i64) -> Result<Rat> {
        if self.xi.is_integer() {
            let e: u32 = self.xi.to_integer().try_into().map_err(|_| Error::Input("xi too large".into()))?;
            return Ok(&self.delta / pow(&int(k), e));
        }
        // k^(p/q) rational only when k is a perfect q-th power
        let (p, q): (u32, u32) = (
            self.xi.numer().try_into().map_err(|_| Error::Input("xi too large".into()))?,
            self.xi.denom().try_into().map_err(|_| Error::Input("xi too large".into()))?,
        );
        let root = BigInt::from(k).nth_root(q);
        if num_traits::pow(root.clone(), q as usize) != BigInt::from(k) {
            return Err(Error::Input(format!("k^{} is irrational; pass epsilon explicitly", self.xi)));
        }
        Ok(&self.delta / num_traits::pow(Rat::from_integer(root), p as usize))
    }
}

/// Canonical parameters: `delta = 1/4 - 1/(k_probe H^3) - 1/100`,
/// `mu = 2 delta/H^3 - 1/100`, `kmin` the last failure of the conditions.
pub fn params_for(xi: &Rat, geom: &GeometryParams, k_probe: i64) -> Result<OsvParams> {
    if *xi < Rat::one() {
        return Err(Error::Input("xi must be at least 1".into()));
    }
    if k_probe < 1 {
        return Err(Error::NoSolution("k_probe must be positive".into()));
    }
    let h = geom.h3r();
    let delta = rat(1, 4) - Rat::one() / (int(k_probe) * &h) - rat(1, 100);
    if !delta.is_positive() {
        return Err(Error::NoSolution(format!("delta = {delta} is not positive for k_probe = {k_probe}")));
    }
    let mu = int(2) * &delta / &h - rat(1, 100);
    if !mu.is_positive() {
        return Err(Error::NoSolution(format!("mu = {mu} is not positive")));
    }
    let mut p = OsvParams { xi: xi.clone(), mu, delta, kmin: k_probe - 1 };
    const SCAN: i64 = 2000;
    let last_fail = (1..=SCAN).rev().find(|&k| !p.cond3(k, geom)).unwrap_or(0);
    if last_fail == SCAN {
        return Err(Error::NoSolution("condition (iii) fails throughout the scan".into()));
    }
    p.kmin = p.kmin.max(last_fail);
    for k in p.kmin + 1..=p.kmin + 20 {
        if !p.holds_at(k, geom) {
            return Err(Error::NoSolution(format!("conditions fail at k = {k}")));
        }
    }
    Ok(p)
}

/// `-(H^3/24) k^3 (1 - mu/k^xi) <= m + beta^2/(2 k H^3)` for the series
/// exponents `x^m y^beta`.
pub fn region_excluded(k: i64, params: &OsvParams, m: &Rat, beta_deg: &Rat, geom: &GeometryParams) -> bool {
    let h = geom.h3r();
    let kr = int(k);
    let scale = &h * &kr * &kr * &kr / int(24);
    let a = m + beta_deg * beta_deg / (int(2) * &kr * &h) + &scale;
    // excluded  <=>  a k^xi >= scale mu
    cmp_scaled(&(&scale * &params.mu), &a, k, &params.xi) != Ordering::Greater
}

/// `C(k, eps)`: `beta < eps k^2` and `m < eps k^3`, optionally `|m| < eps k^3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OsvRegion {
    pub k: i64,
    pub epsilon: Rat,
    pub two_sided: bool,
}

impl OsvRegion {
    pub fn new(k: i64, epsilon: Rat) -> Self {
        OsvRegion { k, epsilon, two_sided: false }
    }

    fn beta_bound(&self) -> Rat {
        &self.epsilon * int(self.k * self.k)
    }

    fn m_bound(&self) -> Rat {
        &self.epsilon * int(self.k * self.k * self.k)
    }

    pub fn contains(&self, beta: &Rat, m: &Rat) -> bool {
        let mb = self.m_bound();
        *beta < self.beta_bound() && *m < mb && (!self.two_sided || *m > -mb)
    }

    /// Non-negative integral degrees inside the region.
    fn degrees(&self) -> Vec<Rat> {
        let hi = self.beta_bound().ceil().to_integer() - 1;
        let mut out = Vec::new();
        let mut d = BigInt::zero();
        while d <= hi {
            out.push(Rat::from_integer(d.clone()));
            d += 1;
        }
        out
    }
}

/// Target classes `(0, kH, beta, m)` with `beta` in `[beta_lo, beta_hi]` and `m`
/// in `[m_lo, m_hi]`, stepped on the configured lattices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetBox {
    pub beta_lo: Rat,
    pub beta_hi: Rat,
    pub m_lo: Rat,
    pub m_hi: Rat,
}

impl TargetBox {
    pub fn targets(&self, geom: &GeometryParams) -> Vec<(Rat, Rat)> {
        let ms = lattice_points(&self.m_lo, &self.m_hi, geom.m_den);
        lattice_points(&self.beta_lo, &self.beta_hi, geom.beta_den)
            .into_iter()
            .flat_map(|b| ms.iter().map(move |m| (b.clone(), m.clone())))
            .collect()
    }

    /// The box in series exponents `x^{-m} y^{-beta}`.
    pub fn series_box(&self) -> TruncBox {
        TruncBox::new(
            Range::between(-self.m_hi.clone(), -self.m_lo.clone()),
            Range::between(-self.beta_hi.clone(), -self.beta_lo.clone()),
            Range::point(Rat::zero()),
        )
    }
}

/// `Z_D4^k = sum J(0, kH, beta, m) x^{-m} y^{-beta}` over the box.
pub fn zd4(k: i64, bx: &TargetBox, geom: &GeometryParams, j: &dyn Fn(&ChernData) -> Result<Rat>) -> Result<SparseSeries> {
    let mut out = SparseSeries::zero(bx.series_box());
    let c = int(k * geom.h3);
    for (beta, m) in bx.targets(geom) {
        let v = ChernData::new(int(0), c.clone(), beta.clone(), m.clone());
        let val = j(&v)?;
        out.add_term(Monomial::new(-m, -beta, Rat::zero()), val);
    }
    Ok(out)
}

/// One term of the coefficient-level identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OsvSplitting {
    pub d1: i64,
    pub beta1: Rat,
    pub beta2: Rat,
    pub m1: Rat,
    pub m2: Rat,
    pub chi: Rat,
}

fn splittings_for(v: &ChernData, region: &OsvRegion, geom: &GeometryParams) -> Result<Vec<OsvSplitting>> {
    let k = region.k;
    let h = geom.h3r();
    let kr = int(k);
    let degs = region.degrees();
    let mb = region.m_bound();
    let below_strict = |x: &Rat| -> BigInt { x.ceil().to_integer() - 1 };
    let mut out = Vec::new();
    for beta1 in &degs {
        for beta2 in &degs {
            let k1r = ((&v.s + beta2 - beta1) * int(2) / (&kr * &h) - &kr) / int(2);
            if !k1r.is_integer() {
                continue;
            }
            let k1: i64 = k1r.to_integer().try_into().map_err(|_| Error::Input("twist too large".into()))?;
            let k2r = int(k1 + k);
            let shift = (&k2r * &k2r * &k2r - &k1r * &k1r * &k1r) * &h / int(6) - &k2r * beta2 + &k1r * beta1 - &v.d;
            if !shift.is_integer() {
                continue;
            }
            // m1: P_{-m1,beta1} not structurally zero, (beta1, m1) in C
            let hi1 = crate::rank0direct::factor_m_bound(beta1, geom).floor().to_integer().min(below_strict(&mb));
            // -m2: I_{m2,beta2} not structurally zero, (beta2, -m2) in C
            let hi2 = crate::rank0direct::factor_m_bound(beta2, geom).floor().to_integer().min(below_strict(&mb));
            let mut lo1 = -Rat::from_integer(hi2) - &shift;
            if region.two_sided {
                lo1 = lo1.max(Rat::from_integer(-below_strict(&mb)));
            }
            let mut m1i = lo1.ceil().to_integer();
            while m1i <= hi1 {
                let m1 = Rat::from_integer(m1i.clone());
                m1i += 1;
                let m2 = &m1 + &shift;
                if !region.contains(beta1, &m1) || !region.contains(beta2, &-&m2) {
                    continue;
                }
                let v1 = geom.twist(&rank_one_class(beta1, &m1), &k1r).negate();
                let v2 = geom.twist(&rank_one_class(beta2, &m2), &k2r);
                assert_eq!(&v1 + &v2, *v);
                let chi = geom.euler_pairing(&v2, &v1);
                out.push(OsvSplitting { d1: k1, beta1: beta1.clone(), beta2: beta2.clone(), m1, m2, chi });
            }
        }
    }
    Ok(out)
}

/// Left side: the coefficient formula evaluated per target class.
pub fn osv_lhs(region: &OsvRegion, bx: &TargetBox, tables: &TableSet, geom: &GeometryParams) -> Result<SparseSeries> {
    let rec = Recorder::new(tables, geom);
    let t = int(geom.tors);
    let out = zd4(region.k, bx, geom, &|v| {
        let mut s = Rat::zero();
        for sp in splittings_for(v, region, geom)? {
            let sign = sign_pow(&(&sp.chi - int(1))).ok_or_else(|| Error::NonIntegralChi(sp.chi.clone()))?;
            let pt = rec.get(TableKind::Pt, &-&sp.m1, &sp.beta1);
            let dt = rec.get(TableKind::Dt1, &sp.m2, &sp.beta2);
            s += int(sign) * &sp.chi * pt * dt;
        }
        Ok(&t * &t * s)
    })?;
    rec.finish()?;
    Ok(out)
}

/// The `d1` range that can reach the target box.
pub fn needed_d1_window(region: &OsvRegion, bx: &TargetBox, geom: &GeometryParams) -> (i64, i64) {
    let k = int(region.k);
    let h = geom.h3r();
    let spread = region.degrees().last().cloned().unwrap_or_else(Rat::zero);
    let d1 = |beta: Rat| (beta * int(2) / (&k * &h) - &k) / int(2);
    let lo = d1(&bx.beta_lo - &spread).floor().to_integer();
    let hi = d1(&bx.beta_hi + &spread).ceil().to_integer();
    (lo.try_into().unwrap_or(i64::MIN), hi.try_into().unwrap_or(i64::MAX))
}

/// Table entries inside `C(k, eps)` as series in the table convention `x^m y^beta`.
fn region_series(kind: TableKind, region: &OsvRegion, tables: &TableSet, geom: &GeometryParams) -> SparseSeries {
    let mut s = SparseSeries::zero(TruncBox::unbounded());
    for ((deg, m), val) in &tables.table(kind).entries {
        let deg = int(*deg);
        if structurally_zero(geom, m, &deg) || !region.contains(&deg, &-m) {
            continue;
        }
        s.add_term(Monomial::new(m.clone(), deg, Rat::zero()), val.clone());
    }
    s
}

/// `Z_{D6-anti D6}^{k,eps}` summed over `d1` in the window.
pub fn zd6(region: &OsvRegion, tables: &TableSet, geom: &GeometryParams, d1_window: (i64, i64)) -> SparseSeries {
    let k = region.k;
    let h = geom.h3r();
    let kr = int(k);
    let ze = &kr * &kr * &kr * &h / int(6) + &kr * geom.c2hr() / int(12);
    let i_ser = region_series(TableKind::Dt1, region, tables, geom);
    let p_ser = region_series(TableKind::Pt, region, tables, geom);
    let mut total = SparseSeries::zero(TruncBox::unbounded());
    for d1 in d1_window.0..=d1_window.1 {
        let (a, b) = (int(d1), int(d1 + k));
        let pref = Monomial::new(
            (pow(&a, 3) - pow(&b, 3)) * &h / int(6),
            (&a * &a - &b * &b) * &h / int(2),
            ze.clone(),
        );
        let xz = Monomial::new(int(1), int(0), int(-1));
        let i_rule = [xz.clone(), Monomial::new(b.clone(), int(1), -&kr), Monomial::one()];
        let p_rule = [xz, Monomial::new(-a.clone(), int(-1), -&kr), Monomial::one()];
        let i_sub = i_ser.substitute(&i_rule, TruncBox::unbounded());
        let p_sub = p_ser.substitute(&p_rule, TruncBox::unbounded());
        total = total.add(&i_sub.mul(&p_sub).shift(&Rat::one(), &pref));
    }
    total
}

/// Keys the identity reads inside the box; used for the completeness check.
fn required_keys(region: &OsvRegion, bx: &TargetBox, tables: &TableSet, geom: &GeometryParams) -> Result<Vec<MissingKey>> {
    let rec = Recorder::new(tables, geom);
    let c = int(region.k * geom.h3);
    for (beta, m) in bx.targets(geom) {
        let v = ChernData::new(int(0), c.clone(), beta, m);
        for sp in splittings_for(&v, region, geom)? {
            rec.get(TableKind::Pt, &-&sp.m1, &sp.beta1);
            rec.get(TableKind::Dt1, &sp.m2, &sp.beta2);
        }
    }
    Ok(rec.missing())
}

/// Right side: `tors^2 d/dz Z_{D6} |_{z=-1}`, restricted to the box.
pub fn osv_rhs(
    region: &OsvRegion,
    bx: &TargetBox,
    tables: &TableSet,
    geom: &GeometryParams,
    d1_window: Option<(i64, i64)>,
) -> Result<SparseSeries> {
    let need = needed_d1_window(region, bx, geom);
    let window = match d1_window {
        Some(w) if w.0 > need.0 || w.1 < need.1 => {
            return Err(Error::WindowTooSmall { need_lo: need.0, need_hi: need.1 });
        }
        Some(w) => w,
        None => need,
    };
    let missing = required_keys(region, bx, tables, geom)?;
    if !missing.is_empty() {
        return Err(Error::IncompleteInput(missing));
    }
    let d = zd6(region, tables, geom, window).dz_at_minus1()?;
    let t = int(geom.tors);
    let mut out = SparseSeries::zero(bx.series_box());
    for (m, c) in d.terms() {
        out.add_term(m.clone(), c * &t * &t);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub monomial: Monomial,
    pub lhs: Rat,
    pub rhs: Rat,
    pub excluded: bool,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub mismatches: usize,
}

/// Per-monomial comparison; mismatches in the excluded region do not count.
pub fn compare(lhs: &SparseSeries, rhs: &SparseSeries, excluded: &dyn Fn(&Monomial) -> bool) -> Comparison {
    let mut all: BTreeMap<Monomial, (Rat, Rat)> = BTreeMap::new();
    for (m, c) in lhs.terms() {
        all.entry(m.clone()).or_insert((Rat::zero(), Rat::zero())).0 = c.clone();
    }
    for (m, c) in rhs.terms() {
        all.entry(m.clone()).or_insert((Rat::zero(), Rat::zero())).1 = c.clone();
    }
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for (m, (l, r)) in all {
        let ex = excluded(&m);
        if l != r && !ex {
            mismatches += 1;
        }
        rows.push(ComparisonRow { monomial: m, lhs: l, rhs: r, excluded: ex });
    }
    Comparison { rows, mismatches }
}

/// Both sides over the box and their comparison under the excluded-region mask.
pub fn osv_check(
    region: &OsvRegion,
    params: &OsvParams,
    bx: &TargetBox,
    tables: &TableSet,
    geom: &GeometryParams,
) -> Result<Comparison> {
    let lhs = osv_lhs(region, bx, tables, geom)?;
    let rhs = osv_rhs(region, bx, tables, geom, None)?;
    Ok(compare(&lhs, &rhs, &|m| region_excluded(region.k, params, &m.xe, &m.ye, geom)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{synthetic_table, Window};

    fn q5() -> GeometryParams {
        GeometryParams::quintic()
    }

    // around the class of a surface in |kH|
    fn small_box(k: i64) -> TargetBox {
        let b0 = rat(-5 * k * k, 2);
        let m0 = rat(5 * k * k * k, 6);
        TargetBox { beta_lo: &b0 - int(2), beta_hi: &b0 + int(2), m_lo: &m0 - int(4), m_hi: &m0 + int(4) }
    }

    fn synth(seed: u64) -> TableSet {
        let w = Window::new(0, 4, -30, 30);
        synthetic_table(seed, &[(TableKind::Pt, w.clone()), (TableKind::Dt1, w)], 4)
    }

    #[test]
    fn params_quintic() {
        let g = q5();
        let p = params_for(&int(1), &g, 10).unwrap();
        assert!(p.holds_at(10, &g));
        for k in p.kmin + 1..=p.kmin + 20 {
            assert!(p.holds_at(k, &g));
        }
        assert!(matches!(params_for(&int(1), &g, 0), Err(Error::NoSolution(_))));
        // k H^3 <= 4 cannot happen on the quintic; use H^3 = 1
        let g1 = GeometryParams::new(1, 10, 1, 2, 6);
        if let Ok(g1) = g1 {
            assert!(matches!(params_for(&int(1), &g1, 4), Err(Error::NoSolution(_))));
        }
        let p32 = params_for(&rat(3, 2), &g, 10).unwrap();
        assert!(p32.holds_at(p32.kmin + 1, &g));
    }

    #[test]
    fn excluded_region() {
        let g = q5();
        let p = params_for(&int(1), &g, 10).unwrap();
        assert!(!region_excluded(2, &p, &int(-1000), &int(0), &g));
        // equality is excluded: a = scale mu / k
        let k = 2;
        let scale = int(5 * 8) / int(24);
        let m = &scale * &p.mu / int(k) - &scale;
        assert!(region_excluded(k, &p, &m, &int(0), &g));
        assert!(!region_excluded(k, &p, &(&m - rat(1, 1000)), &int(0), &g));
        // dual form: not excluded iff Q(v) < k^2/2 mu/k^xi for v = (0, kH, -b, -a)
        for a in -20..20 {
            for b in -6..6 {
                let v = ChernData::new(int(0), int(5 * k), int(-b), int(-a));
                let q = g.q_of(&v).unwrap();
                let dual = q < int(k * k) / int(2) * &p.mu / int(k);
                assert_eq!(!region_excluded(k, &p, &int(a), &int(b), &g), dual);
            }
        }
    }

    #[test]
    fn minimal_tables_give_chi() {
        let g = q5();
        let t = TableSet::minimal_values(Window::new(0, 4, -30, 30));
        for (k, expect) in [(1i64, 5i64), (2, 15), (3, 35)] {
            assert_eq!(int(k * k * k * 5) / int(6) + int(k * 50) / int(12), int(expect));
            for eps in [rat(1, 2), rat(1, 2 * k * k * k)] {
                let region = OsvRegion::new(k, eps);
                let bx = small_box(k);
                let lhs = osv_lhs(&region, &bx, &t, &g).unwrap();
                let rhs = osv_rhs(&region, &bx, &t, &g, None).unwrap();
                assert_eq!(lhs, rhs);
                assert!(!lhs.is_empty());
                assert!(lhs.terms().values().all(|c| *c == int(expect)), "k = {k}");
            }
        }
    }

    #[test]
    fn hyperplane_monomial() {
        let g = q5();
        let region = OsvRegion::new(1, rat(1, 10));
        let bx = TargetBox { beta_lo: rat(-5, 2), beta_hi: rat(-5, 2), m_lo: rat(5, 6), m_hi: rat(5, 6) };
        let rhs = osv_rhs(&region, &bx, &TableSet::minimal(), &g, None).unwrap();
        assert_eq!(rhs.coeff(&Monomial::new(rat(-5, 6), rat(5, 2), int(0))), int(5));
    }

    #[test]
    fn identity_on_synthetic_tables() {
        let g = q5();
        for seed in 1..=3 {
            let t = synth(seed);
            for k in 1..=2 {
                for eps in [rat(1, 2), rat(1, 5)] {
                    for two_sided in [false, true] {
                        let region = OsvRegion { k, epsilon: eps.clone(), two_sided };
                        let bx = small_box(k);
                        let lhs = osv_lhs(&region, &bx, &t, &g).unwrap();
                        let rhs = osv_rhs(&region, &bx, &t, &g, None).unwrap();
                        assert_eq!(lhs, rhs, "seed {seed} k {k} eps {eps} two-sided {two_sided}");
                    }
                }
            }
        }
    }

    #[test]
    fn window_checks() {
        let g = q5();
        let region = OsvRegion::new(1, rat(1, 2));
        let bx = small_box(1);
        let need = needed_d1_window(&region, &bx, &g);
        let t = synth(1);
        assert!(matches!(
            osv_rhs(&region, &bx, &t, &g, Some((need.0 + 1, need.1))),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(osv_rhs(&region, &bx, &t, &g, Some((need.0 - 2, need.1 + 2))).is_ok());
        let empty = TableSet::default();
        assert!(matches!(osv_lhs(&region, &bx, &empty, &g), Err(Error::IncompleteInput(_))));
    }

    #[test]
    fn zero_tables_zero_sides() {
        let g = q5();
        let w = Window::new(0, 6, -40, 40);
        let mut t = TableSet::default();
        t.pt.windows.push(w.clone());
        t.dt1.windows.push(w);
        let region = OsvRegion::new(2, rat(1, 2));
        let bx = small_box(2);
        assert!(osv_lhs(&region, &bx, &t, &g).unwrap().is_zero());
        assert!(osv_rhs(&region, &bx, &t, &g, None).unwrap().is_zero());
    }

    #[test]
    fn zd4_single_entry() {
        let g = q5();
        let bx = TargetBox { beta_lo: int(-1), beta_hi: int(1), m_lo: int(0), m_hi: int(1) };
        let s = zd4(1, &bx, &g, &|v| Ok(if v.s == int(1) && v.d == int(1) { int(7) } else { int(0) })).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coeff(&Monomial::new(int(-1), int(-1), int(0))), int(7));
        let empty = TargetBox { beta_lo: int(1), beta_hi: int(0), m_lo: int(0), m_hi: int(0) };
        assert!(zd4(1, &empty, &g, &|_| Ok(int(1))).unwrap().is_zero());
    }
}
