//! Rank 2 invariants through the Joyce-Song pair `w_n = w - O(-n)`.
//!
//! Odd `ch1`: a single extraction below the final wall of `w_n`.
//! Even `ch1`: extraction just above the Joyce-Song wall, the wall-crossing
//! terms along that wall, and the tilt to Gieseker correction.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::jswcf::{distinct_orderings, tuple_coefficient, PerturbedBw, Side};
use crate::kgeom::{ChernData, GeometryParams, LineBW};
use crate::num::{int, lattice_points, rat, sign_pow, Rat};
use crate::rank0inductive::{decompose, kappa_of, ChiOrder, Decomposition, HeadSpec, PartFilter, PartSpec};
use crate::resolver::{Policy, Rank0Resolver};
use crate::tables::{castelnuovo_min, Provenance, Rank0Cache, Recorder, TableKind, TableSet};

/// Which side of the boundary slope the rank 0 parts of `A~` may sit on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strictness {
    /// Odd: `nu_H <= mu` (just below the final wall). Even: `nu_H < mu`
    /// (just above the Joyce-Song wall).
    #[default]
    Paper,
    /// The opposite inclusion of the boundary in both cases.
    Flip,
}

/// Weight of the tilt to Gieseker correction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TgWeight {
    /// `1/2 (-1)^(m1-m2) (m1-m2)`, what the wall-crossing definition gives.
    #[default]
    Definition,
    /// `(-1)^(m1-m2) (m1-m2)` as printed.
    Printed,
}

#[derive(Clone, Debug)]
pub struct Rank2Options {
    pub strictness: Strictness,
    pub tg_weight: TgWeight,
    pub policy: Policy,
    /// First `n` tried for rank 0 sub-invariants resolved by Method II.
    pub sub_n: i64,
    pub external: Option<BTreeMap<ChernData, Rat>>,
}

impl Default for Rank2Options {
    fn default() -> Self {
        Rank2Options { strictness: Strictness::Paper, tg_weight: TgWeight::Definition, policy: Policy::PreferDirect, sub_n: 1, external: None }
    }
}

/// `(m_dt, deg_dt)` of the ideal sheaf behind the rank one class `(1, kappa H, beta, m)`.
pub fn dt1_conversion(kappa: i64, beta: &Rat, m: &Rat, geom: &GeometryParams) -> (Rat, Rat) {
    let (k, h) = (int(kappa), geom.h3r());
    let deg = &k * &k * &h / int(2) - beta;
    let m_dt = &k * &k * &k * &h / int(6) - &k * &deg - m;
    (m_dt, deg)
}

/// Inverse of [`dt1_conversion`].
pub fn dt1_inverse(kappa: i64, m_dt: &Rat, deg: &Rat, geom: &GeometryParams) -> ChernData {
    let (k, h) = (int(kappa), geom.h3r());
    let beta = &k * &k * &h / int(2) - deg;
    let m = &k * &k * &k * &h / int(6) - &k * deg - m_dt;
    ChernData::new(int(1), &k * &h, beta, m)
}

/// `(k, w)` with `w` the normalized twist of a rank 2 class: `ch1 = H` for odd
/// `k`, `ch1 = 0` for even `k`.
pub fn normalize(alpha: &ChernData, geom: &GeometryParams) -> Result<(i64, ChernData)> {
    if alpha.r != int(2) {
        return Err(Error::Input(format!("{alpha} is not of rank 2")));
    }
    let k = kappa_of(alpha, geom).ok_or_else(|| Error::Input(format!("ch1 of {alpha} is not a multiple of H")))?;
    let shift = if k.rem_euclid(2) == 1 { rat(-(k - 1), 2) } else { rat(-k, 2) };
    let w = geom.twist(alpha, &shift);
    debug_assert_eq!(w.c, int(k.rem_euclid(2) * geom.h3));
    Ok((k, w))
}

fn w_n(w: &ChernData, n: i64, geom: &GeometryParams) -> ChernData {
    w - &geom.line_bundle(&int(-n))
}

/// The Joyce-Song wall of `w_n`: the line through `Pi(w_n)` and `Pi(O(-n))`.
pub fn js_line(wn: &ChernData, n: i64, geom: &GeometryParams) -> Result<LineBW> {
    let (pb, pw) = geom.pi(wn)?;
    let (ob, ow) = geom.pi(&geom.line_bundle(&int(-n)))?;
    if pb == ob {
        return Err(Error::DegenerateLine);
    }
    let g = (&pw - &ow) / (&pb - &ob);
    Ok(LineBW::through(&pb, &pw, &g))
}

/// `b`-width of the segment of a sloped line inside `U`, squared; `None` if it
/// misses `U`.
fn width_sq(line: &LineBW) -> Option<Rat> {
    let LineBW::Sloped { g, c0 } = line else { return None };
    let disc = g * g + int(2) * c0;
    disc.is_positive().then(|| int(4) * disc)
}

fn common_checks(w: &ChernData, n: i64, geom: &GeometryParams) -> Result<()> {
    if n < 1 {
        return Err(Error::NSufficiencyFailed(format!("n = {n} must be positive")));
    }
    if geom.chi_line_bundle(n, w).is_zero() {
        return Err(Error::ChiZero);
    }
    if !geom.delta_h(&w_n(w, n, geom)).is_positive() {
        return Err(Error::NSufficiencyFailed("Delta_H(w_n) <= 0".into()));
    }
    Ok(())
}

/// Odd case: the final wall of `w_n` meets the boundary of `U` at `b`-values
/// more than `n` apart.
pub fn validate_odd(w: &ChernData, n: i64, geom: &GeometryParams) -> Result<()> {
    common_checks(w, n, geom)?;
    match width_sq(&geom.bmt_line(&w_n(w, n, geom))?) {
        Some(ws) if ws > int(n * n) => Ok(()),
        _ => Err(Error::NSufficiencyFailed(format!("final wall of w_n spans a b-interval of width at most {n}"))),
    }
}

/// Even case: only necessary conditions. The Joyce-Song wall has width
/// `n + beta/(n H^3)`, never more than `n` once `beta <= 0`, so no width bound applies.
pub fn validate_even(w: &ChernData, n: i64, geom: &GeometryParams) -> Result<()> {
    common_checks(w, n, geom)?;
    match width_sq(&js_line(&w_n(w, n, geom), n, geom)?) {
        Some(_) => Ok(()),
        None => Err(Error::NSufficiencyFailed("Joyce-Song wall misses U".into())),
    }
}

/// Rank one heads `(1, kappa H, beta, m)` read from the DT1 table, scaled by the
/// torsion order.
pub fn dt1_heads<'a>(kappas: Vec<i64>, line: LineBW, rec: &'a Recorder<'a>) -> HeadSpec<'a> {
    let geom = rec.geom;
    HeadSpec {
        rank: 1,
        kappas,
        line,
        m_max: Box::new(move |kappa, beta| {
            let (k, h) = (int(kappa), geom.h3r());
            let deg = &k * &k * &h / int(2) - beta;
            if !deg.is_integer() || deg.is_negative() {
                return None;
            }
            Some(&k * &k * &k * &h / int(6) - &k * &deg - castelnuovo_min(geom, &deg))
        }),
        table: TableKind::Dt1,
        scale: int(geom.tors),
        key: Box::new(move |kappa, beta| {
            let (m_dt, deg) = dt1_conversion(kappa, beta, &Rat::zero(), geom);
            (deg, m_dt)
        }),
        rec,
    }
}

/// Coefficient of the `target` monomial in `A~(target, mu)`.
pub fn a_tilde_coefficient(
    target: &ChernData,
    heads: &HeadSpec<'_>,
    k_max: i64,
    filter: PartFilter,
    geom: &GeometryParams,
    j: &dyn Fn(&ChernData) -> Result<Rat>,
) -> Result<(Rat, Vec<Decomposition>)> {
    let parts = PartSpec { k_max, filter, order: ChiOrder::Descending };
    let ds = decompose(target, heads, &parts, geom, j)?;
    Ok((ds.iter().map(|d| d.term.clone()).sum(), ds))
}

#[derive(Clone, Debug)]
pub struct PairTerm {
    pub v1: ChernData,
    pub v2: ChernData,
    pub coefficient: Rat,
    pub j1: Rat,
    pub j2: Rat,
}

#[derive(Clone, Debug)]
pub struct CorrectionTerm {
    pub m1: Rat,
    pub m2: Rat,
    pub deg: Rat,
    pub value: Rat,
}

#[derive(Clone, Debug)]
pub struct Rank2Report {
    pub value: Rat,
    pub k: i64,
    pub w: ChernData,
    pub w_n: ChernData,
    pub n: i64,
    pub chi: Rat,
    pub prefactor: Rat,
    pub mu: Rat,
    pub a_tilde: Rat,
    pub decompositions: Vec<Decomposition>,
    /// Even case only.
    pub js_rank0_terms: Vec<PairTerm>,
    pub js_pair_terms: Vec<PairTerm>,
    pub j_tilt: Option<Rat>,
    pub correction: Vec<CorrectionTerm>,
    pub provenance: Vec<(ChernData, Rat, Provenance)>,
}

fn prefactor(chi: &Rat) -> Result<Rat> {
    let s = sign_pow(&(chi + Rat::one())).ok_or_else(|| Error::NonIntegralChi(chi.clone()))?;
    Ok(int(s) / chi)
}

fn resolver<'a>(tables: &'a TableSet, geom: &'a GeometryParams, cache: &'a Rank0Cache, opts: &'a Rank2Options) -> Rank0Resolver<'a> {
    let mut r = Rank0Resolver::new(tables, geom, cache, opts.policy, opts.sub_n);
    r.external = opts.external.as_ref();
    r
}

/// `J(alpha)` for `ch1(alpha) = kH` with `k` odd.
pub fn rank2_odd(alpha: &ChernData, n: i64, tables: &TableSet, geom: &GeometryParams, cache: &Rank0Cache, opts: &Rank2Options) -> Result<Rank2Report> {
    let (k, w) = normalize(alpha, geom)?;
    if k.rem_euclid(2) != 1 {
        return Err(Error::Input(format!("ch1 = {k}H is even")));
    }
    let wn = w_n(&w, n, geom);
    validate_odd(&w, n, geom)?;
    let line = geom.bmt_line(&wn)?;
    let chi = geom.chi_line_bundle(n, &w);
    let pre = prefactor(&chi)?;
    let mu = line.gradient().cloned().expect("sloped");
    let filter = match opts.strictness {
        Strictness::Paper => PartFilter::AtMost(mu.clone()),
        Strictness::Flip => PartFilter::Below(mu.clone()),
    };
    let res = resolver(tables, geom, cache, opts);
    // heads from the rank one set, plus w_n itself (kappa = n + 1) for the pure head term
    let heads = dt1_heads((1..=n + 1).collect(), line, &res.rec);
    let (a, ds) = a_tilde_coefficient(&wn, &heads, n, filter, geom, &|c| res.j(c))?;
    res.finish()?;
    Ok(Rank2Report {
        value: &pre * &a,
        k,
        w,
        w_n: wn,
        n,
        chi,
        prefactor: pre,
        mu,
        a_tilde: a,
        decompositions: ds,
        js_rank0_terms: vec![],
        js_pair_terms: vec![],
        j_tilt: None,
        correction: vec![],
        provenance: res.provenance(),
    })
}

/// A point of the wall where `v1`, `v1p` and `O(-n)[1]` have equal `nu_{b,w}`,
/// chosen at the midpoint of the wall's segment inside `U`.
pub(crate) fn js_point(v1: &ChernData, v1p: &ChernData, n: i64, geom: &GeometryParams) -> Result<(Rat, Rat)> {
    let o = geom.line_bundle(&int(-n));
    let (ob, ow) = geom.pi(&o)?;
    let (b1, w1) = geom.pi(v1).map_err(|_| Error::NotOnWall)?;
    if b1 == ob {
        return Err(Error::NotOnWall);
    }
    let g = (&w1 - &ow) / (&b1 - &ob);
    let line = LineBW::through(&ob, &ow, &g);
    let (b2, w2) = geom.pi(v1p).map_err(|_| Error::NotOnWall)?;
    if !line.contains(&b2, &w2) {
        return Err(Error::NotOnWall);
    }
    if width_sq(&line).is_none() {
        return Err(Error::NotOnWall);
    }
    let c0 = line.intercept();
    Ok((g.clone(), &g * &g + c0))
}

/// Coefficient of `J(v1) J(v1p)` (with `J(O(-n)[1]) = 1`) in the change of
/// `J(w_n)` across the Joyce-Song wall, summed over all distinct orderings.
pub fn c_pair_coeff(v1: &ChernData, v1p: &ChernData, n: i64, geom: &GeometryParams) -> Result<Rat> {
    let (b, w0) = js_point(v1, v1p, n, geom)?;
    let o_shift = geom.line_bundle(&int(-n)).negate();
    let above = PerturbedBw { geom, b: b.clone(), w0: w0.clone(), side: Side::Above };
    let below = PerturbedBw { geom, b, w0, side: Side::Below };
    let pairing = |x: &ChernData, y: &ChernData| geom.euler_pairing(x, y);
    let mut total = Rat::zero();
    for ord in distinct_orderings(&[v1.clone(), v1p.clone(), o_shift]) {
        total += tuple_coefficient(&ord, &above, &below, &pairing)?;
    }
    Ok(total)
}

/// Terms of the tilt to Gieseker correction for `w = (2, 0, beta, m)`:
/// pairs `(1, 0, -d, -m1) + (1, 0, -d, -m2) = w` with `m1 > m2`.
pub fn tilt_gieseker_terms(w: &ChernData, rec: &Recorder<'_>, weight: TgWeight) -> Vec<CorrectionTerm> {
    let geom = rec.geom;
    let deg = -&w.s / int(2);
    let mut out = Vec::new();
    if !deg.is_integer() || deg.is_negative() {
        return out;
    }
    let total = -&w.d;
    let floor = castelnuovo_min(geom, &deg);
    let t = int(geom.tors);
    for m1 in lattice_points(&floor, &(&total - &floor), 1) {
        let m2 = &total - &m1;
        if m1 <= m2 {
            continue;
        }
        let i1 = rec.get(TableKind::Dt1, &m1, &deg);
        let i2 = rec.get(TableKind::Dt1, &m2, &deg);
        if i1.is_zero() || i2.is_zero() {
            continue;
        }
        let gap = &m1 - &m2;
        let sign = int(sign_pow(&gap).expect("integral gap"));
        let mut value = sign * &gap * &t * &t * i1 * i2;
        if weight == TgWeight::Definition {
            value /= int(2);
        }
        out.push(CorrectionTerm { m1, m2, deg: deg.clone(), value });
    }
    out
}

/// `J_ti(alpha)` and `J(alpha)` for `ch1(alpha) = kH` with `k` even.
pub fn rank2_even(alpha: &ChernData, n: i64, tables: &TableSet, geom: &GeometryParams, cache: &Rank0Cache, opts: &Rank2Options) -> Result<Rank2Report> {
    let (k, w) = normalize(alpha, geom)?;
    if k.rem_euclid(2) != 0 {
        return Err(Error::Input(format!("ch1 = {k}H is odd")));
    }
    let wn = w_n(&w, n, geom);
    validate_even(&w, n, geom)?;
    let line = js_line(&wn, n, geom)?;
    let chi = geom.chi_line_bundle(n, &w);
    let pre = prefactor(&chi)?;
    let mu = line.gradient().cloned().expect("sloped");
    let filter = match opts.strictness {
        Strictness::Paper => PartFilter::Below(mu.clone()),
        Strictness::Flip => PartFilter::AtMost(mu.clone()),
    };
    let res = resolver(tables, geom, cache, opts);
    let heads = dt1_heads((0..=n).collect(), line, &res.rec);
    let (a, ds) = a_tilde_coefficient(&wn, &heads, n, filter, geom, &|c| res.j(c))?;

    let t = int(geom.tors);
    let half = &w.s / int(2);
    let mut js_rank0_terms = Vec::new();
    let mut js_pair_terms = Vec::new();
    // ideal sheaves (1, 0, half, m') need half = -deg with deg a non-negative integer
    if half.is_integer() && !half.is_positive() {
        let deg = -&half;
        let floor = castelnuovo_min(geom, &deg);
        // J(v1) = tors I_{-m', deg} vanishes for m' > -floor
        let top = -&floor;
        // rank 0 partner (0, nH, beta - half - n^2 H^3/2, m - m' + n^3 H^3/6), Q >= 0 bounds m' below
        let v2_at = |mp: &Rat| &wn - &ChernData::new(int(1), int(0), half.clone(), mp.clone());
        let probe = v2_at(&Rat::zero());
        let cap = crate::rank0inductive::part_m_max(n, &probe.s, geom);
        let bottom = &probe.d - &cap;
        for mp in lattice_points(&bottom, &top, 1) {
            let v1 = ChernData::new(int(1), int(0), half.clone(), mp.clone());
            let i1 = res.rec.get(TableKind::Dt1, &-&mp, &deg);
            if i1.is_zero() {
                continue;
            }
            let v2 = v2_at(&mp);
            if geom.q_of(&v2)?.is_negative() {
                continue;
            }
            let j2 = res.j(&v2)?;
            if j2.is_zero() {
                continue;
            }
            let c = geom.euler_pairing(&v2, &v1);
            let s = sign_pow(&(&c + Rat::one())).ok_or_else(|| Error::NonIntegralChi(c.clone()))?;
            let j1 = &t * i1;
            js_rank0_terms.push(PairTerm { v1, v2, coefficient: int(s) * c, j1, j2 });
        }
        // pairs v1 + v1' = w, unordered
        let total = &w.d;
        for mp in lattice_points(&(total + &floor), &top, 1) {
            let mpp = total - &mp;
            if mp > mpp {
                continue;
            }
            let i1 = res.rec.get(TableKind::Dt1, &-&mp, &deg);
            let i2 = res.rec.get(TableKind::Dt1, &-&mpp, &deg);
            if i1.is_zero() || i2.is_zero() {
                continue;
            }
            let v1 = ChernData::new(int(1), int(0), half.clone(), mp);
            let v1p = ChernData::new(int(1), int(0), half.clone(), mpp);
            let c = c_pair_coeff(&v1, &v1p, n, geom)?;
            js_pair_terms.push(PairTerm { v1, v2: v1p, coefficient: c, j1: &t * i1, j2: &t * i2 });
        }
    }
    let a_wn: Rat = js_rank0_terms.iter().chain(&js_pair_terms).map(|p| &p.coefficient * &p.j1 * &p.j2).sum();
    let j_tilt = &pre * (&a + &a_wn);
    let correction = tilt_gieseker_terms(&w, &res.rec, opts.tg_weight);
    let corr: Rat = correction.iter().map(|c| c.value.clone()).sum();
    res.finish()?;
    Ok(Rank2Report {
        value: &j_tilt - corr,
        k,
        w,
        w_n: wn,
        n,
        chi,
        prefactor: pre,
        mu,
        a_tilde: a,
        decompositions: ds,
        js_rank0_terms,
        js_pair_terms,
        j_tilt: Some(j_tilt),
        correction,
        provenance: res.provenance(),
    })
}

/// Dispatches on the parity of `ch1`.
pub fn rank2(alpha: &ChernData, n: i64, tables: &TableSet, geom: &GeometryParams, cache: &Rank0Cache, opts: &Rank2Options) -> Result<Rank2Report> {
    let (k, _) = normalize(alpha, geom)?;
    if k.rem_euclid(2) == 1 {
        rank2_odd(alpha, n, tables, geom, cache, opts)
    } else {
        rank2_even(alpha, n, tables, geom, cache, opts)
    }
}
