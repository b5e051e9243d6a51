//! Sparse trivariate Laurent series over exact rationals, always truncated to an
//! explicit box.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{int, sign_pow, Rat};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub xe: Rat,
    pub ye: Rat,
    pub ze: Rat,
}

impl Monomial {
    pub fn new(xe: Rat, ye: Rat, ze: Rat) -> Self {
        Monomial { xe, ye, ze }
    }

    pub fn one() -> Self {
        Monomial::new(Rat::zero(), Rat::zero(), Rat::zero())
    }

    pub fn times(&self, o: &Monomial) -> Monomial {
        Monomial::new(&self.xe + &o.xe, &self.ye + &o.ye, &self.ze + &o.ze)
    }

    fn coords(&self) -> [&Rat; 3] {
        [&self.xe, &self.ye, &self.ze]
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{} y^{} z^{}", self.xe, self.ye, self.ze)
    }
}

/// Closed interval with optional ends.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Range {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
}

impl Range {
    pub fn all() -> Self {
        Range { lo: None, hi: None }
    }

    pub fn between(lo: Rat, hi: Rat) -> Self {
        Range { lo: Some(lo), hi: Some(hi) }
    }

    pub fn point(v: Rat) -> Self {
        Range::between(v.clone(), v)
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.lo.as_ref().map_or(true, |lo| v >= lo) && self.hi.as_ref().map_or(true, |hi| v <= hi)
    }

    fn intersect(&self, o: &Range) -> Range {
        let lo = match (&self.lo, &o.lo) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let hi = match (&self.hi, &o.hi) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Range { lo, hi }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TruncBox {
    pub x: Range,
    pub y: Range,
    pub z: Range,
}

impl TruncBox {
    pub fn new(x: Range, y: Range, z: Range) -> Self {
        TruncBox { x, y, z }
    }

    pub fn unbounded() -> Self {
        TruncBox::default()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.x.contains(&m.xe) && self.y.contains(&m.ye) && self.z.contains(&m.ze)
    }

    pub fn intersect(&self, o: &TruncBox) -> TruncBox {
        TruncBox { x: self.x.intersect(&o.x), y: self.y.intersect(&o.y), z: self.z.intersect(&o.z) }
    }

    fn ranges(&self) -> [&Range; 3] {
        [&self.x, &self.y, &self.z]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSeries {
    terms: BTreeMap<Monomial, Rat>,
    bx: TruncBox,
}

impl SparseSeries {
    pub fn zero(bx: TruncBox) -> Self {
        SparseSeries { terms: BTreeMap::new(), bx }
    }

    pub fn one(bx: TruncBox) -> Self {
        SparseSeries::monomial(Rat::one(), Monomial::one(), bx)
    }

    pub fn monomial(coeff: Rat, m: Monomial, bx: TruncBox) -> Self {
        let mut s = SparseSeries::zero(bx);
        s.add_term(m, coeff);
        s
    }

    /// Add `coeff * m`, dropping it if it falls outside the box.
    pub fn add_term(&mut self, m: Monomial, coeff: Rat) {
        if coeff.is_zero() || !self.bx.contains(&m) {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *e += coeff;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rat> {
        &self.terms
    }

    pub fn bx(&self) -> &TruncBox {
        &self.bx
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &SparseSeries) -> SparseSeries {
        let mut out = SparseSeries::zero(self.bx.intersect(&o.bx));
        for (m, c) in self.terms.iter().chain(o.terms.iter()) {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, a: &Rat) -> SparseSeries {
        let mut out = SparseSeries::zero(self.bx.clone());
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * a);
        }
        out
    }

    pub fn neg(&self) -> SparseSeries {
        self.scale(&-Rat::one())
    }

    pub fn mul(&self, o: &SparseSeries) -> SparseSeries {
        let mut out = SparseSeries::zero(self.bx.intersect(&o.bx));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }

    /// Multiply by a single monomial.
    pub fn shift(&self, coeff: &Rat, m: &Monomial) -> SparseSeries {
        let mut out = SparseSeries::zero(self.bx.clone());
        for (m1, c1) in &self.terms {
            out.add_term(m1.times(m), c1 * coeff);
        }
        out
    }

    /// `exp(a)` truncated to the box. Requires a coordinate in which every term
    /// of `a` moves strictly towards a finite end of the box; powers are formed
    /// with only that coordinate truncated, so no intermediate term is lost.
    pub fn exp_series(&self) -> Result<SparseSeries> {
        if self.terms.contains_key(&Monomial::one()) {
            return Err(Error::NonNilpotent);
        }
        if self.terms.is_empty() {
            return Ok(SparseSeries::one(self.bx.clone()));
        }
        let (coord, range, steps) = self.nilpotent_direction().ok_or(Error::NonNilpotent)?;
        let mut relaxed = TruncBox::unbounded();
        *[&mut relaxed.x, &mut relaxed.y, &mut relaxed.z][coord] = range;
        let a = SparseSeries { terms: self.terms.clone(), bx: relaxed.clone() };
        let mut total = SparseSeries::one(relaxed.clone());
        let mut power = SparseSeries::one(relaxed);
        for n in 1..=steps {
            power = power.mul(&a).scale(&Rat::new(1.into(), n.into()));
            if power.is_zero() {
                break;
            }
            total = total.add(&power);
        }
        let mut out = SparseSeries::zero(self.bx.clone());
        for (m, c) in total.terms {
            out.add_term(m, c);
        }
        Ok(out)
    }

    /// A coordinate, its one-sided range, and the largest useful power.
    fn nilpotent_direction(&self) -> Option<(usize, Range, u64)> {
        for (i, r) in self.bx.ranges().into_iter().enumerate() {
            let exps: Vec<Rat> = self.terms.keys().map(|m| m.coords()[i].clone()).collect();
            let min_step = exps.iter().map(|e| e.abs()).min()?;
            if let (Some(hi), true) = (&r.hi, exps.iter().all(|e| e.is_positive())) {
                return Some((i, Range { lo: None, hi: Some(hi.clone()) }, max_power(hi, &min_step)));
            }
            if let (Some(lo), true) = (&r.lo, exps.iter().all(|e| e.is_negative())) {
                return Some((i, Range { lo: Some(lo.clone()), hi: None }, max_power(&-lo.clone(), &min_step)));
            }
        }
        None
    }

    /// Replace `x`, `y`, `z` by the given monomials; exponents map linearly.
    pub fn substitute(&self, rules: &[Monomial; 3], bx: TruncBox) -> SparseSeries {
        let mut out = SparseSeries::zero(bx);
        for (m, c) in &self.terms {
            let img = Monomial::new(
                &m.xe * &rules[0].xe + &m.ye * &rules[1].xe + &m.ze * &rules[2].xe,
                &m.xe * &rules[0].ye + &m.ye * &rules[1].ye + &m.ze * &rules[2].ye,
                &m.xe * &rules[0].ze + &m.ye * &rules[1].ze + &m.ze * &rules[2].ze,
            );
            out.add_term(img, c.clone());
        }
        out
    }

    /// `d/dz` at `z = -1`: `c x^a y^b z^g -> c g (-1)^(g-1) x^a y^b`.
    pub fn dz_at_minus1(&self) -> Result<SparseSeries> {
        let bx = TruncBox { z: Range::point(Rat::zero()), ..self.bx.clone() };
        let mut out = SparseSeries::zero(bx);
        for (m, c) in &self.terms {
            let sign = sign_pow(&(&m.ze - Rat::one())).ok_or_else(|| Error::NonIntegralZExponent(m.to_string()))?;
            out.add_term(Monomial::new(m.xe.clone(), m.ye.clone(), Rat::zero()), c * &m.ze * int(sign));
        }
        Ok(out)
    }

    /// One term per line, `<coeff> x^<r> y^<r> z^<r>`, sorted by monomial.
    pub fn dump(&self) -> String {
        self.terms.iter().map(|(m, c)| format!("{c} {m}\n")).collect()
    }
}

fn max_power(reach: &Rat, step: &Rat) -> u64 {
    if reach.is_negative() {
        return 0;
    }
    u64::try_from((reach / step).floor().to_integer()).unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use proptest::prelude::*;

    fn x(e: i64) -> Monomial {
        Monomial::new(int(e), int(0), int(0))
    }

    fn xbox(hi: i64) -> TruncBox {
        TruncBox::new(Range::between(int(-hi), int(hi)), Range::all(), Range::all())
    }

    fn poly(coeffs: &[(i64, Rat)], bx: TruncBox) -> SparseSeries {
        let mut s = SparseSeries::zero(bx);
        for (e, c) in coeffs {
            s.add_term(x(*e), c.clone());
        }
        s
    }

    #[test]
    fn products() {
        let b = xbox(3);
        let s = SparseSeries::monomial(int(1), x(1), b.clone()).mul(&SparseSeries::monomial(int(1), x(2), b.clone()));
        assert_eq!(s.coeff(&x(3)), int(1));
        let s = SparseSeries::monomial(int(1), x(2), b.clone()).mul(&SparseSeries::monomial(int(1), x(2), b.clone()));
        assert!(s.is_zero());
        let p = poly(&[(0, int(1)), (1, int(1))], b.clone());
        let q = poly(&[(0, int(1)), (1, int(-1))], b.clone());
        assert_eq!(p.mul(&q), poly(&[(0, int(1)), (2, int(-1))], b));
    }

    #[test]
    fn exponentials() {
        let b = TruncBox::new(Range::between(int(0), int(3)), Range::all(), Range::all());
        assert_eq!(SparseSeries::zero(b.clone()).exp_series().unwrap(), SparseSeries::one(b.clone()));
        let c = rat(2, 3);
        let e = SparseSeries::monomial(c.clone(), x(1), b.clone()).exp_series().unwrap();
        let expected = poly(&[(0, int(1)), (1, c.clone()), (2, &c * &c / int(2)), (3, &c * &c * &c / int(6))], b.clone());
        assert_eq!(e, expected);
        let bad = SparseSeries::monomial(int(1), Monomial::new(int(1), int(-1), int(0)), TruncBox::unbounded());
        assert!(matches!(bad.exp_series(), Err(Error::NonNilpotent)));
        assert!(matches!(SparseSeries::one(b).exp_series(), Err(Error::NonNilpotent)));
    }

    #[test]
    fn substitution() {
        let s = SparseSeries::monomial(int(1), x(2), TruncBox::unbounded());
        let rules = [Monomial::new(int(1), int(0), int(-1)), Monomial::new(int(0), int(1), int(0)), Monomial::new(int(0), int(0), int(1))];
        let t = s.substitute(&rules, TruncBox::unbounded());
        assert_eq!(t.coeff(&Monomial::new(int(2), int(0), int(-2))), int(1));
        let id = [x(1), Monomial::new(int(0), int(1), int(0)), Monomial::new(int(0), int(0), int(1))];
        assert_eq!(t.substitute(&id, TruncBox::unbounded()), t);
    }

    #[test]
    fn z_derivative() {
        let z = |e: Rat| Monomial::new(int(0), int(0), e);
        let d = SparseSeries::monomial(int(1), z(int(1)), TruncBox::unbounded()).dz_at_minus1().unwrap();
        assert_eq!(d.coeff(&Monomial::one()), int(1));
        let d = SparseSeries::monomial(int(1), z(int(5)), TruncBox::unbounded()).dz_at_minus1().unwrap();
        assert_eq!(d.coeff(&Monomial::one()), int(5));
        let d = SparseSeries::monomial(int(1), z(int(2)), TruncBox::unbounded()).dz_at_minus1().unwrap();
        assert_eq!(d.coeff(&Monomial::one()), int(-2));
        let bad = SparseSeries::monomial(int(1), Monomial::new(int(1), int(0), rat(1, 2)), TruncBox::unbounded());
        assert!(matches!(bad.dz_at_minus1(), Err(Error::NonIntegralZExponent(_))));
    }

    #[test]
    fn dump_is_sorted() {
        let mut s = SparseSeries::zero(TruncBox::unbounded());
        s.add_term(x(2), int(3));
        s.add_term(x(-1), rat(1, 2));
        assert_eq!(s.dump(), "1/2 x^-1 y^0 z^0\n3 x^2 y^0 z^0\n");
    }

    fn arb_series() -> impl Strategy<Value = SparseSeries> {
        prop::collection::vec((-2i64..3, -2i64..3, -5i64..6), 0..5).prop_map(|v| {
            let mut s = SparseSeries::zero(TruncBox::new(Range::between(int(-4), int(4)), Range::between(int(-4), int(4)), Range::all()));
            for (a, b, c) in v {
                s.add_term(Monomial::new(int(a), int(b), int(0)), int(c));
            }
            s
        })
    }

    // evaluation at a rational point: exponents are integral here.
    fn eval(s: &SparseSeries, pt: &[Rat; 3]) -> Rat {
        s.terms().iter().fold(Rat::zero(), |acc, (m, c)| {
            let mut v = c.clone();
            for (e, p) in m.coords().iter().zip(pt) {
                let n: i64 = e.to_integer().try_into().unwrap();
                v *= if n >= 0 { num_traits::pow(p.clone(), n as usize) } else { num_traits::pow(p.recip(), (-n) as usize) };
            }
            acc + v
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn exp_group_law(c1 in -5i64..6, c2 in -5i64..6, d in 1i64..4) {
            let b = TruncBox::new(Range::between(int(0), int(6)), Range::all(), Range::all());
            let a = poly(&[(1, rat(c1, d)), (2, rat(c2, d))], b.clone());
            let one = a.exp_series().unwrap().mul(&a.neg().exp_series().unwrap());
            prop_assert_eq!(one, SparseSeries::one(b.clone()));
            let a2 = poly(&[(3, rat(c2, d))], b);
            prop_assert_eq!(a.add(&a2).exp_series().unwrap(), a.exp_series().unwrap().mul(&a2.exp_series().unwrap()));
        }

        #[test]
        fn substitute_then_evaluate(v in prop::collection::vec((-2i64..3, -2i64..3, -2i64..3, -5i64..6), 1..6),
                                    r in prop::array::uniform9(-1i64..2), p in prop::array::uniform3(1i64..4)) {
            let mut s = SparseSeries::zero(TruncBox::unbounded());
            for (a, b, c, k) in v { s.add_term(Monomial::new(int(a), int(b), int(c)), int(k)); }
            let rules = [Monomial::new(int(r[0]), int(r[1]), int(r[2])), Monomial::new(int(r[3]), int(r[4]), int(r[5])), Monomial::new(int(r[6]), int(r[7]), int(r[8]))];
            let pt = [rat(p[0], 2), rat(p[1], 3), rat(p[2], 1)];
            let image_pt = [eval(&SparseSeries::monomial(int(1), rules[0].clone(), TruncBox::unbounded()), &pt),
                            eval(&SparseSeries::monomial(int(1), rules[1].clone(), TruncBox::unbounded()), &pt),
                            eval(&SparseSeries::monomial(int(1), rules[2].clone(), TruncBox::unbounded()), &pt)];
            prop_assert_eq!(eval(&s.substitute(&rules, TruncBox::unbounded()), &pt), eval(&s, &image_pt));
        }
    }
}
