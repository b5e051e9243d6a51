//! Numerical classes, pairings, slopes, discriminants and `(b,w)`-plane lines.
//!
//! A class is stored as `(r, c, s, d) = (ch0, ch1.H^2, ch2.H, ch3)`. Pairings
//! assume `ch1` is a multiple of `H`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{int, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometryParams {
    pub h3: i64,
    pub c2h: i64,
    pub tors: i64,
    pub beta_den: i64,
    pub m_den: i64,
}

impl GeometryParams {
    pub fn new(h3: i64, c2h: i64, tors: i64, beta_den: i64, m_den: i64) -> Result<Self> {
        if h3 < 1 || tors < 1 || beta_den < 1 || m_den < 1 {
            return Err(Error::InvalidGeometry("h3, tors, beta_den, m_den must be positive".into()));
        }
        let g = GeometryParams { h3, c2h, tors, beta_den, m_den };
        for n in -10..=10 {
            let chi = g.hilbert_poly(&g.line_bundle(&int(n)))?.eval(&int(0));
            if !chi.is_integer() {
                return Err(Error::InvalidGeometry(format!("chi(O({n})) = {chi} is not an integer")));
            }
        }
        Ok(g)
    }

    /// The quintic threefold: `H^3 = 5`, `c2.H = 50`.
    pub fn quintic() -> Self {
        GeometryParams::new(5, 50, 1, 2, 6).expect("quintic is valid")
    }

    pub fn h3r(&self) -> Rat {
        int(self.h3)
    }

    pub fn c2hr(&self) -> Rat {
        int(self.c2h)
    }

    /// `ch O(aH)`.
    pub fn line_bundle(&self, a: &Rat) -> ChernData {
        self.twist(&ChernData::new(int(1), int(0), int(0), int(0)), a)
    }

    /// `ch(c) * e^{aH}`.
    pub fn twist(&self, c: &ChernData, a: &Rat) -> ChernData {
        let h = self.h3r();
        let a2 = a * a / int(2);
        let a3 = a * a * a / int(6);
        ChernData {
            r: c.r.clone(),
            c: &c.c + a * &c.r * &h,
            s: &c.s + a * &c.c + &a2 * &c.r * &h,
            d: &c.d + a * &c.s + &a2 * &c.c + &a3 * &c.r * &h,
        }
    }

    /// `chi(e1, e2)` by Hirzebruch-Riemann-Roch on a CY3.
    pub fn euler_pairing(&self, e1: &ChernData, e2: &ChernData) -> Rat {
        let h = self.h3r();
        &e1.r * &e2.d - &e2.r * &e1.d + (&e2.c * &e1.s - &e1.c * &e2.s) / &h
            + self.c2hr() / (int(12) * &h) * (&e1.r * &e2.c - &e2.r * &e1.c)
    }

    /// `P(t) = chi(O_X, c(t))`.
    pub fn hilbert_poly(&self, c: &ChernData) -> Result<HilbertPoly> {
        if c.is_zero() {
            return Err(Error::ZeroClass);
        }
        let h = self.h3r();
        let a3 = &c.r * &h / int(6);
        let a2 = &c.c / int(2);
        let a1 = &c.s + self.c2hr() * &c.r / int(12);
        let a0 = &c.d + self.c2hr() * &c.c / (int(12) * &h);
        Ok(HilbertPoly { coeffs: [a0, a1, a2, a3] })
    }

    pub fn mu_h(&self, c: &ChernData) -> ExtSlope {
        if c.r.is_zero() {
            ExtSlope::PlusInf
        } else {
            ExtSlope::Finite(&c.c / (&c.r * self.h3r()))
        }
    }

    pub fn nu_bw(&self, c: &ChernData, b: &Rat, w: &Rat) -> Result<ExtSlope> {
        if w * int(2) <= b * b {
            return Err(Error::OutsideU { b: b.clone(), w: w.clone() });
        }
        Ok(self.nu_bw_unchecked(c, b, w))
    }

    /// `nu_{b,w}` without the `(b,w) in U` check; also used on the boundary.
    pub fn nu_bw_unchecked(&self, c: &ChernData, b: &Rat, w: &Rat) -> ExtSlope {
        let h = self.h3r();
        let den = &c.c - b * &c.r * &h;
        if den.is_zero() {
            ExtSlope::PlusInf
        } else {
            ExtSlope::Finite((&c.s - w * &c.r * &h) / den)
        }
    }

    pub fn delta_h(&self, c: &ChernData) -> Rat {
        &c.c * &c.c - int(2) * &c.s * &c.r * self.h3r()
    }

    pub fn q_of(&self, v: &ChernData) -> Result<Rat> {
        v.require_rank0()?;
        let k = &v.c / self.h3r();
        let sc = &v.s / &v.c;
        Ok(&k * &k / int(2) + int(6) * &sc * &sc - int(12) * &v.d / &v.c)
    }

    /// Half the BMT form, linear in `(b, w)`.
    pub fn bmt_form(&self, c: &ChernData, b: &Rat, w: &Rat) -> Rat {
        let (wc, bc, cc) = self.bmt_coeffs(c);
        wc * w + bc * b + cc
    }

    /// Coefficients of `w`, `b` and the constant in half the BMT form.
    fn bmt_coeffs(&self, c: &ChernData) -> (Rat, Rat, Rat) {
        let c0 = &c.r * self.h3r();
        let (c1, c2, c3) = (&c.c, &c.s, &c.d);
        (
            self.delta_h(c),
            int(3) * &c0 * c3 - c1 * c2,
            int(2) * c2 * c2 - int(3) * c1 * c3,
        )
    }

    pub fn bmt_line(&self, c: &ChernData) -> Result<LineBW> {
        let (wc, bc, cc) = self.bmt_coeffs(c);
        if wc.is_zero() {
            return Err(Error::DegenerateLine);
        }
        let line = LineBW::Sloped { g: -bc / &wc, c0: -cc / &wc };
        if !c.r.is_zero() && !c.c.is_zero() {
            let (pb, pw) = self.pi(c)?;
            let (qb, qw) = self.pi_prime(c);
            assert!(line.contains(&pb, &pw) && line.contains(&qb, &qw), "BMT line misses Pi or Pi'");
        }
        Ok(line)
    }

    /// The final wall of a rank 0 class.
    pub fn lf_rank0(&self, v: &ChernData) -> Result<LineBW> {
        v.require_rank0()?;
        let line = self.bmt_line(v)?;
        let lv = self.lv_line(v)?;
        let q = self.q_of(v)?;
        assert_eq!(lv.intercept() - line.intercept(), q / int(4));
        Ok(line)
    }

    /// The line above which no wall for `v` exists.
    pub fn lv_line(&self, v: &ChernData) -> Result<LineBW> {
        v.require_rank0()?;
        let k = &v.c / self.h3r();
        let g = &v.s / &v.c;
        Ok(LineBW::Sloped { c0: &k * &k / int(8) - &g * &g / int(2), g })
    }

    /// `Pi(c) = (c/(r H^3), s/(r H^3))`.
    pub fn pi(&self, c: &ChernData) -> Result<(Rat, Rat)> {
        if c.r.is_zero() {
            return Err(Error::RankZeroProjection);
        }
        let den = &c.r * self.h3r();
        Ok((&c.c / &den, &c.s / &den))
    }

    /// `Pi'(c) = (2s/c, 3d/c)`.
    pub fn pi_prime(&self, c: &ChernData) -> (Rat, Rat) {
        (int(2) * &c.s / &c.c, int(3) * &c.d / &c.c)
    }

    /// `chi(O(-n), v) = m + n s + k n^2 H^3/2 + k c2h/12` style pairing with a line bundle.
    pub fn chi_line_bundle(&self, n: i64, v: &ChernData) -> Rat {
        self.euler_pairing(&self.line_bundle(&int(-n)), v)
    }
}

/// Quintic-style restricted Bogomolov-Gieseker region.
pub fn restricted_bg_ok(b: &Rat, w: &Rat) -> bool {
    let fl = b.floor();
    let frac = b - &fl;
    let threshold = b * b / int(2) + &frac * (&fl - b + int(1)) / int(2);
    w > &threshold
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChernData {
    pub r: Rat,
    pub c: Rat,
    pub s: Rat,
    pub d: Rat,
}

impl ChernData {
    pub fn new(r: Rat, c: Rat, s: Rat, d: Rat) -> Self {
        ChernData { r, c, s, d }
    }

    pub fn from_ints(r: i64, c: i64, s: Rat, d: Rat) -> Self {
        ChernData { r: int(r), c: int(c), s, d }
    }

    pub fn zero() -> Self {
        ChernData::new(Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.c.is_zero() && self.s.is_zero() && self.d.is_zero()
    }

    /// Derived dual: `(r, -c, s, -d)`.
    pub fn dualize(&self) -> Self {
        ChernData::new(self.r.clone(), -&self.c, self.s.clone(), -&self.d)
    }

    /// Shift by one: all components negated.
    pub fn negate(&self) -> Self {
        -self.clone()
    }

    pub fn scale(&self, a: &Rat) -> Self {
        ChernData::new(a * &self.r, a * &self.c, a * &self.s, a * &self.d)
    }

    /// `nu_H = s/c`, `+inf` when `c = 0`.
    pub fn nu_h(&self) -> Result<ExtSlope> {
        if !self.r.is_zero() {
            return Err(Error::NuHRankNonzero);
        }
        if self.c.is_zero() {
            Ok(ExtSlope::PlusInf)
        } else {
            Ok(ExtSlope::Finite(&self.s / &self.c))
        }
    }

    pub fn require_rank0(&self) -> Result<()> {
        if self.r.is_zero() && self.c.is_positive() {
            Ok(())
        } else {
            Err(Error::NotRankZeroDim2(self.clone()))
        }
    }
}

impl fmt::Display for ChernData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.r, self.c, self.s, self.d)
    }
}

impl Add for ChernData {
    type Output = ChernData;
    fn add(self, o: ChernData) -> ChernData {
        &self + &o
    }
}

impl Add for &ChernData {
    type Output = ChernData;
    fn add(self, o: &ChernData) -> ChernData {
        ChernData::new(&self.r + &o.r, &self.c + &o.c, &self.s + &o.s, &self.d + &o.d)
    }
}

impl Sub for ChernData {
    type Output = ChernData;
    fn sub(self, o: ChernData) -> ChernData {
        &self - &o
    }
}

impl Sub for &ChernData {
    type Output = ChernData;
    fn sub(self, o: &ChernData) -> ChernData {
        ChernData::new(&self.r - &o.r, &self.c - &o.c, &self.s - &o.s, &self.d - &o.d)
    }
}

impl Neg for ChernData {
    type Output = ChernData;
    fn neg(self) -> ChernData {
        ChernData::new(-self.r, -self.c, -self.s, -self.d)
    }
}

/// Rational slope or `+inf`; `+inf` sorts above every rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtSlope {
    Finite(Rat),
    PlusInf,
}

/// Cubic `a0 + a1 t + a2 t^2 + a3 t^3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertPoly {
    pub coeffs: [Rat; 4],
}

impl HilbertPoly {
    pub fn eval(&self, t: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, a| acc * t + a)
    }

    /// Degree, with the zero polynomial given degree 0.
    pub fn degree(&self) -> usize {
        (0..4).rev().find(|&i| !self.coeffs[i].is_zero()).unwrap_or(0)
    }

    /// Divide by the leading coefficient.
    pub fn reduced(&self) -> HilbertPoly {
        let lead = self.coeffs[self.degree()].clone();
        if lead.is_zero() {
            return self.clone();
        }
        HilbertPoly { coeffs: self.coeffs.clone().map(|a| a / &lead) }
    }

    /// Reduced polynomial with its constant term dropped.
    pub fn tilt_reduced(&self) -> HilbertPoly {
        let mut p = self.reduced();
        p.coeffs[0] = Rat::zero();
        p
    }

    pub fn order_key(&self) -> PolyOrderKey {
        let deg = self.degree();
        PolyOrderKey { degree: deg, coeffs: (0..=deg).rev().map(|i| self.coeffs[i].clone()).collect() }
    }
}

/// Key for the asymptotic order on monic polynomials and zero: higher degree
/// sorts first; equal degrees compare lexicographically on descending coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyOrderKey {
    pub degree: usize,
    pub coeffs: Vec<Rat>,
}

impl Ord for PolyOrderKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree.cmp(&self.degree).then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl PartialOrd for PolyOrderKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A line in the `(b, w)` plane.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LineBW {
    /// `w = g b + c0`.
    Sloped { g: Rat, c0: Rat },
    /// `b = b0`.
    Vertical { b: Rat },
}

/// Where a line meets `U = {w > b^2/2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineGeometry {
    pub intersects_u: bool,
    /// `(g - sqrt(g^2 + 2 c0), g + sqrt(g^2 + 2 c0))` for sloped lines meeting `U`.
    pub boundary_b_values: Option<(QuadValue, QuadValue)>,
}

impl LineBW {
    pub fn through(b: &Rat, w: &Rat, g: &Rat) -> LineBW {
        LineBW::Sloped { g: g.clone(), c0: w - g * b }
    }

    pub fn gradient(&self) -> Option<&Rat> {
        match self {
            LineBW::Sloped { g, .. } => Some(g),
            LineBW::Vertical { .. } => None,
        }
    }

    /// Intercept for a sloped line, the `b` value for a vertical one.
    pub fn intercept(&self) -> Rat {
        match self {
            LineBW::Sloped { c0, .. } => c0.clone(),
            LineBW::Vertical { b } => b.clone(),
        }
    }

    pub fn contains(&self, b: &Rat, w: &Rat) -> bool {
        match self {
            LineBW::Sloped { g, c0 } => *w == g * b + c0,
            LineBW::Vertical { b: b0 } => b == b0,
        }
    }

    /// `w >= g b + c0`. Vertical lines count every point as on-or-above.
    pub fn above_or_on(&self, b: &Rat, w: &Rat) -> bool {
        match self {
            LineBW::Sloped { g, c0 } => *w >= g * b + c0,
            LineBW::Vertical { .. } => true,
        }
    }

    pub fn geometry(&self) -> LineGeometry {
        match self {
            LineBW::Sloped { g, c0 } => {
                let disc = g * g + int(2) * c0;
                if disc.is_positive() {
                    let lo = QuadValue::from_sqrt(g.clone(), -Rat::one(), &disc);
                    let hi = QuadValue::from_sqrt(g.clone(), Rat::one(), &disc);
                    LineGeometry { intersects_u: true, boundary_b_values: Some((lo, hi)) }
                } else {
                    LineGeometry { intersects_u: false, boundary_b_values: None }
                }
            }
            LineBW::Vertical { b } => {
                let v = QuadValue::rational(b.clone());
                LineGeometry { intersects_u: true, boundary_b_values: Some((v.clone(), v)) }
            }
        }
    }
}

/// `p + q sqrt(rad)`, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadValue {
    pub p: Rat,
    pub q: Rat,
    pub rad: BigInt,
}

impl QuadValue {
    pub fn rational(p: Rat) -> Self {
        QuadValue { p, q: Rat::zero(), rad: BigInt::zero() }
    }

    pub fn new(p: Rat, q: Rat, rad: BigInt) -> Self {
        assert!(!rad.is_negative(), "negative radicand");
        let root = rad.sqrt();
        if &root * &root == rad {
            return QuadValue::rational(p + q * Rat::from_integer(root));
        }
        if q.is_zero() {
            return QuadValue::rational(p);
        }
        QuadValue { p, q, rad }
    }

    /// `p + q sqrt(x)` for a non-negative rational `x`.
    pub fn from_sqrt(p: Rat, q: Rat, x: &Rat) -> Self {
        let den = x.denom().clone();
        let rad = x.numer() * &den;
        QuadValue::new(p, q / Rat::from_integer(den), rad)
    }

    pub fn sign(&self) -> Ordering {
        let sp = self.p.cmp(&Rat::zero());
        let sq = if self.rad.is_zero() { Ordering::Equal } else { self.q.cmp(&Rat::zero()) };
        if sq == Ordering::Equal {
            return sp;
        }
        if sp == Ordering::Equal || sp == sq {
            return sq;
        }
        let p2 = &self.p * &self.p;
        let q2r = &self.q * &self.q * Rat::from_integer(self.rad.clone());
        match p2.cmp(&q2r) {
            Ordering::Greater => sp,
            Ordering::Less => sq,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        QuadValue { p: &self.p - r, q: self.q.clone(), rad: self.rad.clone() }.sign()
    }

    /// Exact comparison of two values with arbitrary radicands.
    pub fn cmp_quad(&self, other: &QuadValue) -> Ordering {
        if other.rad.is_zero() || other.q.is_zero() {
            return self.cmp_rat(&other.p);
        }
        if self.rad.is_zero() || self.q.is_zero() {
            return other.cmp_rat(&self.p).reverse();
        }
        if self.rad == other.rad {
            return QuadValue { p: &self.p - &other.p, q: &self.q - &other.q, rad: self.rad.clone() }.sign();
        }
        // sign(X + Y) with X = A + B sqrt(r1), Y = -C sqrt(r2).
        let x = QuadValue { p: &self.p - &other.p, q: self.q.clone(), rad: self.rad.clone() };
        let sx = x.sign();
        let sy = (-&other.q).cmp(&Rat::zero());
        if sx == Ordering::Equal {
            return sy;
        }
        if sy == Ordering::Equal || sx == sy {
            return sx;
        }
        let r1 = Rat::from_integer(self.rad.clone());
        let r2 = Rat::from_integer(other.rad.clone());
        let x2 = QuadValue {
            p: &x.p * &x.p + &x.q * &x.q * &r1 - &other.q * &other.q * &r2,
            q: int(2) * &x.p * &x.q,
            rad: self.rad.clone(),
        };
        match x2.sign() {
            Ordering::Greater => sx,
            Ordering::Less => sy,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn sub_rat(&self, r: &Rat) -> QuadValue {
        QuadValue { p: &self.p - r, q: self.q.clone(), rad: self.rad.clone() }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        crate::num::to_f64(&self.p) + crate::num::to_f64(&self.q) * self.rad.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl fmt::Display for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{} + {}*sqrt({})", self.p, self.q, self.rad)
        }
    }
}

/// Twisting helper for the common `(1, 0, -beta, -m)` shape of ideal sheaves and pairs.
pub fn rank_one_class(beta: &Rat, m: &Rat) -> ChernData {
    ChernData::new(int(1), Rat::zero(), -beta.clone(), -m.clone())
}
