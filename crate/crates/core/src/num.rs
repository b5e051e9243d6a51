//! Small helpers around `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// Parse `p/q` or an integer literal. Rejects a zero denominator.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        Some(Rat::new(p, q))
    } else {
        let p: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(p))
    }
}

/// `p/q`, or `p` when the value is an integer.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn is_int(r: &Rat) -> bool {
    r.is_integer()
}

/// `(-1)^e` for an integral `e`; `None` otherwise.
pub fn sign_pow(e: &Rat) -> Option<i64> {
    if !e.is_integer() {
        return None;
    }
    Some(if e.to_integer().is_even() { 1 } else { -1 })
}

pub fn floor(r: &Rat) -> Rat {
    r.floor()
}

pub fn ceil(r: &Rat) -> Rat {
    r.ceil()
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

/// Lattice points `j/den` in the closed interval `[lo, hi]`.
pub fn lattice_points(lo: &Rat, hi: &Rat, den: i64) -> Vec<Rat> {
    let d = int(den);
    let start = (lo * &d).ceil().to_integer();
    let end = (hi * &d).floor().to_integer();
    let mut out = Vec::new();
    let mut j = start;
    while j <= end {
        out.push(Rat::new(j.clone(), BigInt::from(den)));
        j += 1;
    }
    out
}

/// Exact `base^exp` for a non-negative integer exponent.
pub fn pow(base: &Rat, exp: u32) -> Rat {
    num_traits::pow(base.clone(), exp as usize)
}
