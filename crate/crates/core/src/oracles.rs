//! Independent hand expansions of the wall-crossing coefficients for three
//! factors, used as oracles for the general engine.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::jswcf::{distinct_orderings, u_coeff, PerturbedBw, Side, SlopeAssignment};
use crate::kgeom::{ChernData, ExtSlope, GeometryParams};
use crate::num::{int, rat, sign_pow, Rat};
use crate::rank2::js_point;

/// `S` of the definition for at most three factors, written out.
pub fn s3(f: &[ChernData], tau: &dyn Fn(&ChernData) -> (ExtSlope, Rat), tt: &dyn Fn(&ChernData) -> (ExtSlope, Rat)) -> i64 {
    let mut sign = 1;
    for i in 0..f.len() - 1 {
        let left = f[..=i].iter().fold(ChernData::zero(), |a, c| &a + c);
        let right = f[i + 1..].iter().fold(ChernData::zero(), |a, c| &a + c);
        let a = tau(&f[i]) <= tau(&f[i + 1]) && tt(&left) > tt(&right);
        let b = tau(&f[i]) > tau(&f[i + 1]) && tt(&left) <= tt(&right);
        if a {
            sign = -sign;
        } else if !b {
            return 0;
        }
    }
    sign
}

/// `U(a1, a2, a3)` expanded by hand over the eight (psi, xi) block patterns.
pub fn u3(f: &[ChernData; 3], tau: &dyn Fn(&ChernData) -> (ExtSlope, Rat), tt: &dyn Fn(&ChernData) -> (ExtSlope, Rat)) -> Rat {
    let [a, b, c] = f;
    let ab = a + b;
    let bc = b + c;
    let abc = &ab + c;
    let mut total = Rat::zero();
    // psi blocks with equal tau inside; 1/|block|! weights
    let psis: Vec<(Vec<ChernData>, Rat)> = {
        let mut v = vec![(vec![a.clone(), b.clone(), c.clone()], Rat::one())];
        if tau(a) == tau(b) {
            v.push((vec![ab.clone(), c.clone()], rat(1, 2)));
        }
        if tau(b) == tau(c) {
            v.push((vec![a.clone(), bc.clone()], rat(1, 2)));
        }
        if tau(a) == tau(b) && tau(b) == tau(c) {
            v.push((vec![abc.clone()], rat(1, 6)));
        }
        v
    };
    for (betas, wpsi) in psis {
        let m = betas.len();
        // xi: consecutive groupings of the m betas into l blocks, each with S of its members
        let groupings: Vec<Vec<std::ops::Range<usize>>> = match m {
            1 => vec![vec![0..1]],
            2 => vec![vec![0..1, 1..2], vec![0..2]],
            _ => vec![vec![0..1, 1..2, 2..3], vec![0..2, 2..3], vec![0..1, 1..3], vec![0..3]],
        };
        for gr in groupings {
            let l = gr.len();
            let gammas: Vec<ChernData> = gr.iter().map(|r| betas[r.clone()].iter().fold(ChernData::zero(), |x, y| &x + y)).collect();
            if gammas.windows(2).any(|p| tt(&p[0]) != tt(&p[1])) {
                continue;
            }
            let mut prod = Rat::one();
            for r in &gr {
                prod *= int(s3(&betas[r.clone()], tau, tt));
            }
            let sign = if l % 2 == 1 { 1 } else { -1 };
            total += int(sign) * prod * &wpsi / int(l as i64);
        }
    }
    total
}

/// The q = 3 term of the definition written out: the three labelled trees on
/// three vertices with edges oriented from the smaller index.
pub fn hand_tuple(f: &[ChernData; 3], u: &Rat, chi: &dyn Fn(&ChernData, &ChernData) -> Rat) -> Rat {
    let (c12, c13, c23) = (chi(&f[0], &f[1]), chi(&f[0], &f[2]), chi(&f[1], &f[2]));
    let trees = &c12 * &c13 + &c12 * &c23 + &c13 * &c23;
    let sign = int(sign_pow(&(int(2) + &c12 + &c13 + &c23)).expect("integral chi"));
    sign * u * trees / int(4)
}

/// `c_pair_coeff` recomputed from [`u3`] and [`hand_tuple`]; also checks the
/// hand `U` against the engine on every ordering.
pub fn c_pair_oracle(v1: &ChernData, v1p: &ChernData, n: i64, g: &GeometryParams) -> Result<Rat> {
    let (b, w0) = js_point(v1, v1p, n, g)?;
    let above = PerturbedBw { geom: g, b: b.clone(), w0: w0.clone(), side: Side::Above };
    let below = PerturbedBw { geom: g, b, w0, side: Side::Below };
    let tau = |c: &ChernData| above.key(c);
    let tt = |c: &ChernData| below.key(c);
    let chi = |x: &ChernData, y: &ChernData| g.euler_pairing(x, y);
    let o_shift = g.line_bundle(&int(-n)).negate();
    let mut total = Rat::zero();
    for ord in distinct_orderings(&[v1.clone(), v1p.clone(), o_shift]) {
        let f: [ChernData; 3] = ord.clone().try_into().expect("three factors");
        let u = u3(&f, &tau, &tt);
        if u != u_coeff(&ord, &above, &below)? {
            return Err(Error::Input(format!("hand U disagrees with the engine on {ord:?}")));
        }
        total += hand_tuple(&f, &u, &chi);
    }
    Ok(total)
}
