//! Fixed inputs shared by the benchmarks.

use wallcross::num::{int, rat};
use wallcross::osv::TargetBox;
use wallcross::{ChernData, GeometryParams, Rat};

/// `q - 1` rank-0 factors of slope `nu` and one rank -1 head in position `e`.
pub fn rank_minus1_factors(q: usize, e: usize, b: &Rat, w0: &Rat, nu: &Rat, g: &GeometryParams) -> Vec<ChernData> {
    let h = g.h3r();
    let mut fs: Vec<ChernData> = (0..q - 1)
        .map(|i| {
            let c = int((i as i64 % 3 + 1) * g.h3);
            ChernData::new(int(0), c.clone(), nu * &c, rat(i as i64 - 2, g.m_den))
        })
        .collect();
    let c1 = int(3 * g.h3);
    let s1 = nu * (&c1 + b * &h) - w0 * &h;
    fs.insert(e - 1, ChernData::new(int(-1), c1, s1, rat(5, g.m_den)));
    fs
}

/// The class `2 H` on the quintic.
pub fn twice_hyperplane() -> ChernData {
    ChernData::new(int(0), int(10), int(-10), rat(20, 3))
}

/// Box around the class of a surface in `|kH|` on the quintic.
pub fn surface_box(k: i64) -> TargetBox {
    let b0 = rat(-5 * k * k, 2);
    let m0 = rat(5 * k * k * k, 6);
    TargetBox { beta_lo: &b0 - int(2), beta_hi: &b0 + int(2), m_lo: &m0 - int(4), m_hi: &m0 + int(4) }
}
