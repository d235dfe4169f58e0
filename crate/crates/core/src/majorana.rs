//! Jordan-Wigner Majorana operators acting on `L`-site bitstrings.
//!
//! Bit `m` of a basis index is site `m`; a set bit is an occupied fermion
//! (spin down). `c_m` carries the string `(-1)^(occupied sites below m)`.
//! Majoranas are `a_{2m} = c_m + c_m^dag` and `a_{2m+1} = i (c_m^dag - c_m)`
//! (zero-based).

use num_complex::Complex64 as C;

use crate::linalg::CMat;

#[inline]
fn string_sign(m: usize, s: usize) -> f64 {
    if (s & ((1usize << m) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `a_x |s> = phase |s'>`
#[inline]
pub fn apply(x: usize, s: usize) -> (C, usize) {
    let m = x / 2;
    let bit = 1usize << m;
    let sign = string_sign(m, s);
    let occupied = s & bit != 0;
    let phase = if x.is_multiple_of(2) {
        C::new(sign, 0.0)
    } else if occupied {
        C::new(0.0, -sign)
    } else {
        C::new(0.0, sign)
    };
    (phase, s ^ bit)
}

/// `c_m |s>`, or `None` when site `m` is empty.
#[inline]
pub fn annihilate(m: usize, s: usize) -> Option<(f64, usize)> {
    let bit = 1usize << m;
    (s & bit != 0).then(|| (string_sign(m, s), s ^ bit))
}

/// `c_m^dag |s>`, or `None` when site `m` is occupied.
#[inline]
pub fn create(m: usize, s: usize) -> Option<(f64, usize)> {
    let bit = 1usize << m;
    (s & bit == 0).then(|| (string_sign(m, s), s ^ bit))
}

/// `a_x a_y |s>`
#[inline]
pub fn apply_pair(x: usize, y: usize, s: usize) -> (C, usize) {
    let (p1, s1) = apply(y, s);
    let (p2, s2) = apply(x, s1);
    (p1 * p2, s2)
}

/// Dense matrix of `a_x` on `l` sites.
pub fn dense(x: usize, l: usize) -> CMat {
    let d = 1usize << l;
    let mut m = CMat::zeros(d, d);
    for s in 0..d {
        let (p, t) = apply(x, s);
        m[(t, s)] = p;
    }
    m
}

/// Sparse row-major operator: `rows[r]` lists `(column, value)`.
#[derive(Debug, Clone)]
pub struct SparseOp {
    pub rows: Vec<Vec<(usize, C)>>,
}

impl SparseOp {
    /// `sum_{x,y} w[x][y] a_x a_y` on `l` sites.
    pub fn quadratic(w: &[Vec<C>], l: usize) -> Self {
        let d = 1usize << l;
        let n = 2 * l;
        let mut rows: Vec<Vec<(usize, C)>> = vec![Vec::new(); d];
        // collect by column s, then transpose into rows
        for s in 0..d {
            let mut out: Vec<(usize, C)> = Vec::new();
            for (x, wx) in w.iter().enumerate().take(n) {
                for (y, &wxy) in wx.iter().enumerate().take(n) {
                    if wxy == C::new(0.0, 0.0) {
                        continue;
                    }
                    let (p, t) = apply_pair(x, y, s);
                    match out.iter_mut().find(|e| e.0 == t) {
                        Some(e) => e.1 += wxy * p,
                        None => out.push((t, wxy * p)),
                    }
                }
            }
            for (t, v) in out {
                rows[t].push((s, v));
            }
        }
        Self { rows }
    }

    /// `self * m`
    pub fn mul_dense(&self, m: &CMat) -> CMat {
        let d = self.rows.len();
        let mut out = CMat::zeros(d, m.ncols());
        for c in 0..m.ncols() {
            let col = m.col(c);
            for (r, row) in self.rows.iter().enumerate() {
                let mut acc = C::new(0.0, 0.0);
                for &(t, v) in row {
                    acc += v * col[t];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, mul};

    #[test]
    fn canonical_anticommutation() {
        let l = 3;
        let d = 1 << l;
        for x in 0..2 * l {
            for y in 0..2 * l {
                let ax = dense(x, l);
                let ay = dense(y, l);
                let s = mul(ax.as_ref(), ay.as_ref()) + mul(ay.as_ref(), ax.as_ref());
                let want = if x == y {
                    CMat::from_fn(d, d, |i, j| if i == j { C::new(2.0, 0.0) } else { C::new(0.0, 0.0) })
                } else {
                    CMat::zeros(d, d)
                };
                assert!(max_abs_diff(s.as_ref(), want.as_ref()) < 1e-14, "{x} {y}");
            }
        }
    }
}
