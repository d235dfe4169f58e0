//! Dense 2x2 complex matrices and closed-form Pauli exponentials.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C;

pub type Vec3 = [f64; 3];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    /// `v . sigma`
    pub fn pauli(v: Vec3) -> Mat2 {
        Mat2([
            [C::new(v[2], 0.0), C::new(v[0], -v[1])],
            [C::new(v[0], v[1]), C::new(-v[2], 0.0)],
        ])
    }

    /// `exp(-i t v.sigma) = cos(|v|t) - i sin(|v|t) v.sigma/|v|`
    pub fn exp_pauli(v: Vec3, t: f64) -> Mat2 {
        let r = norm(v);
        if r == 0.0 {
            return Mat2::IDENTITY;
        }
        let (s, c) = (r * t).sin_cos();
        let n = scale(v, 1.0 / r);
        Mat2::IDENTITY.scale(C::new(c, 0.0)) - Mat2::pauli(n).scale(I * s)
    }

    pub fn scale(self, a: C) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0] * a, m[0][1] * a], [m[1][0] * a, m[1][1] * a]])
    }

    pub fn adjoint(self) -> Mat2 {
        let m = self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(self) -> C {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(self, x: [C; 2]) -> [C; 2] {
        let m = self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    pub fn max_abs_diff(self, other: Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Pauli coordinates `(a0, a)` with `self = a0 + a.sigma` (complex in general).
    pub fn pauli_coords(self) -> (C, [C; 3]) {
        let m = self.0;
        let a0 = (m[0][0] + m[1][1]) * 0.5;
        let ax = (m[0][1] + m[1][0]) * 0.5;
        let ay = (m[1][0] - m[0][1]) * 0.5 * (-I);
        let az = (m[0][0] - m[1][1]) * 0.5;
        (a0, [ax, ay, az])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        let (a, b) = (self.0, b.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        let (a, b) = (self.0, b.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        self + b.scale(-ONE)
    }
}

pub fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn scale(v: Vec3, a: f64) -> Vec3 {
    [v[0] * a, v[1] * a, v[2] * a]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit-norm eigenvectors of `n.sigma` for eigenvalues `+1` and `-1`, with
/// the larger-magnitude component of each made real and positive.
pub fn pauli_eigvecs(n: Vec3) -> [[C; 2]; 2] {
    let plus = if n[2] >= 0.0 {
        let a = ((1.0 + n[2]) / 2.0).sqrt();
        [C::new(a, 0.0), C::new(n[0], n[1]) / (2.0 * a)]
    } else {
        let b = ((1.0 - n[2]) / 2.0).sqrt();
        [C::new(n[0], -n[1]) / (2.0 * b), C::new(b, 0.0)]
    };
    let minus = if n[2] <= 0.0 {
        let a = ((1.0 - n[2]) / 2.0).sqrt();
        [C::new(a, 0.0), -C::new(n[0], n[1]) / (2.0 * a)]
    } else {
        let b = ((1.0 + n[2]) / 2.0).sqrt();
        [-C::new(n[0], -n[1]) / (2.0 * b), C::new(b, 0.0)]
    };
    [plus, minus]
}
