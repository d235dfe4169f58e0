//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use faer::Mat;
use floquet_sense::ed::{build_hamiltonian, EdParams};
use floquet_sense::linalg::{self, CMat};
use floquet_sense::su2::Mat2;
use floquet_sense::Complex64 as C;

/// Matrix exponential of a 2x2 matrix by scaling and squaring a Taylor series.
pub fn expm2(a: Mat2) -> Mat2 {
    let norm: f64 = a.0.iter().flatten().map(|x| x.norm()).sum();
    let mut s = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        s += 1;
    }
    let x = a.scale(C::new(scale, 0.0));
    let mut term = Mat2::IDENTITY;
    let mut sum = Mat2::IDENTITY;
    for k in 1..30 {
        term = (term * x).scale(C::new(1.0 / k as f64, 0.0));
        sum = sum + term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// `-i t H` for `H = v.sigma`.
pub fn gen(v: [f64; 3], t: f64) -> Mat2 {
    Mat2::pauli(v).scale(C::new(0.0, -t))
}

/// Delta kick replaced by a square pulse of width `w` at the end of the
/// period, amplitude `h1 / w`.
pub fn narrow_pulse_propagator(j: f64, h0: f64, h1: f64, tau: f64, k: f64, w: f64) -> Mat2 {
    let mu = [0.0, j * k.sin(), h0 + j * k.cos()];
    let on = [mu[0], mu[1], mu[2] + h1 / w];
    expm2(gen(on, w)) * expm2(gen(mu, tau - w))
}

/// Narrow-pulse propagator extrapolated to zero width (first-order error
/// in `w` removed).
pub fn kicked_propagator_oracle(j: f64, h0: f64, h1: f64, tau: f64, k: f64) -> Mat2 {
    let w = tau * 1e-4;
    let a = narrow_pulse_propagator(j, h0, h1, tau, k, w);
    let b = narrow_pulse_propagator(j, h0, h1, tau, k, w / 2.0);
    b.scale(C::new(2.0, 0.0)) - a
}

/// Full-space one-period propagator from a dense eigendecomposition of the
/// whole `2^N` Hamiltonian, kick applied as a diagonal phase.
pub fn full_space_propagator(edp: &EdParams) -> CMat {
    let h = build_hamiltonian(edp, edp.h0);
    let (e, v) = linalg::eigh_real(h.as_ref()).unwrap();
    let d = e.len();
    let vc = linalg::to_complex(v.as_ref());
    let ph = CMat::from_fn(d, d, |i, j| vc[(i, j)] * C::from_polar(1.0, -e[j] * edp.tau));
    let w = linalg::mul(ph.as_ref(), vc.transpose());
    let n = edp.n;
    CMat::from_fn(d, d, |i, j| {
        let sz = n as f64 - 2.0 * i.count_ones() as f64;
        C::from_polar(1.0, edp.h1 * sz) * w[(i, j)]
    })
}

pub fn apply(u: &CMat, psi: &[C]) -> Vec<C> {
    (0..u.nrows())
        .map(|i| (0..u.ncols()).map(|j| u[(i, j)] * psi[j]).sum())
        .collect()
}

/// Root fidelity `Tr sqrt(sqrt(a) b sqrt(a))`.
pub fn root_fidelity(a: &CMat, b: &CMat) -> f64 {
    let sa = linalg::hermitian_function(a.as_ref(), |x| x.max(0.0).sqrt()).unwrap();
    let m = linalg::mul(linalg::mul(sa.as_ref(), b.as_ref()).as_ref(), sa.as_ref());
    let m = CMat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    linalg::eigvalsh(m.as_ref()).unwrap().iter().map(|x| x.max(0.0).sqrt()).sum()
}

/// Bures-metric estimate `8 (1 - sqrt F) / d^2` of the QFI.
pub fn fidelity_qfi(a: &CMat, b: &CMat, delta: f64) -> f64 {
    8.0 * (1.0 - root_fidelity(a, b)) / (delta * delta)
}

/// `Tr(rho a_x a_y)` with explicit dense Majorana matrices.
pub fn dense_covariance(rho: &CMat, l: usize) -> CMat {
    let ops: Vec<CMat> = (0..2 * l).map(|x| floquet_sense::majorana::dense(x, l)).collect();
    CMat::from_fn(2 * l, 2 * l, |x, y| {
        let p = linalg::mul(ops[x].as_ref(), ops[y].as_ref());
        linalg::trace(linalg::mul(rho.as_ref(), p.as_ref()).as_ref())
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn cmat_from_real(m: &Mat<f64>) -> CMat {
    linalg::to_complex(m.as_ref())
}

/// Chain Hamiltonian whose Jordan-Wigner image has antiperiodic fermion
/// boundary conditions in both parity sectors: the periodic spin chain on
/// even parity, the boundary bond reversed on odd parity.
pub fn antiperiodic_fermion_hamiltonian(edp: &EdParams, field: f64) -> CMat {
    let mut h = build_hamiltonian(edp, field);
    let n = edp.n;
    for s in 0..h.nrows() {
        if s.count_ones() % 2 == 1 {
            let t = s ^ (1 << (n - 1)) ^ 1;
            h[(t, s)] += 2.0 * edp.j;
        }
    }
    linalg::to_complex(h.as_ref())
}

pub fn unitary(h: &CMat, t: f64) -> CMat {
    let (e, v) = linalg::eigh(h.as_ref()).unwrap();
    let d = e.len();
    let ph = CMat::from_fn(d, d, |i, j| v[(i, j)] * C::from_polar(1.0, -e[j] * t));
    linalg::mul(ph.as_ref(), v.adjoint())
}

/// `<c^dag_i c_j>` and `<c^dag_i c^dag_j>` on the first `l` sites, from
/// dense fermion operators on the whole chain.
pub fn dense_fermion_correlators(rho: &CMat, n: usize, l: usize) -> (CMat, CMat) {
    let half = C::new(0.5, 0.0);
    let ih = C::new(0.0, 0.5);
    let ops: Vec<(CMat, CMat)> = (0..l)
        .map(|m| {
            let a = floquet_sense::majorana::dense(2 * m, n);
            let b = floquet_sense::majorana::dense(2 * m + 1, n);
            let c = CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * half + b[(i, j)] * ih);
            let cd = CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * half - b[(i, j)] * ih);
            (c, cd)
        })
        .collect();
    let ev = |x: &CMat, y: &CMat| {
        let p = linalg::mul(x.as_ref(), y.as_ref());
        linalg::trace(linalg::mul(rho.as_ref(), p.as_ref()).as_ref())
    };
    let c = CMat::from_fn(l, l, |i, j| ev(&ops[i].1, &ops[j].0));
    let im = CMat::from_fn(l, l, |i, j| ev(&ops[i].1, &ops[j].1));
    (c, im)
}

/// Gaussian Gibbs state of the antiperiodic fermion chain at field `h0`,
/// then `steps` kicked periods at the parameters of `edp`.
pub fn kicked_gibbs_oracle(edp: &EdParams, beta: f64, h0: f64, steps: usize, l: usize) -> (CMat, CMat) {
    let h_init = antiperiodic_fermion_hamiltonian(edp, h0);
    let (e, v) = linalg::eigh(h_init.as_ref()).unwrap();
    let d = e.len();
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - e[0])).exp()).collect();
    let z: f64 = w.iter().sum();
    let sc = CMat::from_fn(d, d, |i, j| v[(i, j)] * (w[j] / z));
    let mut rho = linalg::mul(sc.as_ref(), v.adjoint());
    let free = unitary(&antiperiodic_fermion_hamiltonian(edp, edp.h0), edp.tau);
    let n = edp.n;
    let u = CMat::from_fn(d, d, |i, j| {
        let sz = n as f64 - 2.0 * i.count_ones() as f64;
        C::from_polar(1.0, edp.h1 * sz) * free[(i, j)]
    });
    for _ in 0..steps {
        rho = linalg::mul(linalg::mul(u.as_ref(), rho.as_ref()).as_ref(), u.adjoint());
    }
    dense_fermion_correlators(&rho, n, l)
}
