//! Exact diagonalization of the kicked long-range Ising chain
//!
//! `H(t) = -sum_{i<j} J r_ij^-alpha sx_i sx_j - (h0 + h(t)) sum_i sz_i`.
//!
//! Basis index bit `i` is site `i`; a set bit is spin down. The Hamiltonian
//! commutes with the spin-flip parity `prod_i sz_i` and with the mirror
//! `i -> N-1-i`, so every operator is handled block by block in the four
//! sectors labelled by those two quantum numbers.

use std::sync::OnceLock;

use faer::linalg::matmul::matmul;
use faer::{Accum, Par};
use num_complex::Complex64 as C;

use crate::error::{Result, SenseError, Violation};
use crate::freefermion::{CorrelationData, TimeLabel};
use crate::gaussian::BlockState;
use crate::linalg::{self, CMat, RMat, CONE, CZERO};
use crate::majorana;
use crate::params::{ModelParams, PulseShape};

pub const MAX_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Spin-chain parameters in the literal normalization of the Hamiltonian
/// above. `alpha = f64::INFINITY` keeps nearest neighbours only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdParams {
    pub n: usize,
    pub alpha: f64,
    pub j: f64,
    pub h0: f64,
    pub h1: f64,
    pub tau: f64,
    pub pulse: PulseShape,
    pub boundary: Boundary,
}

impl EdParams {
    /// Spin chain whose Jordan-Wigner image is the free-fermion model with
    /// the same `(J, h0, h1, tau)`: couplings `J/2`, fields `-h0/2`, `-h1/2`.
    pub fn from_model(p: &ModelParams, alpha: f64, boundary: Boundary) -> Self {
        Self {
            n: p.n,
            alpha,
            j: p.j / 2.0,
            h0: -p.h0 / 2.0,
            h1: -p.h1 / 2.0,
            tau: p.tau,
            pulse: p.pulse,
            boundary,
        }
    }

    /// Drive amplitude in model units mapped to the spin normalization.
    pub fn model_h1(h1: f64) -> f64 {
        -h1 / 2.0
    }

    pub fn with_h1(&self, h1: f64) -> Self {
        Self { h1, ..*self }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = vec![];
        if self.n < 2 || self.n > MAX_SITES {
            v.push(Violation::new("N", format!("must lie in 2..={MAX_SITES}, got {}", self.n)));
        }
        if !(self.alpha > 0.0) {
            v.push(Violation::new("alpha", format!("must be positive or inf, got {}", self.alpha)));
        }
        if !self.j.is_finite() {
            v.push(Violation::new("J", "must be finite"));
        }
        if !(self.h0.is_finite() && self.h1.is_finite()) {
            v.push(Violation::new("h0", "fields must be finite"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            v.push(Violation::new("tau", format!("must be positive, got {}", self.tau)));
        }
        if let PulseShape::SquarePulse { w } = self.pulse {
            if !(w > 0.0 && w <= self.tau) {
                v.push(Violation::new("w", format!("pulse width must lie in (0, tau], got {w}")));
            }
        }
        v
    }

    /// Distance between sites under the boundary convention.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.n - d),
        }
    }

    /// Bonds `(i, j, J_ij)`.
    pub fn couplings(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n;
        if self.alpha.is_infinite() {
            let bonds = match self.boundary {
                Boundary::Open => n - 1,
                Boundary::Periodic => n,
            };
            return (0..bonds).map(|i| (i, (i + 1) % n, self.j)).collect();
        }
        let mut out = vec![];
        for i in 0..n {
            for j in i + 1..n {
                let r = self.distance(i, j) as f64;
                out.push((i, j, self.j * r.powf(-self.alpha)));
            }
        }
        out
    }
}

pub fn validate_ed(p: &EdParams) -> Result<EdParams> {
    let v = p.violations();
    if v.is_empty() {
        Ok(*p)
    } else {
        Err(SenseError::InvalidParams(v))
    }
}

#[inline]
fn total_sz(n: usize, s: usize) -> f64 {
    n as f64 - 2.0 * s.count_ones() as f64
}

/// Dense Hamiltonian in the full `2^N` space with total field `field`.
pub fn build_hamiltonian(edp: &EdParams, field: f64) -> RMat {
    let d = 1usize << edp.n;
    let bonds = edp.couplings();
    let mut h = RMat::zeros(d, d);
    for s in 0..d {
        h[(s, s)] = -field * total_sz(edp.n, s);
        for &(i, j, c) in &bonds {
            let t = s ^ (1 << i) ^ (1 << j);
            h[(t, s)] -= c;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorId {
    /// Number of down spins mod 2.
    pub parity: u8,
    /// Mirror eigenvalue, `+1` or `-1`.
    pub mirror: i8,
}

const NONE: u32 = u32::MAX;

#[derive(Debug)]
struct Sector {
    id: SectorId,
    /// `(s, mirror(s))` with `s <= mirror(s)`.
    orbits: Vec<(usize, usize)>,
    eig: OnceLock<(Vec<f64>, RMat)>,
    step: OnceLock<CMat>,
}

/// Cached exact-diagonalization data for one static Hamiltonian.
#[derive(Debug)]
pub struct EdEngine {
    params: EdParams,
    bonds: Vec<(usize, usize, f64)>,
    sectors: Vec<Sector>,
    /// Position of the orbit of `s` in its mirror-even / mirror-odd sector.
    slot: Vec<[u32; 2]>,
}

fn mirror(n: usize, s: usize) -> usize {
    let mut r = 0;
    for i in 0..n {
        if s & (1 << i) != 0 {
            r |= 1 << (n - 1 - i);
        }
    }
    r
}

impl EdEngine {
    pub fn new(params: &EdParams) -> Result<Self> {
        let params = validate_ed(params)?;
        let n = params.n;
        let d = 1usize << n;
        let mut sectors: Vec<Sector> = Vec::with_capacity(4);
        for parity in 0..2u8 {
            for m in [1i8, -1] {
                sectors.push(Sector {
                    id: SectorId { parity, mirror: m },
                    orbits: vec![],
                    eig: OnceLock::new(),
                    step: OnceLock::new(),
                });
            }
        }
        let mut slot = vec![[NONE; 2]; d];
        for s in 0..d {
            let r = mirror(n, s);
            if s > r {
                continue;
            }
            let p = (s.count_ones() % 2) as usize;
            let even = &mut sectors[2 * p];
            slot[s][0] = even.orbits.len() as u32;
            slot[r][0] = even.orbits.len() as u32;
            even.orbits.push((s, r));
            if r != s {
                let odd = &mut sectors[2 * p + 1];
                slot[s][1] = odd.orbits.len() as u32;
                slot[r][1] = odd.orbits.len() as u32;
                odd.orbits.push((s, r));
            }
        }
        Ok(Self {
            bonds: params.couplings(),
            params,
            sectors,
            slot,
        })
    }

    pub fn params(&self) -> &EdParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        1 << self.params.n
    }

    pub fn sector_ids(&self) -> Vec<SectorId> {
        self.sectors.iter().map(|s| s.id).collect()
    }

    pub fn sector_dim(&self, k: usize) -> usize {
        self.sectors[k].orbits.len()
    }

    /// Components `(s, coefficient)` of basis vector `pos` of sector `k`.
    fn basis_vector(&self, k: usize, pos: usize) -> ([(usize, f64); 2], usize) {
        let (s, r) = self.sectors[k].orbits[pos];
        if s == r {
            ([(s, 1.0), (s, 0.0)], 1)
        } else {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            let m = self.sectors[k].id.mirror as f64;
            ([(s, a), (r, m * a)], 2)
        }
    }

    /// Position in sector `k` and coefficient of `|s>` in that basis vector.
    fn locate(&self, k: usize, s: usize) -> Option<(usize, f64)> {
        let id = self.sectors[k].id;
        if (s.count_ones() % 2) as u8 != id.parity {
            return None;
        }
        let which = usize::from(id.mirror < 0);
        let pos = self.slot[s][which];
        if pos == NONE {
            return None;
        }
        let (rep, r) = self.sectors[k].orbits[pos as usize];
        let c = if rep == r {
            1.0
        } else if s == rep {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            id.mirror as f64 * std::f64::consts::FRAC_1_SQRT_2
        };
        Some((pos as usize, c))
    }

    /// Hamiltonian restricted to sector `k` with total field `field`.
    pub fn sector_hamiltonian(&self, k: usize, field: f64) -> RMat {
        let dk = self.sector_dim(k);
        let n = self.params.n;
        let mut h = RMat::zeros(dk, dk);
        for c in 0..dk {
            let (terms, len) = self.basis_vector(k, c);
            for &(s, a) in &terms[..len] {
                if let Some((r, b)) = self.locate(k, s) {
                    h[(r, c)] += -field * total_sz(n, s) * a * b;
                }
                for &(i, j, cij) in &self.bonds {
                    let t = s ^ (1 << i) ^ (1 << j);
                    if let Some((r, b)) = self.locate(k, t) {
                        h[(r, c)] -= cij * a * b;
                    }
                }
            }
        }
        h
    }

    fn eig(&self, k: usize) -> &(Vec<f64>, RMat) {
        self.sectors[k].eig.get_or_init(|| {
            let h = self.sector_hamiltonian(k, self.params.h0);
            linalg::eigh_real(h.as_ref()).expect("real symmetric eigendecomposition")
        })
    }

    /// Eigenvalues of the static Hamiltonian in sector `k`.
    pub fn sector_spectrum(&self, k: usize) -> Vec<f64> {
        self.eig(k).0.clone()
    }

    /// `V diag(f(E)) V^T` in sector `k`.
    fn spectral(&self, k: usize, f: impl Fn(f64) -> C) -> CMat {
        let (e, v) = self.eig(k);
        spectral_from(e, v, f)
    }

    fn static_time(&self) -> f64 {
        match self.params.pulse {
            PulseShape::DeltaKick => self.params.tau,
            PulseShape::SquarePulse { w } => self.params.tau - w,
        }
    }

    /// `exp(-i H0 t_static)` in sector `k`.
    fn step(&self, k: usize) -> &CMat {
        self.sectors[k].step.get_or_init(|| {
            let t = self.static_time();
            self.spectral(k, |e| C::from_polar(1.0, -e * t))
        })
    }

    /// Driven part of the period in sector `k`: a diagonal kick phase, or the
    /// dense pulse-segment propagator.
    fn drive(&self, k: usize, h1: f64) -> Drive {
        let n = self.params.n;
        match self.params.pulse {
            PulseShape::DeltaKick => Drive::Diagonal(
                (0..self.sector_dim(k))
                    .map(|p| {
                        let s = self.sectors[k].orbits[p].0;
                        C::from_polar(1.0, h1 * total_sz(n, s))
                    })
                    .collect(),
            ),
            PulseShape::SquarePulse { w } => {
                let h = self.sector_hamiltonian(k, self.params.h0 + h1);
                let (e, v) = linalg::eigh_real(h.as_ref()).expect("real symmetric eigendecomposition");
                Drive::Dense(spectral_from(&e, &v, |x| C::from_polar(1.0, -x * w)))
            }
        }
    }

    /// One-period propagator restricted to sector `k`.
    pub fn sector_period_propagator(&self, k: usize, h1: f64) -> CMat {
        let w = self.step(k);
        match self.drive(k, h1) {
            Drive::Diagonal(ph) => CMat::from_fn(w.nrows(), w.ncols(), |i, j| ph[i] * w[(i, j)]),
            Drive::Dense(p) => linalg::mul(p.as_ref(), w.as_ref()),
        }
    }

    /// Full `2^N` one-period propagator at the engine's `h1`.
    pub fn period_propagator(&self) -> CMat {
        let d = self.dim();
        let mut u = CMat::zeros(d, d);
        for k in 0..self.sectors.len() {
            if self.sector_dim(k) == 0 {
                continue;
            }
            let uk = self.sector_period_propagator(k, self.params.h1);
            self.embed_operator(k, &uk, &mut u);
        }
        u
    }

    /// Adds `E_k op E_k^T` to `out`.
    fn embed_operator(&self, k: usize, op: &CMat, out: &mut CMat) {
        let d = self.dim();
        let dk = self.sector_dim(k);
        // x = E_k op
        let mut x = CMat::zeros(d, dk);
        for c in 0..dk {
            for r in 0..dk {
                let v = op[(r, c)];
                let (terms, len) = self.basis_vector(k, r);
                for &(s, a) in &terms[..len] {
                    x[(s, c)] += v * a;
                }
            }
        }
        for t in 0..d {
            if let Some((pos, b)) = self.locate(k, t) {
                for s in 0..d {
                    out[(s, t)] += x[(s, pos)] * b;
                }
            }
        }
    }

    /// Coordinates of `psi` in sector `k`.
    pub fn project(&self, k: usize, psi: &[C]) -> Vec<C> {
        (0..self.sector_dim(k))
            .map(|p| {
                let (terms, len) = self.basis_vector(k, p);
                terms[..len].iter().map(|&(s, a)| psi[s] * a).sum()
            })
            .collect()
    }

    /// Adds the full-space image of sector coordinates `v` to `out`.
    pub fn embed(&self, k: usize, v: &[C], out: &mut [C]) {
        for (p, &x) in v.iter().enumerate() {
            let (terms, len) = self.basis_vector(k, p);
            for &(s, a) in &terms[..len] {
                out[s] += x * a;
            }
        }
    }

    /// Stepper for a batch of pure states, one per drive amplitude.
    pub fn trajectory(&self, psi0: &[C], h1s: &[f64]) -> Trajectory<'_> {
        assert_eq!(psi0.len(), self.dim());
        let mut blocks = vec![];
        for k in 0..self.sectors.len() {
            let v = self.project(k, psi0);
            if v.iter().all(|x| x.norm() == 0.0) {
                continue;
            }
            let dk = v.len();
            let states = CMat::from_fn(dk, h1s.len(), |r, _| v[r]);
            let drives = h1s.iter().map(|&h| self.drive(k, h)).collect();
            blocks.push(TrajectoryBlock { sector: k, states, drives });
        }
        Trajectory {
            engine: self,
            blocks,
            steps: 0,
            batch: h1s.len(),
        }
    }

    /// Pure states after `n` periods, one per entry of `h1s`.
    pub fn evolve_batch(&self, psi0: &[C], h1s: &[f64], n: u64) -> Vec<Vec<C>> {
        let mut t = self.trajectory(psi0, h1s);
        for _ in 0..n {
            t.step();
        }
        t.states()
    }

    /// State after `n` periods at the engine's `h1`.
    pub fn evolve(&self, state: &EdState, n: u64) -> EdState {
        let h1 = self.params.h1;
        match state {
            EdState::Pure(psi) => {
                if h1 == 0.0 && self.params.pulse == PulseShape::DeltaKick {
                    return EdState::Pure(self.static_evolve(psi, n as f64 * self.params.tau));
                }
                EdState::Pure(self.evolve_batch(psi, &[h1], n).pop().expect("one state"))
            }
            EdState::Mixed(rho) => {
                let u = self.period_propagator();
                let mut rho = rho.clone();
                for _ in 0..n {
                    let ur = linalg::mul(u.as_ref(), rho.as_ref());
                    rho = linalg::mul(ur.as_ref(), u.adjoint());
                }
                EdState::Mixed(rho)
            }
        }
    }

    /// `exp(-i H0 t) psi` from the cached eigenbasis.
    pub fn static_evolve(&self, psi: &[C], t: f64) -> Vec<C> {
        let mut out = vec![CZERO; self.dim()];
        for k in 0..self.sectors.len() {
            let v = self.project(k, psi);
            if v.iter().all(|x| x.norm() == 0.0) {
                continue;
            }
            let (e, vecs) = self.eig(k);
            let dk = v.len();
            let mut coef = vec![CZERO; dk];
            for (a, c) in coef.iter_mut().enumerate() {
                let mut acc = CZERO;
                for r in 0..dk {
                    acc += v[r] * vecs[(r, a)];
                }
                *c = acc * C::from_polar(1.0, -e[a] * t);
            }
            let w: Vec<C> = (0..dk)
                .map(|r| (0..dk).map(|a| coef[a] * vecs[(r, a)]).sum())
                .collect();
            self.embed(k, &w, &mut out);
        }
        out
    }

    /// `<H0>` in state `psi`.
    pub fn static_energy(&self, psi: &[C]) -> f64 {
        let mut e = 0.0;
        for k in 0..self.sectors.len() {
            let v = self.project(k, psi);
            if v.iter().all(|x| x.norm() == 0.0) {
                continue;
            }
            let h = self.sector_hamiltonian(k, self.params.h0);
            for r in 0..v.len() {
                for c in 0..v.len() {
                    e += (v[r].conj() * v[c] * h[(r, c)]).re;
                }
            }
        }
        e
    }

    /// Lowest eigenstate of the static Hamiltonian.
    pub fn ground_state(&self) -> EdState {
        let mut best: Option<(f64, usize)> = None;
        for k in 0..self.sectors.len() {
            if self.sector_dim(k) == 0 {
                continue;
            }
            let e0 = self.eig(k).0[0];
            if best.is_none_or(|(b, _)| e0 < b - 1e-12) {
                best = Some((e0, k));
            }
        }
        let (_, k) = best.expect("non-empty Hilbert space");
        let v = &self.eig(k).1;
        let col: Vec<C> = (0..v.nrows()).map(|r| C::new(v[(r, 0)], 0.0)).collect();
        let mut out = vec![CZERO; self.dim()];
        self.embed(k, &col, &mut out);
        EdState::Pure(out)
    }

    /// Gibbs state `exp(-beta H0) / Z` of the static Hamiltonian.
    pub fn thermal_state(&self, beta: f64) -> EdState {
        let d = self.dim();
        let e_min = (0..self.sectors.len())
            .filter(|&k| self.sector_dim(k) > 0)
            .map(|k| self.eig(k).0[0])
            .fold(f64::INFINITY, f64::min);
        let mut rho = CMat::zeros(d, d);
        for k in 0..self.sectors.len() {
            if self.sector_dim(k) == 0 {
                continue;
            }
            let blk = self.spectral(k, |e| C::new((-beta * (e - e_min)).exp(), 0.0));
            self.embed_operator(k, &blk, &mut rho);
        }
        let z = linalg::trace(rho.as_ref()).re;
        EdState::Mixed(rho * (1.0 / z))
    }
}

fn spectral_from(e: &[f64], v: &RMat, f: impl Fn(f64) -> C) -> CMat {
    let dk = e.len();
    let vc = linalg::to_complex(v.as_ref());
    let scaled = CMat::from_fn(dk, dk, |i, j| vc[(i, j)] * f(e[j]));
    let mut out = CMat::zeros(dk, dk);
    matmul(out.as_mut(), Accum::Replace, scaled.as_ref(), vc.transpose(), CONE, Par::Seq);
    out
}

enum Drive {
    Diagonal(Vec<C>),
    Dense(CMat),
}

struct TrajectoryBlock {
    sector: usize,
    states: CMat,
    drives: Vec<Drive>,
}

/// Batched stroboscopic evolution; column `b` of every block is driven with
/// amplitude `h1s[b]`.
pub struct Trajectory<'a> {
    engine: &'a EdEngine,
    blocks: Vec<TrajectoryBlock>,
    steps: u64,
    batch: usize,
}

impl Trajectory<'_> {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self) {
        for blk in &mut self.blocks {
            let w = self.engine.step(blk.sector);
            let mut next = CMat::zeros(blk.states.nrows(), blk.states.ncols());
            matmul(next.as_mut(), Accum::Replace, w.as_ref(), blk.states.as_ref(), CONE, Par::Seq);
            for (b, drive) in blk.drives.iter().enumerate() {
                match drive {
                    Drive::Diagonal(ph) => {
                        for (r, p) in ph.iter().enumerate() {
                            next[(r, b)] *= p;
                        }
                    }
                    Drive::Dense(u) => {
                        let col = linalg::mul(u.as_ref(), next.subcols(b, 1));
                        for r in 0..col.nrows() {
                            next[(r, b)] = col[(r, 0)];
                        }
                    }
                }
            }
            blk.states = next;
        }
        self.steps += 1;
    }

    pub fn state(&self, b: usize) -> Vec<C> {
        let mut out = vec![CZERO; self.engine.dim()];
        for blk in &self.blocks {
            let v: Vec<C> = (0..blk.states.nrows()).map(|r| blk.states[(r, b)]).collect();
            self.engine.embed(blk.sector, &v, &mut out);
        }
        out
    }

    pub fn states(&self) -> Vec<Vec<C>> {
        (0..self.batch).map(|b| self.state(b)).collect()
    }
}

/// Pure or mixed state of the full chain.
#[derive(Debug, Clone)]
pub enum EdState {
    Pure(Vec<C>),
    Mixed(CMat),
}

impl EdState {
    pub fn polarized_up(n: usize) -> Self {
        let mut psi = vec![CZERO; 1 << n];
        psi[0] = CONE;
        EdState::Pure(psi)
    }

    pub fn sites(&self) -> usize {
        let d = match self {
            EdState::Pure(p) => p.len(),
            EdState::Mixed(r) => r.nrows(),
        };
        d.trailing_zeros() as usize
    }

    /// Norm squared (pure) or trace (mixed).
    pub fn weight(&self) -> f64 {
        match self {
            EdState::Pure(p) => p.iter().map(|x| x.norm_sqr()).sum(),
            EdState::Mixed(r) => linalg::trace(r.as_ref()).re,
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            EdState::Pure(p) => p.iter().map(|x| x.norm_sqr()).collect(),
            EdState::Mixed(r) => (0..r.nrows()).map(|i| r[(i, i)].re).collect(),
        }
    }

    /// `(1/N) sum_i <sz_i>`
    pub fn magnetization(&self) -> f64 {
        let n = self.sites();
        self.diagonal()
            .iter()
            .enumerate()
            .map(|(s, p)| p * total_sz(n, s))
            .sum::<f64>()
            / n as f64
    }

    /// `<O>` for an operator mapping each basis state to at most one other.
    fn expect_monomial(&self, op: impl Fn(usize) -> Option<(f64, usize)>) -> C {
        match self {
            EdState::Pure(p) => {
                let mut acc = CZERO;
                for (s, &x) in p.iter().enumerate() {
                    if x == CZERO {
                        continue;
                    }
                    if let Some((v, t)) = op(s) {
                        acc += p[t].conj() * x * v;
                    }
                }
                acc
            }
            EdState::Mixed(r) => {
                let mut acc = CZERO;
                for s in 0..r.nrows() {
                    if let Some((v, t)) = op(s) {
                        acc += r[(s, t)] * v;
                    }
                }
                acc
            }
        }
    }

    /// Jordan-Wigner correlators on sites `start..start+l`, strings running
    /// from site 0.
    pub fn fermion_correlators(&self, start: usize, l: usize, label: TimeLabel) -> CorrelationData {
        let mut c = CMat::zeros(l, l);
        let mut im = CMat::zeros(l, l);
        for a in 0..l {
            for b in 0..l {
                let (i, j) = (start + a, start + b);
                c[(a, b)] = self.expect_monomial(|s| {
                    let (v1, s1) = majorana::annihilate(j, s)?;
                    let (v2, s2) = majorana::create(i, s1)?;
                    Some((v1 * v2, s2))
                });
                im[(a, b)] = self.expect_monomial(|s| {
                    let (v1, s1) = majorana::create(j, s)?;
                    let (v2, s2) = majorana::create(i, s1)?;
                    Some((v1 * v2, s2))
                });
            }
        }
        CorrelationData {
            c,
            i: im,
            label,
        }
    }
}

/// Reduced state of sites `start..start+l`.
pub fn partial_trace(state: &EdState, start: usize, l: usize) -> Result<BlockState> {
    let n = state.sites();
    if start + l > n || l == 0 {
        return Err(SenseError::InvalidParams(vec![Violation::new(
            "L",
            format!("block {start}..{} outside a chain of {n} sites", start + l),
        )]));
    }
    let dl = 1usize << l;
    let de = 1usize << (n - l);
    let mask = (dl - 1) << start;
    let low = (1usize << start) - 1;
    let split = |s: usize| -> (usize, usize) {
        let a = (s & mask) >> start;
        let e = (s & low) | ((s >> (start + l)) << start);
        (a, e)
    };
    let join = |a: usize, e: usize| -> usize { (e & low) | (a << start) | ((e >> start) << (start + l)) };
    let rho = match state {
        EdState::Pure(psi) => {
            let mut m = CMat::zeros(dl, de);
            for (s, &x) in psi.iter().enumerate() {
                let (a, e) = split(s);
                m[(a, e)] = x;
            }
            linalg::mul(m.as_ref(), m.adjoint())
        }
        EdState::Mixed(r) => {
            let mut out = CMat::zeros(dl, dl);
            for a in 0..dl {
                for b in 0..dl {
                    let mut acc = CZERO;
                    for e in 0..de {
                        acc += r[(join(a, e), join(b, e))];
                    }
                    out[(a, b)] = acc;
                }
            }
            out
        }
    };
    BlockState::new(rho)
}
