//! Free-fermion engine for the periodic kicked Ising chain.
//!
//! After the Jordan-Wigner map (`sigma^z = 1 - 2 c^dag c`) and a Fourier
//! transform, the chain splits into independent pairs `(k, -k)`. The even
//! sector of each pair is a pseudospin with basis `|0>` (empty) and
//! `|1> = c^dag_{-k} c^dag_k |0>`, driven by `H_k = mu . sigma` with
//! `mu = (0, J sin k, h0 + J cos k)`. A delta kick adds `exp(-i h1 sigma^z)`
//! at the end of each period.

use num_complex::Complex64 as C;

use crate::error::{Result, SenseError};
use crate::linalg::CMat;
use crate::params::{kgrid, InitialState, ModelParams, PulseShape, ValidatedParams};
use crate::su2::{self, Mat2, Vec3};

/// Tolerance on `|sin(quasi_energy * tau)|` below which the Floquet axis is
/// considered undefined.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeHamiltonian {
    pub k: f64,
    pub mu: Vec3,
}

impl ModeHamiltonian {
    /// Static part at field `h0`.
    pub fn new(j: f64, h0: f64, k: f64) -> Self {
        Self {
            k,
            mu: [0.0, j * k.sin(), h0 + j * k.cos()],
        }
    }

    pub fn of(params: &ModelParams, k: f64) -> Self {
        Self::new(params.j, params.h0, k)
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::pauli(self.mu)
    }
}

/// One-period propagator of mode `k`: static evolution followed by the drive.
pub fn period_propagator(params: &ValidatedParams, k: f64) -> Mat2 {
    let mu = ModeHamiltonian::of(params, k).mu;
    match params.pulse {
        PulseShape::DeltaKick => {
            Mat2::exp_pauli([0.0, 0.0, params.h1], 1.0) * Mat2::exp_pauli(mu, params.tau)
        }
        PulseShape::SquarePulse { w } => {
            let on = [mu[0], mu[1], mu[2] + params.h1];
            Mat2::exp_pauli(on, w) * Mat2::exp_pauli(mu, params.tau - w)
        }
    }
}

/// State of one `(k, -k)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeState {
    /// `u |0> + v |1>`
    Pure { u: C, v: C },
    /// Gaussian mixed state: `pair` is the (sub-normalized) even-sector
    /// block; `odd_weight` is the total probability of the two singly
    /// occupied states, which the dynamics leaves untouched.
    Mixed { pair: Mat2, odd_weight: f64 },
}

impl ModeState {
    pub const VACUUM: ModeState = ModeState::Pure {
        u: C::new(1.0, 0.0),
        v: C::new(0.0, 0.0),
    };

    /// Initial state of the pair at momentum `k` for a chain with coupling `j`.
    pub fn initial(init: &InitialState, j: f64, k: f64) -> Self {
        match *init {
            InitialState::PolarizedUp => Self::VACUUM,
            InitialState::GroundStateOfH0 { h0 } => {
                let mu = ModeHamiltonian::new(j, h0, k).mu;
                let r = su2::norm(mu);
                if r == 0.0 {
                    return Self::VACUUM;
                }
                let [_, lo] = su2::pauli_eigvecs(su2::scale(mu, 1.0 / r));
                ModeState::Pure { u: lo[0], v: lo[1] }
            }
            InitialState::ThermalOfH0 { beta, h0 } => {
                let mu = ModeHamiltonian::new(j, h0, k).mu;
                let r = su2::norm(mu);
                let x = beta * r;
                // exp(-x n.sigma) / (2 cosh x + 2), divided through by cosh x
                let sech = 1.0 / x.cosh();
                let z = 2.0 + 2.0 * sech;
                let n = if r > 0.0 { su2::scale(mu, 1.0 / r) } else { [0.0; 3] };
                let pair = (Mat2::IDENTITY - Mat2::pauli(n).scale(C::new(x.tanh(), 0.0)))
                    .scale(C::new(1.0 / z, 0.0));
                ModeState::Mixed {
                    pair,
                    odd_weight: 2.0 * sech / z,
                }
            }
        }
    }

    /// Pair-block density matrix (trace below 1 for mixed states).
    pub fn pair_density(&self) -> Mat2 {
        match *self {
            ModeState::Pure { u, v } => Mat2([[u * u.conj(), u * v.conj()], [v * u.conj(), v * v.conj()]]),
            ModeState::Mixed { pair, .. } => pair,
        }
    }

    /// `<c^dag_k c_k>`
    pub fn occupation(&self) -> f64 {
        match *self {
            ModeState::Pure { v, .. } => v.norm_sqr(),
            ModeState::Mixed { pair, odd_weight } => pair.0[1][1].re + 0.5 * odd_weight,
        }
    }

    /// Pair coherence `<0|rho|1>`.
    pub fn pair_amplitude(&self) -> C {
        match *self {
            ModeState::Pure { u, v } => u * v.conj(),
            ModeState::Mixed { pair, .. } => pair.0[0][1],
        }
    }

    pub fn evolve(&self, u: Mat2) -> Self {
        match *self {
            ModeState::Pure { u: a, v: b } => {
                let [a, b] = u.apply([a, b]);
                ModeState::Pure { u: a, v: b }
            }
            ModeState::Mixed { pair, odd_weight } => ModeState::Mixed {
                pair: u * pair * u.adjoint(),
                odd_weight,
            },
        }
    }

    pub fn trace(&self) -> f64 {
        match *self {
            ModeState::Pure { u, v } => u.norm_sqr() + v.norm_sqr(),
            ModeState::Mixed { pair, odd_weight } => pair.trace().re + odd_weight,
        }
    }
}

/// Floquet decomposition of one mode, `U = exp(-i eps tau n.sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetMode {
    pub k: f64,
    pub u_period: Mat2,
    /// In `[0, pi/tau]`.
    pub quasi_energy: f64,
    pub axis: Vec3,
    /// `|sin(eps tau)|` fell below [`DEGENERATE_TOL`]; `axis` is then `z`
    /// and carries no information.
    pub degenerate: bool,
    /// Eigenvectors for eigenphases `-eps tau` and `+eps tau`.
    pub eigvecs: [[C; 2]; 2],
    /// `<psi0|mu+>`, `<psi0|mu->` when built against a pure initial state.
    pub overlaps: Option<[C; 2]>,
    tau: f64,
    // U = a0 - i a.sigma
    a0: f64,
    a: Vec3,
}

impl FloquetMode {
    pub fn new(params: &ValidatedParams, k: f64) -> Self {
        Self::from_propagator(period_propagator(params, k), k, params.tau)
    }

    pub fn from_propagator(u: Mat2, k: f64, tau: f64) -> Self {
        let (c0, c) = u.pauli_coords();
        let a0 = c0.re;
        // c = -i a
        let a = [-c[0].im, -c[1].im, -c[2].im];
        let s = su2::norm(a);
        let theta = s.atan2(a0);
        let degenerate = s < DEGENERATE_TOL;
        let axis = if degenerate { [0.0, 0.0, 1.0] } else { su2::scale(a, 1.0 / s) };
        Self {
            k,
            u_period: u,
            quasi_energy: theta / tau,
            axis,
            degenerate,
            eigvecs: su2::pauli_eigvecs(axis),
            overlaps: None,
            tau,
            a0,
            a,
        }
    }

    pub fn with_overlaps(mut self, initial: &ModeState) -> Result<Self> {
        match *initial {
            ModeState::Pure { u, v } => {
                let ov = |e: [C; 2]| u.conj() * e[0] + v.conj() * e[1];
                self.overlaps = Some([ov(self.eigvecs[0]), ov(self.eigvecs[1])]);
                Ok(self)
            }
            ModeState::Mixed { .. } => Err(SenseError::MixedInitialState),
        }
    }

    /// `U^n` from the eigenphases.
    pub fn power(&self, n: u64) -> Mat2 {
        let s = su2::norm(self.a);
        let theta = s.atan2(self.a0);
        let (sn, cn) = (n as f64 * theta).sin_cos();
        if s == 0.0 {
            return Mat2::IDENTITY.scale(C::new(cn, 0.0));
        }
        let n_hat = su2::scale(self.a, 1.0 / s);
        Mat2::IDENTITY.scale(C::new(cn, 0.0)) - Mat2::pauli(n_hat).scale(C::new(0.0, sn))
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Drop coherences between the two Floquet eigenstates.
    pub fn dephase(&self, state: &ModeState) -> ModeState {
        if self.degenerate {
            return match *state {
                ModeState::Pure { .. } => ModeState::Mixed {
                    pair: state.pair_density(),
                    odd_weight: 0.0,
                },
                m => m,
            };
        }
        let (pair, odd_weight) = match *state {
            ModeState::Pure { .. } => (state.pair_density(), 0.0),
            ModeState::Mixed { pair, odd_weight } => (pair, odd_weight),
        };
        let p = Mat2::pauli(self.axis);
        let plus = (Mat2::IDENTITY + p).scale(C::new(0.5, 0.0));
        let minus = (Mat2::IDENTITY - p).scale(C::new(0.5, 0.0));
        ModeState::Mixed {
            pair: plus * pair * plus + minus * pair * minus,
            odd_weight,
        }
    }
}

/// Floquet mode at `k` with overlaps against a pure initial state.
pub fn floquet_mode(params: &ValidatedParams, k: f64, initial: &ModeState) -> Result<FloquetMode> {
    FloquetMode::new(params, k).with_overlaps(initial)
}

/// Precomputed Floquet data for every mode of a chain plus its initial state.
#[derive(Debug, Clone)]
pub struct FloquetChain {
    params: ValidatedParams,
    modes: Vec<FloquetMode>,
    initial: Vec<ModeState>,
}

impl FloquetChain {
    pub fn new(params: &ValidatedParams, init: &InitialState) -> Self {
        let ks = kgrid(params.n);
        let modes = ks.iter().map(|&k| FloquetMode::new(params, k)).collect();
        let initial = ks.iter().map(|&k| ModeState::initial(init, params.j, k)).collect();
        Self {
            params: *params,
            modes,
            initial,
        }
    }

    pub fn params(&self) -> &ValidatedParams {
        &self.params
    }

    pub fn modes(&self) -> &[FloquetMode] {
        &self.modes
    }

    pub fn initial(&self) -> &[ModeState] {
        &self.initial
    }

    pub fn state_at(&self, n: u64) -> Vec<ModeState> {
        if n == 0 {
            return self.initial.clone();
        }
        self.modes
            .iter()
            .zip(&self.initial)
            .map(|(m, s)| s.evolve(m.power(n)))
            .collect()
    }

    /// Diagonal-ensemble state reached after dephasing.
    pub fn steady_state(&self) -> Vec<ModeState> {
        self.modes
            .iter()
            .zip(&self.initial)
            .map(|(m, s)| m.dephase(s))
            .collect()
    }
}

/// Mode states after `n` periods.
pub fn evolve_modes(params: &ValidatedParams, initial: &InitialState, n: u64) -> Vec<ModeState> {
    FloquetChain::new(params, initial).state_at(n)
}

/// When the correlators were taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeLabel {
    Stroboscopic(u64),
    SteadyState,
}

/// Two-point functions `C_ij = <c^dag_i c_j>` and `I_ij = <c^dag_i c^dag_j>`
/// on a block of `L` consecutive sites.
#[derive(Debug, Clone)]
pub struct CorrelationData {
    pub c: CMat,
    pub i: CMat,
    pub label: TimeLabel,
}

impl CorrelationData {
    pub fn len(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Correlators of the first `l` sites.
    pub fn leading(&self, l: usize) -> CorrelationData {
        assert!(l <= self.len());
        CorrelationData {
            c: self.c.subrows(0, l).subcols(0, l).to_owned(),
            i: self.i.subrows(0, l).subcols(0, l).to_owned(),
            label: self.label,
        }
    }
}

/// Correlators on `l` consecutive sites; sums run in ascending `k`.
pub fn correlators_at(params: &ModelParams, modes: &[ModeState], l: usize, label: TimeLabel) -> CorrelationData {
    assert_eq!(modes.len() * 2, params.n, "one mode state per positive momentum");
    assert!(l <= params.n);
    let ks = kgrid(params.n);
    let nf = params.n as f64;
    // translation invariance: both depend on d = i - j only
    let mut cd = vec![0.0; l];
    let mut id = vec![C::new(0.0, 0.0); l];
    for (k, s) in ks.iter().zip(modes) {
        let occ = s.occupation();
        let amp = s.pair_amplitude();
        for d in 0..l {
            let (sn, cs) = (k * d as f64).sin_cos();
            cd[d] += occ * cs;
            id[d] += amp * sn;
        }
    }
    let c = CMat::from_fn(l, l, |i, j| {
        let d = i.abs_diff(j);
        C::new(2.0 / nf * cd[d], 0.0)
    });
    // I_ij = (2i/N) sum_k <0|rho|1> sin(k (i - j))
    let i_mat = CMat::from_fn(l, l, |i, j| {
        let v = id[i.abs_diff(j)] * C::new(0.0, 2.0 / nf);
        if i >= j {
            v
        } else {
            -v
        }
    });
    CorrelationData { c, i: i_mat, label }
}

/// Correlators of the dephased long-time state.
pub fn steady_correlators(params: &ValidatedParams, initial: &InitialState, l: usize) -> CorrelationData {
    let chain = FloquetChain::new(params, initial);
    correlators_at(params, &chain.steady_state(), l, TimeLabel::SteadyState)
}

/// `m_z = 1 - (4/N) sum_{k>0} <n_k>`; the polarized state gives 1.
pub fn magnetization(modes: &[ModeState]) -> f64 {
    let n = 2.0 * modes.len() as f64;
    1.0 - 4.0 / n * modes.iter().map(|s| s.occupation()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetGap {
    pub gap: f64,
    pub k_min: f64,
}

/// Smallest splitting `2 eps_k` over the momentum grid.
pub fn floquet_gap(params: &ValidatedParams) -> FloquetGap {
    let mut best = FloquetGap {
        gap: f64::INFINITY,
        k_min: f64::NAN,
    };
    for k in kgrid(params.n) {
        let g = 2.0 * FloquetMode::new(params, k).quasi_energy;
        if g < best.gap {
            best = FloquetGap { gap: g, k_min: k };
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapLinePoint {
    pub h0: f64,
    /// `tau |h0 - J|`, in units of `J`.
    pub h1_analytic: f64,
    pub h1_numeric: f64,
    pub gap_analytic: f64,
    pub gap_numeric: f64,
}

/// Search window and resolution for [`gap_line`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSearch {
    pub h1_lo: f64,
    pub h1_hi: f64,
    pub coarse_steps: usize,
    pub tol: f64,
}

impl Default for GapSearch {
    fn default() -> Self {
        Self {
            h1_lo: 0.0,
            h1_hi: 0.5,
            coarse_steps: 100,
            tol: 1e-9,
        }
    }
}

/// Analytic gap-closing amplitude `h1* = tau |h0 - J| / J`.
pub fn gap_line_analytic(j: f64, tau: f64, h0: f64) -> f64 {
    tau * (h0 - j).abs() / j
}

/// `h1` minimising the Floquet gap at fixed `h0`: coarse scan, then golden
/// section inside the best bracket.
pub fn minimize_gap_over_h1(params: &ValidatedParams, search: &GapSearch) -> (f64, f64) {
    let gap = |h1: f64| floquet_gap(&params.with_h1(h1)).gap;
    let steps = search.coarse_steps.max(2);
    let dh = (search.h1_hi - search.h1_lo) / steps as f64;
    let mut best = (search.h1_lo, gap(search.h1_lo));
    for s in 1..=steps {
        let h = search.h1_lo + s as f64 * dh;
        let g = gap(h);
        if g < best.1 {
            best = (h, g);
        }
    }
    let mut a = (best.0 - dh).max(search.h1_lo);
    let mut b = (best.0 + dh).min(search.h1_hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (gap(x1), gap(x2));
    while b - a > search.tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = gap(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = gap(x2);
        }
    }
    let (h, g) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if g <= best.1 {
        (h, g)
    } else {
        best
    }
}

/// Analytic and numerically located gap-closing amplitudes for each `h0`.
pub fn gap_line(params: &ValidatedParams, h0s: &[f64], search: &GapSearch) -> Vec<GapLinePoint> {
    h0s.iter()
        .map(|&h0| {
            let p = params.with_h0(h0);
            let h1_analytic = gap_line_analytic(p.j, p.tau, h0);
            let (h1_numeric, gap_numeric) = minimize_gap_over_h1(&p, search);
            GapLinePoint {
                h0,
                h1_analytic,
                h1_numeric,
                gap_analytic: floquet_gap(&p.with_h1(h1_analytic)).gap,
                gap_numeric,
            }
        })
        .collect()
}
