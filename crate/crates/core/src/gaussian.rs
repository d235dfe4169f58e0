//! Fermionic Gaussian block states: Majorana covariance, Gaussian QFI,
//! explicit reconstruction of small blocks and block observables.

use num_complex::Complex64 as C;

use crate::error::{Result, SenseError};
use crate::freefermion::{correlators_at, CorrelationData, FloquetChain, ModeState, TimeLabel};
use crate::linalg::{self, CMat};
use crate::majorana::SparseOp;
use crate::params::{BlockSpec, InitialState, ValidatedParams};
use crate::su2::{self, Mat2};

/// Default finite-difference step in `h1`.
pub const DEFAULT_DH1: f64 = 1e-3;
/// Pairs with `|1 - g_r g_s|` below this are dropped from the Gaussian QFI.
pub const SINGULAR_PAIR_TOL: f64 = 1e-8;
/// Dropped numerators above this mark the result singular.
pub const SINGULAR_WEIGHT_TOL: f64 = 1e-6;

/// `Gamma_xy = Tr(rho a_x a_y)` on `2L` Majoranas.
#[derive(Debug, Clone)]
pub struct MajoranaCovariance {
    pub gamma: CMat,
    pub l: usize,
    pub h1: f64,
}

impl MajoranaCovariance {
    /// Covariance of the first `l` sites.
    pub fn leading(&self, l: usize) -> Self {
        assert!(l <= self.l);
        Self {
            gamma: self.gamma.subrows(0, 2 * l).subcols(0, 2 * l).to_owned(),
            l,
            h1: self.h1,
        }
    }

    /// `Gamma - 1`, Hermitian with spectrum in `[-1, 1]`.
    pub fn centered(&self) -> CMat {
        let n = 2 * self.l;
        CMat::from_fn(n, n, |i, j| {
            if i == j {
                self.gamma[(i, j)] - 1.0
            } else {
                self.gamma[(i, j)]
            }
        })
    }
}

/// Covariance matrix from block correlators.
pub fn gamma_from_correlators(corr: &CorrelationData, h1: f64) -> MajoranaCovariance {
    let l = corr.len();
    let mut g = CMat::zeros(2 * l, 2 * l);
    let i2 = C::new(0.0, 2.0);
    let iu = C::new(0.0, 1.0);
    for i in 0..l {
        for j in 0..l {
            let d = if i == j { 1.0 } else { 0.0 };
            let c = corr.c[(i, j)];
            let f = corr.i[(i, j)];
            g[(2 * i, 2 * j)] = C::new(d, 0.0) + i2 * (c + f).im;
            g[(2 * i, 2 * j + 1)] = iu * d - i2 * (c - f).re;
            g[(2 * i + 1, 2 * j)] = -iu * d + i2 * (c + f).re;
            g[(2 * i + 1, 2 * j + 1)] = C::new(d, 0.0) + i2 * (c - f).im;
        }
    }
    MajoranaCovariance { gamma: g, l, h1 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFisher {
    pub value: f64,
    pub skipped_pairs: usize,
    /// Largest dropped numerator.
    pub skipped_weight: f64,
    /// A dropped pair carried a numerator above [`SINGULAR_WEIGHT_TOL`].
    pub singular: bool,
}

/// QFI from the covariance at `h1` and its derivative.
///
/// In the eigenbasis `g_r` of `Gamma - 1`,
/// `F = 1/2 sum_{rs} |<r|dGamma|s>|^2 / (1 - g_r g_s)`.
pub fn qfi_from_covariance(gamma: &MajoranaCovariance, dgamma: &CMat) -> Result<GaussianFisher> {
    let g = gamma.centered();
    let (vals, u) = linalg::eigh(g.as_ref())?;
    let t = linalg::mul(linalg::mul(u.adjoint(), dgamma.as_ref()).as_ref(), u.as_ref());
    let n = vals.len();
    let mut out = GaussianFisher {
        value: 0.0,
        skipped_pairs: 0,
        skipped_weight: 0.0,
        singular: false,
    };
    for r in 0..n {
        for s in 0..n {
            let num = t[(r, s)].norm_sqr();
            let den = 1.0 - vals[r] * vals[s];
            if den.abs() < SINGULAR_PAIR_TOL {
                out.skipped_pairs += 1;
                out.skipped_weight = out.skipped_weight.max(num);
                continue;
            }
            out.value += 0.5 * num / den;
        }
    }
    out.singular = out.skipped_weight > SINGULAR_WEIGHT_TOL;
    Ok(out)
}

/// Dense block density matrix.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub rho: CMat,
    pub l: usize,
}

impl BlockState {
    pub fn new(rho: CMat) -> Result<Self> {
        let d = rho.nrows();
        if d != rho.ncols() || !d.is_power_of_two() {
            return Err(SenseError::Shape {
                expected: "square 2^L".into(),
                rows: rho.nrows(),
                cols: rho.ncols(),
            });
        }
        Ok(Self {
            l: d.trailing_zeros() as usize,
            rho,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C {
        linalg::trace(self.rho.as_ref())
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(self.rho.as_ref())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::eigvalsh(self.rho.as_ref())?[0])
    }

    /// Reduced state of one site of the block.
    pub fn site(&self, m: usize) -> Mat2 {
        let mut out = Mat2::ZERO;
        let bit = 1usize << m;
        for s in 0..self.dim() {
            for t in 0..self.dim() {
                if s & !bit == t & !bit {
                    let a = usize::from(s & bit != 0);
                    let b = usize::from(t & bit != 0);
                    out.0[a][b] += self.rho[(s, t)];
                }
            }
        }
        out
    }
}

/// Explicit `2^L` density matrix of a Gaussian block.
///
/// Pairs `(e1, e2)` from the eigenvectors of `Gamma - 1` define rotated
/// Majoranas `b = e.a` with `<i b1 b2> = nu`; the state is
/// `prod_j (1 + nu_j i b1 b2) / 2`.
pub fn block_state_from_gamma(gamma: &MajoranaCovariance, spec: &BlockSpec) -> Result<BlockState> {
    let l = gamma.l;
    let spec = BlockSpec { l, ..*spec };
    spec.check_explicit()?;
    let (vals, u) = linalg::eigh(gamma.centered().as_ref())?;
    let n = 2 * l;
    let d = 1usize << l;
    let mut rho = CMat::from_fn(d, d, |i, j| {
        if i == j {
            C::new(1.0 / d as f64, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let s2 = std::f64::consts::SQRT_2;
    for col in (l..n).rev() {
        let nu = vals[col];
        if nu > 1.0 + 1e-8 {
            return Err(SenseError::NonPhysicalGamma { nu });
        }
        let nu = nu.min(1.0);
        if nu < 1e-14 {
            continue;
        }
        let e1: Vec<f64> = (0..n).map(|x| s2 * u[(x, col)].re).collect();
        let e2: Vec<f64> = (0..n).map(|x| s2 * u[(x, col)].im).collect();
        // 1 + nu * i * sum e1_x e2_y a_x a_y
        let w: Vec<Vec<C>> = (0..n)
            .map(|x| (0..n).map(|y| C::new(0.0, nu * e1[x] * e2[y])).collect())
            .collect();
        let q = SparseOp::quadratic(&w, l);
        let qr = q.mul_dense(&rho);
        rho += qr;
    }
    if vals[0] < -1.0 - 1e-8 {
        return Err(SenseError::NonPhysicalGamma { nu: -vals[0] });
    }
    // the factors commute, so the product is Hermitian up to roundoff
    let sym = CMat::from_fn(d, d, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    BlockState::new(sym)
}

/// Outcome probabilities of total block `sigma^z`; entry `k` has eigenvalue
/// `L - 2k` (`k` down spins).
pub fn block_magnetization_distribution(state: &BlockState) -> Vec<f64> {
    let mut p = vec![0.0; state.l + 1];
    for s in 0..state.dim() {
        p[s.count_ones() as usize] += state.rho[(s, s)].re;
    }
    p
}

/// Two-site X state from correlators.
///
/// Basis index `b0 + 2 b1`, set bit = spin down. The coherences are
/// `<down,up|rho|up,down> = <sigma^-_1 sigma^+_0> = C_10` and
/// `<up,up|rho|down,down> = <sigma^-_0 sigma^-_1> = I_01`.
pub fn two_site_density_matrix(corr: &CorrelationData) -> Result<BlockState> {
    if corr.len() < 2 {
        return Err(SenseError::Shape {
            expected: "at least 2x2 correlators".into(),
            rows: corr.len(),
            cols: corr.len(),
        });
    }
    let n0 = corr.c[(0, 0)].re;
    let n1 = corr.c[(1, 1)].re;
    let nn = n0 * n1 - corr.c[(0, 1)].norm_sqr() + corr.i[(0, 1)].norm_sqr();
    let mut rho = CMat::zeros(4, 4);
    rho[(0, 0)] = C::new(1.0 - n0 - n1 + nn, 0.0);
    rho[(1, 1)] = C::new(n0 - nn, 0.0);
    rho[(2, 2)] = C::new(n1 - nn, 0.0);
    rho[(3, 3)] = C::new(nn, 0.0);
    rho[(1, 2)] = corr.c[(1, 0)];
    rho[(2, 1)] = corr.c[(1, 0)].conj();
    rho[(0, 3)] = corr.i[(0, 1)];
    rho[(3, 0)] = corr.i[(0, 1)].conj();
    BlockState::new(rho)
}

/// Symmetric logarithmic derivative of an X-shaped two-site state.
#[derive(Debug, Clone)]
pub struct TwoSiteSld {
    pub sld: CMat,
    /// Eigenvalues of the SLD, ordered as `eigvecs`.
    pub eigvals: [f64; 4],
    /// Columns: two vectors in span{|up,up>, |down,down>}, then the two
    /// vectors in span{|down,up>, |up,down>}.
    pub eigvecs: CMat,
}

/// Solve `drho = (L rho + rho L) / 2` in the eigenbasis of `rho`.
pub fn sld(rho: &BlockState, drho: &CMat) -> Result<CMat> {
    let (lam, u) = linalg::eigh(rho.rho.as_ref())?;
    let t = linalg::mul(linalg::mul(u.adjoint(), drho.as_ref()).as_ref(), u.as_ref());
    let d = lam.len();
    let mut l = CMat::zeros(d, d);
    for r in 0..d {
        for s in 0..d {
            let sum = lam[r] + lam[s];
            if sum < 1e-12 {
                if t[(r, s)].norm() > 1e-10 {
                    return Err(SenseError::DegenerateSld {
                        sum,
                        element: t[(r, s)].norm(),
                    });
                }
                continue;
            }
            l[(r, s)] = t[(r, s)] * (2.0 / sum);
        }
    }
    Ok(linalg::mul(linalg::mul(u.as_ref(), l.as_ref()).as_ref(), u.adjoint()))
}

pub fn sld_two_site(rho: &BlockState, drho: &CMat) -> Result<TwoSiteSld> {
    if rho.l != 2 {
        return Err(SenseError::Shape {
            expected: "4x4".into(),
            rows: rho.dim(),
            cols: rho.dim(),
        });
    }
    let l = sld(rho, drho)?;
    let mut eigvecs = CMat::zeros(4, 4);
    let mut eigvals = [0.0; 4];
    for (slot, (a, b)) in [(0usize, 3usize), (1, 2)].into_iter().enumerate() {
        let block = Mat2([[l[(a, a)], l[(a, b)]], [l[(b, a)], l[(b, b)]]]);
        let (c0, c) = block.pauli_coords();
        let h = [c[0].re, c[1].re, c[2].re];
        let r = su2::norm(h);
        let n = if r > 1e-14 { su2::scale(h, 1.0 / r) } else { [0.0, 0.0, 1.0] };
        let v = su2::pauli_eigvecs(n);
        for (k, sign) in [(0usize, 1.0), (1, -1.0)] {
            let col = 2 * slot + k;
            eigvals[col] = c0.re + sign * r;
            eigvecs[(a, col)] = v[k][0];
            eigvecs[(b, col)] = v[k][1];
        }
    }
    Ok(TwoSiteSld { sld: l, eigvals, eigvecs })
}

/// Observation time of a block state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Context {
    Stroboscopic(u64),
    SteadyState,
}

/// Free-fermion chains at `h1 - dh1`, `h1`, `h1 + dh1` for finite-difference
/// Fisher information of blocks.
#[derive(Debug, Clone)]
pub struct GaussianProbe {
    dh1: f64,
    chains: [FloquetChain; 3],
}

impl GaussianProbe {
    pub fn new(params: &ValidatedParams, initial: &InitialState, dh1: f64) -> Self {
        assert!(dh1 > 0.0, "finite-difference step must be positive");
        let at = |h1: f64| FloquetChain::new(&params.with_h1(h1), initial);
        Self {
            dh1,
            chains: [at(params.h1 - dh1), at(params.h1), at(params.h1 + dh1)],
        }
    }

    pub fn params(&self) -> &ValidatedParams {
        self.chains[1].params()
    }

    pub fn dh1(&self) -> f64 {
        self.dh1
    }

    pub fn chain(&self, shift: usize) -> &FloquetChain {
        &self.chains[shift]
    }

    fn modes(&self, shift: usize, ctx: Context) -> Vec<ModeState> {
        match ctx {
            Context::Stroboscopic(n) => self.chains[shift].state_at(n),
            Context::SteadyState => self.chains[shift].steady_state(),
        }
    }

    /// Correlators at shifts `-dh1, 0, +dh1`.
    pub fn correlators(&self, ctx: Context, l: usize) -> [CorrelationData; 3] {
        let label = match ctx {
            Context::Stroboscopic(n) => TimeLabel::Stroboscopic(n),
            Context::SteadyState => TimeLabel::SteadyState,
        };
        [0, 1, 2].map(|s| correlators_at(self.chains[s].params(), &self.modes(s, ctx), l, label))
    }

    pub fn covariances(&self, ctx: Context, l: usize) -> [MajoranaCovariance; 3] {
        let corr = self.correlators(ctx, l);
        [0, 1, 2].map(|s| gamma_from_correlators(&corr[s], self.chains[s].params().h1))
    }

    /// Gaussian QFI for every block size in `ls` from one correlator pass.
    pub fn qfi_blocks(&self, ctx: Context, ls: &[usize]) -> Result<Vec<GaussianFisher>> {
        let lmax = ls.iter().copied().max().unwrap_or(0);
        let g = self.covariances(ctx, lmax);
        ls.iter()
            .map(|&l| {
                let [m, c, p] = [g[0].leading(l), g[1].leading(l), g[2].leading(l)];
                let dg = (p.gamma - m.gamma) * (1.0 / (2.0 * self.dh1));
                qfi_from_covariance(&c, &dg)
            })
            .collect()
    }

    pub fn qfi(&self, ctx: Context, l: usize) -> Result<GaussianFisher> {
        Ok(self.qfi_blocks(ctx, &[l])?[0])
    }

    /// Reconstructed block states at shifts `-dh1, 0, +dh1`.
    pub fn block_states(&self, ctx: Context, spec: &BlockSpec) -> Result<[BlockState; 3]> {
        let g = self.covariances(ctx, spec.l);
        let [a, b, c] = [
            block_state_from_gamma(&g[0], spec)?,
            block_state_from_gamma(&g[1], spec)?,
            block_state_from_gamma(&g[2], spec)?,
        ];
        Ok([a, b, c])
    }
}

/// Gaussian QFI of an `l`-site block.
pub fn qfi_gaussian(
    params: &ValidatedParams,
    initial: &InitialState,
    l: usize,
    ctx: Context,
    dh1: f64,
) -> Result<GaussianFisher> {
    GaussianProbe::new(params, initial, dh1).qfi(ctx, l)
}
