//! Composite workflows built from the engines: Fisher-information time
//! series, steady-state values and block-magnetization likelihoods.

use num_complex::Complex64 as C;

use crate::ed::{partial_trace, EdEngine, EdParams, EdState};
use crate::error::Result;
use crate::gaussian::{block_magnetization_distribution, BlockState, Context, GaussianProbe};
use crate::metrology::{self, central_difference, cfi, qfi_spectral, FisherResult, LikelihoodTable};
use crate::params::BlockSpec;

/// Gaussian QFI after every `n` in `ns`, one row per time, one column per
/// block size.
pub fn qfi_series(probe: &GaussianProbe, ls: &[usize], ns: impl IntoIterator<Item = u64>) -> Result<Vec<Vec<f64>>> {
    ns.into_iter()
        .map(|n| {
            Ok(probe
                .qfi_blocks(Context::Stroboscopic(n), ls)?
                .into_iter()
                .map(|f| f.value)
                .collect())
        })
        .collect()
}

/// How a steady-state Fisher information is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Mean over stroboscopic times `n_min..=n_max`.
    Window { n_min: u64, n_max: u64 },
    /// QFI of the dephased (diagonal-ensemble) state.
    Dephased,
}

impl Default for SteadyMethod {
    fn default() -> Self {
        SteadyMethod::Window {
            n_min: metrology::WINDOW.0 as u64,
            n_max: metrology::WINDOW.1 as u64,
        }
    }
}

/// Steady-state Gaussian QFI for every block size in `ls`.
pub fn steady_qfi(probe: &GaussianProbe, ls: &[usize], method: SteadyMethod) -> Result<Vec<f64>> {
    match method {
        SteadyMethod::Dephased => Ok(probe
            .qfi_blocks(Context::SteadyState, ls)?
            .into_iter()
            .map(|f| f.value)
            .collect()),
        SteadyMethod::Window { n_min, n_max } => {
            let rows = qfi_series(probe, ls, n_min..=n_max)?;
            let count = rows.len() as f64;
            let mut acc = vec![0.0; ls.len()];
            for row in &rows {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            Ok(acc.into_iter().map(|a| a / count).collect())
        }
    }
}

/// Classical and quantum Fisher information of the block-magnetization
/// measurement, both from the same finite-difference pair of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockFisher {
    pub classical: FisherResult,
    pub quantum: FisherResult,
}

pub fn fisher_from_states(states: &[BlockState; 3], dh1: f64) -> Result<BlockFisher> {
    let p = block_magnetization_distribution(&states[1]);
    let pm = block_magnetization_distribution(&states[0]);
    let pp = block_magnetization_distribution(&states[2]);
    let dp: Vec<f64> = pp.iter().zip(&pm).map(|(a, b)| (a - b) / (2.0 * dh1)).collect();
    let drho = central_difference(&states[0], &states[2], dh1);
    Ok(BlockFisher {
        classical: cfi(&p, &dp)?,
        quantum: qfi_spectral(&states[1], &drho)?,
    })
}

/// Block-magnetization Fisher information of a Gaussian block.
pub fn block_fisher(probe: &GaussianProbe, ctx: Context, spec: &BlockSpec) -> Result<BlockFisher> {
    let states = probe.block_states(ctx, spec)?;
    fisher_from_states(&states, probe.dh1())
}

/// Exact-diagonalization counterpart of [`GaussianProbe`]: reduced block
/// states of a spin chain evolved from one initial state.
#[derive(Debug)]
pub struct EdBlockProbe {
    engine: EdEngine,
    psi0: Vec<C>,
    pub start: usize,
    pub l: usize,
}

impl EdBlockProbe {
    pub fn new(params: &EdParams, psi0: Vec<C>, start: usize, l: usize) -> Result<Self> {
        Ok(Self {
            engine: EdEngine::new(params)?,
            psi0,
            start,
            l,
        })
    }

    pub fn engine(&self) -> &EdEngine {
        &self.engine
    }

    /// Block states after `n` periods at each spin-normalized amplitude.
    pub fn block_states(&self, h1s: &[f64], n: u64) -> Result<Vec<BlockState>> {
        self.engine
            .evolve_batch(&self.psi0, h1s, n)
            .into_iter()
            .map(|psi| partial_trace(&EdState::Pure(psi), self.start, self.l))
            .collect()
    }

    /// Visit block states at every period `0..=n_max`.
    pub fn scan(
        &self,
        h1s: &[f64],
        n_max: u64,
        mut visit: impl FnMut(u64, &[BlockState]) -> Result<()>,
    ) -> Result<()> {
        let mut t = self.engine.trajectory(&self.psi0, h1s);
        loop {
            let states = t
                .states()
                .into_iter()
                .map(|psi| partial_trace(&EdState::Pure(psi), self.start, self.l))
                .collect::<Result<Vec<_>>>()?;
            visit(t.steps(), &states)?;
            if t.steps() >= n_max {
                return Ok(());
            }
            t.step();
        }
    }
}

/// Block-magnetization distributions after `n` periods for every model-unit
/// amplitude in `grid`.
pub fn ed_likelihood(probe: &EdBlockProbe, grid: Vec<f64>, n: u64) -> Result<LikelihoodTable> {
    let h1s: Vec<f64> = grid.iter().map(|&h| EdParams::model_h1(h)).collect();
    let probs = probe
        .block_states(&h1s, n)?
        .iter()
        .map(block_magnetization_distribution)
        .collect();
    Ok(LikelihoodTable { grid, probs })
}
