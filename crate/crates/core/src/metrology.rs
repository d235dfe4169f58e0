//! Fisher information, steady-state averaging, power-law fits and Bayesian
//! estimation of the drive amplitude.

use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Result, SenseError};
use crate::gaussian::BlockState;
use crate::linalg::{self, CMat};

/// Eigenvalue pairs summing below this are excluded from the spectral QFI.
pub const EIGEN_PAIR_TOL: f64 = 1e-12;
/// Outcomes less likely than this are excluded from the CFI.
pub const OUTCOME_TOL: f64 = 1e-12;
/// Default steady-state window in periods.
pub const WINDOW: (usize, usize) = (4000, 4400);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherKind {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub value: f64,
    pub kind: FisherKind,
    /// Classical: an excluded outcome had a non-negligible derivative.
    /// Quantum: singular pairs carried weight.
    pub flagged: bool,
}

/// `F_Q = sum_{rs} 2 |<r|drho|s>|^2 / (l_r + l_s)` over the eigenbasis of `rho`.
pub fn qfi_spectral(rho: &BlockState, drho: &CMat) -> Result<FisherResult> {
    let (lam, u) = linalg::eigh(rho.rho.as_ref())?;
    let t = linalg::mul(linalg::mul(u.adjoint(), drho.as_ref()).as_ref(), u.as_ref());
    let d = lam.len();
    let mut f = 0.0;
    for r in 0..d {
        for s in 0..d {
            let sum = lam[r] + lam[s];
            if sum < EIGEN_PAIR_TOL {
                continue;
            }
            f += 2.0 * (t[(r, s)] * t[(s, r)]).re / sum;
        }
    }
    Ok(FisherResult {
        value: f.max(0.0),
        kind: FisherKind::Quantum,
        flagged: false,
    })
}

/// Central difference `(b - a) / (2 dh)` of two states.
pub fn central_difference(minus: &BlockState, plus: &BlockState, dh: f64) -> CMat {
    let s = C::new(1.0 / (2.0 * dh), 0.0);
    CMat::from_fn(minus.dim(), minus.dim(), |i, j| (plus.rho[(i, j)] - minus.rho[(i, j)]) * s)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(SenseError::InvalidDistribution("no outcomes".into()));
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= -1e-12)) {
        return Err(SenseError::InvalidDistribution(format!("probability {x} out of range")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(SenseError::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// `F_C = sum_r (dp_r)^2 / p_r`.
pub fn cfi(p: &[f64], dp: &[f64]) -> Result<FisherResult> {
    check_distribution(p)?;
    if p.len() != dp.len() {
        return Err(SenseError::InvalidDistribution(format!(
            "{} probabilities but {} derivatives",
            p.len(),
            dp.len()
        )));
    }
    let mut f = 0.0;
    let mut flagged = false;
    for (&pr, &d) in p.iter().zip(dp) {
        if pr > OUTCOME_TOL {
            f += d * d / pr;
        } else if d.abs() > 1e-8 {
            flagged = true;
        }
    }
    Ok(FisherResult {
        value: f,
        kind: FisherKind::Classical,
        flagged,
    })
}

/// Mean of `series[n_min..=n_max]`, where `series[n]` is the value after `n`
/// periods.
pub fn steady_average(series: &[f64], n_min: usize, n_max: usize) -> Result<f64> {
    if n_max <= n_min || n_max >= series.len() {
        return Err(SenseError::InvalidDistribution(format!(
            "window [{n_min}, {n_max}] does not fit a series of {} points",
            series.len()
        )));
    }
    let w = &series[n_min..=n_max];
    Ok(w.iter().sum::<f64>() / w.len() as f64)
}

/// `F = A L^eta` fitted by least squares on `log F` against `log L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub a: f64,
    pub eta: f64,
    /// Sum of squared residuals of `log F`.
    pub residual: f64,
    pub l_range: (f64, f64),
}

impl ScalingFit {
    pub fn eval(&self, l: f64) -> f64 {
        self.a * l.powf(self.eta)
    }
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(SenseError::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(l, f)| !(l > 0.0 && f > 0.0)) {
        return Err(SenseError::NonPositiveInput);
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let eta = sxy / sxx;
    let b = my - eta * mx;
    let residual = xs.iter().zip(&ys).map(|(x, y)| (y - b - eta * x).powi(2)).sum();
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingFit {
        a: b.exp(),
        eta,
        residual,
        l_range: (lo, hi),
    })
}

/// Counts `n_k` of each outcome over `M` shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub counts: Vec<u64>,
}

impl MeasurementRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Multinomial draw of `m` shots from `dist` with a ChaCha20 generator.
pub fn simulate_measurements(dist: &[f64], m: u64, seed: u64) -> Result<MeasurementRecord> {
    check_distribution(dist)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; dist.len()];
    let mut left = m;
    let mut mass = 1.0;
    for (k, &p) in dist.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == dist.len() {
            counts[k] = left;
            break;
        }
        let q = (p.max(0.0) / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, q)
            .map_err(|e| SenseError::InvalidDistribution(e.to_string()))?
            .sample(&mut rng);
        counts[k] = draw;
        left -= draw;
        mass -= p.max(0.0);
        if mass <= 0.0 {
            break;
        }
    }
    Ok(MeasurementRecord { counts })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Uniform,
    /// Unnormalized weights, one per grid point.
    Weights(Vec<f64>),
}

impl Prior {
    pub fn id(&self) -> &'static str {
        match self {
            Prior::Uniform => "uniform",
            Prior::Weights(_) => "weights",
        }
    }
}

/// Posterior masses over an ascending `h1` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub grid: Vec<f64>,
    pub mass: Vec<f64>,
    pub map: f64,
    pub map_index: usize,
    /// Several grid points share the maximal posterior mass.
    pub degenerate_map: bool,
    pub prior: &'static str,
}

/// Outcome probabilities tabulated on a grid of candidate `h1`.
#[derive(Debug, Clone)]
pub struct LikelihoodTable {
    pub grid: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
}

impl LikelihoodTable {
    pub fn new(grid: Vec<f64>, model: impl Fn(f64) -> Vec<f64>) -> Self {
        let probs = grid.iter().map(|&h| model(h)).collect();
        Self { grid, probs }
    }

    pub fn posterior(&self, record: &MeasurementRecord, prior: &Prior) -> Result<Posterior> {
        let g = self.grid.len();
        if g == 0 || self.probs.len() != g {
            return Err(SenseError::InvalidDistribution("empty or mismatched grid".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SenseError::InvalidDistribution("grid must be strictly ascending".into()));
        }
        let log_prior: Vec<f64> = match prior {
            Prior::Uniform => vec![0.0; g],
            Prior::Weights(w) => {
                if w.len() != g || w.iter().any(|x| !(*x >= 0.0)) {
                    return Err(SenseError::InvalidDistribution("prior weights".into()));
                }
                w.iter().map(|x| x.ln()).collect()
            }
        };
        let log_post: Vec<f64> = (0..g)
            .map(|i| {
                let mut acc = log_prior[i];
                for (&n, &p) in record.counts.iter().zip(&self.probs[i]) {
                    if n > 0 {
                        acc += n as f64 * p.max(0.0).ln();
                    }
                }
                acc
            })
            .collect();
        let mut best = 0;
        for i in 1..g {
            if log_post[i] > log_post[best] {
                best = i;
            }
        }
        let top = log_post[best];
        if top == f64::NEG_INFINITY {
            return Err(SenseError::AllZeroLikelihood);
        }
        let ties = log_post.iter().filter(|&&x| top - x <= 1e-12 * top.abs().max(1.0)).count();
        let w: Vec<f64> = log_post.iter().map(|x| (x - top).exp()).collect();
        let z: f64 = w.iter().sum();
        Ok(Posterior {
            grid: self.grid.clone(),
            mass: w.iter().map(|x| x / z).collect(),
            map: self.grid[best],
            map_index: best,
            degenerate_map: ties > 1,
            prior: prior.id(),
        })
    }
}

/// Posterior for `record` under `model` evaluated on `grid`.
pub fn bayes_posterior(
    record: &MeasurementRecord,
    model: impl Fn(f64) -> Vec<f64>,
    prior: &Prior,
    grid: &[f64],
) -> Result<Posterior> {
    LikelihoodTable::new(grid.to_vec(), model).posterior(record, prior)
}

/// `n` evenly spaced points covering `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Per-repetition seed derived from a master seed (SplitMix64).
pub fn derive_seed(master: u64, rep: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(rep + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub estimates: Vec<f64>,
    pub mean: f64,
    /// Unbiased sample variance of the estimates.
    pub variance: f64,
    /// `1 / (M F_C)` when a Fisher information was supplied.
    pub cramer_rao: Option<f64>,
}

/// Sample variance of `estimate(seed)` over `reps` independently seeded runs.
pub fn estimator_variance(
    reps: usize,
    master_seed: u64,
    estimate: impl Fn(u64) -> Result<f64> + Sync,
    shots_and_fisher: Option<(u64, f64)>,
) -> Result<VarianceReport> {
    if reps < 2 {
        return Err(SenseError::TooFewPoints(reps));
    }
    let estimates = (0..reps as u64)
        .into_par_iter()
        .map(|r| estimate(derive_seed(master_seed, r)))
        .collect::<Result<Vec<f64>>>()?;
    let mean = estimates.iter().sum::<f64>() / reps as f64;
    let variance = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    Ok(VarianceReport {
        estimates,
        mean,
        variance,
        cramer_rao: shots_and_fisher.map(|(m, f)| 1.0 / (m as f64 * f)),
    })
}

/// Simulated block-magnetization experiment with a tabulated likelihood.
#[derive(Debug, Clone)]
pub struct BayesExperiment {
    pub table: LikelihoodTable,
    /// Outcome distribution at the true `h1`.
    pub truth: Vec<f64>,
    pub shots: u64,
    pub prior: Prior,
}

impl BayesExperiment {
    pub fn run(&self, seed: u64) -> Result<Posterior> {
        let rec = simulate_measurements(&self.truth, self.shots, seed)?;
        self.table.posterior(&rec, &self.prior)
    }

    pub fn variance(&self, reps: usize, master_seed: u64, fisher: Option<f64>) -> Result<VarianceReport> {
        estimator_variance(reps, master_seed, |s| Ok(self.run(s)?.map), fisher.map(|f| (self.shots, f)))
    }
}
