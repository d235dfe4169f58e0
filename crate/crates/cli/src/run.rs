//! Experiment dispatch.

use floquet_sense::ed::{partial_trace, validate_ed, EdEngine, EdParams, EdState};
use floquet_sense::freefermion::{
    correlators_at, evolve_modes, floquet_gap, gap_line, magnetization, minimize_gap_over_h1, GapSearch, TimeLabel,
};
use floquet_sense::gaussian::{
    block_magnetization_distribution, block_state_from_gamma, gamma_from_correlators, BlockState, Context,
    GaussianProbe,
};
use floquet_sense::metrology::{central_difference, cfi, derive_seed, fit_scaling, qfi_spectral, BayesExperiment, LikelihoodTable, Prior};
use floquet_sense::pipeline::{block_fisher, ed_likelihood, fisher_from_states, steady_qfi, EdBlockProbe, SteadyMethod};
use floquet_sense::{validate, BlockSpec, Complex64, ValidatedParams};
use rayon::prelude::*;

use crate::config::{Engine, Experiment, QfiMethod, RunConfig};
use crate::error::{CliError, Result};
use crate::table::{Cell, Kind, ResultTable};

pub const ARTIFACT: &str = concat!("floquet-sense ", env!("CARGO_PKG_VERSION"));

pub fn run(cfg: &RunConfig) -> Result<ResultTable> {
    let mut table = match cfg.experiment {
        Experiment::Evolve if cfg.engine == Engine::Ed => ed_evolve(cfg)?,
        Experiment::Evolve => evolve(cfg)?,
        Experiment::EdEvolve => ed_evolve(cfg)?,
        Experiment::GapScan => gap_scan(cfg)?,
        Experiment::QfiScan => qfi_scan(cfg)?,
        Experiment::GapLine => gap_line_scan(cfg)?,
        Experiment::Scale => scale(cfg)?,
        Experiment::Estimate => estimate(cfg)?,
        Experiment::SquarePulseScan => square_pulse_scan(cfg)?,
    };
    let results = std::mem::take(&mut table.metadata);
    table.meta("artifact", ARTIFACT);
    table.meta("experiment", cfg.experiment);
    for (k, v) in &cfg.resolved {
        table.meta(format!("config.{k}"), v);
    }
    table.metadata.extend(results);
    Ok(table)
}

fn ff_params(cfg: &RunConfig) -> Result<ValidatedParams> {
    if cfg.engine == Engine::Ed {
        return Err(CliError::config(
            format!("{} runs on the freefermion engine", cfg.experiment),
            &["engine"],
        ));
    }
    let p = validate(&cfg.model)?;
    check_blocks(cfg, p.n)?;
    Ok(p)
}

fn check_blocks(cfg: &RunConfig, n: usize) -> Result<()> {
    for &l in &cfg.blocks {
        let v = BlockSpec::new(l).violations(n);
        if !v.is_empty() {
            return Err(floquet_sense::SenseError::InvalidParams(v).into());
        }
    }
    Ok(())
}

fn needs_explicit(cfg: &RunConfig) -> Result<()> {
    for &l in &cfg.blocks {
        BlockSpec::new(l).check_explicit().map_err(|e| CliError::config(e.to_string(), &["block.l"]))?;
    }
    Ok(())
}

fn block_columns(cfg: &RunConfig, lead: &[(&str, Kind)], classical: bool) -> ResultTable {
    let mut names: Vec<(String, Kind)> = lead.iter().map(|&(n, k)| (n.to_string(), k)).collect();
    for &l in &cfg.blocks {
        names.push((format!("qfi_l{l}"), Kind::Float));
        if classical {
            names.push((format!("cfi_l{l}"), Kind::Float));
        }
    }
    let refs: Vec<(&str, Kind)> = names.iter().map(|(n, k)| (n.as_str(), *k)).collect();
    ResultTable::new(&refs)
}

fn probe(cfg: &RunConfig, p: &ValidatedParams) -> GaussianProbe {
    GaussianProbe::new(p, &cfg.initial, cfg.dh1)
}

fn grid(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let h1s = cfg.h1_axis.points();
    cfg.h0_axis
        .points()
        .into_iter()
        .flat_map(|h0| h1s.iter().map(move |&h1| (h0, h1)))
        .collect()
}

/// QFI (and optionally CFI) of every configured block at one time.
fn block_fishers(cfg: &RunConfig, pr: &GaussianProbe, ctx: Context) -> Result<Vec<Cell>> {
    let mut out = vec![];
    let gaussian = match cfg.qfi_method {
        QfiMethod::Gaussian => Some(pr.qfi_blocks(ctx, &cfg.blocks)?),
        QfiMethod::Spectral => None,
    };
    for (i, &l) in cfg.blocks.iter().enumerate() {
        let spec = BlockSpec::new(l);
        let q = match &gaussian {
            Some(g) => g[i].value,
            None => {
                let s = pr.block_states(ctx, &spec)?;
                qfi_spectral(&s[1], &central_difference(&s[0], &s[2], pr.dh1()))?.value
            }
        };
        out.push(q.into());
        if cfg.classical {
            out.push(block_fisher(pr, ctx, &spec)?.classical.value.into());
        }
    }
    Ok(out)
}

fn evolve(cfg: &RunConfig) -> Result<ResultTable> {
    let p = ff_params(cfg)?;
    if cfg.classical || cfg.qfi_method == QfiMethod::Spectral {
        needs_explicit(cfg)?;
    }
    let pr = probe(cfg, &p);
    let mut table = block_columns(cfg, &[("n", Kind::Int), ("m_z", Kind::Float)], cfg.classical);
    let rows = cfg
        .times
        .par_iter()
        .map(|&n| {
            let mut row: Vec<Cell> = vec![n.into(), magnetization(&pr.chain(1).state_at(n)).into()];
            row.extend(block_fishers(cfg, &pr, Context::Stroboscopic(n))?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn ed_params(cfg: &RunConfig) -> Result<EdParams> {
    let edp = validate_ed(&EdParams::from_model(&cfg.model, cfg.alpha, cfg.boundary))?;
    check_blocks(cfg, edp.n)?;
    needs_explicit(cfg)?;
    if let Some(&l) = cfg.blocks.iter().find(|&&l| cfg.block_start + l > edp.n) {
        return Err(CliError::config(
            format!("block of {l} sites starting at {} overruns the chain of {}", cfg.block_start, edp.n),
            &["block.l", "block.start"],
        ));
    }
    Ok(edp)
}

fn polarized(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn ed_evolve(cfg: &RunConfig) -> Result<ResultTable> {
    let edp = ed_params(cfg)?;
    let engine = EdEngine::new(&edp)?;
    let h1 = cfg.model.h1;
    let h1s = [h1 - cfg.dh1, h1, h1 + cfg.dh1].map(EdParams::model_h1);
    let mut t = engine.trajectory(&polarized(edp.n), &h1s);
    let mut table = block_columns(cfg, &[("n", Kind::Int), ("m_z", Kind::Float)], cfg.classical);
    for &n in &cfg.times {
        while t.steps() < n {
            t.step();
        }
        let states: Vec<EdState> = (0..3).map(|b| EdState::Pure(t.state(b))).collect();
        let mut row: Vec<Cell> = vec![n.into(), states[1].magnetization().into()];
        let fishers = cfg
            .blocks
            .par_iter()
            .map(|&l| {
                let b = states
                    .iter()
                    .map(|s| partial_trace(s, cfg.block_start, l))
                    .collect::<floquet_sense::Result<Vec<BlockState>>>()?;
                let f = fisher_from_states(&[b[0].clone(), b[1].clone(), b[2].clone()], cfg.dh1)?;
                Ok((f.quantum.value, f.classical.value))
            })
            .collect::<Result<Vec<_>>>()?;
        for (q, c) in fishers {
            row.push(q.into());
            if cfg.classical {
                row.push(c.into());
            }
        }
        table.push(row);
    }
    Ok(table)
}

fn gap_scan(cfg: &RunConfig) -> Result<ResultTable> {
    let p = ff_params(cfg)?;
    let mut table = ResultTable::new(&[
        ("h0", Kind::Float),
        ("h1", Kind::Float),
        ("gap", Kind::Float),
        ("argmin_k", Kind::Float),
    ]);
    let rows: Vec<Vec<Cell>> = grid(cfg)
        .par_iter()
        .map(|&(h0, h1)| {
            let g = floquet_gap(&p.with_h0(h0).with_h1(h1));
            vec![h0.into(), h1.into(), g.gap.into(), g.k_min.into()]
        })
        .collect();
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Steady-state magnetization and block QFIs.
fn steady_point(cfg: &RunConfig, p: &ValidatedParams) -> Result<(f64, Vec<f64>)> {
    let pr = probe(cfg, p);
    let m = match cfg.steady {
        SteadyMethod::Dephased => magnetization(&pr.chain(1).steady_state()),
        SteadyMethod::Window { n_min, n_max } => {
            (n_min..=n_max).map(|n| magnetization(&pr.chain(1).state_at(n))).sum::<f64>() / (n_max - n_min + 1) as f64
        }
    };
    Ok((m, steady_qfi(&pr, &cfg.blocks, cfg.steady)?))
}

fn qfi_scan(cfg: &RunConfig) -> Result<ResultTable> {
    let p = ff_params(cfg)?;
    let mut table = block_columns(cfg, &[("h0", Kind::Float), ("h1", Kind::Float), ("m_z", Kind::Float)], false);
    let rows = grid(cfg)
        .par_iter()
        .map(|&(h0, h1)| {
            let (m, q) = steady_point(cfg, &p.with_h0(h0).with_h1(h1))?;
            let mut row: Vec<Cell> = vec![h0.into(), h1.into(), m.into()];
            row.extend(q.into_iter().map(Cell::from));
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn gap_search(cfg: &RunConfig) -> GapSearch {
    GapSearch {
        h1_lo: cfg.h1_axis.min,
        h1_hi: cfg.h1_axis.max,
        coarse_steps: cfg.h1_axis.steps,
        tol: 1e-9,
    }
}

fn gap_line_scan(cfg: &RunConfig) -> Result<ResultTable> {
    let p = ff_params(cfg)?;
    let mut cols = vec![
        ("h0", Kind::Float),
        ("h1_analytic", Kind::Float),
        ("h1_numeric", Kind::Float),
        ("gap_analytic", Kind::Float),
        ("gap_numeric", Kind::Float),
    ];
    if cfg.qfi_peak {
        cols.extend([("h1_qfi_peak", Kind::Float), ("qfi_peak", Kind::Float)]);
    }
    let mut table = ResultTable::new(&cols);
    let search = gap_search(cfg);
    let h1s = cfg.h1_axis.points();
    let rows = cfg
        .h0_axis
        .points()
        .par_iter()
        .map(|&h0| {
            let x = gap_line(&p, &[h0], &search)[0];
            let mut row: Vec<Cell> = vec![
                h0.into(),
                x.h1_analytic.into(),
                x.h1_numeric.into(),
                x.gap_analytic.into(),
                x.gap_numeric.into(),
            ];
            if cfg.qfi_peak {
                let l = cfg.blocks[0];
                let mut best = (f64::NAN, f64::NEG_INFINITY);
                for &h1 in &h1s {
                    let f = steady_qfi(&probe(cfg, &p.with_h0(h0).with_h1(h1)), &[l], cfg.steady)?[0];
                    if f > best.1 {
                        best = (h1, f);
                    }
                }
                row.extend([best.0.into(), best.1.into()]);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn scale(cfg: &RunConfig) -> Result<ResultTable> {
    let p = ff_params(cfg)?;
    let q = steady_qfi(&probe(cfg, &p), &cfg.blocks, cfg.steady)?;
    let mut table = ResultTable::new(&[("l", Kind::Int), ("qfi", Kind::Float)]);
    for (&l, &f) in cfg.blocks.iter().zip(&q) {
        table.push(vec![l.into(), f.into()]);
    }
    let pts: Vec<(f64, f64)> = cfg.blocks.iter().zip(&q).map(|(&l, &f)| (l as f64, f)).collect();
    let fit = fit_scaling(&pts)?;
    table.meta("result.a", fit.a);
    table.meta("result.eta", fit.eta);
    table.meta("result.residual", fit.residual);
    Ok(table)
}

/// Block-magnetization distributions at each model-unit amplitude.
fn distributions(cfg: &RunConfig, l: usize, h1s: Vec<f64>) -> Result<LikelihoodTable> {
    match cfg.engine {
        Engine::Ed => {
            let edp = ed_params(cfg)?;
            let pr = EdBlockProbe::new(&edp, polarized(edp.n), cfg.block_start, l)?;
            Ok(ed_likelihood(&pr, h1s, cfg.bayes.n_obs)?)
        }
        Engine::FreeFermion => {
            let p = ff_params(cfg)?;
            needs_explicit(cfg)?;
            let n = cfg.bayes.n_obs;
            let probs = h1s
                .par_iter()
                .map(|&h1| {
                    let q = p.with_h1(h1);
                    let modes = evolve_modes(&q, &cfg.initial, n);
                    let g = gamma_from_correlators(&correlators_at(&q, &modes, l, TimeLabel::Stroboscopic(n)), h1);
                    Ok(block_magnetization_distribution(&block_state_from_gamma(&g, &BlockSpec::new(l))?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LikelihoodTable { grid: h1s, probs })
        }
    }
}

fn estimate(cfg: &RunConfig) -> Result<ResultTable> {
    let [l] = cfg.blocks[..] else {
        return Err(CliError::config("estimate needs exactly one block size", &["block.l"]));
    };
    let truth = cfg.model.h1;
    let mut h1s = cfg.bayes.grid.points();
    let g = h1s.len();
    h1s.extend([truth - cfg.dh1, truth, truth + cfg.dh1]);
    let mut lik = distributions(cfg, l, h1s)?;
    let extra = lik.probs.split_off(g);
    lik.grid.truncate(g);
    let dp: Vec<f64> = extra[2].iter().zip(&extra[0]).map(|(a, b)| (a - b) / (2.0 * cfg.dh1)).collect();
    let fisher = cfi(&extra[1], &dp)?.value;

    let mut table = ResultTable::new(&[("m", Kind::Int), ("rep", Kind::Int), ("estimate", Kind::Float)]);
    table.meta("result.fisher_c", fisher);
    for &m in &cfg.bayes.shots {
        let exp = BayesExperiment {
            table: lik.clone(),
            truth: extra[1].clone(),
            shots: m,
            prior: Prior::Uniform,
        };
        let rep = exp.variance(cfg.bayes.reps, derive_seed(cfg.seed, m), Some(fisher))?;
        for (i, x) in rep.estimates.iter().enumerate() {
            table.push(vec![m.into(), i.into(), (*x).into()]);
        }
        table.meta(format!("result.mean.m{m}"), rep.mean);
        table.meta(format!("result.var.m{m}"), rep.variance);
        if let Some(b) = rep.cramer_rao {
            table.meta(format!("result.cramer_rao.m{m}"), b);
        }
    }
    Ok(table)
}

fn square_pulse_scan(cfg: &RunConfig) -> Result<ResultTable> {
    let p = ff_params(cfg)?;
    let mut table = block_columns(cfg, &[("h0", Kind::Float), ("h1", Kind::Float), ("gap", Kind::Float)], false);
    let rows = grid(cfg)
        .par_iter()
        .map(|&(h0, h1)| {
            let q = p.with_h0(h0).with_h1(h1);
            let f = steady_qfi(&probe(cfg, &q), &cfg.blocks, cfg.steady)?;
            Ok((h0, h1, floquet_gap(&q).gap, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for (h0, h1, gap, f) in rows {
        if f[0] > best.2 {
            best = (h0, h1, f[0]);
        }
        let mut row: Vec<Cell> = vec![h0.into(), h1.into(), gap.into()];
        row.extend(f.into_iter().map(Cell::from));
        table.push(row);
    }
    let (h1_gap, _) = minimize_gap_over_h1(&p.with_h0(best.0), &gap_search(cfg));
    table.meta("result.qfi_peak.h0", best.0);
    table.meta("result.qfi_peak.h1", best.1);
    table.meta("result.gap_min.h1", h1_gap);
    table.meta("result.grid_step.h1", cfg.h1_axis.spacing());
    Ok(table)
}
