//! Flat `key = value` run configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use floquet_sense::ed::Boundary;
use floquet_sense::metrology::uniform_grid;
use floquet_sense::pipeline::SteadyMethod;
use floquet_sense::{InitialState, ModelParams, PulseShape};

use crate::error::{CliError, Result};

/// Parse `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; a ` #` starts a trailing comment.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(" #") {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::config(format!("line {}: expected `key = value`", i + 1), &[]));
        };
        let (k, v) = (k.trim(), v.trim());
        let valid = !k.is_empty()
            && k.split('.').all(|s| {
                !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            });
        if !valid {
            return Err(CliError::config(format!("line {}: malformed key `{k}`", i + 1), &[k]));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::config(format!("line {}: duplicate key `{k}`", i + 1), &[k]));
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Evolve,
    GapScan,
    QfiScan,
    GapLine,
    Scale,
    Estimate,
    EdEvolve,
    SquarePulseScan,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::GapScan => "gap-scan",
            Experiment::QfiScan => "qfi-scan",
            Experiment::GapLine => "gap-line",
            Experiment::Scale => "scale",
            Experiment::Estimate => "estimate",
            Experiment::EdEvolve => "ed-evolve",
            Experiment::SquarePulseScan => "square-pulse-scan",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    FreeFermion,
    Ed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiMethod {
    /// Majorana-covariance formula.
    Gaussian,
    /// Eigendecomposition of the explicit block density matrix.
    Spectral,
}

/// Inclusive range split into `steps` equal intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        if self.min == self.max {
            return vec![self.min];
        }
        uniform_grid(self.min, self.max, self.steps + 1)
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.steps as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesSpec {
    pub shots: Vec<u64>,
    pub reps: usize,
    pub n_obs: u64,
    pub grid: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub engine: Engine,
    pub model: ModelParams,
    pub alpha: f64,
    pub boundary: Boundary,
    pub initial: InitialState,
    pub dh1: f64,
    pub blocks: Vec<usize>,
    pub block_start: usize,
    pub times: Vec<u64>,
    pub steady: SteadyMethod,
    pub h0_axis: Axis,
    pub h1_axis: Axis,
    pub qfi_method: QfiMethod,
    pub classical: bool,
    pub qfi_peak: bool,
    pub bayes: BayesSpec,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Every key with its effective value, in key order.
    pub resolved: BTreeMap<String, String>,
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, key: &str, default: &str) -> String {
        self.used.insert(key.to_string());
        let v = self.map.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    fn parsed<T: FromStr>(&mut self, key: &str, default: &str, what: &str) -> Result<T> {
        let v = self.raw(key, default);
        v.parse()
            .map_err(|_| CliError::config(format!("{key}: expected {what}, got `{v}`"), &[key]))
    }

    fn f64(&mut self, key: &str, default: &str) -> Result<f64> {
        self.parsed(key, default, "a number")
    }

    fn u64(&mut self, key: &str, default: &str) -> Result<u64> {
        self.parsed(key, default, "a non-negative integer")
    }

    fn usize(&mut self, key: &str, default: &str) -> Result<usize> {
        self.parsed(key, default, "a non-negative integer")
    }

    fn bool(&mut self, key: &str, default: &str) -> Result<bool> {
        self.parsed(key, default, "true or false")
    }

    fn choice<T: Copy>(&mut self, key: &str, default: &str, options: &[(&str, T)]) -> Result<T> {
        let v = self.raw(key, default);
        options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::config(format!("{key}: expected one of {}, got `{v}`", names.join(", ")), &[key])
        })
    }

    /// Comma-separated integers and inclusive `a..b` ranges.
    fn list(&mut self, key: &str, default: &str) -> Result<Vec<u64>> {
        let v = self.raw(key, default);
        let bad = || CliError::config(format!("{key}: expected a list like `1,2,4` or `1..50`, got `{v}`"), &[key]);
        let mut out = vec![];
        for item in v.split(',').map(str::trim) {
            match item.split_once("..") {
                Some((a, b)) => {
                    let a: u64 = a.trim().parse().map_err(|_| bad())?;
                    let b: u64 = b.trim().parse().map_err(|_| bad())?;
                    if b < a {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => out.push(item.parse().map_err(|_| bad())?),
            }
        }
        Ok(out)
    }

    fn axis(&mut self, prefix: &str, min: &str, max: &str, steps: &str) -> Result<Axis> {
        let kmin = format!("{prefix}.min");
        let kmax = format!("{prefix}.max");
        let ksteps = format!("{prefix}.steps");
        let a = Axis {
            min: self.f64(&kmin, min)?,
            max: self.f64(&kmax, max)?,
            steps: self.usize(&ksteps, steps)?,
        };
        if !(a.min.is_finite() && a.max.is_finite()) || a.max < a.min {
            return Err(CliError::config(
                format!("{prefix}: empty or non-finite range [{}, {}]", a.min, a.max),
                &[&kmin, &kmax],
            ));
        }
        if a.steps < 1 {
            return Err(CliError::config(format!("{ksteps}: must be at least 1"), &[&ksteps]));
        }
        Ok(a)
    }
}

impl RunConfig {
    pub fn from_map(experiment: Experiment, map: &BTreeMap<String, String>) -> Result<Self> {
        let mut r = Reader {
            map,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
        };
        if let Some(e) = map.get("experiment") {
            if e != experiment.id() {
                return Err(CliError::config(
                    format!("config is for experiment `{e}`, invoked as `{experiment}`"),
                    &["experiment"],
                ));
            }
        }
        r.raw("experiment", experiment.id());

        let ed_default = matches!(experiment, Experiment::EdEvolve | Experiment::Estimate);
        let engine = r.choice(
            "engine",
            if ed_default { "ed" } else { "freefermion" },
            &[("freefermion", Engine::FreeFermion), ("ed", Engine::Ed)],
        )?;
        if experiment == Experiment::EdEvolve && engine != Engine::Ed {
            return Err(CliError::config("ed-evolve runs on the ed engine", &["engine"]));
        }
        let ed = engine == Engine::Ed;

        let tau = r.f64("model.tau", "0.2")?;
        let square = experiment == Experiment::SquarePulseScan;
        let pulse_kind = r.choice("model.pulse", if square { "square" } else { "kick" }, &[("kick", false), ("square", true)])?;
        let w = r.f64("model.w", &(tau / 2.0).to_string())?;
        if square && !pulse_kind {
            return Err(CliError::config("square-pulse-scan needs model.pulse = square", &["model.pulse"]));
        }
        let model = ModelParams {
            j: r.f64("model.j", "1")?,
            h0: r.f64("model.h0", if ed_default { "0.191" } else { "1" })?,
            h1: r.f64("model.h1", if ed_default { "0.161" } else { "0.1" })?,
            tau,
            n: r.usize("model.n", if ed { "13" } else { "2000" })?,
            pulse: if pulse_kind {
                PulseShape::SquarePulse { w }
            } else {
                PulseShape::DeltaKick
            },
            allow_strong_drive: r.bool("model.allow_strong_drive", "false")?,
        };
        let alpha = r.f64("model.alpha", "inf")?;
        let boundary = r.choice(
            "model.boundary",
            if ed { "open" } else { "periodic" },
            &[("open", Boundary::Open), ("periodic", Boundary::Periodic)],
        )?;
        if !ed && (alpha.is_finite() || boundary != Boundary::Periodic) {
            return Err(CliError::config(
                "the freefermion engine covers only alpha = inf with periodic boundaries",
                &["model.alpha", "model.boundary"],
            ));
        }

        let kind = r.choice(
            "initial",
            "polarized",
            &[("polarized", 0u8), ("ground", 1), ("thermal", 2)],
        )?;
        let h0i = r.f64("initial.h0", &model.h0.to_string())?;
        let beta = r.f64("initial.beta", "1")?;
        let initial = match kind {
            0 => InitialState::PolarizedUp,
            1 => InitialState::GroundStateOfH0 { h0: h0i },
            _ => InitialState::ThermalOfH0 { beta, h0: h0i },
        };
        if ed && initial != InitialState::PolarizedUp {
            return Err(CliError::config("the ed engine starts from the polarized state", &["initial"]));
        }
        let bad_initial: Vec<&str> = initial.violations().iter().map(|v| v.key).collect();
        if !bad_initial.is_empty() {
            return Err(CliError::config(format!("invalid initial state {initial:?}"), &bad_initial));
        }

        let dh1 = r.f64("dh1", "1e-3")?;
        if !(dh1 > 0.0 && dh1.is_finite()) {
            return Err(CliError::config("dh1 must be positive", &["dh1"]));
        }

        let blocks: Vec<usize> = r.list("block.l", "4")?.into_iter().map(|l| l as usize).collect();
        if blocks.contains(&0) {
            return Err(CliError::config("block.l: blocks need at least one site", &["block.l"]));
        }
        let block_start = r.usize("block.start", "0")?;

        let n_min = r.u64("time.n_min", "0")?;
        let n_max = r.u64("time.n_max", "4400")?;
        let stride = r.u64("time.stride", "1")?;
        if n_max < n_min || stride == 0 {
            return Err(CliError::config(
                "time: need n_max >= n_min and stride >= 1",
                &["time.n_min", "time.n_max", "time.stride"],
            ));
        }
        let times: Vec<u64> = (n_min..=n_max).step_by(stride as usize).collect();

        let w_min = r.u64("window.n_min", "4000")?;
        let w_max = r.u64("window.n_max", "4400")?;
        let steady = match r.choice("steady.method", "window", &[("window", true), ("dephased", false)])? {
            true => {
                if w_max <= w_min {
                    return Err(CliError::config("window: need n_max > n_min", &["window.n_min", "window.n_max"]));
                }
                SteadyMethod::Window {
                    n_min: w_min,
                    n_max: w_max,
                }
            }
            false => SteadyMethod::Dephased,
        };

        let h0_axis = r.axis("grid.h0", "0", "2", "100")?;
        let h1_axis = r.axis("grid.h1", "0", "0.5", "100")?;

        let qfi_method = r.choice(
            "qfi.method",
            if ed { "spectral" } else { "gaussian" },
            &[("gaussian", QfiMethod::Gaussian), ("spectral", QfiMethod::Spectral)],
        )?;
        if ed && qfi_method == QfiMethod::Gaussian {
            return Err(CliError::config("the ed engine computes the QFI spectrally", &["qfi.method"]));
        }
        let classical = r.bool("fisher.classical", if experiment == Experiment::EdEvolve { "true" } else { "false" })?;
        let qfi_peak = r.bool("gap_line.qfi_peak", "false")?;

        let shots = r.list("bayes.m", "1000,10000")?;
        if shots.contains(&0) {
            return Err(CliError::config("bayes.m: sample sizes must be positive", &["bayes.m"]));
        }
        let reps = r.usize("bayes.reps", "50")?;
        if reps < 2 {
            return Err(CliError::config("bayes.reps: need at least 2 repetitions", &["bayes.reps"]));
        }
        let bayes = BayesSpec {
            shots,
            reps,
            n_obs: r.u64("bayes.n_obs", "100")?,
            grid: r.axis("bayes.grid", "0", "0.4", "199")?,
        };

        let seed = r.u64("seed", "0")?;
        let output = map.get("output").map(PathBuf::from);
        if output.is_some() {
            r.raw("output", "");
        }

        let unknown: Vec<&str> = map.keys().filter(|k| !r.used.contains(*k)).map(String::as_str).collect();
        if !unknown.is_empty() {
            return Err(CliError::config(format!("unknown keys: {}", unknown.join(", ")), &unknown));
        }

        Ok(Self {
            experiment,
            engine,
            model,
            alpha,
            boundary,
            initial,
            dh1,
            blocks,
            block_start,
            times,
            steady,
            h0_axis,
            h1_axis,
            qfi_method,
            classical,
            qfi_peak,
            bayes,
            seed,
            output,
            resolved: r.resolved,
        })
    }

    /// Override the seed, keeping the echoed configuration in sync.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.resolved.insert("seed".into(), seed.to_string());
    }

    pub fn set_output(&mut self, path: PathBuf) {
        self.resolved.insert("output".into(), path.display().to_string());
        self.output = Some(path);
    }
}
