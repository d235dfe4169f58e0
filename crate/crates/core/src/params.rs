//! Physical parameters of the kicked transverse-field Ising chain and their
//! validation.
//!
//! Energies are measured in units of the coupling `j`. For a delta kick `h1`
//! is the accumulated rotation angle of one kick; for a square pulse it is the
//! pulse field strength.

use std::f64::consts::PI;
use std::ops::Deref;

use crate::error::{Result, SenseError, Violation};

/// Largest block for which a dense `2^L` density matrix is built by default.
pub const DEFAULT_EXPLICIT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    DeltaKick,
    /// Field `h1` applied during the last `w` of every period.
    SquarePulse { w: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub j: f64,
    pub h0: f64,
    pub h1: f64,
    pub tau: f64,
    /// Chain length; even.
    pub n: usize,
    pub pulse: PulseShape,
    /// Permit `j * tau > 1`, outside the regime with a local steady state.
    pub allow_strong_drive: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            j: 1.0,
            h0: 1.0,
            h1: 0.1,
            tau: 0.2,
            n: 2000,
            pulse: PulseShape::DeltaKick,
            allow_strong_drive: false,
        }
    }
}

impl ModelParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.j.is_finite() && self.j > 0.0) {
            v.push(Violation::new("J", format!("must be positive, got {}", self.j)));
        }
        if !self.h0.is_finite() {
            v.push(Violation::new("h0", "must be finite"));
        }
        if !self.h1.is_finite() {
            v.push(Violation::new("h1", "must be finite"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            v.push(Violation::new("tau", format!("must be positive, got {}", self.tau)));
        }
        if self.n < 2 || !self.n.is_multiple_of(2) {
            v.push(Violation::new("N", format!("must be even and at least 2, got {}", self.n)));
        }
        if !self.allow_strong_drive && self.j > 0.0 && self.j * self.tau > 1.0 + 1e-12 {
            v.push(Violation::new(
                "tau",
                format!("J*tau = {} exceeds 1 (set allow_strong_drive to override)", self.j * self.tau),
            ));
        }
        if let PulseShape::SquarePulse { w } = self.pulse {
            if !(w > 0.0 && w <= self.tau) {
                v.push(Violation::new("w", format!("pulse width must lie in (0, tau], got {w}")));
            }
        }
        v
    }
}

/// Parameters that passed [`validate`]. Dereferences to [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(ModelParams);

impl Deref for ValidatedParams {
    type Target = ModelParams;
    fn deref(&self) -> &ModelParams {
        &self.0
    }
}

impl ValidatedParams {
    pub fn into_inner(self) -> ModelParams {
        self.0
    }

    /// Same model with a different drive amplitude. `h1` carries no
    /// constraint beyond finiteness, so the result stays valid.
    pub fn with_h1(&self, h1: f64) -> Self {
        assert!(h1.is_finite(), "h1 must be finite");
        Self(ModelParams { h1, ..self.0 })
    }

    pub fn with_h0(&self, h0: f64) -> Self {
        assert!(h0.is_finite(), "h0 must be finite");
        Self(ModelParams { h0, ..self.0 })
    }
}

/// Check every invariant and report all violations at once.
pub fn validate(params: &ModelParams) -> Result<ValidatedParams> {
    let v = params.violations();
    if v.is_empty() {
        Ok(ValidatedParams(*params))
    } else {
        Err(SenseError::InvalidParams(v))
    }
}

/// Antiperiodic quasi-momenta `k = (2m+1)π/N`, `m = 0..N/2`, ascending.
pub fn kgrid(n: usize) -> Vec<f64> {
    (0..n / 2)
        .map(|m| (2 * m + 1) as f64 * PI / n as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// All spins up; the fermionic vacuum.
    PolarizedUp,
    /// Ground state of the static chain at field `h0`.
    GroundStateOfH0 { h0: f64 },
    /// Gibbs state of the static chain at field `h0`.
    ThermalOfH0 { beta: f64, h0: f64 },
}

impl InitialState {
    pub fn violations(&self) -> Vec<Violation> {
        match *self {
            InitialState::PolarizedUp => vec![],
            InitialState::GroundStateOfH0 { h0 } if !h0.is_finite() => {
                vec![Violation::new("initial.h0", "must be finite")]
            }
            InitialState::GroundStateOfH0 { .. } => vec![],
            InitialState::ThermalOfH0 { beta, h0 } => {
                let mut v = vec![];
                if !(beta >= 0.0) {
                    v.push(Violation::new("initial.beta", format!("must be non-negative, got {beta}")));
                }
                if !h0.is_finite() {
                    v.push(Violation::new("initial.h0", "must be finite"));
                }
                v
            }
        }
    }

    pub fn is_pure(&self) -> bool {
        !matches!(self, InitialState::ThermalOfH0 { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    pub l: usize,
    pub explicit_cap: usize,
}

impl BlockSpec {
    pub fn new(l: usize) -> Self {
        Self {
            l,
            explicit_cap: DEFAULT_EXPLICIT_CAP,
        }
    }

    /// Block constraints against a chain of `n` sites.
    pub fn violations(&self, n: usize) -> Vec<Violation> {
        let mut v = vec![];
        if self.l == 0 {
            v.push(Violation::new("L", "block must contain at least one site"));
        }
        if 2 * self.l > n {
            v.push(Violation::new("L", format!("chain of {n} sites needs N >= 2L, got L = {}", self.l)));
        }
        v
    }

    pub fn check_explicit(&self) -> Result<()> {
        if self.l > self.explicit_cap {
            Err(SenseError::BlockTooLarge {
                l: self.l,
                cap: self.explicit_cap,
            })
        } else {
            Ok(())
        }
    }
}
