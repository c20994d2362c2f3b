//! Feasibility algebra for photoassociative Raman coupling: molecular versus
//! atomic two-photon Rabi frequencies and the resonance conditions that tell
//! the two processes apart.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;

/// Δ_M/γ_M at or below this is flagged.
pub const DECOHERENCE_WARNING_THRESHOLD: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanParams {
    /// Single-photon Rabi frequencies, rad/s.
    pub omega1: f64,
    pub omega2: f64,
    /// Detuning from the molecular intermediate state, rad/s.
    pub delta_m: f64,
    /// Detuning from the atomic intermediate state, rad/s.
    pub delta_a: f64,
    /// Franck-Condon amplitude.
    pub eta: f64,
    /// Molecular linewidth, rad/s.
    pub gamma_m: f64,
    /// Splitting between the two atomic ground levels, rad/s.
    pub omega_gg: f64,
    /// Laser wavenumber, 1/m.
    pub k: f64,
    /// Atomic mass, kg.
    pub mass: f64,
}

impl RamanParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.delta_m == 0.0 || self.delta_a == 0.0 {
            return bad("detunings must be nonzero");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta must lie in (0, 1]");
        }
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("gamma_m", self.gamma_m),
            ("k", self.k),
            ("mass", self.mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.omega_gg.is_finite() && self.omega_gg >= 0.0) {
            return bad("omega_gg must be non-negative");
        }
        if !self.delta_m.is_finite() || !self.delta_a.is_finite() {
            return bad("detunings must be finite");
        }
        Ok(())
    }

    /// Sodium D line at 589 nm. Coupling parameters are placeholders.
    pub fn sodium() -> Self {
        Self {
            omega1: 2.0 * PI * 1.0e6,
            omega2: 2.0 * PI * 1.0e6,
            delta_m: 2.0 * PI * 1.0e8,
            delta_a: 2.0 * PI * 1.0e11,
            eta: 0.1,
            gamma_m: 2.0 * PI * 1.0e7,
            omega_gg: 2.0 * PI * 1.77e9,
            k: 2.0 * PI / 589.0e-9,
            mass: 3.817e-26,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRabi {
    /// Ω₁Ω₂|η|²/Δ_M.
    pub omega_m: f64,
    /// Ω₁Ω₂/Δ_A.
    pub omega_a: f64,
    pub suppression_ratio: f64,
    /// Ω_R entering the pair Hamiltonians, omega_m/2.
    pub hamiltonian_rabi: f64,
    /// |Δ_M|/γ_M.
    pub decoherence_figure: f64,
    pub decoherence_warning: bool,
    pub molecular_dominant: bool,
}

pub fn effective_rabi(p: &RamanParams) -> Result<EffectiveRabi> {
    p.validate()?;
    let pump = p.omega1 * p.omega2;
    let omega_m = pump * p.eta * p.eta / p.delta_m;
    let omega_a = pump / p.delta_a;
    let decoherence_figure = p.delta_m.abs() / p.gamma_m;
    Ok(EffectiveRabi {
        omega_m,
        omega_a,
        suppression_ratio: p.eta * p.eta * p.delta_a / p.delta_m,
        hamiltonian_rabi: omega_m / 2.0,
        decoherence_figure,
        decoherence_warning: decoherence_figure <= DECOHERENCE_WARNING_THRESHOLD,
        molecular_dominant: omega_m.abs() > omega_a.abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonances {
    /// rad/s
    pub molecular: f64,
    /// rad/s
    pub atomic: f64,
}

impl Resonances {
    pub fn ratio(&self) -> f64 {
        self.molecular / self.atomic
    }

    pub fn in_hz(&self) -> Resonances {
        Resonances { molecular: to_hz(self.molecular), atomic: to_hz(self.atomic) }
    }
}

pub fn to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Single-photon recoil frequency ħk²/2M in rad/s.
pub fn recoil_frequency(k: f64, mass: f64) -> f64 {
    HBAR * k * k / (2.0 * mass)
}

/// Two-photon Bragg resonances for momentum transfer ħK.
///
/// Counterpropagating beams give K = 2k. An atom of mass M absorbs ħK; a
/// bound pair of mass 2M absorbs the same ħK. Copropagating beams transfer no
/// momentum and fall back to [`raman_resonances`].
pub fn bragg_resonances(p: &RamanParams, counterpropagating: bool) -> Result<Resonances> {
    p.validate()?;
    if !counterpropagating {
        return raman_resonances(p);
    }
    let kk = 2.0 * p.k;
    let atomic = HBAR * kk * kk / (2.0 * p.mass);
    let molecular = HBAR * kk * kk / (2.0 * (2.0 * p.mass));
    Ok(Resonances { molecular, atomic })
}

/// Copropagating Raman resonances: two atoms each flipped across ω_{g'g}.
pub fn raman_resonances(p: &RamanParams) -> Result<Resonances> {
    p.validate()?;
    Ok(Resonances { molecular: 2.0 * p.omega_gg, atomic: p.omega_gg })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RamanReport {
    pub params: RamanParams,
    pub rabi: EffectiveRabi,
    pub recoil_hz: f64,
    pub bragg_hz: Resonances,
    pub bragg_ratio: f64,
    pub raman_hz: Resonances,
    pub raman_ratio: f64,
    pub warnings: Vec<String>,
}

pub fn report(p: &RamanParams) -> Result<RamanReport> {
    let rabi = effective_rabi(p)?;
    let bragg = bragg_resonances(p, true)?;
    let raman = raman_resonances(p)?;
    let mut warnings = Vec::new();
    if rabi.decoherence_warning {
        warnings.push(format!(
            "detuning to linewidth ratio {:.3} is not large; molecular decay will dominate",
            rabi.decoherence_figure
        ));
    }
    if !rabi.molecular_dominant {
        warnings.push("atomic Raman coupling is not suppressed relative to the molecular one".into());
    }
    Ok(RamanReport {
        params: *p,
        rabi,
        recoil_hz: to_hz(recoil_frequency(p.k, p.mass)),
        bragg_hz: bragg.in_hz(),
        bragg_ratio: bragg.ratio(),
        raman_hz: raman.in_hz(),
        raman_ratio: raman.ratio(),
        warnings,
    })
}
