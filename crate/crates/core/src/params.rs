//! Device constants and modelling conventions.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular frequency (rad/s) of a value quoted as `mhz` MHz over 2π.
pub fn mhz(mhz: f64) -> f64 {
    TAU * mhz * 1e6
}

/// Angular frequency (rad/s) of a value quoted as `ghz` GHz over 2π.
pub fn ghz(ghz: f64) -> f64 {
    TAU * ghz * 1e9
}

/// Inverse of [`mhz`].
pub fn to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e6)
}

/// Prefactor of the transmon self-interaction `b†b†bb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaConvention {
    /// `-η b†b†bb`: level spacing drops by `2η` per level.
    AsPrinted,
    /// `-(η/2) b†b†bb`: the usual transmon form, `ω12 - ω01 = -η`.
    Halved,
}

impl EtaConvention {
    pub fn factor(self) -> f64 {
        match self {
            EtaConvention::AsPrinted => 1.0,
            EtaConvention::Halved => 0.5,
        }
    }
}

/// How the quoted cavity linewidth enters the damping term of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaConvention {
    /// Damping rate is `2π × (quoted value)`.
    Angular,
    /// Damping rate is the quoted value itself, in 1/s.
    Ordinary,
}

/// How dressed states inside an excitation block are matched to bare labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    /// k-th lowest eigenvalue gets the label of the k-th lowest bare energy.
    EnergyRank,
    /// Greedy assignment in descending squared overlap.
    MaxOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Bare cavity frequency, rad/s.
    pub omega_r: f64,
    /// Transmon 0-1 frequency, rad/s.
    pub omega_q: f64,
    /// Anharmonicity, rad/s.
    pub eta: f64,
    /// Transmon-cavity coupling, rad/s.
    pub g: f64,
    /// Cavity linewidth, rad/s (`2π × quoted`).
    pub kappa: f64,
    /// Number of bare transmon levels kept.
    pub transmon_levels: usize,
    /// Largest photon number in the dressed-energy table.
    pub n_max: usize,
    pub eta_convention: EtaConvention,
    pub kappa_convention: KappaConvention,
    pub labeling: Labeling,
}

impl SystemParams {
    pub const DEFAULT_LEVELS: usize = 24;
    pub const DEFAULT_N_MAX: usize = 640;

    /// Device of the reference experiment: ω_r/2π = 5.078 GHz, ω_q/2π = 5.795 GHz,
    /// η/2π = 111 MHz, g/2π = 55 MHz, κ/2π = 1.3 MHz.
    pub fn paper() -> Self {
        SystemParams {
            omega_r: ghz(5.078),
            omega_q: ghz(5.795),
            eta: mhz(111.0),
            g: mhz(55.0),
            kappa: mhz(1.3),
            transmon_levels: Self::DEFAULT_LEVELS,
            n_max: Self::DEFAULT_N_MAX,
            eta_convention: EtaConvention::Halved,
            kappa_convention: KappaConvention::Angular,
            labeling: Labeling::EnergyRank,
        }
    }

    pub fn with_truncation(mut self, transmon_levels: usize, n_max: usize) -> Self {
        self.transmon_levels = transmon_levels;
        self.n_max = n_max;
        self
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_eta_convention(mut self, c: EtaConvention) -> Self {
        self.eta_convention = c;
        self
    }

    pub fn with_labeling(mut self, l: Labeling) -> Self {
        self.labeling = l;
        self
    }

    /// Qubit-cavity detuning `ω_q - ω_r`.
    pub fn detuning(&self) -> f64 {
        self.omega_q - self.omega_r
    }

    /// Damping rate entering the cavity equation of motion.
    pub fn damping(&self) -> f64 {
        match self.kappa_convention {
            KappaConvention::Angular => self.kappa,
            KappaConvention::Ordinary => self.kappa / TAU,
        }
    }

    /// Bare energy of `|i, n>` over ħ.
    pub fn bare_energy(&self, i: usize, n: usize) -> f64 {
        let i_f = i as f64;
        n as f64 * self.omega_r + i_f * self.omega_q
            - self.eta_convention.factor() * self.eta * i_f * (i_f - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("omega_r", self.omega_r, true),
            ("omega_q", self.omega_q, true),
            ("kappa", self.kappa, true),
            ("eta", self.eta, false),
            ("g", self.g, false),
        ];
        for (name, v, strict) in checks {
            if !v.is_finite() || v < 0.0 || (strict && v == 0.0) {
                let bound = if strict { "> 0" } else { ">= 0" };
                return Err(Error::Input(format!("{name} must be finite and {bound}, got {v}")));
            }
        }
        if self.transmon_levels < 2 {
            return Err(Error::Input("transmon_levels must be at least 2".into()));
        }
        if self.n_max < 1 {
            return Err(Error::Input("n_max must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::paper()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_constants() {
        let p = SystemParams::paper();
        assert!((to_mhz(p.g) - 55.0).abs() < 1e-9);
        assert!((to_mhz(p.detuning()) - 717.0).abs() < 1e-6);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = SystemParams::paper();
        p.kappa = 0.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::paper();
        p.g = -1.0;
        assert!(p.validate().is_err());
        let p = SystemParams::paper().with_truncation(1, 10);
        assert!(p.validate().is_err());
    }

    #[test]
    fn damping_conventions() {
        let mut p = SystemParams::paper();
        assert_eq!(p.damping(), p.kappa);
        p.kappa_convention = KappaConvention::Ordinary;
        assert!((p.damping() - 1.3e6).abs() < 1e-6);
    }
}
