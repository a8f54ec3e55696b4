use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::basis::{build_basis, Basis};

/// Electron gyromagnetic ratio, MHz/T.
pub const GAMMA_E: f64 = 28024.0;
/// ³¹P nuclear gyromagnetic ratio, MHz/T.
pub const GAMMA_N: f64 = 17.235;
/// Contact hyperfine constant of a bulk phosphorus donor, MHz.
pub const BULK_HYPERFINE: f64 = 117.53;
/// Lead tunnel rate used throughout the reference simulations, MHz.
pub const DEFAULT_TUNNEL_RATE: f64 = 100.0;
/// ESR microwave amplitude B_ac, tesla (effective rotating field is half of it).
pub const DEFAULT_ESR_AMPLITUDE: f64 = 1.0e-3;

/// Transport direction through the double donor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Source to drain: (0,1) → (1,1) → (0,2) → (0,1). Pauli blockade regime.
    Forward,
    /// Drain to source: (0,1) → (0,2) → (1,1) → (0,1). Spin-funnel regime.
    Reverse,
}

/// Physical parameters of a donor transport system.
///
/// Fields are tesla for magnetic fields and linear-frequency MHz for every
/// energy and rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub b0: f64,
    pub b_ac_esr: f64,
    pub omega_drive: f64,
    pub tc: f64,
    pub delta: f64,
    pub a_left: Vec<f64>,
    pub a_right: Vec<f64>,
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub gamma_e: f64,
    pub gamma_n: f64,
    pub direction: Direction,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            b0: 1.0,
            b_ac_esr: DEFAULT_ESR_AMPLITUDE,
            omega_drive: 0.0,
            tc: BULK_HYPERFINE,
            delta: 0.0,
            a_left: vec![BULK_HYPERFINE],
            a_right: vec![BULK_HYPERFINE],
            gamma_l: DEFAULT_TUNNEL_RATE,
            gamma_r: DEFAULT_TUNNEL_RATE,
            gamma_e: GAMMA_E,
            gamma_n: GAMMA_N,
            direction: Direction::Forward,
        }
    }
}

fn check_finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite"))
    }
}

fn check_non_negative(field: &str, v: f64) -> Result<()> {
    check_finite(field, v)?;
    if v < 0.0 {
        Err(Error::invalid(field, format!("must be >= 0, got {v}")))
    } else {
        Ok(())
    }
}

impl SystemConfig {
    /// Every value finite; fields, couplings and rates non-negative;
    /// one or two donors per dot.
    pub fn validate(&self) -> Result<()> {
        check_non_negative("b0", self.b0)?;
        check_non_negative("b_ac_esr", self.b_ac_esr)?;
        check_finite("omega_drive", self.omega_drive)?;
        check_non_negative("tc", self.tc)?;
        check_finite("delta", self.delta)?;
        check_non_negative("gamma_l", self.gamma_l)?;
        check_non_negative("gamma_r", self.gamma_r)?;
        check_finite("gamma_e", self.gamma_e)?;
        check_finite("gamma_n", self.gamma_n)?;
        for (name, list) in [("a_left", &self.a_left), ("a_right", &self.a_right)] {
            if list.is_empty() || list.len() > 2 {
                return Err(Error::invalid(
                    name,
                    format!("expected 1 or 2 hyperfine constants, got {}", list.len()),
                ));
            }
            for &a in list.iter() {
                check_non_negative(name, a)?;
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<Basis> {
        self.validate()?;
        build_basis(self.a_left.len(), self.a_right.len())
    }

    pub fn is_single_donor_pair(&self) -> bool {
        self.a_left.len() == 1 && self.a_right.len() == 1
    }

    pub(crate) fn check_basis(&self, basis: &Basis) -> Result<()> {
        self.validate()?;
        if basis.n_left() != self.a_left.len() || basis.n_right() != self.a_right.len() {
            return Err(Error::DimensionMismatch {
                expected: 7 << (self.a_left.len() + self.a_right.len()),
                found: basis.dim(),
            });
        }
        Ok(())
    }

    /// Electron Zeeman splitting γ_e·B₀ in MHz.
    pub fn electron_zeeman(&self) -> f64 {
        self.gamma_e * self.b0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_negative_tunnel_coupling() {
        let cfg = SystemConfig {
            tc: -1.0,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("tc"), "{err}");
    }

    #[test]
    fn rejects_oversized_cluster() {
        let cfg = SystemConfig {
            a_right: vec![1.0, 2.0, 3.0],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SystemConfig {
            a_left: vec![],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_rates_are_allowed() {
        let cfg = SystemConfig {
            gamma_l: 0.0,
            gamma_r: 0.0,
            ..Default::default()
        };
        cfg.validate().unwrap();
    }
}
