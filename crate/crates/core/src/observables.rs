//! Currents, charge and nuclear-spin probabilities, and analytic reference
//! curves.
//!
//! Every observable used by the transport protocols is diagonal in the
//! product basis, so an [`Observable`] is stored as a weighted sum of basis
//! populations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::liouville::DensityState;
use crate::results::Column;
use crate::spin::{Basis, ChargeSector, Direction, ElectronState, SystemConfig};

/// pA carried by a rate of 1 MHz: |e| × 10⁶ s⁻¹ in units of 10⁻¹² A.
pub const PICOAMP_PER_MHZ: f64 = 0.1602176634;

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    /// Σ wᵢ ρᵢᵢ
    Diagonal(Vec<(usize, f64)>),
    Trace,
    Purity,
}

/// A scalar read-out of a density state.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    column: Column,
    kind: Kind,
}

impl Observable {
    /// Weighted sum of basis-state populations.
    pub fn diagonal(
        name: impl Into<String>,
        unit: impl Into<String>,
        weights: Vec<(usize, f64)>,
    ) -> Self {
        Observable {
            column: Column::new(name, unit),
            kind: Kind::Diagonal(weights),
        }
    }

    pub fn trace() -> Self {
        Observable {
            column: Column::new("trace", ""),
            kind: Kind::Trace,
        }
    }

    pub fn purity() -> Self {
        Observable {
            column: Column::new("purity", ""),
            kind: Kind::Purity,
        }
    }

    pub fn column(&self) -> Column {
        self.column.clone()
    }

    pub fn name(&self) -> &str {
        &self.column.name
    }

    pub fn evaluate(&self, state: &DensityState) -> f64 {
        match &self.kind {
            Kind::Diagonal(w) => w.iter().map(|&(i, c)| c * state.population(i)).sum(),
            Kind::Trace => state.trace().re,
            Kind::Purity => state.purity(),
        }
    }

    fn select(
        name: impl Into<String>,
        basis: &Basis,
        weight: f64,
        keep: impl Fn(usize) -> bool,
    ) -> Self {
        let w = (0..basis.dim())
            .filter(|&i| keep(i))
            .map(|i| (i, weight))
            .collect();
        Observable::diagonal(name, "", w)
    }

    /// Population of one electron configuration, summed over nuclei.
    pub fn electron_population(basis: &Basis, e: ElectronState) -> Self {
        Self::select(format!("P_{}", e.label()), basis, 1.0, |i| {
            basis.electron_of(i) == e
        })
    }

    pub fn charge_population(basis: &Basis, sector: ChargeSector) -> Self {
        let (l, r) = sector.occupation();
        Self::select(format!("P_{l}{r}"), basis, 1.0, |i| {
            basis.electron_of(i).charge_sector() == sector
        })
    }

    /// Probability of one nuclear configuration, summed over electrons.
    pub fn nuclear_population(basis: &Basis, nuclear: usize) -> Self {
        let label = basis.nuclear_config(nuclear).to_string();
        Self::select(format!("N_{label}"), basis, 1.0, |i| {
            basis.nuclear_of(i).index() == nuclear
        })
    }

    /// ⟨I_z⟩ of one nucleus.
    pub fn nuclear_spin_z(basis: &Basis, nucleus: usize) -> Self {
        let w = (0..basis.dim())
            .map(|i| (i, basis.nuclear_of(i).spin_z(nucleus)))
            .collect();
        Observable::diagonal(format!("Iz_{nucleus}"), "", w)
    }

    /// Lead current in pA for the configured transport direction.
    pub fn current(config: &SystemConfig, basis: &Basis) -> Self {
        let (sector, rate) = current_channel(config);
        let mut o = Self::select("current", basis, rate * PICOAMP_PER_MHZ, |i| {
            sector(basis.electron_of(i))
        });
        o.column.unit = "pA".into();
        o
    }
}

/// Electron states whose escape through the collecting lead carries the
/// current, and the corresponding rate.
fn current_channel(config: &SystemConfig) -> (fn(ElectronState) -> bool, f64) {
    match config.direction {
        Direction::Forward => (|e| e == ElectronState::S02, config.gamma_r),
        Direction::Reverse => (
            |e| e.charge_sector() == ChargeSector::OneOne,
            config.gamma_l,
        ),
    }
}

/// Current in pA: |e|Γ_R P(S₀₂) forward, |e|Γ_L P(1,1) reverse.
pub fn current(state: &DensityState, config: &SystemConfig) -> Result<f64> {
    let basis = config.basis()?;
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: state.dim(),
        });
    }
    Ok(Observable::current(config, &basis).evaluate(state))
}

/// P(1,1), P(S₀₂), P(0,1).
pub fn charge_populations(state: &DensityState, basis: &Basis) -> [f64; 3] {
    [
        ChargeSector::OneOne,
        ChargeSector::ZeroTwo,
        ChargeSector::ZeroOne,
    ]
    .map(|s| Observable::charge_population(basis, s).evaluate(state))
}

/// Lorentzian current of a two-level double quantum dot, in pA, with t_c, Δ
/// and the rates all read in MHz.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
pub fn iqd_reference(config: &SystemConfig) -> Result<f64> {
    if !(config.gamma_r > 0.0) {
        return Err(Error::invalid(
            "gamma_r",
            "must be > 0 for the reference current",
        ));
    }
    let half_tc2 = (config.tc / 2.0).powi(2);
    let denom = (config.gamma_r / 2.0).powi(2)
        + half_tc2 * (2.0 + config.gamma_l / config.gamma_r)
        + config.delta * config.delta;
    Ok(PICOAMP_PER_MHZ * config.gamma_l * half_tc2 / denom)
}

/// Exchange splitting J = Δ/2 + √((t_c/2)² + (Δ/2)²), MHz.
pub fn exchange_j(tc: f64, delta: f64) -> f64 {
    delta / 2.0 + ((tc / 2.0).powi(2) + (delta / 2.0).powi(2)).sqrt()
}

/// Detuning at which [`exchange_j`] equals `j`: Δ = J − (t_c/2)²/J.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn detuning_for_exchange(tc: f64, j: f64) -> Result<f64> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::invalid("j", "must be positive and finite"));
    }
    if j < tc / 2.0 {
        return Err(Error::OutOfDomain(format!(
            "J = {j} MHz is below its minimum t_c/2 = {} MHz for Δ ≥ 0",
            tc / 2.0
        )));
    }
    Ok(j - (tc / 2.0).powi(2) / j)
}

/// Marginal probability of every nuclear configuration, keyed by its label
/// ("uu", "ud", ...).
pub fn nuclear_projections(state: &DensityState, basis: &Basis) -> BTreeMap<String, f64> {
    (0..basis.nuclear_count())
        .map(|k| {
            (
                basis.nuclear_config(k).to_string(),
                Observable::nuclear_population(basis, k).evaluate(state),
            )
        })
        .collect()
}

/// Hyperfine Larmor asymmetry A_L⟨I_z,L⟩ − A_R⟨I_z,R⟩, MHz.
pub fn larmor_difference(state: &DensityState, config: &SystemConfig) -> Result<f64> {
    if !config.is_single_donor_pair() {
        return Err(Error::OutOfDomain(
            "Larmor difference is defined for one donor per dot".into(),
        ));
    }
    let basis = config.basis()?;
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: state.dim(),
        });
    }
    let left = Observable::nuclear_spin_z(&basis, 0).evaluate(state);
    let right = Observable::nuclear_spin_z(&basis, 1).evaluate(state);
    Ok(config.a_left[0] * left - config.a_right[0] * right)
}

/// Electron populations, charge sectors, nuclear configurations and the
/// current, in a fixed order.
pub fn standard_observables(config: &SystemConfig, basis: &Basis) -> Vec<Observable> {
    let mut out = vec![Observable::current(config, basis)];
    for s in [
        ChargeSector::OneOne,
        ChargeSector::ZeroTwo,
        ChargeSector::ZeroOne,
    ] {
        out.push(Observable::charge_population(basis, s));
    }
    for e in ElectronState::ALL {
        out.push(Observable::electron_population(basis, e));
    }
    for k in 0..basis.nuclear_count() {
        out.push(Observable::nuclear_population(basis, k));
    }
    out
}
