use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electron configurations of the double donor, in canonical basis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElectronState {
    TPlus,
    TZero,
    S11,
    TMinus,
    S02,
    Up01,
    Down01,
}

impl ElectronState {
    pub const ALL: [ElectronState; 7] = [
        ElectronState::TPlus,
        ElectronState::TZero,
        ElectronState::S11,
        ElectronState::TMinus,
        ElectronState::S02,
        ElectronState::Up01,
        ElectronState::Down01,
    ];
    pub const COUNT: usize = 7;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn charge_sector(self) -> ChargeSector {
        use ElectronState::*;
        match self {
            TPlus | TZero | S11 | TMinus => ChargeSector::OneOne,
            S02 => ChargeSector::ZeroTwo,
            Up01 | Down01 => ChargeSector::ZeroOne,
        }
    }

    /// Total electron spin projection S_z.
    pub fn spin_z(self) -> f64 {
        use ElectronState::*;
        match self {
            TPlus => 1.0,
            TMinus => -1.0,
            TZero | S11 | S02 => 0.0,
            Up01 => 0.5,
            Down01 => -0.5,
        }
    }

    pub fn label(self) -> &'static str {
        use ElectronState::*;
        match self {
            TPlus => "T+",
            TZero => "T0",
            S11 => "S11",
            TMinus => "T-",
            S02 => "S02",
            Up01 => "up01",
            Down01 => "down01",
        }
    }
}

/// Charge configuration (n_L, n_R).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeSector {
    OneOne,
    ZeroTwo,
    ZeroOne,
}

impl ChargeSector {
    pub fn occupation(self) -> (u8, u8) {
        match self {
            ChargeSector::OneOne => (1, 1),
            ChargeSector::ZeroTwo => (0, 2),
            ChargeSector::ZeroOne => (0, 1),
        }
    }
}

/// A product configuration of all donor nuclear spins, left dot first.
///
/// Bit `n - 1 - i` of the index is set when nucleus `i` points down, so index
/// 0 is all-up and the ordering for two nuclei is ⇑⇑, ⇑⇓, ⇓⇑, ⇓⇓.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NuclearConfig {
    index: usize,
    spins: usize,
}

impl NuclearConfig {
    pub fn index(self) -> usize {
        self.index
    }

    pub fn is_down(self, nucleus: usize) -> bool {
        (self.index >> (self.spins - 1 - nucleus)) & 1 == 1
    }

    /// I_z eigenvalue (±1/2) of one nucleus.
    pub fn spin_z(self, nucleus: usize) -> f64 {
        if self.is_down(nucleus) {
            -0.5
        } else {
            0.5
        }
    }

    pub fn total_spin_z(self) -> f64 {
        (0..self.spins).map(|i| self.spin_z(i)).sum()
    }
}

impl fmt::Display for NuclearConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.spins {
            f.write_str(if self.is_down(i) { "d" } else { "u" })?;
        }
        Ok(())
    }
}

/// Electron ⊗ nuclear product basis.
///
/// Global index = electron index × nuclear count + nuclear index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    n_left: usize,
    n_right: usize,
}

pub fn build_basis(n_left: usize, n_right: usize) -> Result<Basis> {
    if !(1..=2).contains(&n_left) || !(1..=2).contains(&n_right) {
        return Err(Error::UnsupportedDonorCount { n_left, n_right });
    }
    Ok(Basis { n_left, n_right })
}

impl Basis {
    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn nuclear_spins(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn nuclear_count(&self) -> usize {
        1 << self.nuclear_spins()
    }

    pub fn dim(&self) -> usize {
        ElectronState::COUNT * self.nuclear_count()
    }

    pub fn electron_states(&self) -> &'static [ElectronState; 7] {
        &ElectronState::ALL
    }

    pub fn nuclear_states(&self) -> Vec<NuclearConfig> {
        (0..self.nuclear_count())
            .map(|index| NuclearConfig {
                index,
                spins: self.nuclear_spins(),
            })
            .collect()
    }

    pub fn nuclear_config(&self, index: usize) -> NuclearConfig {
        assert!(index < self.nuclear_count());
        NuclearConfig {
            index,
            spins: self.nuclear_spins(),
        }
    }

    /// Nuclei coupled to the left electron: `0..n_left`.
    pub fn left_nuclei(&self) -> std::ops::Range<usize> {
        0..self.n_left
    }

    /// Nuclei coupled to the right electron.
    pub fn right_nuclei(&self) -> std::ops::Range<usize> {
        self.n_left..self.nuclear_spins()
    }

    pub fn index(&self, electron: ElectronState, nuclear: usize) -> usize {
        electron.index() * self.nuclear_count() + nuclear
    }

    pub fn electron_of(&self, i: usize) -> ElectronState {
        ElectronState::ALL[i / self.nuclear_count()]
    }

    pub fn nuclear_of(&self, i: usize) -> NuclearConfig {
        self.nuclear_config(i % self.nuclear_count())
    }

    pub fn charge_sector(&self, electron: ElectronState) -> ChargeSector {
        electron.charge_sector()
    }

    /// Total angular momentum projection S_z + ΣI_z of a basis state.
    pub fn total_spin_z(&self, i: usize) -> f64 {
        self.electron_of(i).spin_z() + self.nuclear_of(i).total_spin_z()
    }
}
