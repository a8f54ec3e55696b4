//! Hamiltonian of two tunnel-coupled donors in the singlet-triplet basis,
//! with the donor nuclei treated quantum mechanically, plus the ESR drive
//! and its rotating-frame form.

use ndarray::{array, s, Array2};

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, real, CMatrix, C64, ONE, ZERO};
use crate::spin::basis::{Basis, ElectronState};
use crate::spin::config::SystemConfig;
use crate::spin::operator::Operator;

const E: usize = ElectronState::COUNT;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Axis {
    X,
    Y,
    Z,
}

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

/// Spin-1/2 operator (eigenvalues ±1/2).
pub(crate) fn spin_half(axis: Axis) -> CMatrix {
    let h = 0.5;
    match axis {
        Axis::X => array![[ZERO, real(h)], [real(h), ZERO]],
        Axis::Y => array![[ZERO, C64::new(0.0, -h)], [C64::new(0.0, h), ZERO]],
        Axis::Z => array![[real(h), ZERO], [ZERO, real(-h)]],
    }
}

/// Columns are T⁺, T⁰, S₁₁, T⁻ expressed in the product basis ↑↑, ↑↓, ↓↑, ↓↓
/// (left electron first).
fn product_to_singlet_triplet() -> CMatrix {
    let r = real(std::f64::consts::FRAC_1_SQRT_2);
    array![
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, r, r, ZERO],
        [ZERO, r, -r, ZERO],
        [ZERO, ZERO, ZERO, ONE],
    ]
}

/// Left (`left = true`) or right electron spin component on the (1,1) block
/// of the 7-state electron space.
pub(crate) fn dot_spin(left: bool, axis: Axis) -> CMatrix {
    let s = spin_half(axis);
    let i2 = identity(2);
    let product = if left {
        kron(&s.view(), &i2.view())
    } else {
        kron(&i2.view(), &s.view())
    };
    let u = product_to_singlet_triplet();
    let st = u.t().mapv(|z| z.conj()).dot(&product).dot(&u);
    let mut out = Array2::zeros((E, E));
    out.slice_mut(s![0..4, 0..4]).assign(&st);
    out
}

/// Spin of the single (0,1) electron, embedded in the 7-state space.
pub(crate) fn single_spin(axis: Axis) -> CMatrix {
    let mut out = Array2::zeros((E, E));
    out.slice_mut(s![5..7, 5..7]).assign(&spin_half(axis));
    out
}

pub(crate) fn electron_projector(e: ElectronState) -> CMatrix {
    let mut out = Array2::zeros((E, E));
    out[[e.index(), e.index()]] = ONE;
    out
}

/// Spin operator of one nucleus acting on the nuclear product space.
pub(crate) fn nuclear_spin(basis: &Basis, nucleus: usize, axis: Axis) -> CMatrix {
    let mut out = identity(1);
    for i in 0..basis.nuclear_spins() {
        let factor = if i == nucleus {
            spin_half(axis)
        } else {
            identity(2)
        };
        out = kron(&out.view(), &factor.view());
    }
    out
}

fn electron_only(basis: &Basis, op: &CMatrix) -> CMatrix {
    kron(&op.view(), &identity(basis.nuclear_count()).view())
}

fn nuclear_only(op: &CMatrix) -> CMatrix {
    kron(&identity(E).view(), &op.view())
}

/// The five terms of the system Hamiltonian, kept separately for inspection.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    pub zeeman_electron: Operator,
    pub zeeman_nuclear: Operator,
    pub tunnel: Operator,
    pub detuning: Operator,
    pub hyperfine: Operator,
}

impl HamiltonianTerms {
    pub fn total(&self) -> Operator {
        let m = self.zeeman_electron.matrix()
            + self.zeeman_nuclear.matrix()
            + self.tunnel.matrix()
            + self.detuning.matrix()
            + self.hyperfine.matrix();
        Operator::from_matrix(m)
    }
}

pub fn hamiltonian_terms(config: &SystemConfig, basis: &Basis) -> Result<HamiltonianTerms> {
    config.check_basis(basis)?;
    use ElectronState::*;
    let ez = config.gamma_e * config.b0;

    let mut ze = Array2::<C64>::zeros((E, E));
    ze[[TPlus.index(), TPlus.index()]] = real(ez);
    ze[[TMinus.index(), TMinus.index()]] = real(-ez);
    ze[[Up01.index(), Up01.index()]] = real(0.5 * ez);
    ze[[Down01.index(), Down01.index()]] = real(-0.5 * ez);
    let zeeman_electron = Operator::from_matrix(electron_only(basis, &ze));

    // -γ_n B₀ ΣI_z: ⇑⇑ sits at -γ_n B₀, ⇓⇓ at +γ_n B₀, anti-aligned pairs at 0.
    let mut iz_total = Array2::<C64>::zeros((basis.nuclear_count(), basis.nuclear_count()));
    for n in 0..basis.nuclear_spins() {
        iz_total = iz_total + nuclear_spin(basis, n, Axis::Z);
    }
    let zeeman_nuclear = Operator::from_matrix(nuclear_only(
        &(iz_total * real(-config.gamma_n * config.b0)),
    ));

    let mut tc = Array2::<C64>::zeros((E, E));
    tc[[S11.index(), S02.index()]] = real(0.5 * config.tc);
    tc[[S02.index(), S11.index()]] = real(0.5 * config.tc);
    let tunnel = Operator::from_matrix(electron_only(basis, &tc));

    let detuning = Operator::from_matrix(electron_only(
        basis,
        &(electron_projector(S02) * real(-config.delta)),
    ));

    let dim = basis.dim();
    let mut hf = Array2::<C64>::zeros((dim, dim));
    for axis in AXES {
        let sl = dot_spin(true, axis);
        let sr = dot_spin(false, axis);
        let s1 = single_spin(axis);
        for (k, n) in basis.left_nuclei().enumerate() {
            let i = nuclear_spin(basis, n, axis);
            hf = hf + kron(&sl.view(), &i.view()) * real(config.a_left[k]);
        }
        for (k, n) in basis.right_nuclei().enumerate() {
            let i = nuclear_spin(basis, n, axis);
            let a = real(config.a_right[k]);
            hf = hf + kron(&sr.view(), &i.view()) * a;
            hf = hf + kron(&s1.view(), &i.view()) * a;
        }
    }
    // the singlet-triplet rotation leaves ~1e-17 residue on structurally zero entries
    let hyperfine = Operator::from_matrix(hf).chop(1e-14);

    Ok(HamiltonianTerms {
        zeeman_electron,
        zeeman_nuclear,
        tunnel,
        detuning,
        hyperfine,
    })
}

/// H = H_ze + H_zn + H_tc + H_Δ + H_hf, in MHz.
pub fn build_hamiltonian(config: &SystemConfig, basis: &Basis) -> Result<Operator> {
    Ok(hamiltonian_terms(config, basis)?.total())
}

/// Sum of electron x-spin operators over the (1,1) and (0,1) blocks.
pub fn electron_spin_x(basis: &Basis) -> Operator {
    let sx = dot_spin(true, Axis::X) + dot_spin(false, Axis::X) + single_spin(Axis::X);
    Operator::from_matrix(electron_only(basis, &sx)).chop(1e-15)
}

/// Total electron S_z: +1 on T⁺, -1 on T⁻, ±1/2 on the (0,1) states.
pub fn electron_spin_z(basis: &Basis) -> Operator {
    let mut sz = Array2::<C64>::zeros((E, E));
    for e in ElectronState::ALL {
        sz[[e.index(), e.index()]] = real(e.spin_z());
    }
    Operator::from_matrix(electron_only(basis, &sz))
}

/// Total angular momentum projection F_z = S_z + ΣI_z (diagonal in the basis).
pub fn total_spin_z(basis: &Basis) -> Operator {
    let mut m = Array2::<C64>::zeros((basis.dim(), basis.dim()));
    for i in 0..basis.dim() {
        m[[i, i]] = real(basis.total_spin_z(i));
    }
    Operator::from_matrix(m)
}

/// Rotating-wave drive H₁ = γ_e B₁ (S_Lx + S_Rx + S_1x) with B₁ = B_ac/2.
pub fn build_esr_drive(config: &SystemConfig, basis: &Basis) -> Result<Operator> {
    config.check_basis(basis)?;
    let b1 = 0.5 * config.b_ac_esr;
    Ok(electron_spin_x(basis).scaled(config.gamma_e * b1))
}

/// Rotating-frame Hamiltonian H + H₁ − Ω F_z.
///
/// The frame rotates about the total angular momentum F_z. H conserves F_z
/// (Zeeman terms are diagonal, hyperfine flip-flops exchange one electron
/// and one nuclear quantum, tunneling links two S_z = 0 states), so the
/// transformation is exact and only the drive is approximated.
pub fn apply_rwa(h: &Operator, h1: &Operator, omega: f64, basis: &Basis) -> Result<Operator> {
    if h.dim() != basis.dim() || h1.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: if h.dim() != basis.dim() {
                h.dim()
            } else {
                h1.dim()
            },
        });
    }
    h.ensure_hermitian()?;
    h1.ensure_hermitian()?;
    let f = total_spin_z(basis).scaled(omega);
    Ok(&(h + h1) - &f)
}

/// `apply_rwa` with the drive amplitude and frequency taken from `config`.
pub fn rotating_frame_hamiltonian(config: &SystemConfig, basis: &Basis) -> Result<Operator> {
    let h = build_hamiltonian(config, basis)?;
    let h1 = build_esr_drive(config, basis)?;
    apply_rwa(&h, &h1, config.omega_drive, basis)
}

/// ESR resonance frequency for a single donor on each side:
/// Ω = (γ_e − γ_n)B₀ + t_c/4 + (A_L − A_R)/2 + ½√((A_L + A_R)²/4 + t_c²/4).
pub fn resonance_frequency(config: &SystemConfig) -> Result<f64> {
    config.validate()?;
    if !config.is_single_donor_pair() {
        return Err(Error::OutOfDomain(
            "resonance formula holds for one donor per dot; use the spectral search for clusters"
                .into(),
        ));
    }
    let (al, ar, tc) = (config.a_left[0], config.a_right[0], config.tc);
    Ok((config.gamma_e - config.gamma_n) * config.b0
        + tc / 4.0
        + (al - ar) / 2.0
        + 0.5 * ((al + ar).powi(2) / 4.0 + tc * tc / 4.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::basis::build_basis;
    use crate::spin::config::GAMMA_E;
    use approx::assert_abs_diff_eq;

    fn zero_config() -> SystemConfig {
        SystemConfig {
            b0: 0.0,
            b_ac_esr: 0.0,
            tc: 0.0,
            a_left: vec![0.0],
            a_right: vec![0.0],
            ..Default::default()
        }
    }

    #[test]
    fn zeeman_splitting_of_outer_triplets() {
        let cfg = SystemConfig {
            b0: 1.0,
            ..zero_config()
        };
        let b = build_basis(1, 1).unwrap();
        let h = build_hamiltonian(&cfg, &b).unwrap();
        let off_diag: f64 = (0..28)
            .flat_map(|i| (0..28).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| h.get(i, j).norm())
            .fold(0.0, f64::max);
        assert_eq!(off_diag, 0.0);
        for k in 0..4 {
            let tp = h.get(
                b.index(ElectronState::TPlus, k),
                b.index(ElectronState::TPlus, k),
            );
            let tm = h.get(
                b.index(ElectronState::TMinus, k),
                b.index(ElectronState::TMinus, k),
            );
            assert_abs_diff_eq!((tp - tm).re, 2.0 * GAMMA_E, epsilon = 1e-9);
        }
    }

    #[test]
    fn tunnel_coupling_is_the_only_off_diagonal() {
        let cfg = SystemConfig {
            tc: 117.53,
            ..zero_config()
        };
        let b = build_basis(1, 1).unwrap();
        let h = build_hamiltonian(&cfg, &b).unwrap();
        for i in 0..28 {
            for j in 0..28 {
                let (ei, ej) = (b.electron_of(i), b.electron_of(j));
                let same_nuc = b.nuclear_of(i) == b.nuclear_of(j);
                let expected = if same_nuc
                    && matches!(
                        (ei, ej),
                        (ElectronState::S11, ElectronState::S02)
                            | (ElectronState::S02, ElectronState::S11)
                    ) {
                    58.765
                } else {
                    0.0
                };
                assert_abs_diff_eq!(h.get(i, j).re, expected, epsilon = 1e-12);
                assert_eq!(h.get(i, j).im, 0.0);
            }
        }
    }

    #[test]
    fn all_zero_parameters_give_zero() {
        let b = build_basis(1, 2).unwrap();
        let h = build_hamiltonian(&zero_config_cluster(), &b).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    fn zero_config_cluster() -> SystemConfig {
        SystemConfig {
            a_right: vec![0.0, 0.0],
            ..zero_config()
        }
    }

    #[test]
    fn nuclear_zeeman_reproduces_projector_form() {
        let cfg = SystemConfig {
            b0: 1.0,
            ..zero_config()
        };
        let b = build_basis(1, 1).unwrap();
        let t = hamiltonian_terms(&cfg, &b).unwrap();
        let gn = cfg.gamma_n;
        let expected = [-gn, 0.0, 0.0, gn];
        for e in ElectronState::ALL {
            for (k, &v) in expected.iter().enumerate() {
                let i = b.index(e, k);
                assert_abs_diff_eq!(t.zeeman_nuclear.get(i, i).re, v, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hyperfine_flip_flop_matrix_elements() {
        // |T+, ⇓⇑⟩ couples to the (1,1) Sz = 0 states with the left nucleus
        // flipped up; amplitude A/2 on |↓↑⟩ components rotated into the ST basis.
        let a = 100.0;
        let cfg = SystemConfig {
            a_left: vec![a],
            a_right: vec![0.0],
            ..zero_config()
        };
        let b = build_basis(1, 1).unwrap();
        let h = build_hamiltonian(&cfg, &b).unwrap();
        // T+ ⊗ ⇓⇑ (k = 2) → S_L^- I_L^+ → |↓↑⟩ ⊗ ⇑⇑ (k = 0)
        let tp = b.index(ElectronState::TPlus, 2);
        let t0 = b.index(ElectronState::TZero, 0);
        let s = b.index(ElectronState::S11, 0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(h.get(t0, tp).re, a / 2.0 * r, epsilon = 1e-12);
        assert_abs_diff_eq!(h.get(s, tp).re, -a / 2.0 * r, epsilon = 1e-12);
    }
}
