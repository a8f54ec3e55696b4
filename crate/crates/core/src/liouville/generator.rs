use std::f64::consts::TAU;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, ZERO};
use crate::liouville::state::{liouville_index, DensityState};
use crate::spin::{Basis, Direction, ElectronState, Operator, SystemConfig};

/// Dense Liouville-space matrix acting on column-stacked density vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    hilbert_dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn zeros(hilbert_dim: usize) -> Self {
        let n2 = hilbert_dim * hilbert_dim;
        Superoperator {
            hilbert_dim,
            matrix: Array2::zeros((n2, n2)),
        }
    }

    /// Wraps an explicit `n² × n²` matrix, e.g. a classical rate model.
    pub fn from_matrix(hilbert_dim: usize, matrix: CMatrix) -> Result<Self> {
        let n2 = hilbert_dim * hilbert_dim;
        if matrix.dim() != (n2, n2) {
            return Err(Error::DimensionMismatch {
                expected: n2,
                found: matrix.nrows(),
            });
        }
        Ok(Superoperator {
            hilbert_dim,
            matrix,
        })
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, state: &DensityState) -> Result<DensityState> {
        if state.dim() != self.hilbert_dim {
            return Err(Error::DimensionMismatch {
                expected: self.hilbert_dim,
                found: state.dim(),
            });
        }
        DensityState::from_vector(self.matrix.dot(state.vector()), self.hilbert_dim)
    }
}

/// Coherent part of the generator, -i·2π(𝟙⊗H − Hᵀ⊗𝟙), with H in MHz so that
/// time is in μs.
pub fn liouvillian(h: &Operator) -> Result<Superoperator> {
    h.ensure_hermitian()?;
    if !h
        .matrix()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        return Err(Error::NonFinite);
    }
    let n = h.dim();
    let mut out = Superoperator::zeros(n);
    let m = &mut out.matrix;
    let f = C64::new(0.0, -TAU);
    // (𝟙⊗H) vec(ρ) = vec(Hρ): element (j,k) couples to (l,k) with H[j,l]
    // (Hᵀ⊗𝟙) vec(ρ) = vec(ρH): element (j,k) couples to (j,l) with H[l,k]
    for k in 0..n {
        for j in 0..n {
            let row = liouville_index(j, k, n);
            for l in 0..n {
                let hjl = h.get(j, l);
                if hjl != ZERO {
                    m[[row, liouville_index(l, k, n)]] += f * hjl;
                }
                let hlk = h.get(l, k);
                if hlk != ZERO {
                    m[[row, liouville_index(j, l, n)]] -= f * hlk;
                }
            }
        }
    }
    Ok(out)
}

/// Incoherent electron transition `from → to` at `rate` (1/μs); the nuclear
/// configuration is carried through unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TunnelJump {
    pub from: ElectronState,
    pub to: ElectronState,
    pub rate: f64,
}

/// Lead tunnelling channels for the configured transport direction.
///
/// Loading the left donor from (0,1) fills one of the (1,1) states compatible
/// with the spin of the electron already sitting on the right donor; the
/// (0,2) singlet unloads to either (0,1) spin state.
pub fn tunnel_jumps(config: &SystemConfig) -> Vec<TunnelJump> {
    use ElectronState::*;
    let gl = config.gamma_l;
    let gr = config.gamma_r;
    let j = |from, to, rate| TunnelJump { from, to, rate };
    let jumps = match config.direction {
        Direction::Forward => vec![
            j(Up01, TPlus, gl / 2.0),
            j(Up01, TZero, gl / 4.0),
            j(Up01, S11, gl / 4.0),
            j(Down01, TZero, gl / 4.0),
            j(Down01, S11, gl / 4.0),
            j(Down01, TMinus, gl / 2.0),
            j(S02, Up01, gr / 2.0),
            j(S02, Down01, gr / 2.0),
        ],
        Direction::Reverse => vec![
            j(TPlus, Up01, gl),
            j(TMinus, Down01, gl),
            j(TZero, Up01, gl / 2.0),
            j(TZero, Down01, gl / 2.0),
            j(S11, Up01, gl / 2.0),
            j(S11, Down01, gl / 2.0),
            j(Up01, S02, gr),
            j(Down01, S02, gr),
        ],
    };
    jumps.into_iter().filter(|t| t.rate > 0.0).collect()
}

/// Lindblad dissipator of the tunnel channels with jump operators
/// √r |to⟩⟨from| ⊗ 𝟙_nuclear.
///
/// Populations and nuclear coherences of the source state are transferred to
/// the target electron state; every element ρ_ab decays at (γ_a + γ_b)/2 where
/// γ is the total escape rate of the electron state.
pub fn dissipator(config: &SystemConfig, basis: &Basis) -> Result<Superoperator> {
    config.validate()?;
    config.check_basis(basis)?;
    let n = basis.dim();
    let nn = basis.nuclear_count();
    let mut out = Superoperator::zeros(n);
    let m = &mut out.matrix;
    let mut escape = [0.0_f64; ElectronState::COUNT];
    for jump in tunnel_jumps(config) {
        escape[jump.from.index()] += jump.rate;
        let r = C64::new(jump.rate, 0.0);
        for a in 0..nn {
            for b in 0..nn {
                let src = liouville_index(basis.index(jump.from, a), basis.index(jump.from, b), n);
                let dst = liouville_index(basis.index(jump.to, a), basis.index(jump.to, b), n);
                m[[dst, src]] += r;
            }
        }
    }
    for col in 0..n {
        let gc = escape[basis.electron_of(col).index()];
        for row in 0..n {
            let g = 0.5 * (escape[basis.electron_of(row).index()] + gc);
            if g != 0.0 {
                let i = liouville_index(row, col, n);
                m[[i, i]] -= C64::new(g, 0.0);
            }
        }
    }
    Ok(out)
}

/// Full master-equation generator dρ/dt = G ρ, kept as its coherent and
/// dissipative parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    coherent: Superoperator,
    dissipative: Superoperator,
    total: CMatrix,
}

pub fn generator(h: &Operator, dissipative: &Superoperator) -> Result<Generator> {
    if h.dim() != dissipative.hilbert_dim() {
        return Err(Error::DimensionMismatch {
            expected: dissipative.hilbert_dim(),
            found: h.dim(),
        });
    }
    let coherent = liouvillian(h)?;
    let total = coherent.matrix() + dissipative.matrix();
    Ok(Generator {
        coherent,
        dissipative: dissipative.clone(),
        total,
    })
}

impl Generator {
    pub fn hilbert_dim(&self) -> usize {
        self.coherent.hilbert_dim()
    }

    pub fn liouville_dim(&self) -> usize {
        self.total.nrows()
    }

    pub fn coherent(&self) -> &Superoperator {
        &self.coherent
    }

    pub fn dissipative(&self) -> &Superoperator {
        &self.dissipative
    }

    /// Dense matrix of the full generator.
    pub fn matrix(&self) -> &CMatrix {
        &self.total
    }

    /// G ρ.
    pub fn apply(&self, state: &DensityState) -> Result<DensityState> {
        if state.dim() != self.hilbert_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.hilbert_dim(),
                found: state.dim(),
            });
        }
        DensityState::from_vector(self.total.dot(state.vector()), self.hilbert_dim())
    }

    /// Submatrix on a set of Liouville indices.
    pub(crate) fn restricted(&self, indices: &[usize]) -> CMatrix {
        Array2::from_shape_fn((indices.len(), indices.len()), |(r, c)| {
            self.total[[indices[r], indices[c]]]
        })
    }

    pub(crate) fn gather(indices: &[usize], v: &CVector) -> CVector {
        indices.iter().map(|&i| v[i]).collect()
    }
}
