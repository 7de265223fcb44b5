//! Two-qubit polarization states and their concurrence.
//!
//! Basis order is `|HH>, |HV>, |VH>, |VV>` with the signal photon first and
//! `H -> 0`, `V -> 1` on each qubit.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, hermitian_eig, psd_eig, ComplexMatrix, Spectrum, C64, PSD_CLAMP};
use crate::polarization::{fix_phase, DEGENERATE_P};

pub const HH: usize = 0;
pub const HV: usize = 1;
pub const VH: usize = 2;
pub const VV: usize = 3;

pub const STATE_TOL: f64 = 1e-10;

/// Default tolerance for deciding whether a state lives on a 2x2 block.
pub const TWO_D_TOL: f64 = 1e-10;

/// Eigenvalues of `rho` at or below this magnitude are treated as exact zeros
/// when forming `sqrt(rho)` for the concurrence.
pub const RHO_ZERO: f64 = 1e-14;

/// Clamp window for the spin-flip product's eigenvalues.
pub const SPIN_FLIP_CLAMP: f64 = 1e-12;

/// Diagonal signs of `σ_y ⊗ σ_y`, which is anti-diagonal `(-1, 1, 1, -1)`.
const YY_SIGNS: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct TwoQubitState {
    rho: ComplexMatrix,
}

impl TwoQubitState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::InvalidDensityMatrix(format!(
                "two-qubit state must be 4x4, got {0}x{0}",
                rho.dim()
            )));
        }
        let defect = rho.hermitian_defect();
        if defect > STATE_TOL || defect.is_nan() {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - c64(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let eig = hermitian_eig(&rho, STATE_TOL)?;
        let min = eig.spectrum.values()[3];
        if min < -PSD_CLAMP {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn pure(psi: &[C64; 4]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v)?)
    }

    pub fn basis(index: usize) -> Self {
        let mut d = [0.0; 4];
        d[index] = 1.0;
        Self::new(ComplexMatrix::diag_real(&d).unwrap()).unwrap()
    }

    /// `(|HH> + |VV>)/sqrt(2)`.
    pub fn bell_phi_plus() -> Self {
        let s = c64(FRAC_1_SQRT_2, 0.0);
        let z = c64(0.0, 0.0);
        Self::pure(&[s, z, z, s]).unwrap()
    }

    pub fn maximally_mixed() -> Self {
        Self::new(ComplexMatrix::identity(4).unwrap().scale_real(0.25)).unwrap()
    }

    /// `p |Φ+><Φ+| + (1-p) I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParameter(format!(
                "Werner weight {p} outside [0, 1]"
            )));
        }
        let bell = Self::bell_phi_plus().rho.scale_real(p);
        let mixed = Self::maximally_mixed().rho.scale_real(1.0 - p);
        Self::new(bell + mixed)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Eigenvalues, non-ascending, with rounding-level negatives clamped.
    pub fn spectrum(&self) -> Result<Spectrum> {
        Ok(psd_eig(&self.rho)?.spectrum)
    }

    /// `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
    pub fn spin_flip(&self) -> ComplexMatrix {
        let r = &self.rho;
        ComplexMatrix::from_fn(4, |i, j| {
            r[(3 - i, 3 - j)].conj() * (YY_SIGNS[i] * YY_SIGNS[j])
        })
        .unwrap()
    }

    /// Wootters concurrence `max{0, s1 - s2 - s3 - s4}`.
    ///
    /// The `s_i` are the square roots of the eigenvalues of the Hermitian
    /// product `R = sqrt(ρ) ρ̃ sqrt(ρ)`. With `T = sqrt(ρ) Y sqrt(ρ)*` we have
    /// `R = T T^dagger`, so `s_k = |T^dagger u_k|` for each eigenvector `u_k` of
    /// `R`. Taking the norm instead of `sqrt(eigenvalue)` keeps vanishing
    /// `s_k` at rounding level rather than at its square root.
    pub fn concurrence(&self) -> Result<Concurrence> {
        let eig = hermitian_eig(&self.rho, STATE_TOL)?;
        if let Some(&min) = eig.spectrum.values().last() {
            if min < -PSD_CLAMP {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        let sqrt_rho = eig.reconstruct_with(|l| if l <= RHO_ZERO { 0.0 } else { l.sqrt() });

        // T = sqrt(ρ) · (σ_y ⊗ σ_y) · conj(sqrt(ρ)); the middle factor is a
        // signed row reversal.
        let flipped = ComplexMatrix::from_fn(4, |i, j| sqrt_rho[(3 - i, j)].conj() * YY_SIGNS[i])?;
        let t = sqrt_rho * flipped;
        let t_adj = t.adjoint();
        let r = t * t_adj;
        let r = (r + r.adjoint()).scale_real(0.5);

        let r_eig = hermitian_eig(&r, STATE_TOL)?;
        if let Some(&min) = r_eig.spectrum.values().last() {
            if min < -SPIN_FLIP_CLAMP {
                return Err(Error::InvalidDensityMatrix(format!(
                    "spin-flip product has eigenvalue {min:e}"
                )));
            }
        }
        let mut s = [0.0; 4];
        for (k, sk) in s.iter_mut().enumerate() {
            let u = r_eig.vectors.column(k);
            *sk = t_adj
                .apply(&u)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
        }
        s.sort_by(|a, b| b.total_cmp(a));
        let value = (s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0);
        Ok(Concurrence {
            value,
            singular_values: s,
        })
    }

    /// Decomposition of a state supported on a 2x2 computational block.
    pub fn two_d_decompose(&self, tol: f64) -> Result<TwoDDecomposition> {
        let (a, b) = two_d_support(self, tol)?;
        let r = &self.rho;
        let block = ComplexMatrix::from_rows(&[[r[(a, a)], r[(a, b)]], [r[(b, a)], r[(b, b)]]])?;
        let eig = hermitian_eig(&block, STATE_TOL)?;
        let [l1, l2] = [eig.spectrum.values()[0], eig.spectrum.values()[1]];
        let p_tilde = (l1 - l2).clamp(0.0, 1.0);
        let pure_state = if p_tilde <= DEGENERATE_P {
            [c64(1.0, 0.0), c64(0.0, 0.0)]
        } else {
            let v = eig.vectors.column(0);
            fix_phase([v[0], v[1]])
        };
        Ok(TwoDDecomposition {
            support_indices: (a, b),
            p_tilde,
            pure_state,
        })
    }
}

impl TryFrom<ComplexMatrix> for TwoQubitState {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<TwoQubitState> for ComplexMatrix {
    fn from(s: TwoQubitState) -> Self {
        s.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Concurrence {
    pub value: f64,
    /// `s_1 >= s_2 >= s_3 >= s_4`.
    pub singular_values: [f64; 4],
}

/// `ρ` restricted to `support_indices` equals
/// `p̃ |ψ><ψ| + (1 - p̃) I/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoDDecomposition {
    pub support_indices: (usize, usize),
    pub p_tilde: f64,
    pub pure_state: [C64; 2],
}

impl TwoDDecomposition {
    pub fn reconstruct_block(&self) -> ComplexMatrix {
        let pol = ComplexMatrix::outer(&self.pure_state).expect("dim 2");
        let unpol = ComplexMatrix::identity(2).expect("dim 2").scale_real(0.5);
        pol.scale_real(self.p_tilde) + unpol.scale_real(1.0 - self.p_tilde)
    }
}

/// Support block of a 2D state: at most two diagonal entries above `tol` and
/// nothing outside the induced 2x2 block above `tol`. With a single occupied
/// diagonal entry the block is padded with the lowest other index.
pub fn two_d_support(s: &TwoQubitState, tol: f64) -> Result<(usize, usize)> {
    let r = &s.rho;
    let occupied: Vec<usize> = (0..4).filter(|&i| r[(i, i)].re > tol).collect();
    let (a, b) = match occupied.as_slice() {
        [a, b] => (*a, *b),
        [a] => {
            let other = (0..4).find(|i| i != a).expect("four indices");
            (other.min(*a), other.max(*a))
        }
        [] => return Err(Error::NotTwoD("no diagonal entry above tolerance".into())),
        more => {
            return Err(Error::NotTwoD(format!(
                "{} diagonal entries above {tol:e}",
                more.len()
            )))
        }
    };
    for i in 0..4 {
        for j in 0..4 {
            let inside = (i == a || i == b) && (j == a || j == b);
            if !inside && r[(i, j)].norm() > tol {
                return Err(Error::NotTwoD(format!(
                    "entry ({i}, {j}) = {} outside the ({a}, {b}) block",
                    r[(i, j)]
                )));
            }
        }
    }
    Ok((a, b))
}

fn check_four_level(spec: &Spectrum) -> Result<[f64; 4]> {
    if spec.dim() != 4 {
        return Err(Error::InvalidSpectrum(format!(
            "expected 4 values, got {}",
            spec.dim()
        )));
    }
    spec.check_density(STATE_TOL)?;
    let v = spec.values();
    Ok([v[0], v[1], v[2], v[3]].map(|x| x.max(0.0)))
}

/// Largest concurrence reachable by unitarily rotating a state with spectrum
/// `spec`: `max{0, λ1 - λ3 - 2 sqrt(λ2 λ4)}`.
pub fn unitary_max_concurrence(spec: &Spectrum) -> Result<f64> {
    let [l1, l2, l3, l4] = check_four_level(spec)?;
    Ok((l1 - l3 - 2.0 * (l2 * l4).sqrt()).max(0.0))
}

/// A state with spectrum `spec` that attains [`unitary_max_concurrence`]:
/// `λ1 |Φ+><Φ+| + λ2 |HV><HV| + λ3 |Φ-><Φ-| + λ4 |VH><VH|`.
pub fn construct_max_entangled_state(spec: &Spectrum) -> Result<TwoQubitState> {
    let [l1, l2, l3, l4] = check_four_level(spec)?;
    let mut rho = ComplexMatrix::zeros(4)?;
    let diag = 0.5 * (l1 + l3);
    let coh = 0.5 * (l1 - l3);
    rho[(HH, HH)] = c64(diag, 0.0);
    rho[(VV, VV)] = c64(diag, 0.0);
    rho[(HH, VV)] = c64(coh, 0.0);
    rho[(VV, HH)] = c64(coh, 0.0);
    rho[(HV, HV)] = c64(l2, 0.0);
    rho[(VH, VH)] = c64(l4, 0.0);
    TwoQubitState::new(rho)
}

pub fn concurrence(s: &TwoQubitState) -> Result<f64> {
    Ok(s.concurrence()?.value)
}

pub fn spin_flip(s: &TwoQubitState) -> ComplexMatrix {
    s.spin_flip()
}

pub fn two_d_decompose(s: &TwoQubitState, tol: f64) -> Result<TwoDDecomposition> {
    s.two_d_decompose(tol)
}
