//! Pump polarization state.
//!
//! The pump is described by its 2x2 polarization matrix `J_ab = <E_a E_b*>`
//! in the `{H, V}` basis. Any such matrix splits uniquely into a fully
//! polarized part of weight `P` and an unpolarized remainder `(1-P) I/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, hermitian_eig, tensor, ComplexMatrix, Spectrum, C64, PSD_CLAMP};

pub const POLARIZATION_TOL: f64 = 1e-12;

/// Below this value of `P` the polarized component is treated as absent and
/// the decomposition returns the basis vector `|H>`.
pub const DEGENERATE_P: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct PolarizationMatrix {
    j: ComplexMatrix,
}

impl PolarizationMatrix {
    pub fn new(j: ComplexMatrix) -> Result<Self> {
        if j.dim() != 2 {
            return Err(Error::InvalidDensityMatrix(format!(
                "polarization matrix must be 2x2, got {0}x{0}",
                j.dim()
            )));
        }
        let defect = j.hermitian_defect();
        if defect > POLARIZATION_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = j.trace();
        if (tr - c64(1.0, 0.0)).norm() > POLARIZATION_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let eig = hermitian_eig(&j, POLARIZATION_TOL)?;
        let min = eig.spectrum.values()[1];
        if min < -PSD_CLAMP {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { j })
    }

    /// The pump used by the two-arm source: `<|E_H|^2> = <|E_V|^2> = 1/2` and a
    /// real, nonnegative cross moment `P/2`.
    pub fn canonical(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParameter(format!(
                "degree of polarization {p} outside [0, 1]"
            )));
        }
        Self::new(ComplexMatrix::from_real_rows(&[
            [0.5, 0.5 * p],
            [0.5 * p, 0.5],
        ])?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.j
    }

    /// `P = |ε1 - ε2| = sqrt((J_HH - J_VV)^2 + 4 |J_HV|^2)`.
    pub fn degree_of_polarization(&self) -> f64 {
        let (a, d, b) = (self.j[(0, 0)].re, self.j[(1, 1)].re, self.j[(0, 1)]);
        let diff = a - d;
        (diff * diff + 4.0 * b.norm_sqr()).sqrt().min(1.0)
    }

    pub fn polar_decompose(&self) -> Result<PolarizationDecomposition> {
        let eig = hermitian_eig(&self.j, POLARIZATION_TOL)?;
        let [e1, e2] = [eig.spectrum.values()[0], eig.spectrum.values()[1]];
        let p = (e1 - e2).clamp(0.0, 1.0);
        let pure_state = if p <= DEGENERATE_P {
            [c64(1.0, 0.0), c64(0.0, 0.0)]
        } else {
            let v = eig.vectors.column(0);
            fix_phase([v[0], v[1]])
        };
        Ok(PolarizationDecomposition {
            p,
            pure_state,
            unpolarized_weight: 1.0 - p,
        })
    }

    /// Embeds the pump as `diag(1, 0) ⊗ J` so it can be compared with
    /// two-qubit states.
    pub fn embed(&self) -> Result<EmbeddedPumpState> {
        let top = ComplexMatrix::diag_real(&[1.0, 0.0])?;
        let sigma = tensor(&top, &self.j)?;
        let spectrum = hermitian_eig(&sigma, POLARIZATION_TOL)?.spectrum;
        Ok(EmbeddedPumpState { sigma, spectrum })
    }
}

impl TryFrom<ComplexMatrix> for PolarizationMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<PolarizationMatrix> for ComplexMatrix {
    fn from(p: PolarizationMatrix) -> Self {
        p.j
    }
}

/// Rotates a vector's global phase so its first non-negligible component is
/// real and positive.
pub(crate) fn fix_phase(v: [C64; 2]) -> [C64; 2] {
    let lead = v
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-12)
        .unwrap_or(c64(1.0, 0.0));
    let ph = lead.conj() / lead.norm();
    [v[0] * ph, v[1] * ph]
}

/// `J = p |ψ><ψ| + (1 - p) I/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationDecomposition {
    pub p: f64,
    pub pure_state: [C64; 2],
    pub unpolarized_weight: f64,
}

impl PolarizationDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let pol = ComplexMatrix::outer(&self.pure_state).expect("dim 2");
        let unpol = ComplexMatrix::identity(2).expect("dim 2").scale_real(0.5);
        pol.scale_real(self.p) + unpol.scale_real(self.unpolarized_weight)
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddedPumpState {
    pub sigma: ComplexMatrix,
    pub spectrum: Spectrum,
}

pub fn canonical_pump(p: f64) -> Result<PolarizationMatrix> {
    PolarizationMatrix::canonical(p)
}

pub fn degree_of_polarization(j: &PolarizationMatrix) -> f64 {
    j.degree_of_polarization()
}

pub fn polar_decompose(j: &PolarizationMatrix) -> Result<PolarizationDecomposition> {
    j.polar_decompose()
}

pub fn embed_pump(j: &PolarizationMatrix) -> Result<EmbeddedPumpState> {
    j.embed()
}
