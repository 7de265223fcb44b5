//! Two-arm down-conversion source.
//!
//! The pump is split by a beam splitter with intensity ratio `t : 1-t`. In
//! each arm a phase retarder adds `α_i` to the V component and a rotation
//! plate turns the polarization by `θ_i`; a type-I two-crystal source then
//! emits `|HH>`/`|VV>` pairs with amplitudes `E_V`/`E_H`. A half-wave plate on
//! arm 2 relabels its pairs to `|VH>`/`|HV>`, and a random phase `γ` with
//! `<e^{iγ}> = μ e^{iγ0}` sits between the arms. A single realization is
//!
//! ```text
//! |ψ_γ> = E_V1 |HH> + E_H1 |VV> + e^{iγ} (E_V2 |HV> + E_H2 |VH>)
//! ```
//!
//! and the detected state is its ensemble average. [`build_density_matrix`]
//! evaluates the closed-form moments for the canonical pump;
//! [`build_density_matrix_oracle`] assembles the same matrix from the arm
//! transfer matrices and the pump polarization matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, C64};
use crate::polarization::{canonical_pump, PolarizationMatrix};
use crate::twoqubit::{two_d_support, TwoQubitState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeParams {
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mu: f64,
    pub gamma0: f64,
    pub pump_p: f64,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.t,
            self.theta1,
            self.theta2,
            self.alpha1,
            self.alpha2,
            self.mu,
            self.gamma0,
            self.pump_p,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadParameter(format!(
                "non-finite parameter in {self:?}"
            )));
        }
        for (name, v) in [("t", self.t), ("mu", self.mu), ("pump_p", self.pump_p)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::BadParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `|η_1| = sqrt(t)`, `|η_2| = sqrt(1 - t)`.
    fn eta(&self, arm: u8) -> f64 {
        if arm == 1 {
            self.t.sqrt()
        } else {
            (1.0 - self.t).sqrt()
        }
    }
}

/// Transfer matrix of one arm acting on the pump field `(E_H, E_V)^T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmCoherence {
    pub arm_index: u8,
    pub c: ComplexMatrix,
}

/// `η_i · R(θ_i) · diag(1, e^{iα_i})` with `R(θ) = [[cos θ, sin θ], [-sin θ, cos θ]]`.
/// The inter-arm phase `e^{iγ}` is not included.
pub fn transform_fields(p: &SchemeParams, arm: u8) -> Result<ArmCoherence> {
    p.validate()?;
    let (theta, alpha) = match arm {
        1 => (p.theta1, p.alpha1),
        2 => (p.theta2, p.alpha2),
        other => {
            return Err(Error::BadParameter(format!(
                "arm must be 1 or 2, got {other}"
            )))
        }
    };
    let eta = p.eta(arm);
    let (s, c) = theta.sin_cos();
    let ph = C64::from_polar(1.0, alpha);
    let m = ComplexMatrix::from_rows(&[
        [c64(eta * c, 0.0), ph * (eta * s)],
        [c64(-eta * s, 0.0), ph * (eta * c)],
    ])?;
    Ok(ArmCoherence {
        arm_index: arm,
        c: m,
    })
}

// Basis positions of the field amplitudes in |ψ_γ>.
const V1: usize = 0; // HH
const V2: usize = 1; // HV
const H2: usize = 2; // VH
const H1: usize = 3; // VV

/// Two-qubit state of the source for the canonical pump, from the closed-form
/// second moments.
pub fn build_density_matrix(p: &SchemeParams) -> Result<TwoQubitState> {
    p.validate()?;
    let big_p = p.pump_p;
    let (s1, c1) = p.theta1.sin_cos();
    let (s2, c2) = p.theta2.sin_cos();
    let (a1, a2) = (p.alpha1, p.alpha2);
    let e = |phi: f64| C64::from_polar(1.0, phi);
    let eta1_sq = p.t;
    let eta2_sq = 1.0 - p.t;

    let mut rho = ComplexMatrix::zeros(4)?;

    // single-arm moments
    let arm = |eta_sq: f64, theta: f64, alpha: f64| {
        let (sa, ca) = alpha.sin_cos();
        let vv = eta_sq * (1.0 - big_p * ca * (2.0 * theta).sin()) / 2.0;
        let hh = eta_sq * (1.0 + big_p * ca * (2.0 * theta).sin()) / 2.0;
        let vh = c64(ca * (2.0 * theta).cos(), sa) * (eta_sq * big_p / 2.0);
        (vv, hh, vh)
    };
    let (v1v1, h1h1, v1h1) = arm(eta1_sq, p.theta1, a1);
    let (v2v2, h2h2, v2h2) = arm(eta2_sq, p.theta2, a2);
    rho[(V1, V1)] = c64(v1v1, 0.0);
    rho[(H1, H1)] = c64(h1h1, 0.0);
    rho[(V1, H1)] = v1h1;
    rho[(V2, V2)] = c64(v2v2, 0.0);
    rho[(H2, H2)] = c64(h2h2, 0.0);
    rho[(V2, H2)] = v2h2;

    // cross-arm moments carry <e^{∓iγ}> = μ e^{∓iγ0}
    let k = p.mu * (eta1_sq * eta2_sq).sqrt() / 2.0;
    let down = e(-p.gamma0) * k;
    let up = e(p.gamma0) * k;
    rho[(V1, V2)] = (c64(s1 * s2, 0.0) + e(a1 - a2) * (c1 * c2)
        - e(a1) * (big_p * c1 * s2)
        - e(-a2) * (big_p * s1 * c2))
        * down;
    rho[(V1, H2)] = (c64(-s1 * c2, 0.0) + e(a1 - a2) * (c1 * s2) + e(a1) * (big_p * c1 * c2)
        - e(-a2) * (big_p * s1 * s2))
        * down;
    rho[(V2, H1)] = (c64(-c1 * s2, 0.0) + e(-(a1 - a2)) * (s1 * c2) - e(-a1) * (big_p * s1 * s2)
        + e(a2) * (big_p * c1 * c2))
        * up;
    rho[(H2, H1)] = (c64(c1 * c2, 0.0)
        + e(-(a1 - a2)) * (s1 * s2)
        + e(-a1) * (big_p * s1 * c2)
        + e(a2) * (big_p * c1 * s2))
        * up;

    fill_lower_triangle(&mut rho);
    TwoQubitState::new(rho)
}

/// Mirrors the upper triangle into the lower one.
fn fill_lower_triangle(rho: &mut ComplexMatrix) {
    for i in 0..4 {
        for j in 0..i {
            rho[(i, j)] = rho[(j, i)].conj();
        }
    }
}

/// Same state as [`build_density_matrix`], built from `C_i J C_j^dagger`.
pub fn build_density_matrix_oracle(p: &SchemeParams) -> Result<TwoQubitState> {
    p.validate()?;
    build_density_matrix_with_pump(p, &canonical_pump(p.pump_p)?)
}

/// Source output for an arbitrary pump polarization matrix. `p.pump_p` is
/// ignored in favor of `pump`.
pub fn build_density_matrix_with_pump(
    p: &SchemeParams,
    pump: &PolarizationMatrix,
) -> Result<TwoQubitState> {
    let c1 = transform_fields(p, 1)?.c;
    let c2 = transform_fields(p, 2)?.c;
    let j = *pump.matrix();
    let m11 = c1 * j * c1.adjoint();
    let m22 = c2 * j * c2.adjoint();
    let m12 = (c1 * j * c2.adjoint()).scale(C64::from_polar(p.mu, -p.gamma0));
    let m21 = m12.adjoint();

    // (arm, field index with H = 0 and V = 1) behind each basis position
    const SLOTS: [(u8, usize); 4] = [(1, 1), (2, 1), (2, 0), (1, 0)];
    let rho = ComplexMatrix::from_fn(4, |a, b| {
        let (arm_a, fa) = SLOTS[a];
        let (arm_b, fb) = SLOTS[b];
        let m = match (arm_a, arm_b) {
            (1, 1) => &m11,
            (2, 2) => &m22,
            (1, 2) => &m12,
            _ => &m21,
        };
        m[(fa, fb)]
    })?;
    TwoQubitState::new(rho)
}

/// At most two occupied diagonal entries and nothing outside their block.
pub fn is_two_d(s: &TwoQubitState, tol: f64) -> bool {
    two_d_support(s, tol).is_ok()
}
