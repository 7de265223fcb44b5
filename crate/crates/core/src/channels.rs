//! Kraus channels on two-qubit states and majorization checks.
//!
//! A channel `ρ -> Σ M_i ρ M_i^dagger` that is both trace preserving
//! (`Σ M_i^dagger M_i = I`) and unital (`Σ M_i M_i^dagger = I`) is doubly
//! stochastic, and its outputs are majorized by its inputs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{haar_unitary, psd_eig, ComplexMatrix, Spectrum};
use crate::rng;
use crate::twoqubit::TwoQubitState;

pub const CHANNEL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    operators: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

impl TryFrom<ChannelJson> for KrausChannel {
    type Error = Error;
    fn try_from(j: ChannelJson) -> Result<Self> {
        KrausChannel::new(j.operators)?.with_labels(j.labels)
    }
}

impl From<KrausChannel> for ChannelJson {
    fn from(c: KrausChannel) -> Self {
        ChannelJson {
            operators: c.operators,
            labels: c.labels,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelValidity {
    pub trace_preserving: bool,
    pub unital: bool,
    /// `max |Σ M^dagger M - I|`
    pub trace_defect: f64,
    /// `max |Σ M M^dagger - I|`
    pub unital_defect: f64,
}

impl ChannelValidity {
    pub fn doubly_stochastic(&self) -> bool {
        self.trace_preserving && self.unital
    }
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::BadParameter(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        if let Some(op) = operators.iter().find(|m| m.dim() != 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: op.dim(),
            });
        }
        Ok(Self {
            operators,
            labels: Vec::new(),
        })
    }

    /// Attaches one label per operator (or none).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if !labels.is_empty() && labels.len() != self.operators.len() {
            return Err(Error::BadParameter(format!(
                "{} labels for {} operators",
                labels.len(),
                self.operators.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn identity() -> Self {
        Self::new(vec![ComplexMatrix::identity(4).unwrap()]).unwrap()
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn validate_doubly_stochastic(&self, tol: f64) -> ChannelValidity {
        let id = ComplexMatrix::identity(4).unwrap();
        let zero = ComplexMatrix::zeros(4).unwrap();
        let (tp, un) = self.operators.iter().fold((zero, zero), |(tp, un), m| {
            (tp + m.adjoint() * *m, un + *m * m.adjoint())
        });
        let trace_defect = tp.max_abs_diff(&id);
        let unital_defect = un.max_abs_diff(&id);
        ChannelValidity {
            trace_preserving: trace_defect <= tol,
            unital: unital_defect <= tol,
            trace_defect,
            unital_defect,
        }
    }

    /// `Σ M_i s M_i^dagger`. The input must be a valid density matrix.
    pub fn apply(&self, s: &ComplexMatrix) -> Result<ComplexMatrix> {
        if s.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: s.dim(),
            });
        }
        TwoQubitState::new(*s)?;
        Ok(self.apply_unchecked(s))
    }

    pub(crate) fn apply_unchecked(&self, s: &ComplexMatrix) -> ComplexMatrix {
        let zero = ComplexMatrix::zeros(4).unwrap();
        let out = self
            .operators
            .iter()
            .fold(zero, |acc, m| acc + s.conjugate_by(m));
        (out + out.adjoint()).scale_real(0.5)
    }

    /// The channel that applies `self` first and then `next`.
    pub fn then(&self, next: &KrausChannel) -> KrausChannel {
        let operators = next
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| *b * *a))
            .collect();
        KrausChannel::new(operators).expect("nonempty dim-4 operators")
    }
}

pub fn validate_doubly_stochastic(ch: &KrausChannel, tol: f64) -> ChannelValidity {
    ch.validate_doubly_stochastic(tol)
}

pub fn apply_channel(ch: &KrausChannel, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    ch.apply(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MajorizationReport {
    pub holds: bool,
    pub partial_sums_source: [f64; 4],
    pub partial_sums_target: [f64; 4],
    /// Smallest `source_k - target_k` over the three leading partial sums;
    /// negative means an inequality is violated.
    pub worst_slack: f64,
}

fn four_partial_sums(s: &Spectrum) -> [f64; 4] {
    let ps = s.partial_sums();
    [ps[0], ps[1], ps[2], ps[3]]
}

/// Whether `target ≺ source`: each leading partial sum of the target's
/// sorted spectrum is at most the source's, and the totals agree.
pub fn is_majorized_by(
    target: &ComplexMatrix,
    source: &ComplexMatrix,
    tol: f64,
) -> Result<MajorizationReport> {
    let target = TwoQubitState::new(*target)?;
    let source = TwoQubitState::new(*source)?;
    let t = four_partial_sums(&psd_eig(target.matrix())?.spectrum);
    let s = four_partial_sums(&psd_eig(source.matrix())?.spectrum);
    let worst_slack = (0..3).map(|k| s[k] - t[k]).fold(f64::INFINITY, f64::min);
    let holds = worst_slack >= -tol && (s[3] - t[3]).abs() <= tol;
    Ok(MajorizationReport {
        holds,
        partial_sums_source: s,
        partial_sums_target: t,
        worst_slack,
    })
}

/// `{sqrt(p_i) U_i}` with `p` uniform on the probability simplex and Haar
/// `U_i`. Always doubly stochastic, but only covers the mixed-unitary part of
/// the doubly-stochastic set.
pub fn mixed_unitary_channel<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<KrausChannel> {
    if k == 0 {
        return Err(Error::BadParameter("k must be at least 1".into()));
    }
    let weights: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let operators = weights
        .iter()
        .map(|w| Ok(haar_unitary(4, rng)?.scale_real((w / total).sqrt())))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(operators)
}

pub fn random_mixed_unitary_channel(k: usize, seed: u64) -> Result<KrausChannel> {
    mixed_unitary_channel(k, &mut rng::seeded(seed))
}
