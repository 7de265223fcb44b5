//! Dense complex matrices of dimension 2 and 4.
//!
//! Everything downstream (pump states, two-qubit states, Kraus operators,
//! unitaries) is carried by [`ComplexMatrix`]. The Hermitian eigensolver is a
//! cyclic complex Jacobi iteration, which is accurate and cheap at these sizes.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex64;

const MAX_DIM: usize = 4;

/// Off-diagonal Frobenius norm (relative to `max(1, ||m||_F)`) at which the
/// Jacobi iteration stops.
pub const JACOBI_OFF_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are rounding noise and clamp to zero;
/// anything more negative is rejected.
pub const PSD_CLAMP: f64 = 1e-10;

/// Default Hermiticity tolerance for operations that take no explicit one.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::BadDimension(d)),
    }
}

/// Square complex matrix, row-major, `dim` in {2, 4}.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [C64; MAX_DIM * MAX_DIM],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: [C64::default(); MAX_DIM * MAX_DIM],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = c64(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from rows; the number of rows fixes the dimension.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        for r in rows {
            if r.as_ref().len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.as_ref().len(),
                });
            }
        }
        Self::from_fn(dim, |i, j| rows[i].as_ref()[j])
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| c64(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c64(v, 0.0);
        }
        Ok(m)
    }

    /// The projector `|v><v|` (no normalization applied).
    pub fn outer(v: &[C64]) -> Result<Self> {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    /// Elementwise complex conjugate (not the adjoint).
    pub fn conj(&self) -> Self {
        let mut m = *self;
        for z in m.entries_mut() {
            *z = z.conj();
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)];
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for z in m.entries_mut() {
            *z *= s;
        }
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c64(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    fn entries_mut(&mut self) -> &mut [C64] {
        let n = self.dim * self.dim;
        &mut self.data[..n]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |a_ij - b_ij|`; infinite when dimensions differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `max |m^dagger m - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let id = Self::identity(self.dim).expect("dim already validated");
        (self.adjoint() * *self).max_abs_diff(&id)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut out = *self;
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::default();
                for k in 0..n {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `m · v` for a column vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `u · self · u^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = *self;
        for (o, b) in out.entries_mut().iter_mut().zip(rhs.entries()) {
            *o = f(*o, *b);
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

/// Panics on dimension mismatch; use [`ComplexMatrix::try_mul`] for checked
/// multiplication.
impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.mul_unchecked(&rhs)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// JSON interchange: {"dim": n, "re": [[..]], "im": [[..]]}, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let part = |f: fn(&C64) -> f64| {
            (0..m.dim)
                .map(|i| m.row(i).iter().map(f).collect())
                .collect()
        };
        MatrixJson {
            dim: m.dim,
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        check_dim(j.dim)?;
        let shape_ok =
            |rows: &Vec<Vec<f64>>| rows.len() == j.dim && rows.iter().all(|r| r.len() == j.dim);
        if !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::DimensionMismatch {
                expected: j.dim,
                found: j.re.len(),
            });
        }
        ComplexMatrix::from_fn(j.dim, |r, c| c64(j.re[r][c], j.im[r][c]))
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues (or probabilities) sorted non-ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Accepts values that are already non-ascending.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite value".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpectrum(format!(
                "values not sorted non-ascending: {values:?}"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Leading partial sums `s_k = v_1 + ... + v_k`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// Checks the density-matrix conditions: every value `>= -tol`, sum `1 ± tol`.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        let min = *self.values.last().expect("nonempty");
        if min < -tol {
            return Err(Error::InvalidSpectrum(format!("negative value {min:e}")));
        }
        let sum = self.sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidSpectrum(format!("sum {sum} != 1")));
        }
        Ok(())
    }

    pub fn to_diagonal(&self) -> Result<ComplexMatrix> {
        ComplexMatrix::diag_real(&self.values)
    }
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub spectrum: Spectrum,
    /// Eigenvectors as columns, in the same order as `spectrum`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V · diag(f(λ)) · V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.vectors;
        let n = v.dim();
        let weights: Vec<f64> = self.spectrum.values().iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * weights[k])
                .sum()
        })
        .expect("dim already validated")
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`; accumulates into `v`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    // Phase D = diag(1, e^{-i arg a_pq}) makes the 2x2 block real symmetric;
    // then a real rotation with cot(2θ) = (a_qq - a_pp) / (2|a_pq|).
    let u_bar = (apq / g).conj();
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let g_pp = c64(c, 0.0);
    let g_pq = c64(s, 0.0);
    let g_qp = u_bar * (-s);
    let g_qq = u_bar * c;

    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    a[(p, q)] = C64::default();
    a[(q, p)] = C64::default();
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

fn jacobi_sweep(a: &mut ComplexMatrix, v: &mut ComplexMatrix) {
    let n = a.dim();
    for p in 0..n - 1 {
        for q in p + 1..n {
            jacobi_rotate(a, v, p, q);
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The input must be Hermitian within `tol` (max-norm of `m - m^dagger`); it
/// is symmetrized before iterating. Eigenvalues come back non-ascending with
/// matching eigenvector columns. Eigenvectors inside a degenerate eigenspace
/// are an arbitrary orthonormal basis of that space.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    let defect = m.hermitian_defect();
    if defect > tol || defect.is_nan() {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.dim();
    let mut a = (*m + m.adjoint()).scale_real(0.5);
    let mut v = ComplexMatrix::identity(n)?;
    let threshold = JACOBI_OFF_TOL * a.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        jacobi_sweep(&mut a, &mut v);
        sweeps += 1;
    }
    // One polishing sweep pushes the residual well below the threshold.
    if sweeps > 0 {
        jacobi_sweep(&mut a, &mut v);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])])?;
    Ok(HermitianEigen {
        spectrum: Spectrum::new(values)?,
        vectors,
    })
}

/// Eigendecomposition of a Hermitian PSD matrix with small negative
/// eigenvalues clamped to zero.
pub fn psd_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let eig = hermitian_eig(m, HERMITIAN_TOL)?;
    let min = *eig.spectrum.values().last().expect("nonempty");
    if min < -PSD_CLAMP {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let values = eig.spectrum.values().iter().map(|&l| l.max(0.0)).collect();
    Ok(HermitianEigen {
        spectrum: Spectrum::new(values)?,
        vectors: eig.vectors,
    })
}

/// Principal square root of a Hermitian PSD matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(psd_eig(m)?.reconstruct_with(f64::sqrt))
}

/// Kronecker product of two 2x2 matrices: `out[2i+k][2j+l] = a[i][j]·b[k][l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
    }
    ComplexMatrix::from_fn(4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Haar-distributed unitary drawn from `rng`.
///
/// Complex Ginibre matrix, Householder QR, then each column of Q is
/// multiplied by the phase of the matching diagonal entry of R so that R has
/// a positive diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    check_dim(dim)?;
    let mut r = ComplexMatrix::from_fn(dim, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })?;
    let mut q = ComplexMatrix::identity(dim)?;

    for k in 0..dim {
        let norm = (k..dim).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == 0.0 {
            c64(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k..dim).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // r <- (I - 2 v v^dagger) r on rows k..
        for j in 0..dim {
            let dot: C64 = (k..dim).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..dim {
                r[(i, j)] -= v[i - k] * dot * 2.0;
            }
        }
        // q <- q (I - 2 v v^dagger) on columns k..
        for i in 0..dim {
            let dot: C64 = (k..dim).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..dim {
                q[(i, j)] -= dot * v[j - k].conj() * 2.0;
            }
        }
    }

    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= ph;
            }
        }
    }
    Ok(q)
}

/// Haar unitary determined entirely by `seed`.
pub fn random_haar_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    check_dim(dim)?;
    haar_unitary(dim, &mut rng::seeded(seed))
}

/// Pauli matrices in the `{H, V} = {0, 1}` basis.
pub mod pauli {
    use super::{c64, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            [c64(0.0, 0.0), c64(0.0, -1.0)],
            [c64(0.0, 1.0), c64(0.0, 0.0)],
        ])
        .unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap()
    }
}
