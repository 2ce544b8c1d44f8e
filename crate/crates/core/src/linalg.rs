//! Dense complex linear algebra over computational-basis indexed spaces.
//!
//! Everything here is small and exact-in-spirit: matrices are row-major
//! `Vec<Complex64>`, composite spaces use left-factor-most-significant
//! indexing, and equality is always "max-abs entrywise difference below a
//! tolerance".

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Squared-norm tolerance for accepting a [`StateVector`].
pub const NORM_TOL: f64 = 1e-12;

/// The generator behind every seeded routine in the crate.
///
/// ChaCha20 seeded through `SeedableRng::seed_from_u64`, so streams are
/// identical across platforms. Independent trials use `seed + trial`.
pub type SimRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Local dimension of a qudit. Always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `ω = exp(2πi/d)`.
    pub fn omega(self) -> Complex64 {
        omega(self.0)
    }

    /// `ω^n`, with `n` reduced mod d before evaluation.
    pub fn root(self, n: i64) -> Complex64 {
        root_of_unity(self.0, n)
    }

    /// Reduce a signed integer into `Z_d`.
    pub fn reduce(self, n: i64) -> usize {
        n.rem_euclid(self.0 as i64) as usize
    }

    /// Check `0 <= index < d`.
    pub fn check(self, index: usize) -> Result<usize> {
        if index < self.0 {
            Ok(index)
        } else {
            Err(Error::IndexOutOfRange { index, dim: self.0 })
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `exp(2πi·n/d)`.
///
/// Multiples of a quarter turn are returned exactly, so `ω = -1` for d = 2
/// and `ω = i` for d = 4 carry no rounding.
///
/// # Panics
///
/// Panics if `d == 0`.
pub fn root_of_unity(d: usize, n: i64) -> Complex64 {
    assert!(d >= 1, "root of unity requires d >= 1");
    let r = n.rem_euclid(d as i64) as usize;
    if (4 * r).is_multiple_of(d) {
        return match 4 * r / d {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * r as f64 / d as f64)
}

/// The primitive d-th root of unity `exp(2πi/d)`. Defined for `d >= 1`.
pub fn omega(d: usize) -> Complex64 {
    root_of_unity(d, 1)
}

/// Amplitude vector with no normalization requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub struct ComplexVector {
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    dim: usize,
    amps: Vec<Complex64>,
}

impl TryFrom<VectorRepr> for ComplexVector {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<Self> {
        if r.amps.len() != r.dim {
            return Err(Error::Malformed(format!(
                "vector declares dim {} but has {} amplitudes",
                r.dim,
                r.amps.len()
            )));
        }
        check_finite(&r.amps)?;
        Ok(Self { amps: r.amps })
    }
}

impl From<ComplexVector> for VectorRepr {
    fn from(v: ComplexVector) -> Self {
        Self {
            dim: v.amps.len(),
            amps: v.amps,
        }
    }
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Malformed("non-finite entry".into()))
    }
}

impl ComplexVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Kronecker product: entry `a·dim(other) + b` is `self[a]·other[b]`.
    pub fn tensor(&self, other: &ComplexVector) -> ComplexVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|&u| other.amps.iter().map(move |&v| u * v))
            .collect();
        ComplexVector { amps }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch(format!(
                "inner product of dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(u, v)| u.conj() * v)
            .sum())
    }

    pub fn scale(&self, factor: Complex64) -> ComplexVector {
        ComplexVector {
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &ComplexVector) -> Result<ComplexVector> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector sum of dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(ComplexVector {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(u, v)| u + v)
                .collect(),
        })
    }

    /// Largest `|self_i - other_i|`. Infinite when dimensions differ.
    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max)
    }

    /// Rescale to unit norm.
    pub fn normalize(&self) -> Result<StateVector> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(StateVector(self.scale(Complex64::new(1.0 / n, 0.0))))
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.amps[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.amps[i]
    }
}

/// A unit-norm amplitude vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexVector", into = "ComplexVector")]
pub struct StateVector(ComplexVector);

impl TryFrom<ComplexVector> for StateVector {
    type Error = Error;

    fn try_from(v: ComplexVector) -> Result<Self> {
        StateVector::from_vector(v)
    }
}

impl From<StateVector> for ComplexVector {
    fn from(s: StateVector) -> Self {
        s.0
    }
}

impl StateVector {
    /// Accepts `amps` only if its squared norm is within [`NORM_TOL`] of 1.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(ComplexVector::new(amps))
    }

    pub fn from_vector(v: ComplexVector) -> Result<Self> {
        let n2 = v.norm_sqr();
        if v.dim() == 0 || !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self(v))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn amps(&self) -> &[Complex64] {
        self.0.amps()
    }

    pub fn as_vector(&self) -> &ComplexVector {
        &self.0
    }

    pub fn into_vector(self) -> ComplexVector {
        self.0
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector(self.0.tensor(&other.0))
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.0.inner(&other.0)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// Max-abs difference after rotating `other` by the global phase that
    /// best aligns it with `self`.
    pub fn max_abs_diff_up_to_phase(&self, other: &StateVector) -> f64 {
        match self.inner(other) {
            Ok(overlap) if overlap.norm() > 0.0 => {
                let phase = overlap.conj() / overlap.norm();
                self.0.max_abs_diff(&other.0.scale(phase))
            }
            Ok(_) => self.0.max_abs_diff(&other.0),
            Err(_) => f64::INFINITY,
        }
    }
}

impl Index<usize> for StateVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Computational basis ket `|index⟩` of `C^d`.
pub fn basis_ket(d: Dimension, index: usize) -> Result<StateVector> {
    d.check(index)?;
    let mut v = ComplexVector::zeros(d.get());
    v[index] = Complex64::new(1.0, 0.0);
    Ok(StateVector(v))
}

/// Haar-style random state from `seed`: i.i.d. standard-normal real and
/// imaginary parts, then normalized.
pub fn random_state(d: Dimension, seed: u64) -> StateVector {
    random_state_with(d, &mut seeded_rng(seed))
}

pub fn random_state_with<R: Rng + ?Sized>(d: Dimension, rng: &mut R) -> StateVector {
    loop {
        let v = ComplexVector::new(gaussian_entries(d.get(), rng));
        if let Ok(s) = v.normalize() {
            return s;
        }
    }
}

fn gaussian_entries<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        ComplexMatrix::from_entries(r.rows, r.cols, r.entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries,
        }
    }
}

impl ComplexMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Malformed(format!("empty {rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Malformed(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &ComplexVector, v: &ComplexVector) -> Self {
        Self::from_fn(u.dim(), v.dim(), |r, c| u[r] * v[c].conj())
    }

    /// Matrix with i.i.d. standard complex Gaussian entries.
    pub fn random_with<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            rows,
            cols,
            entries: gaussian_entries(rows * cols, rng),
        }
    }

    /// Unitary from modified Gram–Schmidt on the columns of a Gaussian matrix.
    pub fn random_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = Self::random_with(n, n, rng);
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|c| (0..n).map(|r| g[(r, c)]).collect())
            .collect();
        for c in 0..n {
            let (done, rest) = cols.split_at_mut(c);
            let col = &mut rest[0];
            for prev in done.iter() {
                let proj: Complex64 = prev.iter().zip(col.iter()).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in col.iter_mut().zip(prev) {
                    *x -= proj * p;
                }
            }
            let norm = cols[c].iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            for z in cols[c].iter_mut() {
                *z /= norm;
            }
        }
        Self::from_fn(n, n, |r, c| cols[c][r])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cannot apply {}x{} matrix to vector of dim {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let amps = self
            .entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v.amps()).map(|(a, x)| a * x).sum())
            .collect();
        Ok(ComplexVector::new(amps))
    }

    /// Apply to a state; the result must again have unit norm.
    pub fn apply_state(&self, s: &StateVector) -> Result<StateVector> {
        StateVector::from_vector(self.apply(s.as_vector())?)
    }

    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "trace of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    /// Kronecker product `self ⊗ rhs`, consistent with [`ComplexVector::tensor`].
    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_same_shape(rhs)?;
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest `|self_rc - rhs_rc|`. Infinite when shapes differ.
    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        if self.check_same_shape(rhs).is_err() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(M†M - I)_rc| <= tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .dagger()
                .matmul(self)
                .map(|p| p.max_abs_diff(&ComplexMatrix::identity(self.rows)) <= tol)
                .unwrap_or(false)
    }

    fn check_same_shape(&self, rhs: &ComplexMatrix) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[r * self.cols + c]
    }
}
