//! The Weyl pair and the generalized Pauli basis of `d×d` matrices.
//!
//! Operators follow their ket actions:
//!
//! ```text
//! X_l |m⟩ = |m + l mod d⟩        Z_k |m⟩ = ω^{mk} |m⟩
//! E_{l,k} = X_l Z_k = Σ_m ω^{km} |m + l⟩⟨m|
//! ```
//!
//! The d² operators `E_{l,k}` are unitary and satisfy
//! `tr(E†_{i,j} E_{k,l}) = d·δ_{ik}·δ_{jl}`, so any `d×d` matrix `A` expands as
//! `A = Σ ξ_{i,j} E_{i,j}` with `ξ_{i,j} = tr(E†_{i,j} A) / d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, ComplexVector, Dimension};
use crate::{Error, Result};

/// Label `(l, k) ∈ Z_d × Z_d` of `E_{l,k} = X_l Z_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliIndex {
    d: Dimension,
    l: usize,
    k: usize,
}

impl PauliIndex {
    pub fn new(d: Dimension, l: usize, k: usize) -> Result<Self> {
        Ok(Self {
            d,
            l: d.check(l)?,
            k: d.check(k)?,
        })
    }

    /// Reduce arbitrary integers mod d.
    pub fn reduced(d: Dimension, l: i64, k: i64) -> Self {
        Self {
            d,
            l: d.reduce(l),
            k: d.reduce(k),
        }
    }

    pub fn identity(d: Dimension) -> Self {
        Self { d, l: 0, k: 0 }
    }

    #[inline]
    pub fn dim(self) -> Dimension {
        self.d
    }

    /// Shift amount.
    #[inline]
    pub fn l(self) -> usize {
        self.l
    }

    /// Phase amount.
    #[inline]
    pub fn k(self) -> usize {
        self.k
    }

    /// Flat position `l·d + k`.
    #[inline]
    pub fn flat(self) -> usize {
        self.l * self.d.get() + self.k
    }

    /// All d² labels in storage order.
    pub fn all(d: Dimension) -> impl Iterator<Item = PauliIndex> {
        let n = d.get();
        (0..n * n).map(move |f| PauliIndex {
            d,
            l: f / n,
            k: f % n,
        })
    }
}

/// `X_l`: column m holds a single 1 at row `m + l mod d`.
pub fn shift_op(d: Dimension, l: usize) -> Result<ComplexMatrix> {
    let l = d.check(l)?;
    let n = d.get();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        if r == (c + l) % n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `Z_k = diag(ω^{0·k}, ω^{1·k}, …)`.
pub fn phase_op(d: Dimension, k: usize) -> Result<ComplexMatrix> {
    let k = d.check(k)?;
    let n = d.get();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        if r == c {
            d.root((r * k) as i64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `E_{l,k} = Σ_m ω^{km} |m + l⟩⟨m|`.
pub fn pauli_op(idx: PauliIndex) -> ComplexMatrix {
    let d = idx.d;
    let n = d.get();
    let mut out = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        out[((m + idx.l) % n, m)] = d.root((idx.k * m) as i64);
    }
    out
}

/// `E_{l,k} v` without building the matrix.
pub fn apply_pauli(idx: PauliIndex, v: &ComplexVector) -> Result<ComplexVector> {
    let d = idx.d;
    let n = d.get();
    if v.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "Pauli operator on C^{n} applied to vector of dim {}",
            v.dim()
        )));
    }
    let mut out = ComplexVector::zeros(n);
    for m in 0..n {
        out[(m + idx.l) % n] = d.root((idx.k * m) as i64) * v[m];
    }
    Ok(out)
}

/// Labels `(zk, xl)` of the correction `Z_{zk} X_{xl} = (X_l Z_k)^{-1}`,
/// i.e. `((-k) mod d, (-l) mod d)`.
pub fn pauli_inverse(idx: PauliIndex) -> (usize, usize) {
    let d = idx.d;
    (d.reduce(-(idx.k as i64)), d.reduce(-(idx.l as i64)))
}

/// The matrix `Z_{-k} X_{-l}` undoing `E_{l,k}`.
pub fn correction_op(idx: PauliIndex) -> ComplexMatrix {
    let (zk, xl) = pauli_inverse(idx);
    let z = phase_op(idx.d, zk).expect("reduced label");
    let x = shift_op(idx.d, xl).expect("reduced label");
    z.matmul(&x).expect("square operators of equal size")
}

/// Coefficients `ξ_{i,j}` of a `d×d` matrix in the `E_{i,j}` basis, stored at
/// `i·d + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientsRepr", into = "CoefficientsRepr")]
pub struct PauliCoefficients {
    d: Dimension,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientsRepr {
    d: Dimension,
    coeffs: Vec<CoefficientEntry>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientEntry {
    i: usize,
    j: usize,
    re: f64,
    im: f64,
}

impl TryFrom<CoefficientsRepr> for PauliCoefficients {
    type Error = Error;

    fn try_from(r: CoefficientsRepr) -> Result<Self> {
        let n = r.d.get();
        if r.coeffs.len() != n * n {
            return Err(Error::Malformed(format!(
                "expected {} coefficients for d = {n}, got {}",
                n * n,
                r.coeffs.len()
            )));
        }
        let mut out = PauliCoefficients::zeros(r.d);
        let mut seen = vec![false; n * n];
        for e in r.coeffs {
            let idx = PauliIndex::new(r.d, e.i, e.j)?;
            if std::mem::replace(&mut seen[idx.flat()], true) {
                return Err(Error::Malformed(format!(
                    "duplicate coefficient ({}, {})",
                    e.i, e.j
                )));
            }
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::Malformed("non-finite coefficient".into()));
            }
            out.coeffs[idx.flat()] = Complex64::new(e.re, e.im);
        }
        Ok(out)
    }
}

impl From<PauliCoefficients> for CoefficientsRepr {
    fn from(c: PauliCoefficients) -> Self {
        let coeffs = c
            .iter()
            .map(|(idx, z)| CoefficientEntry {
                i: idx.l,
                j: idx.k,
                re: z.re,
                im: z.im,
            })
            .collect();
        Self { d: c.d, coeffs }
    }
}

impl PauliCoefficients {
    pub fn new(d: Dimension, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = d.get();
        if coeffs.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients for d = {n}, got {}",
                n * n,
                coeffs.len()
            )));
        }
        Ok(Self { d, coeffs })
    }

    pub fn zeros(d: Dimension) -> Self {
        let n = d.get();
        Self {
            d,
            coeffs: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, idx: PauliIndex) -> Complex64 {
        self.coeffs[idx.flat()]
    }

    pub fn set(&mut self, idx: PauliIndex, value: Complex64) {
        self.coeffs[idx.flat()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliIndex, Complex64)> + '_ {
        PauliIndex::all(self.d).map(move |idx| (idx, self.coeffs[idx.flat()]))
    }

    pub fn max_abs_diff(&self, other: &PauliCoefficients) -> f64 {
        if self.d != other.d {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `ξ_{i,j} = tr(E†_{i,j} A) / d` for every label.
///
/// `E_{i,j}` is supported on the entries `(m + i, m)`, so the trace collapses
/// to `Σ_m conj(ω^{jm}) A[m + i, m]`.
pub fn decompose(a: &ComplexMatrix, d: Dimension) -> Result<PauliCoefficients> {
    let n = d.get();
    if a.rows() != n || a.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "decomposition over d = {n} needs a {n}x{n} matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = 1.0 / n as f64;
    let mut out = PauliCoefficients::zeros(d);
    for idx in PauliIndex::all(d) {
        let tr: Complex64 = (0..n)
            .map(|m| d.root((idx.k * m) as i64).conj() * a[((m + idx.l) % n, m)])
            .sum();
        out.coeffs[idx.flat()] = tr * scale;
    }
    Ok(out)
}

/// `Σ ξ_{i,j} E_{i,j}`.
pub fn reconstruct(c: &PauliCoefficients) -> ComplexMatrix {
    let d = c.d;
    let n = d.get();
    let mut out = ComplexMatrix::zeros(n, n);
    for (idx, xi) in c.iter() {
        for m in 0..n {
            out[((m + idx.l) % n, m)] += xi * d.root((idx.k * m) as i64);
        }
    }
    out
}
