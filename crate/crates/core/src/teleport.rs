//! Single-qudit teleportation through a generalized Bell pair.
//!
//! Register order is (message, Alice's Bell half, Bob's Bell half), message
//! most significant. The sender holds basis labels `(A, B)` used to prepare
//!
//! ```text
//! |β_AB⟩ = CNOT (F ⊗ I) |A⟩|B⟩ = (1/√d) Σ_x ω^{Ax} |x⟩|B + x⟩
//! ```
//!
//! then applies the inverse CNOT (message controls Alice's half) and `F` on the
//! message, giving
//!
//! ```text
//! (1/d) Σ_{y,z} ω^{Az} |y⟩|z⟩ ⊗ Σ_a α_a ω^{a(y+A)} |B + z + a⟩.
//! ```
//!
//! Measuring `(M1, M2) = (y, z)` leaves Bob with `Σ_a α_a ω^{(A+M1)a} |B + M2 + a⟩`
//! up to the global phase `ω^{A·M2}`, which `Z_{-A-M1} X_{-B-M2}` maps back to
//! `|ψ⟩`.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::linalg::{basis_ket, ComplexMatrix, ComplexVector, Dimension, StateVector};
use crate::weyl::{phase_op, shift_op};
use crate::{Error, Result};

/// Basis labels `(A, B)` selecting which Bell state is shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    d: Dimension,
    a: usize,
    b: usize,
}

impl BellLabel {
    pub fn new(d: Dimension, a: usize, b: usize) -> Result<Self> {
        Ok(Self {
            d,
            a: d.check(a)?,
            b: d.check(b)?,
        })
    }

    #[inline]
    pub fn dim(self) -> Dimension {
        self.d
    }

    #[inline]
    pub fn a(self) -> usize {
        self.a
    }

    #[inline]
    pub fn b(self) -> usize {
        self.b
    }
}

/// `F|j⟩ = (1/√d) Σ_i ω^{ij} |i⟩`.
pub fn fourier_op(d: Dimension) -> ComplexMatrix {
    let n = d.get();
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |i, j| d.root((i * j) as i64) * s)
}

/// Target of `|k⟩|l⟩` under the controlled shift: `(k, l + k mod d)`.
pub fn cnot_map(d: Dimension, k: usize, l: usize) -> (usize, usize) {
    (k, (l + k) % d.get())
}

/// Target of `|k⟩|l⟩` under the inverse controlled shift: `(k, l - k mod d)`.
pub fn cnot_inv_map(d: Dimension, k: usize, l: usize) -> (usize, usize) {
    (k, d.reduce(l as i64 - k as i64))
}

fn permutation_op(
    d: Dimension,
    map: impl Fn(Dimension, usize, usize) -> (usize, usize),
) -> ComplexMatrix {
    let n = d.get();
    let mut out = ComplexMatrix::zeros(n * n, n * n);
    for k in 0..n {
        for l in 0..n {
            let (k2, l2) = map(d, k, l);
            out[(k2 * n + l2, k * n + l)] = Complex64::new(1.0, 0.0);
        }
    }
    out
}

/// Generalized controlled-NOT `|k⟩|l⟩ ↦ |k⟩|l + k⟩` on `C^d ⊗ C^d`.
pub fn cnot_op(d: Dimension) -> ComplexMatrix {
    permutation_op(d, cnot_map)
}

/// `|k⟩|l⟩ ↦ |k⟩|l - k⟩`.
pub fn cnot_inv_op(d: Dimension) -> ComplexMatrix {
    permutation_op(d, cnot_inv_map)
}

/// `|β_AB⟩ = (1/√d) Σ_x ω^{Ax} |x⟩|B + x⟩`.
pub fn bell_state(lbl: BellLabel) -> StateVector {
    let d = lbl.d;
    let n = d.get();
    let s = 1.0 / (n as f64).sqrt();
    let mut v = ComplexVector::zeros(n * n);
    for x in 0..n {
        v[x * n + (lbl.b + x) % n] = d.root((lbl.a * x) as i64) * s;
    }
    StateVector::from_vector(v).expect("Bell state has unit norm")
}

/// `CNOT (F ⊗ I) |A⟩|B⟩`, gate by gate.
pub fn bell_state_circuit(lbl: BellLabel) -> StateVector {
    let d = lbl.d;
    let input = basis_ket(d, lbl.a)
        .and_then(|ka| Ok(ka.tensor(&basis_ket(d, lbl.b)?)))
        .expect("labels are in range");
    let prep = fourier_op(d).kron(&ComplexMatrix::identity(d.get()));
    let after_fourier = prep.apply_state(&input).expect("unitary on C^{d²}");
    cnot_op(d)
        .apply_state(&after_fourier)
        .expect("unitary on C^{d²}")
}

fn check_message(psi: &StateVector, d: Dimension) -> Result<()> {
    if psi.dim() != d.get() {
        return Err(Error::ShapeMismatch(format!(
            "message of dim {} with Bell pair over d = {d}",
            psi.dim()
        )));
    }
    Ok(())
}

/// Three-qudit state just before Alice measures, from the closed form
/// `(1/d) Σ_{y,z} ω^{Az} |y⟩|z⟩ Σ_a α_a ω^{a(y+A)} |B + z + a⟩`.
pub fn protocol_state(psi: &StateVector, lbl: BellLabel) -> Result<StateVector> {
    let d = lbl.d;
    check_message(psi, d)?;
    let n = d.get();
    let scale = 1.0 / n as f64;
    let mut v = ComplexVector::zeros(n * n * n);
    for y in 0..n {
        for z in 0..n {
            let outer = d.root((lbl.a * z) as i64) * scale;
            for (a, &alpha) in psi.amps().iter().enumerate() {
                let bob = (lbl.b + z + a) % n;
                v[(y * n + z) * n + bob] += outer * alpha * d.root((a * (y + lbl.a)) as i64);
            }
        }
    }
    StateVector::from_vector(v)
}

/// Same state as [`protocol_state`], built by applying
/// `(F ⊗ I ⊗ I)(CNOT⁻¹ ⊗ I)` to `|ψ⟩ ⊗ |β_AB⟩` with the Bell pair from
/// [`bell_state_circuit`].
pub fn protocol_state_circuit(psi: &StateVector, lbl: BellLabel) -> Result<StateVector> {
    let d = lbl.d;
    check_message(psi, d)?;
    let id = ComplexMatrix::identity(d.get());
    let joint = psi.tensor(&bell_state_circuit(lbl));
    let after_cnot = cnot_inv_op(d).kron(&id).apply_state(&joint)?;
    fourier_op(d).kron(&id).kron(&id).apply_state(&after_cnot)
}

/// Bob's qudit for outcome `(M1, M2)`: `Σ_a α_a ω^{(A+M1)a} |B + M2 + a⟩`.
pub fn branch_state(
    psi: &StateVector,
    lbl: BellLabel,
    m1: usize,
    m2: usize,
) -> Result<StateVector> {
    let d = lbl.d;
    check_message(psi, d)?;
    d.check(m1)?;
    d.check(m2)?;
    let n = d.get();
    let mut v = ComplexVector::zeros(n);
    for (a, &alpha) in psi.amps().iter().enumerate() {
        v[(lbl.b + m2 + a) % n] = alpha * d.root(((lbl.a + m1) * a) as i64);
    }
    StateVector::from_vector(v)
}

fn check_register(psi3: &StateVector, d: Dimension) -> Result<usize> {
    let n = d.get();
    if psi3.dim() != n * n * n {
        return Err(Error::ShapeMismatch(format!(
            "three-qudit register over d = {n} needs {} amplitudes, got {}",
            n * n * n,
            psi3.dim()
        )));
    }
    Ok(n)
}

/// Probability of each `(M1, M2)` outcome on the first two qudits, indexed `M1·d + M2`.
pub fn outcome_probabilities(psi3: &StateVector, d: Dimension) -> Result<Vec<f64>> {
    let n = check_register(psi3, d)?;
    Ok(psi3
        .amps()
        .chunks_exact(n)
        .map(|bob| bob.iter().map(Complex64::norm_sqr).sum())
        .collect())
}

/// Outcome of Alice's measurement with Bob's conditional qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub m1: usize,
    pub m2: usize,
    pub probability: f64,
    pub bob: StateVector,
}

/// Project the first two qudits onto `|M1⟩|M2⟩` and renormalize Bob's qudit.
pub fn project_outcome(
    psi3: &StateVector,
    d: Dimension,
    m1: usize,
    m2: usize,
) -> Result<Measurement> {
    let n = check_register(psi3, d)?;
    d.check(m1)?;
    d.check(m2)?;
    let start = (m1 * n + m2) * n;
    let slice = ComplexVector::new(psi3.amps()[start..start + n].to_vec());
    let probability = slice.norm_sqr();
    Ok(Measurement {
        m1,
        m2,
        probability,
        bob: slice.normalize()?,
    })
}

/// Sample `(M1, M2)` from the marginal on the first two qudits.
pub fn measure_outcomes<R: Rng + ?Sized>(
    psi3: &StateVector,
    d: Dimension,
    rng: &mut R,
) -> Result<Measurement> {
    let probs = outcome_probabilities(psi3, d)?;
    let flat = WeightedIndex::new(&probs)
        .map_err(|e| Error::Malformed(format!("outcome distribution: {e}")))?
        .sample(rng);
    let n = d.get();
    project_outcome(psi3, d, flat / n, flat % n)
}

fn correction_labels(lbl: BellLabel, m1: usize, m2: usize) -> Result<(usize, usize)> {
    let d = lbl.d;
    d.check(m1)?;
    d.check(m2)?;
    let shift = d.reduce(-(lbl.b as i64) - m2 as i64);
    let phase = d.reduce(-(lbl.a as i64) - m1 as i64);
    Ok((shift, phase))
}

/// `X_{-B-M2}` applied to Bob's qudit.
pub fn correct_shift(
    bob: &StateVector,
    lbl: BellLabel,
    m1: usize,
    m2: usize,
) -> Result<StateVector> {
    check_message(bob, lbl.d)?;
    let (shift, _) = correction_labels(lbl, m1, m2)?;
    shift_op(lbl.d, shift)?.apply_state(bob)
}

/// `Z_{-A-M1} X_{-B-M2}` applied to Bob's qudit.
pub fn correct(bob: &StateVector, lbl: BellLabel, m1: usize, m2: usize) -> Result<StateVector> {
    let shifted = correct_shift(bob, lbl, m1, m2)?;
    let (_, phase) = correction_labels(lbl, m1, m2)?;
    phase_op(lbl.d, phase)?.apply_state(&shifted)
}

/// Record of one teleportation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportTranscript {
    pub label: BellLabel,
    pub m1: usize,
    pub m2: usize,
    /// Probability of the observed `(M1, M2)`.
    pub probability: f64,
    /// Bob's qudit after the measurement, before correction.
    pub pre_correction: StateVector,
    pub final_state: StateVector,
    /// `|⟨ψ|final⟩|²`.
    pub fidelity: f64,
}

impl TeleportTranscript {
    #[inline]
    pub fn dim(&self) -> Dimension {
        self.label.d
    }
}

/// Teleport `psi` with Alice's outcomes sampled from `rng`.
pub fn teleport<R: Rng + ?Sized>(
    psi: &StateVector,
    lbl: BellLabel,
    rng: &mut R,
) -> Result<TeleportTranscript> {
    let psi3 = protocol_state(psi, lbl)?;
    let m = measure_outcomes(&psi3, lbl.d, rng)?;
    finish(psi, lbl, m)
}

/// Teleport `psi` as if Alice had observed `(m1, m2)`.
pub fn teleport_forced(
    psi: &StateVector,
    lbl: BellLabel,
    m1: usize,
    m2: usize,
) -> Result<TeleportTranscript> {
    let psi3 = protocol_state(psi, lbl)?;
    let m = project_outcome(&psi3, lbl.d, m1, m2)?;
    finish(psi, lbl, m)
}

fn finish(psi: &StateVector, lbl: BellLabel, m: Measurement) -> Result<TeleportTranscript> {
    let final_state = correct(&m.bob, lbl, m.m1, m.m2)?;
    let fidelity = psi.fidelity(&final_state)?;
    Ok(TeleportTranscript {
        label: lbl,
        m1: m.m1,
        m2: m.m2,
        probability: m.probability,
        pre_correction: m.bob,
        final_state,
        fidelity,
    })
}
