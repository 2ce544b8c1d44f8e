//! System–environment error model.
//!
//! A qudit `|i⟩` coupled to a d²-dimensional environment evolves as
//!
//! ```text
//! |i⟩ ↦ Σ_l |i + l⟩ ⊗ γ_{l-i, -i} |e_{l-i, -i}⟩
//! ```
//!
//! so column `b` of the γ table describes the input `|−b⟩`, and every column
//! must be a unit vector for the map to be an isometry. Re-summing over a
//! Fourier phase rewrites the same joint state as
//!
//! ```text
//! Σ_{l,k} (X_l Z_k |ψ⟩) ⊗ v_{l,k},   v_{l,k} = (1/d) Σ_z ω^{zk} γ_{z+l, z} |e_{z+l, z}⟩
//! ```
//!
//! and `‖v_{l,k}‖²` is the weight of the Pauli error `X_l Z_k`. Measuring in
//! the `e` basis and reading off a Pauli label only agree when the `v_{l,k}`
//! are mutually orthogonal, which happens exactly when `|γ_{z+l, z}|` does not
//! depend on `z`. Both readings are provided: [`measure_environment_raw`] for
//! the literal projective measurement, [`sample_error`] for the induced Pauli
//! channel.
//!
//! The environment pair `(a, b)` is stored at `a·d + b`, and the joint system
//! index `s` is the most significant: `s·d² + a·d + b`.

use std::fmt;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexVector, Dimension, StateVector};
use crate::weyl::{apply_pauli, pauli_inverse, phase_op, shift_op, PauliIndex};
use crate::{Error, Result};

/// Column-norm tolerance for a valid γ table.
pub const GAMMA_TOL: f64 = 1e-10;

/// The coupling coefficients `γ_{a,b}`, row `a`, column `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaRepr", into = "GammaRepr")]
pub struct GammaTable {
    d: Dimension,
    gamma: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct GammaRepr {
    d: Dimension,
    gamma: Vec<Vec<Complex64>>,
}

impl TryFrom<GammaRepr> for GammaTable {
    type Error = Error;

    fn try_from(r: GammaRepr) -> Result<Self> {
        let n = r.d.get();
        if r.gamma.len() != n || r.gamma.iter().any(|row| row.len() != n) {
            return Err(Error::Malformed(format!("gamma table must be {n}x{n}")));
        }
        let gamma: Vec<Complex64> = r.gamma.into_iter().flatten().collect();
        if gamma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Malformed("non-finite gamma entry".into()));
        }
        Ok(Self { d: r.d, gamma })
    }
}

impl From<GammaTable> for GammaRepr {
    fn from(g: GammaTable) -> Self {
        let n = g.d.get();
        Self {
            d: g.d,
            gamma: g.gamma.chunks_exact(n).map(<[_]>::to_vec).collect(),
        }
    }
}

/// First column of a γ table whose squared norm is not 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaViolation {
    pub column: usize,
    pub norm_sqr: f64,
}

impl fmt::Display for GammaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "column {} has squared norm {} (expected 1 within {GAMMA_TOL:e})",
            self.column, self.norm_sqr
        )
    }
}

impl GammaTable {
    /// Row-major `d×d` entries. Not validated; see [`validate_gamma`].
    pub fn new(d: Dimension, gamma: Vec<Complex64>) -> Result<Self> {
        let n = d.get();
        if gamma.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "gamma table for d = {n} needs {} entries, got {}",
                n * n,
                gamma.len()
            )));
        }
        Ok(Self { d, gamma })
    }

    pub fn from_fn(d: Dimension, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let n = d.get();
        let gamma = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self { d, gamma }
    }

    /// `γ_{a,b} = δ_{a,b}`: every input keeps its environment on the diagonal.
    pub fn identity(d: Dimension) -> Self {
        Self::from_fn(d, |a, b| {
            Complex64::new(if a == b { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// `γ_{a,b} = 1/√d`.
    pub fn uniform(d: Dimension) -> Self {
        let v = 1.0 / (d.get() as f64).sqrt();
        Self::from_fn(d, |_, _| Complex64::new(v, 0.0))
    }

    /// Each column an independent random unit vector.
    pub fn random_with<R: Rng + ?Sized>(d: Dimension, rng: &mut R) -> Self {
        let n = d.get();
        let columns: Vec<StateVector> = (0..n)
            .map(|_| crate::linalg::random_state_with(d, rng))
            .collect();
        Self::from_fn(d, |a, b| columns[b][a])
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.gamma[a * self.d.get() + b]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.gamma
    }
}

/// Check that every column of `g` has unit norm.
pub fn validate_gamma(g: &GammaTable) -> std::result::Result<(), GammaViolation> {
    let n = g.d.get();
    for b in 0..n {
        let norm_sqr: f64 = (0..n).map(|a| g.get(a, b).norm_sqr()).sum();
        // Written so that a NaN norm is rejected.
        let unit = (norm_sqr - 1.0).abs() <= GAMMA_TOL;
        if !unit {
            return Err(GammaViolation {
                column: b,
                norm_sqr,
            });
        }
    }
    Ok(())
}

fn require_valid(g: &GammaTable) -> Result<()> {
    validate_gamma(g).map_err(Error::InvalidGamma)
}

/// System qudit joined to its d²-dimensional environment.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    d: Dimension,
    amps: ComplexVector,
}

impl JointState {
    /// Wrap an amplitude vector of length d³. Must have unit norm.
    pub fn new(d: Dimension, amps: ComplexVector) -> Result<Self> {
        let n = d.get();
        if amps.dim() != n * n * n {
            return Err(Error::ShapeMismatch(format!(
                "joint state for d = {n} needs {} amplitudes, got {}",
                n * n * n,
                amps.dim()
            )));
        }
        let n2 = amps.norm_sqr();
        if (n2 - 1.0).abs() > crate::PROTOCOL_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { d, amps })
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn amplitude(&self, system: usize, a: usize, b: usize) -> Complex64 {
        let n = self.d.get();
        self.amps[system * n * n + a * n + b]
    }

    pub fn as_vector(&self) -> &ComplexVector {
        &self.amps
    }

    /// Probability of each environment outcome, indexed `a·d + b`.
    pub fn environment_probabilities(&self) -> Vec<f64> {
        let n = self.d.get();
        let n2 = n * n;
        (0..n2)
            .map(|env| (0..n).map(|s| self.amps[s * n2 + env].norm_sqr()).sum())
            .collect()
    }
}

/// `U(|ψ⟩ ⊗ |E⟩)` with the coupling given by `g`.
pub fn evolve_joint(psi: &StateVector, g: &GammaTable) -> Result<JointState> {
    require_valid(g)?;
    let d = g.d;
    let n = d.get();
    if psi.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "state of dim {} coupled through a gamma table for d = {n}",
            psi.dim()
        )));
    }
    let mut amps = ComplexVector::zeros(n * n * n);
    for (i, &alpha) in psi.amps().iter().enumerate() {
        let b = d.reduce(-(i as i64));
        for l in 0..n {
            let s = (i + l) % n;
            let a = d.reduce(l as i64 - i as i64);
            amps[s * n * n + a * n + b] += alpha * g.get(a, b);
        }
    }
    Ok(JointState { d, amps })
}

/// `v_{l,k} = (1/d) Σ_z ω^{zk} γ_{z+l, z} |e_{z+l, z}⟩`, as a vector of length d².
pub fn effective_environment(g: &GammaTable, idx: PauliIndex) -> Result<ComplexVector> {
    let d = g.d;
    if idx.dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "Pauli label for d = {} used with gamma table for d = {}",
            idx.dim(),
            d
        )));
    }
    let n = d.get();
    let scale = 1.0 / n as f64;
    let mut v = ComplexVector::zeros(n * n);
    for z in 0..n {
        let a = (z + idx.l()) % n;
        v[a * n + z] = d.root((z * idx.k()) as i64) * g.get(a, z) * scale;
    }
    Ok(v)
}

/// The joint state assembled as `Σ_{l,k} (X_l Z_k ψ) ⊗ v_{l,k}`.
///
/// Mathematically identical to [`evolve_joint`]; computed independently so
/// the two can be checked against each other.
pub fn pauli_resummed_joint(psi: &StateVector, g: &GammaTable) -> Result<ComplexVector> {
    require_valid(g)?;
    let n = g.d.get();
    if psi.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "state of dim {} coupled through a gamma table for d = {n}",
            psi.dim()
        )));
    }
    let mut total = ComplexVector::zeros(n * n * n);
    for idx in PauliIndex::all(g.d) {
        let sys = apply_pauli(idx, psi.as_vector())?;
        let env = effective_environment(g, idx)?;
        total = total.add(&sys.tensor(&env))?;
    }
    Ok(total)
}

/// Probabilities `p_{l,k}` of the Pauli errors `X_l Z_k`, stored at `l·d + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub struct ErrorWeights {
    d: Dimension,
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightsRepr {
    d: Dimension,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<WeightsRepr> for ErrorWeights {
    type Error = Error;

    fn try_from(r: WeightsRepr) -> Result<Self> {
        let n = r.d.get();
        if r.weights.len() != n || r.weights.iter().any(|row| row.len() != n) {
            return Err(Error::Malformed(format!("weights must be {n}x{n}")));
        }
        ErrorWeights::new(r.d, r.weights.into_iter().flatten().collect())
    }
}

impl From<ErrorWeights> for WeightsRepr {
    fn from(w: ErrorWeights) -> Self {
        let n = w.d.get();
        Self {
            d: w.d,
            weights: w.p.chunks_exact(n).map(<[_]>::to_vec).collect(),
        }
    }
}

impl ErrorWeights {
    /// Row-major by `l`. Entries must be non-negative and sum to 1 within 1e-10.
    pub fn new(d: Dimension, p: Vec<f64>) -> Result<Self> {
        let n = d.get();
        if p.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "weights for d = {n} need {} entries, got {}",
                n * n,
                p.len()
            )));
        }
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::Malformed(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > crate::PROTOCOL_TOL {
            return Err(Error::Malformed(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { d, p })
    }

    #[inline]
    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn get(&self, idx: PauliIndex) -> f64 {
        self.p[idx.flat()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// `p_{l,k} = ‖v_{l,k}‖²`.
pub fn induced_weights(g: &GammaTable) -> Result<ErrorWeights> {
    require_valid(g)?;
    let p = PauliIndex::all(g.d)
        .map(|idx| effective_environment(g, idx).map(|v| v.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorWeights { d: g.d, p })
}

/// Whether the `v_{l,k}` are pairwise orthogonal (up to `tol` on every inner product).
pub fn syndromes_orthogonal(g: &GammaTable, tol: f64) -> Result<bool> {
    let vs = PauliIndex::all(g.d)
        .map(|idx| effective_environment(g, idx))
        .collect::<Result<Vec<_>>>()?;
    for (x, u) in vs.iter().enumerate() {
        for v in &vs[x + 1..] {
            if u.inner(v)?.norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `|γ_{z+l, z}|` is independent of `z` for every diagonal `l`.
pub fn diagonals_have_constant_magnitude(g: &GammaTable, tol: f64) -> bool {
    let n = g.d.get();
    (0..n).all(|l| {
        let first = g.get(l % n, 0).norm();
        (1..n).all(|z| (g.get((z + l) % n, z).norm() - first).abs() <= tol)
    })
}

/// Result of measuring the environment in the `|e_{a,b}⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentOutcome {
    pub a: usize,
    pub b: usize,
    pub probability: f64,
    pub system: StateVector,
}

/// Projective measurement of the environment, returning the conditional
/// system state.
pub fn measure_environment_raw<R: Rng + ?Sized>(
    js: &JointState,
    rng: &mut R,
) -> Result<EnvironmentOutcome> {
    let n = js.d.get();
    let probs = js.environment_probabilities();
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::Malformed(format!("environment distribution: {e}")))?;
    let env = dist.sample(rng);
    let (a, b) = (env / n, env % n);
    let conditional = ComplexVector::new((0..n).map(|s| js.amplitude(s, a, b)).collect());
    Ok(EnvironmentOutcome {
        a,
        b,
        probability: probs[env],
        system: conditional.normalize()?,
    })
}

/// Draw a Pauli label with probability `p_{l,k}`.
pub fn sample_error<R: Rng + ?Sized>(w: &ErrorWeights, rng: &mut R) -> PauliIndex {
    let n = w.d.get();
    let flat = WeightedIndex::new(&w.p)
        .expect("ErrorWeights are non-negative with unit sum")
        .sample(rng);
    PauliIndex::new(w.d, flat / n, flat % n).expect("flat index below d²")
}

/// States before and after the correction step.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionRun {
    pub error: PauliIndex,
    /// `E_{l,k} ψ`.
    pub corrupted: StateVector,
    /// `Z_{-k} X_{-l} E_{l,k} ψ`.
    pub corrected: StateVector,
}

/// Apply the error `E_{l,k}` to `psi`, then undo it with `Z_{-k} X_{-l}`.
pub fn apply_and_correct(psi: &StateVector, idx: PauliIndex) -> Result<CorrectionRun> {
    let corrupted = StateVector::from_vector(apply_pauli(idx, psi.as_vector())?)?;
    let (zk, xl) = pauli_inverse(idx);
    let shifted = shift_op(idx.dim(), xl)?.apply_state(&corrupted)?;
    let corrected = phase_op(idx.dim(), zk)?.apply_state(&shifted)?;
    Ok(CorrectionRun {
        error: idx,
        corrupted,
        corrected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_ket, random_state, seeded_rng};

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn validation_cases() {
        let d = dim(3);
        assert_eq!(validate_gamma(&GammaTable::identity(d)), Ok(()));
        assert_eq!(validate_gamma(&GammaTable::uniform(d)), Ok(()));
        let zeros = GammaTable::from_fn(d, |_, _| Complex64::new(0.0, 0.0));
        assert_eq!(
            validate_gamma(&zeros),
            Err(GammaViolation {
                column: 0,
                norm_sqr: 0.0
            })
        );
    }

    #[test]
    fn validation_reports_first_bad_column() {
        let d = dim(3);
        let mut entries = GammaTable::identity(d).entries().to_vec();
        entries[2 * 3 + 2] = Complex64::new(2.0, 0.0);
        let g = GammaTable::new(d, entries).unwrap();
        assert_eq!(validate_gamma(&g).unwrap_err().column, 2);
        assert!(matches!(
            evolve_joint(&basis_ket(d, 0).unwrap(), &g),
            Err(Error::InvalidGamma(_))
        ));
        assert!(matches!(induced_weights(&g), Err(Error::InvalidGamma(_))));
    }

    #[test]
    fn evolve_ground_state_with_identity_table() {
        let d = dim(3);
        let js = evolve_joint(&basis_ket(d, 0).unwrap(), &GammaTable::identity(d)).unwrap();
        assert_eq!(js.amplitude(0, 0, 0), Complex64::new(1.0, 0.0));
        assert!((js.as_vector().norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_excited_qubit_with_identity_table() {
        // i = 1: b = -1 = 1, only l = 0 survives (a = b), system stays |1⟩.
        let d = dim(2);
        let js = evolve_joint(&basis_ket(d, 1).unwrap(), &GammaTable::identity(d)).unwrap();
        assert_eq!(js.amplitude(1, 1, 1), Complex64::new(1.0, 0.0));
        assert!((js.as_vector().norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_rejects_dimension_mismatch() {
        assert!(matches!(
            evolve_joint(
                &basis_ket(dim(2), 0).unwrap(),
                &GammaTable::identity(dim(3))
            ),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn identity_table_gives_uniform_phase_errors() {
        for n in 2..=6 {
            let d = dim(n);
            let w = induced_weights(&GammaTable::identity(d)).unwrap();
            for idx in PauliIndex::all(d) {
                let expected = if idx.l() == 0 { 1.0 / n as f64 } else { 0.0 };
                assert!((w.get(idx) - expected).abs() < 1e-15);
            }
        }
        let w2 = induced_weights(&GammaTable::identity(dim(2))).unwrap();
        assert_eq!(w2.as_slice(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn random_tables_give_normalized_weights() {
        let mut rng = seeded_rng(21);
        for n in 2..=6 {
            let g = GammaTable::random_with(dim(n), &mut rng);
            assert!(validate_gamma(&g).is_ok());
            assert!((induced_weights(&g).unwrap().sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_of_deterministic_states() {
        let d = dim(2);
        let mut rng = seeded_rng(0);
        let js = evolve_joint(&basis_ket(d, 0).unwrap(), &GammaTable::identity(d)).unwrap();
        for _ in 0..10 {
            let out = measure_environment_raw(&js, &mut rng).unwrap();
            assert_eq!((out.a, out.b), (0, 0));
            assert_eq!(out.probability, 1.0);
            assert_eq!(out.system, basis_ket(d, 0).unwrap());
        }

        let mut amps = ComplexVector::zeros(8);
        amps[4 + 2 + 1] = Complex64::new(0.0, 1.0);
        let js = JointState::new(d, amps).unwrap();
        let out = measure_environment_raw(&js, &mut rng).unwrap();
        assert_eq!((out.a, out.b), (1, 1));
        assert_eq!(out.probability, 1.0);
    }

    #[test]
    fn sample_error_point_mass_and_determinism() {
        let d = dim(3);
        let mut p = vec![0.0; 9];
        p[0] = 1.0;
        let w = ErrorWeights::new(d, p).unwrap();
        let mut rng = seeded_rng(4);
        for _ in 0..100 {
            assert_eq!(sample_error(&w, &mut rng), PauliIndex::identity(d));
        }

        let uniform = ErrorWeights::new(d, vec![1.0 / 9.0; 9]).unwrap();
        let draw = |seed| {
            let mut rng = seeded_rng(seed);
            (0..50)
                .map(|_| sample_error(&uniform, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(17), draw(17));
    }

    #[test]
    fn weights_reject_bad_input() {
        let d = dim(2);
        assert!(ErrorWeights::new(d, vec![0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(ErrorWeights::new(d, vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(ErrorWeights::new(d, vec![1.0]).is_err());
    }

    #[test]
    fn correction_round_trip() {
        let d = dim(2);
        let k0 = basis_ket(d, 0).unwrap();
        let run = apply_and_correct(&k0, PauliIndex::new(d, 1, 0).unwrap()).unwrap();
        assert_eq!(run.corrupted, basis_ket(d, 1).unwrap());
        assert_eq!(run.corrected, k0);

        let psi = random_state(dim(5), 3);
        let run = apply_and_correct(&psi, PauliIndex::identity(dim(5))).unwrap();
        assert_eq!(run.corrupted, psi);
        assert_eq!(run.corrected, psi);
    }

    #[test]
    fn gamma_json_shape() {
        let g = GammaTable::identity(dim(2));
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(
            text,
            r#"{"d":2,"gamma":[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}"#
        );
        let back: GammaTable = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GammaTable>(r#"{"d":2,"gamma":[[[1.0,0.0]]]}"#).is_err());
    }
}
