use nalgebra::DMatrix;
use proptest::prelude::*;
use qudit_weyl::linalg::seeded_rng;
use qudit_weyl::weyl::{
    correction_op, decompose, pauli_inverse, pauli_op, phase_op, reconstruct, shift_op,
};
use qudit_weyl::{basis_ket, Complex64, ComplexMatrix, Dimension, PauliCoefficients, PauliIndex};

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

/// `e^{2πi n/d}` evaluated without the library's exact quarter-turn handling.
fn polar_root(d: usize, n: i64) -> Complex64 {
    let r = n.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r / d as f64)
}

/// Build `E_{l,k}` column by column from the ket action `|m⟩ ↦ ω^{km}|m+l⟩`.
fn pauli_from_ket_action(d: usize, l: usize, k: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d, d);
    for m in 0..d {
        out[((m + l) % d, m)] = polar_root(d, (k * m) as i64);
    }
    out
}

/// `ξ_{i,j} = tr(E†_{i,j} A) / d` via full matrix products.
fn decompose_by_trace(a: &ComplexMatrix, d: usize) -> Vec<Complex64> {
    PauliIndex::all(dim(d))
        .map(|idx| {
            let e = pauli_from_ket_action(d, idx.l(), idx.k());
            e.dagger().matmul(a).unwrap().trace().unwrap() / d as f64
        })
        .collect()
}

#[test]
fn pauli_matches_ket_action() {
    for d in 2..=9 {
        for idx in PauliIndex::all(dim(d)) {
            let oracle = pauli_from_ket_action(d, idx.l(), idx.k());
            assert!(pauli_op(idx).max_abs_diff(&oracle) < 1e-12, "d={d} {idx:?}");
        }
    }
}

#[test]
fn trace_of_squared_pauli_is_d() {
    let e = pauli_op(PauliIndex::new(dim(3), 1, 1).unwrap());
    let tr = e.dagger().matmul(&e).unwrap().trace().unwrap();
    assert!((tr - Complex64::new(3.0, 0.0)).norm() < 1e-12);
}

#[test]
fn paulis_are_unitary_up_to_sixteen() {
    for d in 2..=16 {
        for idx in PauliIndex::all(dim(d)) {
            assert!(pauli_op(idx).is_unitary(1e-12), "d={d} {idx:?}");
        }
    }
}

#[test]
fn weyl_commutation_up_to_sixteen() {
    for d in 2..=16 {
        let dd = dim(d);
        for l in 0..d {
            let x = shift_op(dd, l).unwrap();
            for k in 0..d {
                let z = phase_op(dd, k).unwrap();
                let lhs = z.matmul(&x).unwrap();
                let rhs = x.matmul(&z).unwrap().scale(polar_root(d, (l * k) as i64));
                assert!(lhs.max_abs_diff(&rhs) < 1e-12, "d={d} l={l} k={k}");
            }
        }
    }
}

#[test]
fn trace_orthogonality() {
    for d in 2..=8 {
        let ops: Vec<_> = PauliIndex::all(dim(d)).map(pauli_op).collect();
        for (x, ex) in ops.iter().enumerate() {
            let exd = ex.dagger();
            for (y, ey) in ops.iter().enumerate() {
                let tr = exd.matmul(ey).unwrap().trace().unwrap();
                let expected = if x == y { d as f64 } else { 0.0 };
                assert!((tr - expected).norm() < 1e-12, "d={d} {x} {y}: {tr}");
            }
        }
    }
}

#[test]
fn vectorized_basis_has_full_rank() {
    for d in 2..=8 {
        let n2 = d * d;
        let cols: Vec<_> = PauliIndex::all(dim(d)).map(pauli_op).collect();
        let m = DMatrix::from_fn(n2, n2, |r, c| cols[c].entries()[r]);
        let sv = m.svd(false, false).singular_values;
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 1e-8, "d={d}: smallest singular value {min}");
        // Orthogonality forces every singular value to be √d.
        assert!((min - (d as f64).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn correction_labels_invert_every_pauli() {
    for d in 2..=8 {
        for idx in PauliIndex::all(dim(d)) {
            let (zk, xl) = pauli_inverse(idx);
            assert_eq!(zk, (d - idx.k()) % d);
            assert_eq!(xl, (d - idx.l()) % d);
            let product = correction_op(idx).matmul(&pauli_op(idx)).unwrap();
            assert!(product.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-12);
        }
    }
}

#[test]
fn rank_one_coefficients_match_closed_form() {
    // ξ_{i,j} = (1/d) ω^{-bj} δ_{b+i, a}
    for d in [2usize, 3, 5, 7] {
        let dd = dim(d);
        for a in 0..d {
            for b in 0..d {
                let op = ComplexMatrix::outer(
                    basis_ket(dd, a).unwrap().as_vector(),
                    basis_ket(dd, b).unwrap().as_vector(),
                );
                let xi = decompose(&op, dd).unwrap();
                for (idx, z) in xi.iter() {
                    let expected = if (b + idx.l()) % d == a {
                        polar_root(d, -((b * idx.k()) as i64)) / d as f64
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert!((z - expected).norm() < 1e-12);
                }
                assert!(reconstruct(&xi).max_abs_diff(&op) < 1e-12);
            }
        }
    }
}

#[test]
fn decompose_agrees_with_trace_oracle() {
    let mut rng = seeded_rng(2024);
    for d in 2..=6 {
        for _ in 0..5 {
            let a = ComplexMatrix::random_with(d, d, &mut rng);
            let oracle = decompose_by_trace(&a, d);
            let xi = decompose(&a, dim(d)).unwrap();
            for (z, o) in xi.as_slice().iter().zip(&oracle) {
                assert!((z - o).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn random_three_by_three_round_trip() {
    let mut rng = seeded_rng(3);
    let a = ComplexMatrix::random_with(3, 3, &mut rng);
    let back = reconstruct(&decompose(&a, dim(3)).unwrap());
    assert!(back.max_abs_diff(&a) < 1e-12);
}

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n).prop_map(|v| {
        v.into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect()
    })
}

fn matrix_with_dim() -> impl Strategy<Value = (usize, ComplexMatrix)> {
    (2usize..=8).prop_flat_map(|d| {
        complex_entries(d * d).prop_map(move |e| (d, ComplexMatrix::from_entries(d, d, e).unwrap()))
    })
}

fn coefficients_with_dim() -> impl Strategy<Value = PauliCoefficients> {
    (2usize..=8).prop_flat_map(|d| {
        complex_entries(d * d).prop_map(move |e| PauliCoefficients::new(dim(d), e).unwrap())
    })
}

proptest! {
    #[test]
    fn reconstruct_inverts_decompose((d, a) in matrix_with_dim()) {
        let back = reconstruct(&decompose(&a, dim(d)).unwrap());
        prop_assert!(back.max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn decompose_inverts_reconstruct(c in coefficients_with_dim()) {
        let back = decompose(&reconstruct(&c), c.dim()).unwrap();
        prop_assert!(back.max_abs_diff(&c) < 1e-10);
    }
}
