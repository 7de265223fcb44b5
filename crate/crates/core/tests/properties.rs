use std::f64::consts::PI;

use proptest::prelude::*;
use pumpent::cli::fmt17;
use pumpent::matrix::{
    c64, hermitian_eig, random_haar_unitary, tensor, ComplexMatrix, JACOBI_OFF_TOL,
};
use pumpent::polarization::PolarizationMatrix;
use pumpent::scheme::{build_density_matrix, SchemeParams};
use pumpent::sweep::{evaluate, read_csv, write_csv};
use pumpent::twoqubit::{unitary_max_concurrence, TwoQubitState};

fn params() -> impl Strategy<Value = SchemeParams> {
    (
        (0.0..=1.0f64, 0.0..=PI, 0.0..=PI, 0.0..=2.0 * PI),
        (0.0..=2.0 * PI, 0.0..=1.0f64, 0.0..=2.0 * PI, 0.0..=1.0f64),
    )
        .prop_map(
            |((t, theta1, theta2, alpha1), (alpha2, mu, gamma0, pump_p))| SchemeParams {
                t,
                theta1,
                theta2,
                alpha1,
                alpha2,
                mu,
                gamma0,
                pump_p,
            },
        )
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0..1.0f64, 2 * dim * dim).prop_map(move |v| {
        let a = ComplexMatrix::from_fn(dim, |i, j| {
            c64(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1])
        })
        .unwrap();
        (a + a.adjoint()).scale_real(0.5)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigendecomposition_reconstructs(m in hermitian(4)) {
        let eig = hermitian_eig(&m, JACOBI_OFF_TOL).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&m) <= 1e-12);
        prop_assert!(eig.vectors.unitarity_defect() <= 1e-12);
        let sum: f64 = eig.spectrum.values().iter().sum();
        prop_assert!((sum - m.trace().re).abs() <= 1e-12);
    }

    #[test]
    fn tensor_is_bilinear(a in hermitian(2), b in hermitian(2), c in hermitian(2), s in -2.0..2.0f64) {
        let lhs = tensor(&(a + c.scale_real(s)), &b).unwrap();
        let rhs = tensor(&a, &b).unwrap() + tensor(&c, &b).unwrap().scale_real(s);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-14);
    }

    #[test]
    fn scheme_states_respect_bounds(p in params()) {
        let rho = build_density_matrix(&p).unwrap();
        let c = rho.concurrence().unwrap().value;
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!(c <= (1.0 + p.pump_p) / 2.0 + 1e-9);
        prop_assert!(c <= unitary_max_concurrence(&rho.spectrum().unwrap()).unwrap() + 1e-9);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(p in params(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let rho = build_density_matrix(&p).unwrap();
        let local = tensor(&random_haar_unitary(2, s1).unwrap(), &random_haar_unitary(2, s2).unwrap()).unwrap();
        let moved = TwoQubitState::new(rho.matrix().conjugate_by(&local)).unwrap();
        let (a, b) = (rho.concurrence().unwrap().value, moved.concurrence().unwrap().value);
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn canonical_pump_round_trips(p in 0.0..=1.0f64) {
        let j = PolarizationMatrix::canonical(p).unwrap();
        prop_assert!((j.degree_of_polarization() - p).abs() <= 1e-15);
        let back: PolarizationMatrix = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        prop_assert_eq!(back, j);
    }

    #[test]
    fn printed_numbers_reparse_exactly(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_round_trips(ps in prop::collection::vec(params(), 1..20)) {
        let records: Vec<_> = ps.iter().enumerate().map(|(i, p)| evaluate(i as u64, *p).unwrap()).collect();
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
    }
}
