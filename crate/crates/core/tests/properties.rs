use bennett_core::bounds::{self, BoundedRange, UenValue};
use bennett_core::complexity::{self, EvaluationMatrix};
use bennett_core::special_functions::{gamma_derivative, gamma_fn, gamma_inverse};
use proptest::prelude::*;

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(0.0..=1.0f64, n), m))
}

proptest! {
    #[test]
    fn gamma_inverse_round_trip(log_x in (1e-8f64).ln()..(1e3f64).ln()) {
        let x = log_x.exp();
        let back = gamma_inverse(gamma_fn(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-10 * x, "x {x}, back {back}");
    }

    #[test]
    fn gamma_inverse_solves_defining_equation(log_y in (1e-14f64).ln()..(1e3f64).ln()) {
        let y = -log_y.exp();
        let x = gamma_inverse(y).unwrap();
        prop_assert!(x >= 0.0);
        prop_assert!((gamma_fn(x).unwrap() - y).abs() <= 1e-12 * y.abs());
    }

    #[test]
    fn gamma_is_decreasing_and_below_zero(a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(gamma_fn(hi).unwrap() <= gamma_fn(lo).unwrap());
        prop_assert!(gamma_fn(a).unwrap() <= 0.0);
        prop_assert!(gamma_derivative(a).unwrap() <= 0.0);
    }

    #[test]
    fn bernstein_relaxation_dominates_exact(log_uen in 0.0f64..20.0, eps in 1e-6f64..0.9, log_n in 8.0f64..20.0) {
        let n = log_n.exp() as u64;
        let r = BoundedRange::unit();
        let uen = UenValue::user(log_uen).unwrap();
        if let Ok(exact) = bounds::bennett_uen_radius_exact(eps, n, &r, &uen) {
            let relaxed = bounds::bernstein_uen_radius_scaled(eps, n, &r, &uen).unwrap();
            prop_assert!(exact <= relaxed * (1.0 + 1e-12), "exact {exact} relaxed {relaxed}");
        }
    }

    #[test]
    fn radii_shrink_with_n(log_uen in 0.0f64..10.0, eps in 1e-4f64..0.5, n in 2000u64..1_000_000) {
        let r = BoundedRange::unit();
        let uen = UenValue::user(log_uen).unwrap();
        let h1 = bounds::hoeffding_uen_radius(eps, n, &r, &uen).unwrap();
        let h2 = bounds::hoeffding_uen_radius(eps, 2 * n, &r, &uen).unwrap();
        prop_assert!(h2 < h1);
        if let (Ok(e1), Ok(e2)) = (
            bounds::bennett_uen_radius_exact(eps, n, &r, &uen),
            bounds::bennett_uen_radius_exact(eps, 2 * n, &r, &uen),
        ) {
            prop_assert!(e2 < e1);
        }
    }

    #[test]
    fn tail_bounds_are_probabilities(xi in 0.001f64..2.0, n in 1u64..10_000, log_uen in 0.0f64..5.0) {
        let r = BoundedRange::unit();
        let uen = UenValue::user(log_uen).unwrap();
        for b in [
            bounds::hoeffding_uen_tail(xi, n, &r, &uen).unwrap(),
            bounds::bennett_uen_tail(xi, n, &r, &uen).unwrap(),
            bounds::bennett_bdiff_tail(xi, n, 1.0 / n as f64).unwrap(),
        ] {
            prop_assert!((0.0..=1.0).contains(&b.value));
            prop_assert!(b.value_raw >= 0.0);
        }
    }

    #[test]
    fn covers_shrink_with_radius(rows in matrix_strategy(10, 8), r1 in 0.01f64..0.5, dr in 0.0f64..0.5) {
        let m = EvaluationMatrix::from_rows(rows, BoundedRange::unit()).unwrap();
        let small = complexity::covering_number_greedy(&m, r1, 1.0).unwrap().size;
        let large = complexity::covering_number_greedy(&m, r1 + dr, 1.0).unwrap().size;
        prop_assert!(large <= small);
        let es = complexity::covering_number_exact(&m, r1, 1.0).unwrap().size;
        let el = complexity::covering_number_exact(&m, r1 + dr, 1.0).unwrap().size;
        prop_assert!(el <= es);
        prop_assert!(es <= small);
    }

    #[test]
    fn complexities_ignore_permutations(rows in matrix_strategy(6, 8), radius in 0.05f64..0.5, shift in 0usize..8) {
        let m = EvaluationMatrix::from_rows(rows.clone(), BoundedRange::unit()).unwrap();
        let (mr, nc) = (m.rows(), m.cols());
        let row_perm: Vec<usize> = (0..mr).rev().collect();
        let col_perm: Vec<usize> = (0..nc).map(|j| (j + shift) % nc).collect();
        let p = m.select_rows(&row_perm).select_columns(&col_perm);
        prop_assert_eq!(
            complexity::covering_number_exact(&m, radius, 1.0).unwrap().size,
            complexity::covering_number_exact(&p, radius, 1.0).unwrap().size
        );
        let a = complexity::rademacher_exact(&m).unwrap();
        let b = complexity::rademacher_exact(&p).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}
