use proptest::prelude::*;

use unitgrad::distfield::{
    parabola_cubic_residual, parabola_discriminant, parabola_distance_field, parabola_projection, GridSpec,
};
use unitgrad::numcore::{fd_gradient, make_zoo_field, sample_points, Domain, VecN};
use unitgrad::witness::{closest_points_between_lines, first_order_gap, monotonicity_gap, Line};

fn finite_vec(dim: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, dim)
}

fn v(c: Vec<f64>) -> VecN {
    VecN::new(c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fd_is_exact_on_affine_fields(
        c1 in finite_vec(3, 2.0),
        c0 in -5.0..5.0f64,
        u in finite_vec(3, 5.0),
        log_step in -8.0..0.0f64,
    ) {
        let spec = format!("affine:{}:{c0:e}", c1.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(","));
        let f = make_zoo_field(&spec, 3).unwrap();
        let g = fd_gradient(&f, &v(u), 10f64.powf(log_step)).unwrap();
        let err = (&g - &v(c1)).max_abs();
        // Rounding of f(u ± h) over 2h.
        prop_assert!(err <= 1e-14 * 40.0 / 10f64.powf(log_step) + 1e-12, "{err:e}");
    }

    #[test]
    fn convex_zoo_gradients_are_monotone(a in finite_vec(2, 3.0), b in finite_vec(2, 3.0)) {
        for spec in ["smoothed_norm:0.1:0", "sqrt_quadratic", "quadratic:2,1,1,1", "norm:1"] {
            let f = make_zoo_field(spec, 2).unwrap();
            let (a, b) = (v(a.clone()), v(b.clone()));
            prop_assert!(monotonicity_gap(&f, &a, &b).unwrap() >= -1e-9, "{spec}");
            prop_assert!(first_order_gap(&f, &a, &b).unwrap() >= -1e-9, "{spec}");
        }
    }

    #[test]
    fn parabola_field_is_even_in_u1(u1 in -3.0..3.0f64, u2 in -3.0..3.0f64) {
        let f = parabola_distance_field();
        let a = f.value(&v(vec![u1, u2])).unwrap();
        let b = f.value(&v(vec![-u1, u2])).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        let u = v(vec![u1, u2]);
        if parabola_discriminant(&u).unwrap() > 1e-6 {
            let x = parabola_projection(&u).unwrap();
            let y = parabola_projection(&v(vec![-u1, u2])).unwrap();
            prop_assert!((x + y).abs() < 1e-12);
            prop_assert!(parabola_cubic_residual(&u, x).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn closest_points_are_orthogonal(
        b1 in finite_vec(4, 5.0), d1 in finite_vec(4, 1.0),
        b2 in finite_vec(4, 5.0), d2 in finite_vec(4, 1.0),
    ) {
        let (Ok(l1), Ok(l2)) = (Line::new(v(b1), v(d1)), Line::new(v(b2), v(d2))) else {
            return Ok(());
        };
        prop_assume!(l1.dir.dot(&l2.dir).abs() < 0.99);
        let r = closest_points_between_lines(&l1, &l2).unwrap();
        let (o1, o2) = r.orthogonality_residuals(&l1, &l2);
        let scale = 1.0 + r.s_star.abs() + r.t_star.abs();
        prop_assert!(o1 <= 1e-12 * scale && o2 <= 1e-12 * scale, "{o1:e} {o2:e}");
        // No nearby parameter pair does better.
        for (ds, dt) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            prop_assert!(l1.at(r.s_star + ds).distance(&l2.at(r.t_star + dt)) >= r.gap - 1e-12);
        }
    }

    #[test]
    fn samples_stay_in_their_domain(seed in any::<u64>(), r in 0.1..10.0f64) {
        let ball = Domain::new_ball(v(vec![1.0, -1.0, 0.5]), r).unwrap();
        let pts = sample_points(&ball, 32, seed).unwrap();
        prop_assert!(pts.iter().all(|p| ball.contains(p)));
        prop_assert_eq!(pts, sample_points(&ball, 32, seed).unwrap());
    }

    #[test]
    fn grid_nodes_span_the_box(nx in 2usize..50, ny in 2usize..50) {
        let g = GridSpec::new([-1.0, 0.0], [3.0, 2.0], nx, ny).unwrap();
        prop_assert_eq!(g.node(0, 0), (-1.0, 0.0));
        let (x, y) = g.node(nx - 1, ny - 1);
        prop_assert!((x - 3.0).abs() < 1e-15 && (y - 2.0).abs() < 1e-15);
    }
}
