use std::f64::consts::PI;

use ipconv::diagnostic::{apriori_ratios, residual_momentum, solve_flow};
use ipconv::mean::{mean_gradient, residual_mean_balance};
use ipconv::verification::random_retained;
use ipconv::{Grid, Norm, NormKind, PhysParams, SpectralField};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    let n = prop::sample::select(vec![4usize, 6, 8, 10, 12, 16]);
    let l = prop::sample::select(vec![0.5, 1.0, 2.0]);
    (n.clone(), n.clone(), n, l).prop_map(|(a, b, c, l)| Grid::new(a, b, c, l).unwrap())
}

fn ra_strategy() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.1, 1.0, 100.0, 1e4])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn momentum_residuals_vanish(grid in grid_strategy(), ra in ra_strategy(), seed in any::<u64>()) {
        let p = PhysParams::new(ra, grid.length()).unwrap();
        let theta = random_retained(&grid, seed, 1.0);
        let flow = solve_flow(&theta, &p).unwrap();
        let (r1, r2) = residual_momentum(&flow, &theta, &p).unwrap();
        prop_assert!(r1 <= 1e-12 && r2 <= 1e-12, "r1 = {r1:e}, r2 = {r2:e}");
        prop_assert!(flow.divergence_defect() <= 1e-13 * flow.u.max_abs().max(flow.v.max_abs()).max(1e-300));
    }

    #[test]
    fn stream_function_relations(grid in grid_strategy(), seed in any::<u64>()) {
        let p = PhysParams::new(3.0, grid.length()).unwrap();
        let theta = random_retained(&grid, seed, 1.0);
        let flow = solve_flow(&theta, &p).unwrap();
        let tol = 1e-13 * flow.psi.max_abs().max(1e-300);
        prop_assert!(flow.omega.sub(&flow.psi.laplacian_h()).unwrap().max_abs() <= tol * 100.0);
        prop_assert!(flow.u.add(&flow.psi.dy()).unwrap().max_abs() <= tol * 10.0);
        prop_assert!(flow.v.sub(&flow.psi.dx()).unwrap().max_abs() <= tol * 10.0);
    }

    #[test]
    fn flow_is_linear_and_homogeneous_in_ra(grid in grid_strategy(), s1 in any::<u64>(), s2 in any::<u64>(), a in -2.0..2.0f64) {
        let p1 = PhysParams::new(1.5, grid.length()).unwrap();
        let p2 = PhysParams::new(3.0, grid.length()).unwrap();
        let f = random_retained(&grid, s1, 1.0);
        let g = random_retained(&grid, s2, 1.0);
        let one = solve_flow(&f, &p1).unwrap();
        let two = solve_flow(&f, &p2).unwrap();
        // doubling Ra is a power-of-two scaling, exact in floating point
        prop_assert_eq!(&two.w, &one.w.scale(2.0));
        prop_assert_eq!(&two.u, &one.u.scale(2.0));
        prop_assert_eq!(&two.psi, &one.psi.scale(2.0));
        let combo = solve_flow(&f.scale(a).add(&g).unwrap(), &p1).unwrap();
        let sum = one.w.scale(a).add(&solve_flow(&g, &p1).unwrap().w).unwrap();
        prop_assert!(combo.w.sub(&sum).unwrap().max_abs() <= 1e-13 * sum.max_abs().max(1.0));
    }

    #[test]
    fn sharp_bounds_hold(grid in grid_strategy(), ra in ra_strategy(), seed in any::<u64>()) {
        let p = PhysParams::new(ra, grid.length()).unwrap();
        let theta = random_retained(&grid, seed, 1.0);
        let flow = solve_flow(&theta, &p).unwrap();
        let ratios = apriori_ratios(&flow, &theta, &p).unwrap();
        prop_assert!(ratios.max() <= 1.0 + 1e-12, "{ratios:?}");
        let l2 = grid.length().powi(2);
        for k in grid.retained().filter(|k| !k.is_horizontal_mean()) {
            let bound = ra * l2 / k.horizontal_sq() as f64 * theta.mode(k).norm();
            prop_assert!(flow.w.mode(k).norm() <= bound * (1.0 + 1e-15));
        }
    }

    #[test]
    fn mean_balance_closes(grid in grid_strategy(), ra in ra_strategy(), seed in any::<u64>()) {
        let p = PhysParams::new(ra, grid.length()).unwrap();
        let theta = random_retained(&grid, seed, 1.0);
        let flow = solve_flow(&theta, &p).unwrap();
        let b = mean_gradient(&theta, &flow.w).unwrap();
        prop_assert!(residual_mean_balance(&b) <= 1e-13);
        prop_assert_eq!(b.grad.average(), 0.0);
        prop_assert_eq!(b.mean_temp.average(), 0.0);
    }

    #[test]
    fn energy_coupling_identity(grid in grid_strategy(), ra in ra_strategy(), seed in any::<u64>()) {
        // ∫ (w ∂_z θ̄) θ' = 4π²L² ∫ |∂_z θ̄|²
        let p = PhysParams::new(ra, grid.length()).unwrap();
        let theta = random_retained(&grid, seed, 1.0);
        let flow = solve_flow(&theta, &p).unwrap();
        let g = mean_gradient(&theta, &flow.w).unwrap().grad;
        let forcing = flow.w.dealias_product(&SpectralField::from_profile(&g)).unwrap();
        let lhs = forcing.inner(&theta).unwrap();
        let l = grid.length();
        let rhs = 4.0 * PI * PI * l * l * g.norm_sq(NormKind::L2).unwrap();
        let scale = forcing.norm(NormKind::L2).unwrap() * theta.norm(NormKind::L2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300), "lhs = {lhs:e}, rhs = {rhs:e}, scale = {scale:e}");
    }

    #[test]
    fn mean_gradient_is_bilinear(grid in grid_strategy(), s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let t = random_retained(&grid, s1, 1.0);
        let w1 = random_retained(&grid, s2, 1.0);
        let w2 = random_retained(&grid, s3, 1.0);
        let lhs = mean_gradient(&t, &w1.scale(2.0).add(&w2).unwrap()).unwrap().flux;
        let a = mean_gradient(&t, &w1).unwrap().flux;
        let b = mean_gradient(&t, &w2).unwrap().flux;
        for k3 in -(grid.kmax()[2] as i64)..=grid.kmax()[2] as i64 {
            let expected = a.mode(k3) * 2.0 + b.mode(k3);
            prop_assert!((lhs.mode(k3) - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
        }
    }
}

#[test]
fn fifty_random_fields_respect_sharp_bounds() {
    let grid = Grid::cube(16, 1.0).unwrap();
    let p = PhysParams::new(1.0, 1.0).unwrap();
    for seed in 0..50 {
        let theta = random_retained(&grid, seed, 1.0);
        let flow = solve_flow(&theta, &p).unwrap();
        assert!(apriori_ratios(&flow, &theta, &p).unwrap().max() <= 1.0 + 1e-12);
    }
}
