use ipconv::verification::{dense_product, random_retained, relative_deviation};
use ipconv::{Grid, Norm, NormKind, SpectralField};
use proptest::prelude::*;

fn grid_strategy(max_n: usize) -> impl Strategy<Value = Grid> {
    let n = prop::sample::select((2..=max_n / 2).map(|h| 2 * h).collect::<Vec<_>>());
    let l = prop::sample::select(vec![0.5, 1.0, 1.7]);
    (n.clone(), n.clone(), n, l).prop_map(|(a, b, c, l)| Grid::new(a, b, c, l).unwrap())
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    relative_deviation(a, b).unwrap()
}

/// Random field including horizontal-mean content.
fn with_mean(grid: &Grid, seed: u64) -> SpectralField {
    let profile = SpectralField::from_fn(grid, |_, _, z| 0.3 + z.sin());
    random_retained(grid, seed, 1.0).add(&profile).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn physical_round_trip(grid in grid_strategy(16), seed in any::<u64>()) {
        let f = with_mean(&grid, seed);
        let back = SpectralField::to_spectral(&grid, &f.to_physical()).unwrap();
        prop_assert!(rel(&back, &f) <= 1e-13);
        prop_assert_eq!(back.hermitian_defect(), 0.0);
    }

    #[test]
    fn parseval(grid in grid_strategy(16), seed in any::<u64>()) {
        let f = with_mean(&grid, seed);
        let samples = f.to_physical();
        let quad = grid.volume() * samples.iter().map(|v| v * v).sum::<f64>() / grid.len() as f64;
        let spectral = f.norm_sq(NormKind::L2).unwrap();
        prop_assert!((quad - spectral).abs() <= 1e-12 * spectral);
    }

    #[test]
    fn multipliers_are_linear(grid in grid_strategy(12), s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let f = random_retained(&grid, s1, 1.0);
        let g = random_retained(&grid, s2, 1.0);
        let combo = f.scale(a).add(&g.scale(b)).unwrap();
        let ops: [fn(&SpectralField) -> SpectralField; 5] = [
            |f| f.dx(),
            |f| f.dy(),
            |f| f.dz(),
            |f| f.laplacian_h(),
            |f| f.inverse_horizontal_laplacian().unwrap(),
        ];
        for op in ops {
            let lhs = op(&combo);
            let rhs = op(&f).scale(a).add(&op(&g).scale(b)).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-13 * rhs.max_abs().max(1.0));
        }
    }

    #[test]
    fn inverse_laplacian_is_two_sided(grid in grid_strategy(16), seed in any::<u64>()) {
        let f = random_retained(&grid, seed, 1.0);
        let left = f.laplacian_h().inverse_horizontal_laplacian().unwrap();
        let right = f.inverse_horizontal_laplacian().unwrap().laplacian_h();
        prop_assert!(rel(&left, &f) <= 1e-13);
        prop_assert!(rel(&right, &f) <= 1e-13);
    }

    #[test]
    fn dealiased_product_matches_dense_convolution(grid in grid_strategy(12), s1 in any::<u64>(), s2 in any::<u64>()) {
        let f = with_mean(&grid, s1);
        let g = with_mean(&grid, s2);
        let fast = f.dealias_product(&g).unwrap();
        let dense = dense_product(&f, &g).unwrap();
        prop_assert!(rel(&fast, &dense) <= 1e-12);
        prop_assert!(rel(&g.dealias_product(&f).unwrap(), &dense) <= 1e-12);
    }

    #[test]
    fn poincare_inequality(grid in grid_strategy(16), seed in any::<u64>()) {
        let f = random_retained(&grid, seed, 1.0);
        let l = grid.length();
        prop_assert!(f.norm_sq(NormKind::L2).unwrap() <= l * l * f.norm_sq(NormKind::GradHL2).unwrap());
    }

    #[test]
    fn fractional_norms_are_monotone_in_order(grid in grid_strategy(12), seed in any::<u64>()) {
        // |k3|^{2s} is nondecreasing in s for |k3| >= 1
        let f = random_retained(&grid, seed, 1.0);
        let orders = [0.25, 0.5, 2.0 / 3.0, 1.0, 1.5];
        let norms: Vec<f64> = orders.iter().map(|s| f.norm_sq(NormKind::DzS(*s)).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-14));
        }
    }
}

#[test]
fn round_trip_at_production_size() {
    let grid = Grid::cube(64, 1.0).unwrap();
    let f = random_retained(&grid, 9, 1.0);
    let back = SpectralField::to_spectral(&grid, &f.to_physical()).unwrap();
    assert!(rel(&back, &f) <= 1e-13);
}
