//! Horizontal-mean temperature, recovered diagnostically from the heat flux.
//!
//! The mean balance `∂_z(⟨θ'w⟩) = ∂_zz θ̄` integrates once to
//! `∂_z θ̄ = ⟨θ'w⟩ + c`, and periodicity of `θ̄` forces `c` to be minus the
//! `z`-average of the flux. `θ̄` itself is fixed by requiring zero `z`-average.

use rustfft::num_complex::Complex64;

use crate::diagnostic::EPS_GUARD;
use crate::error::SpectralError;
use crate::spectral::{Grid, MeanProfile, Norm, NormKind, SpectralField};

/// Flux `⟨θ'w⟩`, mean gradient `∂_z θ̄`, and mean temperature `θ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanBalance {
    pub flux: MeanProfile,
    pub grad: MeanProfile,
    pub mean_temp: MeanProfile,
}

impl MeanBalance {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            flux: MeanProfile::zeros(grid),
            grad: MeanProfile::zeros(grid),
            mean_temp: MeanProfile::zeros(grid),
        }
    }

    /// Builds the gradient and mean temperature from a flux profile.
    pub fn from_flux(flux: MeanProfile) -> Self {
        let mut grad = flux.clone();
        grad.coeffs_mut()[0] = Complex64::default();
        let mean_temp = grad.map_modes(|k3| {
            if k3 == 0 {
                Complex64::default()
            } else {
                Complex64::new(0.0, -1.0 / k3 as f64)
            }
        });
        Self { flux, grad, mean_temp }
    }
}

/// Horizontal mean of `f` as a profile in `z`.
pub fn horizontal_mean(f: &SpectralField) -> MeanProfile {
    f.horizontal_mean()
}

pub fn mean_gradient(theta: &SpectralField, w: &SpectralField) -> Result<MeanBalance, SpectralError> {
    theta.grid().ensure_same(w.grid())?;
    let flux = theta.dealias_product(w)?.horizontal_mean();
    Ok(MeanBalance::from_flux(flux))
}

/// `‖∂_z flux - ∂_zz θ̄‖ / ‖∂_z flux‖`; zero when both vanish.
pub fn residual_mean_balance(b: &MeanBalance) -> f64 {
    let dflux = b.flux.dz();
    let dzz = b.mean_temp.dz().dz();
    let diff: Vec<Complex64> = dflux.coeffs().iter().zip(dzz.coeffs()).map(|(a, b)| a - b).collect();
    let diff = MeanProfile::from_coeffs(dflux.grid(), diff).expect("same length");
    let num = diff.norm(NormKind::L2).expect("L2 is total");
    if num == 0.0 {
        return 0.0;
    }
    num / dflux.norm(NormKind::L2).expect("L2 is total").max(EPS_GUARD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::{solve_flow, PhysParams};

    fn grid() -> Grid {
        Grid::cube(8, 1.0).unwrap()
    }

    fn close(p: &MeanProfile, f: impl Fn(f64) -> f64) -> bool {
        let nz = p.grid().nz();
        p.values().iter().enumerate().all(|(l, v)| {
            let z = 2.0 * std::f64::consts::PI * l as f64 / nz as f64;
            (v - f(z)).abs() < 1e-14
        })
    }

    #[test]
    fn horizontal_mean_examples() {
        let g = Grid::cube(12, 1.0).unwrap();
        let f = SpectralField::from_fn(&g, |x, _, z| x.cos() * z.cos());
        assert!(horizontal_mean(&f).coeffs().iter().all(|c| c.norm() < 1e-15));
        let f = SpectralField::from_fn(&g, |_, _, z| 3.0 + (2.0 * z).cos());
        assert!(close(&horizontal_mean(&f), |z| 3.0 + (2.0 * z).cos()));
        let f = SpectralField::from_fn(&g, |x, _, _| x.cos().powi(2));
        assert!(close(&horizontal_mean(&f), |_| 0.5));
    }

    #[test]
    fn product_mode_balance() {
        let g = grid();
        let p = PhysParams::new(1.0, 1.0).unwrap();
        let theta = SpectralField::from_fn(&g, |x, _, z| x.cos() * z.cos());
        let flow = solve_flow(&theta, &p).unwrap();
        let b = mean_gradient(&theta, &flow.w).unwrap();
        assert!(close(&b.flux, |z| 0.125 + 0.125 * (2.0 * z).cos()));
        assert!(close(&b.grad, |z| 0.125 * (2.0 * z).cos()));
        assert!(close(&b.mean_temp, |z| (2.0 * z).sin() / 16.0));
        assert!(residual_mean_balance(&b) <= 1e-13);
    }

    #[test]
    fn tilted_mode_has_constant_flux() {
        let g = grid();
        let p = PhysParams::new(1.0, 1.0).unwrap();
        let theta = SpectralField::from_fn(&g, |x, _, z| (x + z).cos());
        let flow = solve_flow(&theta, &p).unwrap();
        let b = mean_gradient(&theta, &flow.w).unwrap();
        assert!(close(&b.flux, |_| 0.25));
        assert!(close(&b.grad, |_| 0.0));
        assert!(close(&b.mean_temp, |_| 0.0));
    }

    #[test]
    fn zero_balance() {
        let g = grid();
        let z = SpectralField::zeros(&g);
        let b = mean_gradient(&z, &z).unwrap();
        assert_eq!(b, MeanBalance::zeros(&g));
        assert_eq!(residual_mean_balance(&b), 0.0);
    }

    #[test]
    fn missing_mean_temperature_gives_unit_residual() {
        let g = grid();
        let p = PhysParams::new(1.0, 1.0).unwrap();
        let theta = SpectralField::from_fn(&g, |x, _, z| x.cos() * z.cos());
        let flow = solve_flow(&theta, &p).unwrap();
        let mut b = mean_gradient(&theta, &flow.w).unwrap();
        b.mean_temp = MeanProfile::zeros(&g);
        assert!((residual_mean_balance(&b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_has_zero_average() {
        let g = grid();
        let p = PhysParams::new(2.0, 1.0).unwrap();
        let theta = SpectralField::from_fn(&g, |x, y, z| {
            x.cos() * z.cos() + 0.3 * (x + y + 2.0 * z).sin() + 0.2 * (y - z).cos()
        });
        let flow = solve_flow(&theta, &p).unwrap();
        let b = mean_gradient(&theta, &flow.w).unwrap();
        assert_eq!(b.grad.average(), 0.0);
        assert_eq!(b.mean_temp.average(), 0.0);
    }
}
