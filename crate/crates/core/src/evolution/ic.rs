use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::SpectralError;
use crate::spectral::{Grid, SpectralField, Wavevector};

/// Initial temperature fluctuations that can be built from parameters alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `amplitude · cos(k1 x / L + k2 y / L + k3 z)`
    SingleMode { k: Wavevector, amplitude: f64 },
    /// Gaussian coefficients with amplitude spectrum `exp(-|k|² / k0²)`,
    /// normalized to RMS `amplitude`.
    Random { seed: u64, k0: f64, amplitude: f64 },
}

/// Half-width of the wavenumber box the random generator always draws from, so
/// that the same seed yields the same function on every grid.
fn random_box(k0: f64, length: f64) -> (i64, i64) {
    let cap = |v: f64| (v.ceil() as i64).clamp(4, 64);
    (cap(6.0 * k0 * length), cap(6.0 * k0))
}

impl InitialCondition {
    pub fn build(&self, grid: &Grid) -> Result<SpectralField, SpectralError> {
        match *self {
            Self::SingleMode { k, amplitude } => {
                if k.is_horizontal_mean() {
                    return Err(SpectralError::NonzeroHorizontalMean { k, magnitude: amplitude.abs() });
                }
                SpectralField::from_modes(grid, &[(k, Complex64::new(0.5 * amplitude, 0.0))])
            }
            Self::Random { seed, k0, amplitude } => Ok(random_field(grid, seed, k0, amplitude)),
        }
    }
}

fn random_field(grid: &Grid, seed: u64, k0: f64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.length();
    let (bh, bz) = random_box(k0, l);
    let mut field = SpectralField::zeros(grid);
    let mut total = 0.0;
    for k1 in -bh..=bh {
        for k2 in -bh..=bh {
            for k3 in -bz..=bz {
                let k = Wavevector::new(k1, k2, k3);
                // one draw per conjugate pair, on the lexicographically positive member
                if k.is_horizontal_mean() || (k1, k2, k3) < (-k1, -k2, -k3) {
                    continue;
                }
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let kk = (k1 * k1 + k2 * k2) as f64 / (l * l) + (k3 * k3) as f64;
                let c = Complex64::new(re, im) * (-kk / (k0 * k0)).exp();
                total += 2.0 * c.norm_sqr();
                if grid.is_retained(k) {
                    field.set_mode(k, c).expect("retained");
                }
            }
        }
    }
    // normalize by the untruncated sum so every grid sees the same function
    if total > 0.0 {
        field = field.scale(amplitude / total.sqrt());
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Norm, NormKind};

    #[test]
    fn single_mode_is_a_cosine() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let f = InitialCondition::SingleMode { k: Wavevector::new(1, 0, 1), amplitude: 2.0 }
            .build(&grid)
            .unwrap();
        let reference = SpectralField::from_fn(&grid, |x, _, z| 2.0 * (x + z).cos());
        assert!(f.sub(&reference).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn single_mode_needs_horizontal_wavenumber() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let ic = InitialCondition::SingleMode { k: Wavevector::new(0, 0, 1), amplitude: 1.0 };
        assert!(ic.build(&grid).is_err());
    }

    #[test]
    fn random_field_is_valid_and_normalized() {
        let grid = Grid::cube(32, 1.0).unwrap();
        let f = InitialCondition::Random { seed: 7, k0: 1.5, amplitude: 0.8 }.build(&grid).unwrap();
        assert_eq!(f.horizontal_mean_magnitude(), 0.0);
        assert_eq!(f.hermitian_defect(), 0.0);
        let rms = (f.norm_sq(NormKind::L2).unwrap() / grid.volume()).sqrt();
        assert!((rms - 0.8).abs() < 1e-12);
    }

    #[test]
    fn random_field_is_resolution_independent() {
        let coarse = Grid::cube(16, 1.0).unwrap();
        let fine = Grid::cube(32, 1.0).unwrap();
        let ic = InitialCondition::Random { seed: 3, k0: 1.0, amplitude: 1.0 };
        let a = ic.build(&coarse).unwrap();
        let b = ic.build(&fine).unwrap();
        for k in coarse.retained() {
            assert_eq!(a.mode(k), b.mode(k));
        }
    }
}
