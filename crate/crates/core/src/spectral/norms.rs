use rustfft::num_complex::Complex64;

use super::{Grid, MeanProfile, SpectralField};
use crate::error::SpectralError;
use crate::numeric::Compensated;

/// Which norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `‖f‖₂`
    L2,
    /// `‖∇_h f‖₂`
    GradHL2,
    /// `‖∂_z^s f‖₂` with `‖∂_z^s f‖₂² = |Ω| Σ |k3|^{2s} |f̂|²`
    DzS(f64),
    /// `(sup_z ∫ |f|² dx dy)^{1/2}`, maximum taken over collocation heights
    SupZHL2,
}

pub trait Norm {
    fn norm_sq(&self, kind: NormKind) -> Result<f64, SpectralError>;

    fn norm(&self, kind: NormKind) -> Result<f64, SpectralError> {
        self.norm_sq(kind).map(f64::sqrt)
    }
}

fn check_order(kind: NormKind) -> Result<(), SpectralError> {
    match kind {
        NormKind::DzS(s) if !(s >= 0.0 && s.is_finite()) => Err(SpectralError::NegativeOrder(s)),
        _ => Ok(()),
    }
}

fn weighted_sum(coeffs: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::default())
        .map(|(i, c)| weight(i) * c.norm_sqr())
        .sum::<Compensated>()
        .value()
}

fn dz_weight(k3: i64, s: f64) -> f64 {
    if k3 == 0 {
        // |0|^0 = 1 so that s = 0 reproduces the L² norm
        if s == 0.0 { 1.0 } else { 0.0 }
    } else {
        (k3.unsigned_abs() as f64).powf(2.0 * s)
    }
}

impl Norm for SpectralField {
    fn norm_sq(&self, kind: NormKind) -> Result<f64, SpectralError> {
        check_order(kind)?;
        let grid = self.grid();
        let vol = grid.volume();
        let sum = match kind {
            NormKind::L2 => weighted_sum(self.coeffs(), |_| 1.0),
            NormKind::GradHL2 => {
                weighted_sum(self.coeffs(), |i| grid.horizontal_sq(grid.wavevector_at(i)))
            }
            NormKind::DzS(s) => {
                weighted_sum(self.coeffs(), |i| dz_weight(grid.wavevector_at(i).k3, s))
            }
            NormKind::SupZHL2 => return Ok(sup_z_horizontal(self)),
        };
        Ok(vol * sum)
    }
}

/// `max_z ∫ |f|² dx dy` using the horizontal trapezoid rule, which is exact
/// for the band-limited `f²`.
fn sup_z_horizontal(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let mut t = super::Transform3::collocation(grid);
    let mut phys = Vec::new();
    t.inverse_real(f.coeffs(), &mut phys);
    let area = (2.0 * std::f64::consts::PI * grid.length()).powi(2);
    let w = area / t.plane_len() as f64;
    phys.chunks_exact(t.plane_len())
        .map(|plane| w * plane.iter().map(|c| c.re * c.re).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Norms of a profile are taken over `(0, 2π)` as a function of `z` alone; the
/// horizontal gradient vanishes and the "sup" variant is `max_z |g(z)|²`.
impl Norm for MeanProfile {
    fn norm_sq(&self, kind: NormKind) -> Result<f64, SpectralError> {
        check_order(kind)?;
        let nz = self.grid().nz();
        let two_pi = 2.0 * std::f64::consts::PI;
        Ok(match kind {
            NormKind::L2 => two_pi * weighted_sum(self.coeffs(), |_| 1.0),
            NormKind::GradHL2 => 0.0,
            NormKind::DzS(s) => {
                two_pi * weighted_sum(self.coeffs(), |i| dz_weight(Grid::wavenumber(i, nz), s))
            }
            NormKind::SupZHL2 => self.values().into_iter().map(|v| v * v).fold(0.0, f64::max),
        })
    }
}
