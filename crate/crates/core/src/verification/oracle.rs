//! Brute-force reference implementations.
//!
//! Every quadratic term is a direct convolution over the retained set, and the
//! velocity of each mode comes from solving the momentum matrix by Cramer's
//! rule. No FFT, no precomputed multiplier is shared with the fast path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::diagnostic::{solve_mode_literal, PhysParams};
use crate::error::VerificationError;
use crate::evolution::tendency;
use crate::spectral::{Grid, MeanProfile, Norm, NormKind, SpectralField, Wavevector};

/// Largest resolution per axis accepted by the dense oracles.
pub const ORACLE_MAX_N: usize = 16;

fn guard(grid: &Grid) -> Result<(), VerificationError> {
    let [nx, ny, nz] = grid.dims();
    if nx.max(ny).max(nz) > ORACLE_MAX_N {
        return Err(VerificationError::GridTooLarge(nx, ny, nz));
    }
    Ok(())
}

fn retained_list(grid: &Grid) -> Vec<(Wavevector, usize)> {
    grid.retained().map(|k| (k, grid.index_of(k).expect("retained"))).collect()
}

fn sub(a: Wavevector, b: Wavevector) -> Wavevector {
    Wavevector::new(a.k1 - b.k1, a.k2 - b.k2, a.k3 - b.k3)
}

/// Retained part of `f g` by direct convolution.
pub fn dense_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField, VerificationError> {
    let grid = *f.grid();
    if grid != *g.grid() {
        return Err(crate::error::SpectralError::GridMismatch.into());
    }
    guard(&grid)?;
    let modes = retained_list(&grid);
    let mut out = SpectralField::zeros(&grid);
    for &(k, ik) in &modes {
        let mut acc = Complex64::default();
        for &(p, ip) in &modes {
            let q = sub(k, p);
            if grid.is_retained(q) {
                acc += f.coeffs()[ip] * g.coeffs()[grid.index_of(q).expect("retained")];
            }
        }
        out.coeffs_mut()[ik] = acc;
    }
    Ok(out)
}

/// The pieces of the tendency as computed by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTerms {
    /// `P(u·∇_h θ')`
    pub advection: SpectralField,
    /// `P(w ∂_z θ̄)`
    pub mean_forcing: SpectralField,
    /// `⟨θ'w⟩`
    pub flux: MeanProfile,
    /// `-P(u·∇_h θ') - P(w ∂_z θ̄) + Δ_h θ'`
    pub tendency: SpectralField,
}

pub fn oracle_terms(theta: &SpectralField, params: &PhysParams) -> Result<OracleTerms, VerificationError> {
    let grid = *theta.grid();
    guard(&grid)?;
    theta.ensure_zero_horizontal_mean()?;
    let l = grid.length();
    let modes = retained_list(&grid);
    let n = grid.len();
    let (mut u, mut v, mut w) = (vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]);
    let (mut tx, mut ty) = (vec![Complex64::default(); n], vec![Complex64::default(); n]);
    let i = Complex64::new(0.0, 1.0);
    for &(k, ik) in &modes {
        let t = theta.coeffs()[ik];
        if k.is_horizontal_mean() || t == Complex64::default() {
            continue;
        }
        let [psi, wk] = solve_mode_literal(k, t, params.rayleigh(), l);
        let (kx, ky) = (k.k1 as f64 / l, k.k2 as f64 / l);
        // (u, v) = (-ψ_y, ψ_x)
        u[ik] = -(i * ky) * psi;
        v[ik] = (i * kx) * psi;
        w[ik] = wk;
        tx[ik] = i * kx * t;
        ty[ik] = i * ky * t;
    }

    let index = |k: Wavevector| grid.index_of(k).expect("retained");
    let mut advection = SpectralField::zeros(&grid);
    for &(k, ik) in &modes {
        let mut acc = Complex64::default();
        for &(p, ip) in &modes {
            let q = sub(k, p);
            if grid.is_retained(q) {
                let iq = index(q);
                acc += u[ip] * tx[iq] + v[ip] * ty[iq];
            }
        }
        advection.coeffs_mut()[ik] = acc;
    }

    let kz = grid.kmax()[2] as i64;
    let mut flux = MeanProfile::zeros(&grid);
    for k3 in -kz..=kz {
        let target = Wavevector::new(0, 0, k3);
        let mut acc = Complex64::default();
        for &(p, ip) in &modes {
            let q = sub(target, p);
            if grid.is_retained(q) {
                acc += theta.coeffs()[ip] * w[index(q)];
            }
        }
        flux.coeffs_mut()[crate::spectral::fft_index(k3, grid.nz())] = acc;
    }

    let mut mean_forcing = SpectralField::zeros(&grid);
    for &(k, ik) in &modes {
        let mut acc = Complex64::default();
        for j3 in -kz..=kz {
            if j3 == 0 {
                continue;
            }
            let q = Wavevector::new(k.k1, k.k2, k.k3 - j3);
            if grid.is_retained(q) {
                acc += w[index(q)] * flux.mode(j3);
            }
        }
        mean_forcing.coeffs_mut()[ik] = acc;
    }

    let mut tendency = SpectralField::zeros(&grid);
    for &(k, ik) in &modes {
        if k.is_horizontal_mean() {
            continue;
        }
        tendency.coeffs_mut()[ik] = -advection.coeffs()[ik] - mean_forcing.coeffs()[ik]
            - theta.coeffs()[ik] * grid.horizontal_sq(k);
    }
    Ok(OracleTerms { advection, mean_forcing, flux, tendency })
}

/// Dense reference for the full right-hand side.
pub fn oracle_tendency(theta: &SpectralField, params: &PhysParams) -> Result<SpectralField, VerificationError> {
    Ok(oracle_terms(theta, params)?.tendency)
}

/// `‖a − b‖₂ / ‖b‖₂`, or `‖a‖₂` when `b = 0`.
pub fn relative_deviation(a: &SpectralField, b: &SpectralField) -> Result<f64, VerificationError> {
    let diff = a.sub(b)?.norm(NormKind::L2)?;
    let scale = b.norm(NormKind::L2)?;
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// Gaussian coefficients with unit variance on every retained wavevector
/// outside the horizontal-mean column, scaled by `amplitude`.
pub fn random_retained(grid: &Grid, seed: u64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zeros(grid);
    for k in grid.retained().collect::<Vec<_>>() {
        if k.is_horizontal_mean() || (k.k1, k.k2, k.k3) < (-k.k1, -k.k2, -k.k3) {
            continue;
        }
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        field.set_mode(k, Complex64::new(re, im) * amplitude).expect("retained");
    }
    field
}

/// Largest relative deviation between the fast tendency and the oracle over
/// `seeds` random fields.
pub fn oracle_gate(grid: &Grid, params: &PhysParams, seeds: u64) -> Result<f64, VerificationError> {
    let mut worst = 0.0_f64;
    for seed in 0..seeds {
        let theta = random_retained(grid, seed, 1.0);
        let fast = tendency(&theta, params)?;
        let slow = oracle_tendency(&theta, params)?;
        worst = worst.max(relative_deviation(&fast, &slow)?);
    }
    Ok(worst)
}
