//! Fourier representation of real periodic scalars on `[0, 2πL]² × [0, 2π]`.
//!
//! A field is stored as its coefficient cube in FFT index layout (`k3` fastest,
//! then `k2`, then `k1`) with the convention
//!
//! ```text
//! f(x, y, z) = Σ_k f̂(k) · exp(i (k1 x / L + k2 y / L + k3 z))
//! ```
//!
//! i.e. coefficients are unnormalized and the domain volume enters only through
//! the norms. Only wavevectors with `|k_i| <= n_i / 3` are retained; everything
//! else, including the Nyquist planes, is identically zero.

mod norms;
mod transform;

use std::f64::consts::PI;

pub use norms::{Norm, NormKind};
use rustfft::num_complex::Complex64;
pub(crate) use transform::fft_index;
pub use transform::Transform3;

use crate::error::SpectralError;

/// Relative tolerance used when checking Hermitian symmetry of inputs.
pub const HERMITIAN_TOL: f64 = 1e-14;

/// Tolerance on horizontal-mean coefficients of fluctuation fields.
pub const MEAN_TOL: f64 = 1e-14;

/// Integer wavevector `(k1, k2, k3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wavevector {
    pub k1: i64,
    pub k2: i64,
    pub k3: i64,
}

impl Wavevector {
    pub const fn new(k1: i64, k2: i64, k3: i64) -> Self {
        Self { k1, k2, k3 }
    }

    pub const fn neg(self) -> Self {
        Self::new(-self.k1, -self.k2, -self.k3)
    }

    /// `k1² + k2²` (integer, before scaling by `1/L²`).
    pub const fn horizontal_sq(self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    pub const fn is_horizontal_mean(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }
}

impl From<(i64, i64, i64)> for Wavevector {
    fn from((k1, k2, k3): (i64, i64, i64)) -> Self {
        Self::new(k1, k2, k3)
    }
}

/// Collocation grid and retained wavenumber set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    nz: usize,
    length: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, length: f64) -> Result<Self, SpectralError> {
        for (axis, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(SpectralError::InvalidGrid(format!(
                    "{axis} = {n}: resolution must be even and at least 4"
                )));
            }
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!("L = {length}: must be positive")));
        }
        Ok(Self { nx, ny, nz, length })
    }

    /// Cubic grid `n³`.
    pub fn cube(n: usize, length: f64) -> Result<Self, SpectralError> {
        Self::new(n, n, n, length)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Horizontal period factor `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of coefficients (= number of collocation points).
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|Ω| = (2πL)² · 2π`.
    pub fn volume(&self) -> f64 {
        let side = 2.0 * PI * self.length;
        side * side * 2.0 * PI
    }

    /// Largest retained `|k_i|` per axis (2/3 rule).
    pub fn kmax(&self) -> [usize; 3] {
        [self.nx / 3, self.ny / 3, self.nz / 3]
    }

    /// Physical grid on which products of two retained fields are alias-free
    /// on the retained set: the smallest even size exceeding `3 K`. Equal to the
    /// collocation grid unless `n` is a multiple of 6.
    pub fn product_dims(&self) -> [usize; 3] {
        self.kmax().map(|k| {
            let m = 3 * k + 1;
            m + m % 2
        })
    }

    pub fn is_retained(&self, k: Wavevector) -> bool {
        let [a, b, c] = self.kmax();
        k.k1.unsigned_abs() as usize <= a
            && k.k2.unsigned_abs() as usize <= b
            && k.k3.unsigned_abs() as usize <= c
    }

    /// Signed wavenumber stored at FFT index `i` on an axis of length `n`.
    pub fn wavenumber(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn wavevector_at(&self, index: usize) -> Wavevector {
        let i3 = index % self.nz;
        let i2 = (index / self.nz) % self.ny;
        let i1 = index / (self.ny * self.nz);
        Wavevector::new(
            Self::wavenumber(i1, self.nx),
            Self::wavenumber(i2, self.ny),
            Self::wavenumber(i3, self.nz),
        )
    }

    /// Coefficient index of `k`, if `k` is representable on this grid.
    pub fn index_of(&self, k: Wavevector) -> Option<usize> {
        let fits = |k: i64, n: usize| k.unsigned_abs() as usize <= (n - 1) / 2;
        if !(fits(k.k1, self.nx) && fits(k.k2, self.ny) && fits(k.k3, self.nz)) {
            return None;
        }
        let i1 = transform::fft_index(k.k1, self.nx);
        let i2 = transform::fft_index(k.k2, self.ny);
        let i3 = transform::fft_index(k.k3, self.nz);
        Some((i1 * self.ny + i2) * self.nz + i3)
    }

    /// All retained wavevectors in coefficient-index order.
    pub fn retained(&self) -> impl Iterator<Item = Wavevector> + '_ {
        (0..self.len()).map(|i| self.wavevector_at(i)).filter(|k| self.is_retained(*k))
    }

    pub fn retained_count(&self) -> usize {
        self.kmax().iter().map(|k| 2 * k + 1).product()
    }

    /// Horizontal wavenumber squared `(k1² + k2²) / L²`.
    pub fn horizontal_sq(&self, k: Wavevector) -> f64 {
        k.horizontal_sq() as f64 / (self.length * self.length)
    }

    /// Largest retained `(k1² + k2²) / L²`.
    pub fn max_horizontal_sq(&self) -> f64 {
        let [a, b, _] = self.kmax();
        (a * a + b * b) as f64 / (self.length * self.length)
    }

    /// Coordinates of collocation point `(i, j, l)`.
    pub fn point(&self, i: usize, j: usize, l: usize) -> [f64; 3] {
        let side = 2.0 * PI * self.length;
        [
            side * i as f64 / self.nx as f64,
            side * j as f64 / self.ny as f64,
            2.0 * PI * l as f64 / self.nz as f64,
        ]
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<(), SpectralError> {
        if self == other {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }
}

/// Coefficient cube of a real periodic scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: *grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    /// Wraps a full coefficient cube, checking length, band limit and Hermitian
    /// symmetry.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        Self::from_coeffs_within(grid, coeffs, HERMITIAN_TOL * scale)
    }

    /// As [`from_coeffs`](Self::from_coeffs) with an absolute bound on the
    /// Hermitian defect. The coefficients are kept as given.
    pub fn from_coeffs_within(grid: &Grid, coeffs: Vec<Complex64>, tol: f64) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::DimensionMismatch { expected: grid.len(), actual: coeffs.len() });
        }
        let field = Self { grid: *grid, coeffs };
        field.check_band_limited()?;
        let defect = field.hermitian_defect();
        if !(defect <= tol) {
            return Err(SpectralError::NotHermitian(defect));
        }
        Ok(field)
    }

    /// Field with the given modes; each entry also sets `-k` to the conjugate.
    pub fn from_modes<K: Into<Wavevector> + Copy>(
        grid: &Grid,
        modes: &[(K, Complex64)],
    ) -> Result<Self, SpectralError> {
        let mut field = Self::zeros(grid);
        for &(k, value) in modes {
            field.set_mode(k.into(), value)?;
        }
        Ok(field)
    }

    /// Sets `f̂(k) = value` and `f̂(-k) = conj(value)`.
    pub fn set_mode(&mut self, k: Wavevector, value: Complex64) -> Result<(), SpectralError> {
        if !self.grid.is_retained(k) {
            return Err(SpectralError::NotRetained(k));
        }
        let i = self.grid.index_of(k).expect("retained");
        let j = self.grid.index_of(k.neg()).expect("retained");
        if i == j {
            self.coeffs[i] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[i] = value;
            self.coeffs[j] = value.conj();
        }
        Ok(())
    }

    pub fn mode(&self, k: Wavevector) -> Complex64 {
        self.grid.index_of(k).map_or(Complex64::default(), |i| self.coeffs[i])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `max_k |f̂(k) - conj f̂(-k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavevector_at(i);
            let partner = match self.grid.index_of(k.neg()) {
                Some(j) => self.coeffs[j].conj(),
                // unpaired Nyquist entries must vanish
                None => Complex64::default(),
            };
            worst = worst.max((c - partner).norm());
        }
        worst
    }

    /// Replaces each pair by its Hermitian average.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid;
        for k in grid.retained() {
            let i = grid.index_of(k).expect("retained");
            let j = grid.index_of(k.neg()).expect("retained");
            if i < j {
                let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            } else if i == j {
                self.coeffs[i].im = 0.0;
            }
        }
    }

    /// Largest horizontal-mean coefficient magnitude.
    pub fn horizontal_mean_magnitude(&self) -> f64 {
        let nz = self.grid.nz;
        self.coeffs[..nz].iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Zeroes the `k1 = k2 = 0` column.
    pub fn remove_horizontal_mean(&mut self) {
        let nz = self.grid.nz;
        self.coeffs[..nz].iter_mut().for_each(|c| *c = Complex64::default());
    }

    /// Rejects fields with a horizontal-mean coefficient above [`MEAN_TOL`]
    /// (relative to the largest coefficient, absolute for tiny fields).
    pub fn ensure_zero_horizontal_mean(&self) -> Result<(), SpectralError> {
        let mean = self.horizontal_mean_magnitude();
        let scale = self.max_abs().max(1.0);
        if mean > MEAN_TOL * scale {
            let nz = self.grid.nz;
            let i = (0..nz).max_by(|&a, &b| self.coeffs[a].norm().total_cmp(&self.coeffs[b].norm()));
            let k = self.grid.wavevector_at(i.unwrap_or(0));
            return Err(SpectralError::NonzeroHorizontalMean { k, magnitude: mean });
        }
        Ok(())
    }

    fn check_band_limited(&self) -> Result<(), SpectralError> {
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavevector_at(i);
            if !self.grid.is_retained(k) && *c != Complex64::default() {
                return Err(SpectralError::NotRetained(k));
            }
        }
        Ok(())
    }

    /// Applies `f̂(k) -> m(k) f̂(k)` on the retained set. `m` must satisfy
    /// `m(-k) = conj m(k)` wherever it matters, so the result stays real.
    pub fn apply_multiplier(
        &self,
        m: impl Fn(Wavevector) -> Complex64,
    ) -> Result<SpectralField, SpectralError> {
        let mut out = Self::zeros(&self.grid);
        for k in self.grid.retained() {
            let mk = m(k);
            let mneg = m(k.neg());
            let scale = mk.norm().max(mneg.norm()).max(1.0);
            if !(mk.re.is_finite() && mk.im.is_finite()) || (mneg.conj() - mk).norm() > HERMITIAN_TOL * scale {
                return Err(SpectralError::NonHermitianMultiplier(k));
            }
            let i = self.grid.index_of(k).expect("retained");
            out.coeffs[i] = mk * self.coeffs[i];
        }
        Ok(out)
    }

    /// Same as [`apply_multiplier`](Self::apply_multiplier) for a real, even
    /// multiplier; no symmetry check is needed.
    pub(crate) fn apply_real_even(&self, m: impl Fn(Wavevector) -> f64) -> SpectralField {
        let mut out = Self::zeros(&self.grid);
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != Complex64::default() {
                out.coeffs[i] = c * m(self.grid.wavevector_at(i));
            }
        }
        out
    }

    pub fn dx(&self) -> SpectralField {
        let l = self.grid.length;
        self.apply_multiplier(|k| Complex64::new(0.0, k.k1 as f64 / l)).expect("odd multiplier")
    }

    pub fn dy(&self) -> SpectralField {
        let l = self.grid.length;
        self.apply_multiplier(|k| Complex64::new(0.0, k.k2 as f64 / l)).expect("odd multiplier")
    }

    pub fn dz(&self) -> SpectralField {
        self.apply_multiplier(|k| Complex64::new(0.0, k.k3 as f64)).expect("odd multiplier")
    }

    /// Horizontal Laplacian `Δ_h`.
    pub fn laplacian_h(&self) -> SpectralField {
        let grid = self.grid;
        self.apply_real_even(|k| -grid.horizontal_sq(k))
    }

    /// `Δ_h⁻¹` on the zero-horizontal-mean subspace.
    pub fn inverse_horizontal_laplacian(&self) -> Result<SpectralField, SpectralError> {
        self.ensure_zero_horizontal_mean()?;
        let grid = self.grid;
        Ok(self.apply_real_even(|k| {
            if k.is_horizontal_mean() {
                0.0
            } else {
                -1.0 / grid.horizontal_sq(k)
            }
        }))
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.add(&other.scale(-1.0))
    }

    /// `∫_Ω f g`, via Parseval.
    pub fn inner(&self, other: &SpectralField) -> Result<f64, SpectralError> {
        self.grid.ensure_same(&other.grid)?;
        let sum: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        Ok(self.grid.volume() * sum)
    }

    /// Samples on the `nx × ny × nz` collocation grid, `x` slowest and `z` fastest.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut t = Transform3::collocation(&self.grid);
        let mut phys = Vec::new();
        t.inverse_real(&self.coeffs, &mut phys);
        let [nx, ny, nz] = self.grid.dims();
        let mut out = Vec::with_capacity(self.grid.len());
        for i in 0..nx {
            for j in 0..ny {
                for l in 0..nz {
                    out.push(phys[t.phys_index(i, j, l)].re);
                }
            }
        }
        out
    }

    /// Coefficients of real samples (same layout as [`to_physical`](Self::to_physical)),
    /// truncated to the retained set.
    pub fn to_spectral(grid: &Grid, samples: &[f64]) -> Result<SpectralField, SpectralError> {
        if samples.len() != grid.len() {
            return Err(SpectralError::DimensionMismatch { expected: grid.len(), actual: samples.len() });
        }
        let mut t = Transform3::collocation(grid);
        let [nx, ny, nz] = grid.dims();
        let mut phys = vec![Complex64::default(); grid.len()];
        for i in 0..nx {
            for j in 0..ny {
                for l in 0..nz {
                    phys[t.phys_index(i, j, l)] = Complex64::new(samples[(i * ny + j) * nz + l], 0.0);
                }
            }
        }
        let mut field = Self::zeros(grid);
        t.forward_real(&mut phys, &mut field.coeffs, 1.0);
        field.enforce_hermitian();
        Ok(field)
    }

    /// Samples a closure on the collocation grid and projects it.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> SpectralField {
        let [nx, ny, nz] = grid.dims();
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..nx {
            for j in 0..ny {
                for l in 0..nz {
                    let [x, y, z] = grid.point(i, j, l);
                    samples.push(f(x, y, z));
                }
            }
        }
        Self::to_spectral(grid, &samples).expect("sample count matches grid")
    }

    /// Retained part of the product `f g`, free of aliasing.
    pub fn dealias_product(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.grid.ensure_same(&other.grid)?;
        let mut t = Transform3::product(&self.grid);
        let mut phys = Vec::new();
        t.inverse_pair(&self.coeffs, &other.coeffs, &mut phys);
        phys.iter_mut().for_each(|c| *c = Complex64::new(c.re * c.im, 0.0));
        let mut out = Self::zeros(&self.grid);
        t.forward_real(&mut phys, &mut out.coeffs, 1.0);
        out.enforce_hermitian();
        Ok(out)
    }

    /// Horizontal mean as a function of `z` (the `k1 = k2 = 0` column).
    pub fn horizontal_mean(&self) -> MeanProfile {
        MeanProfile { grid: self.grid, coeffs: self.coeffs[..self.grid.nz].to_vec() }
    }

    /// Extends a `z`-only profile to a 3D field constant in `x` and `y`.
    pub fn from_profile(profile: &MeanProfile) -> SpectralField {
        let mut out = Self::zeros(&profile.grid);
        out.coeffs[..profile.grid.nz].copy_from_slice(&profile.coeffs);
        out
    }
}

/// Real periodic function of `z` alone, stored by its `k3` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanProfile {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl MeanProfile {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: *grid, coeffs: vec![Complex64::default(); grid.nz] }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.nz {
            return Err(SpectralError::DimensionMismatch { expected: grid.nz, actual: coeffs.len() });
        }
        Ok(Self { grid: *grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of `exp(i k3 z)`.
    pub fn mode(&self, k3: i64) -> Complex64 {
        let nz = self.grid.nz;
        if k3.unsigned_abs() as usize > (nz - 1) / 2 {
            return Complex64::default();
        }
        self.coeffs[transform::fft_index(k3, nz)]
    }

    pub fn set_mode(&mut self, k3: i64, value: Complex64) -> Result<(), SpectralError> {
        let k = Wavevector::new(0, 0, k3);
        if !self.grid.is_retained(k) {
            return Err(SpectralError::NotRetained(k));
        }
        let nz = self.grid.nz;
        if k3 == 0 {
            self.coeffs[0] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[transform::fft_index(k3, nz)] = value;
            self.coeffs[transform::fft_index(-k3, nz)] = value.conj();
        }
        Ok(())
    }

    /// `z`-average (the `k3 = 0` coefficient).
    pub fn average(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Applies `ĝ(k3) -> m(k3) ĝ(k3)`.
    pub fn map_modes(&self, m: impl Fn(i64) -> Complex64) -> MeanProfile {
        let nz = self.grid.nz;
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if *c != Complex64::default() {
                *c *= m(Grid::wavenumber(i, nz));
            }
        }
        out
    }

    pub fn dz(&self) -> MeanProfile {
        self.map_modes(|k3| Complex64::new(0.0, k3 as f64))
    }

    /// Values at the `nz` collocation heights.
    pub fn values(&self) -> Vec<f64> {
        let nz = self.grid.nz;
        (0..nz)
            .map(|l| {
                let z = 2.0 * PI * l as f64 / nz as f64;
                self.eval(z)
            })
            .collect()
    }

    /// Pointwise evaluation of the Fourier sum.
    pub fn eval(&self, z: f64) -> f64 {
        let nz = self.grid.nz;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(|(i, c)| {
                let k3 = Grid::wavenumber(i, nz) as f64;
                (c * Complex64::from_polar(1.0, k3 * z)).re
            })
            .sum()
    }
}
