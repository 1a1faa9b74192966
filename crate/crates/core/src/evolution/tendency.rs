use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::diagnostic::{FlowMultipliers, PhysParams};
use crate::error::SpectralError;
use crate::numeric::Compensated;
use crate::spectral::{Grid, MeanProfile, SpectralField, Transform3};

/// Precomputed data for one retained wavevector with `k1² + k2² ≠ 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModeEntry {
    pub index: usize,
    /// Coefficient index of `-k`.
    pub partner: usize,
    /// `(k1² + k2²) / L²`
    pub kh2: f64,
    pub kx: f64,
    pub ky: f64,
    pub flow: FlowMultipliers,
}

pub(crate) fn mode_table(grid: &Grid, params: &PhysParams) -> Vec<ModeEntry> {
    let l = grid.length();
    grid.retained()
        .filter(|k| !k.is_horizontal_mean())
        .map(|k| ModeEntry {
            index: grid.index_of(k).expect("retained"),
            partner: grid.index_of(k.neg()).expect("retained"),
            kh2: grid.horizontal_sq(k),
            kx: k.k1 as f64 / l,
            ky: k.k2 as f64 / l,
            flow: FlowMultipliers::at(k, params.rayleigh(), l).expect("k_h nonzero"),
        })
        .collect()
}

/// What one tendency evaluation learned besides the tendency itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageInfo {
    /// `‖∇_h θ'‖² + 4π²L² ∫ |∂_z θ̄|² dz`, the instantaneous energy loss rate.
    pub dissipation: f64,
    pub max_abs_u: f64,
    pub max_abs_v: f64,
}

/// Buffers and FFT plans for repeated evaluation of the nonlinear terms.
pub struct TendencyWorkspace {
    grid: Grid,
    params: PhysParams,
    modes: Vec<ModeEntry>,
    transform: Transform3,
    z_forward: Arc<dyn Fft<f64>>,
    z_inverse: Arc<dyn Fft<f64>>,
    w: Vec<Complex64>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
    tx: Vec<Complex64>,
    ty: Vec<Complex64>,
    theta_w: Vec<Complex64>,
    uv: Vec<Complex64>,
    grad_theta: Vec<Complex64>,
    column: Vec<Complex64>,
    z_scratch: Vec<Complex64>,
    grad: MeanProfile,
    flux: MeanProfile,
}

impl TendencyWorkspace {
    pub fn new(grid: &Grid, params: &PhysParams) -> Self {
        let transform = Transform3::product(grid);
        let m3 = transform.dims()[2];
        let mut planner = FftPlanner::new();
        let z_forward = planner.plan_fft_forward(m3);
        let z_inverse = planner.plan_fft_inverse(m3);
        let scratch = z_forward.get_inplace_scratch_len().max(z_inverse.get_inplace_scratch_len());
        let zeros = || vec![Complex64::default(); grid.len()];
        Self {
            grid: *grid,
            params: *params,
            modes: mode_table(grid, params),
            transform,
            z_forward,
            z_inverse,
            w: zeros(),
            u: zeros(),
            v: zeros(),
            tx: zeros(),
            ty: zeros(),
            theta_w: Vec::new(),
            uv: Vec::new(),
            grad_theta: Vec::new(),
            column: vec![Complex64::default(); m3],
            z_scratch: vec![Complex64::default(); scratch],
            grad: MeanProfile::zeros(grid),
            flux: MeanProfile::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub(crate) fn modes(&self) -> &[ModeEntry] {
        &self.modes
    }

    /// `⟨θ'w⟩` of the most recent evaluation.
    pub fn flux(&self) -> &MeanProfile {
        &self.flux
    }

    /// `∂_z θ̄` of the most recent evaluation.
    pub fn mean_gradient(&self) -> &MeanProfile {
        &self.grad
    }

    /// Writes `-P(u·∇_h θ') - P(w ∂_z θ̄)` into `out` (coefficient layout).
    ///
    /// `theta` must vanish on the horizontal-mean column; this is not checked.
    /// Entries of `out` outside the retained set are not written and must
    /// already be zero.
    pub fn nonlinear(&mut self, theta: &[Complex64], out: &mut [Complex64]) -> StageInfo {
        let i = Complex64::new(0.0, 1.0);
        for m in &self.modes {
            let t = theta[m.index];
            self.w[m.index] = t * m.flow.w;
            self.u[m.index] = t * m.flow.u;
            self.v[m.index] = t * m.flow.v;
            self.tx[m.index] = i * t * m.kx;
            self.ty[m.index] = i * t * m.ky;
        }
        self.transform.inverse_pair(theta, &self.w, &mut self.theta_w);
        self.transform.inverse_pair(&self.u, &self.v, &mut self.uv);
        self.transform.inverse_pair(&self.tx, &self.ty, &mut self.grad_theta);

        let mean_sq = self.update_mean_profiles();

        let plane = self.transform.plane_len();
        let mut max_u = 0.0_f64;
        let mut max_v = 0.0_f64;
        // reuse theta_w as the buffer for the real nonlinear term
        for (iz, ((tw, uv), gt)) in self
            .theta_w
            .chunks_exact_mut(plane)
            .zip(self.uv.chunks_exact(plane))
            .zip(self.grad_theta.chunks_exact(plane))
            .enumerate()
        {
            let g = self.column[iz].re;
            for ((tw, uv), gt) in tw.iter_mut().zip(uv).zip(gt) {
                max_u = max_u.max(uv.re.abs());
                max_v = max_v.max(uv.im.abs());
                *tw = Complex64::new(uv.re * gt.re + uv.im * gt.im + tw.im * g, 0.0);
            }
        }
        self.transform.forward_real(&mut self.theta_w, out, -1.0);
        let nz = self.grid.nz();
        out[..nz].iter_mut().for_each(|c| *c = Complex64::default());

        let grad_sq = self.modes.iter().map(|m| m.kh2 * theta[m.index].norm_sqr()).sum::<Compensated>().value();
        let l = self.grid.length();
        StageInfo {
            dissipation: self.grid.volume() * grad_sq + 4.0 * PI * PI * l * l * mean_sq,
            max_abs_u: max_u,
            max_abs_v: max_v,
        }
    }

    /// Flux and gradient profiles from the physical `θ' + i w` held in
    /// `theta_w`; leaves `∂_z θ̄` sampled on the product grid in `column`.
    /// Returns `∫ |∂_z θ̄|² dz`.
    fn update_mean_profiles(&mut self) -> f64 {
        let m3 = self.transform.dims()[2];
        let plane = self.transform.plane_len();
        let col = &mut self.column;
        for (acc, tw) in col.iter_mut().zip(self.theta_w.chunks_exact(plane)) {
            let sum: f64 = tw.iter().map(|c| c.re * c.im).sum();
            *acc = Complex64::new(sum / plane as f64, 0.0);
        }
        self.z_forward.process_with_scratch(col, &mut self.z_scratch);

        let nz = self.grid.nz();
        let kz = self.grid.kmax()[2] as i64;
        let flux = self.flux.coeffs_mut();
        flux.iter_mut().for_each(|c| *c = Complex64::default());
        let scale = 1.0 / m3 as f64;
        for k3 in -kz..=kz {
            let src = k3.rem_euclid(m3 as i64) as usize;
            let dst = k3.rem_euclid(nz as i64) as usize;
            flux[dst] = col[src] * scale;
        }
        // exact Hermitian pairing of the profile
        for k3 in 1..=kz {
            let a = k3 as usize;
            let b = (nz as i64 - k3) as usize;
            let avg = (flux[a] + flux[b].conj()) * 0.5;
            flux[a] = avg;
            flux[b] = avg.conj();
        }
        flux[0].im = 0.0;

        let grad = self.grad.coeffs_mut();
        grad.copy_from_slice(self.flux.coeffs());
        grad[0] = Complex64::default();

        col.iter_mut().for_each(|c| *c = Complex64::default());
        let mut sum = 0.0;
        for k3 in -kz..=kz {
            let g = grad[k3.rem_euclid(nz as i64) as usize];
            col[k3.rem_euclid(m3 as i64) as usize] = g;
            sum += g.norm_sqr();
        }
        self.z_inverse.process_with_scratch(col, &mut self.z_scratch);
        2.0 * PI * sum
    }

    /// Physical-space horizontal mean flux for `theta` without evaluating the
    /// full tendency.
    pub fn update_flux(&mut self, theta: &[Complex64]) -> &MeanProfile {
        for m in &self.modes {
            self.w[m.index] = theta[m.index] * m.flow.w;
        }
        self.transform.inverse_pair(theta, &self.w, &mut self.theta_w);
        self.update_mean_profiles();
        &self.flux
    }
}

/// Full right-hand side `-P(u·∇_h θ') - P(w ∂_z θ̄) + Δ_h θ'`.
pub fn tendency(theta: &SpectralField, params: &PhysParams) -> Result<SpectralField, SpectralError> {
    theta.ensure_zero_horizontal_mean()?;
    let grid = *theta.grid();
    let mut ws = TendencyWorkspace::new(&grid, params);
    let mut out = SpectralField::zeros(&grid);
    ws.nonlinear(theta.coeffs(), out.coeffs_mut());
    let coeffs = out.coeffs_mut();
    for m in ws.modes() {
        coeffs[m.index] -= theta.coeffs()[m.index] * m.kh2;
    }
    out.enforce_hermitian();
    Ok(out)
}

/// Dealiased `u·∇_h θ'` on its own, as used in the skew-symmetry check.
pub fn advection(theta: &SpectralField, params: &PhysParams) -> Result<SpectralField, SpectralError> {
    let flow = crate::diagnostic::solve_flow(theta, params)?;
    let ux = flow.u.dealias_product(&theta.dx())?;
    let vy = flow.v.dealias_product(&theta.dy())?;
    ux.add(&vy)
}
