//! Instantaneous diagnosis of the flow from the temperature fluctuation.
//!
//! At infinite Prandtl number the momentum balance is linear and has no time
//! derivative, so for every wavevector with `k1² + k2² ≠ 0` the pair
//! `(ψ̂, ŵ)` solves
//!
//! ```text
//! [  i k3     a   ] [ψ̂]        [θ̂']
//! [ -a²    -i k3  ] [ŵ]  = Ra  [ 0 ],     a = (k1² + k2²) / L²,
//! ```
//!
//! whose determinant `D = k3² + a³` is strictly positive.

use rustfft::num_complex::Complex64;

use crate::error::{ParamError, SpectralError};
use crate::spectral::{Grid, Norm, NormKind, SpectralField, Wavevector};

/// Guard used in relative residuals.
pub const EPS_GUARD: f64 = 1e-300;

/// Physical control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    rayleigh: f64,
    length: f64,
}

impl PhysParams {
    pub fn new(rayleigh: f64, length: f64) -> Result<Self, ParamError> {
        if !(rayleigh.is_finite() && rayleigh > 0.0) {
            return Err(ParamError::Rayleigh(rayleigh));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(ParamError::Length(length));
        }
        Ok(Self { rayleigh, length })
    }

    pub fn rayleigh(&self) -> f64 {
        self.rayleigh
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// Per-mode response of the flow to a unit temperature coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMultipliers {
    /// `ψ̂ / θ̂'` (purely imaginary)
    pub psi: Complex64,
    /// `ŵ / θ̂'`
    pub w: f64,
    /// `û / θ̂'`
    pub u: f64,
    /// `v̂ / θ̂'`
    pub v: f64,
    /// `ω̂ / θ̂'`
    pub omega: Complex64,
}

impl FlowMultipliers {
    /// Closed-form multipliers; `None` on the horizontal-mean column, where
    /// every diagnosed field vanishes.
    pub fn at(k: Wavevector, rayleigh: f64, length: f64) -> Option<Self> {
        if k.is_horizontal_mean() {
            return None;
        }
        let a = k.horizontal_sq() as f64 / (length * length);
        let k3 = k.k3 as f64;
        let det = k3 * k3 + a * a * a;
        let psi = Complex64::new(0.0, -rayleigh * k3 / det);
        Some(Self {
            psi,
            w: rayleigh * a * a / det,
            u: -rayleigh * (k.k2 as f64 / length) * k3 / det,
            v: rayleigh * (k.k1 as f64 / length) * k3 / det,
            omega: psi * -a,
        })
    }
}

/// Solves a 2×2 complex system by Cramer's rule.
pub fn solve_2x2(m: [[Complex64; 2]; 2], rhs: [Complex64; 2]) -> [Complex64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det,
    ]
}

/// `(ψ̂, ŵ)` for one mode obtained by inverting the momentum matrix literally.
pub fn solve_mode_literal(k: Wavevector, theta: Complex64, rayleigh: f64, length: f64) -> [Complex64; 2] {
    let a = k.horizontal_sq() as f64 / (length * length);
    let ik3 = Complex64::new(0.0, k.k3 as f64);
    let m = [[ik3, Complex64::new(a, 0.0)], [Complex64::new(-a * a, 0.0), -ik3]];
    solve_2x2(m, [theta * rayleigh, Complex64::default()])
}

/// Largest relative deviation between the closed-form multipliers and the
/// literal matrix inversion over the retained set of `grid`.
pub fn multiplier_crosscheck(grid: &Grid, params: &PhysParams) -> f64 {
    let mut worst = 0.0_f64;
    for k in grid.retained().filter(|k| !k.is_horizontal_mean()) {
        let closed = FlowMultipliers::at(k, params.rayleigh, params.length).expect("nonzero k_h");
        let [psi, w] = solve_mode_literal(k, Complex64::new(1.0, 0.0), params.rayleigh, params.length);
        let scale = closed.psi.norm().max(closed.w.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((psi - closed.psi).norm() / scale);
        worst = worst.max((w - closed.w).norm() / scale);
    }
    worst
}

/// Stream function, horizontal velocity, vertical velocity and vorticity.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosedFlow {
    pub psi: SpectralField,
    pub u: SpectralField,
    pub v: SpectralField,
    pub w: SpectralField,
    pub omega: SpectralField,
}

impl DiagnosedFlow {
    /// `max_k |(k1 û + k2 v̂) / L|`.
    pub fn divergence_defect(&self) -> f64 {
        let grid = self.u.grid();
        let l = grid.length();
        let mut worst = 0.0_f64;
        for (i, (u, v)) in self.u.coeffs().iter().zip(self.v.coeffs()).enumerate() {
            let k = grid.wavevector_at(i);
            worst = worst.max((u * (k.k1 as f64 / l) + v * (k.k2 as f64 / l)).norm());
        }
        worst
    }
}

/// Diagnoses `(ψ, u, v, w, ω)` from `θ'`.
pub fn solve_flow(theta: &SpectralField, params: &PhysParams) -> Result<DiagnosedFlow, SpectralError> {
    theta.ensure_zero_horizontal_mean()?;
    let grid = *theta.grid();
    let mut flow = DiagnosedFlow {
        psi: SpectralField::zeros(&grid),
        u: SpectralField::zeros(&grid),
        v: SpectralField::zeros(&grid),
        w: SpectralField::zeros(&grid),
        omega: SpectralField::zeros(&grid),
    };
    for (i, t) in theta.coeffs().iter().enumerate() {
        if *t == Complex64::default() {
            continue;
        }
        let k = grid.wavevector_at(i);
        let Some(m) = FlowMultipliers::at(k, params.rayleigh, grid.length()) else {
            continue;
        };
        flow.psi.coeffs_mut()[i] = m.psi * t;
        flow.u.coeffs_mut()[i] = t * m.u;
        flow.v.coeffs_mut()[i] = t * m.v;
        flow.w.coeffs_mut()[i] = t * m.w;
        flow.omega.coeffs_mut()[i] = m.omega * t;
    }
    #[cfg(debug_assertions)]
    {
        let dev = multiplier_crosscheck(&grid, params);
        debug_assert!(dev <= 1e-14, "closed-form multipliers deviate from matrix inverse by {dev:e}");
    }
    Ok(flow)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den.max(EPS_GUARD)
    }
}

/// Relative residuals of the two momentum equations,
/// `ψ_z = Ra θ' + Δ_h w` and `-w_z = Δ_h ω`.
pub fn residual_momentum(
    flow: &DiagnosedFlow,
    theta: &SpectralField,
    params: &PhysParams,
) -> Result<(f64, f64), SpectralError> {
    let ra = params.rayleigh;
    let forcing = theta.scale(ra);
    let r1 = flow.psi.dz().sub(&forcing)?.sub(&flow.w.laplacian_h())?;
    let wz = flow.w.dz();
    let r2 = wz.scale(-1.0).sub(&flow.omega.laplacian_h())?;
    Ok((
        ratio(r1.norm(NormKind::L2)?, forcing.norm(NormKind::L2)?),
        ratio(r2.norm(NormKind::L2)?, wz.norm(NormKind::L2)?),
    ))
}

/// The six sharp a priori ratios; each is `≤ 1` for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriRatios {
    /// `‖Δ_h u‖ / (Ra ‖θ'‖)`
    pub lap_h_u: f64,
    /// `‖∂_z u‖ / (Ra ‖∇_h θ'‖)`
    pub dz_u: f64,
    /// `‖∂_z^{2/3} u‖ / (Ra ‖θ'‖)`
    pub dz23_u: f64,
    /// `‖Δ_h w‖ / (Ra ‖θ'‖)`
    pub lap_h_w: f64,
    /// `‖∂_z w‖ / (Ra ‖∇_h θ'‖)`
    pub dz_w: f64,
    /// `‖∂_z^{2/3} w‖ / (Ra ‖θ'‖)`
    pub dz23_w: f64,
}

impl AprioriRatios {
    pub fn as_array(&self) -> [f64; 6] {
        [self.lap_h_u, self.dz_u, self.dz23_u, self.lap_h_w, self.dz_w, self.dz23_w]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

pub fn apriori_ratios(
    flow: &DiagnosedFlow,
    theta: &SpectralField,
    params: &PhysParams,
) -> Result<AprioriRatios, SpectralError> {
    let ra = params.rayleigh;
    let theta_l2 = ra * theta.norm(NormKind::L2)?;
    let theta_h1 = ra * theta.norm(NormKind::GradHL2)?;
    let pair = |a: &SpectralField, b: &SpectralField, kind: NormKind| -> Result<f64, SpectralError> {
        Ok((a.norm_sq(kind)? + b.norm_sq(kind)?).sqrt())
    };
    let two_thirds = NormKind::DzS(2.0 / 3.0);
    let (u, v, w) = (&flow.u, &flow.v, &flow.w);
    Ok(AprioriRatios {
        lap_h_u: ratio(pair(&u.laplacian_h(), &v.laplacian_h(), NormKind::L2)?, theta_l2),
        dz_u: ratio(pair(&u.dz(), &v.dz(), NormKind::L2)?, theta_h1),
        dz23_u: ratio(pair(u, v, two_thirds)?, theta_l2),
        lap_h_w: ratio(w.laplacian_h().norm(NormKind::L2)?, theta_l2),
        dz_w: ratio(w.dz().norm(NormKind::L2)?, theta_h1),
        dz23_w: ratio(w.norm(two_thirds)?, theta_l2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn unit() -> PhysParams {
        PhysParams::new(1.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PhysParams::new(0.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, -1.0).is_err());
        assert!(PhysParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn tilted_mode_matches_hand_values() {
        // θ' = cos(x + z): D = 2 at k = (1, 0, 1)
        let grid = Grid::cube(8, 1.0).unwrap();
        let theta = SpectralField::from_modes(&grid, &[((1, 0, 1), c(0.5, 0.0))]).unwrap();
        let flow = solve_flow(&theta, &unit()).unwrap();
        let k = Wavevector::new(1, 0, 1);
        assert!((flow.w.mode(k) - c(0.25, 0.0)).norm() < 1e-15);
        // ψ = ½ sin(x+z) => ψ̂(k) = -i/4
        assert!((flow.psi.mode(k) - c(0.0, -0.25)).norm() < 1e-15);
        assert_eq!(flow.u.max_abs(), 0.0);
        assert!((flow.v.mode(k) - c(0.25, 0.0)).norm() < 1e-15);
        assert!((flow.omega.mode(k) - c(0.0, 0.25)).norm() < 1e-15);
    }

    #[test]
    fn product_mode_matches_hand_values() {
        // θ' = cos x cos z
        let grid = Grid::cube(8, 1.0).unwrap();
        let theta = SpectralField::from_fn(&grid, |x, _, z| x.cos() * z.cos());
        let flow = solve_flow(&theta, &unit()).unwrap();
        let w = SpectralField::from_fn(&grid, |x, _, z| 0.5 * x.cos() * z.cos());
        let psi = SpectralField::from_fn(&grid, |x, _, z| 0.5 * x.cos() * z.sin());
        let v = SpectralField::from_fn(&grid, |x, _, z| -0.5 * x.sin() * z.sin());
        assert!(flow.w.sub(&w).unwrap().max_abs() < 1e-15);
        assert!(flow.psi.sub(&psi).unwrap().max_abs() < 1e-15);
        assert!(flow.v.sub(&v).unwrap().max_abs() < 1e-15);
        assert!(flow.u.max_abs() < 1e-15);
    }

    #[test]
    fn zero_input_gives_zero_flow() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let theta = SpectralField::zeros(&grid);
        let flow = solve_flow(&theta, &unit()).unwrap();
        for f in [&flow.psi, &flow.u, &flow.v, &flow.w, &flow.omega] {
            assert_eq!(f.max_abs(), 0.0);
        }
        assert_eq!(residual_momentum(&flow, &theta, &unit()).unwrap(), (0.0, 0.0));
        assert_eq!(apriori_ratios(&flow, &theta, &unit()).unwrap().max(), 0.0);
    }

    #[test]
    fn rejects_horizontal_mean() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let theta = SpectralField::from_modes(&grid, &[((0, 0, 1), c(0.5, 0.0))]).unwrap();
        assert!(matches!(
            solve_flow(&theta, &unit()),
            Err(SpectralError::NonzeroHorizontalMean { .. })
        ));
    }

    #[test]
    fn perturbed_w_is_detected() {
        // θ' = cos(x+z), L = Ra = 1; ŵ(±k) scaled by 1.1 at k = (1,0,1).
        // r1 numerator: |Δ_h δw| = 0.1 · 0.25 per coefficient, denominator 0.5,
        // so r1 = 0.025 / 0.5 = 0.05.
        let grid = Grid::cube(8, 1.0).unwrap();
        let theta = SpectralField::from_modes(&grid, &[((1, 0, 1), c(0.5, 0.0))]).unwrap();
        let mut flow = solve_flow(&theta, &unit()).unwrap();
        let k = Wavevector::new(1, 0, 1);
        let w = flow.w.mode(k);
        flow.w.set_mode(k, w * 1.1).unwrap();
        let (r1, _) = residual_momentum(&flow, &theta, &unit()).unwrap();
        assert!((r1 - 0.05).abs() < 1e-14, "r1 = {r1}");
        assert!(r1 > 1e-3);
    }

    #[test]
    fn single_mode_lap_w_ratio_is_half() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let theta = SpectralField::from_modes(&grid, &[((1, 0, 1), c(0.5, 0.0))]).unwrap();
        let flow = solve_flow(&theta, &unit()).unwrap();
        let r = apriori_ratios(&flow, &theta, &unit()).unwrap();
        assert!((r.lap_h_w - 0.5).abs() < 1e-13);
    }

    #[test]
    fn literal_inverse_agrees_with_closed_form() {
        for (ra, l) in [(1.0, 1.0), (100.0, 0.5), (3.7, 2.3)] {
            let grid = Grid::new(16, 12, 10, l).unwrap();
            let p = PhysParams::new(ra, l).unwrap();
            assert!(multiplier_crosscheck(&grid, &p) <= 1e-14);
        }
    }

    #[test]
    fn divergence_free_per_mode() {
        let grid = Grid::cube(8, 1.3).unwrap();
        let theta = SpectralField::from_fn(&grid, |x, y, z| {
            (x / 1.3).sin() * (2.0 * y / 1.3).cos() * z.cos() + (y / 1.3 + z).sin()
        });
        let flow = solve_flow(&theta, &PhysParams::new(5.0, 1.3).unwrap()).unwrap();
        assert!(flow.divergence_defect() < 1e-15);
    }
}
