//! Time advance of the temperature fluctuation.
//!
//! Horizontal diffusion is diagonal in coefficient space and is integrated
//! exactly by the factor `exp(-(k1² + k2²) t / L²)`; the nonlinear terms are
//! advanced by the classical four-stage Runge–Kutta method in the
//! integrating-factor variables (Lawson's scheme). The energy lost to
//! dissipation is carried along as an extra ODE component with the same
//! stage weights, so the discrete energy balance can be audited at the
//! integrator's own order.

mod ic;
mod tendency;

pub use ic::InitialCondition;
pub use tendency::{advection, tendency, StageInfo, TendencyWorkspace};

use rustfft::num_complex::Complex64;

use crate::diagnostic::PhysParams;
use crate::error::{EvolutionError, ParamError};
use crate::numeric::Compensated;
use crate::spectral::{Grid, SpectralField};

/// Prognostic state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub theta: SpectralField,
    pub time: f64,
    pub params: PhysParams,
}

impl SimState {
    pub fn new(theta: SpectralField, params: PhysParams) -> Result<Self, EvolutionError> {
        theta.ensure_zero_horizontal_mean()?;
        Ok(Self { theta, time: 0.0, params })
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    IfRk4,
    /// First-order integrating-factor Euler; only for convergence studies.
    IfEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn new(dt: f64, scheme: Scheme) -> Result<Self, ParamError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ParamError::TimeStep(dt));
        }
        Ok(Self { dt, scheme })
    }

    pub fn rk4(dt: f64) -> Result<Self, ParamError> {
        Self::new(dt, Scheme::IfRk4)
    }

    /// `dt = 0.25 L² / k_h,max²`, with `k_h,max` the largest retained horizontal
    /// wavenumber magnitude.
    pub fn auto_dt(grid: &Grid) -> f64 {
        0.25 / grid.max_horizontal_sq()
    }
}

/// Advective CFL number above which a warning is logged.
pub const CFL_WARN: f64 = 0.5;

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepInfo {
    /// `∫ (‖∇_h θ'‖² + 4π²L² ∫|∂_z θ̄|²) dt` over the step, at the scheme's order.
    pub dissipated: f64,
    /// Advective CFL number from the first stage.
    pub cfl: f64,
}

/// Reusable integrator bound to one grid and parameter set.
pub struct Stepper {
    cfg: StepperConfig,
    ws: TendencyWorkspace,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
    factors: Option<(f64, Vec<(Decay, Decay)>)>,
    cfl_warned: bool,
}

/// `exp(x)` carried as `hi + lo`. Many modes share one factor, so the rounding
/// of a plain `f64` would bias the decay coherently over thousands of steps.
#[derive(Debug, Clone, Copy)]
struct Decay {
    hi: f64,
    lo: f64,
}

impl Decay {
    fn new(x: f64) -> Self {
        let hi = x.exp();
        // one Newton step on ln(hi) = x
        let lo = if hi.is_normal() { hi * (x - hi.ln()) } else { 0.0 };
        Self { hi, lo }
    }

    #[inline]
    fn apply(self, z: Complex64) -> Complex64 {
        // fused so that `lo` survives the rounding of `z hi`
        Complex64::new(z.re.mul_add(self.hi, z.re * self.lo), z.im.mul_add(self.hi, z.im * self.lo))
    }
}

impl Stepper {
    pub fn new(grid: &Grid, params: &PhysParams, cfg: StepperConfig) -> Self {
        let zeros = || vec![Complex64::default(); grid.len()];
        Self {
            cfg,
            ws: TendencyWorkspace::new(grid, params),
            k: [zeros(), zeros(), zeros(), zeros()],
            stage: zeros(),
            factors: None,
            cfl_warned: false,
        }
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// `(exp(-a dt), exp(-a dt / 2))` per mode, cached for the last `dt`.
    fn factors(&mut self, dt: f64) -> &[(Decay, Decay)] {
        let stale = !matches!(&self.factors, Some((cached, _)) if *cached == dt);
        if stale {
            let f = self
                .ws
                .modes()
                .iter()
                .map(|m| (Decay::new(-m.kh2 * dt), Decay::new(-m.kh2 * dt * 0.5)))
                .collect();
            self.factors = Some((dt, f));
        }
        &self.factors.as_ref().expect("just filled").1
    }

    /// Advances by the configured `dt`.
    pub fn step(&mut self, state: &mut SimState) -> Result<StepInfo, EvolutionError> {
        let dt = self.cfg.dt;
        self.step_by(state, dt)
    }

    /// Advances by an explicit `dt` (used for the shortened final step).
    pub fn step_by(&mut self, state: &mut SimState, dt: f64) -> Result<StepInfo, EvolutionError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ParamError::TimeStep(dt).into());
        }
        if state.grid() != self.ws.grid() {
            return Err(crate::error::SpectralError::GridMismatch.into());
        }
        let backup = state.clone();
        let info = match self.cfg.scheme {
            Scheme::IfRk4 => self.rk4(state.theta.coeffs_mut(), dt),
            Scheme::IfEuler => self.euler(state.theta.coeffs_mut(), dt),
        };
        self.enforce_symmetry(state.theta.coeffs_mut());
        state.time = backup.time + dt;
        if !state.theta.is_finite() || !info.dissipated.is_finite() {
            return Err(EvolutionError::NonFinite { time: state.time, last_good: Box::new(backup) });
        }
        if info.cfl > CFL_WARN && !self.cfl_warned {
            log::warn!("advective CFL {:.3} exceeds {CFL_WARN} at t = {:.6}", info.cfl, state.time);
            self.cfl_warned = true;
        }
        Ok(info)
    }

    fn cfl(&self, s: &StageInfo, dt: f64) -> f64 {
        let grid = self.ws.grid();
        let [k1, k2, _] = grid.kmax();
        dt * (s.max_abs_u * k1 as f64 + s.max_abs_v * k2 as f64) / grid.length()
    }

    fn euler(&mut self, theta: &mut [Complex64], dt: f64) -> StepInfo {
        let s1 = self.ws.nonlinear(theta, &mut self.k[0]);
        let cfl = self.cfl(&s1, dt);
        self.factors(dt);
        let factors = &self.factors.as_ref().expect("filled").1;
        for (m, &(e, _)) in self.ws.modes().iter().zip(factors) {
            let i = m.index;
            theta[i] = e.apply(theta[i] + self.k[0][i] * dt);
        }
        StepInfo { dissipated: dt * s1.dissipation, cfl }
    }

    fn rk4(&mut self, theta: &mut [Complex64], dt: f64) -> StepInfo {
        self.factors(dt);
        let factors = &self.factors.as_ref().expect("filled").1;
        let half = 0.5 * dt;

        let s1 = self.ws.nonlinear(theta, &mut self.k[0]);
        for (m, &(_, eh)) in self.ws.modes().iter().zip(factors) {
            let i = m.index;
            self.stage[i] = eh.apply(theta[i] + self.k[0][i] * half);
        }
        let s2 = self.ws.nonlinear(&self.stage, &mut self.k[1]);
        for (m, &(_, eh)) in self.ws.modes().iter().zip(factors) {
            let i = m.index;
            self.stage[i] = eh.apply(theta[i]) + self.k[1][i] * half;
        }
        let s3 = self.ws.nonlinear(&self.stage, &mut self.k[2]);
        for (m, &(e, eh)) in self.ws.modes().iter().zip(factors) {
            let i = m.index;
            self.stage[i] = e.apply(theta[i]) + self.k[2][i] * (dt * eh.hi);
        }
        let s4 = self.ws.nonlinear(&self.stage, &mut self.k[3]);
        let sixth = dt / 6.0;
        for (m, &(e, eh)) in self.ws.modes().iter().zip(factors) {
            let i = m.index;
            let [k1, k2, k3, k4] = [self.k[0][i], self.k[1][i], self.k[2][i], self.k[3][i]];
            theta[i] = e.apply(theta[i]) + (k1 * e.hi + (k2 + k3) * (2.0 * eh.hi) + k4) * sixth;
        }
        StepInfo {
            dissipated: sixth
                * (s1.dissipation + 2.0 * s2.dissipation + 2.0 * s3.dissipation + s4.dissipation),
            cfl: self.cfl(&s1, dt),
        }
    }

    fn enforce_symmetry(&self, theta: &mut [Complex64]) {
        for m in self.ws.modes() {
            if m.index < m.partner {
                let avg = (theta[m.index] + theta[m.partner].conj()) * 0.5;
                theta[m.index] = avg;
                theta[m.partner] = avg.conj();
            }
        }
        let nz = self.ws.grid().nz();
        theta[..nz].iter_mut().for_each(|c| *c = Complex64::default());
    }

    /// Runs to `t_end`, calling every observer at `t0`, `t0 + every`, … and at
    /// the final time. Steps are shortened to land exactly on those times.
    pub fn run(
        &mut self,
        mut state: SimState,
        t_end: f64,
        every: Option<f64>,
        observers: &mut [&mut dyn Observer],
    ) -> Result<RunOutcome, EvolutionError> {
        let schedule = Schedule::new(state.time, t_end, self.cfg.dt, every)?;
        let mut dissipated = Compensated::default();
        let mut steps = 0;
        let notify = |state: &SimState, dissipated: f64, observers: &mut [&mut dyn Observer]| {
            let snap = Snapshot { state, dissipated };
            for o in observers.iter_mut() {
                o.observe(&snap);
            }
        };
        if schedule.observes() {
            notify(&state, 0.0, observers);
        }
        for slot in schedule {
            let info = self.step_by(&mut state, slot.dt)?;
            state.time = slot.t_after;
            dissipated.add(info.dissipated);
            steps += 1;
            if slot.observe {
                notify(&state, dissipated.value(), observers);
            }
        }
        Ok(RunOutcome { state, steps, dissipated: dissipated.value() })
    }
}

/// One step of `cfg.dt` from a fresh integrator.
pub fn step(state: &SimState, cfg: &StepperConfig) -> Result<SimState, EvolutionError> {
    let mut next = state.clone();
    Stepper::new(state.grid(), &state.params, *cfg).step(&mut next)?;
    Ok(next)
}

/// See [`Stepper::run`].
pub fn run(
    state: SimState,
    cfg: &StepperConfig,
    t_end: f64,
    every: Option<f64>,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome, EvolutionError> {
    let mut stepper = Stepper::new(state.grid(), &state.params, *cfg);
    stepper.run(state, t_end, every, observers)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SimState,
    pub steps: usize,
    /// Dissipation integrated by the stepper since the start of the run.
    pub dissipated: f64,
}

/// Read-only view handed to observers.
pub struct Snapshot<'a> {
    pub state: &'a SimState,
    /// Energy dissipated since the start of the run, integrated at the scheme's order.
    pub dissipated: f64,
}

pub trait Observer {
    fn observe(&mut self, snapshot: &Snapshot<'_>);
}

impl<F: FnMut(&Snapshot<'_>)> Observer for F {
    fn observe(&mut self, snapshot: &Snapshot<'_>) {
        self(snapshot)
    }
}

/// One entry of a [`Schedule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub dt: f64,
    pub t_after: f64,
    pub observe: bool,
}

/// Step sizes from `t0` to `t_end`: full steps of `dt`, shortened to land on
/// observation times `t0 + j·every` and on `t_end`.
#[derive(Debug, Clone)]
pub struct Schedule {
    t0: f64,
    t: f64,
    t_end: f64,
    dt: f64,
    every: Option<f64>,
    next_obs: usize,
}

impl Schedule {
    pub fn new(t0: f64, t_end: f64, dt: f64, every: Option<f64>) -> Result<Self, EvolutionError> {
        if !(t_end >= t0) {
            return Err(EvolutionError::EndBeforeStart { time: t0, t_end });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ParamError::TimeStep(dt).into());
        }
        if let Some(e) = every {
            if !(e.is_finite() && e > 0.0) {
                return Err(ParamError::Other(format!("output interval must be positive, got {e}")).into());
            }
        }
        Ok(Self { t0, t: t0, t_end, dt, every, next_obs: 1 })
    }

    /// Whether observers are attached at all.
    pub fn observes(&self) -> bool {
        self.every.is_some()
    }

    fn tolerance(&self) -> f64 {
        1e-9 * self.dt
    }
}

impl Iterator for Schedule {
    type Item = Slot;

    fn next(&mut self) -> Option<Slot> {
        let tol = self.tolerance();
        if self.t_end - self.t <= tol {
            return None;
        }
        let mut target = self.t_end;
        let mut observe = self.every.is_some();
        if let Some(e) = self.every {
            let obs = self.t0 + self.next_obs as f64 * e;
            if obs < self.t_end - tol {
                target = obs;
            }
        }
        let (dt, t_after) = if target - self.t <= self.dt + tol {
            if (target - self.t_end).abs() > tol {
                self.next_obs += 1;
            }
            (target - self.t, target)
        } else {
            observe = false;
            (self.dt, self.t + self.dt)
        };
        self.t = t_after;
        Some(Slot { dt, t_after, observe })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(t0: f64, t_end: f64, dt: f64, every: Option<f64>) -> Vec<Slot> {
        Schedule::new(t0, t_end, dt, every).unwrap().collect()
    }

    #[test]
    fn last_step_is_shortened() {
        let s = sizes(0.0, 1.0, 0.3, None);
        let dts: Vec<f64> = s.iter().map(|s| s.dt).collect();
        assert_eq!(dts.len(), 4);
        for (a, b) in dts.iter().zip([0.3, 0.3, 0.3, 0.1]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.last().unwrap().t_after, 1.0);
    }

    #[test]
    fn empty_run_has_no_steps() {
        assert!(sizes(2.0, 2.0, 0.1, Some(0.5)).is_empty());
    }

    #[test]
    fn observer_times() {
        let s = sizes(0.0, 1.0, 0.1, Some(0.5));
        let obs: Vec<f64> = s.iter().filter(|s| s.observe).map(|s| s.t_after).collect();
        assert_eq!(obs.len(), 2);
        assert!((obs[0] - 0.5).abs() < 1e-12);
        assert_eq!(obs[1], 1.0);
    }

    #[test]
    fn observer_lands_exactly() {
        let s = sizes(0.0, 1.0, 0.3, Some(0.5));
        let dts: Vec<f64> = s.iter().map(|s| s.dt).collect();
        for (a, b) in dts.iter().zip([0.3, 0.2, 0.3, 0.2]) {
            assert!((a - b).abs() < 1e-12, "{dts:?}");
        }
    }

    #[test]
    fn rejects_backwards_runs() {
        assert!(Schedule::new(1.0, 0.5, 0.1, None).is_err());
        assert!(Schedule::new(0.0, 1.0, 0.0, None).is_err());
    }
}
