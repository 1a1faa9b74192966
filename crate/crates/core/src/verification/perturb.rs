use crate::diagnostic::PhysParams;
use crate::error::VerificationError;
use crate::evolution::{SimState, Snapshot, Stepper, StepperConfig};
use crate::spectral::{Norm, NormKind, SpectralField};

/// Allowed excess of `log g(t)` over its fitted line before the exponential
/// envelope is considered violated (one decade).
pub const ENVELOPE_SLACK: f64 = std::f64::consts::LN_10;

/// Growth of a perturbation along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub times: Vec<f64>,
    /// `g(t) = ‖θ'₂(t) − θ'₁(t)‖₂² / ‖δ‖₂²`
    pub growth: Vec<f64>,
    pub delta_l2sq: f64,
    /// Least-squares line `log g ≈ intercept + slope · t`.
    pub slope: f64,
    pub intercept: f64,
    /// `max_t (log g(t) − a − slope · t)` with `a = max(intercept, log g(0))`:
    /// the envelope's prefactor is never below the initial ratio.
    pub max_excess: f64,
}

impl DependenceReport {
    pub fn envelope_holds(&self) -> bool {
        self.max_excess <= ENVELOPE_SLACK
    }
}

fn trajectory(
    theta: SpectralField,
    params: &PhysParams,
    cfg: StepperConfig,
    t_end: f64,
    every: f64,
) -> Result<Vec<(f64, SpectralField)>, VerificationError> {
    let state = SimState::new(theta, *params)?;
    let mut stepper = Stepper::new(state.grid(), params, cfg);
    let mut samples = Vec::new();
    let mut keep = |s: &Snapshot<'_>| samples.push((s.state.time, s.state.theta.clone()));
    stepper.run(state, t_end, Some(every), &mut [&mut keep])?;
    Ok(samples)
}

/// Runs from `theta0` and `theta0 + delta` and measures how the difference
/// evolves, sampling every `every` time units.
pub fn continuous_dependence_experiment(
    theta0: &SpectralField,
    delta: &SpectralField,
    params: &PhysParams,
    cfg: StepperConfig,
    t_end: f64,
    every: f64,
) -> Result<DependenceReport, VerificationError> {
    let delta_l2sq = delta.norm_sq(NormKind::L2)?;
    if delta_l2sq == 0.0 {
        return Err(VerificationError::ZeroPerturbation);
    }
    let base = trajectory(theta0.clone(), params, cfg, t_end, every)?;
    let perturbed = trajectory(theta0.add(delta)?, params, cfg, t_end, every)?;
    let mut times = Vec::with_capacity(base.len());
    let mut growth = Vec::with_capacity(base.len());
    for ((t, a), (_, b)) in base.iter().zip(&perturbed) {
        times.push(*t);
        growth.push(b.sub(a)?.norm_sq(NormKind::L2)? / delta_l2sq);
    }
    let series: Vec<(f64, f64)> = times.iter().copied().zip(growth.iter().copied()).collect();
    let fit = super::decay_fit(&series)?;
    let floor = fit.intercept.max(growth[0].ln());
    let max_excess = series
        .iter()
        .map(|(t, g)| g.ln() - floor - fit.rate * t)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DependenceReport { times, growth, delta_l2sq, slope: fit.rate, intercept: fit.intercept, max_excess })
}

/// `max_t |g_a(t) / g_b(t) − 1|` for two experiments sampled at the same times;
/// near zero when the difference dynamics are linear in the perturbation.
pub fn first_order_deviation(a: &DependenceReport, b: &DependenceReport) -> Result<f64, VerificationError> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(VerificationError::Precondition("experiments were sampled at different times".into()));
    }
    Ok(a.growth.iter().zip(&b.growth).map(|(x, y)| (x / y - 1.0).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::InitialCondition;
    use crate::spectral::{Grid, Wavevector};

    fn setup() -> (Grid, PhysParams, StepperConfig) {
        (Grid::cube(8, 1.0).unwrap(), PhysParams::new(1.0, 1.0).unwrap(), StepperConfig::rk4(0.01).unwrap())
    }

    #[test]
    fn zero_delta_is_rejected() {
        let (grid, p, cfg) = setup();
        let theta = InitialCondition::SingleMode { k: Wavevector::new(1, 0, 1), amplitude: 1.0 }
            .build(&grid)
            .unwrap();
        let delta = theta.scale(0.0);
        assert!(matches!(
            continuous_dependence_experiment(&theta, &delta, &p, cfg, 1.0, 0.1),
            Err(VerificationError::ZeroPerturbation)
        ));
    }

    #[test]
    fn linear_regime_difference_decays_at_poincare_rate() {
        let (grid, p, cfg) = setup();
        let mode = |a| InitialCondition::SingleMode { k: Wavevector::new(1, 0, 1), amplitude: a };
        let theta = mode(1e-8).build(&grid).unwrap();
        let delta = mode(1e-8).build(&grid).unwrap();
        let r = continuous_dependence_experiment(&theta, &delta, &p, cfg, 1.0, 0.1).unwrap();
        assert_eq!(r.times.len(), 11);
        for (t, g) in r.times.iter().zip(&r.growth) {
            assert!((g / (-2.0 * t).exp() - 1.0).abs() < 1e-6, "t = {t}: g = {g}");
        }
        assert!((r.slope + 2.0).abs() < 1e-6);
        assert!(r.envelope_holds());
        assert!(first_order_deviation(&r, &r).unwrap() == 0.0);
    }

    #[test]
    fn fast_initial_decay_stays_under_envelope() {
        let (grid, p, cfg) = setup();
        let mode = |k1, a| InitialCondition::SingleMode { k: Wavevector::new(k1, 0, 1), amplitude: a };
        let theta = mode(1, 1e-8).build(&grid).unwrap();
        let delta = mode(1, 1e-9).build(&grid).unwrap().add(&mode(2, 1e-8).build(&grid).unwrap()).unwrap();
        let r = continuous_dependence_experiment(&theta, &delta, &p, cfg, 1.0, 0.1).unwrap();
        assert!(r.intercept < r.growth[0].ln());
        assert!(r.envelope_holds(), "excess {}", r.max_excess);
    }
}
