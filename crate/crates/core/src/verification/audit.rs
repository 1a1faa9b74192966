use super::{DiagnosticsRow, RunningAudit};
use crate::error::VerificationError;

/// Start of the default fit window; earlier samples are treated as a transient
/// in which the mean-flux coupling distorts the slope.
pub const DEFAULT_TRANSIENT: f64 = 0.5;

/// Result of [`energy_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    /// `|½‖θ'(t)‖² + ∫_0^t D − ½‖θ'_0‖²| / ½‖θ'_0‖²` per row.
    pub residuals: Vec<f64>,
    pub max: f64,
}

fn check_finite(rows: &[DiagnosticsRow]) -> Result<(), VerificationError> {
    for r in rows {
        for (name, v) in super::COLUMNS.iter().zip(r.values()) {
            if !v.is_finite() {
                return Err(VerificationError::NonFinite { column: name, time: r.time });
            }
        }
    }
    Ok(())
}

/// Audits the energy equality along a trajectory, with the time integral of
/// `D = ‖∇_h θ'‖² + 4π²L² ∫|∂_z θ̄|²` taken by the composite trapezoid rule at
/// the sampling points.
pub fn energy_audit(rows: &[DiagnosticsRow], length: f64) -> Result<EnergyAudit, VerificationError> {
    if rows.len() < 2 {
        return Err(VerificationError::TooFewSamples { needed: 2, got: rows.len() });
    }
    check_finite(rows)?;
    let mut audit = RunningAudit::default();
    let residuals: Vec<f64> =
        rows.iter().map(|r| audit.push(r.time, r.theta_l2sq, r.dissipation(length))).collect();
    let max = residuals.iter().copied().fold(0.0, f64::max);
    Ok(EnergyAudit { residuals, max })
}

/// Least-squares fit of `log(value) = intercept + rate · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Fits every sample.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<RateFit, VerificationError> {
    decay_fit_window(series, f64::NEG_INFINITY, f64::INFINITY)
}

/// Fits the samples with `t_start <= t <= t_end`.
pub fn decay_fit_window(
    series: &[(f64, f64)],
    t_start: f64,
    t_end: f64,
) -> Result<RateFit, VerificationError> {
    let window: Vec<(f64, f64)> =
        series.iter().copied().filter(|(t, _)| *t >= t_start && *t <= t_end).collect();
    if window.len() < 2 {
        return Err(VerificationError::TooFewSamples { needed: 2, got: window.len() });
    }
    if let Some(&(time, value)) = window.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(VerificationError::NonPositive { time, value });
    }
    let n = window.len() as f64;
    let mt = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in &window {
        let (dt, dy) = (t - mt, v.ln() - my);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(VerificationError::Precondition("fit window spans a single time".into()));
    }
    let rate = sty / stt;
    let ss_res = (syy - rate * sty).max(0.0);
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        rate,
        intercept: my - rate * mt,
        r_squared,
        window: (window[0].0, window[window.len() - 1].0),
    })
}

/// `max_t ‖θ'(t)‖² / (‖θ'_0‖² e^{-2t/L²}) − 1`, which is zero when the
/// Poincaré decay envelope holds (the first row attains it).
pub fn decay_envelope_excess(rows: &[DiagnosticsRow], length: f64) -> f64 {
    let Some(first) = rows.first() else { return 0.0 };
    if first.theta_l2sq == 0.0 {
        return 0.0;
    }
    rows.iter()
        .map(|r| {
            let bound = first.theta_l2sq * (-2.0 * (r.time - first.time) / (length * length)).exp();
            r.theta_l2sq / bound - 1.0
        })
        .fold(0.0, f64::max)
}

/// Largest row-to-row increase of a column (0 if it never increases).
pub fn max_increase(rows: &[DiagnosticsRow], column: impl Fn(&DiagnosticsRow) -> f64) -> f64 {
    rows.windows(2).map(|w| column(&w[1]) - column(&w[0])).fold(0.0, f64::max)
}

/// `∫|∂_z θ̄|² / ‖θ'‖₂⁴` per row (0 where `θ' = 0`).
pub fn mean_profile_ratio(rows: &[DiagnosticsRow]) -> Vec<f64> {
    rows.iter()
        .map(|r| if r.theta_l2sq == 0.0 { 0.0 } else { r.mean_grad_l2sq / (r.theta_l2sq * r.theta_l2sq) })
        .collect()
}

/// Sup of one monitored quantity along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSummary {
    pub name: &'static str,
    pub initial: f64,
    pub sup: f64,
    pub time_of_sup: f64,
}

impl MonitorSummary {
    /// `sup / initial`; 1 when both vanish.
    pub fn growth(&self) -> f64 {
        if self.sup == 0.0 {
            1.0
        } else {
            self.sup / self.initial
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongNormReport {
    /// `‖∂_z θ'‖²`, `‖∇_h θ'‖²`, `∫|∂_zz θ̄|²`.
    pub monitors: [MonitorSummary; 3],
    pub times: Vec<f64>,
    /// Running `∫_0^t ‖Δ_h θ'‖²`.
    pub lap_h_integral: Vec<f64>,
    /// Running `∫_0^t ‖∇_h ∂_z θ'‖²`.
    pub grad_h_dz_integral: Vec<f64>,
}

fn tail_fraction(series: &[f64], times: &[f64]) -> f64 {
    let (Some(&last), Some(&t_end)) = (series.last(), times.last()) else { return 0.0 };
    if last == 0.0 {
        return 0.0;
    }
    let t_mid = 0.5 * (times[0] + t_end);
    let mid = times.iter().position(|t| *t >= t_mid).map_or(last, |i| series[i]);
    (last - mid) / last
}

impl StrongNormReport {
    pub fn max_growth(&self) -> f64 {
        self.monitors.iter().map(MonitorSummary::growth).fold(0.0, f64::max)
    }

    /// Both running integrals are nondecreasing.
    pub fn integrals_monotone(&self) -> bool {
        [&self.lap_h_integral, &self.grad_h_dz_integral]
            .iter()
            .all(|s| s.windows(2).all(|w| w[1] >= w[0]))
    }

    /// Share of each running integral accumulated in the second half of the
    /// window; small values mean the integral has converged.
    pub fn tail_fractions(&self) -> [f64; 2] {
        [
            tail_fraction(&self.lap_h_integral, &self.times),
            tail_fraction(&self.grad_h_dz_integral, &self.times),
        ]
    }
}

/// Sup and time-integral monitors of the strong norms. Needs rows produced
/// in memory (the `‖Δ_h θ'‖²` entry is not stored in the CSV).
pub fn strong_norm_monitor(rows: &[DiagnosticsRow]) -> Result<StrongNormReport, VerificationError> {
    if rows.is_empty() {
        return Err(VerificationError::TooFewSamples { needed: 1, got: 0 });
    }
    check_finite(rows)?;
    if let Some(r) = rows.iter().find(|r| !r.lap_h_theta_l2sq.is_finite()) {
        return Err(VerificationError::NonFinite { column: "lap_h_theta_l2sq", time: r.time });
    }
    let summary = |name: &'static str, f: fn(&DiagnosticsRow) -> f64| {
        let mut best = (f(&rows[0]), rows[0].time);
        for r in rows {
            if f(r) > best.0 {
                best = (f(r), r.time);
            }
        }
        MonitorSummary { name, initial: f(&rows[0]), sup: best.0, time_of_sup: best.1 }
    };
    let running = |f: fn(&DiagnosticsRow) -> f64| {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for w in rows.windows(2) {
            acc += 0.5 * (w[1].time - w[0].time) * (f(&w[0]) + f(&w[1]));
            out.push(acc);
        }
        out
    };
    Ok(StrongNormReport {
        monitors: [
            summary("dz_theta_l2sq", |r| r.dz_theta_l2sq),
            summary("grad_h_theta_l2sq", |r| r.grad_h_theta_l2sq),
            summary("dzz_mean_l2sq", |r| r.dzz_mean_l2sq),
        ],
        times: rows.iter().map(|r| r.time).collect(),
        lap_h_integral: running(|r| r.lap_h_theta_l2sq),
        grad_h_dz_integral: running(|r| r.grad_h_dz_theta_l2sq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(time: f64, theta: f64, grad: f64) -> DiagnosticsRow {
        let mut v = [0.0; 10];
        v[0] = time;
        v[1] = theta;
        v[2] = grad;
        let mut r = DiagnosticsRow::from_values(v);
        r.lap_h_theta_l2sq = grad;
        r
    }

    #[test]
    fn exponential_series_fits_exactly() {
        let series: Vec<(f64, f64)> = (0..=50).map(|i| (0.1 * i as f64, (-2.0 * 0.1 * i as f64).exp())).collect();
        let fit = decay_fit(&series).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.window, (0.0, 5.0));
    }

    #[test]
    fn fit_window_and_errors() {
        let series = [(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)];
        assert!(matches!(decay_fit(&series), Err(VerificationError::NonPositive { time, .. }) if time == 2.0));
        let fit = decay_fit_window(&series, 0.0, 1.5).unwrap();
        assert!((fit.rate - 0.5_f64.ln()).abs() < 1e-15);
        assert!(matches!(decay_fit_window(&series, 0.5, 1.5), Err(VerificationError::TooFewSamples { .. })));
    }

    #[test]
    fn audit_of_exact_exponential() {
        // ‖θ‖² = e^{-2t} with D = e^{-2t}: ½‖θ‖² + ∫D = ½ exactly
        let dt = 1e-3;
        let rows: Vec<_> = (0..=1000)
            .map(|i| {
                let t = dt * i as f64;
                row(t, (-2.0 * t).exp(), (-2.0 * t).exp())
            })
            .collect();
        let audit = energy_audit(&rows, 1.0).unwrap();
        // trapezoid error for ∫e^{-2t}: dt²/12 · 4 · (1 - e^{-2}) / 2 relative to ½
        assert!(audit.max < 1e-6 && audit.max > 1e-8);
        assert_eq!(audit.residuals[0], 0.0);
    }

    #[test]
    fn audit_needs_two_rows() {
        assert!(matches!(energy_audit(&[row(0.0, 1.0, 1.0)], 1.0), Err(VerificationError::TooFewSamples { .. })));
        let zero = [row(0.0, 0.0, 0.0), row(1.0, 0.0, 0.0)];
        assert_eq!(energy_audit(&zero, 1.0).unwrap().max, 0.0);
    }

    #[test]
    fn audit_rejects_nan() {
        let rows = [row(0.0, 1.0, 1.0), row(1.0, f64::NAN, 1.0)];
        assert!(matches!(
            energy_audit(&rows, 1.0),
            Err(VerificationError::NonFinite { column: "theta_l2sq", .. })
        ));
    }

    #[test]
    fn envelope_excess_and_increase() {
        let rows: Vec<_> = (0..=10).map(|i| row(0.1 * i as f64, (-3.0 * 0.1 * i as f64).exp(), 1.0)).collect();
        assert_eq!(decay_envelope_excess(&rows, 1.0), 0.0);
        assert_eq!(max_increase(&rows, |r| r.theta_l2sq), 0.0);
        let slow: Vec<_> = (0..=10).map(|i| row(0.1 * i as f64, (-1.0 * 0.1 * i as f64).exp(), 1.0)).collect();
        assert!(decay_envelope_excess(&slow, 1.0) > 0.1);
    }

    #[test]
    fn monitor_of_zero_trajectory() {
        let rows = [row(0.0, 0.0, 0.0), row(1.0, 0.0, 0.0)];
        let report = strong_norm_monitor(&rows).unwrap();
        assert!(report.monitors.iter().all(|m| m.sup == 0.0 && m.growth() == 1.0));
        assert!(report.integrals_monotone());
        assert_eq!(report.tail_fractions(), [0.0, 0.0]);
    }

    #[test]
    fn monitor_needs_in_memory_rows() {
        let rows = [DiagnosticsRow::from_values([0.0; 10])];
        assert!(matches!(
            strong_norm_monitor(&rows),
            Err(VerificationError::NonFinite { column: "lap_h_theta_l2sq", .. })
        ));
    }
}
