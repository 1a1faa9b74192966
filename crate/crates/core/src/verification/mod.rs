//! Executable checks of the model's exact identities and estimates.
//!
//! Everything here consumes trajectories or single fields and produces
//! reports; nothing feeds back into the solver. The diagnostics row is the
//! common currency: the CLI writes it as CSV, the audits read it back.

mod audit;
mod lemma;
mod oracle;
mod perturb;

pub use audit::{
    decay_envelope_excess, decay_fit, decay_fit_window, energy_audit, max_increase,
    mean_profile_ratio, strong_norm_monitor, EnergyAudit, MonitorSummary, RateFit, StrongNormReport,
    DEFAULT_TRANSIENT,
};
pub use lemma::{lemma_diagnostics, LemmaReport};
pub use oracle::{
    dense_product, oracle_gate, oracle_tendency, oracle_terms, random_retained, relative_deviation,
    OracleTerms, ORACLE_MAX_N,
};
pub use perturb::{continuous_dependence_experiment, first_order_deviation, DependenceReport, ENVELOPE_SLACK};

use std::f64::consts::PI;

use crate::diagnostic::{FlowMultipliers, PhysParams, EPS_GUARD};
use crate::evolution::{Observer, SimState, Snapshot, TendencyWorkspace};
use crate::numeric::Compensated;
use crate::spectral::Grid;

/// Column names in CSV order.
pub const COLUMNS: [&str; 10] = [
    "time",
    "theta_l2sq",
    "grad_h_theta_l2sq",
    "mean_grad_l2sq",
    "dz_theta_l2sq",
    "grad_h_dz_theta_l2sq",
    "dzz_mean_l2sq",
    "w_l2sq",
    "energy_residual",
    "max_apriori_ratio",
];

/// Scalar diagnostics of one state. All squared norms are over the full box
/// except the mean-profile ones, which are `∫_0^{2π} · dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub theta_l2sq: f64,
    pub grad_h_theta_l2sq: f64,
    pub mean_grad_l2sq: f64,
    pub dz_theta_l2sq: f64,
    pub grad_h_dz_theta_l2sq: f64,
    pub dzz_mean_l2sq: f64,
    pub w_l2sq: f64,
    /// Running trapezoid audit of the energy equality, see [`energy_audit`].
    pub energy_residual: f64,
    pub max_apriori_ratio: f64,
    /// `‖Δ_h θ'‖²`; not part of the CSV and `NaN` for rows read back from one.
    pub lap_h_theta_l2sq: f64,
}

impl DiagnosticsRow {
    /// The CSV columns, in [`COLUMNS`] order.
    pub fn values(&self) -> [f64; 10] {
        [
            self.time,
            self.theta_l2sq,
            self.grad_h_theta_l2sq,
            self.mean_grad_l2sq,
            self.dz_theta_l2sq,
            self.grad_h_dz_theta_l2sq,
            self.dzz_mean_l2sq,
            self.w_l2sq,
            self.energy_residual,
            self.max_apriori_ratio,
        ]
    }

    pub fn from_values(v: [f64; 10]) -> Self {
        Self {
            time: v[0],
            theta_l2sq: v[1],
            grad_h_theta_l2sq: v[2],
            mean_grad_l2sq: v[3],
            dz_theta_l2sq: v[4],
            grad_h_dz_theta_l2sq: v[5],
            dzz_mean_l2sq: v[6],
            w_l2sq: v[7],
            energy_residual: v[8],
            max_apriori_ratio: v[9],
            lap_h_theta_l2sq: f64::NAN,
        }
    }

    /// Instantaneous dissipation `‖∇_h θ'‖² + 4π²L² ∫|∂_z θ̄|² dz`.
    pub fn dissipation(&self, length: f64) -> f64 {
        self.grad_h_theta_l2sq + 4.0 * PI * PI * length * length * self.mean_grad_l2sq
    }
}

#[derive(Debug, Clone, Copy)]
struct ProbeMode {
    index: usize,
    kh2: f64,
    k3sq: f64,
    /// `|k3|^{4/3}`
    k3_43: f64,
    w2: f64,
    /// `|û|² + |v̂|²` per unit `|θ̂'|²`
    uv2: f64,
}

/// Computes [`DiagnosticsRow`]s; keeps its own FFT workspace for the mean flux.
pub struct DiagnosticsProbe {
    ws: TendencyWorkspace,
    modes: Vec<ProbeMode>,
}

impl DiagnosticsProbe {
    pub fn new(grid: &Grid, params: &PhysParams) -> Self {
        let modes = grid
            .retained()
            .filter(|k| !k.is_horizontal_mean())
            .map(|k| {
                let m = FlowMultipliers::at(k, params.rayleigh(), grid.length()).expect("k_h nonzero");
                let k3 = k.k3.unsigned_abs() as f64;
                ProbeMode {
                    index: grid.index_of(k).expect("retained"),
                    kh2: grid.horizontal_sq(k),
                    k3sq: k3 * k3,
                    k3_43: k3.powf(4.0 / 3.0),
                    w2: m.w * m.w,
                    uv2: m.u * m.u + m.v * m.v,
                }
            })
            .collect();
        Self { ws: TendencyWorkspace::new(grid, params), modes }
    }

    /// Row for `state`; `energy_residual` is supplied by the caller.
    pub fn row(&mut self, state: &SimState, energy_residual: f64) -> DiagnosticsRow {
        let theta = state.theta.coeffs();
        let mut s = [Compensated::default(); 12];
        for m in &self.modes {
            let t2 = theta[m.index].norm_sqr();
            if t2 == 0.0 {
                continue;
            }
            let uv = m.uv2 * t2;
            let w = m.w2 * t2;
            s[0].add(t2);
            s[1].add(m.kh2 * t2);
            s[2].add(m.k3sq * t2);
            s[3].add(m.kh2 * m.k3sq * t2);
            s[4].add(w);
            s[5].add(m.kh2 * m.kh2 * t2);
            s[6].add(m.kh2 * m.kh2 * uv);
            s[7].add(m.k3sq * uv);
            s[8].add(m.k3_43 * uv);
            s[9].add(m.kh2 * m.kh2 * w);
            s[10].add(m.k3sq * w);
            s[11].add(m.k3_43 * w);
        }
        self.ws.update_flux(theta);
        let nz = state.grid().nz();
        let (mut g2, mut gz2) = (Compensated::default(), Compensated::default());
        for (i, g) in self.ws.mean_gradient().coeffs().iter().enumerate() {
            let k3 = Grid::wavenumber(i, nz) as f64;
            g2.add(g.norm_sqr());
            gz2.add(k3 * k3 * g.norm_sqr());
        }
        let (g2, gz2) = (g2.value(), gz2.value());
        let s = s.map(|c| c.value());

        let vol = state.grid().volume();
        let ra2 = state.params.rayleigh().powi(2);
        let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { (num / den.max(EPS_GUARD)).sqrt() };
        let apriori = [
            ratio(s[6], ra2 * s[0]),
            ratio(s[7], ra2 * s[1]),
            ratio(s[8], ra2 * s[0]),
            ratio(s[9], ra2 * s[0]),
            ratio(s[10], ra2 * s[1]),
            ratio(s[11], ra2 * s[0]),
        ];
        DiagnosticsRow {
            time: state.time,
            theta_l2sq: vol * s[0],
            grad_h_theta_l2sq: vol * s[1],
            mean_grad_l2sq: 2.0 * PI * g2,
            dz_theta_l2sq: vol * s[2],
            grad_h_dz_theta_l2sq: vol * s[3],
            dzz_mean_l2sq: 2.0 * PI * gz2,
            w_l2sq: vol * s[4],
            energy_residual,
            max_apriori_ratio: apriori.into_iter().fold(0.0, f64::max),
            lap_h_theta_l2sq: vol * s[5],
        }
    }
}

/// Running composite-trapezoid energy audit.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunningAudit {
    initial: f64,
    integral: Compensated,
    last: Option<(f64, f64)>,
}

impl RunningAudit {
    /// Feeds `(t, ‖θ'‖², D)` and returns the current residual.
    pub(crate) fn push(&mut self, time: f64, theta_l2sq: f64, dissipation: f64) -> f64 {
        match self.last {
            None => self.initial = 0.5 * theta_l2sq,
            Some((t0, d0)) => self.integral.add(0.5 * (time - t0) * (d0 + dissipation)),
        }
        self.last = Some((time, dissipation));
        relative_energy_defect(theta_l2sq, self.integral.value(), self.initial)
    }
}

fn relative_energy_defect(theta_l2sq: f64, dissipated: f64, initial: f64) -> f64 {
    let defect = (0.5 * theta_l2sq + dissipated - initial).abs();
    if defect == 0.0 {
        0.0
    } else {
        defect / initial.max(EPS_GUARD)
    }
}

/// Observer that records a [`DiagnosticsRow`] at every snapshot, together with
/// the dissipation integrated by the stepper itself.
pub struct Recorder {
    probe: DiagnosticsProbe,
    length: f64,
    audit: RunningAudit,
    rows: Vec<DiagnosticsRow>,
    dissipated: Vec<f64>,
}

impl Recorder {
    pub fn new(grid: &Grid, params: &PhysParams) -> Self {
        Self {
            probe: DiagnosticsProbe::new(grid, params),
            length: params.length(),
            audit: RunningAudit::default(),
            rows: Vec::new(),
            dissipated: Vec::new(),
        }
    }

    /// Records one snapshot and returns its row.
    pub fn record(&mut self, snapshot: &Snapshot<'_>) -> &DiagnosticsRow {
        let mut row = self.probe.row(snapshot.state, 0.0);
        row.energy_residual = self.audit.push(row.time, row.theta_l2sq, row.dissipation(self.length));
        self.rows.push(row);
        self.dissipated.push(snapshot.dissipated);
        self.rows.last().expect("just pushed")
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<DiagnosticsRow> {
        self.rows
    }

    /// `max_t |½‖θ'(t)‖² + Q(t) − ½‖θ'_0‖²| / ½‖θ'_0‖²` with `Q` the dissipation
    /// integrated by the time stepper at its own order. Unlike the trapezoid
    /// audit this is limited only by the step size.
    pub fn integrator_residual(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let initial = 0.5 * first.theta_l2sq;
        self.rows
            .iter()
            .zip(&self.dissipated)
            .map(|(r, q)| relative_energy_defect(r.theta_l2sq, q - self.dissipated[0], initial))
            .fold(0.0, f64::max)
    }
}

impl Observer for Recorder {
    fn observe(&mut self, snapshot: &Snapshot<'_>) {
        self.record(snapshot);
    }
}
