//! The subcommands, as library functions returning printable reports.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use ipconv::evolution::{Observer, Snapshot, Stepper};
use ipconv::verification::{
    continuous_dependence_experiment, decay_fit_window, energy_audit, first_order_deviation, oracle_gate,
    random_retained, DependenceReport, DiagnosticsRow, RateFit, Recorder, COLUMNS,
};
use ipconv::{EvolutionError, Grid, Norm, NormKind, PhysParams, SimState, SpectralField};

use crate::checkpoint::{decode, decode_header, write_checkpoint, Header};
use crate::config::SimConfig;
use crate::diagnostics::{read_diagnostics_file, CsvError, DiagnosticsWriter};
use crate::CliError;

/// A command result; `passed` is false when a verification gate fails.
pub trait Report: fmt::Display {
    fn passed(&self) -> bool {
        true
    }
}

struct RunObserver {
    recorder: Recorder,
    csv: Option<DiagnosticsWriter<BufWriter<File>>>,
    error: Option<CsvError>,
}

impl Observer for RunObserver {
    fn observe(&mut self, snapshot: &Snapshot<'_>) {
        let row = *self.recorder.record(snapshot);
        if let Some(w) = self.csv.as_mut() {
            if let Err(e) = w.write_row(&row).and_then(|_| w.flush()) {
                self.error = Some(e);
                self.csv = None;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps: usize,
    pub dt: f64,
    pub final_state: SimState,
    pub rows: Vec<DiagnosticsRow>,
    /// Largest trapezoid-audit residual over the recorded rows.
    pub max_energy_residual: f64,
    /// Energy defect with the dissipation integrated by the stepper itself.
    pub integrator_residual: f64,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps                 {}", self.steps)?;
        writeln!(f, "dt                    {:e}", self.dt)?;
        writeln!(f, "final time            {}", self.final_state.time)?;
        writeln!(f, "rows                  {}", self.rows.len())?;
        if let Some(last) = self.rows.last() {
            writeln!(f, "final theta_l2sq      {:e}", last.theta_l2sq)?;
            writeln!(f, "max a priori ratio    {:e}", self.rows.iter().map(|r| r.max_apriori_ratio).fold(0.0, f64::max))?;
        }
        writeln!(f, "max energy residual   {:e}", self.max_energy_residual)?;
        write!(f, "integrator residual   {:e}", self.integrator_residual)
    }
}

impl Report for RunReport {}

/// Runs a configured simulation, writing CSV rows at every output time and,
/// optionally, the final checkpoint. On a non-finite state the last finite
/// one is saved next to `checkpoint_out` with a `.last_good` suffix.
pub fn run(config: &SimConfig, checkpoint_out: Option<&Path>, csv: Option<&Path>) -> Result<RunReport, CliError> {
    let state = config.initial_state()?;
    let grid = config.grid();
    let params = config.params();
    let cfg = config.stepper();
    let writer = match csv {
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
            Some(DiagnosticsWriter::new(BufWriter::new(file)).map_err(|e| CliError::Csv { path: p.to_path_buf(), source: e })?)
        }
        None => None,
    };
    let mut obs = RunObserver { recorder: Recorder::new(&grid, &params), csv: writer, error: None };
    let outcome = Stepper::new(&grid, &params, cfg).run(state, config.t_end, Some(config.output_every), &mut [&mut obs]);
    let outcome = match outcome {
        Ok(o) => o,
        Err(EvolutionError::NonFinite { time, last_good }) => {
            let dumped = match checkpoint_out {
                Some(p) => {
                    let mut name = p.as_os_str().to_owned();
                    name.push(".last_good");
                    let path = PathBuf::from(name);
                    write_checkpoint(&last_good, &path).map_err(|source| CliError::Checkpoint { path: path.clone(), source })?;
                    log::warn!("last finite state (t = {}) written to {}", last_good.time, path.display());
                    Some(path)
                }
                None => None,
            };
            return Err(CliError::Instability { time, last_good_time: last_good.time, dumped });
        }
        Err(e) => return Err(CliError::Evolution(e)),
    };
    if let (Some(e), Some(p)) = (obs.error.take(), csv) {
        return Err(CliError::Csv { path: p.to_path_buf(), source: e });
    }
    if let Some(p) = checkpoint_out {
        write_checkpoint(&outcome.state, p).map_err(|source| CliError::Checkpoint { path: p.to_path_buf(), source })?;
        log::info!("checkpoint at t = {} written to {}", outcome.state.time, p.display());
    }
    let integrator_residual = obs.recorder.integrator_residual();
    let rows = obs.recorder.into_rows();
    let max_energy_residual = rows.iter().map(|r| r.energy_residual).fold(0.0, f64::max);
    Ok(RunReport {
        steps: outcome.steps,
        dt: cfg.dt,
        final_state: outcome.state,
        rows,
        max_energy_residual,
        integrator_residual,
    })
}

/// Fast tendency against the dense oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct TendencyCheckReport {
    pub n: usize,
    pub seeds: u64,
    pub worst: f64,
    pub tolerance: f64,
}

impl fmt::Display for TendencyCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grid {0}x{0}x{0}, {1} seeds: max relative deviation {2:e} (tolerance {3:e}) {4}",
            self.n,
            self.seeds,
            self.worst,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

impl Report for TendencyCheckReport {
    fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

pub const TENDENCY_TOLERANCE: f64 = 1e-12;

pub fn tendency_check(n: usize, seeds: u64, rayleigh: f64, length: f64) -> Result<TendencyCheckReport, CliError> {
    let grid = Grid::cube(n, length).map_err(|e| CliError::Usage(e.to_string()))?;
    let params = PhysParams::new(rayleigh, length).map_err(|e| CliError::Usage(e.to_string()))?;
    let worst = oracle_gate(&grid, &params, seeds)?;
    Ok(TendencyCheckReport { n, seeds, worst, tolerance: TENDENCY_TOLERANCE })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAuditReport {
    pub rows: usize,
    pub max: f64,
    pub time_of_max: f64,
    /// Largest value of the `energy_residual` column as written.
    pub recorded_max: f64,
    pub tolerance: f64,
}

impl fmt::Display for EnergyAuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows                 {}", self.rows)?;
        writeln!(f, "max residual         {:e} at t = {}", self.max, self.time_of_max)?;
        writeln!(f, "recorded column max  {:e}", self.recorded_max)?;
        write!(f, "tolerance            {:e} {}", self.tolerance, if self.passed() { "PASS" } else { "FAIL" })
    }
}

impl Report for EnergyAuditReport {
    fn passed(&self) -> bool {
        self.max <= self.tolerance
    }
}

fn read_rows(path: &Path) -> Result<Vec<DiagnosticsRow>, CliError> {
    read_diagnostics_file(path).map_err(|source| CliError::Csv { path: path.to_path_buf(), source })
}

/// Recomputes the energy audit from a CSV; `length` is the box parameter `L`,
/// which the CSV does not record.
pub fn energy_audit_csv(path: &Path, length: f64, tolerance: f64) -> Result<EnergyAuditReport, CliError> {
    if !(length.is_finite() && length > 0.0) {
        return Err(CliError::Usage(format!("--length must be positive, got {length}")));
    }
    let rows = read_rows(path)?;
    let audit = energy_audit(&rows, length)?;
    let (i, max) = audit
        .residuals
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    Ok(EnergyAuditReport {
        rows: rows.len(),
        max,
        time_of_max: rows[i].time,
        recorded_max: rows.iter().map(|r| r.energy_residual).fold(0.0, f64::max),
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFitReport {
    pub column: String,
    pub fit: RateFit,
    /// `(expected rate, relative tolerance)`
    pub expected: Option<(f64, f64)>,
}

impl fmt::Display for DecayFitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "column     {}", self.column)?;
        writeln!(f, "window     [{}, {}]", self.fit.window.0, self.fit.window.1)?;
        writeln!(f, "rate       {:.12e}", self.fit.rate)?;
        writeln!(f, "intercept  {:.12e}", self.fit.intercept)?;
        write!(f, "r^2        {:.12}", self.fit.r_squared)?;
        if let Some((rate, tol)) = self.expected {
            write!(
                f,
                "\nexpected   {rate:e}, relative error {:e} (tolerance {tol:e}) {}",
                self.relative_error().unwrap_or(f64::NAN),
                if self.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

impl DecayFitReport {
    pub fn relative_error(&self) -> Option<f64> {
        self.expected.map(|(rate, _)| ((self.fit.rate - rate) / rate).abs())
    }
}

impl Report for DecayFitReport {
    fn passed(&self) -> bool {
        match (self.expected, self.relative_error()) {
            (Some((_, tol)), Some(err)) => err <= tol,
            _ => true,
        }
    }
}

/// Fits `log(column) = a + rate · t` over `[t_start, t_end]`.
pub fn decay_fit_csv(
    path: &Path,
    column: &str,
    t_start: f64,
    t_end: Option<f64>,
    expected: Option<(f64, f64)>,
) -> Result<DecayFitReport, CliError> {
    let index = COLUMNS
        .iter()
        .position(|c| *c == column)
        .filter(|&i| i > 0)
        .ok_or_else(|| CliError::Usage(format!("unknown column `{column}`; choose one of {:?}", &COLUMNS[1..])))?;
    let rows = read_rows(path)?;
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.time, r.values()[index])).collect();
    let fit = decay_fit_window(&series, t_start, t_end.unwrap_or(f64::INFINITY))?;
    Ok(DecayFitReport { column: column.to_string(), fit, expected })
}

/// Continuous dependence on the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbReport {
    pub amplitude: f64,
    pub report: DependenceReport,
    /// A second experiment at another amplitude and the largest relative
    /// deviation of its growth curve from the first.
    pub comparison: Option<(f64, DependenceReport, f64)>,
    pub linearity_tolerance: f64,
}

impl fmt::Display for PerturbReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>12} {:>24}", "time", "growth")?;
        for (t, g) in self.report.times.iter().zip(&self.report.growth) {
            writeln!(f, "{t:>12.6} {g:>24.16e}")?;
        }
        writeln!(f, "|delta|            {:e}", self.amplitude)?;
        writeln!(f, "fitted exponent    {:e}", self.report.slope)?;
        write!(
            f,
            "envelope excess    {:e} {}",
            self.report.max_excess,
            if self.report.envelope_holds() { "PASS" } else { "FAIL" }
        )?;
        if let Some((amp, _, dev)) = &self.comparison {
            write!(
                f,
                "\nfirst order vs |delta| = {amp:e}: deviation {dev:e} (tolerance {:e}) {}",
                self.linearity_tolerance,
                if *dev <= self.linearity_tolerance { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

impl Report for PerturbReport {
    fn passed(&self) -> bool {
        self.report.envelope_holds() && self.comparison.as_ref().map_or(true, |c| c.2 <= self.linearity_tolerance)
    }
}

pub const LINEARITY_TOLERANCE: f64 = 0.05;

/// Random retained perturbation with `‖δ‖₂ = amplitude`.
pub fn perturbation(grid: &Grid, seed: u64, amplitude: f64) -> SpectralField {
    let raw = random_retained(grid, seed, 1.0);
    let norm = raw.norm(NormKind::L2).expect("L2 norm");
    raw.scale(amplitude / norm)
}

pub fn perturb(config: &SimConfig, amplitude: f64, seed: u64, compare: Option<f64>) -> Result<PerturbReport, CliError> {
    for a in std::iter::once(amplitude).chain(compare) {
        if !(a.is_finite() && a > 0.0) {
            return Err(CliError::Usage(format!("perturbation amplitude must be positive, got {a}")));
        }
    }
    let state = config.initial_state()?;
    let grid = config.grid();
    let params = config.params();
    let cfg = config.stepper();
    let experiment = |a: f64| {
        continuous_dependence_experiment(&state.theta, &perturbation(&grid, seed, a), &params, cfg, config.t_end, config.output_every)
    };
    let report = experiment(amplitude)?;
    let comparison = match compare {
        Some(a) => {
            let other = experiment(a)?;
            let dev = first_order_deviation(&report, &other)?;
            Some((a, other, dev))
        }
        None => None,
    };
    Ok(PerturbReport { amplitude, report, comparison, linearity_tolerance: LINEARITY_TOLERANCE })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    pub header: Header,
    pub retained: usize,
    pub theta_l2sq: f64,
    pub max_abs: f64,
    pub hermitian_defect: f64,
}

impl fmt::Display for InfoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.header.dims;
        writeln!(f, "version           {}", self.header.version)?;
        writeln!(f, "grid              {x}x{y}x{z}")?;
        writeln!(f, "L                 {}", self.header.length)?;
        writeln!(f, "Ra                {}", self.header.rayleigh)?;
        writeln!(f, "time              {}", self.header.time)?;
        writeln!(f, "retained modes    {}", self.retained)?;
        writeln!(f, "theta_l2sq        {:e}", self.theta_l2sq)?;
        writeln!(f, "max |coefficient| {:e}", self.max_abs)?;
        write!(f, "hermitian defect  {:e}", self.hermitian_defect)
    }
}

impl Report for InfoReport {}

pub fn info(path: &Path) -> Result<InfoReport, CliError> {
    let checkpoint = |source| CliError::Checkpoint { path: path.to_path_buf(), source };
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let header = decode_header(&bytes).map_err(checkpoint)?;
    let state = decode(&bytes).map_err(checkpoint)?;
    Ok(InfoReport {
        header,
        retained: state.grid().retained_count(),
        theta_l2sq: state.theta.norm_sq(NormKind::L2).expect("L2 norm"),
        max_abs: state.theta.max_abs(),
        hermitian_defect: state.theta.hermitian_defect(),
    })
}
