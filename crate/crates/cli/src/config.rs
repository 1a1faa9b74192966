//! `key = value` run configuration.
//!
//! ```text
//! # comment
//! L = 1.0
//! Ra = 1.0
//! nx = 32
//! ny = 32
//! nz = 32
//! dt = auto
//! t_end = 2.0
//! output_every = 0.1
//! dealias = two_thirds
//! ic = random(7, 1.0, 1.0)
//! ```
//!
//! Required keys: `L`, `Ra`, `nx`, `ny`, `nz`, `t_end`, `ic`. Defaults:
//! `dt = auto`, `dealias = two_thirds`, `output_every = t_end / 100`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ipconv::evolution::InitialCondition;
use ipconv::{Grid, PhysParams, SimState, StepperConfig, Wavevector};
use thiserror::Error;

use crate::checkpoint::{read_checkpoint, CheckpointError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("{}`{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { key: &'static str, line: Option<usize>, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dealias {
    TwoThirds,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IcSpec {
    SingleMode { k: Wavevector, amplitude: f64 },
    Random { seed: u64, k0: f64, amplitude: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub length: f64,
    pub rayleigh: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dt: TimeStep,
    pub t_end: f64,
    pub output_every: f64,
    pub dealias: Dealias,
    pub ic: IcSpec,
}

const KEYS: [&str; 10] = ["L", "Ra", "nx", "ny", "nz", "dt", "t_end", "output_every", "dealias", "ic"];

/// Errors raised while turning a config into a starting state.
#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial condition file {path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error("invalid initial condition: {0}")]
    State(String),
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn invalid(key: &'static str, line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, line: Some(line), message: message.into() }
}

fn positive(key: &'static str, e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = e.value.parse().map_err(|_| invalid(key, e.line, format!("`{}` is not a number", e.value)))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(key, e.line, format!("must be positive and finite, got {v}")));
    }
    Ok(v)
}

fn resolution(key: &'static str, e: &Entry) -> Result<usize, ConfigError> {
    let n: usize = e
        .value
        .parse()
        .map_err(|_| invalid(key, e.line, format!("`{}` is not a nonnegative integer", e.value)))?;
    if n % 2 != 0 {
        return Err(invalid(key, e.line, format!("resolution must be even, got {n}")));
    }
    if n < 4 {
        return Err(invalid(key, e.line, format!("resolution must be at least 4, got {n}")));
    }
    Ok(n)
}

/// Splits `name(a, b, c)` into the name and trimmed arguments.
fn call(text: &str) -> Option<(&str, Vec<&str>)> {
    let open = text.find('(')?;
    let inner = text[open + 1..].strip_suffix(')')?;
    let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(str::trim).collect() };
    Some((text[..open].trim(), args))
}

fn parse_ic(e: &Entry) -> Result<IcSpec, ConfigError> {
    let bad = |m: String| invalid("ic", e.line, m);
    let (name, args) = call(e.value).ok_or_else(|| bad(format!("expected `name(args)`, got `{}`", e.value)))?;
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(bad(format!("{name} takes {n} arguments, got {}", args.len())))
        }
    };
    let int = |s: &str| s.parse::<i64>().map_err(|_| bad(format!("`{s}` is not an integer")));
    let real = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("`{s}` is not a finite number")))
    };
    match name {
        "single_mode" => {
            arity(4)?;
            let k = Wavevector::new(int(args[0])?, int(args[1])?, int(args[2])?);
            if k.horizontal_sq() == 0 {
                return Err(bad("horizontal wavenumber zero: single_mode needs k1² + k2² ≠ 0".into()));
            }
            Ok(IcSpec::SingleMode { k, amplitude: real(args[3])? })
        }
        "random" => {
            arity(3)?;
            let seed = args[0].parse::<u64>().map_err(|_| bad(format!("seed `{}` is not a nonnegative integer", args[0])))?;
            let k0 = real(args[1])?;
            if k0 <= 0.0 {
                return Err(bad(format!("k0 must be positive, got {k0}")));
            }
            let amplitude = real(args[2])?;
            if amplitude < 0.0 {
                return Err(bad(format!("amplitude must be nonnegative, got {amplitude}")));
            }
            Ok(IcSpec::Random { seed, k0, amplitude })
        }
        "file" => {
            arity(1)?;
            let path = args[0].trim_matches('"');
            if path.is_empty() {
                return Err(bad("empty path".into()));
            }
            Ok(IcSpec::File(PathBuf::from(path)))
        }
        other => Err(bad(format!("unknown initial condition `{other}`"))),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut entries: HashMap<&'static str, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax { line, message: "missing key before `=`".into() });
        }
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
        if value.is_empty() {
            return Err(ConfigError::Syntax { line, message: format!("missing value for `{key}`") });
        }
        if entries.insert(key, Entry { line, value }).is_some() {
            return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
        }
    }

    let get = |key: &'static str| entries.get(key).ok_or(ConfigError::MissingKey(key));
    let length = positive("L", get("L")?)?;
    let rayleigh = positive("Ra", get("Ra")?)?;
    let nx = resolution("nx", get("nx")?)?;
    let ny = resolution("ny", get("ny")?)?;
    let nz = resolution("nz", get("nz")?)?;
    let t_end = positive("t_end", get("t_end")?)?;
    let ic = parse_ic(get("ic")?)?;
    let dt = match entries.get("dt") {
        None => TimeStep::Auto,
        Some(e) if e.value == "auto" => TimeStep::Auto,
        Some(e) => TimeStep::Fixed(positive("dt", e)?),
    };
    let output_every = match entries.get("output_every") {
        None => t_end / 100.0,
        Some(e) => positive("output_every", e)?,
    };
    let dealias = match entries.get("dealias") {
        None => Dealias::TwoThirds,
        Some(e) if e.value == "two_thirds" => Dealias::TwoThirds,
        Some(e) => return Err(invalid("dealias", e.line, format!("only `two_thirds` is supported, got `{}`", e.value))),
    };

    let config = SimConfig { length, rayleigh, nx, ny, nz, dt, t_end, output_every, dealias, ic };
    if let IcSpec::SingleMode { k, .. } = config.ic {
        if !config.grid().is_retained(k) {
            return Err(invalid("ic", get("ic")?.line, format!("wavevector ({}, {}, {}) is not resolved on this grid", k.k1, k.k2, k.k3)));
        }
    }
    Ok(config)
}

impl SimConfig {
    /// Reads `path`; a relative `file(...)` initial condition is resolved
    /// against the directory holding the config.
    pub fn from_path(path: &Path) -> Result<Self, crate::CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::CliError::Io { path: path.to_path_buf(), source })?;
        let mut config = parse_config(&text)?;
        if let IcSpec::File(p) = &mut config.ic {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.nx, self.ny, self.nz, self.length).expect("validated on parse")
    }

    pub fn params(&self) -> PhysParams {
        PhysParams::new(self.rayleigh, self.length).expect("validated on parse")
    }

    pub fn time_step(&self) -> f64 {
        match self.dt {
            TimeStep::Auto => StepperConfig::auto_dt(&self.grid()),
            TimeStep::Fixed(dt) => dt,
        }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig::rk4(self.time_step()).expect("validated on parse")
    }

    /// Builds the starting state. A checkpoint must match the configured grid
    /// and `L`; its time and coefficients are kept, `Ra` comes from the config.
    pub fn initial_state(&self) -> Result<SimState, SetupError> {
        let grid = self.grid();
        let params = self.params();
        let ic = match &self.ic {
            IcSpec::SingleMode { k, amplitude } => InitialCondition::SingleMode { k: *k, amplitude: *amplitude },
            IcSpec::Random { seed, k0, amplitude } => InitialCondition::Random { seed: *seed, k0: *k0, amplitude: *amplitude },
            IcSpec::File(path) => {
                let loaded = read_checkpoint(path).map_err(|source| SetupError::Checkpoint { path: path.clone(), source })?;
                if *loaded.grid() != grid {
                    let [x, y, z] = loaded.grid().dims();
                    return Err(SetupError::State(format!(
                        "{} holds a {x}x{y}x{z} field with L = {}, config asks for {}x{}x{} with L = {}",
                        path.display(),
                        loaded.grid().length(),
                        self.nx,
                        self.ny,
                        self.nz,
                        self.length
                    )));
                }
                let mut state = SimState::new(loaded.theta, params).map_err(|e| SetupError::State(e.to_string()))?;
                state.time = loaded.time;
                return Ok(state);
            }
        };
        let theta = ic.build(&grid).map_err(|e| SetupError::State(e.to_string()))?;
        SimState::new(theta, params).map_err(|e| SetupError::State(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "L = 1.0\nRa = 1.0\nnx = 32\nny = 32\nnz = 32\ndt = auto\nt_end = 2.0\noutput_every = 0.1\nic = single_mode(1,0,1, 1e-8)";

    fn with(line: &str) -> String {
        let key = line.split('=').next().unwrap().trim();
        let mut out: Vec<String> =
            BASE.lines().filter(|l| l.split('=').next().unwrap().trim() != key).map(String::from).collect();
        out.push(line.to_string());
        out.join("\n")
    }

    #[test]
    fn happy_path() {
        let c = parse_config(BASE).unwrap();
        assert_eq!(c.length, 1.0);
        assert_eq!([c.nx, c.ny, c.nz], [32, 32, 32]);
        assert_eq!(c.dt, TimeStep::Auto);
        assert_eq!(c.output_every, 0.1);
        assert_eq!(c.dealias, Dealias::TwoThirds);
        assert_eq!(c.ic, IcSpec::SingleMode { k: Wavevector::new(1, 0, 1), amplitude: 1e-8 });
        assert!(c.initial_state().is_ok());
    }

    #[test]
    fn zero_horizontal_wavenumber() {
        let err = parse_config(&with("ic = single_mode(0,0,1, 1.0)")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { key: "ic", .. }));
        assert!(err.to_string().contains("horizontal wavenumber zero"));
    }

    #[test]
    fn odd_resolution() {
        let err = parse_config(&with("nx = 31")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { key: "nx", line: Some(9), .. }));
        assert!(err.to_string().contains("even"));
    }

    #[test]
    fn unknown_duplicate_missing_and_syntax() {
        assert_eq!(
            parse_config(&format!("{BASE}\nRA = 2")).unwrap_err(),
            ConfigError::UnknownKey { line: 10, key: "RA".into() }
        );
        assert_eq!(
            parse_config(&format!("{BASE}\nRa = 2")).unwrap_err(),
            ConfigError::DuplicateKey { line: 10, key: "Ra".into() }
        );
        let no_ra: String = BASE.lines().filter(|l| !l.starts_with("Ra")).collect::<Vec<_>>().join("\n");
        assert_eq!(parse_config(&no_ra).unwrap_err(), ConfigError::MissingKey("Ra"));
        assert!(matches!(parse_config(&format!("{BASE}\njunk")).unwrap_err(), ConfigError::Syntax { line: 10, .. }));
        assert!(matches!(parse_config(&format!("{BASE}\ndealias =")).unwrap_err(), ConfigError::Syntax { line: 10, .. }));
    }

    #[test]
    fn comments_defaults_and_values() {
        let text = "# header\nL = 2 # wide\nRa=3\nnx=8\nny=8\nnz=8\n\nt_end=1\nic = random(3, 1.5, 0.5)\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.length, 2.0);
        assert_eq!(c.rayleigh, 3.0);
        assert_eq!(c.dt, TimeStep::Auto);
        assert_eq!(c.output_every, 0.01);
        assert_eq!(c.ic, IcSpec::Random { seed: 3, k0: 1.5, amplitude: 0.5 });
        assert!((c.time_step() - StepperConfig::auto_dt(&c.grid())).abs() == 0.0);
    }

    #[test]
    fn rejects_bad_values() {
        for (line, key) in [
            ("L = -1", "L"),
            ("Ra = 0", "Ra"),
            ("Ra = nan", "Ra"),
            ("dt = fast", "dt"),
            ("t_end = inf", "t_end"),
            ("nz = 2", "nz"),
            ("output_every = 0", "output_every"),
            ("dealias = none", "dealias"),
            ("ic = random(-1, 1, 1)", "ic"),
            ("ic = random(1, 0, 1)", "ic"),
            ("ic = single_mode(1, 0, 1)", "ic"),
            ("ic = single_mode(20, 0, 1, 1)", "ic"),
            ("ic = spiral(1)", "ic"),
            ("ic = file()", "ic"),
        ] {
            match parse_config(&with(line)) {
                Err(ConfigError::Invalid { key: k, .. }) => assert_eq!(k, key, "{line}"),
                other => panic!("{line}: {other:?}"),
            }
        }
    }

    #[test]
    fn file_ic_is_parsed() {
        let c = parse_config(&with("ic = file(\"start.ipc\")")).unwrap();
        assert_eq!(c.ic, IcSpec::File(PathBuf::from("start.ipc")));
        assert!(matches!(c.initial_state(), Err(SetupError::Checkpoint { .. })));
    }
}
