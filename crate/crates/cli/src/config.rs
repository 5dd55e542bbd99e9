//! Flat `key=value` configuration shared by the config file and `--key value` flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rnl_core::families::{FamilyKind, NormMode};
use rnl_core::norms::NormParams;
use rnl_core::solver::{CutoffSpec, SolverParams};
use rnl_core::spectral::FrequencyGrid;
use rnl_core::sweep::s_range;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey(String),
    TypeMismatch { key: String, value: String, expected: &'static str },
    Constraint { key: String, message: String },
    MissingValue(String),
    UnknownCommand(String),
    Syntax { line: usize, text: String },
    Io { path: PathBuf, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigError::TypeMismatch { key, value, expected } => {
                write!(f, "type mismatch for key `{key}`: `{value}` is not {expected}")
            }
            ConfigError::Constraint { key, message } => {
                write!(f, "invalid value for key `{key}`: {message}")
            }
            ConfigError::MissingValue(k) => write!(f, "missing value for key `{k}`"),
            ConfigError::UnknownCommand(c) => write!(
                f,
                "unknown command `{c}` (expected norm, family, sweep, threshold, solve or check)"
            ),
            ConfigError::Syntax { line, text } => {
                write!(f, "config line {line}: expected key=value, got `{text}`")
            }
            ConfigError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Norm,
    Family,
    Sweep,
    Threshold,
    Solve,
    Check,
}

impl FromStr for Command {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "norm" => Command::Norm,
            "family" => Command::Family,
            "sweep" => Command::Sweep,
            "threshold" => Command::Threshold,
            "solve" => Command::Solve,
            "check" => Command::Check,
            _ => return Err(ConfigError::UnknownCommand(s.to_string())),
        })
    }
}

/// Where `norm` takes its field from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSource {
    Family,
    Free,
    Dump,
}

/// Initial data generator for `solve` and `norm field=free`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Rough,
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub d: usize,
    pub n_max: i32,
    pub tau_step: f64,
    pub tau_max: Option<f64>,
    pub s: f64,
    pub b: f64,
    pub mod_threshold: f64,
    pub family: FamilyKind,
    pub mode: NormMode,
    #[serde(rename = "N")]
    pub n_list: Option<Vec<u64>>,
    pub s_range: (f64, f64, f64),
    pub expect_crossing: Option<f64>,
    pub field: FieldSource,
    pub input: Option<PathBuf>,
    pub data: DataKind,
    pub amplitude: f64,
    pub width: f64,
    pub t: f64,
    pub profile_cut: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub ball_radius: Option<f64>,
    pub seed: u64,
    /// Where reports go; not echoed, so reports do not depend on it.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub dump: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: Command::Check,
            d: 2,
            n_max: 64,
            tau_step: 0.25,
            tau_max: None,
            s: -0.6,
            b: 2.0 / 3.0,
            mod_threshold: rnl_core::spectral::MOD_THRESHOLD,
            family: FamilyKind::Example1,
            mode: NormMode::Z,
            n_list: None,
            s_range: (-0.9, -0.4, 0.05),
            expect_crossing: None,
            field: FieldSource::Family,
            input: None,
            data: DataKind::Rough,
            amplitude: 1.0,
            width: 1.0,
            t: 0.0625,
            profile_cut: 32.0,
            max_iterations: 60,
            tolerance: 1e-10,
            ball_radius: None,
            seed: 42,
            out: None,
            dump: false,
        }
    }
}

/// Every accepted key, in canonical (underscore) form.
pub const KEYS: &[&str] = &[
    "command", "d", "n_max", "tau_step", "tau_max", "s", "b", "mod_threshold", "family", "mode",
    "N", "s_range", "expect_crossing", "field", "input", "data", "amplitude", "width", "t",
    "profile_cut", "max_iterations", "tolerance", "ball_radius", "seed", "out", "dump",
];

fn canonical(key: &str) -> Result<&'static str, ConfigError> {
    let k = key.trim().replace('-', "_");
    let k = match k.as_str() {
        "dimension" => "d",
        "n_list" | "n" => "N",
        "contraction_tolerance" => "tolerance",
        "T" => "t",
        other => other,
    };
    KEYS.iter()
        .copied()
        .find(|c| *c == k)
        .ok_or_else(|| ConfigError::UnknownKey(key.trim().to_string()))
}

fn parse<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::TypeMismatch {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn optional<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<Option<T>, ConfigError> {
    match value.trim() {
        "" | "none" | "auto" => Ok(None),
        v => parse(key, v, expected).map(Some),
    }
}

/// Comma-separated positive integers.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<u64>, ConfigError> {
    value
        .split(',')
        .map(|x| parse::<u64>(key, x, "a comma-separated list of integers"))
        .collect()
}

/// `start:end:step`.
pub fn parse_range(key: &str, value: &str) -> Result<(f64, f64, f64), ConfigError> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return Err(ConfigError::TypeMismatch {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a range start:end:step",
        });
    }
    let f = |x: &str| parse::<f64>(key, x, "a range start:end:step");
    Ok((f(parts[0])?, f(parts[1])?, f(parts[2])?))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::TypeMismatch {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a boolean",
        }),
    }
}

impl ExperimentConfig {
    /// Applies one `key=value` pair, checking only its type.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = canonical(key)?;
        let v = value.trim();
        match k {
            "command" => self.command = v.parse()?,
            "d" => self.d = parse(k, v, "an integer")?,
            "n_max" => self.n_max = parse(k, v, "an integer")?,
            "tau_step" => self.tau_step = parse(k, v, "a number")?,
            "tau_max" => self.tau_max = optional(k, v, "a number")?,
            "s" => self.s = parse(k, v, "a number")?,
            "b" => self.b = parse(k, v, "a number")?,
            "mod_threshold" => self.mod_threshold = parse(k, v, "a number")?,
            "family" => self.family = parse(k, v, "a family (example1, example2, remarkuu)")?,
            "mode" => self.mode = parse(k, v, "a norm mode (X or Z)")?,
            "N" => self.n_list = Some(parse_list(k, v)?),
            "s_range" => self.s_range = parse_range(k, v)?,
            "expect_crossing" => self.expect_crossing = optional(k, v, "a number")?,
            "field" => {
                self.field = match v {
                    "family" => FieldSource::Family,
                    "free" => FieldSource::Free,
                    "dump" => FieldSource::Dump,
                    _ => {
                        return Err(ConfigError::TypeMismatch {
                            key: k.into(),
                            value: v.into(),
                            expected: "one of family, free, dump",
                        })
                    }
                }
            }
            "input" => self.input = Some(PathBuf::from(v)),
            "data" => {
                self.data = match v {
                    "rough" => DataKind::Rough,
                    "smooth" => DataKind::Smooth,
                    _ => {
                        return Err(ConfigError::TypeMismatch {
                            key: k.into(),
                            value: v.into(),
                            expected: "one of rough, smooth",
                        })
                    }
                }
            }
            "amplitude" => self.amplitude = parse(k, v, "a number")?,
            "width" => self.width = parse(k, v, "a number")?,
            "t" => self.t = parse(k, v, "a number")?,
            "profile_cut" => self.profile_cut = parse(k, v, "a number")?,
            "max_iterations" => self.max_iterations = parse(k, v, "an integer")?,
            "tolerance" => self.tolerance = parse(k, v, "a number")?,
            "ball_radius" => self.ball_radius = optional(k, v, "a number")?,
            "seed" => self.seed = parse(k, v, "a 64-bit unsigned integer")?,
            "out" => self.out = Some(PathBuf::from(v)),
            "dump" => self.dump = parse_bool(k, v)?,
            _ => unreachable!("every canonical key is handled"),
        }
        Ok(())
    }

    /// Applies a config file: one `key=value` per line, `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Dyadic `N` values, defaulting per norm mode.
    pub fn n_values(&self) -> Vec<u64> {
        self.n_list.clone().unwrap_or_else(|| match self.mode {
            NormMode::X => vec![4, 8, 16, 32, 64, 128],
            NormMode::Z => vec![128, 256, 512, 1024, 2048],
        })
    }

    pub fn norm_params(&self) -> Result<NormParams, ConfigError> {
        NormParams::with_threshold(self.s, self.b, self.mod_threshold).map_err(|e| {
            let key = if !(self.mod_threshold > 0.0) { "mod_threshold" } else if !self.s.is_finite() { "s" } else { "b" };
            constraint(key, e)
        })
    }

    pub fn grid(&self) -> Result<FrequencyGrid, ConfigError> {
        let g = match self.tau_max {
            Some(m) => FrequencyGrid::symmetric(self.d, self.n_max, m, self.tau_step),
            None => FrequencyGrid::new(self.d, self.n_max, self.tau_step),
        };
        g.map_err(|e| {
            let key = if self.tau_max.is_some() { "tau_max" } else { "tau_step" };
            constraint(key, e)
        })
    }

    pub fn cutoff(&self) -> Result<CutoffSpec, ConfigError> {
        let c = CutoffSpec::new(self.t).map_err(|e| constraint("t", e))?;
        c.with_profile_cut(self.profile_cut).map_err(|e| constraint("profile_cut", e))
    }

    pub fn solver_params(&self) -> Result<SolverParams, ConfigError> {
        let mut p = SolverParams::new(self.s).map_err(|e| constraint("s", e))?;
        p.max_iterations = self.max_iterations;
        p.contraction_tolerance = self.tolerance;
        p.ball_radius = self.ball_radius;
        p.keep_iterates = self.dump;
        p.validate().map_err(|e| {
            let key = if self.max_iterations == 0 {
                "max_iterations"
            } else if self.ball_radius.is_some_and(|r| !(r > 0.0)) {
                "ball_radius"
            } else {
                "tolerance"
            };
            constraint(key, e)
        })?;
        Ok(p)
    }

    /// Checks every constraint relevant to the selected command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=2).contains(&self.d) {
            return Err(constraint("d", "dimension must be 1 or 2"));
        }
        if self.n_max < 1 {
            return Err(constraint("n_max", "must be at least 1"));
        }
        self.norm_params()?;
        for (key, x) in [("amplitude", self.amplitude), ("width", self.width)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(constraint(key, "must be positive"));
            }
        }
        if self.dump && self.out.is_none() {
            return Err(constraint("dump", "dumps need an output directory (out)"));
        }
        match self.command {
            Command::Norm => {
                self.grid()?;
                self.cutoff()?;
                if self.field == FieldSource::Dump && self.input.is_none() {
                    return Err(constraint("input", "field=dump needs an input path"));
                }
                if self.field == FieldSource::Family {
                    self.check_n_list(1)?;
                }
            }
            Command::Family => self.check_n_list(1)?,
            Command::Sweep => self.check_n_list(3)?,
            Command::Threshold => {
                self.check_n_list(3)?;
                let (a, e, st) = self.s_range;
                s_range(a, e, st).map_err(|err| constraint("s_range", err))?;
            }
            Command::Solve => {
                self.solver_params()?;
                self.cutoff()?;
                let g = self.grid()?;
                if !g.unit_aligned() {
                    return Err(constraint("tau_step", "1 must be a whole number of tau steps"));
                }
                rnl_core::solver::check_solver_grid(&g).map_err(|e| constraint("n_max", e))?;
            }
            Command::Check => {}
        }
        Ok(())
    }

    fn check_n_list(&self, min_len: usize) -> Result<(), ConfigError> {
        let ns = self.n_values();
        if ns.len() < min_len {
            return Err(constraint("N", format!("need at least {min_len} values")));
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(constraint("N", "values must be strictly increasing"));
        }
        if let Some(bad) = ns.iter().find(|n| !n.is_power_of_two() || **n < 2 || **n > 1 << 20) {
            return Err(constraint("N", format!("{bad} is not a power of two in [2, 2^20]")));
        }
        Ok(())
    }
}

fn constraint(key: &str, e: impl fmt::Display) -> ConfigError {
    ConfigError::Constraint {
        key: key.to_string(),
        message: e.to_string(),
    }
}

/// Parses `[command] [--config path] [--key value]...`; flags override the file.
/// `read` loads the config file text.
pub fn parse_config(
    args: &[String],
    read: impl Fn(&std::path::Path) -> std::io::Result<String>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut file = None;
    let mut command = None;
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if let Some(body) = a.strip_prefix("--") {
            let (key, value) = match body.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = args.get(i + 1).ok_or_else(|| ConfigError::MissingValue(body.to_string()))?;
                    i += 1;
                    (body.to_string(), v.clone())
                }
            };
            if key == "config" {
                file = Some(PathBuf::from(value));
            } else {
                canonical(&key)?;
                flags.push((key, value));
            }
        } else if command.is_none() {
            command = Some(a.parse::<Command>()?);
        } else {
            return Err(ConfigError::UnknownKey(a.clone()));
        }
        i += 1;
    }
    if let Some(path) = file {
        let text = read(&path).map_err(|e| ConfigError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        cfg.apply_file(&text)?;
    }
    for (k, v) in &flags {
        cfg.set(k, v)?;
    }
    if let Some(c) = command {
        cfg.command = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn no_file(_: &std::path::Path) -> std::io::Result<String> {
        Err(std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"))
    }

    #[test]
    fn empty_args_give_defaults() {
        let c = parse_config(&[], no_file).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!((c.d, c.n_max, c.tau_step, c.s, c.b), (2, 64, 0.25, -0.6, 2.0 / 3.0));
        assert_eq!(c.mod_threshold, 2f64.powi(-10));
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config(&args("sweep --s -0.55 --b 0.6667"), no_file).unwrap();
        assert_eq!((c.command, c.s, c.b), (Command::Sweep, -0.55, 0.6667));
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let e = parse_config(&args("--s abc"), no_file).unwrap_err();
        assert!(matches!(&e, ConfigError::TypeMismatch { key, .. } if key == "s"));
        assert!(e.to_string().contains("`s`"));
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(
            parse_config(&args("--bogus 1"), no_file),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            parse_config(&args("--d 3"), no_file),
            Err(ConfigError::Constraint { key, .. }) if key == "d"
        ));
        assert!(matches!(
            parse_config(&args("sweep --N 4,8,12"), no_file),
            Err(ConfigError::Constraint { key, .. }) if key == "N"
        ));
        assert!(matches!(
            parse_config(&args("--s"), no_file),
            Err(ConfigError::MissingValue(_))
        ));
        assert!(matches!(
            parse_config(&args("plot"), no_file),
            Err(ConfigError::UnknownCommand(_))
        ));
    }

    #[test]
    fn file_then_flags() {
        let text = "# comment\nn-max = 16\ns=-0.3 # trailing\nfamily=example2\n\n";
        let read = |_: &std::path::Path| Ok(text.to_string());
        let c = parse_config(&args("family --config x.cfg --s -0.2"), read).unwrap();
        assert_eq!((c.n_max, c.s, c.family), (16, -0.2, FamilyKind::Example2));
        let bad = |_: &std::path::Path| Ok("n_max 16".to_string());
        assert!(matches!(
            parse_config(&args("--config x"), bad),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn dash_and_underscore_are_equivalent() {
        let a = parse_config(&args("--tau-step 0.5 --mod_threshold 0.01"), no_file).unwrap();
        let b = parse_config(&args("--tau_step=0.5 --mod-threshold=0.01"), no_file).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn solve_constraints() {
        assert!(matches!(
            parse_config(&args("solve --s -0.7"), no_file),
            Err(ConfigError::Constraint { key, .. }) if key == "s"
        ));
        assert!(matches!(
            parse_config(&args("solve --t 0.5"), no_file),
            Err(ConfigError::Constraint { key, .. }) if key == "t"
        ));
        assert!(matches!(
            parse_config(&args("solve --tau-step 0.4"), no_file),
            Err(ConfigError::Constraint { key, .. }) if key == "tau_step"
        ));
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("s_range", "-0.9:-0.4:0.05").unwrap(), (-0.9, -0.4, 0.05));
        assert!(parse_range("s_range", "-0.9:-0.4").is_err());
        assert_eq!(parse_list("N", "4, 8,16").unwrap(), vec![4, 8, 16]);
        assert!(parse_list("N", "4,,8").is_err());
    }
}
