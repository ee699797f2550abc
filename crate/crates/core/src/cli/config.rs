//! Run configuration: a flat `key = value` file, overridden by command-line flags.
//!
//! ```text
//! # decoherence of a 3σ₀/λ measurement
//! lambda = 1
//! sigma0 = 1
//! T = 3
//! sweep.k = 1:64:64
//! sweep.T = 0.1:10:20:log
//! ```
//!
//! A sweep can also be spelled as a block of dotted keys
//! (`sweep.k.start`, `sweep.k.stop`, `sweep.k.count`, `sweep.k.scale`).
//! Multiple sweeps form a Cartesian product, first sweep outermost.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian_model::SgConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    DecoherenceCurve,
    Pointer,
    Entropy,
    CollapseAudit,
    ScalingStudy,
    Validate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DecoherenceCurve => "decoherence-curve",
            Experiment::Pointer => "pointer",
            Experiment::Entropy => "entropy",
            Experiment::CollapseAudit => "collapse-audit",
            Experiment::ScalingStudy => "scaling-study",
            Experiment::Validate => "validate",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Experiment::DecoherenceCurve,
            Experiment::Pointer,
            Experiment::Entropy,
            Experiment::CollapseAudit,
            Experiment::ScalingStudy,
            Experiment::Validate,
        ]
        .into_iter()
        .find(|e| e.name() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format '{s}' (csv|json)"))),
        }
    }
}

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Lambda,
    Sigma0,
    Time,
    K,
    Alpha2,
    Rho,
    /// Prefactor of the shrinking measurement time `T(k) = c/√(2k+1)`.
    C,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Lambda => "lambda",
            Param::Sigma0 => "sigma0",
            Param::Time => "T",
            Param::K => "k",
            Param::Alpha2 => "alpha2",
            Param::Rho => "rho",
            Param::C => "c",
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lambda" => Param::Lambda,
            "sigma0" => Param::Sigma0,
            "T" => Param::Time,
            "k" => Param::K,
            "alpha2" => Param::Alpha2,
            "rho" => Param::Rho,
            "c" => Param::C,
            _ => return Err(Error::Sweep(format!("unknown parameter '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn new(param: Param, start: f64, stop: f64, count: usize, scale: Scale) -> Result<Self> {
        let spec = SweepSpec {
            param,
            start,
            stop,
            count,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let name = self.param.name();
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Sweep(format!("sweep over {name}: bounds must be finite")));
        }
        if self.count == 1 && self.start != self.stop {
            return Err(Error::Sweep(format!(
                "sweep over {name}: a single point needs start = stop"
            )));
        }
        if self.count == 0 || (self.count >= 2 && !(self.start < self.stop)) {
            return Err(Error::Sweep(format!(
                "sweep over {name}: need count >= 2 and start < stop"
            )));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err(Error::Sweep(format!("sweep over {name}: log scale needs start > 0")));
        }
        Ok(())
    }

    /// Parses `param:start:stop:count[:log|:linear]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::Sweep(format!("'{spec}': expected param:start:stop:count[:log]")));
        }
        let param = parts[0].parse()?;
        Self::from_parts(param, &parts[1..])
    }

    fn from_parts(param: Param, parts: &[&str]) -> Result<Self> {
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Sweep(format!("sweep over {}: '{s}' is not a number", param.name())))
        };
        let count = parts[2]
            .parse::<usize>()
            .map_err(|_| Error::Sweep(format!("sweep over {}: bad count '{}'", param.name(), parts[2])))?;
        let scale = match parts.get(3).copied() {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(Error::Sweep(format!("unknown scale '{other}'"))),
        };
        Self::new(param, num(parts[0])?, num(parts[1])?, count, scale)
    }

    /// Sweep values in order. Integer parameters are rounded and consecutive
    /// duplicates dropped.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        let raw = (0..n).map(|i| {
            if i == n - 1 {
                return self.stop;
            }
            let f = i as f64 / (n - 1) as f64;
            match self.scale {
                Scale::Linear => self.start + f * (self.stop - self.start),
                Scale::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
            }
        });
        if self.param == Param::K {
            let mut out: Vec<f64> = raw.map(f64::round).collect();
            out.dedup();
            out
        } else {
            raw.collect()
        }
    }
}

/// Model parameters at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub lambda: f64,
    pub sigma0: f64,
    /// Measurement time; `None` means `t_D = 3σ₀/λ`.
    pub time: Option<f64>,
    pub k: u64,
    pub alpha2: f64,
    pub rho: f64,
    /// When set, the measurement time is `c/√(2k+1)`.
    pub c: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            lambda: 1.0,
            sigma0: 1.0,
            time: None,
            k: 1,
            alpha2: 0.5,
            rho: 1.0,
            c: None,
        }
    }
}

impl Params {
    fn set(&mut self, param: Param, value: f64) -> Result<()> {
        match param {
            Param::Lambda => self.lambda = value,
            Param::Sigma0 => self.sigma0 = value,
            Param::Time => self.time = Some(value),
            Param::K => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::InvalidConfig(format!(
                        "k must be a non-negative integer, got {value}"
                    )));
                }
                self.k = value as u64
            }
            Param::Alpha2 => self.alpha2 = value,
            Param::Rho => self.rho = value,
            Param::C => self.c = Some(value),
        }
        Ok(())
    }

    /// Measurement time at this point.
    pub fn measurement_time(&self) -> f64 {
        match (self.c, self.time) {
            (Some(c), _) => c / ((2 * self.k + 1) as f64).sqrt(),
            (None, Some(t)) => t,
            (None, None) => 3.0 * self.sigma0 / self.lambda,
        }
    }

    pub fn sg_config(&self) -> Result<SgConfig> {
        SgConfig::with_alpha2(self.lambda, self.sigma0, self.measurement_time(), self.k, self.alpha2)
    }
}

/// Parsed contents of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub values: Vec<(Param, f64)>,
    pub sweeps: Vec<SweepSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

pub fn parse_config_text(text: &str) -> Result<ConfigFile> {
    let mut file = ConfigFile::default();
    // dotted sweep blocks: param -> [start, stop, count, scale]
    let mut blocks: Vec<(Param, [Option<String>; 4])> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
        if let Some(rest) = key.strip_prefix("sweep.") {
            match rest.split_once('.') {
                None => {
                    let param: Param = rest.parse()?;
                    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
                    if !(3..=4).contains(&parts.len()) {
                        return Err(Error::Sweep(format!(
                            "line {}: expected start:stop:count[:log]",
                            lineno + 1
                        )));
                    }
                    file.sweeps.push(SweepSpec::from_parts(param, &parts)?);
                }
                Some((name, field)) => {
                    let param: Param = name.parse()?;
                    let slot = match field {
                        "start" => 0,
                        "stop" => 1,
                        "count" => 2,
                        "scale" => 3,
                        _ => {
                            return Err(Error::Sweep(format!(
                                "line {}: unknown sweep field '{field}'",
                                lineno + 1
                            )))
                        }
                    };
                    let idx = match blocks.iter().position(|(p, _)| *p == param) {
                        Some(i) => i,
                        None => {
                            blocks.push((param, Default::default()));
                            blocks.len() - 1
                        }
                    };
                    blocks[idx].1[slot] = Some(value.to_string());
                }
            }
            continue;
        }
        match key {
            "experiment" => file.experiment = Some(value.parse()?),
            "out" => file.out = Some(PathBuf::from(value)),
            "format" => file.format = Some(value.parse()?),
            _ => {
                let param: Param = key
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("line {}: unknown key '{key}'", lineno + 1)))?;
                let v = value
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("line {}: '{value}' is not a number", lineno + 1)))?;
                file.values.push((param, v));
            }
        }
    }
    for (param, fields) in blocks {
        let get = |i: usize, what: &str| {
            fields[i]
                .clone()
                .ok_or_else(|| Error::Sweep(format!("sweep.{} block is missing '{what}'", param.name())))
        };
        let start = get(0, "start")?;
        let stop = get(1, "stop")?;
        let count = get(2, "count")?;
        let mut parts = vec![start.as_str(), stop.as_str(), count.as_str()];
        let scale = fields[3].clone();
        if let Some(s) = scale.as_deref() {
            parts.push(s);
        }
        file.sweeps.push(SweepSpec::from_parts(param, &parts)?);
    }
    Ok(file)
}

/// Values given on the command line; they win over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub values: Vec<(Param, f64)>,
    pub sweeps: Vec<SweepSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: Params,
    pub sweeps: Vec<SweepSpec>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            params: Params::default(),
            sweeps: Vec::new(),
            out: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn with_sweep(mut self, spec: &str) -> Result<Self> {
        self.sweeps.push(SweepSpec::parse(spec)?);
        Ok(self)
    }

    pub fn with_param(mut self, param: Param, value: f64) -> Result<Self> {
        self.params.set(param, value)?;
        Ok(self)
    }

    /// Merges defaults, the config file, and command-line overrides in that order.
    /// A command-line sweep replaces a file sweep over the same parameter.
    pub fn resolve(experiment: Experiment, file: Option<ConfigFile>, overrides: Overrides) -> Result<Self> {
        let mut run = RunConfig::new(experiment);
        if let Some(file) = file {
            if let Some(e) = file.experiment {
                if e != experiment {
                    return Err(Error::InvalidConfig(format!(
                        "config file is for '{}', command is '{}'",
                        e.name(),
                        experiment.name()
                    )));
                }
            }
            for (p, v) in file.values {
                run.params.set(p, v)?;
            }
            run.sweeps = file.sweeps;
            run.out = file.out;
            if let Some(f) = file.format {
                run.format = f;
            }
        }
        for (p, v) in overrides.values {
            run.params.set(p, v)?;
        }
        for s in overrides.sweeps {
            run.sweeps.retain(|existing| existing.param != s.param);
            run.sweeps.push(s);
        }
        if overrides.out.is_some() {
            run.out = overrides.out;
        }
        if let Some(f) = overrides.format {
            run.format = f;
        }
        run.check_sweeps()?;
        Ok(run)
    }

    fn check_sweeps(&self) -> Result<()> {
        for (i, s) in self.sweeps.iter().enumerate() {
            if self.sweeps[..i].iter().any(|o| o.param == s.param) {
                return Err(Error::Sweep(format!("parameter {} swept twice", s.param.name())));
            }
        }
        Ok(())
    }

    /// All sweep points in sweep order (first sweep outermost).
    pub fn points(&self) -> Result<Vec<Params>> {
        let mut points = vec![self.params];
        for sweep in &self.sweeps {
            let values = sweep.values();
            let mut next = Vec::with_capacity(points.len() * values.len());
            for p in &points {
                for &v in &values {
                    let mut q = *p;
                    q.set(sweep.param, v)?;
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }
}
