//! Run configuration: `key=value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use effham::classical::{Sweep, SweepParameter};
use effham::ModelId;

/// Flags shared by every subcommand. All values stay textual until the
/// merge with the config file, so both sources go through one parser.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Flat `key=value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub omega1: Option<String>,
    #[arg(long)]
    pub omega2: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// Spin size (slow spin, or fast spin of the field-slow model).
    #[arg(long = "A")]
    pub a: Option<String>,
    #[arg(long = "A1")]
    pub a1: Option<String>,
    #[arg(long = "A2")]
    pub a2: Option<String>,
    /// Fock cutoff, or `auto`.
    #[arg(long = "n-max")]
    pub n_max: Option<String>,
    /// Target critical ratio; the coupling is solved for it.
    #[arg(long)]
    pub xi: Option<String>,
    /// Swept parameter: `A` or `g`.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub stop: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    /// Keep the δ² and δ³ terms of the classical energy.
    #[arg(long)]
    pub corrections: bool,
    /// Verification to run: error-scaling, convention, closed-vs-generic, finite-size.
    #[arg(long)]
    pub check: Option<String>,
    /// Comma-separated δ values.
    #[arg(long)]
    pub deltas: Option<String>,
    /// ω₁/ω₂ for error scaling.
    #[arg(long)]
    pub ratio: Option<String>,
    /// Comma-separated spin sizes.
    #[arg(long = "A-list")]
    pub a_list: Option<String>,
    /// Histogram the spectrum into this many bins.
    #[arg(long)]
    pub bins: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads; defaults to EFFHAM_JOBS, then all cores.
    #[arg(long)]
    pub jobs: Option<String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const KEYS: [&str; 23] = [
    "model", "omega1", "omega2", "g", "A", "A1", "A2", "n-max", "xi", "param", "start", "stop", "steps", "tol",
    "corrections", "check", "deltas", "ratio", "A-list", "bins", "output", "format", "jobs",
];

fn canonical_key(raw: &str) -> Option<&'static str> {
    let k = raw.trim().replace('_', "-");
    KEYS.iter().copied().find(|c| *c == k || (c.starts_with('A') && c.eq_ignore_ascii_case(&k)))
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("config line {}: expected key=value", no + 1));
        };
        let Some(key) = canonical_key(k) else {
            return err(format!("config line {}: unknown key '{}'", no + 1, k.trim()));
        };
        out.insert(key.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Config-file entries overlaid with the flags that were given.
pub fn merge(flags: &Flags) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = match &flags.config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    let given = [
        ("model", &flags.model),
        ("omega1", &flags.omega1),
        ("omega2", &flags.omega2),
        ("g", &flags.g),
        ("A", &flags.a),
        ("A1", &flags.a1),
        ("A2", &flags.a2),
        ("n-max", &flags.n_max),
        ("xi", &flags.xi),
        ("param", &flags.param),
        ("start", &flags.start),
        ("stop", &flags.stop),
        ("steps", &flags.steps),
        ("tol", &flags.tol),
        ("check", &flags.check),
        ("deltas", &flags.deltas),
        ("ratio", &flags.ratio),
        ("A-list", &flags.a_list),
        ("bins", &flags.bins),
        ("output", &flags.output),
        ("format", &flags.format),
        ("jobs", &flags.jobs),
    ];
    for (k, v) in given {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    if flags.corrections {
        map.insert("corrections".into(), "true".into());
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Classical,
    Scan,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Classical => "classical",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NMax {
    Auto,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    ErrorScaling,
    Convention,
    ClosedVsGeneric,
    FiniteSize,
}

impl FromStr for Check {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "error-scaling" => Ok(Check::ErrorScaling),
            "convention" => Ok(Check::Convention),
            "closed-vs-generic" => Ok(Check::ClosedVsGeneric),
            "finite-size" => Ok(Check::FiniteSize),
            _ => err(format!(
                "unknown check '{s}'; expected one of error-scaling, convention, closed-vs-generic, finite-size"
            )),
        }
    }
}

/// Fully parsed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<ModelId>,
    pub omega1: f64,
    pub omega2: f64,
    pub g: Option<f64>,
    pub a: Option<f64>,
    pub a1: Option<usize>,
    pub a2: Option<usize>,
    pub n_max: NMax,
    pub xi: Option<f64>,
    pub sweep: Option<Sweep>,
    pub tol: f64,
    pub corrections: bool,
    pub check: Option<Check>,
    pub deltas: Vec<f64>,
    pub ratio: f64,
    pub a_list: Vec<usize>,
    pub bins: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
    /// The merged textual settings, echoed into JSON output.
    pub raw: BTreeMap<String, String>,
}

fn num<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| ConfigError(format!("invalid value '{v}' for {key}"))),
    }
}

fn list<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| ConfigError(format!("invalid entry '{}' in {key}", s.trim()))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some),
    }
}

fn finite(key: &str, v: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match v {
        Some(x) if !x.is_finite() => err(format!("{key} must be finite")),
        other => Ok(other),
    }
}

pub fn resolve(command: Command, raw: BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let model = match raw.get("model") {
        None => None,
        Some(name) => Some(name.parse::<ModelId>().map_err(|_| {
            ConfigError(format!("unknown model '{name}'; valid models: {}", ModelId::valid_names()))
        })?),
    };
    let n_max = match raw.get("n-max").map(String::as_str) {
        None | Some("auto") => NMax::Auto,
        Some(v) => NMax::Fixed(v.parse().map_err(|_| ConfigError(format!("invalid value '{v}' for n-max")))?),
    };
    let format = match raw.get("format").map(String::as_str) {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(v) => return err(format!("unknown format '{v}'; expected csv or json")),
    };
    let corrections = match raw.get("corrections").map(String::as_str) {
        None | Some("false") | Some("0") | Some("no") => false,
        Some("true") | Some("1") | Some("yes") => true,
        Some(v) => return err(format!("invalid value '{v}' for corrections")),
    };
    let jobs = match num::<usize>(&raw, "jobs")? {
        Some(j) => Some(j),
        None => match std::env::var("EFFHAM_JOBS") {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().map_err(|_| ConfigError(format!("invalid EFFHAM_JOBS value '{v}'")))?)
            }
            _ => None,
        },
    };
    if jobs == Some(0) {
        return err("jobs must be at least 1");
    }
    let sweep = match raw.get("param") {
        None => None,
        Some(p) => {
            let parameter: SweepParameter = p.parse().map_err(|e: effham::Error| ConfigError(e.to_string()))?;
            let start = finite("start", num(&raw, "start")?)?.ok_or_else(|| ConfigError("scan needs --start".into()))?;
            let stop = finite("stop", num(&raw, "stop")?)?.ok_or_else(|| ConfigError("scan needs --stop".into()))?;
            let steps: usize = num(&raw, "steps")?.ok_or_else(|| ConfigError("scan needs --steps".into()))?;
            if !(start < stop) {
                return err(format!("sweep start {start} must be below stop {stop}"));
            }
            if steps < 2 {
                return err("sweep needs at least 2 steps");
            }
            Some(Sweep { parameter, start, stop, steps })
        }
    };
    let cfg = RunConfig {
        command,
        model,
        omega1: finite("omega1", num(&raw, "omega1")?)?.unwrap_or(0.01),
        omega2: finite("omega2", num(&raw, "omega2")?)?.unwrap_or(1.0),
        g: finite("g", num(&raw, "g")?)?,
        a: finite("A", num(&raw, "A")?)?,
        a1: num(&raw, "A1")?,
        a2: num(&raw, "A2")?,
        n_max,
        xi: finite("xi", num(&raw, "xi")?)?,
        sweep,
        tol: finite("tol", num(&raw, "tol")?)?.unwrap_or(1e-10),
        corrections,
        check: raw.get("check").map(|s| s.parse()).transpose()?,
        deltas: list(&raw, "deltas")?.unwrap_or_else(|| vec![0.08, 0.04, 0.02]),
        ratio: finite("ratio", num(&raw, "ratio")?)?.unwrap_or(0.01),
        a_list: list(&raw, "A-list")?.unwrap_or_else(|| vec![20, 40, 80]),
        bins: num(&raw, "bins")?,
        output: raw.get("output").map(PathBuf::from),
        format,
        jobs,
        raw,
    };
    cfg.check_required()?;
    Ok(cfg)
}

impl RunConfig {
    fn check_required(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0) {
            return err("tol must be positive");
        }
        if self.g.is_some() && self.xi.is_some() {
            return err("give either g or xi, not both");
        }
        match self.command {
            Command::Spectrum | Command::Scan if self.model.is_none() => {
                return err(format!("{} needs --model ({})", self.command.name(), ModelId::valid_names()))
            }
            Command::Scan if self.sweep.is_none() => return err("scan needs --param, --start, --stop and --steps"),
            Command::Classical if self.a.is_none() => return err("classical needs --A"),
            Command::Verify if self.check.is_none() => {
                return err("verify needs --check (error-scaling, convention, closed-vs-generic, finite-size)")
            }
            _ => {}
        }
        Ok(())
    }

    pub fn model(&self) -> ModelId {
        self.model.expect("model presence is checked on resolve")
    }

    /// `A` as a spin size.
    pub fn spin_size(&self, key: &str, value: Option<f64>) -> Result<usize, ConfigError> {
        let Some(a) = value else {
            return err(format!("--{key} is required for this model"));
        };
        if !(a >= 1.0 && a.fract() == 0.0 && a <= u32::MAX as f64) {
            return err(format!("{key} must be a positive integer spin size, got {a}"));
        }
        Ok(a as usize)
    }
}
