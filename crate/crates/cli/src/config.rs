//! Run configuration: a flat JSON document overlaid by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use parobs_core::spectral_basis::{Boundary, DomainKind};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid value for key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Self { key: key.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Sweep,
    Checks,
    Radial,
    Stokes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DomainArg {
    Interval,
    Square,
    Orthotope3,
    Disk,
    DiskRadial,
    StokesDisk,
}

impl DomainArg {
    pub fn kind(self) -> DomainKind {
        match self {
            DomainArg::Interval => DomainKind::Interval,
            DomainArg::Square => DomainKind::Orthotope { dim: 2 },
            DomainArg::Orthotope3 => DomainKind::Orthotope { dim: 3 },
            DomainArg::Disk => DomainKind::Disk,
            DomainArg::DiskRadial => DomainKind::DiskRadial,
            DomainArg::StokesDisk => DomainKind::StokesDisk,
        }
    }

    fn default_resolution(self) -> usize {
        match self {
            DomainArg::Orthotope3 => 32,
            _ => 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Dirichlet,
    Neumann,
}

impl BoundaryArg {
    pub fn kind(self) -> Boundary {
        match self {
            BoundaryArg::Dirichlet => Boundary::Dirichlet,
            BoundaryArg::Neumann => Boundary::NeumannZeroAverage,
        }
    }
}

/// An inclusive range of truncation orders written `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderRange {
    pub start: usize,
    pub end: usize,
}

impl FromStr for OrderRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let start = a.trim().parse().map_err(|_| format!("bad start in {s:?}"))?;
        let end = b.trim().parse().map_err(|_| format!("bad end in {s:?}"))?;
        Ok(Self { start, end })
    }
}

impl OrderRange {
    fn to_list(self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }
}

/// Values supplied on the command line; each overrides the file key.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub domain: Option<DomainArg>,
    pub boundary: Option<BoundaryArg>,
    pub alpha: Option<f64>,
    pub horizon: Option<f64>,
    pub volume_fraction: Option<f64>,
    pub order: Option<usize>,
    pub orders: Option<OrderRange>,
    pub resolution: Option<usize>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub domain: DomainArg,
    pub boundary: BoundaryArg,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "L")]
    pub volume_fraction: f64,
    #[serde(rename = "N")]
    pub order: usize,
    pub n_list: Vec<usize>,
    pub res: usize,
    /// Stationarity tolerance as a fraction of the domain measure.
    pub tol_stat: f64,
    #[serde(skip)]
    pub out: PathBuf,
}

const KEYS: &[&str] = &[
    "mode", "domain", "boundary", "alpha", "T", "L", "N", "n_list", "res", "out", "tol_stat",
];

#[derive(Default)]
struct FileValues {
    mode: Option<Mode>,
    domain: Option<DomainArg>,
    boundary: Option<BoundaryArg>,
    alpha: Option<f64>,
    horizon: Option<f64>,
    volume_fraction: Option<f64>,
    order: Option<usize>,
    orders: Option<Vec<usize>>,
    resolution: Option<usize>,
    out: Option<PathBuf>,
    tolerance: Option<f64>,
}

fn enum_value<T: ValueEnum>(key: &str, v: &Value) -> Result<T, ConfigError> {
    let s = v.as_str().ok_or_else(|| ConfigError::new(key, "expected a string"))?;
    T::from_str(s, false).map_err(|_| {
        let names: Vec<String> = T::value_variants()
            .iter()
            .filter_map(|x| x.to_possible_value().map(|p| p.get_name().to_string()))
            .collect();
        ConfigError::new(key, format!("{s:?} is not one of {}", names.join(", ")))
    })
}

fn real(key: &str, v: &Value) -> Result<f64, ConfigError> {
    v.as_f64().ok_or_else(|| ConfigError::new(key, format!("expected a number, got {v}")))
}

fn count(key: &str, v: &Value) -> Result<usize, ConfigError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| ConfigError::new(key, format!("expected a nonnegative integer, got {v}")))
}

fn parse_document(doc: &Map<String, Value>) -> Result<FileValues, ConfigError> {
    let mut f = FileValues::default();
    for (key, v) in doc {
        match key.as_str() {
            "mode" => f.mode = Some(enum_value(key, v)?),
            "domain" => f.domain = Some(enum_value(key, v)?),
            "boundary" => f.boundary = Some(enum_value(key, v)?),
            "alpha" => f.alpha = Some(real(key, v)?),
            "T" => f.horizon = Some(real(key, v)?),
            "L" => f.volume_fraction = Some(real(key, v)?),
            "N" => f.order = Some(count(key, v)?),
            "n_list" => {
                f.orders = Some(match v {
                    Value::String(s) => OrderRange::from_str(s)
                        .map_err(|e| ConfigError::new(key, e))?
                        .to_list(),
                    Value::Array(items) => {
                        items.iter().map(|x| count(key, x)).collect::<Result<_, _>>()?
                    }
                    _ => return Err(ConfigError::new(key, "expected \"A..B\" or an array of integers")),
                })
            }
            "res" => f.resolution = Some(count(key, v)?),
            "out" => {
                let s = v.as_str().ok_or_else(|| ConfigError::new(key, "expected a string"))?;
                f.out = Some(PathBuf::from(s));
            }
            "tol_stat" => f.tolerance = Some(real(key, v)?),
            other => {
                return Err(ConfigError::new(
                    other,
                    format!("unknown key; expected one of {}", KEYS.join(", ")),
                ))
            }
        }
    }
    Ok(f)
}

/// Reads the optional config file and applies flag overrides on top.
pub fn parse_config(
    mode: Mode,
    file: Option<&Path>,
    flags: &Overrides,
) -> Result<RunConfig, ConfigError> {
    let doc = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
            parse_str(&text)?
        }
        None => Map::new(),
    };
    build(mode, &doc, flags)
}

pub fn parse_str(text: &str) -> Result<Map<String, Value>, ConfigError> {
    if text.trim().is_empty() {
        return Ok(Map::new());
    }
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ConfigError::new("config", "expected a JSON object")),
        Err(e) => Err(ConfigError::new("config", format!("malformed JSON: {e}"))),
    }
}

/// Merges a parsed document with flags and validates the result.
pub fn build(mode: Mode, doc: &Map<String, Value>, flags: &Overrides) -> Result<RunConfig, ConfigError> {
    let file = parse_document(doc)?;
    if let Some(m) = file.mode {
        if m != mode {
            return Err(ConfigError::new(
                "mode",
                format!("file asks for {m:?} but the subcommand is {mode:?}"),
            ));
        }
    }
    let requested = flags.domain.or(file.domain);
    let domain = match mode {
        Mode::Radial => forced(requested, DomainArg::DiskRadial)?,
        Mode::Stokes => forced(requested, DomainArg::StokesDisk)?,
        _ => requested.unwrap_or(DomainArg::Square),
    };
    let order = flags.order.or(file.order).unwrap_or(6);
    let orders = match flags.orders.map(OrderRange::to_list).or(file.orders) {
        Some(list) => list,
        None if mode == Mode::Sweep => (1..=order).collect(),
        None => vec![order],
    };
    let config = RunConfig {
        mode,
        domain,
        boundary: flags.boundary.or(file.boundary).unwrap_or(BoundaryArg::Dirichlet),
        alpha: flags.alpha.or(file.alpha).unwrap_or(1.0),
        horizon: flags.horizon.or(file.horizon).unwrap_or(0.05),
        volume_fraction: flags.volume_fraction.or(file.volume_fraction).unwrap_or(0.2),
        order,
        n_list: orders,
        res: flags.resolution.or(file.resolution).unwrap_or(domain.default_resolution()),
        tol_stat: flags.tolerance.or(file.tolerance).unwrap_or(0.02),
        out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
    };
    config.validate()?;
    Ok(config)
}

fn forced(requested: Option<DomainArg>, only: DomainArg) -> Result<DomainArg, ConfigError> {
    match requested {
        Some(d) if d != only => Err(ConfigError::new(
            "domain",
            format!("this mode runs on {} only", name(only)),
        )),
        _ => Ok(only),
    }
}

fn name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::new(key, format!("must be a positive finite number, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("T", self.horizon)?;
        if !(self.volume_fraction > 0.0 && self.volume_fraction < 1.0) {
            return Err(ConfigError::new("L", format!("must lie in (0, 1), got {}", self.volume_fraction)));
        }
        if self.res < 8 {
            return Err(ConfigError::new("res", format!("must be >= 8, got {}", self.res)));
        }
        if self.order == 0 {
            return Err(ConfigError::new("N", "must be >= 1"));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return Err(ConfigError::new("n_list", "must be a nonempty list of orders >= 1"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("n_list", "must be strictly increasing"));
        }
        if !(self.tol_stat > 0.0 && self.tol_stat < 1.0) {
            return Err(ConfigError::new("tol_stat", format!("must lie in (0, 1), got {}", self.tol_stat)));
        }
        if self.domain == DomainArg::StokesDisk && self.alpha != 1.0 {
            return Err(ConfigError::new("alpha", "the Stokes disk supports alpha = 1 only"));
        }
        if self.boundary == BoundaryArg::Neumann && self.domain.kind().is_disk_family() {
            return Err(ConfigError::new("boundary", "Neumann conditions are available on orthotopes only"));
        }
        Ok(())
    }

    /// Largest order the run needs.
    pub fn max_order(&self) -> usize {
        match self.mode {
            Mode::Sweep | Mode::Radial => *self.n_list.last().unwrap_or(&self.order),
            _ => self.order,
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {} (alpha={}, T={}, L={}, res={})",
            name(self.mode),
            name(self.domain),
            self.alpha,
            self.horizon,
            self.volume_fraction,
            self.res
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Map<String, Value> {
        parse_str(text).unwrap()
    }

    #[test]
    fn empty_config_gives_defaults() {
        let c = build(Mode::Solve, &doc(""), &Overrides::default()).unwrap();
        assert_eq!(c.domain, DomainArg::Square);
        assert_eq!((c.res, c.order), (256, 6));
        assert_eq!((c.horizon, c.volume_fraction, c.alpha), (0.05, 0.2, 1.0));
        let s = build(Mode::Sweep, &doc("{}"), &Overrides::default()).unwrap();
        assert_eq!(s.n_list, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn out_of_range_volume_fraction_names_the_key() {
        let e = build(Mode::Solve, &doc(r#"{"L": 1.2}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "L");
        let e = build(Mode::Solve, &doc(r#"{"T": -1}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "T");
        let e = build(Mode::Solve, &doc(r#"{"res": 4}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "res");
        let e = build(Mode::Solve, &doc(r#"{"N": "six"}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "N");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = build(Mode::Solve, &doc(r#"{"horizon": 1}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "horizon");
    }

    #[test]
    fn flags_override_the_file() {
        let flags = Overrides { horizon: Some(0.2), ..Default::default() };
        let c = build(Mode::Solve, &doc(r#"{"T": 1.0, "L": 0.3}"#), &flags).unwrap();
        assert_eq!(c.horizon, 0.2);
        assert_eq!(c.volume_fraction, 0.3);
    }

    #[test]
    fn order_ranges() {
        assert_eq!(OrderRange::from_str("1..15").unwrap(), OrderRange { start: 1, end: 15 });
        assert_eq!(OrderRange::from_str("2..=4").unwrap().to_list(), vec![2, 3, 4]);
        assert!(OrderRange::from_str("3").is_err());
        let c = build(Mode::Sweep, &doc(r#"{"n_list": "2..4"}"#), &Overrides::default()).unwrap();
        assert_eq!(c.n_list, vec![2, 3, 4]);
        assert_eq!(c.max_order(), 4);
        let e = build(Mode::Sweep, &doc(r#"{"n_list": [3, 2]}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "n_list");
    }

    #[test]
    fn mode_specific_domains() {
        let c = build(Mode::Radial, &doc(""), &Overrides::default()).unwrap();
        assert_eq!(c.domain, DomainArg::DiskRadial);
        let e = build(Mode::Stokes, &doc(r#"{"domain": "square"}"#), &Overrides::default()).unwrap_err();
        assert_eq!(e.key, "domain");
        let c = build(Mode::Solve, &doc(r#"{"domain": "orthotope3"}"#), &Overrides::default()).unwrap();
        assert_eq!(c.res, 32);
    }
}
