//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};

use crate::lattice::{Discretization, Grid};
use crate::parser::{parse_superpotential, SuperpotentialAst};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Entry of the observable catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSpec {
    Hamiltonian,
    Position,
    Momentum,
    Sigma3,
    Yukawa(f64),
    Jc(f64),
    /// Diagonal multiplication by a polynomial in `q`, on both components.
    Poly(String),
}

impl ObservableSpec {
    /// Odd observables mix the two spin sectors.
    pub fn is_odd(&self) -> bool {
        matches!(self, ObservableSpec::Jc(g) if *g != 0.0)
    }

    pub fn label(&self) -> String {
        match self {
            ObservableSpec::Hamiltonian => "hamiltonian".into(),
            ObservableSpec::Position => "position".into(),
            ObservableSpec::Momentum => "momentum".into(),
            ObservableSpec::Sigma3 => "sigma3".into(),
            ObservableSpec::Yukawa(g) => format!("yukawa:{g}"),
            ObservableSpec::Jc(g) => format!("jc:{g}"),
            ObservableSpec::Poly(e) => format!("poly:{e}"),
        }
    }
}

fn parse_coupling(name: &str, arg: Option<&str>) -> Result<f64, ConfigError> {
    let Some(arg) = arg else {
        return err(format!("observable '{name}' needs a coupling, e.g. {name}:0.5"));
    };
    match arg.trim().parse::<f64>() {
        Ok(g) if g.is_finite() => Ok(g),
        _ => err(format!("invalid coupling '{arg}' for observable '{name}'")),
    }
}

impl FromStr for ObservableSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let plain = |spec: ObservableSpec| match arg {
            None => Ok(spec),
            Some(_) => err(format!("observable '{name}' takes no argument")),
        };
        match name {
            "hamiltonian" => plain(ObservableSpec::Hamiltonian),
            "position" => plain(ObservableSpec::Position),
            "momentum" => plain(ObservableSpec::Momentum),
            "sigma3" => plain(ObservableSpec::Sigma3),
            "yukawa" => Ok(ObservableSpec::Yukawa(parse_coupling(name, arg)?)),
            "jc" => Ok(ObservableSpec::Jc(parse_coupling(name, arg)?)),
            "poly" => {
                let expr = arg.unwrap_or("").trim();
                let ast = parse_superpotential(expr)
                    .map_err(|e| ConfigError(format!("observable 'poly:{expr}': {e}")))?;
                if !ast.root().is_polynomial() {
                    return err(format!("observable 'poly:{expr}' is not a polynomial in q"));
                }
                Ok(ObservableSpec::Poly(expr.to_string()))
            }
            _ => err(format!("unknown observable '{name}'")),
        }
    }
}

pub fn parse_observables(list: &str) -> Result<Vec<ObservableSpec>, ConfigError> {
    let specs: Vec<ObservableSpec> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    if specs.is_empty() {
        return err("observable list is empty");
    }
    Ok(specs)
}

/// Which state the `entangle` command analyses. `n` is a row of
/// `spectrum.csv`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// Equal-weight superposition of the two partners in row `n`.
    Doublet(usize),
    /// One component of row `n`, chosen by fermion number.
    Sector { fermion_number: i8, n: usize },
    /// Partners of row `n` with probability weights `(upper, lower)`.
    Weights { upper: f64, lower: f64, n: usize },
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Doublet(n) => write!(f, "doublet:{n}"),
            StateSpec::Sector { fermion_number, n } => write!(f, "sector:{fermion_number:+}:{n}"),
            StateSpec::Weights { upper, lower, n } => write!(f, "weights:{upper}:{lower}:{n}"),
        }
    }
}

fn parse_index(s: &str) -> Result<usize, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| ConfigError(format!("invalid level index '{s}'")))
}

impl FromStr for StateSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["doublet", n] => Ok(StateSpec::Doublet(parse_index(n)?)),
            ["sector", f, n] => {
                let fermion_number = match f.trim() {
                    "+" | "+1" | "1" => 1,
                    "-" | "-1" => -1,
                    other => return err(format!("sector must be +1 or -1, got '{other}'")),
                };
                Ok(StateSpec::Sector {
                    fermion_number,
                    n: parse_index(n)?,
                })
            }
            ["weights", wu, wd, rest @ ..] if rest.len() <= 1 => {
                let w = |x: &str| -> Result<f64, ConfigError> {
                    match x.trim().parse::<f64>() {
                        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                        _ => err(format!("invalid weight '{x}'")),
                    }
                };
                let (upper, lower) = (w(wu)?, w(wd)?);
                if upper + lower == 0.0 {
                    return err("weights must not both be zero");
                }
                let n = rest.first().map_or(Ok(1), |n| parse_index(n))?;
                Ok(StateSpec::Weights { upper, lower, n })
            }
            _ => err(format!(
                "invalid state '{s}'; expected doublet:N, sector:+1|-1:N or weights:WU:WD[:N]"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub superpotential: String,
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
    pub mode: Discretization,
    pub k: usize,
    pub tol_pair: f64,
    pub tol_zero: f64,
    pub tol_product: f64,
    pub observables: Vec<ObservableSpec>,
    pub allow_odd: bool,
    pub state: StateSpec,
    pub g: f64,
    pub truncation: usize,
    pub omega: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            superpotential: "q".into(),
            q_min: -10.0,
            q_max: 10.0,
            n: 1000,
            mode: Discretization::SusyExact,
            k: 10,
            tol_pair: 1e-6,
            tol_zero: 1e-6,
            tol_product: 1e-8,
            observables: vec![ObservableSpec::Hamiltonian],
            allow_odd: false,
            state: StateSpec::Doublet(1),
            g: 0.1,
            truncation: 16,
            omega: 1.0,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => err(format!("invalid boolean '{value}' for '{key}'")),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "W" | "superpotential" => self.superpotential = value.trim().to_string(),
            "qmin" | "q_min" => self.q_min = parse_num(key, value)?,
            "qmax" | "q_max" => self.q_max = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "mode" => {
                self.mode = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("unknown mode '{value}'; use naive or susy-exact")))?
            }
            "k" => self.k = parse_num(key, value)?,
            "tol_pair" | "tol-pair" => self.tol_pair = parse_num(key, value)?,
            "tol_zero" | "tol-zero" => self.tol_zero = parse_num(key, value)?,
            "tol_product" | "tol-product" => self.tol_product = parse_num(key, value)?,
            "observables" => self.observables = parse_observables(value)?,
            "allow_odd" | "allow-odd" => self.allow_odd = parse_bool(key, value)?,
            "state" => self.state = value.parse()?,
            "g" => self.g = parse_num(key, value)?,
            "M" | "truncation" => self.truncation = parse_num(key, value)?,
            "omega" => self.omega = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            _ => return err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. `#` and `;` start comment lines.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("config line {}: expected key = value", lineno + 1));
            };
            self.set(key.trim(), value)
                .map_err(|e| ConfigError(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_file_contents(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        self.ast()?;
        if self.k < 1 {
            return err("k must be at least 1");
        }
        if self.k > self.n {
            return err(format!("k = {} exceeds the grid size n = {}", self.k, self.n));
        }
        for (name, t) in [
            ("tol_pair", self.tol_pair),
            ("tol_zero", self.tol_zero),
            ("tol_product", self.tol_product),
        ] {
            if !(t.is_finite() && t > 0.0) {
                return err(format!("{name} must be positive, got {t}"));
            }
        }
        if !self.g.is_finite() {
            return err("g must be finite");
        }
        if self.truncation < 2 {
            return err("M must be at least 2");
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return err("omega must be positive");
        }
        if !self.allow_odd {
            if let Some(odd) = self.observables.iter().find(|o| o.is_odd()) {
                return err(format!(
                    "observable '{}' is odd in the spin variables; pass --allow-odd to declare it",
                    odd.label()
                ));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.q_min, self.q_max, self.n).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn ast(&self) -> Result<SuperpotentialAst, ConfigError> {
        parse_superpotential(&self.superpotential)
            .map_err(|e| ConfigError(format!("superpotential '{}': {e}", self.superpotential)))
    }

    /// The settings that determine the numbers in a report. The output
    /// directory is left out so that reports written to different places
    /// compare equal.
    pub fn summary(&self) -> Value {
        json!({
            "W": self.superpotential,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "n": self.n,
            "mode": self.mode,
            "k": self.k,
            "tol_pair": self.tol_pair,
            "tol_zero": self.tol_zero,
            "tol_product": self.tol_product,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_file_contents("# demo\nW = q^3\n n=200\nmode = naive\n; note\nobservables = hamiltonian, yukawa:0.5\n")
            .unwrap();
        assert_eq!(c.superpotential, "q^3");
        assert_eq!(c.n, 200);
        assert_eq!(c.mode, Discretization::Naive);
        assert_eq!(c.observables, vec![ObservableSpec::Hamiltonian, ObservableSpec::Yukawa(0.5)]);
        c.set("n", "300").unwrap();
        assert_eq!(c.n, 300);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_entries() {
        let mut c = RunConfig::default();
        assert!(c.apply_file_contents("colour = red").unwrap_err().0.contains("unknown"));
        assert!(c.apply_file_contents("just words").is_err());
        assert!(c.set("mode", "spectral").is_err());
        assert!(c.set("observables", "spin").is_err());
        assert!(c.set("observables", "poly:sin(q)").is_err());
        assert!(c.set("observables", "yukawa").is_err());
        assert!(c.set("observables", "sigma3:2").is_err());
        c.set("W", "sin(q").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn odd_observables_need_opt_in() {
        let mut c = RunConfig::default();
        c.set("observables", "hamiltonian,jc:0.1").unwrap();
        assert!(c.validate().unwrap_err().0.contains("--allow-odd"));
        c.set("allow_odd", "true").unwrap();
        c.validate().unwrap();
        c.set("observables", "hamiltonian,jc:0").unwrap();
        c.set("allow_odd", "false").unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn state_specs() {
        assert_eq!("doublet:2".parse::<StateSpec>().unwrap(), StateSpec::Doublet(2));
        assert_eq!(
            "sector:-1:3".parse::<StateSpec>().unwrap(),
            StateSpec::Sector { fermion_number: -1, n: 3 }
        );
        assert_eq!(
            "weights:1:0".parse::<StateSpec>().unwrap(),
            StateSpec::Weights { upper: 1.0, lower: 0.0, n: 1 }
        );
        assert!("weights:0:0".parse::<StateSpec>().is_err());
        assert!("sector:2:1".parse::<StateSpec>().is_err());
        assert!("bell".parse::<StateSpec>().is_err());
    }

    #[test]
    fn limits() {
        let mut c = RunConfig { k: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c.k = 2000;
        assert!(c.validate().is_err());
        c = RunConfig::default();
        c.tol_zero = 0.0;
        assert!(c.validate().is_err());
        c = RunConfig::default();
        c.q_min = 20.0;
        assert!(c.validate().is_err());
    }
}
