use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Experiment {
    Hom,
    BellMeasure,
    TeleportDv,
    QkdDv,
    MdiQkd,
    PhotonSubtract,
    Hadamard,
    Cnot,
    Mzi,
    Rng,
    G2,
    Homodyne,
    TeleportCv,
    QkdCv,
    Physicality,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Hom => "hom",
            Experiment::BellMeasure => "bell-measure",
            Experiment::TeleportDv => "teleport-dv",
            Experiment::QkdDv => "qkd-dv",
            Experiment::MdiQkd => "mdi-qkd",
            Experiment::PhotonSubtract => "photon-subtract",
            Experiment::Hadamard => "hadamard",
            Experiment::Cnot => "cnot",
            Experiment::Mzi => "mzi",
            Experiment::Rng => "rng",
            Experiment::G2 => "g2",
            Experiment::Homodyne => "homodyne",
            Experiment::TeleportCv => "teleport-cv",
            Experiment::QkdCv => "qkd-cv",
            Experiment::Physicality => "physicality",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Numeric parameters shared by all experiments. Each experiment reads the
/// subset it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub theta: f64,
    pub phi: f64,
    pub r: f64,
    pub s: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub trials: Option<u64>,
    pub cutoff: u32,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            theta: FRAC_PI_4,
            phi: FRAC_PI_2,
            r: 1.0,
            s: 0.0,
            alpha: Complex64::new(FRAC_1_SQRT_2, 0.0),
            beta: Complex64::new(FRAC_1_SQRT_2, 0.0),
            trials: None,
            cutoff: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub params: Params,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            params: Params::default(),
            seed: 42,
        }
    }
}

/// Parses `re,im` (or a bare real number).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("invalid number {s:?} in complex value {text:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im but got {text:?}")),
    }
}

/// Keys accepted in a config file; they mirror the command-line flags.
pub const CONFIG_KEYS: [&str; 11] = [
    "theta", "phi", "r", "s", "alpha", "beta", "trials", "seed", "cutoff", "out", "format",
];

/// Reads a flat `key = value` file. Blank lines and lines starting with `#`
/// are ignored; unknown keys are rejected.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.contains(&k) {
            return Err(CliError::Validation(format!("config line {}: unknown key {k:?}", n + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1,2").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(parse_complex(" -0.5 , 0 ").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("a,b").is_err());
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn config_parsing() {
        let c = parse_config("# sweep\ntheta = 0.3\n\nseed=7\n").unwrap();
        assert_eq!(c["theta"], "0.3");
        assert_eq!(c["seed"], "7");
        assert!(matches!(parse_config("gamma = 1"), Err(CliError::Validation(_))));
        assert!(matches!(parse_config("theta 1"), Err(CliError::Validation(_))));
    }
}
