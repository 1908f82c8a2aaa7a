//! JSON run configuration.

use crate::lattice::{make_lattice, Lattice, LatticeError};
use crate::potential::{FourierPotential, Mode, PotentialError, Symmetry};
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// One schema violation, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ConfigIssue>),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub gen1: [f64; 2],
    pub gen2: [f64; 2],
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { gen1: [1.0, 0.0], gen2: [0.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "default_symmetry")]
    pub symmetry: Symmetry,
    /// Rows `[n₁, n₂, re, im]`; the coefficients of `U` (eta pair), of `V = W`
    /// (sigma real) or of `V` (general pair).
    #[serde(default)]
    pub coefficients: Vec<[f64; 4]>,
    /// Rows of `W`, only for the general pair.
    #[serde(default)]
    pub w_coefficients: Option<Vec<[f64; 4]>>,
    /// Named built-in potential; currently `"clifford"`.
    #[serde(default)]
    pub preset: Option<String>,
    /// Harmonic count for the preset.
    #[serde(default)]
    pub terms: Option<usize>,
}

fn default_symmetry() -> Symmetry {
    Symmetry::EtaPair
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    /// Circle center in the `x‑p` plane.
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// `y‑p` near the sheet to follow.
    pub seed_yp: [f64; 2],
}

fn default_steps() -> usize {
    96
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub lattice: LatticeConfig,
    pub potential: PotentialConfig,
    #[serde(default = "default_cutoff")]
    pub cutoff: i64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Slice positions `[re, im]`.
    #[serde(default)]
    pub xp: Vec<[f64; 2]>,
    #[serde(default)]
    pub trace: Option<TraceConfig>,
    /// Conformal class `[re, im]`.
    #[serde(default)]
    pub tau: Option<[f64; 2]>,
    /// Complex momentum `[[re k₁, im k₁], [re k₂, im k₂]]`.
    #[serde(default)]
    pub k: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub fit_range: Option<[f64; 2]>,
    /// Slice radius for the invariance comparison.
    #[serde(default)]
    pub radius: Option<f64>,
}

fn default_cutoff() -> i64 {
    4
}

fn default_grid() -> usize {
    64
}

fn default_seed() -> u64 {
    7
}

fn default_tol() -> f64 {
    1e-10
}

fn parse_rows(rows: &[[f64; 4]], path: &str, issues: &mut Vec<ConfigIssue>) -> BTreeMap<Mode, Complex64> {
    let mut out = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let at = format!("{path}[{i}]");
        if r[0].fract() != 0.0 || r[1].fract() != 0.0 {
            issues.push(ConfigIssue { path: at, message: "mode indices must be integers".into() });
            continue;
        }
        if !r[2].is_finite() || !r[3].is_finite() {
            issues.push(ConfigIssue { path: at, message: "coefficient must be finite".into() });
            continue;
        }
        let n = (r[0] as i64, r[1] as i64);
        if out.insert(n, Complex64::new(r[2], r[3])).is_some() {
            issues.push(ConfigIssue { path: at, message: format!("duplicate coefficient index ({}, {})", n.0, n.1) });
        }
    }
    out
}

impl RunConfig {
    /// Schema checks beyond what the parser enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut bad = |path: &str, message: &str| {
            issues.push(ConfigIssue { path: path.into(), message: message.into() });
        };
        if self.cutoff < 0 {
            bad("cutoff", "must be non-negative");
        }
        if self.grid < 4 || !self.grid.is_multiple_of(2) {
            bad("grid", "must be an even number of at least 4");
        }
        if !(self.tol > 0.0) {
            bad("tol", "tolerance must be positive");
        }
        if let Some(t) = &self.trace {
            if !(t.radius > 0.0) {
                bad("trace.radius", "must be positive");
            }
            if t.steps < 3 {
                bad("trace.steps", "must be at least 3");
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                bad("radius", "must be positive");
            }
        }
        if let Some(t) = self.tau {
            if !(t[1] > 0.0) {
                bad("tau", "imaginary part must be positive");
            }
        }
        if let Some([lo, hi]) = self.fit_range {
            if !(lo > 0.0 && hi > lo) {
                bad("fit_range", "needs 0 < lo < hi");
            }
        }
        let p = &self.potential;
        match (&p.preset, p.terms) {
            (Some(name), _) if name != "clifford" => bad("potential.preset", "unknown preset"),
            (Some(_), _) if !p.coefficients.is_empty() => bad("potential.coefficients", "not allowed with a preset"),
            (None, Some(_)) => bad("potential.terms", "only valid with a preset"),
            _ => {}
        }
        let general = p.symmetry == Symmetry::GeneralPair;
        if general && p.w_coefficients.is_none() && p.preset.is_none() {
            bad("potential.w_coefficients", "required for general_pair");
        }
        if !general && p.w_coefficients.is_some() {
            bad("potential.w_coefficients", "only valid for general_pair");
        }
        parse_rows(&p.coefficients, "potential.coefficients", &mut issues);
        if let Some(w) = &p.w_coefficients {
            parse_rows(w, "potential.w_coefficients", &mut issues);
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(issues))
        }
    }

    pub fn lattice(&self) -> Result<Lattice, ConfigError> {
        Ok(make_lattice(self.lattice.gen1, self.lattice.gen2)?)
    }

    pub fn potential(&self) -> Result<FourierPotential, ConfigError> {
        let p = &self.potential;
        if p.preset.is_some() {
            return Ok(FourierPotential::clifford(p.terms.unwrap_or(30)));
        }
        let mut issues = Vec::new();
        let v = parse_rows(&p.coefficients, "potential.coefficients", &mut issues);
        let w = p.w_coefficients.as_ref().map(|w| parse_rows(w, "potential.w_coefficients", &mut issues));
        if !issues.is_empty() {
            return Err(ConfigError::Invalid(issues));
        }
        Ok(match p.symmetry {
            Symmetry::EtaPair => FourierPotential::eta_pair(v)?,
            Symmetry::SigmaReal => FourierPotential::sigma_real(v)?,
            Symmetry::GeneralPair => FourierPotential::new(v, w.unwrap_or_default(), Symmetry::GeneralPair)?,
        })
    }

    pub fn tau(&self) -> Option<Complex64> {
        self.tau.map(|t| Complex64::new(t[0], t[1]))
    }

    pub fn momentum(&self) -> Option<[Complex64; 2]> {
        self.k.map(|k| [Complex64::new(k[0][0], k[0][1]), Complex64::new(k[1][0], k[1][1])])
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"potential": {"symmetry": "sigma_real", "coefficients": [[0, 0, 2.2, 0]]}}"#).unwrap();
        assert_eq!(cfg.cutoff, 4);
        assert_eq!(cfg.grid, 64);
        assert_eq!(cfg.lattice().unwrap(), Lattice::square());
        assert_eq!(cfg.potential().unwrap(), FourierPotential::constant(2.2));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(r#"{"potential": {"coefficients": []}, "cutof": 3}"#).unwrap_err();
        assert!(err.to_string().contains("cutof"), "{err}");
    }

    #[test]
    fn duplicate_index_and_bad_tolerance_are_aggregated() {
        let err = parse_config(r#"{"potential": {"coefficients": [[1, 0, 0.1, 0], [1, 0, 0.2, 0]]}, "tol": -1}"#)
            .unwrap_err();
        match err {
            ConfigError::Invalid(issues) => {
                assert_eq!(issues.len(), 2);
                assert!(issues.iter().any(|i| i.path == "tol"));
                assert!(issues.iter().any(|i| i.message.contains("duplicate")));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn preset_and_general_pair() {
        let cfg = parse_config(r#"{"potential": {"preset": "clifford", "terms": 5, "symmetry": "sigma_real"}}"#).unwrap();
        assert_eq!(cfg.potential().unwrap(), FourierPotential::clifford(5));
        assert!(parse_config(r#"{"potential": {"symmetry": "general_pair", "coefficients": []}}"#).is_err());
        let g = parse_config(
            r#"{"potential": {"symmetry": "general_pair", "coefficients": [[0,0,1,0]], "w_coefficients": [[0,0,2,0]]}}"#,
        )
        .unwrap();
        assert_eq!(g.potential().unwrap().w_hat((0, 0)), Complex64::new(2.0, 0.0));
    }
}
