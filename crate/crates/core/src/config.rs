//! Flat `key = value` experiment configuration.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linearised::NoiseSpec;
use crate::phantom::{Phantom, PhantomKind};
use crate::reconstruct::ReconstructionConfig;

pub const KEYS: &[&str] = &[
    "omega",
    "kappa_min",
    "kappa_step",
    "K",
    "n_angles",
    "grid_forward",
    "grid_inverse",
    "noise_delta",
    "seed",
    "phantom",
    "amplitude",
    "n_boundary",
    "xi1",
    "xi2",
    "omegas",
    "deltas",
    "seeds",
    "alpha",
    "m1",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub omega: f64,
    pub kappa_min: f64,
    pub kappa_step: f64,
    pub truncation: Option<f64>,
    pub n_angles: usize,
    pub grid_forward: usize,
    pub grid_inverse: usize,
    pub noise_delta: f64,
    pub seed: u64,
    pub phantom: PhantomKind,
    pub amplitude: f64,
    pub n_boundary: usize,
    /// Phase point for the single-excitation commands.
    pub xi: [f64; 2],
    pub omegas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub m1: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            omega: 5.0,
            kappa_min: 0.2,
            kappa_step: 0.2,
            truncation: None,
            n_angles: 19,
            grid_forward: 200,
            grid_inverse: 90,
            noise_delta: 0.0,
            seed: 0,
            phantom: PhantomKind::Peaks,
            amplitude: 1.0,
            n_boundary: 720,
            xi: [-1.0, 0.0],
            omegas: vec![5.0, 10.0, 15.0],
            deltas: vec![0.02, 0.05, 0.1, 0.2, 0.4],
            seeds: (0..5).collect(),
            alpha: 1.0,
            m1: 1.0,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value '{value}' for key '{key}'"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(bad(key, value));
    }
    Ok(items)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "omega" => self.omega = num(key, value)?,
            "kappa_min" => self.kappa_min = num(key, value)?,
            "kappa_step" => self.kappa_step = num(key, value)?,
            "K" => self.truncation = Some(num(key, value)?),
            "n_angles" => self.n_angles = num(key, value)?,
            "grid_forward" => self.grid_forward = num(key, value)?,
            "grid_inverse" => self.grid_inverse = num(key, value)?,
            "noise_delta" => self.noise_delta = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "phantom" => self.phantom = value.parse()?,
            "amplitude" => self.amplitude = num(key, value)?,
            "n_boundary" => self.n_boundary = num(key, value)?,
            "xi1" => self.xi[0] = num(key, value)?,
            "xi2" => self.xi[1] = num(key, value)?,
            "omegas" => self.omegas = list(key, value)?,
            "deltas" => self.deltas = list(key, value)?,
            "seeds" => self.seeds = list(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "m1" => self.m1 = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies `--key=value` overrides.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, args: &[S]) -> Result<()> {
        for arg in args {
            let arg = arg.as_ref();
            let body = arg
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("unexpected argument '{arg}'")))?;
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{arg}' needs --key=value")))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn phantom(&self) -> Phantom {
        Phantom::new(self.phantom, self.amplitude)
    }

    pub fn noise(&self) -> Result<Option<NoiseSpec>> {
        if self.noise_delta == 0.0 {
            return Ok(None);
        }
        Ok(Some(NoiseSpec::new(self.noise_delta, self.seed)?))
    }

    pub fn reconstruction(&self, omega: f64) -> Result<ReconstructionConfig> {
        let mut cfg = ReconstructionConfig::new(omega);
        cfg.truncation = self.truncation;
        cfg.kappa_min = self.kappa_min;
        cfg.kappa_step = self.kappa_step;
        cfg.n_angles = self.n_angles;
        cfg.grid_forward = self.grid_forward;
        cfg.grid_inverse = self.grid_inverse;
        cfg.n_boundary = self.n_boundary;
        cfg.noise = self.noise()?;
        cfg.phantom = self.phantom();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "\
# comment line
omega = 15
kappa_min=0.4
kappa_step = 0.1
K = 30   # trailing comment
n_angles = 7
grid_forward = 120
grid_inverse = 45
noise_delta = 0.1
seed = 42
phantom = gauss_bump
amplitude = 0.1
n_boundary = 360
xi1 = 2
xi2 = -3.5
omegas = 5, 15
deltas = 0.1,0.2,0.4
seeds = 1,2
alpha = 0.5
m1 = 2
";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.omega, 15.0);
        assert_eq!(c.truncation, Some(30.0));
        assert_eq!(c.phantom, PhantomKind::GaussBump);
        assert_eq!(c.xi, [2.0, -3.5]);
        assert_eq!(c.omegas, vec![5.0, 15.0]);
        assert_eq!(c.seeds, vec![1, 2]);
        let r = c.reconstruction(c.omega).unwrap();
        assert_eq!(r.cap(), 30.0);
        assert_eq!(r.noise.unwrap().seed, 42);
        assert_eq!(KEYS.len(), 19);
        for k in KEYS {
            let v = if *k == "phantom" { "zero" } else { "1" };
            ExperimentConfig::default().set(k, v).unwrap();
        }
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        for text in ["frequency = 5", "omega", "omega = fast", "phantom = disk", "seeds = "] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn overrides_win() {
        let mut c = ExperimentConfig::parse("omega = 5\n").unwrap();
        c.apply_overrides(&["--omega=10", "--K=12.5"]).unwrap();
        assert_eq!(c.omega, 10.0);
        assert_eq!(c.truncation, Some(12.5));
        assert!(c.apply_overrides(&["omega=3"]).is_err());
        assert!(c.apply_overrides(&["--omega"]).is_err());
    }
}
