//! Study configuration: named presets overlaid with a TOML key/value file.
//!
//! Every key is optional and unknown keys are rejected:
//!
//! ```toml
//! preset = "paper-burgers"   # paper-burgers | paper-burgers-half | smoke
//! nx = 60
//! ny = 30
//! lx = 2.0
//! ly = 1.0
//! t_end = 0.3
//! steps = 100
//! velocity = [1.0, 1.0]
//! training_mus = [1.0, 1.5, 2.0]
//! n_sweep = [5, 10, 15, 20]
//! m_factor = 1.8
//! test_count = 100
//! seed = 2012
//! greedy_tol = 1e-10
//! ei_tol = 1e-10
//! output_every = 25
//! detailed_mu = 1.5
//! output_dir = "out"
//! ```

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use frozenrb_core::reduction::{check_training_set, PARAMETER_RANGE};
use frozenrb_core::{Field, GridSpec};
use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result, StudyError};

pub const PRESETS: [&str; 3] = ["paper-burgers", "paper-burgers-half", "smoke"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub preset: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub t_end: f64,
    pub steps: usize,
    pub velocity: [f64; 2],
    pub training_mus: Vec<f64>,
    pub n_sweep: Vec<usize>,
    /// `M = round(m_factor · N)`, halves rounded away from zero.
    pub m_factor: f64,
    pub test_count: usize,
    pub seed: u64,
    pub greedy_tol: f64,
    pub ei_tol: f64,
    /// Stride between persisted frames of a detailed run.
    pub output_every: usize,
    pub detailed_mu: f64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub preset: Option<String>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub lx: Option<f64>,
    pub ly: Option<f64>,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
    pub velocity: Option<[f64; 2]>,
    pub training_mus: Option<Vec<f64>>,
    pub n_sweep: Option<Vec<usize>>,
    pub m_factor: Option<f64>,
    pub test_count: Option<usize>,
    pub seed: Option<u64>,
    pub greedy_tol: Option<f64>,
    pub ei_tol: Option<f64>,
    pub output_every: Option<usize>,
    pub detailed_mu: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

fn decimal_range(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| k as f64 / 10.0).collect()
}

impl StudyConfig {
    pub fn preset(name: &str) -> Result<StudyConfig> {
        let base = StudyConfig {
            preset: name.to_owned(),
            nx: 120,
            ny: 60,
            lx: 2.0,
            ly: 1.0,
            t_end: 0.3,
            steps: 100,
            velocity: [1.0, 1.0],
            training_mus: decimal_range(10, 20),
            n_sweep: vec![5, 10, 15, 20],
            m_factor: 1.8,
            test_count: 100,
            seed: 2012,
            greedy_tol: 1e-10,
            ei_tol: 1e-10,
            output_every: 25,
            detailed_mu: 1.5,
            output_dir: PathBuf::from("out"),
        };
        match name {
            "paper-burgers" => Ok(base),
            "paper-burgers-half" => Ok(StudyConfig { nx: 60, ny: 30, ..base }),
            "smoke" => Ok(StudyConfig {
                nx: 30,
                ny: 15,
                steps: 20,
                training_mus: vec![1.0, 2.0],
                n_sweep: vec![2],
                m_factor: 2.0,
                test_count: 4,
                output_every: 5,
                ..base
            }),
            other => Err(StudyError::Config(format!("unknown preset {other:?}, expected one of {PRESETS:?}"))),
        }
    }

    /// Preset `default_preset` (or the file's own `preset` key) overlaid with `text`.
    pub fn from_toml(text: &str, default_preset: &str) -> Result<StudyConfig> {
        let o: Overrides = toml::from_str(text).map_err(|e| StudyError::Config(e.to_string()))?;
        let name = o.preset.clone().unwrap_or_else(|| default_preset.to_owned());
        let mut cfg = StudyConfig::preset(&name)?;
        cfg.apply(o);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = o.$f { self.$f = v; })* };
        }
        take!(nx, ny, lx, ly, t_end, steps, velocity, training_mus, n_sweep, m_factor, test_count, seed);
        take!(greedy_tol, ei_tol, output_every, detailed_mu, output_dir);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(StudyError::Config(msg.to_owned()));
        self.grid().map_err(|e| StudyError::Config(e.to_string()))?;
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end must be positive");
        }
        if !self.velocity.iter().all(|b| b.is_finite()) {
            return bad("velocity must be finite");
        }
        check_training_set(&self.training_mus).map_err(|e| StudyError::Config(e.to_string()))?;
        if self.n_sweep.is_empty() || self.n_sweep.contains(&0) {
            return bad("n_sweep must list positive basis sizes");
        }
        if !(self.m_factor.is_finite() && self.m_factor > 0.0) {
            return bad("m_factor must be positive");
        }
        if self.test_count == 0 {
            return bad("test_count must be at least 1");
        }
        if !(self.greedy_tol >= 0.0 && self.ei_tol >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1");
        }
        if !(PARAMETER_RANGE.0..=PARAMETER_RANGE.1).contains(&self.detailed_mu) {
            return bad("detailed_mu must lie in [1, 2]");
        }
        Ok(())
    }

    pub fn grid(&self) -> frozenrb_core::Result<GridSpec> {
        GridSpec::new(self.nx, self.ny, self.lx, self.ly)
    }

    /// Interpolation points used with `n` basis vectors.
    pub fn m_for(&self, n: usize) -> usize {
        (self.m_factor * n as f64).round() as usize
    }

    pub fn n_max(&self) -> usize {
        self.n_sweep.iter().copied().max().unwrap_or(0)
    }

    pub fn m_max(&self) -> usize {
        self.n_sweep.iter().map(|&n| self.m_for(n)).max().unwrap_or(0)
    }

    /// `u₀(x) = ½(1 + sin 2πx₁ · sin 2πx₂)`, cell-center sampled.
    pub fn initial_field(&self) -> Result<Field> {
        Ok(Field::project(self.grid()?, |x, y| 0.5 * (1.0 + (2.0 * PI * x).sin() * (2.0 * PI * y).sin()))?)
    }
}

pub fn load(path: Option<&Path>, default_preset: &str) -> Result<StudyConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).at(p)?,
        None => String::new(),
    };
    StudyConfig::from_toml(&text, default_preset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_preset() {
        let cfg = StudyConfig::from_toml("", "paper-burgers").unwrap();
        assert_eq!((cfg.nx, cfg.ny, cfg.steps), (120, 60, 100));
        assert_eq!(cfg.training_mus.len(), 11);
        assert_eq!(cfg.training_mus[3], 1.3);
        assert_eq!(cfg.m_max(), 36);
    }

    #[test]
    fn overrides_and_rejections() {
        let cfg = StudyConfig::from_toml("nx = 60\n", "paper-burgers").unwrap();
        assert_eq!((cfg.nx, cfg.ny), (60, 60));
        assert!(StudyConfig::from_toml("steps = 0", "paper-burgers").is_err());
        assert!(StudyConfig::from_toml("training_mus = [0.5]", "paper-burgers").is_err());
        assert!(StudyConfig::from_toml("colour = 1", "paper-burgers").is_err());
        assert!(StudyConfig::from_toml("nx = \"many\"", "paper-burgers").is_err());
        assert!(StudyConfig::from_toml("preset = \"huge\"", "paper-burgers").is_err());
    }

    #[test]
    fn m_rule_rounds_half_away() {
        let cfg = StudyConfig { m_factor: 1.5, ..StudyConfig::preset("smoke").unwrap() };
        assert_eq!(cfg.m_for(1), 2);
        assert_eq!(cfg.m_for(3), 5);
        let paper = StudyConfig::preset("paper-burgers").unwrap();
        assert_eq!([5, 10, 15, 20].map(|n| paper.m_for(n)), [9, 18, 27, 36]);
    }
}
