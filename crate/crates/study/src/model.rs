//! Offline stage and the on-disk model directory.
//!
//! ```text
//! model/
//!   manifest.toml          hyperparameters, per-scheme metadata, sha256 of every field file
//!   frozen/psi_000.fld …   reduced basis
//!   frozen/xi_000.fld …    collateral basis
//!   unfrozen/…             same for the non-frozen baseline
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use frozenrb_core::freezing::{solve_frozen, solve_unfrozen};
use frozenrb_core::reduction::{check_training_set, ei_greedy, pod_greedy, TrajectorySnapshots};
use frozenrb_core::{BurgersParams, EIData, Field, ReducedBasis, SnapshotSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::StudyConfig;
use crate::error::{IoContext, Result, StudyError};
use crate::fieldio::{encode, read_field};

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Frozen,
    Unfrozen,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Frozen, Scheme::Unfrozen];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Frozen => "frozen",
            Scheme::Unfrozen => "unfrozen",
        }
    }
}

/// Reduced basis and interpolation data of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeModel {
    pub basis: ReducedBasis,
    pub ei: EIData,
    pub greedy_errors: Vec<f64>,
    pub greedy_selected: Vec<usize>,
    pub stagnated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: StudyConfig,
    pub frozen: SchemeModel,
    pub unfrozen: SchemeModel,
}

impl Model {
    pub fn scheme(&self, s: Scheme) -> &SchemeModel {
        match s {
            Scheme::Frozen => &self.frozen,
            Scheme::Unfrozen => &self.unfrozen,
        }
    }
}

fn solver_error(mu: f64) -> impl Fn(frozenrb_core::Error) -> StudyError {
    move |source| StudyError::Solver { mu, source }
}

/// Detailed training trajectories of one scheme, computed in parallel.
pub fn training_snapshots(cfg: &StudyConfig, scheme: Scheme) -> Result<SnapshotSet> {
    check_training_set(&cfg.training_mus)?;
    let u0 = cfg.initial_field()?;
    let trajectories = cfg
        .training_mus
        .par_iter()
        .map(|&mu| {
            let p = BurgersParams::new(mu, cfg.velocity)?;
            let snaps = match scheme {
                Scheme::Frozen => {
                    solve_frozen(&p, &u0, cfg.t_end, cfg.steps).map(|t| TrajectorySnapshots::from_frozen(&t))
                }
                Scheme::Unfrozen => {
                    solve_unfrozen(&p, &u0, cfg.t_end, cfg.steps).map(|s| TrajectorySnapshots::from_unfrozen(&p, s))
                }
            };
            snaps.map_err(solver_error(mu))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SnapshotSet::new(trajectories)?)
}

/// POD-Greedy on the state snapshots, EI-Greedy on the operator snapshots.
///
/// The frozen model interpolates both plain and frozen operator evaluations;
/// the baseline only the plain ones, which are all it ever evaluates.
pub fn build_scheme(cfg: &StudyConfig, scheme: Scheme) -> Result<SchemeModel> {
    let snaps = training_snapshots(cfg, scheme)?;
    log::info!("{}: {} training states collected", scheme.tag(), snaps.state_count());
    let (basis, log) = pod_greedy(&snaps, cfg.n_max(), cfg.greedy_tol)?;
    log::info!("{}: POD-Greedy N = {}, errors {:?}", scheme.tag(), basis.len(), log.errors);
    let ops = snaps.operator_snapshots();
    let ei = ei_greedy(&ops, cfg.m_max(), cfg.ei_tol)?;
    log::info!("{}: EI-Greedy M = {}, L = {}", scheme.tag(), ei.len(), ei.restricted_dofs().len());
    if basis.len() < cfg.n_max() || ei.len() < cfg.m_max() {
        log::warn!("{}: greedy stopped early (N = {}, M = {})", scheme.tag(), basis.len(), ei.len());
    }
    Ok(SchemeModel { basis, ei, greedy_errors: log.errors, greedy_selected: log.selected, stagnated: log.stagnated })
}

pub fn run_offline(cfg: &StudyConfig) -> Result<Model> {
    cfg.validate()?;
    let frozen = build_scheme(cfg, Scheme::Frozen)?;
    let unfrozen = build_scheme(cfg, Scheme::Unfrozen)?;
    Ok(Model { config: cfg.clone(), frozen, unfrozen })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeEntry {
    n: usize,
    m: usize,
    points: Vec<usize>,
    restricted_dofs: Vec<usize>,
    ei_errors: Vec<f64>,
    ei_selected: Vec<usize>,
    greedy_errors: Vec<f64>,
    greedy_selected: Vec<usize>,
    stagnated: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: u32,
    config: StudyConfig,
    frozen: SchemeEntry,
    unfrozen: SchemeEntry,
    /// Relative path → hex sha256.
    files: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn field_name(scheme: Scheme, prefix: &str, k: usize) -> String {
    format!("{}/{prefix}_{k:03}.fld", scheme.tag())
}

pub fn save_model(model: &Model, dir: &Path) -> Result<()> {
    let mut files = BTreeMap::new();
    let mut entries = Vec::new();
    for scheme in Scheme::ALL {
        let sm = model.scheme(scheme);
        let sub = dir.join(scheme.tag());
        fs::create_dir_all(&sub).at(&sub)?;
        let fields = [("psi", sm.basis.vectors()), ("xi", sm.ei.basis())];
        for (prefix, list) in fields {
            for (k, f) in list.iter().enumerate() {
                let name = field_name(scheme, prefix, k);
                let bytes = encode(f);
                files.insert(name.clone(), sha256_hex(&bytes));
                let path = dir.join(&name);
                fs::write(&path, bytes).at(&path)?;
            }
        }
        entries.push(SchemeEntry {
            n: sm.basis.len(),
            m: sm.ei.len(),
            points: sm.ei.points().to_vec(),
            restricted_dofs: sm.ei.restricted_dofs().to_vec(),
            ei_errors: sm.ei.greedy_errors().to_vec(),
            ei_selected: sm.ei.selected().to_vec(),
            greedy_errors: sm.greedy_errors.clone(),
            greedy_selected: sm.greedy_selected.clone(),
            stagnated: sm.stagnated,
        });
    }
    let unfrozen = entries.pop().expect("two schemes");
    let frozen = entries.pop().expect("two schemes");
    let manifest = Manifest { format: 1, config: model.config.clone(), frozen, unfrozen, files };
    let text = toml::to_string(&manifest).map_err(|e| StudyError::Config(e.to_string()))?;
    let path = dir.join(MANIFEST);
    fs::write(&path, text).at(&path)
}

fn load_fields(
    dir: &Path,
    scheme: Scheme,
    prefix: &str,
    count: usize,
    hashes: &BTreeMap<String, String>,
) -> Result<Vec<Field>> {
    (0..count)
        .map(|k| {
            let name = field_name(scheme, prefix, k);
            let path = dir.join(&name);
            let bytes = fs::read(&path).at(&path)?;
            if hashes.get(&name) != Some(&sha256_hex(&bytes)) {
                return Err(StudyError::HashMismatch { path });
            }
            read_field(&path)
        })
        .collect()
}

fn load_scheme(
    dir: &Path,
    scheme: Scheme,
    e: SchemeEntry,
    cfg: &StudyConfig,
    hashes: &BTreeMap<String, String>,
) -> Result<SchemeModel> {
    let grid = cfg.grid()?;
    let psi = load_fields(dir, scheme, "psi", e.n, hashes)?;
    let xi = load_fields(dir, scheme, "xi", e.m, hashes)?;
    let ei = EIData::from_parts(grid, e.points, xi, e.ei_errors)?.with_selected(e.ei_selected)?;
    if ei.restricted_dofs() != e.restricted_dofs.as_slice() {
        return Err(StudyError::Format {
            path: dir.join(MANIFEST),
            reason: format!("{} restricted DOFs disagree with the interpolation points", scheme.tag()),
        });
    }
    Ok(SchemeModel {
        basis: ReducedBasis::new(grid, psi)?,
        ei,
        greedy_errors: e.greedy_errors,
        greedy_selected: e.greedy_selected,
        stagnated: e.stagnated,
    })
}

pub fn load_model(dir: &Path) -> Result<Model> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).at(&path)?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| StudyError::Format { path: path.clone(), reason: e.to_string() })?;
    if manifest.format != 1 {
        return Err(StudyError::Format { path, reason: format!("unsupported format {}", manifest.format) });
    }
    let cfg = manifest.config;
    cfg.validate()?;
    let frozen = load_scheme(dir, Scheme::Frozen, manifest.frozen, &cfg, &manifest.files)?;
    let unfrozen = load_scheme(dir, Scheme::Unfrozen, manifest.unfrozen, &cfg, &manifest.files)?;
    Ok(Model { config: cfg, frozen, unfrozen })
}
