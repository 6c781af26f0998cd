//! Detailed runs, single reduced runs and the N-sweep error study.

use std::fs;
use std::path::Path;

use frozenrb_core::freezing::{reconstruct_solution, solve_frozen, solve_unfrozen};
use frozenrb_core::online::assemble_online;
use frozenrb_core::{BurgersParams, Field, FrozenTrajectory, OnlineSystem, OpCount, PhaseCondition, ReducedTrajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::StudyConfig;
use crate::error::{IoContext, Result, StudyError};
use crate::fieldio::write_field;
use crate::model::{Model, Scheme};

fn solver_error(mu: f64) -> impl Fn(frozenrb_core::Error) -> StudyError {
    move |source| StudyError::Solver { mu, source }
}

/// Steps `0, s, 2s, …` and always the final step.
pub fn frame_steps(steps: usize, every: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=steps).step_by(every.max(1)).collect();
    if out.last() != Some(&steps) {
        out.push(steps);
    }
    out
}

#[derive(Debug, Serialize)]
struct TrajectoryMeta {
    mu: f64,
    steps: usize,
    dt: f64,
    frames: Vec<usize>,
    /// `𝔤^k`, one pair per step.
    algebra: Vec<[f64; 2]>,
    /// `g^k`, one pair per state.
    group: Vec<[f64; 2]>,
    degenerate_steps: Vec<usize>,
    cfl_violations: Vec<usize>,
}

/// Both detailed schemes at parameter `mu`.
#[derive(Debug, Clone)]
pub struct DetailedRun {
    pub frozen: FrozenTrajectory,
    pub unfrozen: Vec<Field>,
    pub reconstructed: Vec<Field>,
    pub frames: Vec<usize>,
}

/// Runs both detailed solvers and writes the selected frames below `out`:
/// `frozen/v_KKKK.fld`, `unfrozen/u_KKKK.fld`, `reconstructed/u_KKKK.fld`
/// and `trajectory.toml`.
pub fn run_detailed(cfg: &StudyConfig, mu: f64, out: &Path) -> Result<DetailedRun> {
    cfg.validate()?;
    let p = BurgersParams::new(mu, cfg.velocity).map_err(solver_error(mu))?;
    let u0 = cfg.initial_field()?;
    let frozen = solve_frozen(&p, &u0, cfg.t_end, cfg.steps).map_err(solver_error(mu))?;
    let unfrozen = solve_unfrozen(&p, &u0, cfg.t_end, cfg.steps).map_err(solver_error(mu))?;
    let reconstructed = reconstruct_solution(&frozen);
    let frames = frame_steps(cfg.steps, cfg.output_every);

    let sets: [(&str, &str, &[Field]); 3] =
        [("frozen", "v", &frozen.states), ("unfrozen", "u", &unfrozen), ("reconstructed", "u", &reconstructed)];
    for (dir, prefix, states) in sets {
        let sub = out.join(dir);
        fs::create_dir_all(&sub).at(&sub)?;
        for &k in &frames {
            write_field(&sub.join(format!("{prefix}_{k:04}.fld")), &states[k])?;
        }
    }
    let meta = TrajectoryMeta {
        mu,
        steps: cfg.steps,
        dt: frozen.dt,
        frames: frames.clone(),
        algebra: frozen.algebra.iter().map(|a| a.0).collect(),
        group: frozen.group.iter().map(|g| g.0).collect(),
        degenerate_steps: frozen.degenerate_steps.clone(),
        cfl_violations: frozen.cfl_violations.clone(),
    };
    let path = out.join("trajectory.toml");
    fs::write(&path, toml::to_string(&meta).map_err(|e| StudyError::Config(e.to_string()))?).at(&path)?;
    Ok(DetailedRun { frozen, unfrozen, reconstructed, frames })
}

/// `n` basis vectors and `round(m_factor·n)` points of a stored model, or
/// `None` when the model holds fewer.
pub fn online_system(model: &Model, scheme: Scheme, n: usize) -> Result<Option<OnlineSystem>> {
    let sm = model.scheme(scheme);
    let m = model.config.m_for(n);
    if n > sm.basis.len() || m > sm.ei.len() {
        return Ok(None);
    }
    let sys = assemble_online(&sm.basis.truncate(n)?, &sm.ei.truncate(m)?)?;
    Ok(Some(match scheme {
        Scheme::Frozen => sys,
        Scheme::Unfrozen => sys.with_phase(PhaseCondition::Disabled),
    }))
}

/// One reduced run plus its per-step L² errors against the matching detailed states.
#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub trajectory: ReducedTrajectory,
    pub errors: Vec<f64>,
}

impl ReducedRun {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn ops_per_step(&self) -> OpCount {
        self.trajectory.ops.first().copied().unwrap_or_default()
    }
}

pub fn reduced_run(
    model: &Model,
    scheme: Scheme,
    sys: &OnlineSystem,
    mu: f64,
    detailed: &[Field],
) -> Result<ReducedRun> {
    let cfg = &model.config;
    let rb = model.scheme(scheme).basis.truncate(sys.n())?;
    let p = BurgersParams::new(mu, cfg.velocity).map_err(solver_error(mu))?;
    let c0 = rb.project(&cfg.initial_field()?)?;
    let trajectory =
        frozenrb_core::online::solve_reduced(&p, sys, &c0, cfg.t_end, cfg.steps).map_err(solver_error(mu))?;
    let errors = trajectory
        .coeffs
        .iter()
        .zip(detailed)
        .map(|(c, v)| Ok(rb.lift(c)?.distance(v)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ReducedRun { trajectory, errors })
}

/// `count` parameters uniform on `[1, 2]`.
pub fn test_parameters(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(1.0..=2.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// The model holds fewer than `N` vectors or `M` points.
    Missing,
    /// Some reduced run produced non-finite coefficients.
    Diverged,
}

/// Outcome for one scheme and one basis size.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub scheme: Scheme,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub status: Status,
    /// `e(μ)` for every test parameter, in draw order; infinite for diverged runs.
    pub per_mu: Vec<f64>,
    /// Per-step errors, `per_step[j][k]`.
    pub per_step: Vec<Vec<f64>>,
    pub ops: OpCount,
}

impl ErrorRecord {
    /// Maximum over the test parameters; `NaN` when missing.
    pub fn max_error(&self) -> f64 {
        if self.status == Status::Missing {
            return f64::NAN;
        }
        self.per_mu.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub mus: Vec<f64>,
    pub records: Vec<ErrorRecord>,
}

impl StudyResult {
    pub fn record(&self, scheme: Scheme, n: usize) -> Option<&ErrorRecord> {
        self.records.iter().find(|r| r.scheme == scheme && r.n == n)
    }
}

struct Cell {
    errors: Option<Vec<f64>>,
    ops: OpCount,
}

/// Reduced-vs-detailed errors for every test parameter, basis size and scheme.
pub fn run_study(model: &Model) -> Result<StudyResult> {
    let cfg = &model.config;
    let mus = test_parameters(cfg.seed, cfg.test_count);
    let u0 = cfg.initial_field()?;
    let mut systems = Vec::new();
    for scheme in Scheme::ALL {
        for &n in &cfg.n_sweep {
            let sys = online_system(model, scheme, n)?;
            if sys.is_none() {
                log::warn!("{}: no model for N = {n}, M = {}", scheme.tag(), cfg.m_for(n));
            }
            systems.push((scheme, n, sys));
        }
    }

    let per_mu: Vec<Vec<Cell>> = mus
        .par_iter()
        .map(|&mu| {
            let p = BurgersParams::new(mu, cfg.velocity).map_err(solver_error(mu))?;
            let frozen = solve_frozen(&p, &u0, cfg.t_end, cfg.steps).map_err(solver_error(mu))?.states;
            let unfrozen = solve_unfrozen(&p, &u0, cfg.t_end, cfg.steps).map_err(solver_error(mu))?;
            systems
                .iter()
                .map(|(scheme, _, sys)| {
                    let Some(sys) = sys else {
                        return Ok(Cell { errors: None, ops: OpCount::default() });
                    };
                    let detailed = match scheme {
                        Scheme::Frozen => &frozen,
                        Scheme::Unfrozen => &unfrozen,
                    };
                    match reduced_run(model, *scheme, sys, mu, detailed) {
                        Ok(run) => Ok(Cell { ops: run.ops_per_step(), errors: Some(run.errors) }),
                        Err(StudyError::Solver { source: frozenrb_core::Error::NonFiniteState { step }, .. }) => {
                            log::warn!(
                                "{} N = {}: reduced run diverged at step {step} for mu = {mu}",
                                scheme.tag(),
                                sys.n()
                            );
                            Ok(Cell { errors: Some(vec![f64::INFINITY]), ops: OpCount::default() })
                        }
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let records = systems
        .iter()
        .enumerate()
        .map(|(col, (scheme, n, sys))| {
            let m = cfg.m_for(*n);
            let l = sys.as_ref().map_or(0, OnlineSystem::l);
            let Some(_) = sys else {
                return ErrorRecord {
                    scheme: *scheme,
                    n: *n,
                    m,
                    l,
                    status: Status::Missing,
                    per_mu: vec![],
                    per_step: vec![],
                    ops: OpCount::default(),
                };
            };
            let per_step: Vec<Vec<f64>> =
                per_mu.iter().map(|row| row[col].errors.clone().unwrap_or_default()).collect();
            let errs: Vec<f64> = per_step.iter().map(|e| e.iter().copied().fold(0.0, f64::max)).collect();
            let status = if errs.iter().all(|e| e.is_finite()) { Status::Ok } else { Status::Diverged };
            let ops = per_mu.first().map_or(OpCount::default(), |row| row[col].ops);
            ErrorRecord { scheme: *scheme, n: *n, m, l, status, per_mu: errs, per_step, ops }
        })
        .collect();
    Ok(StudyResult { mus, records })
}
