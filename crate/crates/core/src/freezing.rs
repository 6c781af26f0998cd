//! Detailed frozen scheme.
//!
//! Each explicit Euler step first solves the orthogonality phase condition
//!
//! ```text
//! [(𝕊_r v, 𝕊_s v)]_{r,s} · 𝔤 = −[(𝕃_μ(v), 𝕊_r v)]_r
//! ```
//!
//! for the Lie-algebra velocity `𝔤`, then advances the shape with
//! `v ← v − Δt·𝕃ᴳ_{μ,𝔤}(v)`. The group trajectory follows from the
//! reconstruction equation `g^{k+1} = g^k + Δt·𝔤^k`.

use alloc::vec::Vec;

use crate::grid::{shift_field, Field, GroupVec, LieAlgebraVec};
use crate::operators::{burgers_op, frozen_op, max_stable_dt, shift_op, BurgersParams};
use crate::{Error, Result};

/// Gram matrices with `det < DEGENERATE_RATIO · tr²/4` are treated as singular.
pub const DEGENERATE_RATIO: f64 = 1e-12;

/// States whose sup norm grows beyond this multiple of the initial sup norm abort the run.
pub const BLOW_UP_FACTOR: f64 = 1e3;

/// How the Lie-algebra velocity is determined at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseCondition {
    /// Orthogonality phase condition.
    #[default]
    Orthogonality,
    /// `𝔤 ≡ 0`: the frozen scheme degenerates to the plain scheme.
    Disabled,
}

/// Solution of the 2×2 phase-condition system `A·𝔤 = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSolution {
    pub alg: LieAlgebraVec,
    pub gram: [[f64; 2]; 2],
    pub rhs: [f64; 2],
    /// The minimum-norm least-squares branch was taken.
    pub degenerate: bool,
}

impl PhaseSolution {
    fn disabled() -> Self {
        PhaseSolution { alg: LieAlgebraVec::ZERO, gram: [[0.0; 2]; 2], rhs: [0.0; 2], degenerate: false }
    }

    /// `cond₂(A)`; infinite for singular `A`.
    pub fn condition(&self) -> f64 {
        let (lo, hi) = sym_eigenvalues(&self.gram);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// `A·𝔤 − c`.
    pub fn residual(&self) -> [f64; 2] {
        let [[a, b], [c, d]] = self.gram;
        let g = self.alg.0;
        [a * g[0] + b * g[1] - self.rhs[0], c * g[0] + d * g[1] - self.rhs[1]]
    }
}

fn sym_eigenvalues(a: &[[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_gap = 0.5 * (a[0][0] - a[1][1]);
    let radius = libm::hypot(half_gap, a[0][1]);
    (mean - radius, mean + radius)
}

/// Solves the symmetric positive semidefinite system `gram · 𝔤 = rhs`.
///
/// Near-singular systems (`det < 1e-12·tr²/4`) get the minimum-norm
/// least-squares solution on the dominant eigenvector; `gram = 0` yields `𝔤 = 0`.
pub fn solve_phase_system(gram: [[f64; 2]; 2], rhs: [f64; 2]) -> PhaseSolution {
    let [[a, b], [_, d]] = gram;
    let trace = a + d;
    let det = a * d - b * b;
    let alg = if trace <= 0.0 {
        return PhaseSolution { alg: LieAlgebraVec::ZERO, gram, rhs, degenerate: true };
    } else if det < DEGENERATE_RATIO * trace * trace / 4.0 {
        let (_, top) = sym_eigenvalues(&gram);
        // Eigenvector of the dominant eigenvalue; pick the better conditioned formula.
        let (e0, e1) = if a >= d { (top - d, b) } else { (b, top - a) };
        let norm = libm::hypot(e0, e1);
        if norm == 0.0 || top <= 0.0 {
            LieAlgebraVec::ZERO
        } else {
            let (e0, e1) = (e0 / norm, e1 / norm);
            let coef = (e0 * rhs[0] + e1 * rhs[1]) / top;
            LieAlgebraVec([coef * e0, coef * e1])
        }
    } else {
        LieAlgebraVec([(d * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - b * rhs[0]) / det])
    };
    let degenerate = det < DEGENERATE_RATIO * trace * trace / 4.0;
    PhaseSolution { alg, gram, rhs, degenerate }
}

/// Phase condition of the detailed scheme at shape `v`.
pub fn phase_condition_solve(v: &Field, p: &BurgersParams) -> PhaseSolution {
    let s = [shift_op(v, 0), shift_op(v, 1)];
    let l = burgers_op(v, p);
    phase_from_parts(&l, &s)
}

fn phase_from_parts(l: &Field, s: &[Field; 2]) -> PhaseSolution {
    let a01 = s[0].inner_unchecked(&s[1]);
    let gram = [[s[0].inner_unchecked(&s[0]), a01], [a01, s[1].inner_unchecked(&s[1])]];
    let rhs = [-l.inner_unchecked(&s[0]), -l.inner_unchecked(&s[1])];
    solve_phase_system(gram, rhs)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTimeStep(dt))
    }
}

/// One step of the detailed frozen scheme: returns `v^{k+1}` and `𝔤^k`.
pub fn frozen_step(v: &Field, p: &BurgersParams, dt: f64) -> Result<(Field, LieAlgebraVec)> {
    check_dt(dt)?;
    let (next, phase) = advance(v, p, dt, PhaseCondition::Orthogonality, 0)?;
    Ok((next, phase.alg))
}

fn advance(
    v: &Field,
    p: &BurgersParams,
    dt: f64,
    phase: PhaseCondition,
    step: usize,
) -> Result<(Field, PhaseSolution)> {
    let solution = match phase {
        PhaseCondition::Orthogonality => phase_condition_solve(v, p),
        PhaseCondition::Disabled => PhaseSolution::disabled(),
    };
    let mut next = v.clone();
    next.axpy(-dt, &frozen_op(v, p, solution.alg))?;
    if !next.is_finite() {
        return Err(Error::NonFiniteState { step });
    }
    Ok((next, solution))
}

/// Integrates the reconstruction equation: `g⁰ = 1_G`, `g^{k+1} = g^k·exp(Δt·𝔤^k)`.
pub fn reconstruct_group(algs: &[LieAlgebraVec], dt: f64) -> Vec<GroupVec> {
    let mut out = Vec::with_capacity(algs.len() + 1);
    let mut g = GroupVec::IDENTITY;
    out.push(g);
    for &a in algs {
        g = g.advance(a, dt);
        out.push(g);
    }
    out
}

/// Time series produced by the detailed frozen scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenTrajectory {
    /// Shapes `v⁰ … v^K`.
    pub states: Vec<Field>,
    /// Lie-algebra velocities `𝔤⁰ … 𝔤^{K−1}`.
    pub algebra: Vec<LieAlgebraVec>,
    /// Group elements `g⁰ … g^K`.
    pub group: Vec<GroupVec>,
    pub dt: f64,
    pub params: BurgersParams,
    /// Steps whose phase condition took the least-squares branch.
    pub degenerate_steps: Vec<usize>,
    /// Steps at which `Δt` exceeded the CFL bound.
    pub cfl_violations: Vec<usize>,
}

impl FrozenTrajectory {
    pub fn steps(&self) -> usize {
        self.algebra.len()
    }
}

fn time_step(t_end: f64, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidStepCount);
    }
    let dt = t_end / steps as f64;
    check_dt(dt)?;
    Ok(dt)
}

struct BlowUpGuard {
    limit: f64,
}

impl BlowUpGuard {
    fn new(u0: &Field) -> Self {
        BlowUpGuard { limit: BLOW_UP_FACTOR * u0.sup_norm() }
    }

    fn check(&self, v: &Field, step: usize) -> Result<()> {
        let norm = v.sup_norm();
        if norm > self.limit {
            Err(Error::BlowUp { step, norm, limit: self.limit })
        } else {
            Ok(())
        }
    }
}

/// Runs the detailed frozen scheme on `[0, t_end]` with `steps` Euler steps.
pub fn solve_frozen(p: &BurgersParams, u0: &Field, t_end: f64, steps: usize) -> Result<FrozenTrajectory> {
    solve_frozen_with(p, u0, t_end, steps, PhaseCondition::Orthogonality)
}

/// [`solve_frozen`] with an explicit phase-condition policy.
pub fn solve_frozen_with(
    p: &BurgersParams,
    u0: &Field,
    t_end: f64,
    steps: usize,
    phase: PhaseCondition,
) -> Result<FrozenTrajectory> {
    let dt = time_step(t_end, steps)?;
    let guard = BlowUpGuard::new(u0);
    let mut states = Vec::with_capacity(steps + 1);
    let mut algebra = Vec::with_capacity(steps);
    let mut degenerate_steps = Vec::new();
    let mut cfl_violations = Vec::new();
    states.push(u0.clone());
    for k in 0..steps {
        let v = &states[k];
        let (next, solution) = advance(v, p, dt, phase, k + 1)?;
        if solution.degenerate {
            log::debug!("step {k}: singular phase-condition system, least-squares solution used");
            degenerate_steps.push(k);
        }
        let bound = max_stable_dt(v, p, solution.alg);
        if dt > bound {
            log::warn!("step {k}: dt = {dt:e} exceeds CFL bound {bound:e}");
            cfl_violations.push(k);
        }
        guard.check(&next, k + 1)?;
        algebra.push(solution.alg);
        states.push(next);
    }
    let group = reconstruct_group(&algebra, dt);
    Ok(FrozenTrajectory { states, algebra, group, dt, params: *p, degenerate_steps, cfl_violations })
}

/// Plain explicit Euler scheme `u^{k+1} = u^k − Δt·𝕃_μ(u^k)`; returns `u⁰ … u^K`.
pub fn solve_unfrozen(p: &BurgersParams, u0: &Field, t_end: f64, steps: usize) -> Result<Vec<Field>> {
    let dt = time_step(t_end, steps)?;
    let guard = BlowUpGuard::new(u0);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(u0.clone());
    for k in 0..steps {
        let u = &states[k];
        let bound = max_stable_dt(u, p, LieAlgebraVec::ZERO);
        if dt > bound {
            log::warn!("step {k}: dt = {dt:e} exceeds CFL bound {bound:e}");
        }
        let mut next = u.clone();
        next.axpy(-dt, &burgers_op(u, p))?;
        if !next.is_finite() {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        guard.check(&next, k + 1)?;
        states.push(next);
    }
    Ok(states)
}

/// `u^k = g^k . v^k` for every step of the trajectory.
pub fn reconstruct_solution(traj: &FrozenTrajectory) -> Vec<Field> {
    traj.states.iter().zip(&traj.group).map(|(v, &g)| shift_field(v, g)).collect()
}
