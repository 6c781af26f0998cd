//! Reduced frozen scheme with an offline/online split.
//!
//! With the Lagrange form `ξ̃_m` of the collateral basis, the reduced scheme
//!
//! ```text
//! 𝐯^{k+1} = 𝐯^k − Δt·P·𝐋ᴳ_{μ,𝔤^k}(EV·𝐯^k)
//! [𝐯ᵀ·PCL^{r,s}·𝐯]_{r,s}·𝔤 = −[𝐋_μ(EV·𝐯)ᵀ·PCR^r·𝐯]_r
//! ```
//!
//! only needs the matrices
//!
//! * `P_{n,m} = (ξ̃_m, ψ_n)` (N×M),
//! * `EV_{l,n} = ψ_n(q′_l)` (L×N),
//! * `PCL^{r,s}_{n,n′} = (𝕊_r ψ_n, 𝕊_s ψ_{n′})` (N×N),
//! * `PCR^r_{m,n} = (ξ̃_m, 𝕊_r ψ_n)` (M×N),
//!
//! and operator evaluations at the `M` interpolation points, which read only
//! the `L` restricted DOFs. Nothing in the online loop depends on the grid size.

use alloc::vec;
use alloc::vec::Vec;

use crate::freezing::{reconstruct_group, solve_phase_system, PhaseCondition, PhaseSolution};
use crate::grid::{Field, GridSpec, GroupVec, LieAlgebraVec};
use crate::operators::{shift_op, BurgersParams, FluxPair, RestrictedStencils};
use crate::reduction::{EIData, ReducedBasis};
use crate::{Error, Result};

/// Operation counters for the online stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    /// Multiply-adds in dense reduced-matrix products.
    pub flops: u64,
    /// Operator components evaluated at interpolation points.
    pub point_evals: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.flops + self.point_evals
    }
}

impl core::ops::AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        self.flops += rhs.flops;
        self.point_evals += rhs.point_evals;
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Dense { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn mul_vec(&self, x: &[f64], out: &mut [f64], ops: &mut OpCount) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        ops.flops += (self.rows * self.cols) as u64;
    }

    fn quadratic_form(&self, x: &[f64], y: &[f64], ops: &mut OpCount) -> f64 {
        let mut acc = 0.0;
        for (xi, row) in x.iter().zip(self.data.chunks_exact(self.cols)) {
            let inner: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum();
            acc += xi * inner;
        }
        ops.flops += (self.rows * self.cols + self.rows) as u64;
        acc
    }
}

/// Precomputed reduced matrices and restricted operator data.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSystem {
    p: Dense,
    ev: Dense,
    pcl: [[Dense; 2]; 2],
    pcr: [Dense; 2],
    stencils: RestrictedStencils,
    grid: GridSpec,
    phase: PhaseCondition,
}

/// Builds the online matrices by full-dimensional operator applications.
pub fn assemble_online(rb: &ReducedBasis, ei: &EIData) -> Result<OnlineSystem> {
    if rb.grid() != ei.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *rb.grid();
    let psi = rb.vectors();
    let (n, m) = (psi.len(), ei.len());
    let xi = ei.lagrange_basis();
    let q_prime = ei.restricted_dofs();
    let spsi: [Vec<Field>; 2] = [0, 1].map(|r| psi.iter().map(|f| shift_op(f, r)).collect());

    let p = Dense::from_fn(n, m, |row, col| xi[col].inner_unchecked(&psi[row]));
    let ev = Dense::from_fn(q_prime.len(), n, |l, col| psi[col][q_prime[l]]);
    let pcl = [0, 1].map(|r| [0, 1].map(|s| Dense::from_fn(n, n, |a, b| spsi[r][a].inner_unchecked(&spsi[s][b]))));
    let pcr = [0, 1].map(|r| Dense::from_fn(m, n, |a, b| xi[a].inner_unchecked(&spsi[r][b])));
    let stencils = RestrictedStencils::new(&grid, ei.points(), q_prime)?;
    Ok(OnlineSystem { p, ev, pcl, pcr, stencils, grid, phase: PhaseCondition::Orthogonality })
}

/// Reduced coefficients together with the Lie-algebra velocity that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    /// `𝐯^k_{N,μ}`.
    pub coeffs: Vec<f64>,
    /// Velocity of the step that led to this state (zero initially).
    pub alg: LieAlgebraVec,
}

impl ReducedState {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ReducedState { coeffs, alg: LieAlgebraVec::ZERO }
    }
}

impl OnlineSystem {
    /// Same matrices, different phase-condition policy. `Disabled` gives the
    /// plain (non-frozen) reduced scheme.
    pub fn with_phase(mut self, phase: PhaseCondition) -> Self {
        self.phase = phase;
        self
    }

    pub fn phase(&self) -> PhaseCondition {
        self.phase
    }

    /// Reduced dimension `N`.
    pub fn n(&self) -> usize {
        self.p.rows()
    }

    /// Number of interpolation points `M`.
    pub fn m(&self) -> usize {
        self.p.cols()
    }

    /// Number of restricted DOFs `L`.
    pub fn l(&self) -> usize {
        self.ev.rows()
    }

    pub fn p_matrix(&self) -> &Dense {
        &self.p
    }

    pub fn ev_matrix(&self) -> &Dense {
        &self.ev
    }

    pub fn pcl_matrix(&self, r: usize, s: usize) -> &Dense {
        &self.pcl[r][s]
    }

    pub fn pcr_matrix(&self, r: usize) -> &Dense {
        &self.pcr[r]
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() == self.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("coefficient vector length differs from N"))
        }
    }

    fn restricted_values(&self, coeffs: &[f64], ops: &mut OpCount) -> Vec<f64> {
        let mut y = vec![0.0; self.l()];
        self.ev.mul_vec(coeffs, &mut y, ops);
        y
    }

    fn point_values(&self, y: &[f64], p: &BurgersParams, alg: LieAlgebraVec, ops: &mut OpCount) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        self.stencils.eval(&FluxPair::new(&self.grid, p, alg), y, &mut out);
        ops.point_evals += self.m() as u64;
        out
    }

    fn phase_from_restricted(&self, coeffs: &[f64], y: &[f64], p: &BurgersParams, ops: &mut OpCount) -> PhaseSolution {
        let plain = self.point_values(y, p, LieAlgebraVec::ZERO, ops);
        let a01 = self.pcl[0][1].quadratic_form(coeffs, coeffs, ops);
        let gram = [
            [self.pcl[0][0].quadratic_form(coeffs, coeffs, ops), a01],
            [a01, self.pcl[1][1].quadratic_form(coeffs, coeffs, ops)],
        ];
        let rhs = [0, 1].map(|r| -self.pcr[r].quadratic_form(&plain, coeffs, ops));
        solve_phase_system(gram, rhs)
    }

    /// Reduced phase condition at the coefficient vector `coeffs`.
    pub fn phase_solve(&self, coeffs: &[f64], p: &BurgersParams, ops: &mut OpCount) -> Result<PhaseSolution> {
        self.check_len(coeffs)?;
        let y = self.restricted_values(coeffs, ops);
        Ok(self.phase_from_restricted(coeffs, &y, p, ops))
    }

    /// One reduced Euler step: returns `𝐯^{k+1}` and the phase solution at `𝐯^k`.
    pub fn step(
        &self,
        coeffs: &[f64],
        p: &BurgersParams,
        dt: f64,
        ops: &mut OpCount,
    ) -> Result<(Vec<f64>, PhaseSolution)> {
        self.check_len(coeffs)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let y = self.restricted_values(coeffs, ops);
        let solution = match self.phase {
            PhaseCondition::Orthogonality => self.phase_from_restricted(coeffs, &y, p, ops),
            PhaseCondition::Disabled => solve_phase_system([[0.0; 2]; 2], [0.0; 2]),
        };
        let frozen = self.point_values(&y, p, solution.alg, ops);
        let mut update = vec![0.0; self.n()];
        self.p.mul_vec(&frozen, &mut update, ops);
        let next: Vec<f64> = coeffs.iter().zip(&update).map(|(c, u)| c - dt * u).collect();
        ops.flops += self.n() as u64;
        Ok((next, solution))
    }
}

/// Reduced phase condition for a reduced state.
pub fn reduced_phase_solve(s: &ReducedState, sys: &OnlineSystem, p: &BurgersParams) -> Result<PhaseSolution> {
    sys.phase_solve(&s.coeffs, p, &mut OpCount::default())
}

/// One reduced step; the returned state carries the velocity used for it.
pub fn reduced_step(s: &ReducedState, sys: &OnlineSystem, p: &BurgersParams, dt: f64) -> Result<ReducedState> {
    let (coeffs, solution) = sys.step(&s.coeffs, p, dt, &mut OpCount::default())?;
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteState { step: 0 });
    }
    Ok(ReducedState { coeffs, alg: solution.alg })
}

/// Output of [`solve_reduced`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    /// `𝐯⁰ … 𝐯^K`.
    pub coeffs: Vec<Vec<f64>>,
    /// `𝔤⁰ … 𝔤^{K−1}`.
    pub algebra: Vec<LieAlgebraVec>,
    /// `g⁰ … g^K`.
    pub group: Vec<GroupVec>,
    pub dt: f64,
    /// Online operation counts of each step.
    pub ops: Vec<OpCount>,
}

/// Runs the reduced scheme from the initial coefficients `c0 = P_N(P_H(u₀))`.
pub fn solve_reduced(
    p: &BurgersParams,
    sys: &OnlineSystem,
    c0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<ReducedTrajectory> {
    if steps == 0 {
        return Err(Error::InvalidStepCount);
    }
    let dt = t_end / steps as f64;
    let mut coeffs = Vec::with_capacity(steps + 1);
    let mut algebra = Vec::with_capacity(steps);
    let mut ops = Vec::with_capacity(steps);
    coeffs.push(c0.to_vec());
    for k in 0..steps {
        let mut count = OpCount::default();
        let (next, solution) = sys.step(&coeffs[k], p, dt, &mut count)?;
        if next.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        algebra.push(solution.alg);
        coeffs.push(next);
        ops.push(count);
    }
    let group = reconstruct_group(&algebra, dt);
    Ok(ReducedTrajectory { coeffs, algebra, group, dt, ops })
}

/// `Σ_n c_n ψ_n`.
pub fn lift(s: &ReducedState, rb: &ReducedBasis) -> Result<Field> {
    rb.lift(&s.coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{burgers_op, frozen_op};
    use crate::reduction::{ei_greedy, pod};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(g: GridSpec, rng: &mut ChaCha8Rng) -> Field {
        Field::from_values(g, (0..g.len()).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    fn small_setup(n: usize, m: usize, seed: u64) -> (ReducedBasis, EIData, ChaCha8Rng) {
        let g = GridSpec::new(8, 4, 2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states: Vec<Field> = (0..10).map(|_| random_field(g, &mut rng)).collect();
        let rb = ReducedBasis::new(g, pod(&states, n).unwrap()).unwrap();
        let p = BurgersParams::diagonal(1.5).unwrap();
        let ops: Vec<Field> = states.iter().map(|v| burgers_op(v, &p)).collect();
        let ei = ei_greedy(&ops, m, 0.0).unwrap();
        (rb, ei, rng)
    }

    #[test]
    fn matrices_match_definitions() {
        let (rb, ei, _) = small_setup(3, 4, 1);
        let sys = assemble_online(&rb, &ei).unwrap();
        assert_eq!((sys.n(), sys.m(), sys.l()), (3, 4, ei.restricted_dofs().len()));
        let xi = ei.lagrange_basis();
        let psi = rb.vectors();
        for (n, psi_n) in psi.iter().enumerate() {
            for (m, xi_m) in xi.iter().enumerate() {
                assert_eq!(sys.p_matrix().get(n, m), xi_m.inner(psi_n).unwrap());
                for r in 0..2 {
                    let expected = xi_m.inner(&shift_op(psi_n, r)).unwrap();
                    assert_eq!(sys.pcr_matrix(r).get(m, n), expected);
                }
            }
            for (l, &dof) in ei.restricted_dofs().iter().enumerate() {
                assert_eq!(sys.ev_matrix().get(l, n), psi_n[dof]);
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                assert!((sys.pcl_matrix(0, 1).get(a, b) - sys.pcl_matrix(1, 0).get(b, a)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let (rb, ei, _) = small_setup(3, 5, 2);
        let sys = assemble_online(&rb, &ei).unwrap();
        let p = BurgersParams::diagonal(1.3).unwrap();
        let zero = ReducedState::new(vec![0.0; 3]);
        let sol = reduced_phase_solve(&zero, &sys, &p).unwrap();
        assert_eq!(sol.alg, LieAlgebraVec::ZERO);
        let next = reduced_step(&zero, &sys, &p, 0.01).unwrap();
        assert_eq!(next.coeffs, [0.0; 3]);
    }

    #[test]
    fn lift_and_project_are_inverse() {
        let (rb, _, mut rng) = small_setup(4, 2, 3);
        let c: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
        let v = lift(&ReducedState::new(c.clone()), &rb).unwrap();
        let back = rb.project(&v).unwrap();
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let norm2: f64 = c.iter().map(|x| x * x).sum();
        assert!((v.norm() - libm::sqrt(norm2)).abs() < 1e-10);
        let e1 = lift(&ReducedState::new(vec![1.0, 0.0, 0.0, 0.0]), &rb).unwrap();
        assert_eq!(e1, rb.vectors()[0]);
    }

    #[test]
    fn step_matches_direct_assembly() {
        let (rb, ei, mut rng) = small_setup(4, 6, 4);
        let sys = assemble_online(&rb, &ei).unwrap();
        let p = BurgersParams::diagonal(1.4).unwrap();
        let dt = 0.01;
        for _ in 0..10 {
            let c: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
            let v = rb.lift(&c).unwrap();
            let s = [shift_op(&v, 0), shift_op(&v, 1)];
            let il = ei.interpolate(&burgers_op(&v, &p)).unwrap();
            let gram = [0, 1].map(|r| [0, 1].map(|q| s[r].inner(&s[q]).unwrap()));
            let rhs = [0, 1].map(|r| -il.inner(&s[r]).unwrap());
            let direct = solve_phase_system(gram, rhs);
            let ilg = ei.interpolate(&frozen_op(&v, &p, direct.alg)).unwrap();
            let expected: Vec<f64> = c.iter().zip(rb.project(&ilg).unwrap()).map(|(ci, pi)| ci - dt * pi).collect();

            let (got, sol) = sys.step(&c, &p, dt, &mut OpCount::default()).unwrap();
            for r in 0..2 {
                assert!((sol.alg.0[r] - direct.alg.0[r]).abs() <= 1e-10 * direct.alg.0[r].abs().max(1.0));
            }
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn disabled_phase_keeps_identity() {
        let (rb, ei, mut rng) = small_setup(3, 5, 5);
        let sys = assemble_online(&rb, &ei).unwrap().with_phase(PhaseCondition::Disabled);
        let p = BurgersParams::diagonal(1.1).unwrap();
        let c: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let traj = solve_reduced(&p, &sys, &c, 0.05, 5).unwrap();
        assert!(traj.group.iter().all(|g| *g == GroupVec::IDENTITY));
        assert_eq!(traj.coeffs.len(), 6);
        assert!(solve_reduced(&p, &sys, &c, 0.05, 0).is_err());
    }
}
