//! Offline stage: snapshots, POD, POD-Greedy and EI-Greedy.
//!
//! The reduced space is built with POD-Greedy over the state snapshots of a
//! fixed training set of parameters. The empirical operator interpolation
//! data are built with the classical EIM greedy over operator snapshots; for
//! the frozen scheme both operator families (`𝕃_μ` and `𝕃ᴳ_{μ,𝔤}`) enter one
//! run, so they share interpolation points and collateral basis.

use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::freezing::{phase_condition_solve, solve_frozen, solve_unfrozen, FrozenTrajectory};
use crate::grid::{Field, GridSpec};
use crate::operators::{burgers_op, frozen_op, stencil_of, BurgersParams, STENCIL_SIZE};
use crate::{Error, Result};

/// Admissible parameter interval for training and test parameters.
pub const PARAMETER_RANGE: (f64, f64) = (1.0, 2.0);

/// Relative floor below which greedy errors count as exact reproduction.
const EXACT_FLOOR: f64 = 1e-12;

/// Relative Gram eigenvalue cut-off for POD modes.
const POD_RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    State,
    PlainOperator,
    FrozenOperator,
}

/// Origin of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub mu: f64,
    pub step: usize,
    pub kind: SnapshotKind,
}

/// Snapshots of one trajectory, `k = 0 … K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySnapshots {
    pub mu: f64,
    pub states: Vec<Field>,
    /// `𝕃_μ(v^k)`.
    pub plain_ops: Vec<Field>,
    /// `𝕃ᴳ_{μ,𝔤^k}(v^k)`; empty for trajectories of the plain scheme.
    pub frozen_ops: Vec<Field>,
}

impl TrajectorySnapshots {
    /// Snapshots of a frozen trajectory. The final step has no recorded
    /// velocity, so its phase condition is solved here.
    pub fn from_frozen(traj: &FrozenTrajectory) -> Self {
        let p = traj.params;
        let plain_ops = traj.states.iter().map(|v| burgers_op(v, &p)).collect();
        let frozen_ops = traj
            .states
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let alg = match traj.algebra.get(k) {
                    Some(&a) => a,
                    None => phase_condition_solve(v, &p).alg,
                };
                frozen_op(v, &p, alg)
            })
            .collect();
        TrajectorySnapshots { mu: p.mu(), states: traj.states.clone(), plain_ops, frozen_ops }
    }

    /// Snapshots of a trajectory of the plain scheme.
    pub fn from_unfrozen(p: &BurgersParams, states: Vec<Field>) -> Self {
        let plain_ops = states.iter().map(|v| burgers_op(v, p)).collect();
        TrajectorySnapshots { mu: p.mu(), states, plain_ops, frozen_ops: Vec::new() }
    }

    pub fn provenance(&self) -> impl Iterator<Item = Provenance> + '_ {
        let tag = move |kind: SnapshotKind, n: usize| (0..n).map(move |step| Provenance { mu: self.mu, step, kind });
        tag(SnapshotKind::State, self.states.len())
            .chain(tag(SnapshotKind::PlainOperator, self.plain_ops.len()))
            .chain(tag(SnapshotKind::FrozenOperator, self.frozen_ops.len()))
    }
}

/// Snapshots of all training trajectories, on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    grid: GridSpec,
    trajectories: Vec<TrajectorySnapshots>,
}

impl SnapshotSet {
    pub fn new(trajectories: Vec<TrajectorySnapshots>) -> Result<Self> {
        let first = trajectories
            .first()
            .and_then(|t| t.states.first())
            .ok_or(Error::InvalidParameter("snapshot set is empty"))?;
        let grid = *first.grid();
        for (n, t) in trajectories.iter().enumerate() {
            if trajectories[..n].iter().any(|o| o.mu == t.mu) {
                return Err(Error::DuplicateParameter(t.mu));
            }
            let fields = t.states.iter().chain(&t.plain_ops).chain(&t.frozen_ops);
            if fields.into_iter().any(|f| *f.grid() != grid) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(SnapshotSet { grid, trajectories })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn trajectories(&self) -> &[TrajectorySnapshots] {
        &self.trajectories
    }

    pub fn state_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.states.len()).sum()
    }

    /// Both operator families of every trajectory, in provenance order.
    pub fn operator_snapshots(&self) -> Vec<&Field> {
        self.trajectories.iter().flat_map(|t| t.plain_ops.iter().chain(&t.frozen_ops)).collect()
    }

    pub fn provenance(&self) -> impl Iterator<Item = Provenance> + '_ {
        self.trajectories.iter().flat_map(|t| t.provenance())
    }
}

pub fn check_training_set(mus: &[f64]) -> Result<()> {
    if mus.is_empty() {
        return Err(Error::InvalidParameter("training set is empty"));
    }
    for (n, &mu) in mus.iter().enumerate() {
        if !(PARAMETER_RANGE.0..=PARAMETER_RANGE.1).contains(&mu) {
            return Err(Error::InvalidParameter("training parameter outside [1, 2]"));
        }
        if mus[..n].contains(&mu) {
            return Err(Error::DuplicateParameter(mu));
        }
    }
    Ok(())
}

/// Runs the detailed frozen scheme for every training parameter.
pub fn collect_snapshots(
    training_mus: &[f64],
    velocity: [f64; 2],
    u0: &Field,
    t_end: f64,
    steps: usize,
) -> Result<SnapshotSet> {
    check_training_set(training_mus)?;
    let trajectories = training_mus
        .iter()
        .map(|&mu| {
            let p = BurgersParams::new(mu, velocity)?;
            Ok(TrajectorySnapshots::from_frozen(&solve_frozen(&p, u0, t_end, steps)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SnapshotSet::new(trajectories)
}

/// Runs the plain scheme for every training parameter (the non-frozen baseline).
pub fn collect_unfrozen_snapshots(
    training_mus: &[f64],
    velocity: [f64; 2],
    u0: &Field,
    t_end: f64,
    steps: usize,
) -> Result<SnapshotSet> {
    check_training_set(training_mus)?;
    let trajectories = training_mus
        .iter()
        .map(|&mu| {
            let p = BurgersParams::new(mu, velocity)?;
            Ok(TrajectorySnapshots::from_unfrozen(&p, solve_unfrozen(&p, u0, t_end, steps)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SnapshotSet::new(trajectories)
}

/// POD modes together with the descending eigenvalues of the snapshot Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Pod {
    pub modes: Vec<Field>,
    pub eigenvalues: Vec<f64>,
}

fn fix_sign(f: &mut Field) {
    let cut = 1e-8 * f.sup_norm();
    if let Some(&first) = f.values().iter().find(|x| x.abs() > cut) {
        if first < 0.0 {
            f.scale(-1.0);
        }
    }
}

/// Method of snapshots: eigen-decomposition of the L² Gram matrix, modes lifted
/// back to `V_H`.
pub fn pod_with_eigenvalues<F: Borrow<Field>>(snapshots: &[F], n: usize) -> Result<Pod> {
    let Some(first) = snapshots.first() else {
        return Ok(Pod { modes: Vec::new(), eigenvalues: Vec::new() });
    };
    let grid = *first.borrow().grid();
    for s in snapshots {
        first.borrow().same_grid(s.borrow())?;
    }
    let count = snapshots.len();
    let gram = DMatrix::from_fn(count, count, |i, j| snapshots[i].borrow().inner_unchecked(snapshots[j].borrow()));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..count).collect();
    // Stable sort: equal eigenvalues keep index order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    let mut modes = Vec::new();
    for &k in order.iter().take(n) {
        let lambda = eig.eigenvalues[k];
        if lambda.is_nan() || lambda <= POD_RANK_TOL * top || top <= 0.0 {
            break;
        }
        let mut mode = Field::zeros(grid);
        for (i, s) in snapshots.iter().enumerate() {
            mode.axpy(eig.eigenvectors[(i, k)], s.borrow())?;
        }
        let norm = mode.norm();
        mode.scale(1.0 / norm);
        fix_sign(&mut mode);
        modes.push(mode);
    }
    Ok(Pod { modes, eigenvalues })
}

/// The `n` dominant L²-orthonormal POD modes (fewer if the snapshots span less).
pub fn pod<F: Borrow<Field>>(snapshots: &[F], n: usize) -> Result<Vec<Field>> {
    Ok(pod_with_eigenvalues(snapshots, n)?.modes)
}

/// L²-orthonormal reduced basis `ψ₁ … ψ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    grid: GridSpec,
    psi: Vec<Field>,
}

impl ReducedBasis {
    pub fn new(grid: GridSpec, psi: Vec<Field>) -> Result<Self> {
        if psi.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(ReducedBasis { grid, psi })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn vectors(&self) -> &[Field] {
        &self.psi
    }

    /// The nested basis of the first `n` vectors.
    pub fn truncate(&self, n: usize) -> Result<ReducedBasis> {
        if n > self.len() {
            return Err(Error::DimensionMismatch("requested more basis vectors than available"));
        }
        Ok(ReducedBasis { grid: self.grid, psi: self.psi[..n].to_vec() })
    }

    /// L²-orthogonal projection coefficients `c_n = (v, ψ_n)`.
    pub fn project(&self, v: &Field) -> Result<Vec<f64>> {
        self.psi.iter().map(|psi| v.inner(psi)).collect()
    }

    /// `Σ c_n ψ_n`.
    pub fn lift(&self, coeffs: &[f64]) -> Result<Field> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch("coefficient vector length differs from basis size"));
        }
        let mut out = Field::zeros(self.grid);
        for (c, psi) in coeffs.iter().zip(&self.psi) {
            out.axpy(*c, psi)?;
        }
        Ok(out)
    }

    /// `max |(ψ_n, ψ_m) − δ_nm|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, a) in self.psi.iter().enumerate() {
            for (m, b) in self.psi.iter().enumerate() {
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((a.inner_unchecked(b) - target).abs());
            }
        }
        worst
    }
}

/// Projection coefficients of `v` in the reduced basis.
pub fn project(v: &Field, rb: &ReducedBasis) -> Result<Vec<f64>> {
    rb.project(v)
}

/// Record of a POD-Greedy run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GreedyLog {
    /// `errors[n]`: worst training error with `n` basis vectors.
    pub errors: Vec<f64>,
    /// Trajectory picked at each extension.
    pub selected: Vec<usize>,
    pub stagnated: bool,
}

fn worst_index(errors: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &e) in errors.iter().enumerate() {
        if e > best.1 {
            best = (k, e);
        }
    }
    best
}

/// POD-Greedy over the state snapshots of each training trajectory.
///
/// Each iteration picks the trajectory with the largest max-in-time L²
/// projection error and appends the first POD mode of its error sequence.
pub fn pod_greedy(snaps: &SnapshotSet, n_max: usize, tol: f64) -> Result<(ReducedBasis, GreedyLog)> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1"));
    }
    let grid = *snaps.grid();
    let mut residuals: Vec<Vec<Field>> = snaps.trajectories().iter().map(|t| t.states.clone()).collect();
    let scale = residuals.iter().flatten().map(Field::norm).fold(0.0, f64::max);
    let floor = f64::max(tol, EXACT_FLOOR * scale);
    let mut basis: Vec<Field> = Vec::new();
    let mut log = GreedyLog::default();
    loop {
        let errors: Vec<f64> = residuals.iter().map(|traj| traj.iter().map(Field::norm).fold(0.0, f64::max)).collect();
        let (worst, err) = worst_index(&errors);
        log.errors.push(err);
        let n = log.errors.len();
        if n >= 4 && log.errors[n - 1] >= log.errors[n - 4] && !log.stagnated {
            log::warn!("POD-Greedy stagnates at N = {}: error {err:e}", basis.len());
            log.stagnated = true;
        }
        if err <= floor || basis.len() >= n_max {
            break;
        }
        let Some(mut mode) = pod(&residuals[worst], 1)?.into_iter().next() else {
            break;
        };
        for _ in 0..2 {
            for psi in &basis {
                let c = mode.inner_unchecked(psi);
                mode.axpy(-c, psi)?;
            }
        }
        let norm = mode.norm();
        if norm.is_nan() || norm <= 0.0 {
            break;
        }
        mode.scale(1.0 / norm);
        for r in residuals.iter_mut().flatten() {
            let c = r.inner_unchecked(&mode);
            r.axpy(-c, &mode)?;
        }
        log::debug!("POD-Greedy: N = {} from trajectory {worst}, error {err:e}", basis.len() + 1);
        log.selected.push(worst);
        basis.push(mode);
    }
    Ok((ReducedBasis::new(grid, basis)?, log))
}

/// Empirical interpolation data.
///
/// `interp[j][m] = ξ_m(q_j)` is lower triangular with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EIData {
    grid: GridSpec,
    q: Vec<usize>,
    xi: Vec<Field>,
    interp: Vec<Vec<f64>>,
    q_prime: Vec<usize>,
    errors: Vec<f64>,
    selected: Vec<usize>,
}

/// Sorted, deduplicated union of the stencils of the interpolation points.
pub fn restricted_dofs(q: &[usize], grid: &GridSpec) -> Result<Vec<usize>> {
    let mut dofs = Vec::with_capacity(q.len() * STENCIL_SIZE);
    for &i in q {
        dofs.extend(stencil_of(i, grid)?);
    }
    dofs.sort_unstable();
    dofs.dedup();
    Ok(dofs)
}

impl EIData {
    /// Rebuilds interpolation data from points and collateral basis.
    pub fn from_parts(grid: GridSpec, q: Vec<usize>, xi: Vec<Field>, errors: Vec<f64>) -> Result<Self> {
        if q.len() != xi.len() {
            return Err(Error::DimensionMismatch("interpolation points and basis differ in length"));
        }
        for (n, &i) in q.iter().enumerate() {
            grid.check_index(i)?;
            if q[..n].contains(&i) {
                return Err(Error::InvalidParameter("interpolation points must be distinct"));
            }
        }
        if xi.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let interp = q.iter().map(|&qj| xi.iter().map(|x| x[qj]).collect()).collect();
        let q_prime = restricted_dofs(&q, &grid)?;
        Ok(EIData { grid, q, xi, interp, q_prime, errors, selected: Vec::new() })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of interpolation points `M`.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn points(&self) -> &[usize] {
        &self.q
    }

    pub fn basis(&self) -> &[Field] {
        &self.xi
    }

    pub fn interpolation_matrix(&self) -> &[Vec<f64>] {
        &self.interp
    }

    /// Restricted DOFs `q′`.
    pub fn restricted_dofs(&self) -> &[usize] {
        &self.q_prime
    }

    /// `errors[m]`: worst sup-norm interpolation error with `m` points.
    pub fn greedy_errors(&self) -> &[f64] {
        &self.errors
    }

    /// Index of the operator snapshot chosen at each greedy step; empty when unknown.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Attaches the greedy selection record, one snapshot index per point.
    pub fn with_selected(mut self, selected: Vec<usize>) -> Result<Self> {
        if !selected.is_empty() && selected.len() != self.q.len() {
            return Err(Error::DimensionMismatch("selection record and points differ in length"));
        }
        self.selected = selected;
        Ok(self)
    }

    /// The nested data of the first `m` points.
    pub fn truncate(&self, m: usize) -> Result<EIData> {
        if m > self.len() {
            return Err(Error::DimensionMismatch("requested more interpolation points than available"));
        }
        let errors = self.errors[..self.errors.len().min(m + 1)].to_vec();
        let selected = self.selected.get(..m).unwrap_or(&[]).to_vec();
        EIData::from_parts(self.grid, self.q[..m].to_vec(), self.xi[..m].to_vec(), errors)?.with_selected(selected)
    }

    /// Expansion coefficients in `ξ` for the values `w(q₁) … w(q_M)` (forward substitution).
    pub fn coefficients(&self, at_points: &[f64]) -> Vec<f64> {
        let mut a = Vec::with_capacity(self.len());
        for (j, row) in self.interp.iter().enumerate() {
            let partial: f64 = row[..j].iter().zip(&a).map(|(b, x)| b * x).sum();
            a.push((at_points[j] - partial) / row[j]);
        }
        a
    }

    /// `I_M[w] = Σ_m a_m ξ_m` interpolating `w` at the points.
    pub fn interpolate(&self, w: &Field) -> Result<Field> {
        if *w.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let at: Vec<f64> = self.q.iter().map(|&i| w[i]).collect();
        let mut out = Field::zeros(self.grid);
        for (a, xi) in self.coefficients(&at).iter().zip(&self.xi) {
            out.axpy(*a, xi)?;
        }
        Ok(out)
    }

    /// Lagrange form `ξ̃_m` of the collateral basis: `ξ̃_m(q_j) = δ_jm` and
    /// `I_M[w] = Σ_m w(q_m)·ξ̃_m`.
    pub fn lagrange_basis(&self) -> Vec<Field> {
        let m = self.len();
        (0..m)
            .map(|col| {
                let mut unit = vec![0.0; m];
                unit[col] = 1.0;
                let mut f = Field::zeros(self.grid);
                for (a, xi) in self.coefficients(&unit).iter().zip(&self.xi) {
                    if *a != 0.0 {
                        // Same grid by construction.
                        let _ = f.axpy(*a, xi);
                    }
                }
                f
            })
            .collect()
    }
}

/// Classical EIM greedy with sup-norm errors and lowest-index tie-breaking.
///
/// Stops after `m_max` points or once the worst residual drops to
/// `max(tol, 1e-12·max|snapshot|)`.
pub fn ei_greedy<F: Borrow<Field>>(op_snaps: &[F], m_max: usize, tol: f64) -> Result<EIData> {
    if m_max == 0 {
        return Err(Error::InvalidParameter("m_max must be at least 1"));
    }
    let first = op_snaps.first().ok_or(Error::InvalidParameter("no operator snapshots"))?.borrow();
    let grid = *first.grid();
    for s in op_snaps {
        first.same_grid(s.borrow())?;
    }
    let mut residuals: Vec<Field> = op_snaps.iter().map(|s| s.borrow().clone()).collect();
    let scale = residuals.iter().map(Field::sup_norm).fold(0.0, f64::max);
    let floor = f64::max(tol, EXACT_FLOOR * scale);
    let mut q = Vec::new();
    let mut xi: Vec<Field> = Vec::new();
    let mut errors = Vec::new();
    let mut selected = Vec::new();
    loop {
        let sups: Vec<f64> = residuals.iter().map(Field::sup_norm).collect();
        let (worst, err) = worst_index(&sups);
        errors.push(err);
        if err <= floor || q.len() >= m_max {
            break;
        }
        let r = &residuals[worst];
        let (point, _) = worst_index(&r.values().iter().map(|x| x.abs()).collect::<Vec<_>>());
        let pivot = r[point];
        let next = Field::from_raw(grid, r.values().iter().map(|x| x / pivot).collect());
        // Nested update: I_{m+1}[w] = I_m[w] + r_m(q_{m+1})·ξ_{m+1}.
        for res in &mut residuals {
            let c = res[point];
            if c != 0.0 {
                res.axpy(-c, &next)?;
            }
        }
        log::debug!("EI-Greedy: M = {} at DOF {point}, error {err:e}", q.len() + 1);
        q.push(point);
        xi.push(next);
        selected.push(worst);
    }
    if q.len() < m_max {
        log::info!("EI-Greedy stopped early at M = {} (residual {:e})", q.len(), errors.last().unwrap_or(&0.0));
    }
    EIData::from_parts(grid, q, xi, errors)?.with_selected(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(g: GridSpec, rng: &mut ChaCha8Rng) -> Field {
        Field::from_values(g, (0..g.len()).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap()
    }

    #[test]
    fn training_set_validation() {
        assert!(check_training_set(&[]).is_err());
        assert_eq!(check_training_set(&[1.0, 1.5, 1.0]), Err(Error::DuplicateParameter(1.0)));
        assert!(check_training_set(&[0.9]).is_err());
        assert!(check_training_set(&[1.0, 2.0]).is_ok());
    }

    #[test]
    fn snapshot_counts() {
        let g = GridSpec::new(8, 4, 2.0, 1.0).unwrap();
        let u0 = Field::project(g, |x, y| 0.5 + 0.25 * libm::sin(3.0 * x) * libm::cos(6.0 * y)).unwrap();
        let set = collect_snapshots(&[1.5], [1.0, 1.0], &u0, 0.01, 1).unwrap();
        let t = &set.trajectories()[0];
        assert_eq!((t.states.len(), t.plain_ops.len(), t.frozen_ops.len()), (2, 2, 2));
        assert_eq!(set.operator_snapshots().len(), 4);
        assert_eq!(set.provenance().count(), 6);
        assert!(collect_snapshots(&[1.2, 1.2], [1.0, 1.0], &u0, 0.01, 1).is_err());
    }

    #[test]
    fn pod_of_repeated_snapshot() {
        let g = GridSpec::new(6, 4, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_field(g, &mut rng);
        let modes = pod(&[v.clone(), v.clone(), v.clone()], 3).unwrap();
        assert_eq!(modes.len(), 1);
        let expected = v.scaled(1.0 / v.norm());
        let sign = if expected.values().iter().find(|x| x.abs() > 1e-12).unwrap() > &0.0 { 1.0 } else { -1.0 };
        for k in 0..g.len() {
            assert!((modes[0][k] - sign * expected[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn pod_of_orthogonal_snapshots() {
        let g = GridSpec::new(4, 4, 1.0, 1.0).unwrap();
        let h = libm::sqrt(g.cell_area());
        let a = Field::unit(g, 2).unwrap().scaled(1.0 / h);
        let b = Field::unit(g, 9).unwrap().scaled(2.0 / h);
        let modes = pod(&[a.clone(), b.clone()], 2).unwrap();
        assert!(modes[0].distance(&b.scaled(0.5)).unwrap() < 1e-12);
        assert!(modes[1].distance(&a).unwrap() < 1e-12);
        assert!(pod::<Field>(&[], 2).unwrap().is_empty());
    }

    #[test]
    fn reduced_basis_projection() {
        let g = GridSpec::new(6, 4, 2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let snaps: Vec<Field> = (0..5).map(|_| random_field(g, &mut rng)).collect();
        let rb = ReducedBasis::new(g, pod(&snaps, 3).unwrap()).unwrap();
        assert!(rb.orthonormality_defect() < 1e-12);
        let c = rb.project(&rb.vectors()[0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12 && c[2].abs() < 1e-12);

        let v = random_field(g, &mut rng);
        let c = project(&v, &rb).unwrap();
        let pv = rb.lift(&c).unwrap();
        let rest = v.sub(&pv).unwrap();
        let lhs = rest.inner(&rest).unwrap() + pv.inner(&pv).unwrap();
        assert!((lhs - v.inner(&v).unwrap()).abs() < 1e-10);
        // The residual is orthogonal to the space.
        assert!(rb.project(&rest).unwrap().iter().all(|x| x.abs() < 1e-12));
        assert!(rb.lift(&[1.0]).is_err());
    }

    #[test]
    fn ei_single_snapshot() {
        let g = GridSpec::new(5, 4, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_field(g, &mut rng);
        let ei = ei_greedy(&[&w], 1, 0.0).unwrap();
        let (expected_q, _) = worst_index(&w.values().iter().map(|x| x.abs()).collect::<Vec<_>>());
        assert_eq!(ei.points(), [expected_q]);
        assert!(ei.basis()[0].distance(&w.scaled(1.0 / w[expected_q])).unwrap() < 1e-14);
        assert!(ei.interpolate(&w).unwrap().distance(&w).unwrap() < 1e-14);
        assert!(ei.restricted_dofs().len() <= 5);
    }

    #[test]
    fn ei_stops_at_span_dimension() {
        let g = GridSpec::new(6, 4, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_field(g, &mut rng);
        let b = random_field(g, &mut rng);
        let snaps: Vec<Field> = (0..6)
            .map(|k| {
                let mut f = a.scaled(k as f64 - 2.5);
                f.axpy(0.3 * k as f64, &b).unwrap();
                f
            })
            .collect();
        let ei = ei_greedy(&snaps, 3, 0.0).unwrap();
        assert_eq!(ei.len(), 2);
    }

    #[test]
    fn ei_triangular_structure_and_lagrange_form() {
        let g = GridSpec::new(8, 4, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let snaps: Vec<Field> = (0..20).map(|_| random_field(g, &mut rng)).collect();
        let ei = ei_greedy(&snaps, 10, 0.0).unwrap();
        assert_eq!(ei.len(), 10);
        for (j, row) in ei.interpolation_matrix().iter().enumerate() {
            assert_eq!(row[j], 1.0);
            assert!(row[j + 1..].iter().all(|x| x.abs() < 1e-14));
        }
        for (m, l) in ei.lagrange_basis().iter().enumerate() {
            for (j, &qj) in ei.points().iter().enumerate() {
                let target = if j == m { 1.0 } else { 0.0 };
                assert!((l[qj] - target).abs() < 1e-12);
            }
        }
        let adjacent = restricted_dofs(&[g.index(2, 2), g.index(3, 2)], &g).unwrap();
        assert!(adjacent.len() < 10);
    }

    #[test]
    fn pod_greedy_exact_span() {
        let g = GridSpec::new(8, 4, 2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base: Vec<Field> = (0..3).map(|_| random_field(g, &mut rng)).collect();
        let trajectories = (0..4)
            .map(|t| {
                let states = (0..5)
                    .map(|k| {
                        let mut f = Field::zeros(g);
                        for (n, b) in base.iter().enumerate() {
                            f.axpy(libm::sin(((1 + t * 5 + k * 3) * (n + 1)) as f64), b).unwrap();
                        }
                        f
                    })
                    .collect();
                TrajectorySnapshots { mu: 1.0 + t as f64 * 0.1, states, plain_ops: vec![], frozen_ops: vec![] }
            })
            .collect();
        let set = SnapshotSet::new(trajectories).unwrap();
        let (rb, log) = pod_greedy(&set, 5, 0.0).unwrap();
        assert_eq!(rb.len(), 3);
        assert!(*log.errors.last().unwrap() <= 1e-10);
        assert!(log.errors.windows(2).all(|w| w[1] <= w[0]));
        assert!(rb.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn pod_greedy_single_snapshot() {
        let g = GridSpec::new(4, 4, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = random_field(g, &mut rng);
        let set = SnapshotSet::new(vec![TrajectorySnapshots {
            mu: 1.0,
            states: vec![v.clone()],
            plain_ops: vec![],
            frozen_ops: vec![],
        }])
        .unwrap();
        let (rb, log) = pod_greedy(&set, 1, 0.0).unwrap();
        assert_eq!(rb.len(), 1);
        assert!(
            rb.vectors()[0]
                .distance(&v.scaled(1.0 / v.norm()))
                .unwrap()
                .min(rb.vectors()[0].distance(&v.scaled(-1.0 / v.norm())).unwrap())
                < 1e-12
        );
        assert!(log.errors[1] < 1e-12 * v.norm());
    }
}
