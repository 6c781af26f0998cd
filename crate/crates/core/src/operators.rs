//! Finite-volume Burgers operator, its frozen variant and the shift operators.
//!
//! Both the plain operator `𝕃_μ` and the frozen operator `𝕃ᴳ_{μ,𝔤}` are
//! discretised with a local Lax–Friedrichs (Rusanov) flux on a periodic grid.
//! The frozen operator uses the combined flux `b·u^μ − 𝔤·u`, which is the
//! divergence form of `∇·(b u^μ) − 𝔤·∇u` for a spatially constant `𝔤`.
//! With `𝔤 = 0` the two operators agree bit for bit.
//!
//! Every output component reads the cell itself and its four periodic
//! neighbours, so restricted evaluation on a handful of DOFs costs
//! `O(targets)` independently of the grid size.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::grid::{Field, GridSpec, LieAlgebraVec};
use crate::{Error, Result};

/// Number of DOFs read by one operator component.
pub const STENCIL_SIZE: usize = 5;

/// Parameters of `∂ₜu + ∇·(b u^μ) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersParams {
    mu: f64,
    b: [f64; 2],
}

impl BurgersParams {
    pub fn new(mu: f64, b: [f64; 2]) -> Result<Self> {
        if !(mu.is_finite() && mu >= 1.0) {
            return Err(Error::InvalidParameter("exponent mu must be finite and >= 1"));
        }
        if !(b[0].is_finite() && b[1].is_finite()) {
            return Err(Error::InvalidParameter("velocity b must be finite"));
        }
        Ok(Self { mu, b })
    }

    /// Exponent `μ` with the diagonal velocity `b = (1, 1)`.
    pub fn diagonal(mu: f64) -> Result<Self> {
        Self::new(mu, [1.0, 1.0])
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn b(&self) -> [f64; 2] {
        self.b
    }
}

/// Which discrete operator a restricted evaluation computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    /// `𝕃_μ`
    Plain,
    /// `𝕃ᴳ_{μ,𝔤}`
    Frozen(LieAlgebraVec),
}

impl OperatorKind {
    fn drift(self) -> LieAlgebraVec {
        match self {
            OperatorKind::Plain => LieAlgebraVec::ZERO,
            OperatorKind::Frozen(g) => g,
        }
    }
}

#[inline]
fn pow_mu(u: f64, mu: f64) -> f64 {
    if mu == 1.0 {
        u
    } else if mu == 2.0 {
        u * u
    } else {
        libm::pow(u, mu)
    }
}

/// One-dimensional combined flux `f(u) = c·u^μ − d·u` on the clamped state.
#[derive(Debug, Clone, Copy)]
struct AxisFlux {
    coef: f64,
    drift: f64,
    mu: f64,
}

impl AxisFlux {
    #[inline]
    fn flux(&self, u: f64) -> f64 {
        self.coef * pow_mu(u, self.mu) - self.drift * u
    }

    #[inline]
    fn speed(&self, u: f64) -> f64 {
        self.coef * self.mu * pow_mu(u, self.mu - 1.0) - self.drift
    }

    /// Rusanov flux across the edge between `left` and `right`.
    #[inline]
    fn numerical(&self, left: f64, right: f64) -> f64 {
        let (l, r) = (f64::max(left, 0.0), f64::max(right, 0.0));
        let alpha = f64::max(self.speed(l).abs(), self.speed(r).abs());
        0.5 * (self.flux(l) + self.flux(r)) - 0.5 * alpha * (r - l)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FluxPair {
    x: AxisFlux,
    y: AxisFlux,
    inv_dx: f64,
    inv_dy: f64,
}

impl FluxPair {
    pub(crate) fn new(grid: &GridSpec, p: &BurgersParams, g: LieAlgebraVec) -> Self {
        FluxPair {
            x: AxisFlux { coef: p.b[0], drift: g.0[0], mu: p.mu },
            y: AxisFlux { coef: p.b[1], drift: g.0[1], mu: p.mu },
            inv_dx: 1.0 / grid.dx(),
            inv_dy: 1.0 / grid.dy(),
        }
    }

    /// Output component from the stencil values `[center, west, east, south, north]`.
    #[inline]
    pub(crate) fn cell(&self, s: [f64; STENCIL_SIZE]) -> f64 {
        let [c, w, e, so, n] = s;
        (self.x.numerical(c, e) - self.x.numerical(w, c)) * self.inv_dx
            + (self.y.numerical(c, n) - self.y.numerical(so, c)) * self.inv_dy
    }
}

fn apply(v: &Field, p: &BurgersParams, g: LieAlgebraVec) -> Field {
    let grid = *v.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let flux = FluxPair::new(&grid, p, g);
    let u = v.values();
    // fx[k]: flux through the east edge of cell k; fy[k]: through its north edge.
    let mut fx = Vec::with_capacity(u.len());
    let mut fy = Vec::with_capacity(u.len());
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            fx.push(flux.x.numerical(u[k], u[grid.wrapped_index(i, j, 1, 0)]));
            fy.push(flux.y.numerical(u[k], u[grid.wrapped_index(i, j, 0, 1)]));
        }
    }
    let mut out = Vec::with_capacity(u.len());
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            let west = grid.wrapped_index(i, j, -1, 0);
            let south = grid.wrapped_index(i, j, 0, -1);
            out.push((fx[k] - fx[west]) * flux.inv_dx + (fy[k] - fy[south]) * flux.inv_dy);
        }
    }
    Field::from_raw(grid, out)
}

/// Discrete Burgers operator `𝕃_μ(v) = ∇·(b v^μ)`.
///
/// Negative states are clamped to zero before the flux is evaluated.
pub fn burgers_op(v: &Field, p: &BurgersParams) -> Field {
    apply(v, p, LieAlgebraVec::ZERO)
}

/// Frozen operator `𝕃ᴳ_{μ,𝔤}(v) = 𝕃_μ(v) + 𝔤.v` in conservative form.
pub fn frozen_op(v: &Field, p: &BurgersParams, g: LieAlgebraVec) -> Field {
    apply(v, p, g)
}

/// Evaluates the operator selected by `kind` on the whole field.
pub fn apply_kind(v: &Field, p: &BurgersParams, kind: OperatorKind) -> Field {
    apply(v, p, kind.drift())
}

/// Lie-algebra action `𝕊ᴳ_r ≈ 𝔢_r.(·) = −∂_{x_r}`, by periodic central
/// differences. `axis` is 0 for x₁ and 1 for x₂.
pub fn shift_op(v: &Field, axis: usize) -> Field {
    assert!(axis < 2, "axis must be 0 or 1");
    let grid = *v.grid();
    let u = v.values();
    let (di, dj, h) = if axis == 0 { (1, 0, grid.dx()) } else { (0, 1, grid.dy()) };
    let scale = -0.5 / h;
    let mut out = Vec::with_capacity(u.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let fwd = u[grid.wrapped_index(i, j, di, dj)];
            let bwd = u[grid.wrapped_index(i, j, -di, -dj)];
            out.push(scale * (fwd - bwd));
        }
    }
    Field::from_raw(grid, out)
}

/// DOFs read by operator component `index`: center, west, east, south, north.
///
/// On a two-cell-wide grid west and east coincide.
pub fn stencil_of(index: usize, grid: &GridSpec) -> Result<[usize; STENCIL_SIZE]> {
    grid.check_index(index)?;
    let (i, j) = grid.cell(index);
    Ok([
        index,
        grid.wrapped_index(i, j, -1, 0),
        grid.wrapped_index(i, j, 1, 0),
        grid.wrapped_index(i, j, 0, -1),
        grid.wrapped_index(i, j, 0, 1),
    ])
}

/// Target components of the full operator output, computed from the stencil
/// DOFs only.
pub fn restricted_eval(
    grid: &GridSpec,
    kind: OperatorKind,
    p: &BurgersParams,
    dof_values: &BTreeMap<usize, f64>,
    targets: &[usize],
) -> Result<Vec<f64>> {
    let flux = FluxPair::new(grid, p, kind.drift());
    targets
        .iter()
        .map(|&t| {
            let stencil = stencil_of(t, grid)?;
            let mut vals = [0.0; STENCIL_SIZE];
            for (slot, dof) in vals.iter_mut().zip(stencil) {
                *slot = *dof_values.get(&dof).ok_or(Error::MissingStencilDof { index: dof })?;
            }
            Ok(flux.cell(vals))
        })
        .collect()
}

/// Restricted evaluation compiled against a fixed sorted DOF list `q′`.
///
/// Each target stores the positions of its stencil DOFs inside `q′`, so the
/// online stage only ever touches a vector of length `L = |q′|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedStencils {
    local: Vec<[usize; STENCIL_SIZE]>,
    len: usize,
}

impl RestrictedStencils {
    pub fn new(grid: &GridSpec, targets: &[usize], dofs: &[usize]) -> Result<Self> {
        let local = targets
            .iter()
            .map(|&t| {
                let stencil = stencil_of(t, grid)?;
                let mut pos = [0; STENCIL_SIZE];
                for (slot, dof) in pos.iter_mut().zip(stencil) {
                    *slot = dofs.binary_search(&dof).map_err(|_| Error::MissingStencilDof { index: dof })?;
                }
                Ok(pos)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { local, len: dofs.len() })
    }

    pub fn targets(&self) -> usize {
        self.local.len()
    }

    pub fn dofs(&self) -> usize {
        self.len
    }

    /// Evaluates all targets from the restricted values `y` (aligned with `q′`).
    pub(crate) fn eval(&self, flux: &FluxPair, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.len);
        for (o, pos) in out.iter_mut().zip(&self.local) {
            *o = flux.cell(pos.map(|p| y[p]));
        }
    }
}

/// Largest explicit Euler step satisfying the CFL bound `Δt·(a₁/dx + a₂/dy) ≤ 1`,
/// with `a_r` the maximal combined wave speed over the range of `v`.
///
/// Returns `+∞` when all wave speeds vanish.
pub fn max_stable_dt(v: &Field, p: &BurgersParams, g: LieAlgebraVec) -> f64 {
    let grid = v.grid();
    let (lo, hi) =
        v.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (f64::min(lo, x), f64::max(hi, x)));
    let (lo, hi) = (f64::max(lo, 0.0), f64::max(hi, 0.0));
    let flux = FluxPair::new(grid, p, g);
    // The speed is monotone in u for μ ≥ 1, so the extremes sit at the range ends.
    let ax = f64::max(flux.x.speed(lo).abs(), flux.x.speed(hi).abs());
    let ay = f64::max(flux.y.speed(lo).abs(), flux.y.speed(hi).abs());
    let rate = ax / grid.dx() + ay / grid.dy();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}
